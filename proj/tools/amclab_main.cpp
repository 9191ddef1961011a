// amclab: experiment runner for adversarial domain adaptation on modulation
// classification features.
//
//   amclab simulate --config cfg.json          generate per-band feature CSVs
//   amclab run      --config cfg.json          train + evaluate all cells
//   amclab report   --out runs                 render the three result tables
//   amclab embed    --cell <dir> --model dann  standalone t-SNE export
//   amclab inspect  <manifest.json|*.ckpt>     pretty-print run metadata

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amclab/runner/experiment.hpp"

using namespace amclab;

namespace {

runner::ExperimentConfig load_config_with_overrides(const std::string& config_path,
                                                    const std::string& out_override,
                                                    const std::vector<std::string>& bands,
                                                    const std::vector<std::string>& directions,
                                                    const std::vector<std::uint64_t>& seeds) {
    runner::ExperimentConfig cfg =
        config_path.empty() ? runner::ExperimentConfig{} : runner::ExperimentConfig::load(config_path);
    if (const char* env = std::getenv("AMCLAB_OUT"); env && *env) cfg.out_dir = env;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!bands.empty()) cfg.bands = bands;
    if (!directions.empty()) cfg.directions = directions;
    if (!seeds.empty()) cfg.seeds = seeds;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial domain adaptation lab for modulation classification"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::vector<std::string> bands, directions;
    std::vector<std::uint64_t> seeds;
    bool deterministic = false;
    std::size_t jobs = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)");
        sub->add_option("--out", out_override, "output root (overrides config and AMCLAB_OUT)");
        sub->add_option("--band", bands, "restrict to these band tags");
        sub->add_option("--direction", directions, "restrict to these transfer directions");
        sub->add_option("--seed", seeds, "override the seed list");
        sub->add_flag("--deterministic", deterministic,
                      "serial execution, zeroed wall times; reruns are byte-identical");
    };

    auto* sim_cmd = app.add_subcommand("simulate", "generate per-(band, domain) feature CSVs");
    add_common(sim_cmd);

    auto* run_cmd = app.add_subcommand("run", "train and evaluate all configured cells");
    add_common(run_cmd);
    run_cmd->add_option("--jobs", jobs, "max concurrent cells");

    auto* report_cmd = app.add_subcommand("report", "render result tables from a run root");
    std::string report_root;
    report_cmd->add_option("--out", report_root, "run root directory");

    auto* embed_cmd = app.add_subcommand("embed", "standalone t-SNE export");
    std::string cell_dir, embed_model = "dann", embed_out = "embedding";
    std::vector<std::string> embed_csvs;
    std::uint64_t embed_seed = 0;
    embed_cmd->add_option("--cell", cell_dir, "completed run cell directory");
    embed_cmd->add_option("--model", embed_model, "baseline | dann | raw (with --cell)");
    embed_cmd->add_option("--csv", embed_csvs, "embed raw features of dataset CSV(s) instead");
    embed_cmd->add_option("--out", embed_out, "output prefix (.csv / .svg appended)");
    embed_cmd->add_option("--seed", embed_seed, "embedding seed (csv mode)");

    auto* inspect_cmd = app.add_subcommand("inspect", "pretty-print a manifest or checkpoint");
    std::string inspect_path;
    inspect_cmd->add_option("path", inspect_path, "manifest.json or .ckpt file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            const auto cfg =
                load_config_with_overrides(config_path, out_override, bands, directions, seeds);
            runner::cmd_simulate(cfg);
            return 0;
        }
        if (run_cmd->parsed()) {
            const auto cfg =
                load_config_with_overrides(config_path, out_override, bands, directions, seeds);
            const bool all_ok = runner::cmd_run(cfg, jobs, deterministic);
            if (!all_ok) {
                std::cerr << "one or more cells failed; see summary.csv\n";
                return 1;
            }
            return 0;
        }
        if (report_cmd->parsed()) {
            if (report_root.empty()) {
                if (const char* env = std::getenv("AMCLAB_OUT"); env && *env) report_root = env;
            }
            if (report_root.empty()) {
                std::cerr << "report: --out <run root> is required\n";
                return 2;
            }
            runner::cmd_report(report_root);
            return 0;
        }
        if (embed_cmd->parsed()) {
            if (!embed_csvs.empty()) {
                runner::TsneSettings settings;
                runner::cmd_embed_csv(embed_csvs, embed_out, settings, embed_seed);
            } else if (!cell_dir.empty()) {
                runner::cmd_embed_cell(cell_dir, embed_model, embed_out);
            } else {
                std::cerr << "embed: provide --cell <dir> or --csv <file>\n";
                return 2;
            }
            return 0;
        }
        if (inspect_cmd->parsed()) {
            runner::cmd_inspect(inspect_path);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
