// Experiment runner: dataset simulation, per-cell training runs, and the
// three report tables (domain-probe accuracy, average accuracy with
// improvements, per-class accuracy).
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "amclab/data/dataset.hpp"
#include "amclab/data/scaler.hpp"
#include "amclab/data/splits.hpp"
#include "amclab/feat/features.hpp"
#include "amclab/model/models.hpp"
#include "amclab/runner/config.hpp"
#include "amclab/sim/frameset.hpp"
#include "amclab/train/metrics.hpp"
#include "amclab/train/probe.hpp"
#include "amclab/train/trainer.hpp"
#include "amclab/viz/plot.hpp"
#include "amclab/viz/tsne.hpp"

namespace amclab::runner {

namespace fs = std::filesystem;

inline std::string direction_source(const std::string& direction) {
    return direction == "rayleigh_to_rician" ? "rayleigh" : "rician";
}
inline std::string direction_target(const std::string& direction) {
    return direction == "rayleigh_to_rician" ? "rician" : "rayleigh";
}
inline std::string pretty_direction(const std::string& direction) {
    return direction == "rayleigh_to_rician" ? "Rayleigh->Rician" : "Rician->Rayleigh";
}

inline fs::path simulated_data_path(const ExperimentConfig& cfg, const std::string& band,
                                    const std::string& domain) {
    return fs::path(cfg.out_dir) / "data" / (band + "_" + domain + ".csv");
}

inline fs::path resolve_data_path(const ExperimentConfig& cfg, const std::string& band,
                                  const std::string& domain) {
    if (cfg.data_mode == "csv") {
        auto it = cfg.csv_paths.find(band);
        if (it == cfg.csv_paths.end())
            throw std::runtime_error("no csv paths configured for band " + band);
        return domain == "rayleigh" ? it->second.rayleigh : it->second.rician;
    }
    return simulated_data_path(cfg, band, domain);
}

inline std::uint64_t file_fingerprint(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot fingerprint " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (is.read(buf, sizeof buf) || is.gcount() > 0)
        h = fnv1a(buf, static_cast<std::size_t>(is.gcount()), h);
    return h;
}

// --- simulate ----------------------------------------------------------------

// Writes one feature CSV per (band, domain) pair in the dataset contract.
// Files are written to a temporary name and renamed on success; failures
// leave no partial file behind.
inline std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg,
                                          std::ostream& log = std::cout) {
    cfg.validate();
    const fs::path data_dir = fs::path(cfg.out_dir) / "data";
    fs::create_directories(data_dir);
    std::vector<fs::path> written;
    for (const auto& band : cfg.bands) {
        for (const std::string domain : {"rayleigh", "rician"}) {
            sim::ChannelConfig ch;
            ch.model = domain == "rayleigh" ? sim::ChannelModel::Rayleigh
                                            : sim::ChannelModel::Rician;
            ch.k_factor = cfg.sim.rician_k;
            ch.snr_db = cfg.sim.snr_for_band(band);
            ch.fading = cfg.sim.fading_mode();
            ch.band = band;
            ch.seed = derive_seed(cfg.sim.seed, fnv1a(band.data(), band.size()) ^
                                                    (domain == "rician" ? 1 : 0));
            const fs::path path = simulated_data_path(cfg, band, domain);
            const fs::path tmp = path.string() + ".tmp";
            try {
                const auto frames = sim::gen_frameset(cfg.sim.per_class, cfg.sim.frame_length, ch);
                auto extracted = feat::extract(frames, cfg.features);
                extracted.dataset.domain = domain;
                data::save_csv(extracted.dataset, tmp.string());
                fs::rename(tmp, path);
                if (extracted.quality.degenerate_frames > 0)
                    log << "note: " << path.filename().string() << ": "
                        << extracted.quality.degenerate_frames << " degenerate frames flagged\n";
                log << "wrote " << path.string() << " (" << extracted.dataset.size() << " rows x "
                    << extracted.dataset.dim() << " features)\n";
                written.push_back(path);
            } catch (...) {
                std::error_code ec;
                fs::remove(tmp, ec);
                throw;
            }
        }
    }
    return written;
}

// --- run ----------------------------------------------------------------------

struct CellOutcome {
    std::string band, direction;
    std::uint64_t seed = 0;
    bool ok = false;
    bool skipped = false;  // already complete, resumed
    std::string error;
    double wall_s = 0.0;
    train::MetricsReport baseline, dann;
};

inline std::string cell_dir_name(const std::string& band, const std::string& direction,
                                 std::uint64_t seed) {
    return band + "_" + direction + "_seed" + std::to_string(seed);
}

namespace detail {

// Equal-sized per-domain row subsets for the probe, so chance level is 0.5.
inline std::pair<Matrix, Matrix> balanced_pair(const Matrix& a, const Matrix& b,
                                               std::uint64_t seed, std::size_t cap = 2000) {
    const std::size_t m = std::min({a.rows, b.rows, cap});
    Rng rng(derive_seed(seed, 0xba1a));
    auto pick = [&rng, m](const Matrix& x) {
        std::vector<std::size_t> idx(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) idx[i] = i;
        rng.shuffle(idx);
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        return x.row_slice(idx);
    };
    return {pick(a), pick(b)};
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("vstack: width mismatch");
    Matrix out(a.rows + b.rows, a.cols);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << text;
}

}  // namespace detail

inline CellOutcome run_cell(const ExperimentConfig& cfg, const std::string& band,
                            const std::string& direction, std::uint64_t seed,
                            bool deterministic, std::ostream& log, std::mutex& log_mutex) {
    CellOutcome out;
    out.band = band;
    out.direction = direction;
    out.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();

    const fs::path cell_dir = fs::path(cfg.out_dir) / cell_dir_name(band, direction, seed);
    const fs::path manifest_path = cell_dir / "manifest.json";

    // resume: a completed cell with the same config is not recomputed
    if (fs::exists(manifest_path)) {
        try {
            std::ifstream is(manifest_path);
            nlohmann::json m;
            is >> m;
            if (m.value("status", "") == "complete" &&
                m.value("config_hash", "") == to_hex(cfg.config_hash())) {
                out.ok = true;
                out.skipped = true;
                out.baseline = train::load_metrics((cell_dir / "baseline_metrics.json").string());
                out.dann = train::load_metrics((cell_dir / "dann_metrics.json").string());
                std::lock_guard<std::mutex> lk(log_mutex);
                log << "cell " << cell_dir.filename().string() << ": already complete, skipped\n";
                return out;
            }
        } catch (...) {
            // unreadable manifest: recompute the cell
        }
    }

    try {
        fs::create_directories(cell_dir);
        const std::string src_domain = direction_source(direction);
        const std::string tgt_domain = direction_target(direction);
        const fs::path src_path = resolve_data_path(cfg, band, src_domain);
        const fs::path tgt_path = resolve_data_path(cfg, band, tgt_domain);

        data::LoadOptions src_opt{.label_column = "label", .domain = src_domain, .band = band};
        data::LoadOptions tgt_opt{.label_column = "label", .domain = tgt_domain, .band = band};
        const data::Dataset source = data::load_csv(src_path.string(), src_opt);
        const data::Dataset target = data::load_csv(tgt_path.string(), tgt_opt);
        if (source.dim() != target.dim())
            throw std::runtime_error("source/target feature width mismatch");

        const auto plan = data::make_splits(source, target, derive_seed(seed, 0x511));

        const data::Dataset src_train = source.subset(plan.source_train);
        const data::Dataset src_val = source.subset(plan.source_val);
        const data::Dataset tgt_unl = target.subset(plan.target_unlabeled);
        const data::Dataset tgt_eval = target.subset(plan.target_eval);

        data::StandardScaler scaler;
        scaler.fit(src_train.features, src_domain);
        const Matrix xtr = scaler.transform(src_train.features);
        const Matrix xval = scaler.transform(src_val.features);
        const Matrix xunl = scaler.transform(tgt_unl.features);
        const Matrix xte = scaler.transform(tgt_eval.features);

        train::TrainConfig tc = cfg.train;
        tc.seed = derive_seed(seed, 0x7c1);
        model::ModelConfig mc;
        mc.dropout_rate = cfg.dropout_rate;
        mc.seed = derive_seed(seed, 0x3000);

        // baseline: source-only supervised training
        model::BaselineMLP baseline = model::build_baseline(source.dim(), mc);
        const auto base_hist =
            train::train_baseline(baseline, xtr, src_train.labels, xval, src_val.labels, tc);
        train::write_history_csv(base_hist, (cell_dir / "baseline_history.csv").string());
        out.baseline = train::evaluate(baseline, xte, tgt_eval.labels);

        // adversarial model
        model::DannModel dann = model::build_dann(source.dim(), mc);
        const auto dann_hist = train::train_dann(dann, xtr, src_train.labels, xval,
                                                 src_val.labels, xunl, tc, &xte,
                                                 &tgt_eval.labels);
        train::write_history_csv(dann_hist, (cell_dir / "dann_history.csv").string());
        train::write_steps_csv(dann_hist, (cell_dir / "dann_steps.csv").string());
        out.dann = train::evaluate(dann, xte, tgt_eval.labels);

        // domain probes on the 128-wide features, held-out partitions
        const auto [pb_src, pb_tgt] = detail::balanced_pair(xval, xte, derive_seed(seed, 0xfa));
        const Matrix feat_b_src = model::extract_features(baseline, pb_src);
        const Matrix feat_b_tgt = model::extract_features(baseline, pb_tgt);
        const Matrix feat_d_src = model::extract_features(dann, pb_src);
        const Matrix feat_d_tgt = model::extract_features(dann, pb_tgt);
        const double dca_before = train::domain_probe(feat_b_src, feat_b_tgt, derive_seed(seed, 0xdc));
        const double dca_after = train::domain_probe(feat_d_src, feat_d_tgt, derive_seed(seed, 0xdc));

        out.baseline.dca_before = dca_before;
        out.dann.dca_before = dca_before;
        out.dann.dca_after = dca_after;
        const auto imp = train::improvement(out.baseline.avg_acc, out.dann.avg_acc);
        out.dann.abs_improvement = imp.absolute;
        out.dann.pct_improvement = imp.percent;

        train::save_metrics(out.baseline, (cell_dir / "baseline_metrics.json").string());
        train::save_metrics(out.dann, (cell_dir / "dann_metrics.json").string());

        // human-readable per-cell summary
        {
            std::ostringstream txt;
            txt << "cell: " << band << " " << pretty_direction(direction) << " seed " << seed
                << "\n\n";
            txt << "baseline: overall " << train::fmt2(out.baseline.overall_acc) << "%, avg "
                << train::fmt2(out.baseline.avg_acc) << "%\n";
            txt << train::render_confusion(out.baseline) << "\n";
            txt << "dann: overall " << train::fmt2(out.dann.overall_acc) << "%, avg "
                << train::fmt2(out.dann.avg_acc) << "%\n";
            txt << train::render_confusion(out.dann) << "\n";
            txt << "dca before " << train::fmt2(100.0 * dca_before) << "% -> after "
                << train::fmt2(100.0 * dca_after) << "%\n";
            txt << "improvement abs " << train::fmt2(imp.absolute, true) << ", pct "
                << train::fmt2(imp.percent, true) << "\n";
            detail::write_text(cell_dir / "metrics_report.txt", txt.str());
        }

        model::save_model(cell_dir / "baseline.ckpt", baseline);
        model::save_model(cell_dir / "dann.ckpt", dann);

        // embeddings over held-out rows of both domains
        if (cfg.tsne.enabled) {
            std::vector<int> lab = src_val.labels;
            lab.insert(lab.end(), tgt_eval.labels.begin(), tgt_eval.labels.end());
            std::vector<std::string> dom(src_val.size(), src_domain);
            dom.insert(dom.end(), tgt_eval.size(), tgt_domain);
            const Matrix xcat = detail::vstack(xval, xte);
            const auto keep = viz::stratified_subsample(lab, dom, cfg.tsne.subsample_per_cell,
                                                        derive_seed(seed, 0x75e));
            std::vector<int> lab_s;
            std::vector<std::string> dom_s;
            for (auto i : keep) {
                lab_s.push_back(lab[i]);
                dom_s.push_back(dom[i]);
            }
            const Matrix xsub = xcat.row_slice(keep);
            const auto cfg_tsne = cfg.tsne.tsne_config(derive_seed(seed, 0x73e));
            for (const auto& [name, feats] :
                 std::initializer_list<std::pair<const char*, Matrix>>{
                     {"baseline", model::extract_features(baseline, xsub)},
                     {"dann", model::extract_features(dann, xsub)}}) {
                const auto emb = viz::tsne(feats, lab_s, dom_s, cfg_tsne);
                viz::export_plot_data(emb, (cell_dir / (std::string(name) + "_tsne.csv")).string());
                viz::render_scatter(emb, (cell_dir / (std::string(name) + "_tsne.svg")).string(),
                                    std::string(name) + " features, " + band + " " +
                                        pretty_direction(direction));
            }
        }

        // manifest: everything needed to reproduce the cell byte-for-byte
        nlohmann::json manifest;
        manifest["cell"] = {{"band", band}, {"direction", direction}, {"seed", seed}};
        manifest["config_hash"] = to_hex(cfg.config_hash());
        manifest["config"] = cfg.to_json();
        manifest["data"] = {{"source_path", src_path.string()},
                            {"target_path", tgt_path.string()},
                            {"source_fingerprint", to_hex(file_fingerprint(src_path))},
                            {"target_fingerprint", to_hex(file_fingerprint(tgt_path))}};
        manifest["scaler"] = {{"means", scaler.means()},
                              {"stds", scaler.stds()},
                              {"fitted_on", scaler.fitted_on()},
                              {"std_floor", scaler.std_floor()}};
        manifest["splits"] = {{"seed", plan.seed},
                              {"source_train", plan.source_train},
                              {"source_val", plan.source_val},
                              {"target_unlabeled", plan.target_unlabeled},
                              {"target_eval", plan.target_eval}};
        manifest["train"] = {{"monitor_baseline", base_hist.monitor},
                             {"monitor_dann", dann_hist.monitor},
                             {"best_epoch_baseline", base_hist.best_epoch},
                             {"best_epoch_dann", dann_hist.best_epoch},
                             {"early_stopped_baseline", base_hist.early_stopped},
                             {"early_stopped_dann", dann_hist.early_stopped}};
        manifest["results"] = {{"baseline_overall", out.baseline.overall_acc},
                               {"baseline_avg", out.baseline.avg_acc},
                               {"dann_overall", out.dann.overall_acc},
                               {"dann_avg", out.dann.avg_acc},
                               {"dca_before", dca_before},
                               {"dca_after", dca_after},
                               {"abs_improvement", imp.absolute},
                               {"pct_improvement", imp.percent}};
        manifest["status"] = "complete";
        detail::write_text(manifest_path, manifest.dump(2) + "\n");

        out.ok = true;
        {
            std::lock_guard<std::mutex> lk(log_mutex);
            log << "cell " << cell_dir.filename().string() << ": baseline avg "
                << train::fmt2(out.baseline.avg_acc) << "%, dann avg "
                << train::fmt2(out.dann.avg_acc) << "%, dca " << train::fmt2(100 * dca_before)
                << "% -> " << train::fmt2(100 * dca_after) << "%\n";
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
        std::lock_guard<std::mutex> lk(log_mutex);
        log << "cell " << cell_dir_name(band, direction, seed) << " FAILED: " << e.what() << "\n";
    }

    const auto t1 = std::chrono::steady_clock::now();
    out.wall_s = deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
    return out;
}

// Runs every (band, direction, seed) cell, up to `jobs` concurrently. A stage
// failure aborts only its own cell; the summary records it. Returns true iff
// all requested cells completed.
inline bool cmd_run(const ExperimentConfig& cfg, std::size_t jobs = 1,
                    bool deterministic = false, std::ostream& log = std::cout) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    struct CellKey {
        std::string band, direction;
        std::uint64_t seed;
    };
    std::vector<CellKey> cells;
    for (const auto& band : cfg.bands)
        for (const auto& direction : cfg.directions)
            for (const auto seed : cfg.seeds) cells.push_back({band, direction, seed});

    std::vector<CellOutcome> outcomes(cells.size());
    std::mutex log_mutex;
    if (jobs <= 1 || deterministic) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            outcomes[i] = run_cell(cfg, cells[i].band, cells[i].direction, cells[i].seed,
                                   deterministic, log, log_mutex);
    } else {
        std::size_t next = 0;
        std::mutex next_mutex;
        auto worker = [&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lk(next_mutex);
                    if (next == cells.size()) return;
                    i = next++;
                }
                outcomes[i] = run_cell(cfg, cells[i].band, cells[i].direction, cells[i].seed,
                                       deterministic, log, log_mutex);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(jobs, cells.size()); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // machine-readable summary, one row per cell, fixed order
    std::ofstream os(fs::path(cfg.out_dir) / "summary.csv", std::ios::trunc);
    os << "band,direction,seed,status,baseline_overall,baseline_avg,dann_overall,dann_avg,"
          "dca_before,dca_after,abs_improvement,pct_improvement,wall_s\n";
    bool all_ok = true;
    char buf[512];
    for (const auto& o : outcomes) {
        all_ok = all_ok && o.ok;
        if (o.ok) {
            std::snprintf(buf, sizeof buf,
                          "%s,%s,%llu,complete,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                          o.band.c_str(), o.direction.c_str(),
                          static_cast<unsigned long long>(o.seed), o.baseline.overall_acc,
                          o.baseline.avg_acc, o.dann.overall_acc, o.dann.avg_acc,
                          o.dann.dca_before, o.dann.dca_after, o.dann.abs_improvement,
                          o.dann.pct_improvement, o.wall_s);
            os << buf;
        } else {
            os << o.band << "," << o.direction << "," << o.seed << ",failed,,,,,,,,,\n";
        }
    }
    return all_ok;
}

// --- report -------------------------------------------------------------------

namespace detail {

struct CellData {
    std::string band, direction;
    std::uint64_t seed;
    train::MetricsReport baseline, dann;
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// "median" or "median (min-max)" for multi-seed cells
inline std::string agg(const std::vector<double>& v, int decimals, bool sign = false) {
    if (v.empty()) return "";
    char buf[96];
    const char* f2 = sign ? "%+.*f" : "%.*f";
    std::snprintf(buf, sizeof buf, f2, decimals, median(v));
    std::string s = buf;
    if (v.size() > 1) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        std::snprintf(buf, sizeof buf, " (%.*f-%.*f)", decimals, *mn, decimals, *mx);
        s += buf;
    }
    return s;
}

inline std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + "  " : s + std::string(width - s.size() + 2, ' ');
}

}  // namespace detail

// Renders the three tables from completed run cells, as aligned text and CSV.
// Missing cells are left blank with a footnote. Returns the number of cells
// found; throws on an unusable run root.
inline std::size_t cmd_report(const std::string& run_root, std::ostream& log = std::cout) {
    if (!fs::exists(run_root))
        throw std::runtime_error("report: run root does not exist: " + run_root);

    std::vector<detail::CellData> cells;
    std::vector<fs::path> cell_dirs;
    for (const auto& entry : fs::directory_iterator(run_root))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            cell_dirs.push_back(entry.path());
    std::sort(cell_dirs.begin(), cell_dirs.end());
    for (const auto& dir : cell_dirs) {
        try {
            std::ifstream is(dir / "manifest.json");
            nlohmann::json m;
            is >> m;
            if (m.value("status", "") != "complete") continue;
            detail::CellData c;
            c.band = m.at("cell").at("band").get<std::string>();
            c.direction = m.at("cell").at("direction").get<std::string>();
            c.seed = m.at("cell").at("seed").get<std::uint64_t>();
            c.baseline = train::load_metrics((dir / "baseline_metrics.json").string());
            c.dann = train::load_metrics((dir / "dann_metrics.json").string());
            cells.push_back(std::move(c));
        } catch (const std::exception& e) {
            log << "report: skipping " << dir.filename().string() << ": " << e.what() << "\n";
        }
    }
    if (cells.empty())
        throw std::runtime_error("report: no completed run cells under " + run_root);

    // bands in canonical order first, then any others encountered
    std::vector<std::string> bands;
    for (const auto& b : canonical_bands())
        for (const auto& c : cells)
            if (c.band == b && std::find(bands.begin(), bands.end(), b) == bands.end())
                bands.push_back(b);
    for (const auto& c : cells)
        if (std::find(bands.begin(), bands.end(), c.band) == bands.end())
            bands.push_back(c.band);

    auto cells_of = [&](const std::string& band, const std::string& direction) {
        std::vector<const detail::CellData*> out;
        for (const auto& c : cells)
            if (c.band == band && c.direction == direction) out.push_back(&c);
        return out;
    };

    const fs::path report_dir = fs::path(run_root) / "report";
    fs::create_directories(report_dir);
    std::vector<std::string> missing;

    // Table 1: DCA before/after
    {
        std::ostringstream txt, csv;
        txt << detail::pad("Frequency", 10) << detail::pad("Direction", 18)
            << detail::pad("DCA Before", 18) << "DCA After\n";
        csv << "frequency,direction,dca_before,dca_after\n";
        for (const auto& band : bands) {
            for (const auto& direction : canonical_directions()) {
                const auto group = cells_of(band, direction);
                std::vector<double> before, after;
                for (const auto* c : group) {
                    before.push_back(c->dann.dca_before);
                    after.push_back(c->dann.dca_after);
                }
                if (group.empty()) missing.push_back(band + "/" + direction);
                txt << detail::pad(band, 10) << detail::pad(pretty_direction(direction), 18)
                    << detail::pad(detail::agg(before, 4), 18) << detail::agg(after, 4) << "\n";
                csv << band << "," << direction << "," << detail::agg(before, 4) << ","
                    << detail::agg(after, 4) << "\n";
            }
        }
        if (!missing.empty()) txt << "\nnote: blank cells have no completed runs\n";
        detail::write_text(report_dir / "table1_dca.txt", txt.str());
        detail::write_text(report_dir / "table1_dca.csv", csv.str());
    }

    // Table 2: average accuracy with improvements
    {
        std::ostringstream txt, csv;
        txt << detail::pad("Frequency", 10) << detail::pad("Direction", 18)
            << detail::pad("Avg. Baseline", 22) << detail::pad("Avg. DANN", 22)
            << detail::pad("Abs. Improvement", 20) << "% Improvement\n";
        csv << "frequency,direction,avg_baseline,avg_dann,abs_improvement,pct_improvement\n";
        for (const auto& band : bands) {
            for (const auto& direction : canonical_directions()) {
                const auto group = cells_of(band, direction);
                std::vector<double> base, dann, abs_i, pct_i;
                for (const auto* c : group) {
                    base.push_back(c->baseline.avg_acc);
                    dann.push_back(c->dann.avg_acc);
                    abs_i.push_back(c->dann.abs_improvement);
                    pct_i.push_back(c->dann.pct_improvement);
                }
                txt << detail::pad(band, 10) << detail::pad(pretty_direction(direction), 18)
                    << detail::pad(detail::agg(base, 2), 22) << detail::pad(detail::agg(dann, 2), 22)
                    << detail::pad(detail::agg(abs_i, 2, true), 20) << detail::agg(pct_i, 2, true)
                    << "\n";
                csv << band << "," << direction << "," << detail::agg(base, 2) << ","
                    << detail::agg(dann, 2) << "," << detail::agg(abs_i, 2, true) << ","
                    << detail::agg(pct_i, 2, true) << "\n";
            }
        }
        if (!missing.empty()) txt << "\nnote: blank cells have no completed runs\n";
        detail::write_text(report_dir / "table2_accuracy.txt", txt.str());
        detail::write_text(report_dir / "table2_accuracy.csv", csv.str());
    }

    // Table 3: per-class accuracy, one block per band
    {
        std::ostringstream txt, csv;
        csv << "frequency,direction,modulation,baseline,dann,delta\n";
        for (const auto& band : bands) {
            txt << "== " << band << " ==\n";
            txt << detail::pad("Direction", 18) << detail::pad("Modulation", 12)
                << detail::pad("Baseline", 18) << detail::pad("DANN", 18) << "Delta Accuracy\n";
            for (const auto& direction : canonical_directions()) {
                const auto group = cells_of(band, direction);
                for (std::size_t cls = 0; cls < train::kClasses; ++cls) {
                    std::vector<double> base, dann, delta;
                    for (const auto* c : group) {
                        if (!c->baseline.per_class_defined[cls] || !c->dann.per_class_defined[cls])
                            continue;
                        base.push_back(c->baseline.per_class_acc[cls]);
                        dann.push_back(c->dann.per_class_acc[cls]);
                        delta.push_back(c->dann.per_class_acc[cls] -
                                        c->baseline.per_class_acc[cls]);
                    }
                    txt << detail::pad(cls == 0 ? pretty_direction(direction) : "", 18)
                        << detail::pad(data::decode_label(static_cast<int>(cls)), 12)
                        << detail::pad(detail::agg(base, 2), 18)
                        << detail::pad(detail::agg(dann, 2), 18) << detail::agg(delta, 2, true)
                        << "\n";
                    csv << band << "," << direction << ","
                        << data::decode_label(static_cast<int>(cls)) << ","
                        << detail::agg(base, 2) << "," << detail::agg(dann, 2) << ","
                        << detail::agg(delta, 2, true) << "\n";
                }
            }
            txt << "\n";
        }
        if (!missing.empty()) txt << "note: blank cells have no completed runs\n";
        detail::write_text(report_dir / "table3_per_class.txt", txt.str());
        detail::write_text(report_dir / "table3_per_class.csv", csv.str());
    }

    log << "report written to " << report_dir.string() << " (" << cells.size() << " cells)\n";
    return cells.size();
}

// --- embed / inspect -----------------------------------------------------------

// Standalone t-SNE export for a completed cell: recomputes features with the
// stored checkpoint and scaler, embeds, and writes CSV + SVG.
inline void cmd_embed_cell(const std::string& cell_dir_s, const std::string& which,
                           const std::string& out_prefix, std::ostream& log = std::cout) {
    const fs::path cell_dir(cell_dir_s);
    std::ifstream is(cell_dir / "manifest.json");
    if (!is) throw std::runtime_error("embed: no manifest in " + cell_dir_s);
    nlohmann::json m;
    is >> m;

    const ExperimentConfig cfg = ExperimentConfig::from_json(m.at("config"));
    const std::string band = m.at("cell").at("band").get<std::string>();
    const std::string direction = m.at("cell").at("direction").get<std::string>();
    const std::uint64_t seed = m.at("cell").at("seed").get<std::uint64_t>();
    const std::string src_domain = direction_source(direction);
    const std::string tgt_domain = direction_target(direction);

    data::LoadOptions src_opt{.label_column = "label", .domain = src_domain, .band = band};
    data::LoadOptions tgt_opt{.label_column = "label", .domain = tgt_domain, .band = band};
    const data::Dataset source =
        data::load_csv(m.at("data").at("source_path").get<std::string>(), src_opt);
    const data::Dataset target =
        data::load_csv(m.at("data").at("target_path").get<std::string>(), tgt_opt);

    const auto plan = data::make_splits(source, target, derive_seed(seed, 0x511));
    const data::Dataset src_val = source.subset(plan.source_val);
    const data::Dataset tgt_eval = target.subset(plan.target_eval);

    data::StandardScaler scaler;
    scaler.fit(source.subset(plan.source_train).features, src_domain);
    const Matrix xval = scaler.transform(src_val.features);
    const Matrix xte = scaler.transform(tgt_eval.features);

    std::vector<int> lab = src_val.labels;
    lab.insert(lab.end(), tgt_eval.labels.begin(), tgt_eval.labels.end());
    std::vector<std::string> dom(src_val.size(), src_domain);
    dom.insert(dom.end(), tgt_eval.size(), tgt_domain);
    const Matrix xcat = detail::vstack(xval, xte);
    const auto keep = viz::stratified_subsample(lab, dom, cfg.tsne.subsample_per_cell,
                                                derive_seed(seed, 0x75e));
    std::vector<int> lab_s;
    std::vector<std::string> dom_s;
    for (auto i : keep) {
        lab_s.push_back(lab[i]);
        dom_s.push_back(dom[i]);
    }
    const Matrix xsub = xcat.row_slice(keep);

    Matrix feats;
    if (which == "baseline") {
        auto mdl = model::load_baseline(cell_dir / "baseline.ckpt");
        feats = model::extract_features(mdl, xsub);
    } else if (which == "dann") {
        auto mdl = model::load_dann(cell_dir / "dann.ckpt");
        feats = model::extract_features(mdl, xsub);
    } else if (which == "raw") {
        feats = xsub;
    } else {
        throw std::invalid_argument("embed: model must be baseline, dann, or raw");
    }

    const auto emb = viz::tsne(feats, lab_s, dom_s, cfg.tsne.tsne_config(derive_seed(seed, 0x73e)));
    viz::export_plot_data(emb, out_prefix + ".csv");
    viz::render_scatter(emb, out_prefix + ".svg",
                        which + " features, " + band + " " + pretty_direction(direction));
    log << "wrote " << out_prefix << ".csv and " << out_prefix << ".svg\n";
}

// t-SNE over raw features of one or two dataset CSVs (no model involved).
inline void cmd_embed_csv(const std::vector<std::string>& csv_paths,
                          const std::string& out_prefix, const TsneSettings& settings,
                          std::uint64_t seed, std::ostream& log = std::cout) {
    if (csv_paths.empty()) throw std::invalid_argument("embed: no input csv given");
    Matrix feats;
    std::vector<int> lab;
    std::vector<std::string> dom;
    for (std::size_t k = 0; k < csv_paths.size(); ++k) {
        data::LoadOptions opt;
        opt.domain = "set" + std::to_string(k);
        const data::Dataset ds = data::load_csv(csv_paths[k], opt);
        feats = k == 0 ? ds.features : detail::vstack(feats, ds.features);
        lab.insert(lab.end(), ds.labels.begin(), ds.labels.end());
        dom.insert(dom.end(), ds.size(), opt.domain);
    }
    const auto keep = viz::stratified_subsample(lab, dom, settings.subsample_per_cell,
                                                derive_seed(seed, 0x75e));
    std::vector<int> lab_s;
    std::vector<std::string> dom_s;
    for (auto i : keep) {
        lab_s.push_back(lab[i]);
        dom_s.push_back(dom[i]);
    }
    const auto emb = viz::tsne(feats.row_slice(keep), lab_s, dom_s,
                               settings.tsne_config(derive_seed(seed, 0x73e)));
    viz::export_plot_data(emb, out_prefix + ".csv");
    viz::render_scatter(emb, out_prefix + ".svg", "raw features");
    log << "wrote " << out_prefix << ".csv and " << out_prefix << ".svg\n";
}

// Pretty-prints a manifest or checkpoint header.
inline void cmd_inspect(const std::string& path, std::ostream& log = std::cout) {
    const fs::path p(path);
    if (p.extension() == ".ckpt") {
        const auto ck = nn::load_checkpoint(p);
        nlohmann::json j;
        j["meta"] = ck.meta;
        for (const auto& t : ck.tensors)
            j["tensors"].push_back({{"name", t.name}, {"dims", t.dims}});
        log << j.dump(2) << "\n";
        return;
    }
    std::ifstream is(p);
    if (!is) throw std::runtime_error("inspect: cannot open " + path);
    nlohmann::json j;
    is >> j;
    log << j.dump(2) << "\n";
}

}  // namespace amclab::runner
