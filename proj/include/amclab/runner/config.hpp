// Experiment configuration: a single JSON document, keys namespaced by
// module. Every run directory carries the exact config that produced it.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amclab/common.hpp"
#include "amclab/feat/features.hpp"
#include "amclab/sim/channel.hpp"
#include "amclab/train/trainer.hpp"
#include "amclab/viz/tsne.hpp"

namespace amclab::runner {

inline const std::vector<std::string>& canonical_bands() {
    static const std::vector<std::string> bands = {"1MHz", "10MHz", "100MHz", "500MHz", "1GHz"};
    return bands;
}

inline const std::vector<std::string>& canonical_directions() {
    static const std::vector<std::string> dirs = {"rayleigh_to_rician", "rician_to_rayleigh"};
    return dirs;
}

struct SimSettings {
    std::size_t per_class = 400;
    std::size_t frame_length = 1024;
    double snr_db = 15.0;
    double rician_k = 4.0;
    std::string fading = "block";  // block | per_symbol
    std::map<std::string, double> band_snr_offsets;  // added to snr_db per band
    std::uint64_t seed = 7;

    sim::FadingMode fading_mode() const {
        if (fading == "block") return sim::FadingMode::Block;
        if (fading == "per_symbol") return sim::FadingMode::PerSymbol;
        throw std::invalid_argument("sim.fading must be 'block' or 'per_symbol'");
    }

    double snr_for_band(const std::string& band) const {
        auto it = band_snr_offsets.find(band);
        return snr_db + (it == band_snr_offsets.end() ? 0.0 : it->second);
    }
};

struct TsneSettings {
    bool enabled = true;
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    std::size_t subsample_per_cell = 200;  // per (class, domain)

    viz::TsneConfig tsne_config(std::uint64_t seed) const {
        viz::TsneConfig c;
        c.perplexity = perplexity;
        c.iterations = iterations;
        c.learning_rate = learning_rate;
        c.seed = seed;
        return c;
    }
};

struct CsvPair {
    std::string rayleigh, rician;
};

struct ExperimentConfig {
    std::string data_mode = "simulate";          // simulate | csv
    std::map<std::string, CsvPair> csv_paths;    // band -> file pair (csv mode)
    std::vector<std::string> bands = {"1MHz"};
    std::vector<std::string> directions = canonical_directions();
    std::vector<std::uint64_t> seeds = {1};
    SimSettings sim;
    feat::FeatureSpec features;
    train::TrainConfig train;
    double dropout_rate = 0.3;
    TsneSettings tsne;
    std::string out_dir = "runs";

    void validate() const {
        if (data_mode != "simulate" && data_mode != "csv")
            throw std::invalid_argument("data.mode must be 'simulate' or 'csv'");
        if (bands.empty()) throw std::invalid_argument("config: no bands requested");
        if (directions.empty()) throw std::invalid_argument("config: no directions requested");
        if (seeds.empty()) throw std::invalid_argument("config: no seeds requested");
        for (const auto& d : directions)
            if (d != "rayleigh_to_rician" && d != "rician_to_rayleigh")
                throw std::invalid_argument("config: unknown direction " + d);
        features.validate();
        train.validate();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["data"]["mode"] = data_mode;
        for (const auto& [band, pair] : csv_paths)
            j["data"]["csv"][band] = {{"rayleigh", pair.rayleigh}, {"rician", pair.rician}};
        j["bands"] = bands;
        j["directions"] = directions;
        j["seeds"] = seeds;
        j["sim"] = {{"per_class", sim.per_class},
                    {"frame_length", sim.frame_length},
                    {"snr_db", sim.snr_db},
                    {"rician_k", sim.rician_k},
                    {"fading", sim.fading},
                    {"seed", sim.seed}};
        for (const auto& [band, off] : sim.band_snr_offsets)
            j["sim"]["band_snr_offsets"][band] = off;
        j["features"] = {{"moments", features.moments},
                         {"cumulants", features.cumulants},
                         {"spectral", features.spectral}};
        j["train"] = {{"lr", train.lr},
                      {"batch_size", train.batch_size},
                      {"epochs", train.epochs},
                      {"lambda_gamma", train.lambda_gamma},
                      {"early_stop", train::to_string(train.early_stop)},
                      {"patience", train.patience},
                      {"dropout_rate", dropout_rate}};
        if (train.lambda_fixed) j["train"]["lambda_fixed"] = *train.lambda_fixed;
        j["tsne"] = {{"enabled", tsne.enabled},
                     {"perplexity", tsne.perplexity},
                     {"iterations", tsne.iterations},
                     {"learning_rate", tsne.learning_rate},
                     {"subsample_per_cell", tsne.subsample_per_cell}};
        j["out_dir"] = out_dir;
        return j;
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        if (j.contains("data")) {
            const auto& d = j.at("data");
            c.data_mode = d.value("mode", c.data_mode);
            if (d.contains("csv"))
                for (auto it = d.at("csv").begin(); it != d.at("csv").end(); ++it)
                    c.csv_paths[it.key()] = {it.value().value("rayleigh", ""),
                                             it.value().value("rician", "")};
        }
        c.bands = j.value("bands", c.bands);
        c.directions = j.value("directions", c.directions);
        c.seeds = j.value("seeds", c.seeds);
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            c.sim.per_class = s.value("per_class", c.sim.per_class);
            c.sim.frame_length = s.value("frame_length", c.sim.frame_length);
            c.sim.snr_db = s.value("snr_db", c.sim.snr_db);
            c.sim.rician_k = s.value("rician_k", c.sim.rician_k);
            c.sim.fading = s.value("fading", c.sim.fading);
            c.sim.seed = s.value("seed", c.sim.seed);
            if (s.contains("band_snr_offsets"))
                for (auto it = s.at("band_snr_offsets").begin();
                     it != s.at("band_snr_offsets").end(); ++it)
                    c.sim.band_snr_offsets[it.key()] = it.value().get<double>();
        }
        if (j.contains("features")) {
            const auto& f = j.at("features");
            c.features.moments = f.value("moments", true);
            c.features.cumulants = f.value("cumulants", true);
            c.features.spectral = f.value("spectral", true);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            c.train.lr = t.value("lr", c.train.lr);
            c.train.batch_size = t.value("batch_size", c.train.batch_size);
            c.train.epochs = t.value("epochs", c.train.epochs);
            c.train.lambda_gamma = t.value("lambda_gamma", c.train.lambda_gamma);
            c.train.early_stop =
                train::early_stop_from_string(t.value("early_stop", std::string("target_val")));
            c.train.patience = t.value("patience", c.train.patience);
            c.dropout_rate = t.value("dropout_rate", c.dropout_rate);
            if (t.contains("lambda_fixed")) c.train.lambda_fixed = t.at("lambda_fixed").get<double>();
        }
        if (j.contains("tsne")) {
            const auto& t = j.at("tsne");
            c.tsne.enabled = t.value("enabled", c.tsne.enabled);
            c.tsne.perplexity = t.value("perplexity", c.tsne.perplexity);
            c.tsne.iterations = t.value("iterations", c.tsne.iterations);
            c.tsne.learning_rate = t.value("learning_rate", c.tsne.learning_rate);
            c.tsne.subsample_per_cell = t.value("subsample_per_cell", c.tsne.subsample_per_cell);
        }
        c.out_dir = j.value("out_dir", c.out_dir);
        c.validate();
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("config: cannot open " + path);
        nlohmann::json j;
        is >> j;
        return from_json(j);
    }

    std::uint64_t config_hash() const {
        const std::string s = to_json().dump();
        return fnv1a(s.data(), s.size());
    }
};

}  // namespace amclab::runner
