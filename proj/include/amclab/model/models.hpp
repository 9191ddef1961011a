// The two architectures: a supervised baseline MLP and the three-headed
// adversarial model (feature extractor, label head, gradient-reversed
// domain head).
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "amclab/common.hpp"
#include "amclab/nn/checkpoint.hpp"
#include "amclab/nn/layers.hpp"
#include "amclab/nn/stack.hpp"

namespace amclab::model {

using nn::LayerStack;
using nn::Mode;

constexpr std::size_t kNumClasses = 5;
constexpr std::size_t kNumDomains = 2;
constexpr std::size_t kFeatureWidth = 128;  // shared probe / embedding width
constexpr std::size_t kHeadHidden = 64;

struct ModelConfig {
    double dropout_rate = 0.3;
    std::uint64_t seed = 0;
};

// input(d) -> Linear(256) -> BN -> ReLU -> Dropout
//          -> Linear(128) -> BN -> ReLU -> Dropout -> Linear(5)
struct BaselineMLP {
    LayerStack stack;
    std::size_t input_dim;
    ModelConfig config;

    // index of the layer after which the 128-wide penultimate activation
    // (post second ReLU) is read for probes and embeddings
    static constexpr std::size_t kFeatureLayerEnd = 7;

    Matrix forward(const Matrix& x, Mode mode) { return stack.forward(x, mode); }
    Matrix logits_eval(const Matrix& x) { return stack.forward(x, Mode::Eval); }

    Matrix features_eval(const Matrix& x) {
        return stack.forward_prefix(x, kFeatureLayerEnd, Mode::Eval);
    }
};

struct DannModel {
    LayerStack extractor;    // d -> 512 -> 256 -> 128 (BN + GeLU + Dropout each)
    LayerStack label_head;   // 128 -> 64 -> 5 (ReLU)
    LayerStack domain_head;  // GRL -> 128 -> 64 -> 2 (ReLU)
    std::size_t input_dim;
    ModelConfig config;

    nn::GradReversal& grl() { return dynamic_cast<nn::GradReversal&>(domain_head.layer(0)); }
    void set_lambda(double lambda) { grl().set_lambda(lambda); }

    Matrix logits_eval(const Matrix& x) {
        return label_head.forward(extractor.forward(x, Mode::Eval), Mode::Eval);
    }
    Matrix features_eval(const Matrix& x) { return extractor.forward(x, Mode::Eval); }
};

struct DannForward {
    Matrix features;       // batch x 128
    Matrix label_logits;   // batch x 5
    Matrix domain_logits;  // batch x 2
};

// Both heads computed from the same feature tensor; lambda is stored in the
// GRL for the subsequent backward pass.
inline DannForward dann_forward(DannModel& m, const Matrix& batch, Mode mode, double lambda) {
    m.set_lambda(lambda);
    DannForward out;
    out.features = m.extractor.forward(batch, mode);
    out.label_logits = m.label_head.forward(out.features, mode);
    out.domain_logits = m.domain_head.forward(out.features, mode);
    return out;
}

inline BaselineMLP build_baseline(std::size_t d, const ModelConfig& cfg = {}) {
    if (d < 1) throw std::invalid_argument("build_baseline: input dim must be >= 1");
    Rng rng(derive_seed(cfg.seed, 0xBA5E));
    LayerStack s(d);
    s.add(std::make_unique<nn::Linear>(d, 256, rng))
        .add(std::make_unique<nn::BatchNorm>(256))
        .add(std::make_unique<nn::ReLU>())
        .add(std::make_unique<nn::Dropout>(cfg.dropout_rate, derive_seed(cfg.seed, 0xD001)))
        .add(std::make_unique<nn::Linear>(256, kFeatureWidth, rng))
        .add(std::make_unique<nn::BatchNorm>(kFeatureWidth))
        .add(std::make_unique<nn::ReLU>())
        .add(std::make_unique<nn::Dropout>(cfg.dropout_rate, derive_seed(cfg.seed, 0xD002)))
        .add(std::make_unique<nn::Linear>(kFeatureWidth, kNumClasses, rng));
    return BaselineMLP{std::move(s), d, cfg};
}

inline DannModel build_dann(std::size_t d, const ModelConfig& cfg = {}) {
    if (d < 1) throw std::invalid_argument("build_dann: input dim must be >= 1");
    Rng rng(derive_seed(cfg.seed, 0xDA11));

    LayerStack f(d);
    f.add(std::make_unique<nn::Linear>(d, 512, rng))
        .add(std::make_unique<nn::BatchNorm>(512))
        .add(std::make_unique<nn::GeLU>())
        .add(std::make_unique<nn::Dropout>(cfg.dropout_rate, derive_seed(cfg.seed, 0xD101)))
        .add(std::make_unique<nn::Linear>(512, 256, rng))
        .add(std::make_unique<nn::BatchNorm>(256))
        .add(std::make_unique<nn::GeLU>())
        .add(std::make_unique<nn::Dropout>(cfg.dropout_rate, derive_seed(cfg.seed, 0xD102)))
        .add(std::make_unique<nn::Linear>(256, kFeatureWidth, rng))
        .add(std::make_unique<nn::BatchNorm>(kFeatureWidth))
        .add(std::make_unique<nn::GeLU>())
        .add(std::make_unique<nn::Dropout>(cfg.dropout_rate, derive_seed(cfg.seed, 0xD103)));

    LayerStack y(kFeatureWidth);
    y.add(std::make_unique<nn::Linear>(kFeatureWidth, kHeadHidden, rng))
        .add(std::make_unique<nn::ReLU>())
        .add(std::make_unique<nn::Linear>(kHeadHidden, kNumClasses, rng));

    LayerStack dm(kFeatureWidth);
    dm.add(std::make_unique<nn::GradReversal>(0.0))
        .add(std::make_unique<nn::Linear>(kFeatureWidth, kHeadHidden, rng))
        .add(std::make_unique<nn::ReLU>())
        .add(std::make_unique<nn::Linear>(kHeadHidden, kNumDomains, rng));

    return DannModel{std::move(f), std::move(y), std::move(dm), d, cfg};
}

// Row-aligned 128-wide eval-mode features, computed in bounded chunks.
template <typename Model>
Matrix extract_features(Model& m, const Matrix& x, std::size_t chunk = 1024) {
    Matrix out(x.rows, kFeatureWidth);
    for (std::size_t start = 0; start < x.rows; start += chunk) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(x.rows, start + chunk); ++i) idx.push_back(i);
        const Matrix part = m.features_eval(x.row_slice(idx));
        for (std::size_t i = 0; i < part.rows; ++i)
            for (std::size_t j = 0; j < part.cols; ++j) out(start + i, j) = part(i, j);
    }
    return out;
}

inline void save_model(const std::filesystem::path& path, BaselineMLP& m,
                       nlohmann::json extra = nlohmann::json::object()) {
    extra["model"] = "baseline";
    extra["input_dim"] = m.input_dim;
    extra["dropout_rate"] = m.config.dropout_rate;
    extra["stack"] = m.stack.descriptor();
    nn::save_checkpoint(path, extra, m.stack.state());
}

inline void save_model(const std::filesystem::path& path, DannModel& m,
                       nlohmann::json extra = nlohmann::json::object()) {
    extra["model"] = "dann";
    extra["input_dim"] = m.input_dim;
    extra["dropout_rate"] = m.config.dropout_rate;
    extra["stacks"] = {{"extractor", m.extractor.descriptor()},
                       {"label_head", m.label_head.descriptor()},
                       {"domain_head", m.domain_head.descriptor()}};
    std::vector<nn::StateRef> tensors;
    for (auto& [prefix, stack] :
         std::initializer_list<std::pair<const char*, LayerStack*>>{
             {"extractor", &m.extractor}, {"label_head", &m.label_head}, {"domain_head", &m.domain_head}}) {
        for (auto s : stack->state()) {
            s.name = std::string(prefix) + "." + s.name;
            tensors.push_back(s);
        }
    }
    nn::save_checkpoint(path, extra, tensors);
}

// Reads the architecture descriptor, rebuilds the model, and loads tensors.
inline BaselineMLP load_baseline(const std::filesystem::path& path) {
    nn::Checkpoint ck = nn::load_checkpoint(path);
    if (ck.meta.value("model", "") != "baseline")
        throw std::runtime_error("load_baseline: checkpoint is not a baseline model");
    ModelConfig cfg;
    cfg.dropout_rate = ck.meta.value("dropout_rate", cfg.dropout_rate);
    BaselineMLP m = build_baseline(ck.meta.at("input_dim").get<std::size_t>(), cfg);
    if (ck.meta.at("stack") != m.stack.descriptor())
        throw std::runtime_error("load_baseline: architecture descriptor mismatch");
    for (auto& ref : m.stack.state()) *ref.value = ck.find(ref.name).values;
    return m;
}

inline DannModel load_dann(const std::filesystem::path& path) {
    nn::Checkpoint ck = nn::load_checkpoint(path);
    if (ck.meta.value("model", "") != "dann")
        throw std::runtime_error("load_dann: checkpoint is not a dann model");
    ModelConfig cfg;
    cfg.dropout_rate = ck.meta.value("dropout_rate", cfg.dropout_rate);
    DannModel m = build_dann(ck.meta.at("input_dim").get<std::size_t>(), cfg);
    const auto& stacks = ck.meta.at("stacks");
    if (stacks.at("extractor") != m.extractor.descriptor() ||
        stacks.at("label_head") != m.label_head.descriptor() ||
        stacks.at("domain_head") != m.domain_head.descriptor())
        throw std::runtime_error("load_dann: architecture descriptor mismatch");
    for (auto& [prefix, stack] :
         std::initializer_list<std::pair<const char*, LayerStack*>>{
             {"extractor", &m.extractor}, {"label_head", &m.label_head}, {"domain_head", &m.domain_head}}) {
        for (auto ref : stack->state())
            *ref.value = ck.find(std::string(prefix) + "." + ref.name).values;
    }
    return m;
}

}  // namespace amclab::model
