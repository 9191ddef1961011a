// Adam optimizer with bias correction, bound to one or more layer stacks.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "amclab/nn/stack.hpp"

namespace amclab::nn {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(std::vector<LayerStack*> stacks, AdamConfig cfg = {})
        : stacks_(std::move(stacks)), cfg_(cfg) {
        if (cfg_.lr < 0) throw std::invalid_argument("Adam: negative learning rate");
        if (cfg_.beta1 <= 0 || cfg_.beta1 >= 1 || cfg_.beta2 <= 0 || cfg_.beta2 >= 1)
            throw std::invalid_argument("Adam: betas must be in (0,1)");
        if (cfg_.eps <= 0) throw std::invalid_argument("Adam: eps must be positive");
        for (auto* s : stacks_)
            for (auto p : s->params()) {
                params_.push_back(p);
                m_.emplace_back(p.value->size(), 0.0);
                v_.emplace_back(p.value->size(), 0.0);
            }
    }

    // One bias-corrected update from the gradients accumulated by backward.
    void step() {
        for (auto* s : stacks_)
            if (!s->grads_ready())
                throw std::logic_error("Adam::step: gradients not populated by a backward pass");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            auto& value = *params_[p].value;
            auto& grad = *params_[p].grad;
            auto& m = m_[p];
            auto& v = v_[p];
            for (std::size_t k = 0; k < value.size(); ++k) {
                const double g = grad[k];
                m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
                v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m[k] / bc1;
                const double vhat = v[k] / bc2;
                value[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
        for (auto* s : stacks_) s->mark_grads_consumed();
    }

    std::uint64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<LayerStack*> stacks_;
    AdamConfig cfg_;
    std::vector<ParamRef> params_;
    std::vector<std::vector<double>> m_, v_;
    std::uint64_t t_ = 0;
};

}  // namespace amclab::nn
