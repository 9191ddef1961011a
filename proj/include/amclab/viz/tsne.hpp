// Exact (non-approximated) t-SNE with perplexity calibration by binary
// search, early exaggeration, and the standard momentum/gain schedule.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/matrix.hpp"

namespace amclab::viz {

struct TsneConfig {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    std::uint64_t seed = 0;
    double momentum_start = 0.5;
    double momentum_late = 0.8;
    std::size_t momentum_switch_iter = 250;  // momentum_late after this iteration
    double early_exaggeration = 12.0;
    std::size_t exaggeration_until = 250;  // exaggerated P for iterations 1..250
    // Optional explicit n x 2 initialization; defaults to seeded N(0, 1e-4).
    std::optional<Matrix> initial;
};

struct Embedding2D {
    Matrix points;  // n x 2
    std::vector<int> labels;
    std::vector<std::string> domains;
    std::vector<double> kl_trace;  // KL divergence per iteration (true P)
};

namespace detail {

// Row-conditional affinities: bandwidth beta_i tuned so the entropy of
// P(.|i) equals log(perplexity). Returns the row-normalized matrix.
inline Matrix conditional_affinities(const Matrix& sqdist, double perplexity, double tol = 1e-7,
                                     std::size_t max_iter = 200) {
    const std::size_t n = sqdist.rows;
    const double target_entropy = std::log(perplexity);
    Matrix p(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = -std::numeric_limits<double>::infinity();
        double beta_hi = std::numeric_limits<double>::infinity();
        double entropy = 0.0;
        for (std::size_t it = 0; it < max_iter; ++it) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    p(i, j) = 0.0;
                    continue;
                }
                p(i, j) = std::exp(-beta * sqdist(i, j));
                sum += p(i, j);
            }
            // H = log(sum) + beta * <d>_P
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) weighted += sqdist(i, j) * p(i, j);
            entropy = std::log(sum) + beta * weighted / sum;
            for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;

            const double diff = entropy - target_entropy;
            if (std::abs(diff) < tol) break;
            if (diff > 0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = std::isinf(beta_lo) ? beta / 2.0 : 0.5 * (beta + beta_lo);
            }
        }
    }
    return p;
}

}  // namespace detail

inline Embedding2D tsne(const Matrix& features, const TsneConfig& cfg) {
    const std::size_t n = features.rows;
    if (n < 10) throw std::invalid_argument("tsne: need at least 10 points");
    if (cfg.perplexity >= static_cast<double>(n - 1) / 3.0)
        throw std::invalid_argument("tsne: perplexity must be < (n-1)/3 (n = " +
                                    std::to_string(n) + ")");
    if (cfg.perplexity <= 1.0) throw std::invalid_argument("tsne: perplexity must be > 1");

    // pairwise squared distances
    Matrix sqdist(n, n, 0.0);
    bool jittered = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < features.cols; ++k) {
                const double diff = features(i, k) - features(j, k);
                d += diff * diff;
            }
            if (d == 0.0) {
                d = 1e-10;  // duplicate rows: deterministic symmetric jitter
                jittered = true;
            }
            sqdist(i, j) = d;
            sqdist(j, i) = d;
        }
    }
    if (jittered)
        std::cerr << "warning: tsne: duplicate input rows, applied 1e-10 distance jitter\n";

    const Matrix cond = detail::conditional_affinities(sqdist, cfg.perplexity);

    // symmetrized joint P, sums to 1
    Matrix p(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            p(i, j) = (cond(i, j) + cond(j, i)) / (2.0 * static_cast<double>(n));

    // initialization
    Matrix y(n, 2);
    if (cfg.initial) {
        if (cfg.initial->rows != n || cfg.initial->cols != 2)
            throw std::invalid_argument("tsne: initial embedding must be n x 2");
        y = *cfg.initial;
    } else {
        Rng rng(derive_seed(cfg.seed, 0x75e));
        for (auto& v : y.data) v = rng.normal() * 1e-4;
    }

    Matrix inc(n, 2, 0.0);
    Matrix gains(n, 2, 1.0);
    Embedding2D out;
    out.kl_trace.reserve(cfg.iterations);

    Matrix q_num(n, n, 0.0);
    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        const bool exaggerate = iter <= cfg.exaggeration_until;
        const double p_scale = exaggerate ? cfg.early_exaggeration : 1.0;
        const double momentum =
            iter <= cfg.momentum_switch_iter ? cfg.momentum_start : cfg.momentum_late;

        // Student-t numerators and their total
        double sum_q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            q_num(i, i) = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                const double num = 1.0 / (1.0 + dx * dx + dy * dy);
                q_num(i, j) = num;
                q_num(j, i) = num;
                sum_q += 2.0 * num;
            }
        }

        // gradient and KL(P||Q) with the true (non-exaggerated) P
        double kl = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy_ = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double q = q_num(i, j) / sum_q;
                const double mult = (p_scale * p(i, j) - q) * q_num(i, j);
                gx += (y(i, 0) - y(j, 0)) * mult;
                gy_ += (y(i, 1) - y(j, 1)) * mult;
                if (p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / std::max(q, 1e-300));
            }
            const double grad[2] = {4.0 * gx, 4.0 * gy_};
            for (std::size_t k = 0; k < 2; ++k) {
                const bool same_sign = (grad[k] > 0.0) == (inc(i, k) > 0.0);
                gains(i, k) = same_sign ? std::max(gains(i, k) * 0.8, 0.01) : gains(i, k) + 0.2;
                inc(i, k) = momentum * inc(i, k) - cfg.learning_rate * gains(i, k) * grad[k];
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 2; ++k) y(i, k) += inc(i, k);

        // recenter
        double mean[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 2; ++k) mean[k] += y(i, k);
        for (auto& m : mean) m /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 2; ++k) y(i, k) -= mean[k];

        out.kl_trace.push_back(kl);
        if (!y.all_finite())
            throw std::runtime_error("tsne: diverged at iteration " + std::to_string(iter));
    }

    out.points = std::move(y);
    return out;
}

inline Embedding2D tsne(const Matrix& features, const std::vector<int>& labels,
                        const std::vector<std::string>& domains, const TsneConfig& cfg) {
    if (labels.size() != features.rows || domains.size() != features.rows)
        throw std::invalid_argument("tsne: labels/domains must match feature rows");
    Embedding2D e = tsne(features, cfg);
    e.labels = labels;
    e.domains = domains;
    return e;
}

// Deterministic per-(class, domain) stratified subsample for plotting.
inline std::vector<std::size_t> stratified_subsample(const std::vector<int>& labels,
                                                     const std::vector<std::string>& domains,
                                                     std::size_t per_cell, std::uint64_t seed) {
    if (labels.size() != domains.size())
        throw std::invalid_argument("stratified_subsample: size mismatch");
    std::vector<std::pair<std::string, std::vector<std::size_t>>> cells;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string key = std::to_string(labels[i]) + "|" + domains[i];
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const auto& c) { return c.first == key; });
        if (it == cells.end()) {
            cells.push_back({key, {i}});
        } else {
            it->second.push_back(i);
        }
    }
    Rng rng(derive_seed(seed, 0x5ab));
    std::vector<std::size_t> keep;
    for (auto& [key, idx] : cells) {
        rng.shuffle(idx);
        for (std::size_t k = 0; k < std::min(per_cell, idx.size()); ++k) keep.push_back(idx[k]);
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

}  // namespace amclab::viz
