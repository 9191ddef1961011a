// Shared test oracles: central finite differences, simple statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/matrix.hpp"
#include "amclab/nn/stack.hpp"

namespace testsup {

using amclab::Matrix;
using amclab::Rng;

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.data) v = rng.normal() * scale;
    return m;
}

// Scalar functional of the stack output: L = sum(W .* f(x)), so dL/dy = W.
// Checks every input entry and every parameter entry against central finite
// differences. Relative error uses max(|analytic|, |numeric|, floor) in the
// denominator so near-zero gradients compare on an absolute scale.
struct GradCheck {
    double max_rel_err = 0.0;

    static double rel_err(double a, double n, double floor = 1e-4) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    }
};

// `input_grad_scale` handles the gradient reversal layer, whose backward is
// by contract -lambda times the true Jacobian product: the analytic input
// gradient is compared against scale * numeric.
inline GradCheck check_stack_gradients(amclab::nn::LayerStack& stack, const Matrix& input,
                                       amclab::nn::Mode mode, Rng& rng, double h = 1e-5,
                                       double input_grad_scale = 1.0) {
    const Matrix out0 = stack.forward(input, mode);
    Matrix w = random_matrix(out0.rows, out0.cols, rng);

    auto loss_at = [&](const Matrix& x) {
        const Matrix y = stack.forward(x, mode);
        double l = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) l += w.data[k] * y.data[k];
        return l;
    };

    GradCheck res;

    // analytic pass
    stack.zero_grad();
    stack.forward(input, mode);
    const Matrix input_grad = stack.backward(w);

    // input gradient
    Matrix x = input;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double orig = x.data[k];
        x.data[k] = orig + h;
        const double lp = loss_at(x);
        x.data[k] = orig - h;
        const double lm = loss_at(x);
        x.data[k] = orig;
        const double numeric = input_grad_scale * (lp - lm) / (2 * h);
        res.max_rel_err = std::max(res.max_rel_err, GradCheck::rel_err(input_grad.data[k], numeric));
    }

    // parameter gradients (re-run the analytic pass afterwards is not needed:
    // gradients were stored before the perturbation loop below)
    for (auto p : stack.params()) {
        for (std::size_t k = 0; k < p.value->size(); ++k) {
            const double orig = (*p.value)[k];
            (*p.value)[k] = orig + h;
            const double lp = loss_at(input);
            (*p.value)[k] = orig - h;
            const double lm = loss_at(input);
            (*p.value)[k] = orig;
            const double numeric = (lp - lm) / (2 * h);
            res.max_rel_err = std::max(res.max_rel_err, GradCheck::rel_err((*p.grad)[k], numeric));
        }
    }
    return res;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

}  // namespace testsup
