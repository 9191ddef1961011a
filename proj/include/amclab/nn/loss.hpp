// Softmax cross-entropy over integer class labels.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "amclab/matrix.hpp"

namespace amclab::nn {

struct SoftmaxCEResult {
    double loss = 0.0;   // batch mean of -log softmax(logits)[label]
    Matrix logit_grad;   // (softmax - one_hot) / batch_size
    Matrix probs;
};

inline SoftmaxCEResult softmax_cross_entropy(const Matrix& logits,
                                             const std::vector<int>& labels) {
    if (logits.rows != labels.size())
        throw std::invalid_argument("softmax_cross_entropy: batch size mismatch");
    if (logits.rows == 0)
        throw std::invalid_argument("softmax_cross_entropy: empty batch");
    const std::size_t n = logits.rows, c = logits.cols;
    for (int lbl : labels)
        if (lbl < 0 || static_cast<std::size_t>(lbl) >= c)
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(lbl) +
                                        " out of range [0," + std::to_string(c) + ")");
    SoftmaxCEResult r;
    r.probs = Matrix(n, c);
    r.logit_grad = Matrix(n, c);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(logits(i, j) - mx);
        const double log_z = mx + std::log(sum);
        for (std::size_t j = 0; j < c; ++j) r.probs(i, j) = std::exp(logits(i, j) - log_z);
        total += log_z - logits(i, static_cast<std::size_t>(labels[i]));
    }
    r.loss = total / static_cast<double>(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) r.logit_grad(i, j) = r.probs(i, j) * inv_n;
        r.logit_grad(i, static_cast<std::size_t>(labels[i])) -= inv_n;
    }
    return r;
}

inline std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.cols; ++j)
            if (m(i, j) > m(i, best)) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace amclab::nn
