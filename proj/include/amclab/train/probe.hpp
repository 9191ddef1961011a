// Domain classification accuracy: a fresh linear probe trained to tell
// source features from target features; held-out accuracy near 0.5 means the
// representation carries no usable domain information.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/data/scaler.hpp"
#include "amclab/matrix.hpp"
#include "amclab/nn/adam.hpp"
#include "amclab/nn/loss.hpp"
#include "amclab/nn/stack.hpp"

namespace amclab::train {

struct ProbeConfig {
    std::size_t epochs = 200;
    double lr = 1e-2;
    double train_fraction = 0.7;
};

// Trains a logistic-regression-style linear head on a stratified 70/30 split
// of domain-labeled features; returns held-out accuracy. The probed model's
// own parameters are never touched (only its extracted features are read).
inline double domain_probe(const Matrix& features_source, const Matrix& features_target,
                           std::uint64_t seed, const ProbeConfig& cfg = {}) {
    if (features_source.cols != features_target.cols)
        throw std::invalid_argument("domain_probe: feature width mismatch");
    if (features_source.rows < 20 || features_target.rows < 20)
        throw std::invalid_argument("domain_probe: need at least 20 rows per domain");

    Rng rng(derive_seed(seed, 0xDCA));

    // stratified split within each domain
    std::vector<std::size_t> tr_rows, te_rows;
    std::vector<int> tr_dom, te_dom;
    const Matrix* mats[2] = {&features_source, &features_target};
    std::vector<std::vector<double>> train_rows, test_rows;
    for (int dom = 0; dom < 2; ++dom) {
        const Matrix& f = *mats[dom];
        std::vector<std::size_t> idx(f.rows);
        for (std::size_t i = 0; i < f.rows; ++i) idx[i] = i;
        rng.shuffle(idx);
        const std::size_t n_train =
            static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(f.rows));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::vector<double> row(f.cols);
            for (std::size_t j = 0; j < f.cols; ++j) row[j] = f(idx[k], j);
            if (k < n_train) {
                train_rows.push_back(std::move(row));
                tr_dom.push_back(dom);
            } else {
                test_rows.push_back(std::move(row));
                te_dom.push_back(dom);
            }
        }
    }

    auto pack = [](const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
        return m;
    };
    Matrix xtr = pack(train_rows), xte = pack(test_rows);

    data::StandardScaler scaler;
    scaler.fit(xtr, "probe_train");
    xtr = scaler.transform(xtr);
    xte = scaler.transform(xte);

    nn::LayerStack probe(xtr.cols);
    Rng init_rng(derive_seed(seed, 0xDCB));
    probe.add(std::make_unique<nn::Linear>(xtr.cols, 2, init_rng));
    nn::Adam adam({&probe}, {.lr = cfg.lr});

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        probe.zero_grad();
        const Matrix logits = probe.forward(xtr, nn::Mode::Train);
        const auto ce = nn::softmax_cross_entropy(logits, tr_dom);
        probe.backward(ce.logit_grad);
        adam.step();
    }

    const auto preds = nn::argmax_rows(probe.forward(xte, nn::Mode::Eval));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == te_dom[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace amclab::train
