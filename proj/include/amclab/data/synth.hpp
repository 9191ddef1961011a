// Controlled covariate-shift generator: five class-conditional Gaussians,
// target = source law translated by a fixed-direction shift plus mild
// covariance scaling. Serves the domain-adaptation property benchmarks.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/data/dataset.hpp"

namespace amclab::data {

struct SynthShiftPair {
    Dataset source, target;
};

namespace detail {

// Shift direction: a moderate, sign-alternating component on each class axis
// (so class boundaries actually move) plus a dominant component on a nuisance
// axis (so an invariant representation can discard it cheaply).
inline std::vector<double> shift_direction(std::size_t d) {
    std::vector<double> w(d, 0.0);
    const std::size_t n_classes = label_names().size();
    for (std::size_t c = 0; c < n_classes && c < d; ++c)
        w[c] = (c % 2 == 0) ? 0.35 : -0.35;
    w[d > n_classes ? n_classes : d - 1] += 0.8;
    double norm = 0.0;
    for (double v : w) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : w) v /= norm;
    return w;
}

}  // namespace detail

inline SynthShiftPair synth_shift(std::size_t n_per_class, std::size_t d,
                                  double shift_magnitude, std::uint64_t seed,
                                  double class_sep = 3.0, double target_std_scale = 1.15) {
    if (d < 2) throw std::invalid_argument("synth_shift: d must be >= 2");
    if (n_per_class < 10) throw std::invalid_argument("synth_shift: n_per_class must be >= 10");

    const std::size_t n_classes = label_names().size();
    const auto w = detail::shift_direction(d);

    SynthShiftPair out;
    for (int which = 0; which < 2; ++which) {
        Dataset& ds = (which == 0) ? out.source : out.target;
        ds.domain = (which == 0) ? "synth_source" : "synth_target";
        ds.band = "synth";
        ds.features = Matrix(n_per_class * n_classes, d);
        ds.labels.resize(n_per_class * n_classes);
        for (std::size_t j = 0; j < d; ++j) ds.header.push_back("f" + std::to_string(j));

        Rng rng(derive_seed(seed, which == 0 ? 21 : 22));
        const double std_scale = (which == 0) ? 1.0 : target_std_scale;
        std::size_t row = 0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            for (std::size_t k = 0; k < n_per_class; ++k, ++row) {
                ds.labels[row] = static_cast<int>(c);
                for (std::size_t j = 0; j < d; ++j) {
                    double v = std_scale * rng.normal();
                    if (j == c % d) v += class_sep;
                    if (which == 1) v += shift_magnitude * w[j];
                    ds.features(row, j) = v;
                }
            }
        }
    }
    return out;
}

}  // namespace amclab::data
