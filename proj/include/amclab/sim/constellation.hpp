// Constellations for the five modulation schemes, unit average power,
// Gray-mapped symbol indexing.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"

namespace amclab::sim {

using cplx = std::complex<double>;

// Canonical class order; label encoding and confusion-matrix rows follow it.
inline const std::vector<std::string>& modulation_names() {
    static const std::vector<std::string> names = {"BPSK", "QPSK", "16QAM", "64QAM", "256QAM"};
    return names;
}

struct Constellation {
    std::string name;
    std::vector<cplx> points;  // indexed by Gray-mapped symbol value
    int bits_per_symbol = 0;

    std::size_t size() const { return points.size(); }

    double mean_power() const {
        double p = 0.0;
        for (const auto& pt : points) p += std::norm(pt);
        return p / static_cast<double>(points.size());
    }
};

namespace detail {

inline unsigned gray_to_binary(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

// Square QAM with 2^(2k) points: per-axis amplitudes {±1, ±3, ...}, each axis
// index Gray-coded, then the grid scaled to unit average power.
inline Constellation square_qam(const std::string& name, int bits_per_axis) {
    const unsigned levels = 1u << bits_per_axis;
    Constellation c;
    c.name = name;
    c.bits_per_symbol = 2 * bits_per_axis;
    c.points.resize(static_cast<std::size_t>(levels) * levels);
    for (unsigned sym = 0; sym < levels * levels; ++sym) {
        const unsigned gi = sym >> bits_per_axis;           // high bits -> I
        const unsigned gq = sym & (levels - 1);             // low bits  -> Q
        const unsigned i_idx = gray_to_binary(gi);
        const unsigned q_idx = gray_to_binary(gq);
        const double i_amp = 2.0 * static_cast<double>(i_idx) - (levels - 1.0);
        const double q_amp = 2.0 * static_cast<double>(q_idx) - (levels - 1.0);
        c.points[sym] = cplx(i_amp, q_amp);
    }
    const double scale = 1.0 / std::sqrt(c.mean_power());
    for (auto& p : c.points) p *= scale;
    return c;
}

}  // namespace detail

inline Constellation constellation(const std::string& name) {
    if (name == "BPSK") {
        return {"BPSK", {cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 1};
    }
    if (name == "QPSK") return detail::square_qam("QPSK", 1);
    if (name == "16QAM") return detail::square_qam("16QAM", 2);
    if (name == "64QAM") return detail::square_qam("64QAM", 3);
    if (name == "256QAM") return detail::square_qam("256QAM", 4);
    throw std::invalid_argument("unknown modulation: " + name);
}

// i.i.d. uniform symbols from the named unit-power constellation.
inline std::vector<cplx> modulate(const std::string& name, std::size_t num_symbols, Rng& rng) {
    if (num_symbols < 1) throw std::invalid_argument("modulate: num_symbols must be >= 1");
    const Constellation c = constellation(name);
    std::vector<cplx> out(num_symbols);
    for (auto& s : out) s = c.points[rng.uniform_index(c.size())];
    return out;
}

}  // namespace amclab::sim
