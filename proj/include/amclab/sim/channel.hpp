// Flat-fading channel: Rayleigh / Rician gain plus AWGN at a configured SNR.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/sim/constellation.hpp"

namespace amclab::sim {

enum class ChannelModel { Rayleigh, Rician, AwgnOnly };
enum class FadingMode { Block, PerSymbol };

inline std::string to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::Rayleigh: return "rayleigh";
        case ChannelModel::Rician: return "rician";
        case ChannelModel::AwgnOnly: return "awgn_only";
    }
    return "?";
}

inline ChannelModel channel_model_from_string(const std::string& s) {
    if (s == "rayleigh") return ChannelModel::Rayleigh;
    if (s == "rician") return ChannelModel::Rician;
    if (s == "awgn_only") return ChannelModel::AwgnOnly;
    throw std::invalid_argument("unknown channel model: " + s);
}

struct ChannelConfig {
    ChannelModel model = ChannelModel::Rayleigh;
    double k_factor = 4.0;  // Rician K, linear; used only when model == Rician
    double snr_db = 15.0;   // per-symbol SNR given unit signal power
    FadingMode fading = FadingMode::Block;
    std::string band = "1MHz";  // generation preset tag, not modeled physics
    std::uint64_t seed = 0;

    void validate() const {
        if (k_factor < 0.0) throw std::invalid_argument("ChannelConfig: k_factor must be >= 0");
    }
};

// Optional capture of the per-symbol gain and noise actually applied;
// used by tests that measure realized SNR.
struct ChannelCapture {
    std::vector<cplx> gains;
    std::vector<cplx> noise;
};

// One complex fading gain with E|h|^2 = 1.
inline cplx draw_gain(ChannelModel model, double k_factor, Rng& rng) {
    switch (model) {
        case ChannelModel::AwgnOnly:
            return cplx(1.0, 0.0);
        case ChannelModel::Rayleigh:
            return cplx(rng.normal(), rng.normal()) * M_SQRT1_2;
        case ChannelModel::Rician: {
            const double los = std::sqrt(k_factor / (k_factor + 1.0));
            const double diffuse = std::sqrt(1.0 / (k_factor + 1.0));
            return cplx(los, 0.0) + diffuse * cplx(rng.normal(), rng.normal()) * M_SQRT1_2;
        }
    }
    throw std::logic_error("draw_gain: unreachable");
}

// y = h * x + n, flat fading. Block mode draws one h per call; per-symbol mode
// draws a fresh h for every sample. Noise power is 10^(-snr_db/10) per symbol
// assuming unit signal power; snr_db = +inf disables noise.
inline std::vector<cplx> apply_channel(const std::vector<cplx>& seq, const ChannelConfig& cfg,
                                       Rng& rng, ChannelCapture* capture = nullptr) {
    cfg.validate();
    if (seq.empty()) throw std::invalid_argument("apply_channel: empty sequence");

    const bool noiseless = std::isinf(cfg.snr_db) && cfg.snr_db > 0;
    const double noise_power = noiseless ? 0.0 : std::pow(10.0, -cfg.snr_db / 10.0);
    const double noise_sigma = std::sqrt(noise_power / 2.0);  // per I/Q component

    std::vector<cplx> out(seq.size());
    if (capture) {
        capture->gains.assign(seq.size(), cplx(0.0, 0.0));
        capture->noise.assign(seq.size(), cplx(0.0, 0.0));
    }

    cplx h = draw_gain(cfg.model, cfg.k_factor, rng);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (cfg.fading == FadingMode::PerSymbol && i > 0)
            h = draw_gain(cfg.model, cfg.k_factor, rng);
        cplx n(0.0, 0.0);
        if (!noiseless) n = cplx(rng.normal(), rng.normal()) * noise_sigma;
        out[i] = h * seq[i] + n;
        if (capture) {
            capture->gains[i] = h;
            capture->noise[i] = n;
        }
    }
    return out;
}

}  // namespace amclab::sim
