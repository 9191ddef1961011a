// Frame generation: balanced labeled framesets per channel domain.
#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/sim/channel.hpp"
#include "amclab/sim/constellation.hpp"

namespace amclab::sim {

struct Frame {
    std::vector<cplx> samples;
    int label = 0;        // index into modulation_names()
    std::string domain;   // channel domain tag
};

struct FrameSet {
    std::vector<Frame> frames;
    std::size_t frame_length = 0;
    std::string band;
};

// Balanced frameset: per_class frames for each of the five classes, passed
// through the configured channel. Deterministic under cfg.seed.
inline FrameSet gen_frameset(std::size_t per_class, std::size_t frame_length,
                             const ChannelConfig& cfg) {
    if (per_class < 1) throw std::invalid_argument("gen_frameset: per_class must be >= 1");
    if (frame_length < 1) throw std::invalid_argument("gen_frameset: frame_length must be >= 1");
    cfg.validate();

    const std::string domain = to_string(cfg.model);
    FrameSet fs;
    fs.frame_length = frame_length;
    fs.band = cfg.band;
    fs.frames.reserve(per_class * modulation_names().size());
    for (std::size_t cls = 0; cls < modulation_names().size(); ++cls) {
        for (std::size_t k = 0; k < per_class; ++k) {
            // Independent stream per frame so generation order never matters.
            Rng rng(derive_seed(cfg.seed, cls * 1000003ULL + k));
            Frame f;
            f.label = static_cast<int>(cls);
            f.domain = domain;
            f.samples = apply_channel(modulate(modulation_names()[cls], frame_length, rng), cfg, rng);
            fs.frames.push_back(std::move(f));
        }
    }
    return fs;
}

// Debug export: interleaved I/Q columns plus label and domain.
inline void export_frameset_csv(const FrameSet& fs, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("export_frameset_csv: cannot open " + path);
    for (std::size_t k = 0; k < fs.frame_length; ++k)
        os << "i" << k << ",q" << k << ",";
    os << "label,domain\n";
    char buf[32];
    for (const auto& f : fs.frames) {
        for (const auto& s : f.samples) {
            std::snprintf(buf, sizeof buf, "%.17g", s.real());
            os << buf << ",";
            std::snprintf(buf, sizeof buf, "%.17g", s.imag());
            os << buf << ",";
        }
        os << modulation_names()[static_cast<std::size_t>(f.label)] << "," << f.domain << "\n";
    }
    if (!os) throw std::runtime_error("export_frameset_csv: write failed: " + path);
}

}  // namespace amclab::sim
