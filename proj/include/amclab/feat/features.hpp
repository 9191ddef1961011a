// Frame-to-feature extraction: amplitude/phase/frequency moments, higher-order
// cumulants, and spectral summaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/data/dataset.hpp"
#include "amclab/matrix.hpp"
#include "amclab/sim/frameset.hpp"

namespace amclab::feat {

using sim::cplx;

constexpr double kVarianceFloor = 1e-12;

struct GroupResult {
    std::vector<double> values;
    bool degenerate = false;  // variance floor hit, silent frame, or zero spectrum
};

namespace detail {

struct FourMoments {
    double mean, var, skew, ekurt;
    bool floored;
};

// Mean/variance plus skewness and excess kurtosis (Gaussian -> 0), with a
// variance floor: degenerate signals report skew = kurt = 0.
inline FourMoments four_moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double c = v - mu;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    FourMoments r{mu, m2, 0.0, 0.0, false};
    if (m2 < kVarianceFloor) {
        r.floored = true;
        return r;
    }
    r.skew = m3 / std::pow(m2, 1.5);
    r.ekurt = m4 / (m2 * m2) - 3.0;
    return r;
}

inline double wrap_phase(double p) {
    // into (-pi, pi]
    while (p > M_PI) p -= 2.0 * M_PI;
    while (p <= -M_PI) p += 2.0 * M_PI;
    return p;
}

// In-place iterative radix-2 FFT; length must be a power of two.
inline void fft_pow2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

inline const std::vector<std::string>& moment_names() {
    static const std::vector<std::string> names = {
        "mom_amp_mean",  "mom_amp_var",  "mom_amp_skew",  "mom_amp_kurt",
        "mom_ph_mean",   "mom_ph_var",   "mom_ph_skew",   "mom_ph_kurt",
        "mom_freq_mean", "mom_freq_var", "mom_freq_skew", "mom_freq_kurt"};
    return names;
}

inline const std::vector<std::string>& cumulant_names() {
    static const std::vector<std::string> names = {
        "cum_c20_mag", "cum_c21", "cum_c40_mag", "cum_c41_mag",
        "cum_c42",     "cum_c40_norm", "cum_c42_norm"};
    return names;
}

inline const std::vector<std::string>& spectral_names() {
    static const std::vector<std::string> names = {
        "spec_centroid", "spec_spread", "spec_flatness", "spec_papr", "spec_obw20"};
    return names;
}

// Mean/var/skew/kurt of instantaneous amplitude, centered phase, and
// instantaneous frequency (wrapped phase differences), in that order.
inline GroupResult moments(const std::vector<cplx>& frame) {
    if (frame.size() < 4) throw std::invalid_argument("moments: frame length must be >= 4");
    GroupResult out;

    std::vector<double> amp(frame.size()), phase(frame.size());
    double sin_sum = 0.0, cos_sum = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        amp[i] = std::abs(frame[i]);
        phase[i] = std::arg(frame[i]);
        sin_sum += std::sin(phase[i]);
        cos_sum += std::cos(phase[i]);
    }
    // circular centering keeps phase moments invariant to global rotation
    const double circ_mean = std::atan2(sin_sum, cos_sum);
    std::vector<double> centered(phase.size());
    for (std::size_t i = 0; i < phase.size(); ++i)
        centered[i] = detail::wrap_phase(phase[i] - circ_mean);

    std::vector<double> ifreq(frame.size() - 1);
    for (std::size_t i = 0; i + 1 < frame.size(); ++i)
        ifreq[i] = detail::wrap_phase(phase[i + 1] - phase[i]);

    for (const auto* sig : {&amp, &centered, &ifreq}) {
        const auto m = detail::four_moments(*sig);
        out.values.insert(out.values.end(), {m.mean, m.var, m.skew, m.ekurt});
        out.degenerate = out.degenerate || m.floored;
    }
    return out;
}

// Sample cumulants C20, C21, C40, C41, C42 emitted as rotation-invariant
// magnitudes plus the normalized quantities C40/C21^2 and C42/C21^2.
// The C40 norm is reported as a signed magnitude (negative by convention:
// every square constellation's fourth cumulant is a negative real).
inline GroupResult cumulants(const std::vector<cplx>& frame) {
    if (frame.empty()) throw std::invalid_argument("cumulants: empty frame");
    const double n = static_cast<double>(frame.size());
    cplx m20(0, 0), m40(0, 0), m41(0, 0);
    double m21 = 0.0, m42 = 0.0;
    for (const auto& x : frame) {
        const cplx x2 = x * x;
        m20 += x2;
        m40 += x2 * x2;
        m41 += x2 * x * std::conj(x);
        m21 += std::norm(x);
        m42 += std::norm(x) * std::norm(x);
    }
    m20 /= n;
    m40 /= n;
    m41 /= n;
    m21 /= n;
    m42 /= n;

    const cplx c20 = m20;
    const double c21 = m21;
    const cplx c40 = m40 - 3.0 * c20 * c20;
    const cplx c41 = m41 - 3.0 * c20 * c21;
    const double c42 = m42 - std::norm(c20) - 2.0 * c21 * c21;

    GroupResult out;
    out.values = {std::abs(c20), c21, std::abs(c40), std::abs(c41), c42, 0.0, 0.0};
    const double c21_sq = c21 * c21;
    if (c21_sq < kVarianceFloor) {
        out.degenerate = true;  // silent frame: normalized cumulants defined as 0
    } else {
        out.values[5] = -std::abs(c40) / c21_sq;
        out.values[6] = c42 / c21_sq;
    }
    return out;
}

// Magnitude-spectrum summaries. Centroid and spread are in normalized
// frequency (bin / N); flatness is computed on a 9-bin moving-average
// smoothed power spectrum; PAPR uses the unpadded time samples; occupied
// bandwidth is the fraction of bins within 20 dB of the peak.
inline GroupResult spectral(const std::vector<cplx>& frame) {
    if (frame.empty()) throw std::invalid_argument("spectral: empty frame");
    GroupResult out;
    out.values.assign(5, 0.0);

    double peak = 0.0, total = 0.0;
    for (const auto& x : frame) {
        const double p = std::norm(x);
        peak = std::max(peak, p);
        total += p;
    }
    if (total <= 0.0) {
        out.degenerate = true;  // all-zero frame
        return out;
    }
    const double papr = peak / (total / static_cast<double>(frame.size()));

    std::vector<cplx> buf = frame;
    buf.resize(detail::next_pow2(frame.size()), cplx(0, 0));
    detail::fft_pow2(buf);
    const std::size_t n = buf.size();
    std::vector<double> power(n);
    double psum = 0.0, pmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        power[k] = std::norm(buf[k]);
        psum += power[k];
        pmax = std::max(pmax, power[k]);
    }

    double centroid = 0.0;
    for (std::size_t k = 0; k < n; ++k) centroid += static_cast<double>(k) * power[k];
    centroid /= psum;
    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = static_cast<double>(k) - centroid;
        spread += d * d * power[k];
    }
    spread = std::sqrt(spread / psum);

    // 9-bin circular moving average before flatness, so a white spectrum's
    // single-periodogram bias stays small and flatness approaches 1.
    const std::size_t w = std::min<std::size_t>(9, n);
    const std::size_t half = w / 2;
    double log_sum = 0.0, lin_sum = 0.0;
    bool any_zero = false;
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t o = 0; o < w; ++o)
            acc += power[(k + n - half + o) % n];
        acc /= static_cast<double>(w);
        lin_sum += acc;
        if (acc <= 0.0)
            any_zero = true;
        else
            log_sum += std::log(acc);
    }
    const double flatness =
        any_zero ? 0.0 : std::exp(log_sum / static_cast<double>(n)) / (lin_sum / static_cast<double>(n));

    const double threshold = pmax * 1e-2;  // -20 dB
    std::size_t occupied = 0;
    for (double p : power)
        if (p >= threshold) ++occupied;

    out.values[0] = centroid / static_cast<double>(n);
    out.values[1] = spread / static_cast<double>(n);
    out.values[2] = flatness;
    out.values[3] = papr;
    out.values[4] = static_cast<double>(occupied) / static_cast<double>(n);
    return out;
}

struct FeatureSpec {
    bool moments = true;
    bool cumulants = true;
    bool spectral = true;

    std::size_t resulting_dim() const {
        std::size_t d = 0;
        if (moments) d += moment_names().size();
        if (cumulants) d += cumulant_names().size();
        if (spectral) d += spectral_names().size();
        return d;
    }

    std::vector<std::string> header() const {
        std::vector<std::string> h;
        if (moments) h.insert(h.end(), moment_names().begin(), moment_names().end());
        if (cumulants) h.insert(h.end(), cumulant_names().begin(), cumulant_names().end());
        if (spectral) h.insert(h.end(), spectral_names().begin(), spectral_names().end());
        return h;
    }

    void validate() const {
        if (!moments && !cumulants && !spectral)
            throw std::invalid_argument("FeatureSpec: at least one group must be enabled");
    }
};

struct QualityReport {
    std::size_t degenerate_frames = 0;
    std::vector<std::size_t> flagged_rows;
};

struct ExtractResult {
    data::Dataset dataset;
    QualityReport quality;
};

// One feature row per frame, order preserved, labels and domain carried
// through. Degenerate-input flags feed the quality report; the batch never
// aborts on them.
inline ExtractResult extract(const sim::FrameSet& fs, const FeatureSpec& spec) {
    spec.validate();
    ExtractResult r;
    r.dataset.header = spec.header();
    r.dataset.band = fs.band;
    r.dataset.features = Matrix(fs.frames.size(), spec.resulting_dim());
    r.dataset.labels.reserve(fs.frames.size());
    if (!fs.frames.empty()) r.dataset.domain = fs.frames.front().domain;

    for (std::size_t i = 0; i < fs.frames.size(); ++i) {
        const auto& f = fs.frames[i];
        std::vector<double> row;
        bool flagged = false;
        if (spec.moments) {
            auto g = moments(f.samples);
            flagged = flagged || g.degenerate;
            row.insert(row.end(), g.values.begin(), g.values.end());
        }
        if (spec.cumulants) {
            auto g = cumulants(f.samples);
            flagged = flagged || g.degenerate;
            row.insert(row.end(), g.values.begin(), g.values.end());
        }
        if (spec.spectral) {
            auto g = spectral(f.samples);
            flagged = flagged || g.degenerate;
            row.insert(row.end(), g.values.begin(), g.values.end());
        }
        for (std::size_t j = 0; j < row.size(); ++j) r.dataset.features(i, j) = row[j];
        r.dataset.labels.push_back(f.label);
        if (flagged) {
            ++r.quality.degenerate_frames;
            r.quality.flagged_rows.push_back(i);
        }
    }
    r.dataset.validate();
    return r;
}

}  // namespace amclab::feat
