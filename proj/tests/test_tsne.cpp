// Exact t-SNE: perplexity calibration, KL descent, cluster separability,
// permutation equivariance, plot exports.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "amclab/viz/plot.hpp"
#include "amclab/viz/tsne.hpp"
#include "test_support.hpp"

using namespace amclab;
using testsup::random_matrix;
namespace dfs = std::filesystem;

namespace {

Matrix two_clusters(std::size_t n_per, std::size_t d, double gap, Rng& rng) {
    Matrix x(2 * n_per, d);
    for (std::size_t i = 0; i < 2 * n_per; ++i)
        for (std::size_t j = 0; j < d; ++j)
            x(i, j) = rng.normal() + (i < n_per ? 0.0 : (j == 0 ? gap : 0.0));
    return x;
}

}  // namespace

TEST(Tsne, PerplexityCalibrationHitsTargetEntropy) {
    Rng rng(1);
    const Matrix x = random_matrix(120, 10, rng);
    Matrix sqdist(120, 120, 0.0);
    for (std::size_t i = 0; i < 120; ++i)
        for (std::size_t j = 0; j < 120; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < 10; ++k) {
                const double diff = x(i, k) - x(j, k);
                d += diff * diff;
            }
            sqdist(i, j) = d;
        }
    const double perplexity = 30.0;
    const Matrix p = viz::detail::conditional_affinities(sqdist, perplexity);
    for (std::size_t i = 0; i < 120; ++i) {
        double row_sum = 0.0, entropy = 0.0;
        for (std::size_t j = 0; j < 120; ++j) {
            row_sum += p(i, j);
            if (p(i, j) > 0.0) entropy -= p(i, j) * std::log(p(i, j));
        }
        EXPECT_NEAR(row_sum, 1.0, 1e-12);                       // rows sum to 1
        EXPECT_NEAR(entropy, std::log(perplexity), 1e-4) << i;  // H = log(perp)
    }
}

TEST(Tsne, OutputShapeAndKlDescent) {
    Rng rng(2);
    const Matrix x = two_clusters(40, 10, 8.0, rng);
    viz::TsneConfig cfg;
    cfg.perplexity = 15.0;
    cfg.iterations = 400;
    cfg.seed = 2;
    const auto e = viz::tsne(x, cfg);
    EXPECT_EQ(e.points.rows, 80u);
    EXPECT_EQ(e.points.cols, 2u);
    ASSERT_EQ(e.kl_trace.size(), 400u);
    for (double kl : e.kl_trace) EXPECT_GE(kl, 0.0);
    // post-exaggeration comparison: final KL below iteration 251's
    EXPECT_LT(e.kl_trace.back(), e.kl_trace[250]);
}

TEST(Tsne, SeparatedClustersEmbedWithHighPurity) {
    Rng rng(3);
    const std::size_t n_per = 60;
    const Matrix x = two_clusters(n_per, 50, 5.0, rng);  // 5 sigma apart in 50-D
    viz::TsneConfig cfg;
    cfg.perplexity = 20.0;
    cfg.iterations = 500;
    cfg.seed = 3;
    const auto e = viz::tsne(x, cfg);

    // 1-nearest-neighbor purity in the embedding
    std::size_t pure = 0;
    for (std::size_t i = 0; i < e.points.rows; ++i) {
        double best = 1e300;
        std::size_t best_j = i;
        for (std::size_t j = 0; j < e.points.rows; ++j) {
            if (j == i) continue;
            const double dx = e.points(i, 0) - e.points(j, 0);
            const double dy = e.points(i, 1) - e.points(j, 1);
            const double d = dx * dx + dy * dy;
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if ((i < n_per) == (best_j < n_per)) ++pure;
    }
    EXPECT_GT(static_cast<double>(pure) / static_cast<double>(e.points.rows), 0.95);
}

TEST(Tsne, SymmetrizedAffinitiesSumToOne) {
    Rng rng(4);
    const Matrix x = random_matrix(50, 6, rng);
    Matrix sqdist(50, 50, 0.0);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j)
            for (std::size_t k = 0; k < 6; ++k) {
                const double diff = x(i, k) - x(j, k);
                sqdist(i, j) += diff * diff;
            }
    const Matrix cond = viz::detail::conditional_affinities(sqdist, 12.0);
    double total = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j)
            total += (cond(i, j) + cond(j, i)) / (2.0 * 50.0);
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Tsne, PermutationEquivariance) {
    // initialization is supplied explicitly and permuted with the data
    Rng rng(5);
    const std::size_t n = 60;
    const Matrix x = two_clusters(30, 8, 6.0, rng);
    Matrix init(n, 2);
    for (auto& v : init.data) v = rng.normal() * 1e-4;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng prng(6);
    prng.shuffle(perm);

    viz::TsneConfig cfg;
    cfg.perplexity = 12.0;
    cfg.iterations = 100;
    cfg.initial = init;
    const auto base = viz::tsne(x, cfg);

    viz::TsneConfig cfg_p = cfg;
    cfg_p.initial = init.row_slice(perm);
    const auto permuted = viz::tsne(x.row_slice(perm), cfg_p);

    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(permuted.points(i, 0), base.points(perm[i], 0), 1e-7);
        EXPECT_NEAR(permuted.points(i, 1), base.points(perm[i], 1), 1e-7);
    }
}

TEST(Tsne, PreconditionsEnforced) {
    Rng rng(7);
    EXPECT_THROW(viz::tsne(random_matrix(5, 3, rng), viz::TsneConfig{}), std::invalid_argument);
    viz::TsneConfig cfg;
    cfg.perplexity = 30.0;  // needs n > 91
    EXPECT_THROW(viz::tsne(random_matrix(40, 3, rng), cfg), std::invalid_argument);
}

TEST(Tsne, DuplicateRowsGetJitterNotCrash) {
    Rng rng(8);
    Matrix x = random_matrix(30, 4, rng);
    for (std::size_t j = 0; j < 4; ++j) x(1, j) = x(0, j);  // exact duplicate
    viz::TsneConfig cfg;
    cfg.perplexity = 8.0;
    cfg.iterations = 50;
    EXPECT_NO_THROW(viz::tsne(x, cfg));
}

TEST(Tsne, DeterministicUnderSeed) {
    Rng rng(9);
    const Matrix x = two_clusters(20, 5, 4.0, rng);
    viz::TsneConfig cfg;
    cfg.perplexity = 10.0;
    cfg.iterations = 120;
    cfg.seed = 77;
    const auto a = viz::tsne(x, cfg);
    const auto b = viz::tsne(x, cfg);
    for (std::size_t k = 0; k < a.points.size(); ++k)
        EXPECT_EQ(a.points.data[k], b.points.data[k]);
}

TEST(PlotExport, CsvContractAndDeterminism) {
    Rng rng(10);
    viz::Embedding2D e;
    e.points = random_matrix(25, 2, rng);
    for (std::size_t i = 0; i < 25; ++i) {
        e.labels.push_back(static_cast<int>(i % 5));
        e.domains.push_back(i % 2 ? "rayleigh" : "rician");
    }
    const auto dir = dfs::temp_directory_path();
    const auto p1 = dir / "amclab_e1.csv", p2 = dir / "amclab_e2.csv";
    viz::export_plot_data(e, p1.string());
    viz::export_plot_data(e, p2.string());

    std::ifstream f1(p1), f2(p2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    EXPECT_EQ(s1, s2);  // byte-identical re-export

    std::size_t lines = 0;
    for (char c : s1)
        if (c == '\n') ++lines;
    EXPECT_EQ(lines, 26u);  // header + 25 rows
    EXPECT_EQ(s1.substr(0, 17), "x,y,class,domain\n");

    viz::Embedding2D empty;
    EXPECT_THROW(viz::export_plot_data(empty, (dir / "amclab_e3.csv").string()),
                 std::invalid_argument);
    EXPECT_THROW(viz::render_scatter(empty, (dir / "amclab_e3.svg").string()),
                 std::invalid_argument);

    viz::render_scatter(e, (dir / "amclab_e1.svg").string(), "test");
    std::ifstream svg(dir / "amclab_e1.svg");
    std::string head;
    std::getline(svg, head);
    EXPECT_NE(head.find("<svg"), std::string::npos);
    dfs::remove(p1);
    dfs::remove(p2);
    dfs::remove(dir / "amclab_e1.svg");
}

TEST(Subsample, StratifiedPerCell) {
    std::vector<int> labels;
    std::vector<std::string> domains;
    for (int c = 0; c < 5; ++c)
        for (int k = 0; k < 50; ++k) {
            labels.push_back(c);
            domains.push_back(k % 2 ? "a" : "b");
        }
    const auto keep = viz::stratified_subsample(labels, domains, 10, 42);
    EXPECT_EQ(keep.size(), 100u);  // 5 classes x 2 domains x 10
    // determinism
    const auto keep2 = viz::stratified_subsample(labels, domains, 10, 42);
    EXPECT_EQ(keep, keep2);
}
