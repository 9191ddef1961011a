// Architecture assembly, adversarial gradient routing, checkpoints.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "amclab/model/models.hpp"
#include "amclab/nn/loss.hpp"
#include "test_support.hpp"

using namespace amclab;
using nn::Mode;
using testsup::random_matrix;

namespace {

// gradients of one stack flattened for comparison
std::vector<double> flat_grads(nn::LayerStack& s) {
    std::vector<double> out;
    for (auto p : s.params()) out.insert(out.end(), p.grad->begin(), p.grad->end());
    return out;
}

}  // namespace

TEST(Build, BaselineLayerSizes) {
    auto m = model::build_baseline(202);
    auto& first = dynamic_cast<nn::Linear&>(m.stack.layer(0));
    EXPECT_EQ(first.weights().size(), 202u * 256u);  // 51,712 weights
    EXPECT_EQ(first.bias().size(), 256u);
    EXPECT_EQ(m.stack.output_dim(), 5u);
    EXPECT_EQ(m.stack.size(), 9u);
}

TEST(Build, DannLayerSizes) {
    auto m = model::build_dann(202);
    auto& first = dynamic_cast<nn::Linear&>(m.extractor.layer(0));
    EXPECT_EQ(first.weights().size(), 202u * 512u);  // 103,424 weights
    EXPECT_EQ(m.extractor.output_dim(), 128u);
    EXPECT_EQ(m.label_head.output_dim(), 5u);
    EXPECT_EQ(m.domain_head.output_dim(), 2u);
    EXPECT_EQ(m.domain_head.layer(0).kind(), "grl");  // GRL only at the domain-head entry
    for (std::size_t i = 1; i < m.domain_head.size(); ++i)
        EXPECT_NE(m.domain_head.layer(i).kind(), "grl");
    for (std::size_t i = 0; i < m.extractor.size(); ++i)
        EXPECT_NE(m.extractor.layer(i).kind(), "grl");
}

TEST(Build, SameSeedGivesBitIdenticalParameters) {
    model::ModelConfig cfg;
    cfg.seed = 31;
    auto a = model::build_dann(24, cfg);
    auto b = model::build_dann(24, cfg);
    const auto sa = a.extractor.snapshot(), sb = b.extractor.snapshot();
    for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t k = 0; k < sa[i].size(); ++k) EXPECT_EQ(sa[i][k], sb[i][k]);
    EXPECT_THROW(model::build_baseline(0), std::invalid_argument);
}

TEST(Forward, ShapesMatchContract) {
    auto m = model::build_dann(17);
    Rng rng(1);
    const auto f = model::dann_forward(m, random_matrix(128, 17, rng), Mode::Train, 0.4);
    EXPECT_EQ(f.features.rows, 128u);
    EXPECT_EQ(f.features.cols, 128u);
    EXPECT_EQ(f.label_logits.cols, 5u);
    EXPECT_EQ(f.domain_logits.cols, 2u);
    EXPECT_DOUBLE_EQ(m.grl().lambda(), 0.4);
}

TEST(Forward, EvalModeIsDeterministic) {
    auto m = model::build_dann(9);
    Rng rng(2);
    const Matrix x = random_matrix(32, 9, rng);
    const auto a = model::dann_forward(m, x, Mode::Eval, 0.0);
    const auto b = model::dann_forward(m, x, Mode::Eval, 0.0);
    for (std::size_t k = 0; k < a.label_logits.size(); ++k)
        EXPECT_EQ(a.label_logits.data[k], b.label_logits.data[k]);
}

TEST(Gradients, LambdaZeroLeavesLabelOnlyGradient) {
    auto m = model::build_dann(7);
    Rng rng(3);
    const Matrix x = random_matrix(16, 7, rng);
    std::vector<int> y(16), d(16, 0);
    for (auto& v : y) v = static_cast<int>(rng.uniform_index(5));

    // eval mode keeps both passes deterministic (dropout off, running stats)
    auto run = [&](bool with_domain) {
        m.extractor.zero_grad();
        m.label_head.zero_grad();
        m.domain_head.zero_grad();
        const auto f = model::dann_forward(m, x, Mode::Eval, 0.0);
        const auto ce = nn::softmax_cross_entropy(f.label_logits, y);
        Matrix g = m.label_head.backward(ce.logit_grad);
        if (with_domain) {
            const auto ced = nn::softmax_cross_entropy(f.domain_logits, d);
            const Matrix gd = m.domain_head.backward(ced.logit_grad);
            for (std::size_t k = 0; k < g.size(); ++k) g.data[k] += gd.data[k];
        }
        m.extractor.backward(g);
        return flat_grads(m.extractor);
    };

    const auto label_only = run(false);
    const auto with_domain_l0 = run(true);
    ASSERT_EQ(label_only.size(), with_domain_l0.size());
    for (std::size_t k = 0; k < label_only.size(); ++k)
        EXPECT_NEAR(label_only[k], with_domain_l0[k], 1e-12);
}

TEST(Gradients, JointObjectiveDecomposition) {
    // total extractor gradient = grad(L_y) - lambda * grad(L_d), checked by
    // three separate backward passes
    const double lambda = 0.6;
    auto m = model::build_dann(11);
    Rng rng(4);
    const Matrix x = random_matrix(24, 11, rng);
    std::vector<int> y(24), d(24);
    for (auto& v : y) v = static_cast<int>(rng.uniform_index(5));
    for (auto& v : d) v = static_cast<int>(rng.uniform_index(2));

    auto zero_all = [&] {
        m.extractor.zero_grad();
        m.label_head.zero_grad();
        m.domain_head.zero_grad();
    };

    // pass 1: label loss only
    zero_all();
    auto f = model::dann_forward(m, x, Mode::Eval, lambda);
    auto ce_y = nn::softmax_cross_entropy(f.label_logits, y);
    m.extractor.backward(m.label_head.backward(ce_y.logit_grad));
    const auto g_label = flat_grads(m.extractor);

    // pass 2: domain loss only, measured at lambda = 1 (true gradient)
    zero_all();
    f = model::dann_forward(m, x, Mode::Eval, 1.0);
    auto ce_d = nn::softmax_cross_entropy(f.domain_logits, d);
    m.extractor.backward(m.domain_head.backward(ce_d.logit_grad));
    const auto g_domain_rev = flat_grads(m.extractor);  // already -1 * grad(L_d)

    // pass 3: combined at lambda
    zero_all();
    f = model::dann_forward(m, x, Mode::Eval, lambda);
    ce_y = nn::softmax_cross_entropy(f.label_logits, y);
    ce_d = nn::softmax_cross_entropy(f.domain_logits, d);
    Matrix g = m.label_head.backward(ce_y.logit_grad);
    const Matrix gd = m.domain_head.backward(ce_d.logit_grad);
    for (std::size_t k = 0; k < g.size(); ++k) g.data[k] += gd.data[k];
    m.extractor.backward(g);
    const auto g_total = flat_grads(m.extractor);

    for (std::size_t k = 0; k < g_total.size(); ++k)
        EXPECT_NEAR(g_total[k], g_label[k] + lambda * g_domain_rev[k], 1e-10);
}

TEST(Gradients, HeadIsolationIsExact) {
    auto m = model::build_dann(8);
    Rng rng(5);
    const Matrix x = random_matrix(12, 8, rng);
    std::vector<int> y(12, 1), d(12, 0);

    // domain loss only: label head gradients stay exactly zero
    m.extractor.zero_grad();
    m.label_head.zero_grad();
    m.domain_head.zero_grad();
    auto f = model::dann_forward(m, x, Mode::Eval, 0.5);
    const auto ced = nn::softmax_cross_entropy(f.domain_logits, d);
    m.extractor.backward(m.domain_head.backward(ced.logit_grad));
    for (double g : flat_grads(m.label_head)) EXPECT_EQ(g, 0.0);

    // label loss only: domain head gradients stay exactly zero
    m.extractor.zero_grad();
    m.label_head.zero_grad();
    m.domain_head.zero_grad();
    f = model::dann_forward(m, x, Mode::Eval, 0.5);
    const auto cey = nn::softmax_cross_entropy(f.label_logits, y);
    m.extractor.backward(m.label_head.backward(cey.logit_grad));
    for (double g : flat_grads(m.domain_head)) EXPECT_EQ(g, 0.0);
}

TEST(ExtractFeatures, RowAlignedAndDeterministic) {
    auto m = model::build_dann(6);
    Rng rng(6);
    Matrix x = random_matrix(40, 6, rng);
    // duplicate row 0 into row 1: identical inputs give identical rows
    for (std::size_t j = 0; j < 6; ++j) x(1, j) = x(0, j);
    const Matrix f = model::extract_features(m, x, 16);  // chunked
    EXPECT_EQ(f.rows, 40u);
    EXPECT_EQ(f.cols, 128u);
    for (std::size_t j = 0; j < 128; ++j) EXPECT_EQ(f(0, j), f(1, j));

    auto b = model::build_baseline(6);
    const Matrix fb = model::extract_features(b, x);
    EXPECT_EQ(fb.cols, 128u);
}

TEST(ExtractFeatures, BaselineUsesPostReluPenultimate) {
    auto b = model::build_baseline(5);
    Rng rng(7);
    const Matrix x = random_matrix(8, 5, rng);
    const Matrix f = b.features_eval(x);
    EXPECT_EQ(f.cols, 128u);
    for (double v : f.data) EXPECT_GE(v, 0.0);  // post-ReLU activations
}

TEST(Checkpoint, ModelRoundTripAndMismatch) {
    namespace dfs = std::filesystem;
    const auto dir = dfs::temp_directory_path();

    model::ModelConfig cfg;
    cfg.seed = 12;
    auto m = model::build_dann(13, cfg);
    Rng rng(8);
    model::dann_forward(m, random_matrix(16, 13, rng), Mode::Train, 0.3);  // move BN stats
    const auto path = dir / "amclab_dann.ckpt";
    model::save_model(path, m);

    auto back = model::load_dann(path);
    const Matrix x = random_matrix(4, 13, rng);
    const Matrix a = m.logits_eval(x);
    const Matrix b = back.logits_eval(x);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.data[k], b.data[k]);

    EXPECT_THROW(model::load_baseline(path), std::runtime_error);  // wrong model kind

    auto bl = model::build_baseline(13, cfg);
    const auto bpath = dir / "amclab_baseline.ckpt";
    model::save_model(bpath, bl);
    auto bl2 = model::load_baseline(bpath);
    const Matrix c = bl.logits_eval(x);
    const Matrix d2 = bl2.logits_eval(x);
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(c.data[k], d2.data[k]);

    dfs::remove(path);
    dfs::remove(bpath);
}
