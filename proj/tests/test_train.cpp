// Trainers, schedule, metrics, probe: small fast configurations.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "amclab/data/splits.hpp"
#include "amclab/data/synth.hpp"
#include "amclab/model/models.hpp"
#include "amclab/train/metrics.hpp"
#include "amclab/train/probe.hpp"
#include "amclab/train/schedule.hpp"
#include "amclab/train/trainer.hpp"
#include "test_support.hpp"

using namespace amclab;
using testsup::random_matrix;

namespace {

struct SmallProblem {
    Matrix xtr, xval, xunl, xte;
    std::vector<int> ytr, yval, yte;
};

SmallProblem make_problem(double shift, std::uint64_t seed, std::size_t n_per_class = 40,
                          std::size_t d = 8, double class_sep = 3.0) {
    const auto pair = data::synth_shift(n_per_class, d, shift, seed, class_sep);
    const auto plan = data::make_splits(pair.source, pair.target, seed);
    data::StandardScaler scaler;
    const auto src_train = pair.source.subset(plan.source_train);
    scaler.fit(src_train.features, "src");
    SmallProblem p;
    p.xtr = scaler.transform(src_train.features);
    p.ytr = src_train.labels;
    const auto src_val = pair.source.subset(plan.source_val);
    p.xval = scaler.transform(src_val.features);
    p.yval = src_val.labels;
    p.xunl = scaler.transform(pair.target.subset(plan.target_unlabeled).features);
    const auto tgt_eval = pair.target.subset(plan.target_eval);
    p.xte = scaler.transform(tgt_eval.features);
    p.yte = tgt_eval.labels;
    return p;
}

train::TrainConfig fast_config(std::uint64_t seed, std::size_t epochs = 8) {
    train::TrainConfig c;
    c.batch_size = 32;
    c.epochs = epochs;
    c.lr = 2e-3;  // small nets converge quickly at a larger rate
    c.seed = seed;
    c.early_stop = train::TrainConfig::EarlyStop::SourceVal;
    return c;
}

}  // namespace

TEST(LambdaSchedule, EndpointsAndMonotonicity) {
    EXPECT_DOUBLE_EQ(train::lambda_at(0.0, 10.0), 0.0);
    // direct evaluation: 2/(1+e^-10) - 1
    const double expected = 2.0 / (1.0 + std::exp(-10.0)) - 1.0;
    EXPECT_NEAR(train::lambda_at(1.0, 10.0), expected, 1e-15);
    EXPECT_NEAR(expected, 0.999909, 1e-6);
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double l = train::lambda_at(i / 1000.0, 10.0);
        EXPECT_GT(l, prev);
        EXPECT_LT(l, 1.0);
        prev = l;
    }
    EXPECT_THROW(train::lambda_at(0.5, 0.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ(train::lambda_at(1.5, 10.0), train::lambda_at(1.0, 10.0));  // clamped
}

TEST(Metrics, PerfectPredictor) {
    std::vector<int> labels, preds;
    for (int c = 0; c < 5; ++c)
        for (int k = 0; k < 7; ++k) {
            labels.push_back(c);
            preds.push_back(c);
        }
    const auto r = train::metrics_from_predictions(preds, labels);
    EXPECT_DOUBLE_EQ(r.overall_acc, 100.0);
    EXPECT_DOUBLE_EQ(r.avg_acc, 100.0);
    for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_DOUBLE_EQ(r.per_class_acc[c], 100.0);
        for (std::size_t p = 0; p < 5; ++p)
            EXPECT_EQ(r.confusion[c][p], c == p ? 7u : 0u);
    }
}

TEST(Metrics, UniformRandomPredictorNearFloor) {
    Rng rng(1);
    std::vector<int> labels, preds;
    for (int i = 0; i < 10000; ++i) {
        labels.push_back(i % 5);
        preds.push_back(static_cast<int>(rng.uniform_index(5)));
    }
    const auto r = train::metrics_from_predictions(preds, labels);
    EXPECT_NEAR(r.overall_acc, 20.0, 2.0);  // the 20.00 floor of a 5-class set
    std::size_t total = 0;
    for (const auto& row : r.confusion)
        for (auto v : row) total += v;
    EXPECT_EQ(total, labels.size());
}

TEST(Metrics, AverageIsUnweightedClassMean) {
    // per-class values from a published-style row; avg is their plain mean
    train::MetricsReport r;
    const double vals[5] = {84.38, 92.49, 58.05, 88.91, 100.00};
    std::vector<int> labels, preds;
    Rng rng(2);
    for (int c = 0; c < 5; ++c) {
        const int n = 10000;
        const int correct = static_cast<int>(std::lround(vals[c] * n / 100.0));
        for (int k = 0; k < n; ++k) {
            labels.push_back(c);
            preds.push_back(k < correct ? c : (c + 1) % 5);
        }
    }
    r = train::metrics_from_predictions(preds, labels);
    for (int c = 0; c < 5; ++c) EXPECT_NEAR(r.per_class_acc[c], vals[c], 0.005);
    EXPECT_NEAR(r.avg_acc, 84.77, 0.005);
    EXPECT_NEAR(r.avg_acc, (vals[0] + vals[1] + vals[2] + vals[3] + vals[4]) / 5.0, 1e-9);
}

TEST(Metrics, AbsentClassExcludedFromAverage) {
    std::vector<int> labels = {0, 0, 1, 1};
    std::vector<int> preds = {0, 1, 1, 1};
    const auto r = train::metrics_from_predictions(preds, labels);
    EXPECT_FALSE(r.per_class_defined[4]);
    EXPECT_TRUE(std::isnan(r.per_class_acc[4]));
    EXPECT_NEAR(r.avg_acc, (50.0 + 100.0) / 2.0, 1e-12);
}

TEST(Improvement, PaperArithmetic) {
    auto r = train::improvement(92.49, 88.84);
    EXPECT_NEAR(r.absolute, -3.65, 1e-9);
    r = train::improvement(76.86, 79.33);
    EXPECT_NEAR(r.absolute, 2.47, 0.01);
    EXPECT_NEAR(r.percent, 3.21, 0.01);
    r = train::improvement(55.5, 55.5);
    EXPECT_DOUBLE_EQ(r.absolute, 0.0);
    EXPECT_DOUBLE_EQ(r.percent, 0.0);
    r = train::improvement(0.0, 10.0);
    EXPECT_FALSE(r.percent_defined);
    EXPECT_TRUE(std::isnan(r.percent));
}

TEST(TrainBaseline, SeparableBlobsReachHighAccuracy) {
    const auto p = make_problem(0.0, 5, 60, 8, 6.0);  // well-separated blobs
    auto m = model::build_baseline(p.xtr.cols, {.dropout_rate = 0.3, .seed = 5});
    const auto hist = train::train_baseline(m, p.xtr, p.ytr, p.xval, p.yval, fast_config(5, 30));
    EXPECT_GT(hist.best_monitored, 95.0);
    const auto r = train::evaluate(m, p.xval, p.yval);
    EXPECT_GT(r.overall_acc, 95.0);
}

TEST(TrainBaseline, DeterministicUnderSeed) {
    const auto p = make_problem(1.0, 6, 20);
    auto run = [&] {
        auto m = model::build_baseline(p.xtr.cols, {.dropout_rate = 0.3, .seed = 6});
        train::train_baseline(m, p.xtr, p.ytr, p.xval, p.yval, fast_config(6, 3));
        return m.stack.snapshot();
    };
    const auto a = run(), b = run();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_EQ(a[i][k], b[i][k]);
}

TEST(TrainBaseline, ZeroLearningRateIsFixedPoint) {
    const auto p = make_problem(1.0, 7, 20);
    auto m = model::build_baseline(p.xtr.cols, {.dropout_rate = 0.3, .seed = 7});
    // early stopping off so final (unrestored) parameters are compared
    auto cfg = fast_config(7, 3);
    cfg.lr = 0.0;
    cfg.early_stop = train::TrainConfig::EarlyStop::Off;
    std::vector<std::vector<double>> before;
    for (auto pr : m.stack.params()) before.push_back(*pr.value);
    train::train_baseline(m, p.xtr, p.ytr, p.xval, p.yval, cfg);
    std::size_t i = 0;
    for (auto pr : m.stack.params()) {
        for (std::size_t k = 0; k < pr.value->size(); ++k)
            EXPECT_EQ((*pr.value)[k], before[i][k]);
        ++i;
    }
}

TEST(TrainDann, PinnedLambdaZeroMatchesLabelOnlyBitForBit) {
    const auto p = make_problem(2.0, 8, 25);
    auto cfg = fast_config(8, 4);

    auto m1 = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 8});
    auto cfg_pinned = cfg;
    cfg_pinned.lambda_fixed = 0.0;
    const auto h1 =
        train::train_dann(m1, p.xtr, p.ytr, p.xval, p.yval, p.xunl, cfg_pinned, &p.xte, &p.yte);

    auto m2 = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 8});
    const auto h2 = train::train_label_only(m2, p.xtr, p.ytr, p.xval, p.yval, cfg, &p.xte, &p.yte);

    ASSERT_EQ(h1.epochs.size(), h2.epochs.size());
    for (std::size_t e = 0; e < h1.epochs.size(); ++e) {
        EXPECT_EQ(h1.epochs[e].source_val_acc, h2.epochs[e].source_val_acc);
        EXPECT_EQ(h1.epochs[e].target_val_acc, h2.epochs[e].target_val_acc);
        EXPECT_EQ(h1.epochs[e].label_loss, h2.epochs[e].label_loss);
    }
    const auto s1 = m1.extractor.snapshot(), s2 = m2.extractor.snapshot();
    for (std::size_t i = 0; i < s1.size(); ++i)
        for (std::size_t k = 0; k < s1[i].size(); ++k) EXPECT_EQ(s1[i][k], s2[i][k]);
}

TEST(TrainDann, EmptyTargetFallsBackWithWarning) {
    const auto p = make_problem(1.0, 9, 20);
    auto m = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 9});
    const Matrix empty(0, p.xtr.cols);
    const auto h =
        train::train_dann(m, p.xtr, p.ytr, p.xval, p.yval, empty, fast_config(9, 2));
    EXPECT_EQ(h.epochs.size(), 2u);
    for (const auto& s : h.steps) EXPECT_EQ(s.dom_src_loss, 0.0);
}

TEST(TrainDann, LambdaTraceStartsAtZeroAndIsNondecreasing) {
    const auto p = make_problem(2.0, 10, 25);
    auto m = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 10});
    auto cfg = fast_config(10, 4);
    cfg.early_stop = train::TrainConfig::EarlyStop::Off;
    const auto h = train::train_dann(m, p.xtr, p.ytr, p.xval, p.yval, p.xunl, cfg);
    ASSERT_FALSE(h.steps.empty());
    EXPECT_DOUBLE_EQ(h.steps.front().lambda, 0.0);
    for (std::size_t i = 1; i < h.steps.size(); ++i)
        EXPECT_GE(h.steps[i].lambda, h.steps[i - 1].lambda);
    EXPECT_LT(h.steps.back().lambda, 1.0);
}

TEST(TrainDann, LoggedObjectiveMatchesComponents) {
    const auto p = make_problem(2.0, 11, 25);
    auto m = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 11});
    const auto h =
        train::train_dann(m, p.xtr, p.ytr, p.xval, p.yval, p.xunl, fast_config(11, 3));
    for (const auto& s : h.steps) {
        const double recombined = s.label_loss - s.lambda * (s.dom_src_loss + s.dom_tgt_loss);
        EXPECT_NEAR(s.total_obj, recombined, 1e-10);
        EXPECT_GE(s.label_loss, 0.0);
        EXPECT_GE(s.dom_src_loss, 0.0);
        EXPECT_GE(s.dom_tgt_loss, 0.0);
    }
}

TEST(TrainDann, EarlyStoppingKeepsBestMonitored) {
    const auto p = make_problem(2.0, 12, 25);
    auto m = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 12});
    auto cfg = fast_config(12, 10);
    cfg.early_stop = train::TrainConfig::EarlyStop::TargetVal;
    cfg.patience = 3;
    const auto h = train::train_dann(m, p.xtr, p.ytr, p.xval, p.yval, p.xunl, cfg, &p.xte, &p.yte);
    ASSERT_GT(h.best_epoch, 0u);
    EXPECT_EQ(h.monitor, "target_val");
    double best_seen = -1.0;
    for (const auto& e : h.epochs) best_seen = std::max(best_seen, e.target_val_acc);
    EXPECT_DOUBLE_EQ(h.best_monitored, best_seen);
    // the restored model reproduces the monitored accuracy of the best epoch
    const auto r = train::evaluate(m, p.xte, p.yte);
    EXPECT_DOUBLE_EQ(r.overall_acc, h.best_monitored);
}

TEST(DomainProbe, IdenticalDistributionsScoreChance) {
    std::vector<double> scores;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const Matrix a = random_matrix(150, 16, rng);
        const Matrix b = random_matrix(150, 16, rng);  // same generator, two tags
        scores.push_back(train::domain_probe(a, b, seed));
    }
    const double med = testsup::median_of(scores);
    EXPECT_GE(med, 0.45);
    EXPECT_LE(med, 0.55);
}

TEST(DomainProbe, WellSeparatedClustersScoreHigh) {
    Rng rng(3);
    Matrix a = random_matrix(100, 8, rng);
    Matrix b = random_matrix(100, 8, rng);
    for (std::size_t i = 0; i < b.rows; ++i) b(i, 0) += 6.0;  // 6 sigma apart
    EXPECT_GT(train::domain_probe(a, b, 3), 0.99);
    EXPECT_THROW(train::domain_probe(a, Matrix(100, 9, 0.0), 1), std::invalid_argument);
    EXPECT_THROW(train::domain_probe(Matrix(10, 8, 0.0), b, 1), std::invalid_argument);
}

TEST(History, CsvWritersProduceParseableLogs) {
    const auto p = make_problem(1.0, 13, 20);
    auto m = model::build_dann(p.xtr.cols, {.dropout_rate = 0.3, .seed = 13});
    const auto h =
        train::train_dann(m, p.xtr, p.ytr, p.xval, p.yval, p.xunl, fast_config(13, 2));
    const auto dir = std::filesystem::temp_directory_path();
    train::write_history_csv(h, (dir / "amclab_hist.csv").string());
    train::write_steps_csv(h, (dir / "amclab_steps.csv").string());
    std::ifstream is(dir / "amclab_hist.csv");
    std::string line;
    std::getline(is, line);
    EXPECT_NE(line.find("lambda_start"), std::string::npos);
    std::size_t rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, h.epochs.size());
    std::filesystem::remove(dir / "amclab_hist.csv");
    std::filesystem::remove(dir / "amclab_steps.csv");
}
