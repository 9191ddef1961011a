// Training loops for the baseline classifier and the adversarial model.
//
// The adversarial step follows the joint objective: the label head descends
// its cross-entropy, the domain head descends domain cross-entropy on a
// source batch plus a target batch, and the gradient reversal layer feeds
// -lambda times the domain gradient back into the feature extractor.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/matrix.hpp"
#include "amclab/model/models.hpp"
#include "amclab/nn/adam.hpp"
#include "amclab/nn/loss.hpp"
#include "amclab/train/metrics.hpp"
#include "amclab/train/schedule.hpp"

namespace amclab::train {

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 128;
    std::size_t epochs = 50;
    double lambda_gamma = 10.0;
    enum class EarlyStop { TargetVal, SourceVal, Off };
    EarlyStop early_stop = EarlyStop::TargetVal;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    // Pins lambda to a constant; exactly 0 disables the adversarial machinery
    // and degenerates to label-only training.
    std::optional<double> lambda_fixed;

    void validate() const {
        if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (lr < 0) throw std::invalid_argument("TrainConfig: negative learning rate");
    }
};

inline std::string to_string(TrainConfig::EarlyStop m) {
    switch (m) {
        case TrainConfig::EarlyStop::TargetVal: return "target_val";
        case TrainConfig::EarlyStop::SourceVal: return "source_val";
        case TrainConfig::EarlyStop::Off: return "off";
    }
    return "?";
}

inline TrainConfig::EarlyStop early_stop_from_string(const std::string& s) {
    if (s == "target_val") return TrainConfig::EarlyStop::TargetVal;
    if (s == "source_val") return TrainConfig::EarlyStop::SourceVal;
    if (s == "off") return TrainConfig::EarlyStop::Off;
    throw std::invalid_argument("unknown early_stop mode: " + s);
}

struct StepRecord {
    std::size_t step = 0;
    double lambda = 0.0;
    double label_loss = 0.0;
    double dom_src_loss = 0.0;
    double dom_tgt_loss = 0.0;
    double total_obj = 0.0;  // label_loss - lambda * (dom_src_loss + dom_tgt_loss)
};

struct EpochRecord {
    std::size_t epoch = 0;
    double label_loss = 0.0;
    double dom_src_loss = 0.0;
    double dom_tgt_loss = 0.0;
    double total_obj = 0.0;
    double lambda_start = 0.0;
    double lambda_end = 0.0;
    double source_val_acc = std::numeric_limits<double>::quiet_NaN();
    double target_val_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::vector<StepRecord> steps;
    std::size_t best_epoch = 0;     // 1-based; 0 = best tracking disabled
    double best_monitored = std::numeric_limits<double>::quiet_NaN();
    bool early_stopped = false;
    std::string monitor = "off";
};

namespace detail {

inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch,
                                                          Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t end = std::min(n, start + batch);
        out.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                         idx.begin() + static_cast<std::ptrdiff_t>(end));
    }
    // a trailing single-sample batch cannot pass train-mode batch norm
    if (out.size() > 1 && out.back().size() < 2) out.pop_back();
    if (out.empty() || out.back().size() < 2)
        throw std::invalid_argument("train: need at least 2 training samples");
    return out;
}

inline std::vector<int> slice_labels(const std::vector<int>& y,
                                     const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(y.at(i));
    return out;
}

template <typename Model>
double accuracy_of(Model& m, const Matrix& x, const std::vector<int>& y) {
    return evaluate(m, x, y).overall_acc;
}

// Cycles target rows in shuffled order, reshuffling at each wrap.
class TargetCycler {
public:
    TargetCycler(std::size_t n, Rng& rng) : rng_(rng), order_(n) {
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        rng_.shuffle(order_);
    }

    std::vector<std::size_t> next(std::size_t count) {
        std::vector<std::size_t> out;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            if (pos_ == order_.size()) {
                rng_.shuffle(order_);
                pos_ = 0;
            }
            out.push_back(order_[pos_++]);
        }
        return out;
    }

private:
    Rng& rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

// Early-stopping bookkeeping shared by both trainers.
struct BestTracker {
    explicit BestTracker(std::size_t patience) : patience_(patience) {}

    // Returns true when training should stop.
    bool observe(std::size_t epoch, double monitored,
                 const std::function<std::vector<std::vector<double>>()>& snapshot) {
        if (!(monitored <= best_)) {  // strictly better (NaN-safe)
            best_ = monitored;
            best_epoch_ = epoch;
            best_state_ = snapshot();
            stale_ = 0;
            return false;
        }
        return ++stale_ > patience_;
    }

    std::size_t best_epoch() const { return best_epoch_; }
    double best() const { return best_; }
    const std::vector<std::vector<double>>& state() const { return best_state_; }
    bool has_state() const { return !best_state_.empty(); }

private:
    std::size_t patience_;
    double best_ = -std::numeric_limits<double>::infinity();
    std::size_t best_epoch_ = 0;
    std::size_t stale_ = 0;
    std::vector<std::vector<double>> best_state_;
};

// Label-only minibatch loop over an arbitrary classifier surface. Both the
// baseline trainer and the pinned-lambda-0 adversarial path run through this
// exact code, which is what makes their trajectories bit-identical.
struct LabelPath {
    std::function<Matrix(const Matrix&, nn::Mode)> forward;
    std::function<void(const Matrix&)> backward;  // from logit gradient
    std::function<void()> zero_grad;
    std::function<double(const Matrix&, const std::vector<int>&)> accuracy;
    std::function<std::vector<std::vector<double>>()> snapshot;
    std::function<void(const std::vector<std::vector<double>>&)> restore;
    nn::Adam* adam = nullptr;
};

inline TrainHistory train_label_core(LabelPath& path, const Matrix& xtr,
                                     const std::vector<int>& ytr, const Matrix& xval,
                                     const std::vector<int>& yval, const Matrix* xmon,
                                     const std::vector<int>* ymon, const TrainConfig& cfg) {
    cfg.validate();
    if (xtr.rows == 0) throw std::invalid_argument("train: empty training split");
    if (xtr.rows != ytr.size()) throw std::invalid_argument("train: label count mismatch");

    const bool monitor_target = cfg.early_stop == TrainConfig::EarlyStop::TargetVal &&
                                xmon != nullptr && ymon != nullptr;
    const bool track_best = cfg.early_stop != TrainConfig::EarlyStop::Off;

    TrainHistory hist;
    hist.monitor = track_best ? (monitor_target ? "target_val" : "source_val") : "off";
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5aff1e));
    BestTracker tracker(cfg.patience);
    std::size_t global_step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto batches = make_batches(xtr.rows, cfg.batch_size, shuffle_rng);
        double loss_sum = 0.0;
        for (const auto& b : batches) {
            path.zero_grad();
            const Matrix xb = xtr.row_slice(b);
            const auto yb = slice_labels(ytr, b);
            const Matrix logits = path.forward(xb, nn::Mode::Train);
            const auto ce = nn::softmax_cross_entropy(logits, yb);
            path.backward(ce.logit_grad);
            path.adam->step();
            loss_sum += ce.loss;
            hist.steps.push_back({global_step++, 0.0, ce.loss, 0.0, 0.0, ce.loss});
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.label_loss = loss_sum / static_cast<double>(batches.size());
        rec.total_obj = rec.label_loss;
        rec.source_val_acc = path.accuracy(xval, yval);
        if (xmon && ymon) rec.target_val_acc = path.accuracy(*xmon, *ymon);
        hist.epochs.push_back(rec);

        if (track_best) {
            const double monitored = monitor_target ? rec.target_val_acc : rec.source_val_acc;
            if (tracker.observe(epoch, monitored, path.snapshot)) {
                hist.early_stopped = true;
                break;
            }
        }
    }

    if (track_best && tracker.has_state()) {
        path.restore(tracker.state());
        hist.best_epoch = tracker.best_epoch();
        hist.best_monitored = tracker.best();
    }
    return hist;
}

}  // namespace detail

// Supervised baseline: shuffled mini-batch Adam on label cross-entropy only.
// History records per-epoch source-val accuracy; the best checkpoint by the
// monitored accuracy is retained.
inline TrainHistory train_baseline(model::BaselineMLP& m, const Matrix& xtr,
                                   const std::vector<int>& ytr, const Matrix& xval,
                                   const std::vector<int>& yval, const TrainConfig& cfg) {
    TrainConfig c = cfg;
    // the baseline never sees target labels; coerce target monitoring to source
    if (c.early_stop == TrainConfig::EarlyStop::TargetVal)
        c.early_stop = TrainConfig::EarlyStop::SourceVal;
    nn::Adam adam({&m.stack}, {.lr = c.lr});
    detail::LabelPath path{
        [&m](const Matrix& x, nn::Mode mode) { return m.stack.forward(x, mode); },
        [&m](const Matrix& g) { m.stack.backward(g); },
        [&m] { m.stack.zero_grad(); },
        [&m](const Matrix& x, const std::vector<int>& y) { return detail::accuracy_of(m, x, y); },
        [&m] { return m.stack.snapshot(); },
        [&m](const std::vector<std::vector<double>>& s) { m.stack.restore(s); },
        &adam};
    return detail::train_label_core(path, xtr, ytr, xval, yval, nullptr, nullptr, c);
}

// Label-only training of the adversarial architecture (extractor + label
// head). The domain head is left untouched.
inline TrainHistory train_label_only(model::DannModel& m, const Matrix& xtr,
                                     const std::vector<int>& ytr, const Matrix& xval,
                                     const std::vector<int>& yval, const TrainConfig& cfg,
                                     const Matrix* xmon = nullptr,
                                     const std::vector<int>* ymon = nullptr) {
    nn::Adam adam({&m.extractor, &m.label_head}, {.lr = cfg.lr});
    detail::LabelPath path{
        [&m](const Matrix& x, nn::Mode mode) {
            return m.label_head.forward(m.extractor.forward(x, mode), mode);
        },
        [&m](const Matrix& g) { m.extractor.backward(m.label_head.backward(g)); },
        [&m] {
            m.extractor.zero_grad();
            m.label_head.zero_grad();
        },
        [&m](const Matrix& x, const std::vector<int>& y) { return detail::accuracy_of(m, x, y); },
        [&m] {
            auto s = m.extractor.snapshot();
            auto t = m.label_head.snapshot();
            s.insert(s.end(), t.begin(), t.end());
            return s;
        },
        [&m](const std::vector<std::vector<double>>& s) {
            const std::size_t n_ext = m.extractor.state().size();
            std::vector<std::vector<double>> a(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n_ext));
            std::vector<std::vector<double>> b(s.begin() + static_cast<std::ptrdiff_t>(n_ext), s.end());
            m.extractor.restore(a);
            m.label_head.restore(b);
        },
        &adam};
    return detail::train_label_core(path, xtr, ytr, xval, yval, xmon, ymon, cfg);
}

// Adversarial training: each optimizer step combines a labeled source batch
// (label loss + domain loss, domain = 0) with an unlabeled target batch
// (domain loss only, domain = 1), lambda following the sigmoid schedule over
// global progress. Target labels are structurally unavailable here; the
// optional (xmon, ymon) pair is used for early-stopping monitoring only.
inline TrainHistory train_dann(model::DannModel& m, const Matrix& xtr,
                               const std::vector<int>& ytr, const Matrix& xval,
                               const std::vector<int>& yval, const Matrix& xtgt_unlabeled,
                               const TrainConfig& cfg, const Matrix* xmon = nullptr,
                               const std::vector<int>* ymon = nullptr) {
    cfg.validate();
    if (cfg.lambda_fixed && *cfg.lambda_fixed == 0.0)
        return train_label_only(m, xtr, ytr, xval, yval, cfg, xmon, ymon);
    if (xtgt_unlabeled.rows < 2) {
        std::cerr << "warning: train_dann: target set empty, falling back to "
                     "baseline-equivalent label-only training\n";
        return train_label_only(m, xtr, ytr, xval, yval, cfg, xmon, ymon);
    }
    if (xtr.rows == 0) throw std::invalid_argument("train_dann: empty training split");
    if (xtgt_unlabeled.cols != xtr.cols)
        throw std::invalid_argument("train_dann: source/target width mismatch");

    const bool monitor_target = cfg.early_stop == TrainConfig::EarlyStop::TargetVal &&
                                xmon != nullptr && ymon != nullptr;
    const bool track_best = cfg.early_stop != TrainConfig::EarlyStop::Off;

    TrainHistory hist;
    hist.monitor = track_best ? (monitor_target ? "target_val" : "source_val") : "off";
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5aff1e));
    Rng target_rng(derive_seed(cfg.seed, 0x7a9e7));
    detail::TargetCycler cycler(xtgt_unlabeled.rows, target_rng);
    detail::BestTracker tracker(cfg.patience);

    nn::Adam adam({&m.extractor, &m.label_head, &m.domain_head}, {.lr = cfg.lr});
    auto snapshot = [&m] {
        std::vector<std::vector<double>> s = m.extractor.snapshot();
        for (auto& v : m.label_head.snapshot()) s.push_back(std::move(v));
        for (auto& v : m.domain_head.snapshot()) s.push_back(std::move(v));
        return s;
    };
    auto restore = [&m](const std::vector<std::vector<double>>& s) {
        const std::size_t a = m.extractor.state().size();
        const std::size_t b = m.label_head.state().size();
        m.extractor.restore({s.begin(), s.begin() + static_cast<std::ptrdiff_t>(a)});
        m.label_head.restore({s.begin() + static_cast<std::ptrdiff_t>(a),
                              s.begin() + static_cast<std::ptrdiff_t>(a + b)});
        m.domain_head.restore({s.begin() + static_cast<std::ptrdiff_t>(a + b), s.end()});
    };

    const std::size_t steps_per_epoch = (xtr.rows + cfg.batch_size - 1) / cfg.batch_size;
    const double total_steps = static_cast<double>(steps_per_epoch * cfg.epochs);
    std::size_t global_step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto batches = detail::make_batches(xtr.rows, cfg.batch_size, shuffle_rng);
        double ly_sum = 0.0, lds_sum = 0.0, ldt_sum = 0.0, tot_sum = 0.0;
        double lambda_start = 0.0, lambda_end = 0.0;

        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const double p = static_cast<double>(global_step) / total_steps;
            const double lambda =
                cfg.lambda_fixed ? *cfg.lambda_fixed : lambda_at(p, cfg.lambda_gamma);
            if (bi == 0) lambda_start = lambda;
            lambda_end = lambda;

            m.extractor.zero_grad();
            m.label_head.zero_grad();
            m.domain_head.zero_grad();

            // source batch: label loss + domain loss (domain = 0)
            const Matrix xb = xtr.row_slice(batches[bi]);
            const auto yb = detail::slice_labels(ytr, batches[bi]);
            const auto fwd = model::dann_forward(m, xb, nn::Mode::Train, lambda);
            const auto ce_y = nn::softmax_cross_entropy(fwd.label_logits, yb);
            const std::vector<int> dom_src(xb.rows, 0);
            const auto ce_ds = nn::softmax_cross_entropy(fwd.domain_logits, dom_src);
            Matrix g = m.label_head.backward(ce_y.logit_grad);
            const Matrix g_dom = m.domain_head.backward(ce_ds.logit_grad);
            for (std::size_t k = 0; k < g.size(); ++k) g.data[k] += g_dom.data[k];
            m.extractor.backward(g);

            // target batch: domain loss only (domain = 1)
            const Matrix xt = xtgt_unlabeled.row_slice(cycler.next(cfg.batch_size));
            const Matrix feat_t = m.extractor.forward(xt, nn::Mode::Train);
            const Matrix dlog_t = m.domain_head.forward(feat_t, nn::Mode::Train);
            const std::vector<int> dom_tgt(xt.rows, 1);
            const auto ce_dt = nn::softmax_cross_entropy(dlog_t, dom_tgt);
            m.extractor.backward(m.domain_head.backward(ce_dt.logit_grad));

            adam.step();

            const double total = ce_y.loss - lambda * (ce_ds.loss + ce_dt.loss);
            hist.steps.push_back({global_step, lambda, ce_y.loss, ce_ds.loss, ce_dt.loss, total});
            ly_sum += ce_y.loss;
            lds_sum += ce_ds.loss;
            ldt_sum += ce_dt.loss;
            tot_sum += total;
            ++global_step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        const double nb = static_cast<double>(batches.size());
        rec.label_loss = ly_sum / nb;
        rec.dom_src_loss = lds_sum / nb;
        rec.dom_tgt_loss = ldt_sum / nb;
        rec.total_obj = tot_sum / nb;
        rec.lambda_start = lambda_start;
        rec.lambda_end = lambda_end;
        rec.source_val_acc = detail::accuracy_of(m, xval, yval);
        if (xmon && ymon) rec.target_val_acc = detail::accuracy_of(m, *xmon, *ymon);
        hist.epochs.push_back(rec);

        if (track_best) {
            const double monitored = monitor_target ? rec.target_val_acc : rec.source_val_acc;
            if (tracker.observe(epoch, monitored, snapshot)) {
                hist.early_stopped = true;
                break;
            }
        }
    }

    if (track_best && tracker.has_state()) {
        restore(tracker.state());
        hist.best_epoch = tracker.best_epoch();
        hist.best_monitored = tracker.best();
    }
    return hist;
}

// Full-precision CSV logs; display rounding happens only in report rendering.
inline void write_history_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_history_csv: cannot open " + path);
    os << "epoch,label_loss,dom_src_loss,dom_tgt_loss,total_obj,lambda_start,lambda_end,"
          "source_val_acc,target_val_acc\n";
    char buf[680];
    for (const auto& e : h.epochs) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", e.epoch,
                      e.label_loss, e.dom_src_loss, e.dom_tgt_loss, e.total_obj, e.lambda_start,
                      e.lambda_end, e.source_val_acc);
        os << buf;
        if (std::isnan(e.target_val_acc))
            os << "\n";
        else {
            std::snprintf(buf, sizeof buf, "%.17g\n", e.target_val_acc);
            os << buf;
        }
    }
}

inline void write_steps_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_steps_csv: cannot open " + path);
    os << "step,lambda,label_loss,dom_src_loss,dom_tgt_loss,total_obj\n";
    char buf[512];
    for (const auto& s : h.steps) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.step, s.lambda,
                      s.label_loss, s.dom_src_loss, s.dom_tgt_loss, s.total_obj);
        os << buf;
    }
}

}  // namespace amclab::train
