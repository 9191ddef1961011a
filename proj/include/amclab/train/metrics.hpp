// Evaluation metrics: per-class / average / overall accuracy, confusion
// matrix, domain-probe accuracies, and improvement arithmetic.
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amclab/data/dataset.hpp"
#include "amclab/matrix.hpp"
#include "amclab/model/models.hpp"
#include "amclab/nn/loss.hpp"

namespace amclab::train {

constexpr std::size_t kClasses = model::kNumClasses;

struct MetricsReport {
    std::array<double, kClasses> per_class_acc{};    // percent; NaN when undefined
    std::array<bool, kClasses> per_class_defined{};
    double avg_acc = 0.0;      // unweighted mean of defined per-class accuracies
    double overall_acc = 0.0;  // percent correct over all samples
    std::array<std::array<std::size_t, kClasses>, kClasses> confusion{};  // [true][pred]
    double dca_before = std::numeric_limits<double>::quiet_NaN();
    double dca_after = std::numeric_limits<double>::quiet_NaN();
    double abs_improvement = std::numeric_limits<double>::quiet_NaN();
    double pct_improvement = std::numeric_limits<double>::quiet_NaN();

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["per_class_acc"] = per_class_acc;
        j["per_class_defined"] = per_class_defined;
        j["avg_acc"] = avg_acc;
        j["overall_acc"] = overall_acc;
        j["confusion"] = confusion;
        auto put = [&j](const char* key, double v) {
            if (std::isnan(v))
                j[key] = nullptr;
            else
                j[key] = v;
        };
        put("dca_before", dca_before);
        put("dca_after", dca_after);
        put("abs_improvement", abs_improvement);
        put("pct_improvement", pct_improvement);
        return j;
    }

    static MetricsReport from_json(const nlohmann::json& j) {
        MetricsReport r;
        r.per_class_acc = j.at("per_class_acc").get<std::array<double, kClasses>>();
        r.per_class_defined = j.at("per_class_defined").get<std::array<bool, kClasses>>();
        r.avg_acc = j.at("avg_acc").get<double>();
        r.overall_acc = j.at("overall_acc").get<double>();
        r.confusion = j.at("confusion")
                          .get<std::array<std::array<std::size_t, kClasses>, kClasses>>();
        auto get = [&j](const char* key) {
            return j.contains(key) && !j.at(key).is_null()
                       ? j.at(key).get<double>()
                       : std::numeric_limits<double>::quiet_NaN();
        };
        r.dca_before = get("dca_before");
        r.dca_after = get("dca_after");
        r.abs_improvement = get("abs_improvement");
        r.pct_improvement = get("pct_improvement");
        return r;
    }
};

// Accuracy bookkeeping from prediction/label pairs. A class absent from the
// labels reports an undefined per-class accuracy and is excluded from avg.
inline MetricsReport metrics_from_predictions(const std::vector<int>& predictions,
                                              const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("metrics_from_predictions: size mismatch");
    if (predictions.empty())
        throw std::invalid_argument("metrics_from_predictions: empty evaluation set");
    MetricsReport r;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i], p = predictions[i];
        if (t < 0 || static_cast<std::size_t>(t) >= kClasses || p < 0 ||
            static_cast<std::size_t>(p) >= kClasses)
            throw std::invalid_argument("metrics_from_predictions: label out of range");
        r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]++;
        if (t == p) ++correct;
    }
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        std::size_t row = 0;
        for (std::size_t p = 0; p < kClasses; ++p) row += r.confusion[c][p];
        if (row == 0) {
            r.per_class_acc[c] = std::numeric_limits<double>::quiet_NaN();
            r.per_class_defined[c] = false;
            continue;
        }
        r.per_class_acc[c] =
            100.0 * static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
        r.per_class_defined[c] = true;
        sum += r.per_class_acc[c];
        ++defined;
    }
    r.avg_acc = defined ? sum / static_cast<double>(defined) : 0.0;
    r.overall_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
    return r;
}

template <typename Model>
MetricsReport evaluate(Model& m, const Matrix& x, const std::vector<int>& labels,
                       std::size_t chunk = 1024) {
    if (x.rows != labels.size()) throw std::invalid_argument("evaluate: size mismatch");
    std::vector<int> preds;
    preds.reserve(x.rows);
    for (std::size_t start = 0; start < x.rows; start += chunk) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(x.rows, start + chunk); ++i) idx.push_back(i);
        const auto part = nn::argmax_rows(m.logits_eval(x.row_slice(idx)));
        preds.insert(preds.end(), part.begin(), part.end());
    }
    return metrics_from_predictions(preds, labels);
}

template <typename Model>
MetricsReport evaluate(Model& m, const data::Dataset& ds) {
    return evaluate(m, ds.features, ds.labels);
}

struct Improvement {
    double absolute = 0.0;
    double percent = std::numeric_limits<double>::quiet_NaN();
    bool percent_defined = false;
};

inline Improvement improvement(double baseline_acc, double dann_acc) {
    Improvement r;
    r.absolute = dann_acc - baseline_acc;
    if (baseline_acc > 0.0) {
        r.percent = 100.0 * (dann_acc - baseline_acc) / baseline_acc;
        r.percent_defined = true;
    }
    return r;
}

inline std::string render_confusion(const MetricsReport& r) {
    std::string out = "true\\pred";
    for (std::size_t p = 0; p < kClasses; ++p)
        out += "\t" + data::decode_label(static_cast<int>(p));
    out += "\n";
    for (std::size_t c = 0; c < kClasses; ++c) {
        out += data::decode_label(static_cast<int>(c));
        for (std::size_t p = 0; p < kClasses; ++p)
            out += "\t" + std::to_string(r.confusion[c][p]);
        out += "\n";
    }
    return out;
}

// Two-decimal rendering used by all report tables; values stay unrounded
// everywhere else.
inline std::string fmt2(double v, bool sign = false) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, sign ? "%+.2f" : "%.2f", v);
    return buf;
}

inline void save_metrics(const MetricsReport& r, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("save_metrics: cannot open " + path);
    os << r.to_json().dump(2) << "\n";
}

inline MetricsReport load_metrics(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_metrics: cannot open " + path);
    nlohmann::json j;
    is >> j;
    return MetricsReport::from_json(j);
}

}  // namespace amclab::train
