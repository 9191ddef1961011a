// Per-feature standardization fitted on the source domain only.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/data/dataset.hpp"
#include "amclab/matrix.hpp"

namespace amclab::data {

class StandardScaler {
public:
    explicit StandardScaler(double std_floor = 1e-12) : std_floor_(std_floor) {}

    // Population (1/n) statistics. Fitting twice is rejected.
    void fit(const Matrix& x, const std::string& domain_tag) {
        if (fitted_) throw std::logic_error("StandardScaler: already fitted (on " + fitted_on_ + ")");
        if (x.rows == 0) throw std::invalid_argument("StandardScaler: empty fit matrix");
        means_.assign(x.cols, 0.0);
        stds_.assign(x.cols, 0.0);
        for (std::size_t j = 0; j < x.cols; ++j) {
            double mu = 0.0;
            for (std::size_t i = 0; i < x.rows; ++i) mu += x(i, j);
            mu /= static_cast<double>(x.rows);
            double var = 0.0;
            for (std::size_t i = 0; i < x.rows; ++i) {
                const double c = x(i, j) - mu;
                var += c * c;
            }
            var /= static_cast<double>(x.rows);
            means_[j] = mu;
            stds_[j] = std::sqrt(var);
        }
        fitted_on_ = domain_tag;
        fitted_ = true;
    }

    void fit(const Dataset& source) { fit(source.features, source.domain); }

    Matrix transform(const Matrix& x) const {
        require_fitted();
        if (x.cols != means_.size())
            throw std::invalid_argument("StandardScaler: width mismatch (" + std::to_string(x.cols) +
                                        " vs fitted " + std::to_string(means_.size()) + ")");
        Matrix out = x;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double inv = 1.0 / std::max(stds_[j], std_floor_);
            for (std::size_t i = 0; i < x.rows; ++i)
                out(i, j) = (x(i, j) - means_[j]) * inv;
        }
        return out;
    }

    Dataset transform(const Dataset& ds) const {
        Dataset out = ds;
        out.features = transform(ds.features);
        return out;
    }

    Matrix inverse_transform(const Matrix& x) const {
        require_fitted();
        if (x.cols != means_.size())
            throw std::invalid_argument("StandardScaler: width mismatch in inverse_transform");
        Matrix out = x;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double s = std::max(stds_[j], std_floor_);
            for (std::size_t i = 0; i < x.rows; ++i) out(i, j) = x(i, j) * s + means_[j];
        }
        return out;
    }

    bool fitted() const { return fitted_; }
    const std::string& fitted_on() const { return fitted_on_; }
    const std::vector<double>& means() const { require_fitted(); return means_; }
    const std::vector<double>& stds() const { require_fitted(); return stds_; }
    double std_floor() const { return std_floor_; }

private:
    void require_fitted() const {
        if (!fitted_) throw std::logic_error("StandardScaler: not fitted");
    }

    double std_floor_;
    std::vector<double> means_, stds_;
    std::string fitted_on_;
    bool fitted_ = false;
};

}  // namespace amclab::data
