// Dense network layers: linear, batch norm, ReLU, GeLU, dropout, gradient reversal.
//
// Each layer owns its parameters, gradients and the forward cache needed by
// backward. All arithmetic is double precision.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amclab/common.hpp"
#include "amclab/matrix.hpp"

namespace amclab::nn {

enum class Mode { Train, Eval };

// Mutable view of one parameter tensor and its gradient.
struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
};

// Named view of a persistent state tensor (parameters and running statistics).
struct StateRef {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double>* value;
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    // Required input width; 0 means "any".
    virtual std::size_t input_dim() const { return 0; }
    virtual std::size_t output_dim(std::size_t in) const { return in; }

    virtual Matrix forward(const Matrix& x, Mode mode) = 0;
    virtual Matrix backward(const Matrix& upstream) = 0;

    virtual std::vector<ParamRef> params() { return {}; }
    virtual std::vector<StateRef> state() { return {}; }
    virtual nlohmann::json descriptor() const { return {{"kind", kind()}}; }

    void zero_grad() {
        for (auto& p : params())
            std::fill(p.grad->begin(), p.grad->end(), 0.0);
    }

    bool has_cache() const { return has_cache_; }
    void drop_cache() { has_cache_ = false; }

protected:
    void require_cache(const char* who) const {
        if (!has_cache_)
            throw std::logic_error(std::string(who) + ": backward called before forward");
    }
    bool has_cache_ = false;
};

class Linear : public Layer {
public:
    Linear(std::size_t in, std::size_t out, Rng& rng)
        : in_(in), out_(out), weights_(in, out), weight_grad_(in, out),
          bias_(out, 0.0), bias_grad_(out, 0.0) {
        if (in == 0 || out == 0) throw std::invalid_argument("Linear: zero dimension");
        // Kaiming-uniform, fan-in scaling.
        const double bound = std::sqrt(6.0 / static_cast<double>(in));
        for (auto& w : weights_.data) w = rng.uniform(-bound, bound);
    }

    std::string kind() const override { return "linear"; }
    std::size_t input_dim() const override { return in_; }
    std::size_t output_dim(std::size_t) const override { return out_; }

    Matrix forward(const Matrix& x, Mode) override {
        input_ = x;
        has_cache_ = true;
        Matrix y = matmul(x, weights_);
        for (std::size_t i = 0; i < y.rows; ++i)
            for (std::size_t j = 0; j < y.cols; ++j) y(i, j) += bias_[j];
        return y;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("linear");
        Matrix dw = matmul_tn(input_, upstream);
        for (std::size_t k = 0; k < dw.size(); ++k) weight_grad_.data[k] += dw.data[k];
        for (std::size_t i = 0; i < upstream.rows; ++i)
            for (std::size_t j = 0; j < upstream.cols; ++j) bias_grad_[j] += upstream(i, j);
        return matmul_nt(upstream, weights_);
    }

    std::vector<ParamRef> params() override {
        return {{"weights", &weights_.data, &weight_grad_.data},
                {"bias", &bias_, &bias_grad_}};
    }
    std::vector<StateRef> state() override {
        return {{"weights", {in_, out_}, &weights_.data}, {"bias", {out_}, &bias_}};
    }
    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"in", in_}, {"out", out_}};
    }

    Matrix& weights() { return weights_; }
    std::vector<double>& bias() { return bias_; }
    Matrix& weight_grad() { return weight_grad_; }
    std::vector<double>& bias_grad() { return bias_grad_; }

private:
    std::size_t in_, out_;
    Matrix weights_, weight_grad_;
    std::vector<double> bias_, bias_grad_;
    Matrix input_;
};

class BatchNorm : public Layer {
public:
    explicit BatchNorm(std::size_t dim, double eps = 1e-5, double momentum = 0.1)
        : dim_(dim), eps_(eps), momentum_(momentum),
          gamma_(dim, 1.0), beta_(dim, 0.0), gamma_grad_(dim, 0.0), beta_grad_(dim, 0.0),
          running_mean_(dim, 0.0), running_var_(dim, 1.0) {
        if (dim == 0) throw std::invalid_argument("BatchNorm: zero dimension");
        if (eps <= 0) throw std::invalid_argument("BatchNorm: eps must be positive");
        if (momentum <= 0 || momentum >= 1) throw std::invalid_argument("BatchNorm: momentum must be in (0,1)");
    }

    std::string kind() const override { return "batchnorm"; }
    std::size_t input_dim() const override { return dim_; }

    Matrix forward(const Matrix& x, Mode mode) override {
        const std::size_t m = x.rows;
        xhat_ = Matrix(m, dim_);
        invstd_.assign(dim_, 0.0);
        train_cache_ = (mode == Mode::Train);
        if (mode == Mode::Train) {
            if (m < 2)
                throw std::invalid_argument("batchnorm: train mode requires batch size >= 2");
            for (std::size_t j = 0; j < dim_; ++j) {
                double mu = 0.0;
                for (std::size_t i = 0; i < m; ++i) mu += x(i, j);
                mu /= static_cast<double>(m);
                double var = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double c = x(i, j) - mu;
                    var += c * c;
                }
                var /= static_cast<double>(m);
                const double is = 1.0 / std::sqrt(var + eps_);
                invstd_[j] = is;
                for (std::size_t i = 0; i < m; ++i) xhat_(i, j) = (x(i, j) - mu) * is;
                running_mean_[j] = (1.0 - momentum_) * running_mean_[j] + momentum_ * mu;
                running_var_[j] = (1.0 - momentum_) * running_var_[j] + momentum_ * var;
            }
        } else {
            for (std::size_t j = 0; j < dim_; ++j) {
                const double is = 1.0 / std::sqrt(running_var_[j] + eps_);
                invstd_[j] = is;
                for (std::size_t i = 0; i < m; ++i)
                    xhat_(i, j) = (x(i, j) - running_mean_[j]) * is;
            }
        }
        has_cache_ = true;
        Matrix y(m, dim_);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < dim_; ++j) y(i, j) = gamma_[j] * xhat_(i, j) + beta_[j];
        return y;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("batchnorm");
        const std::size_t m = upstream.rows;
        Matrix dx(m, dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            double dgamma = 0.0, dbeta = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                dgamma += upstream(i, j) * xhat_(i, j);
                dbeta += upstream(i, j);
            }
            gamma_grad_[j] += dgamma;
            beta_grad_[j] += dbeta;
            if (train_cache_) {
                // dx = invstd/m * (m*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
                const double md = static_cast<double>(m);
                const double sum_dxhat = gamma_[j] * dbeta;
                const double sum_dxhat_xhat = gamma_[j] * dgamma;
                for (std::size_t i = 0; i < m; ++i) {
                    const double dxhat = upstream(i, j) * gamma_[j];
                    dx(i, j) = invstd_[j] / md *
                               (md * dxhat - sum_dxhat - xhat_(i, j) * sum_dxhat_xhat);
                }
            } else {
                for (std::size_t i = 0; i < m; ++i)
                    dx(i, j) = upstream(i, j) * gamma_[j] * invstd_[j];
            }
        }
        return dx;
    }

    std::vector<ParamRef> params() override {
        return {{"gamma", &gamma_, &gamma_grad_}, {"beta", &beta_, &beta_grad_}};
    }
    std::vector<StateRef> state() override {
        return {{"gamma", {dim_}, &gamma_},
                {"beta", {dim_}, &beta_},
                {"running_mean", {dim_}, &running_mean_},
                {"running_var", {dim_}, &running_var_}};
    }
    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"dim", dim_}, {"eps", eps_}, {"momentum", momentum_}};
    }

    const std::vector<double>& running_mean() const { return running_mean_; }
    const std::vector<double>& running_var() const { return running_var_; }
    std::vector<double>& gamma() { return gamma_; }
    std::vector<double>& beta() { return beta_; }

private:
    std::size_t dim_;
    double eps_, momentum_;
    std::vector<double> gamma_, beta_, gamma_grad_, beta_grad_;
    std::vector<double> running_mean_, running_var_;
    Matrix xhat_;
    std::vector<double> invstd_;
    bool train_cache_ = false;
};

class ReLU : public Layer {
public:
    std::string kind() const override { return "relu"; }

    Matrix forward(const Matrix& x, Mode) override {
        input_ = x;
        has_cache_ = true;
        Matrix y = x;
        for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
        return y;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("relu");
        check_same_shape(upstream, input_, "relu backward");
        Matrix dx = upstream;
        for (std::size_t k = 0; k < dx.size(); ++k)
            if (input_.data[k] <= 0.0) dx.data[k] = 0.0;
        return dx;
    }

private:
    Matrix input_;
};

// Exact GeLU: x * Phi(x) with the Gaussian CDF, not the tanh approximation.
class GeLU : public Layer {
public:
    std::string kind() const override { return "gelu"; }

    static double phi_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
    static double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

    Matrix forward(const Matrix& x, Mode) override {
        input_ = x;
        has_cache_ = true;
        Matrix y = x;
        for (auto& v : y.data) v = v * phi_cdf(v);
        return y;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("gelu");
        check_same_shape(upstream, input_, "gelu backward");
        Matrix dx = upstream;
        for (std::size_t k = 0; k < dx.size(); ++k) {
            const double x = input_.data[k];
            dx.data[k] *= phi_cdf(x) + x * phi_pdf(x);
        }
        return dx;
    }

private:
    Matrix input_;
};

// Inverted dropout: kept activations scaled by 1/(1-rate) so the expected
// output equals the input. Eval mode is the identity.
class Dropout : public Layer {
public:
    explicit Dropout(double rate, std::uint64_t seed)
        : rate_(rate), seed_(seed), rng_(seed) {
        if (rate < 0.0 || rate >= 1.0)
            throw std::invalid_argument("Dropout: rate must be in [0,1)");
    }

    std::string kind() const override { return "dropout"; }

    Matrix forward(const Matrix& x, Mode mode) override {
        train_cache_ = (mode == Mode::Train);
        has_cache_ = true;
        if (!train_cache_) return x;
        const double keep = 1.0 - rate_;
        mask_.assign(x.size(), 0.0);
        Matrix y = x;
        for (std::size_t k = 0; k < y.size(); ++k) {
            if (rng_.uniform() >= rate_) {
                mask_[k] = 1.0 / keep;
                y.data[k] *= mask_[k];
            } else {
                y.data[k] = 0.0;
            }
        }
        return y;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("dropout");
        if (!train_cache_) return upstream;
        if (upstream.size() != mask_.size())
            throw std::invalid_argument("dropout backward: shape mismatch");
        Matrix dx = upstream;
        for (std::size_t k = 0; k < dx.size(); ++k) dx.data[k] *= mask_[k];
        return dx;
    }

    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"rate", rate_}};
    }

    double rate() const { return rate_; }
    std::uint64_t rng_seed() const { return seed_; }

private:
    double rate_;
    std::uint64_t seed_;
    Rng rng_;
    std::vector<double> mask_;
    bool train_cache_ = false;
};

// Identity forward; backward multiplies the upstream gradient by -lambda.
class GradReversal : public Layer {
public:
    explicit GradReversal(double lambda = 0.0) { set_lambda(lambda); }

    std::string kind() const override { return "grl"; }

    void set_lambda(double lambda) {
        if (lambda < 0.0) throw std::invalid_argument("GradReversal: lambda must be >= 0");
        lambda_ = lambda;
    }
    double lambda() const { return lambda_; }

    Matrix forward(const Matrix& x, Mode) override {
        has_cache_ = true;
        return x;
    }

    Matrix backward(const Matrix& upstream) override {
        require_cache("grl");
        Matrix dx = upstream;
        for (auto& v : dx.data) v = -(lambda_ * v);
        return dx;
    }

    nlohmann::json descriptor() const override { return {{"kind", kind()}}; }

private:
    double lambda_ = 0.0;
};

}  // namespace amclab::nn
