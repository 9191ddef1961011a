// LayerStack: an ordered list of layers with forward/backward plumbing.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amclab/nn/layers.hpp"

namespace amclab::nn {

class LayerStack {
public:
    explicit LayerStack(std::size_t input_dim) : input_dim_(input_dim) {
        if (input_dim == 0) throw std::invalid_argument("LayerStack: input_dim must be >= 1");
    }

    LayerStack(LayerStack&&) = default;
    LayerStack& operator=(LayerStack&&) = default;

    LayerStack& add(std::unique_ptr<Layer> layer) {
        layers_.push_back(std::move(layer));
        return *this;
    }

    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const {
        std::size_t d = input_dim_;
        for (const auto& l : layers_) d = l->output_dim(d);
        return d;
    }

    Matrix forward(const Matrix& x, Mode mode) { return forward_prefix(x, layers_.size(), mode); }

    // Runs the first n layers only; used to read intermediate activations.
    Matrix forward_prefix(const Matrix& x, std::size_t n, Mode mode) {
        if (n > layers_.size()) throw std::out_of_range("forward_prefix: prefix too long");
        if (x.cols != input_dim_)
            throw std::invalid_argument("forward: input width " + std::to_string(x.cols) +
                                        " does not match stack input dim " +
                                        std::to_string(input_dim_));
        Matrix h = x;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t want = layers_[i]->input_dim();
            if (want != 0 && want != h.cols)
                throw std::invalid_argument("forward: layer " + layer_label(i) + " expects width " +
                                            std::to_string(want) + ", got " + std::to_string(h.cols));
            h = layers_[i]->forward(h, mode);
            if (!h.all_finite())
                throw std::runtime_error("forward: non-finite output from layer " + layer_label(i));
        }
        cache_depth_ = n;
        return h;
    }

    // Backpropagates through every layer; accumulates parameter gradients and
    // returns the gradient with respect to the stack input.
    Matrix backward(const Matrix& upstream) {
        if (cache_depth_ != layers_.size())
            throw std::logic_error("backward: no matching forward pass cached");
        Matrix g = upstream;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            g = layers_[i]->backward(g);
            if (!g.all_finite())
                throw std::runtime_error("backward: non-finite gradient from layer " + layer_label(i));
        }
        grads_ready_ = true;
        return g;
    }

    void zero_grad() {
        for (auto& l : layers_) l->zero_grad();
        grads_ready_ = false;
    }

    bool grads_ready() const { return grads_ready_; }
    void mark_grads_consumed() { grads_ready_ = false; }

    std::vector<ParamRef> params() {
        std::vector<ParamRef> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            for (auto p : layers_[i]->params()) {
                p.name = layer_label(i) + "." + p.name;
                out.push_back(p);
            }
        return out;
    }

    std::vector<StateRef> state() {
        std::vector<StateRef> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            for (auto s : layers_[i]->state()) {
                s.name = layer_label(i) + "." + s.name;
                out.push_back(s);
            }
        return out;
    }

    nlohmann::json descriptor() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& l : layers_) j.push_back(l->descriptor());
        return {{"input_dim", input_dim_}, {"layers", j}};
    }

    // Deep copy of all persistent tensors (parameters + running statistics).
    std::vector<std::vector<double>> snapshot() {
        std::vector<std::vector<double>> out;
        for (auto& s : state()) out.push_back(*s.value);
        return out;
    }

    void restore(const std::vector<std::vector<double>>& snap) {
        auto refs = state();
        if (snap.size() != refs.size())
            throw std::invalid_argument("restore: snapshot does not match stack layout");
        for (std::size_t i = 0; i < refs.size(); ++i) {
            if (snap[i].size() != refs[i].value->size())
                throw std::invalid_argument("restore: tensor size mismatch at " + refs[i].name);
            *refs[i].value = snap[i];
        }
    }

    std::string layer_label(std::size_t i) const {
        return layers_[i]->kind() + "[" + std::to_string(i) + "]";
    }

private:
    std::size_t input_dim_;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::size_t cache_depth_ = 0;
    bool grads_ready_ = false;
};

}  // namespace amclab::nn
