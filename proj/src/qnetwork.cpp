#include "goalrl/qnetwork.hpp"

#include <cmath>
#include <string>

#include "goalrl/error.hpp"
#include "goalrl/rng.hpp"

namespace goalrl {

QNetwork::QNetwork(std::vector<int> layer_sizes, bool use_bias) : sizes_(std::move(layer_sizes)), use_bias_(use_bias) {
    if (sizes_.size() < 2) {
        throw ShapeError("network needs at least an input and an output size");
    }
    for (int n : sizes_) {
        if (n <= 0) {
            throw ShapeError("layer sizes must be positive");
        }
    }
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        DenseLayer layer;
        layer.weight = Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]);
        if (use_bias_) {
            layer.bias = Eigen::VectorXd::Zero(sizes_[l + 1]);
        }
        layers_.push_back(std::move(layer));
    }
}

QNetwork QNetwork::random(std::vector<int> layer_sizes, std::uint64_t seed, bool use_bias) {
    QNetwork net(std::move(layer_sizes), use_bias);
    RngStream rng(seed, 0);
    for (auto& layer : net.layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = bound * (2.0 * rng.uniform() - 1.0);
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = bound * (2.0 * rng.uniform() - 1.0);
        }
    }
    return net;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> state) const {
    if (state.size() != static_cast<std::size_t>(input_dim())) {
        throw ShapeError("state has " + std::to_string(state.size()) + " entries, network expects " +
                         std::to_string(input_dim()));
    }
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::VectorXd z = layers_[l].weight * a;
        if (use_bias_) {
            z += layers_[l].bias;
        }
        a = l + 1 < layers_.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return a;
}

ForwardCache QNetwork::forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_dim()) {
        throw ShapeError("batch rows do not match network input size");
    }
    ForwardCache cache;
    cache.inputs.reserve(layers_.size());
    cache.preactivations.reserve(layers_.size());
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = layers_[l].weight * a;
        if (use_bias_) {
            z.colwise() += layers_[l].bias;
        }
        cache.inputs.push_back(std::move(a));
        a = l + 1 < layers_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
        cache.preactivations.push_back(std::move(z));
    }
    cache.output = std::move(a);
    return cache;
}

std::vector<DenseLayer> QNetwork::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const {
    std::vector<DenseLayer> grads(layers_.size());
    Eigen::MatrixXd delta = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        grads[l].weight = delta * cache.inputs[l].transpose();
        if (use_bias_) {
            grads[l].bias = delta.rowwise().sum();
        }
        if (l > 0) {
            delta = layers_[l].weight.transpose() * delta;
            delta.array() *= (cache.preactivations[l - 1].array() > 0.0).cast<double>();
        }
    }
    return grads;
}

std::vector<double> QNetwork::output_gradient(std::span<const double> state, int index) const {
    if (index < 0 || index >= output_dim()) {
        throw ShapeError("output index out of range");
    }
    const Eigen::MatrixXd x =
        Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    const ForwardCache cache = forward_batch(x);
    Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(output_dim(), 1);
    seed(index, 0) = 1.0;
    return flatten(backward(cache, seed));
}

void QNetwork::apply_gradient(const std::vector<DenseLayer>& grad, double learning_rate) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].weight -= learning_rate * grad[l].weight;
        if (use_bias_) {
            layers_[l].bias -= learning_rate * grad[l].bias;
        }
    }
}

std::size_t QNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    }
    return n;
}

std::vector<double> QNetwork::flatten(const std::vector<DenseLayer>& layers) {
    std::vector<double> out;
    for (const auto& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                out.push_back(layer.weight(r, c));
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            out.push_back(layer.bias(r));
        }
    }
    return out;
}

std::vector<double> QNetwork::parameters() const {
    return flatten(layers_);
}

void QNetwork::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) {
        throw ShapeError("parameter vector has " + std::to_string(values.size()) + " entries, network has " +
                         std::to_string(parameter_count()));
    }
    std::size_t i = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = values[i++];
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = values[i++];
        }
    }
}

std::vector<bool> QNetwork::activation_pattern(std::span<const double> state) const {
    const Eigen::MatrixXd x =
        Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    const ForwardCache cache = forward_batch(x);
    std::vector<bool> pattern;
    for (std::size_t l = 0; l + 1 < cache.preactivations.size(); ++l) {
        for (Eigen::Index r = 0; r < cache.preactivations[l].rows(); ++r) {
            pattern.push_back(cache.preactivations[l](r, 0) > 0.0);
        }
    }
    return pattern;
}

bool QNetwork::all_finite() const {
    for (const auto& layer : layers_) {
        if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
            return false;
        }
    }
    return true;
}

}  // namespace goalrl
