#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace goalrl {

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out; empty when the network has no biases
};

/// Activations recorded by a batched forward pass, one column per sample.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;       // input to layer l
    std::vector<Eigen::MatrixXd> preactivations;
    Eigen::MatrixXd output;
};

/// Fully connected Q-network: rectifier on hidden layers, identity output.
///
/// Parameters flatten layer by layer as the row-major weight matrix
/// followed by the bias vector. A network built from two sizes only
/// ({inputs, outputs}) is linear; with biases disabled and one-hot inputs it
/// is exactly a Q table.
class QNetwork {
public:
    QNetwork() = default;

    /// All parameters zero.
    explicit QNetwork(std::vector<int> layer_sizes, bool use_bias = true);

    /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static QNetwork random(std::vector<int> layer_sizes, std::uint64_t seed, bool use_bias = true);

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    bool has_bias() const { return use_bias_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    Eigen::VectorXd forward(std::span<const double> state) const;
    ForwardCache forward_batch(const Eigen::MatrixXd& inputs) const;

    /// Parameter gradients for a batch given dLoss/dOutput (same shape as cache.output).
    std::vector<DenseLayer> backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

    /// Gradient of output `index` with respect to every parameter, flattened.
    std::vector<double> output_gradient(std::span<const double> state, int index) const;

    /// theta <- theta - learning_rate * grad
    void apply_gradient(const std::vector<DenseLayer>& grad, double learning_rate);

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);
    static std::vector<double> flatten(const std::vector<DenseLayer>& layers);

    /// Sign pattern of every hidden pre-activation for one input; used to
    /// detect rectifier kinks in finite-difference checks.
    std::vector<bool> activation_pattern(std::span<const double> state) const;

    bool all_finite() const;

private:
    std::vector<int> sizes_;
    bool use_bias_ = true;
    std::vector<DenseLayer> layers_;
};

}  // namespace goalrl
