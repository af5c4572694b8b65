#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "goalrl/qnetwork.hpp"
#include "goalrl/rng.hpp"

namespace goalrl {

/// Linear decay from start to end over decay_steps, then flat.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.01;
    std::int64_t decay_steps = 100000;

    void validate() const;
    bool operator==(const EpsilonSchedule&) const = default;
};

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t step);

struct AgentConfig {
    double gamma = 0.95;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int target_sync_period = 500;
    int warmup_transitions = 1000;
    int replay_capacity = 50000;
    /// Environment steps between gradient updates once warm.
    int train_every = 1;
    std::vector<int> hidden_sizes{64, 64};

    void validate() const;
    bool operator==(const AgentConfig&) const = default;
};

struct Experience {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);

    void push(Experience e);
    std::size_t size() const { return items_.size(); }
    int capacity() const { return capacity_; }
    /// i-th oldest item currently stored.
    const Experience& at(std::size_t i) const;

    /// Uniform with replacement. Throws NotReadyError when size() < batch_size.
    std::vector<Experience> sample(int batch_size, RngStream& rng) const;

private:
    int capacity_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::vector<Experience> items_;
};

int select_action(const QNetwork& net, std::span<const double> state, double epsilon, RngStream& rng);

struct LossAndGradient {
    double loss = 0.0;  // mean squared TD error
    std::vector<DenseLayer> gradient;
};

/// Gradient of 0.5 * mean((Q(s,a) - y)^2) with y = r + gamma max_a' Q_target(s', a')
/// (y = r on terminal transitions). The 1/2 makes a single-sample step of
/// size alpha equal to the tabular Q-learning update.
LossAndGradient td_loss_gradient(const QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                                 double gamma);

/// One SGD step on the TD regression; returns the pre-update mean squared TD error.
double td_train_batch(QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                      const AgentConfig& cfg);

QNetwork sync_target(const QNetwork& net);

/// Online network, target network and replay memory bundled with the
/// update schedule (warmup, train_every, periodic target sync).
class DqnAgent {
public:
    DqnAgent(int input_dim, int n_actions, AgentConfig config, std::uint64_t seed, bool use_bias = true);
    DqnAgent(QNetwork network, AgentConfig config, std::uint64_t seed);

    int act(std::span<const double> state, double epsilon);

    /// Stores the transition and trains when due. Returns the loss if an update ran.
    std::optional<double> observe(Experience e);

    void set_learning_rate(double learning_rate);

    const QNetwork& network() const { return online_; }
    const QNetwork& target() const { return target_; }
    const AgentConfig& config() const { return config_; }
    const ReplayBuffer& replay() const { return replay_; }
    std::int64_t transitions_seen() const { return transitions_; }
    std::int64_t optimizer_steps() const { return optimizer_steps_; }
    std::int64_t target_syncs() const { return syncs_; }

private:
    AgentConfig config_;
    QNetwork online_;
    QNetwork target_;
    ReplayBuffer replay_;
    RngStream explore_rng_;
    RngStream replay_rng_;
    std::int64_t transitions_ = 0;
    std::int64_t optimizer_steps_ = 0;
    std::int64_t syncs_ = 0;
};

}  // namespace goalrl
