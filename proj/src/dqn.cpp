#include "goalrl/dqn.hpp"

#include <cmath>
#include <string>

#include "goalrl/error.hpp"
#include "goalrl/mdp.hpp"

namespace goalrl {

void EpsilonSchedule::validate() const {
    if (!(start >= end && end >= 0.0 && start <= 1.0)) {
        throw ValidationError("epsilon schedule requires 1 >= start >= end >= 0");
    }
    if (decay_steps < 0) {
        throw ValidationError("epsilon decay_steps must be nonnegative");
    }
}

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t step) {
    if (step <= 0) {
        return schedule.start;
    }
    if (step >= schedule.decay_steps) {
        return schedule.end;
    }
    const double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
    return schedule.start + frac * (schedule.end - schedule.start);
}

void AgentConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("agent: gamma must lie in [0, 1]");
    }
    if (!(learning_rate > 0.0)) {
        throw ValidationError("agent: learning_rate must be positive");
    }
    if (batch_size < 1 || target_sync_period < 1 || warmup_transitions < 0 || replay_capacity < 1 ||
        train_every < 1) {
        throw ValidationError("agent: batch_size, target_sync_period, replay_capacity, train_every must be positive");
    }
    if (batch_size > replay_capacity) {
        throw ValidationError("agent: batch_size exceeds replay_capacity");
    }
    for (int h : hidden_sizes) {
        if (h < 1) {
            throw ValidationError("agent: hidden layer sizes must be positive");
        }
    }
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) {
        throw DomainError("replay capacity must be positive");
    }
}

void ReplayBuffer::push(Experience e) {
    if (items_.size() < static_cast<std::size_t>(capacity_)) {
        items_.push_back(std::move(e));
        return;
    }
    items_[head_] = std::move(e);
    head_ = (head_ + 1) % items_.size();
}

const Experience& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) {
        throw ShapeError("replay index out of range");
    }
    return items_[(head_ + i) % items_.size()];
}

std::vector<Experience> ReplayBuffer::sample(int batch_size, RngStream& rng) const {
    if (batch_size < 1 || items_.size() < static_cast<std::size_t>(batch_size)) {
        throw NotReadyError("replay holds " + std::to_string(items_.size()) + " transitions, batch needs " +
                            std::to_string(batch_size));
    }
    std::vector<Experience> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        batch.push_back(items_[rng.uniform_index(items_.size())]);
    }
    return batch;
}

int select_action(const QNetwork& net, std::span<const double> state, double epsilon, RngStream& rng) {
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(net.output_dim())));
    }
    const Eigen::VectorXd q = net.forward(state);
    return mdp::argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

LossAndGradient td_loss_gradient(const QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                                 double gamma) {
    if (batch.empty()) {
        throw ShapeError("empty training batch");
    }
    if (net.input_dim() != target.input_dim() || net.output_dim() != target.output_dim()) {
        throw ShapeError("online and target networks differ in shape");
    }
    const auto n = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index dim = net.input_dim();
    Eigen::MatrixXd states(dim, n);
    Eigen::MatrixXd next_states(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Experience& e = batch[j];
        if (e.state.size() != static_cast<std::size_t>(dim) || e.next_state.size() != static_cast<std::size_t>(dim)) {
            throw ShapeError("experience state size does not match network input");
        }
        if (e.action < 0 || e.action >= net.output_dim()) {
            throw ShapeError("experience action out of range");
        }
        states.col(j) = Eigen::Map<const Eigen::VectorXd>(e.state.data(), dim);
        next_states.col(j) = Eigen::Map<const Eigen::VectorXd>(e.next_state.data(), dim);
    }

    const ForwardCache cache = net.forward_batch(states);
    const Eigen::MatrixXd next_q = target.forward_batch(next_states).output;

    Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(net.output_dim(), n);
    double sq = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Experience& e = batch[j];
        const double y = e.done ? e.reward : e.reward + gamma * next_q.col(j).maxCoeff();
        const double err = cache.output(e.action, j) - y;
        sq += err * err;
        output_grad(e.action, j) = err / static_cast<double>(n);
    }
    return {sq / static_cast<double>(n), net.backward(cache, output_grad)};
}

double td_train_batch(QNetwork& net, const QNetwork& target, std::span<const Experience> batch,
                      const AgentConfig& cfg) {
    LossAndGradient lg = td_loss_gradient(net, target, batch, cfg.gamma);
    if (!std::isfinite(lg.loss)) {
        throw DivergenceError("TD loss became non-finite");
    }
    net.apply_gradient(lg.gradient, cfg.learning_rate);
    if (!net.all_finite()) {
        throw DivergenceError("network parameters became non-finite");
    }
    return lg.loss;
}

QNetwork sync_target(const QNetwork& net) {
    return net;
}

namespace {

std::vector<int> layer_sizes(int input_dim, const std::vector<int>& hidden, int n_actions) {
    std::vector<int> sizes{input_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_actions);
    return sizes;
}

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kExploreStream = 1;
constexpr std::uint64_t kReplayStream = 2;

}  // namespace

DqnAgent::DqnAgent(int input_dim, int n_actions, AgentConfig config, std::uint64_t seed, bool use_bias)
    : DqnAgent(QNetwork::random(layer_sizes(input_dim, config.hidden_sizes, n_actions), derive_seed(seed, kInitStream),
                                use_bias),
               config, seed) {}

DqnAgent::DqnAgent(QNetwork network, AgentConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      online_(std::move(network)),
      target_(sync_target(online_)),
      replay_(config_.replay_capacity),
      explore_rng_(seed, kExploreStream),
      replay_rng_(seed, kReplayStream) {
    config_.validate();
}

int DqnAgent::act(std::span<const double> state, double epsilon) {
    return select_action(online_, state, epsilon, explore_rng_);
}

void DqnAgent::set_learning_rate(double learning_rate) {
    if (!(learning_rate > 0.0)) {
        throw DomainError("learning rate must be positive");
    }
    config_.learning_rate = learning_rate;
}

std::optional<double> DqnAgent::observe(Experience e) {
    replay_.push(std::move(e));
    ++transitions_;
    if (transitions_ < config_.warmup_transitions || transitions_ % config_.train_every != 0 ||
        replay_.size() < static_cast<std::size_t>(config_.batch_size)) {
        return std::nullopt;
    }
    const auto batch = replay_.sample(config_.batch_size, replay_rng_);
    const double loss = td_train_batch(online_, target_, batch, config_);
    ++optimizer_steps_;
    if (optimizer_steps_ % config_.target_sync_period == 0) {
        target_ = sync_target(online_);
        ++syncs_;
    }
    return loss;
}

}  // namespace goalrl
