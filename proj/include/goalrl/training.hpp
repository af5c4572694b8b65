#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goalrl/dqn.hpp"
#include "goalrl/goal_env.hpp"

namespace goalrl {

struct TrainingConfig {
    EnvConfig env;
    AgentConfig agent;
    EpsilonSchedule schedule;
    int n_episodes = 6000;
    std::uint64_t seed = 0;
    int moving_average_window = 100;

    void validate() const;
    bool operator==(const TrainingConfig&) const = default;
};

struct EpisodeMetrics {
    int episode = 0;
    int steps = 0;
    /// Undiscounted sum of step rewards.
    double accumulated_reward = 0.0;
    double epsilon = 0.0;
    /// One entry per goal column: pre-retirement goals in year order, then retirement.
    std::vector<std::optional<double>> goal_success;
};

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    QNetwork network;
    AgentConfig agent;
    std::int64_t step = 0;
    int format_version = kCheckpointFormatVersion;
};

struct TrainingResult {
    Checkpoint checkpoint;
    std::vector<EpisodeMetrics> metrics;
};

struct EvaluationReport {
    double mean_accumulated_reward = 0.0;
    /// Mean observed success probability per goal column.
    std::vector<double> mean_success;
    std::vector<double> episode_rewards;
    std::vector<std::vector<double>> episode_success;
    /// Contribution per year (currency) for every evaluation episode.
    std::vector<std::vector<double>> schedules;
    /// True when every episode produced the same contribution schedule.
    bool schedule_is_deterministic = false;
};

/// Column labels for the per-goal success entries of EpisodeMetrics.
std::vector<std::string> goal_column_names(const GoalSet& goals);

int goal_column(const GoalSet& goals, int slot);

/// Plays one episode from reset to done, acting epsilon-greedily on
/// epsilon_at(global_step), storing every transition and training when due.
EpisodeMetrics run_episode(GoalEnv& env, DqnAgent& agent, const EpsilonSchedule& schedule, std::int64_t& global_step,
                           std::uint64_t episode_seed, int episode_index);

using ProgressCallback = std::function<void(const EpisodeMetrics&)>;

/// Sequential training loop; fully determined by config (including seed).
TrainingResult train(const TrainingConfig& config, const ProgressCallback& progress = {});

/// Greedy rollouts of a checkpoint. Episodes use derived seeds and may run on
/// several threads without changing the report.
EvaluationReport evaluate_policy(const Checkpoint& checkpoint, const EnvConfig& env, int n_episodes,
                                 std::uint64_t seed, int threads = 1);

/// Element i is the mean of the last min(i + 1, window) values.
std::vector<double> moving_average(std::span<const double> series, int window);

/// Seeds derived from a master seed.
std::uint64_t episode_seed(std::uint64_t master_seed, int episode);
std::uint64_t agent_seed(std::uint64_t master_seed);

}  // namespace goalrl
