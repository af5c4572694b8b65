#include "goalrl/training.hpp"

#include <algorithm>
#include <thread>

#include "goalrl/error.hpp"

namespace goalrl {

namespace {

constexpr std::uint64_t kEpisodeStreamBase = 0x1000;
constexpr std::uint64_t kAgentStream = 1;

std::vector<double> to_vector(const EnvState& s) {
    return {s.begin(), s.end()};
}

std::size_t n_goal_columns(const GoalSet& goals) {
    return goals.pre_retirement.size() + 1;
}

struct Rollout {
    double reward = 0.0;
    std::vector<std::optional<double>> success;
    std::vector<double> contributions;
};

Rollout greedy_rollout(GoalEnv& env, const QNetwork& net, std::uint64_t seed) {
    const GoalSet& goals = env.config().goals;
    Rollout out;
    out.success.assign(n_goal_columns(goals), std::nullopt);
    RngStream unused(seed, 0);
    EnvState s = env.reset(seed);
    while (!env.done()) {
        const int action = select_action(net, s, 0.0, unused);
        StepResult r = env.step(action);
        out.reward += r.reward;
        for (const auto& obs : r.info) {
            out.success[static_cast<std::size_t>(goal_column(goals, obs.slot))] = obs.success_probability;
        }
        s = r.next_state;
    }
    out.contributions = env.contributions();
    return out;
}

}  // namespace

void TrainingConfig::validate() const {
    env.validate();
    agent.validate();
    schedule.validate();
    if (n_episodes < 1) {
        throw ValidationError("training: episodes must be at least 1");
    }
    if (moving_average_window < 1) {
        throw ValidationError("training: moving_average_window must be at least 1");
    }
}

std::vector<std::string> goal_column_names(const GoalSet& goals) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < goals.pre_retirement.size(); ++k) {
        const auto& name = goals.pre_retirement[k].name;
        names.push_back(name.empty() ? "goal" + std::to_string(k + 1) : name);
    }
    names.emplace_back("retirement");
    return names;
}

int goal_column(const GoalSet& goals, int slot) {
    return slot == kRetirementSlot ? static_cast<int>(goals.pre_retirement.size()) : slot;
}

std::uint64_t episode_seed(std::uint64_t master_seed, int episode) {
    return derive_seed(master_seed, kEpisodeStreamBase + static_cast<std::uint64_t>(episode));
}

std::uint64_t agent_seed(std::uint64_t master_seed) {
    return derive_seed(master_seed, kAgentStream);
}

EpisodeMetrics run_episode(GoalEnv& env, DqnAgent& agent, const EpsilonSchedule& schedule, std::int64_t& global_step,
                           std::uint64_t seed, int episode_index) {
    const GoalSet& goals = env.config().goals;
    EpisodeMetrics m;
    m.episode = episode_index;
    m.goal_success.assign(n_goal_columns(goals), std::nullopt);

    std::vector<double> state = to_vector(env.reset(seed));
    while (!env.done()) {
        const double eps = epsilon_at(schedule, global_step);
        const int action = agent.act(state, eps);
        StepResult r = env.step(action);
        std::vector<double> next = to_vector(r.next_state);
        m.accumulated_reward += r.reward;
        for (const auto& obs : r.info) {
            m.goal_success[static_cast<std::size_t>(goal_column(goals, obs.slot))] = obs.success_probability;
        }
        agent.observe({state, action, r.reward, next, r.done});
        state = std::move(next);
        ++global_step;
        ++m.steps;
    }
    m.epsilon = epsilon_at(schedule, global_step);
    return m;
}

TrainingResult train(const TrainingConfig& config, const ProgressCallback& progress) {
    config.validate();
    GoalEnv env(config.env);
    DqnAgent agent(kStateDim, kNumActions, config.agent, agent_seed(config.seed));

    TrainingResult result;
    result.metrics.reserve(static_cast<std::size_t>(config.n_episodes));
    std::int64_t global_step = 0;
    for (int ep = 0; ep < config.n_episodes; ++ep) {
        try {
            result.metrics.push_back(run_episode(env, agent, config.schedule, global_step,
                                                 episode_seed(config.seed, ep), ep));
        } catch (const DivergenceError& e) {
            throw DivergenceError("training diverged in episode " + std::to_string(ep) + " at step " +
                                  std::to_string(global_step) + ": " + e.what());
        }
        if (progress) {
            progress(result.metrics.back());
        }
    }
    result.checkpoint = Checkpoint{agent.network(), config.agent, global_step, kCheckpointFormatVersion};
    return result;
}

EvaluationReport evaluate_policy(const Checkpoint& checkpoint, const EnvConfig& env_config, int n_episodes,
                                 std::uint64_t seed, int threads) {
    if (checkpoint.network.input_dim() != kStateDim || checkpoint.network.output_dim() != kNumActions) {
        throw CompatibilityError("checkpoint network maps " + std::to_string(checkpoint.network.input_dim()) + " -> " +
                                 std::to_string(checkpoint.network.output_dim()) + ", environment needs " +
                                 std::to_string(kStateDim) + " -> " + std::to_string(kNumActions));
    }
    if (n_episodes < 1) {
        throw DomainError("evaluation needs at least one episode");
    }
    env_config.validate();

    std::vector<Rollout> rollouts(static_cast<std::size_t>(n_episodes));
    const int workers = std::clamp(threads, 1, n_episodes);
    auto worker = [&](int w) {
        GoalEnv env(env_config);
        for (int ep = w; ep < n_episodes; ep += workers) {
            rollouts[ep] = greedy_rollout(env, checkpoint.network, episode_seed(seed, ep));
        }
    };
    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker, w);
        }
    }

    EvaluationReport report;
    const std::size_t cols = n_goal_columns(env_config.goals);
    report.mean_success.assign(cols, 0.0);
    report.schedule_is_deterministic = true;
    for (const auto& r : rollouts) {
        report.episode_rewards.push_back(r.reward);
        report.mean_accumulated_reward += r.reward / n_episodes;
        std::vector<double> success(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            success[c] = r.success[c].value_or(0.0);
            report.mean_success[c] += success[c] / n_episodes;
        }
        report.episode_success.push_back(std::move(success));
        report.schedules.push_back(r.contributions);
        if (r.contributions != rollouts.front().contributions) {
            report.schedule_is_deterministic = false;
        }
    }
    return report;
}

std::vector<double> moving_average(std::span<const double> series, int window) {
    if (window < 1) {
        throw DomainError("moving average window must be at least 1");
    }
    std::vector<double> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t first = i + 1 > static_cast<std::size_t>(window) ? i + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) {
            sum += series[j];
        }
        out.push_back(sum / static_cast<double>(i + 1 - first));
    }
    return out;
}

}  // namespace goalrl
