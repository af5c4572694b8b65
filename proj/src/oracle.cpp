#include "goalrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "goalrl/error.hpp"

namespace goalrl {

TabularEnv::TabularEnv(const mdp::TabularMDP& mdp, int max_steps) : mdp_(mdp), max_steps_(max_steps) {
    for (int s = 0; s < mdp.n_states; ++s) {
        if (!mdp.terminal[s]) {
            starts_.push_back(s);
        }
    }
    if (starts_.empty()) {
        throw DomainError("tabular environment needs at least one nonterminal state");
    }
}

std::vector<double> TabularEnv::one_hot(int s) const {
    std::vector<double> x(static_cast<std::size_t>(mdp_.n_states), 0.0);
    x[s] = 1.0;
    return x;
}

std::vector<double> TabularEnv::reset(RngStream& rng) {
    state_ = starts_[rng.uniform_index(starts_.size())];
    steps_ = 0;
    return one_hot(state_);
}

std::tuple<std::vector<double>, double, bool> TabularEnv::step(int action, RngStream& rng) {
    const double reward = mdp_.r(state_, action);
    const auto row = mdp_.row(state_, action);
    double u = rng.uniform();
    int next = mdp_.n_states - 1;
    for (int t = 0; t < mdp_.n_states; ++t) {
        u -= row[t];
        if (u < 0.0) {
            next = t;
            break;
        }
    }
    // Guard against rounding in the cumulative sum landing on a zero-probability state.
    while (row[next] == 0.0 && next > 0) {
        --next;
    }
    state_ = next;
    ++steps_;
    const bool done = mdp_.terminal[state_] || steps_ >= max_steps_;
    return {one_hot(state_), reward, mdp_.terminal[state_] ? true : done};
}

QNetwork train_tabular_dqn(const mdp::TabularMDP& mdp, const TabularDqnOptions& options) {
    mdp.validate();
    AgentConfig agent_config = options.agent;
    agent_config.gamma = options.gamma;
    const bool linear = agent_config.hidden_sizes.empty();
    DqnAgent agent(mdp.n_states, mdp.n_actions, agent_config, options.seed, !linear);
    TabularEnv env(mdp, options.max_episode_steps);
    RngStream env_rng(options.seed, 7);
    std::int64_t step = 0;
    const bool decay = options.final_learning_rate > 0.0 && options.episodes > 1;
    for (int ep = 0; ep < options.episodes; ++ep) {
        if (decay) {
            const double frac = static_cast<double>(ep) / (options.episodes - 1);
            agent.set_learning_rate(agent_config.learning_rate *
                                    std::pow(options.final_learning_rate / agent_config.learning_rate, frac));
        }
        std::vector<double> s = env.reset(env_rng);
        bool done = false;
        while (!done) {
            const int a = agent.act(s, epsilon_at(options.schedule, step));
            auto [next, r, finished] = env.step(a, env_rng);
            done = finished;
            // Time-limit truncation still bootstraps; only true terminals stop it.
            agent.observe({s, a, r, next, mdp.terminal[env.state()]});
            s = std::move(next);
            ++step;
        }
    }
    return agent.network();
}

double policy_agreement(const mdp::TabularMDP& mdp, const mdp::ValueTable& optimal, const QNetwork& net,
                        double tie_tolerance) {
    if (net.input_dim() != mdp.n_states || net.output_dim() != mdp.n_actions) {
        throw ShapeError("network does not match the tabular MDP");
    }
    int agree = 0;
    int total = 0;
    std::vector<double> x(static_cast<std::size_t>(mdp.n_states), 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.terminal[s]) {
            continue;
        }
        x.assign(x.size(), 0.0);
        x[s] = 1.0;
        const Eigen::VectorXd q = net.forward(x);
        const int a = mdp::argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
        const double v = optimal.v[s];
        if (optimal.Q(s, a) >= v - tie_tolerance * (1.0 + std::abs(v))) {
            ++agree;
        }
        ++total;
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / total;
}

void OracleConfig::validate() const {
    if (wealth_levels < 2 || wealth_levels > 50) {
        throw ValidationError("oracle: wealth_levels must lie in [2, 50]");
    }
    if (horizon < 1 || horizon > 10) {
        throw ValidationError("oracle: horizon must lie in [1, 10]");
    }
    if (actions < 2 || actions > kNumActions) {
        throw ValidationError("oracle: actions must lie in [2, 21]");
    }
    if (!(saving_cost >= 0.0)) {
        throw ValidationError("oracle: saving_cost must be nonnegative");
    }
    if (!(goal_level_fraction > 0.0 && goal_level_fraction <= 1.0)) {
        throw ValidationError("oracle: goal_level_fraction must lie in (0, 1]");
    }
    if (dqn.episodes < 1 || dqn.max_episode_steps < 1) {
        throw ValidationError("oracle: episodes and max_episode_steps must be positive");
    }
    dqn.schedule.validate();
    dqn.agent.validate();
}

PlanningToy build_planning_toy(const EnvConfig& env, const OracleConfig& config) {
    config.validate();
    env.validate();
    if (env.goals.pre_retirement.empty()) {
        throw ValidationError("oracle: the profile needs a pre-retirement goal");
    }
    const Goal& goal = env.goals.pre_retirement.front();

    PlanningToy toy;
    toy.horizon = std::min(config.horizon, goal.target_year_index);
    toy.levels = config.wealth_levels;
    toy.actions = config.actions;
    toy.goal_level = std::max(1, static_cast<int>(std::lround(config.goal_level_fraction * (toy.levels - 1))));
    toy.wealth_unit = goal.target_amount / toy.goal_level;
    toy.mdp = mdp::TabularMDP(toy.horizon * toy.levels + 1, toy.actions);

    // Three-point Gauss-Hermite rule for the taxable bucket's log return.
    const double mu = env.market.log_mean[0];
    const double sigma = env.market.log_vol[0];
    const std::array<double, 3> growth{std::exp(mu - std::sqrt(3.0) * sigma), std::exp(mu),
                                       std::exp(mu + std::sqrt(3.0) * sigma)};
    const std::array<double, 3> weight{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};

    const auto& reward = env.reward;
    auto final_reward = [&](int level) {
        if (level >= toy.goal_level) {
            return reward.rho;
        }
        const double shortfall = (goal.target_amount - level * toy.wealth_unit) / goal.target_amount;
        return -reward.rho_prime * shortfall;
    };

    const int terminal = toy.terminal_state();
    const int top = toy.levels - 1;
    for (int t = 0; t < toy.horizon; ++t) {
        const double c_max = max_contribution(env.profile, t);
        const bool last = t + 1 == toy.horizon;
        for (int w = 0; w < toy.levels; ++w) {
            const int s = toy.state_index(t, w);
            for (int a = 0; a < toy.actions; ++a) {
                const double frac = static_cast<double>(a) / (toy.actions - 1);
                const double contribution = frac * c_max;
                double r = -config.saving_cost * frac;
                for (std::size_t k = 0; k < growth.size(); ++k) {
                    const double x =
                        std::clamp((w * toy.wealth_unit + contribution) * growth[k] / toy.wealth_unit, 0.0,
                                   static_cast<double>(top));
                    const int lo = static_cast<int>(std::floor(x));
                    const int hi = std::min(lo + 1, top);
                    const double p_hi = x - lo;
                    const std::array<std::pair<int, double>, 2> split{{{lo, weight[k] * (1.0 - p_hi)},
                                                                       {hi, weight[k] * p_hi}}};
                    for (const auto& [level, p] : split) {
                        if (p == 0.0) {
                            continue;
                        }
                        if (last) {
                            toy.mdp.p(s, a, terminal) += p;
                            r += p * final_reward(level);
                        } else {
                            toy.mdp.p(s, a, toy.state_index(t + 1, level)) += p;
                        }
                    }
                }
                toy.mdp.r(s, a) = r;
            }
        }
    }
    toy.mdp.make_terminal(terminal);
    toy.mdp.validate();
    return toy;
}

OracleReport run_oracle(const EnvConfig& env, const OracleConfig& config) {
    const PlanningToy toy = build_planning_toy(env, config);
    const auto solution = mdp::value_iteration(toy.mdp, config.dqn.gamma);
    const QNetwork net = train_tabular_dqn(toy.mdp, config.dqn);
    OracleReport report;
    report.n_states = toy.mdp.n_states;
    report.nonterminal_states = toy.mdp.n_states - 1;
    report.value_iterations = solution.iterations;
    report.agreement = policy_agreement(toy.mdp, solution.values, net);
    return report;
}

}  // namespace goalrl
