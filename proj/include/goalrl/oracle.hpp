#pragma once

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "goalrl/dqn.hpp"
#include "goalrl/goal_env.hpp"
#include "goalrl/mdp.hpp"

namespace goalrl {

/// Simulator over a known TabularMDP with one-hot observations. Episodes
/// start in a uniformly drawn nonterminal state and
/// emit the expected reward R(s, a).
class TabularEnv {
public:
    TabularEnv(const mdp::TabularMDP& mdp, int max_steps);

    std::vector<double> reset(RngStream& rng);
    /// Returns (next observation, reward, done).
    std::tuple<std::vector<double>, double, bool> step(int action, RngStream& rng);

    std::vector<double> one_hot(int s) const;
    int state() const { return state_; }

private:
    const mdp::TabularMDP& mdp_;
    std::vector<int> starts_;
    int max_steps_;
    int state_ = 0;
    int steps_ = 0;
};

struct TabularDqnOptions {
    /// Short episodes from uniform starts spread updates evenly over states.
    int episodes = 300000;
    int max_episode_steps = 1;
    double gamma = 0.9;
    EpsilonSchedule schedule{1.0, 1.0, 0};
    AgentConfig agent{0.9, 0.3, 32, 250, 500, 10000, 1, {}};
    /// Learning rate reached at the last episode, decayed geometrically
    /// from agent.learning_rate. Zero keeps the rate constant.
    double final_learning_rate = 0.003;
    std::uint64_t seed = 0;

    bool operator==(const TabularDqnOptions&) const = default;
};

/// DQN on a tabular MDP through TabularEnv. With no hidden layers the
/// network is linear and bias-free, so it is a Q table trained with replay
/// and a target network.
QNetwork train_tabular_dqn(const mdp::TabularMDP& mdp, const TabularDqnOptions& options);

/// Fraction of nonterminal states where the network's greedy action is
/// optimal: Q*(s, a) within tie_tolerance of V*(s). Exact ties in Q* make
/// several actions optimal; any of them counts as agreement.
double policy_agreement(const mdp::TabularMDP& mdp, const mdp::ValueTable& optimal, const QNetwork& net,
                        double tie_tolerance = 1e-9);

/// Discretized single-goal version of the planning problem.
struct OracleConfig {
    int wealth_levels = 40;
    int horizon = 10;
    int actions = 3;
    /// Utility cost of contributing the full C_max for one year.
    double saving_cost = 3.0;
    /// Position of the goal amount on the wealth grid, as a fraction of the top level.
    double goal_level_fraction = 0.6;
    TabularDqnOptions dqn;

    void validate() const;
    bool operator==(const OracleConfig&) const = default;
};

struct PlanningToy {
    mdp::TabularMDP mdp;
    int horizon = 0;
    int levels = 0;
    int actions = 0;
    int goal_level = 0;
    double wealth_unit = 0.0;

    int state_index(int year, int level) const { return year * levels + level; }
    int terminal_state() const { return horizon * levels; }
};

/// States are (year, wealth level) plus one absorbing terminal state.
/// Each year a fraction k/(actions-1) of C_max is contributed, wealth grows
/// by a three-point lognormal quadrature of the market model, and the
/// result is split between the two neighbouring grid levels. Saving costs
/// saving_cost per full C_max; the final year pays rho when wealth reaches
/// the goal and rho_prime times the relative shortfall otherwise.
PlanningToy build_planning_toy(const EnvConfig& env, const OracleConfig& config);

struct OracleReport {
    int n_states = 0;
    int nonterminal_states = 0;
    int value_iterations = 0;
    double agreement = 0.0;
};

OracleReport run_oracle(const EnvConfig& env, const OracleConfig& config);

}  // namespace goalrl
