#pragma once

#include <span>
#include <vector>

namespace goalrl::mdp {

/// Finite MDP with state-action rewards.
///
/// transition is stored dense as [s][a][s'] in row-major order, reward as
/// [s][a]. Terminal states must self-transition with probability 1 and
/// reward 0; they absorb and contribute nothing to any return.
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;
    std::vector<double> reward;
    std::vector<bool> terminal;

    TabularMDP() = default;
    TabularMDP(int states, int actions);

    double& p(int s, int a, int next) { return transition[index(s, a) * n_states + next]; }
    double p(int s, int a, int next) const { return transition[index(s, a) * n_states + next]; }
    double& r(int s, int a) { return reward[index(s, a)]; }
    double r(int s, int a) const { return reward[index(s, a)]; }

    std::span<const double> row(int s, int a) const {
        return {transition.data() + index(s, a) * n_states, static_cast<std::size_t>(n_states)};
    }

    /// Throws ShapeError / DomainError when an invariant is violated.
    void validate() const;

    /// Makes s absorbing: self-loop under every action with zero reward.
    void make_terminal(int s);

private:
    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * n_actions + static_cast<std::size_t>(a);
    }
};

/// pi(a|s) stored as [s][a].
struct TabularPolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs;

    TabularPolicy() = default;
    TabularPolicy(int states, int actions);

    double& operator()(int s, int a) { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
    double operator()(int s, int a) const { return probs[static_cast<std::size_t>(s) * n_actions + a]; }

    static TabularPolicy deterministic(std::span<const int> actions, int n_actions);

    /// Index of the action with largest probability, lowest index on ties.
    int action(int s) const;

    void validate() const;
};

struct ValueTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> v;
    std::vector<double> q;  // [s][a]

    double Q(int s, int a) const { return q[static_cast<std::size_t>(s) * n_actions + a]; }
};

struct InducedDynamics {
    std::vector<double> transition;  // [s][s']
    std::vector<double> reward;      // [s]
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iterations = 100000;
};

struct OptimalSolution {
    ValueTable values;
    TabularPolicy policy;
    int iterations = 0;
};

double discounted_return(std::span<const double> rewards, double gamma);

InducedDynamics policy_induced_dynamics(const TabularMDP& mdp, const TabularPolicy& policy);

/// Iterates V <- R^pi + gamma P^pi V until the sup-norm change drops below tol.
std::vector<double> policy_evaluation(const TabularMDP& mdp, const TabularPolicy& policy, double gamma,
                                      const SolverOptions& options = {});

OptimalSolution value_iteration(const TabularMDP& mdp, double gamma, const SolverOptions& options = {});

/// Deterministic greedy policy; ties go to the lowest action index.
TabularPolicy greedy_policy_from_q(std::span<const double> q, int n_states, int n_actions);

int argmax(std::span<const double> values);

}  // namespace goalrl::mdp
