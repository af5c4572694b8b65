#include "goalrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "goalrl/error.hpp"

namespace goalrl::mdp {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

void check_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw DomainError("discount factor must lie in [0, 1], got " + std::to_string(gamma));
    }
}

void check_shapes(const TabularMDP& mdp, const TabularPolicy& policy) {
    if (mdp.n_states != policy.n_states || mdp.n_actions != policy.n_actions ||
        policy.probs.size() != static_cast<std::size_t>(mdp.n_states) * mdp.n_actions) {
        throw ShapeError("policy shape does not match MDP");
    }
}

double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

}  // namespace

TabularMDP::TabularMDP(int states, int actions)
    : n_states(states),
      n_actions(actions),
      transition(static_cast<std::size_t>(states) * actions * states, 0.0),
      reward(static_cast<std::size_t>(states) * actions, 0.0),
      terminal(static_cast<std::size_t>(states), false) {
    if (states <= 0 || actions <= 0) {
        throw ShapeError("MDP needs at least one state and one action");
    }
}

void TabularMDP::validate() const {
    if (n_states <= 0 || n_actions <= 0) {
        throw ShapeError("MDP needs at least one state and one action");
    }
    const auto sa = static_cast<std::size_t>(n_states) * n_actions;
    if (transition.size() != sa * n_states || reward.size() != sa ||
        terminal.size() != static_cast<std::size_t>(n_states)) {
        throw ShapeError("MDP tables have inconsistent sizes");
    }
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (double p : row(s, a)) {
                if (p < 0.0 || !std::isfinite(p)) {
                    throw DomainError("negative or non-finite transition probability");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbabilityTolerance) {
                throw DomainError("transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                                  ") sums to " + std::to_string(sum));
            }
            if (!std::isfinite(r(s, a))) {
                throw DomainError("non-finite reward");
            }
            if (terminal[s] && (p(s, a, s) != 1.0 || r(s, a) != 0.0)) {
                throw DomainError("terminal state " + std::to_string(s) + " must absorb with zero reward");
            }
        }
    }
}

void TabularMDP::make_terminal(int s) {
    terminal[s] = true;
    for (int a = 0; a < n_actions; ++a) {
        for (int next = 0; next < n_states; ++next) {
            p(s, a, next) = next == s ? 1.0 : 0.0;
        }
        r(s, a) = 0.0;
    }
}

TabularPolicy::TabularPolicy(int states, int actions)
    : n_states(states), n_actions(actions), probs(static_cast<std::size_t>(states) * actions, 0.0) {}

TabularPolicy TabularPolicy::deterministic(std::span<const int> actions, int n_actions) {
    TabularPolicy policy(static_cast<int>(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions) {
            throw ShapeError("action index out of range");
        }
        policy(static_cast<int>(s), actions[s]) = 1.0;
    }
    return policy;
}

int TabularPolicy::action(int s) const {
    return argmax(std::span<const double>(probs).subspan(static_cast<std::size_t>(s) * n_actions, n_actions));
}

void TabularPolicy::validate() const {
    if (probs.size() != static_cast<std::size_t>(n_states) * n_actions) {
        throw ShapeError("policy table has wrong size");
    }
    for (int s = 0; s < n_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            if ((*this)(s, a) < 0.0) {
                throw DomainError("negative policy probability");
            }
            sum += (*this)(s, a);
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) {
            throw DomainError("policy row " + std::to_string(s) + " does not sum to 1");
        }
    }
}

double discounted_return(std::span<const double> rewards, double gamma) {
    check_gamma(gamma);
    // Horner form: G = r0 + gamma (r1 + gamma (r2 + ...)).
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) {
        g = *it + gamma * g;
    }
    return g;
}

InducedDynamics policy_induced_dynamics(const TabularMDP& mdp, const TabularPolicy& policy) {
    check_shapes(mdp, policy);
    const auto n = static_cast<std::size_t>(mdp.n_states);
    InducedDynamics out{std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0)};
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pi = policy(s, a);
            if (pi == 0.0) {
                continue;
            }
            out.reward[s] += mdp.r(s, a) * pi;
            const auto row = mdp.row(s, a);
            for (std::size_t next = 0; next < n; ++next) {
                out.transition[s * n + next] += row[next] * pi;
            }
        }
    }
    return out;
}

std::vector<double> policy_evaluation(const TabularMDP& mdp, const TabularPolicy& policy, double gamma,
                                      const SolverOptions& options) {
    check_gamma(gamma);
    const InducedDynamics dyn = policy_induced_dynamics(mdp, policy);
    const auto n = static_cast<std::size_t>(mdp.n_states);
    std::vector<double> v(n, 0.0);
    std::vector<double> next(n, 0.0);
    for (int it = 0; it < options.max_iterations; ++it) {
        for (std::size_t s = 0; s < n; ++s) {
            if (mdp.terminal[s]) {
                next[s] = 0.0;
                continue;
            }
            double acc = dyn.reward[s];
            for (std::size_t t = 0; t < n; ++t) {
                acc += gamma * dyn.transition[s * n + t] * v[t];
            }
            next[s] = acc;
        }
        const double delta = sup_norm_diff(next, v);
        v.swap(next);
        if (delta < options.tol) {
            return v;
        }
    }
    throw ConvergenceError("policy evaluation did not converge within " + std::to_string(options.max_iterations) +
                           " iterations");
}

int argmax(std::span<const double> values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

TabularPolicy greedy_policy_from_q(std::span<const double> q, int n_states, int n_actions) {
    if (q.size() != static_cast<std::size_t>(n_states) * n_actions) {
        throw ShapeError("Q table has wrong size");
    }
    TabularPolicy policy(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        policy(s, argmax(q.subspan(static_cast<std::size_t>(s) * n_actions, n_actions))) = 1.0;
    }
    return policy;
}

OptimalSolution value_iteration(const TabularMDP& mdp, double gamma, const SolverOptions& options) {
    check_gamma(gamma);
    const int n = mdp.n_states;
    const int m = mdp.n_actions;
    ValueTable table{n, m, std::vector<double>(n, 0.0), std::vector<double>(static_cast<std::size_t>(n) * m, 0.0)};

    auto backup = [&](const std::vector<double>& v) {
        for (int s = 0; s < n; ++s) {
            for (int a = 0; a < m; ++a) {
                double acc = 0.0;
                if (!mdp.terminal[s]) {
                    acc = mdp.r(s, a);
                    const auto row = mdp.row(s, a);
                    for (int t = 0; t < n; ++t) {
                        acc += gamma * row[t] * v[t];
                    }
                }
                table.q[static_cast<std::size_t>(s) * m + a] = acc;
            }
        }
    };

    std::vector<double> next(n, 0.0);
    for (int it = 1; it <= options.max_iterations; ++it) {
        backup(table.v);
        for (int s = 0; s < n; ++s) {
            const auto qs = std::span<const double>(table.q).subspan(static_cast<std::size_t>(s) * m, m);
            next[s] = *std::max_element(qs.begin(), qs.end());
        }
        const double delta = sup_norm_diff(next, table.v);
        table.v.swap(next);
        if (delta < options.tol) {
            // Q consistent with the returned V.
            backup(table.v);
            OptimalSolution out;
            out.policy = greedy_policy_from_q(table.q, n, m);
            out.values = std::move(table);
            out.iterations = it;
            return out;
        }
    }
    throw ConvergenceError("value iteration did not converge within " + std::to_string(options.max_iterations) +
                           " iterations");
}

}  // namespace goalrl::mdp
