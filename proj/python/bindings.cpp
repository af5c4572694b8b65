#include <limits>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "goalrl/config.hpp"
#include "goalrl/error.hpp"
#include "goalrl/goal_env.hpp"
#include "goalrl/io.hpp"
#include "goalrl/market.hpp"
#include "goalrl/mdp.hpp"
#include "goalrl/oracle.hpp"
#include "goalrl/training.hpp"

namespace py = pybind11;
using namespace goalrl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
    return Array(static_cast<py::ssize_t>(v.size()), v.data());
}

Array to_array(const EnvState& s) {
    return Array(static_cast<py::ssize_t>(s.size()), s.data());
}

py::dict observations(const std::vector<GoalObservation>& info) {
    py::dict d;
    for (const auto& o : info) {
        d[py::int_(o.slot)] = o.success_probability;
    }
    return d;
}

py::dict solve(Array transition, Array reward, double gamma, const std::vector<int>& terminal, double tolerance,
               int max_iterations) {
    if (transition.ndim() != 3 || reward.ndim() != 2) {
        throw ShapeError("transition must be (S, A, S) and reward (S, A)");
    }
    const int n = static_cast<int>(transition.shape(0));
    const int m = static_cast<int>(transition.shape(1));
    if (transition.shape(2) != n || reward.shape(0) != n || reward.shape(1) != m) {
        throw ShapeError("transition and reward shapes disagree");
    }
    mdp::TabularMDP model(n, m);
    model.transition.assign(transition.data(), transition.data() + transition.size());
    model.reward.assign(reward.data(), reward.data() + reward.size());
    for (int s : terminal) {
        if (s < 0 || s >= n) {
            throw ShapeError("terminal index out of range");
        }
        model.terminal[s] = true;
    }
    mdp::SolverOptions opts;
    opts.tol = tolerance;
    opts.max_iterations = max_iterations;
    const auto sol = mdp::value_iteration(model, gamma, opts);
    Array q({n, m});
    std::copy(sol.values.q.begin(), sol.values.q.end(), q.mutable_data());
    py::dict out;
    out["values"] = to_array(sol.values.v);
    out["q"] = q;
    std::vector<int> policy;
    for (int s = 0; s < n; ++s) {
        policy.push_back(mdp::argmax(std::span<const double>(sol.values.q.data() + static_cast<std::size_t>(s) * m,
                                                             static_cast<std::size_t>(m))));
    }
    out["policy"] = policy;
    out["iterations"] = sol.iterations;
    return out;
}

py::dict metrics_dict(const std::vector<EpisodeMetrics>& metrics, const GoalSet& goals) {
    const auto names = goal_column_names(goals);
    std::vector<double> reward;
    std::vector<double> epsilon;
    std::vector<std::vector<double>> success(names.size());
    for (const auto& m : metrics) {
        reward.push_back(m.accumulated_reward);
        epsilon.push_back(m.epsilon);
        for (std::size_t k = 0; k < names.size(); ++k) {
            success[k].push_back(m.goal_success[k].value_or(std::numeric_limits<double>::quiet_NaN()));
        }
    }
    py::dict s;
    for (std::size_t k = 0; k < names.size(); ++k) {
        s[py::str(names[k])] = to_array(success[k]);
    }
    py::dict out;
    out["accumulated_reward"] = to_array(reward);
    out["epsilon"] = to_array(epsilon);
    out["success"] = s;
    return out;
}

}  // namespace

PYBIND11_MODULE(_goalrl, m) {
    m.doc() = "Goal-based retirement planning with deep Q-learning";
    m.attr("STATE_DIM") = kStateDim;
    m.attr("NUM_ACTIONS") = kNumActions;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<CompatibilityError>(m, "CompatibilityError", PyExc_RuntimeError);
    py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<ProfileDocument>(m, "Profile")
        .def_static("load", &load_profile, py::arg("path"))
        .def_static("parse", &parse_profile, py::arg("text"))
        .def("to_json", [](const ProfileDocument& d) { return to_json(d); })
        .def_property(
            "episodes", [](const ProfileDocument& d) { return d.training.n_episodes; },
            [](ProfileDocument& d, int n) { d.training.n_episodes = n; })
        .def_property(
            "seed", [](const ProfileDocument& d) { return d.training.seed; },
            [](ProfileDocument& d, std::uint64_t s) { d.training.seed = s; })
        .def_property(
            "mc_paths", [](const ProfileDocument& d) { return d.training.env.mc_paths; },
            [](ProfileDocument& d, int n) { d.training.env.mc_paths = n; })
        .def_property(
            "hidden_sizes", [](const ProfileDocument& d) { return d.training.agent.hidden_sizes; },
            [](ProfileDocument& d, std::vector<int> h) { d.training.agent.hidden_sizes = std::move(h); })
        .def_property(
            "oracle_episodes", [](const ProfileDocument& d) { return d.oracle.dqn.episodes; },
            [](ProfileDocument& d, int n) { d.oracle.dqn.episodes = n; })
        .def_property(
            "oracle_wealth_levels", [](const ProfileDocument& d) { return d.oracle.wealth_levels; },
            [](ProfileDocument& d, int n) { d.oracle.wealth_levels = n; })
        .def_property(
            "oracle_horizon", [](const ProfileDocument& d) { return d.oracle.horizon; },
            [](ProfileDocument& d, int n) { d.oracle.horizon = n; })
        .def_property_readonly("goal_names",
                               [](const ProfileDocument& d) { return goal_column_names(d.training.env.goals); })
        .def(py::self == py::self);

    m.def("value_iteration", &solve, py::arg("transition"), py::arg("reward"), py::arg("gamma"),
          py::arg("terminal") = std::vector<int>{}, py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 100000,
          "Optimal values, Q table and greedy policy of a tabular MDP.");

    m.def(
        "pre_retirement_reward",
        [](double p, double threshold, double rho, double rho_prime) {
            Goal g;
            g.threshold = threshold;
            return pre_retirement_reward(p, g, RewardConfig{rho, rho_prime});
        },
        py::arg("p"), py::arg("threshold") = 0.70, py::arg("rho") = 10.0, py::arg("rho_prime") = 100.0);
    m.def(
        "retirement_reward",
        [](double p, double threshold, double tolerance, double rho, double rho_prime) {
            Goal g;
            g.kind = GoalKind::retirement;
            g.threshold = threshold;
            g.tolerance = tolerance;
            return retirement_reward(p, g, RewardConfig{rho, rho_prime});
        },
        py::arg("p"), py::arg("threshold") = 0.70, py::arg("tolerance") = 0.06, py::arg("rho") = 10.0,
        py::arg("rho_prime") = 100.0);

    m.def(
        "epsilon_at",
        [](std::int64_t step, double start, double end, std::int64_t decay_steps) {
            return epsilon_at(EpsilonSchedule{start, end, decay_steps}, step);
        },
        py::arg("step"), py::arg("start") = 1.0, py::arg("end") = 0.01, py::arg("decay_steps") = 100000);

    m.def(
        "estimate_goal_success",
        [](const ProfileDocument& d, const std::vector<double>& contributions, double amount, int year, int n_paths,
           std::uint64_t seed, int threads) {
            const auto& env = d.training.env;
            MonteCarloOptions o;
            o.n_paths = n_paths;
            o.seed = seed;
            o.threads = threads;
            o.split = env.contribution_split;
            return estimate_goal_success(env.profile, contributions, amount, year, env.market, o);
        },
        py::arg("profile"), py::arg("contributions"), py::arg("amount"), py::arg("year"), py::arg("n_paths") = 1000,
        py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "estimate_retirement_success",
        [](const ProfileDocument& d, const std::vector<double>& contributions, double annual_spending,
           int drawdown_years, int n_paths, std::uint64_t seed, int threads) {
            const auto& env = d.training.env;
            MonteCarloOptions o;
            o.n_paths = n_paths;
            o.seed = seed;
            o.threads = threads;
            o.split = env.contribution_split;
            return estimate_retirement_success(env.profile, contributions, annual_spending, drawdown_years,
                                               env.market, o);
        },
        py::arg("profile"), py::arg("contributions"), py::arg("annual_spending"), py::arg("drawdown_years") = 30,
        py::arg("n_paths") = 1000, py::arg("seed") = 0, py::arg("threads") = 1);

    py::class_<GoalEnv>(m, "GoalEnv")
        .def(py::init([](const ProfileDocument& d) { return GoalEnv(d.training.env); }), py::arg("profile"))
        .def("reset", [](GoalEnv& e, std::uint64_t seed) { return to_array(e.reset(seed)); }, py::arg("seed") = 0)
        .def(
            "step",
            [](GoalEnv& e, int action) {
                const auto r = e.step(action);
                return py::make_tuple(to_array(r.next_state), r.reward, r.done, observations(r.info));
            },
            py::arg("action"))
        .def_property_readonly("year", &GoalEnv::year)
        .def_property_readonly("done", &GoalEnv::done)
        .def_property_readonly("contributions", [](const GoalEnv& e) { return e.contributions(); })
        .def_property_readonly("balance", [](const GoalEnv& e) { return e.balances().total(); });

    m.def(
        "train",
        [](const ProfileDocument& d, std::optional<std::function<void(int, double)>> progress) {
            ProgressCallback cb;
            if (progress) {
                cb = [&](const EpisodeMetrics& em) {
                    py::gil_scoped_acquire gil;
                    (*progress)(em.episode, em.accumulated_reward);
                };
            }
            TrainingResult r;
            {
                py::gil_scoped_release release;
                r = train(d.training, cb);
            }
            py::dict out = metrics_dict(r.metrics, d.training.env.goals);
            out["checkpoint"] = checkpoint_to_string(r.checkpoint);
            return out;
        },
        py::arg("profile"), py::arg("progress") = py::none(),
        "Train a DQN agent. Returns per-episode metrics and the checkpoint text.");

    m.def(
        "evaluate",
        [](const std::string& checkpoint, const ProfileDocument& d, int episodes, std::uint64_t seed, int threads) {
            const Checkpoint c = checkpoint_from_string(checkpoint);
            EvaluationReport r;
            {
                py::gil_scoped_release release;
                r = evaluate_policy(c, d.training.env, episodes, seed, threads);
            }
            const auto names = goal_column_names(d.training.env.goals);
            py::dict success;
            for (std::size_t k = 0; k < names.size(); ++k) {
                success[py::str(names[k])] = r.mean_success[k];
            }
            py::dict out;
            out["mean_accumulated_reward"] = r.mean_accumulated_reward;
            out["mean_success"] = success;
            out["episode_rewards"] = to_array(r.episode_rewards);
            out["schedules"] = r.schedules;
            out["schedule_is_deterministic"] = r.schedule_is_deterministic;
            return out;
        },
        py::arg("checkpoint"), py::arg("profile"), py::arg("episodes") = 100, py::arg("seed") = 0,
        py::arg("threads") = 1);

    m.def(
        "oracle",
        [](const ProfileDocument& d) {
            OracleReport r;
            {
                py::gil_scoped_release release;
                r = run_oracle(d.training.env, d.oracle);
            }
            py::dict out;
            out["states"] = r.n_states;
            out["nonterminal_states"] = r.nonterminal_states;
            out["value_iterations"] = r.value_iterations;
            out["agreement"] = r.agreement;
            return out;
        },
        py::arg("profile"), "Compare a one-hot DQN against value iteration on the planning toy.");
}
