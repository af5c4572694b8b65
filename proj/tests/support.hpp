#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "goalrl/goal_env.hpp"
#include "goalrl/mdp.hpp"
#include "goalrl/rng.hpp"

namespace goalrl::testkit {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(GOALRL_TEST_DATA) / name;
}

inline std::filesystem::path config_path(const std::string& name) {
    return std::filesystem::path(GOALRL_CONFIG_DIR) / name;
}

// Random MDP with dense random rows. The last state is terminal when
// with_terminal is set.
inline mdp::TabularMDP random_mdp(int n, int m, std::uint64_t seed, bool with_terminal = true) {
    RngStream rng(seed, 99);
    mdp::TabularMDP M(n, m);
    const int live = with_terminal ? n - 1 : n;
    for (int s = 0; s < live; ++s) {
        for (int a = 0; a < m; ++a) {
            double sum = 0.0;
            for (int t = 0; t < n; ++t) {
                // Some zero entries to exercise sparsity.
                const double u = rng.uniform();
                M.p(s, a, t) = u < 0.3 ? 0.0 : u;
                sum += M.p(s, a, t);
            }
            if (sum == 0.0) {
                M.p(s, a, s) = sum = 1.0;
            }
            for (int t = 0; t < n; ++t) {
                M.p(s, a, t) /= sum;
            }
            M.r(s, a) = 4.0 * rng.uniform() - 2.0;
        }
    }
    if (with_terminal) {
        M.make_terminal(n - 1);
    }
    return M;
}

struct ToyMdp {
    mdp::TabularMDP mdp;
    double gamma = 0.0;
    std::vector<double> values;
    std::vector<int> policy;
};

// Reads tests/data/toy_mdp.txt (written by tests/oracle/derive.py).
inline ToyMdp load_toy_mdp() {
    std::ifstream in(data_path("toy_mdp.txt"));
    if (!in) {
        throw std::runtime_error("missing toy_mdp.txt");
    }
    int n = 0;
    int m = 0;
    int term = 0;
    ToyMdp toy;
    in >> n >> m >> toy.gamma >> term;
    toy.mdp = mdp::TabularMDP(n, m);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < m; ++a) {
            in >> toy.mdp.r(s, a);
            for (int t = 0; t < n; ++t) {
                in >> toy.mdp.p(s, a, t);
            }
        }
    }
    toy.mdp.terminal[term] = true;
    std::string word;
    in >> word;
    toy.values.resize(n);
    for (double& v : toy.values) {
        in >> v;
    }
    in >> word;
    toy.policy.resize(n - 1);
    for (int& a : toy.policy) {
        in >> a;
    }
    if (!in) {
        throw std::runtime_error("malformed toy_mdp.txt");
    }
    return toy;
}

// The acceptance reference profile: income 100k, spending 80k, one 10-year
// goal of 50k, retirement in 30 years at 40k a year.
inline EnvConfig reference_env() {
    EnvConfig env;
    env.profile.current_age = 35.0;
    env.profile.annual_income = 100000.0;
    env.profile.annual_spending = 80000.0;
    Goal home;
    home.name = "home";
    home.target_year_index = 10;
    home.target_amount = 50000.0;
    env.goals.pre_retirement.push_back(home);
    return env;
}

}  // namespace goalrl::testkit
