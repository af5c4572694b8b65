// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "goalrl/config.hpp"
#include "goalrl/dqn.hpp"
#include "goalrl/goal_env.hpp"
#include "goalrl/io.hpp"
#include "goalrl/market.hpp"
#include "goalrl/oracle.hpp"
#include "goalrl/training.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace goalrl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

std::vector<double> one_hot(int n, int i) {
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    x[i] = 1.0;
    return x;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome tabular_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;

    // Q = 0, r = 1, gamma = 0.95, max target Q = 0, alpha = 0.5 -> 0.5.
    {
        QNetwork net({4, 3}, false);
        const QNetwork target({4, 3}, false);
        AgentConfig cfg;
        cfg.gamma = 0.95;
        cfg.learning_rate = 0.5;
        const std::vector<Experience> batch{{one_hot(4, 1), 2, 1.0, one_hot(4, 3), false}};
        td_train_batch(net, target, batch, cfg);
        worst = std::abs(net.forward(one_hot(4, 1))(2) - 0.5);
    }

    RngStream rng(2024);
    const int n = 8;
    const int m = 4;
    for (int trial = 0; trial < 1000; ++trial) {
        QNetwork net = QNetwork::random({n, m}, static_cast<std::uint64_t>(trial), false);
        const QNetwork target = QNetwork::random({n, m}, 5000 + static_cast<std::uint64_t>(trial), false);
        const int s = static_cast<int>(rng.uniform_index(n));
        const int a = static_cast<int>(rng.uniform_index(m));
        const int s2 = static_cast<int>(rng.uniform_index(n));
        const double r = 20.0 * rng.uniform() - 10.0;
        const bool done = rng.uniform() < 0.25;
        AgentConfig cfg;
        cfg.gamma = rng.uniform();
        cfg.learning_rate = rng.uniform();

        // Tabular Q-learning on a copy of the table.
        std::vector<double> table(static_cast<std::size_t>(n * m));
        std::vector<double> target_table(static_cast<std::size_t>(n * m));
        for (int ss = 0; ss < n; ++ss) {
            for (int aa = 0; aa < m; ++aa) {
                table[ss * m + aa] = net.layers()[0].weight(aa, ss);
                target_table[ss * m + aa] = target.layers()[0].weight(aa, ss);
            }
        }
        double max_next = target_table[s2 * m];
        for (int aa = 1; aa < m; ++aa) {
            max_next = std::max(max_next, target_table[s2 * m + aa]);
        }
        const double y = done ? r : r + cfg.gamma * max_next;
        table[s * m + a] += cfg.learning_rate * (y - table[s * m + a]);

        const std::vector<Experience> batch{{one_hot(n, s), a, r, one_hot(n, s2), done}};
        td_train_batch(net, target, batch, cfg);
        for (int ss = 0; ss < n; ++ss) {
            const auto q = net.forward(one_hot(n, ss));
            for (int aa = 0; aa < m; ++aa) {
                worst = std::max(worst, std::abs(q(aa) - table[ss * m + aa]));
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 1.0,
            "max |Q_net - Q_table| = " + fmt("%.3g", worst) + " over 1001 updates, " + fmt("%.3f", secs) + " s"};
}

Outcome reward_grid() {
    std::ifstream in(testkit::data_path("reward_grid.csv"));
    std::string line;
    std::getline(in, line);
    const GoalSet goals;
    Goal pre;
    pre.target_year_index = 5;
    pre.target_amount = 1.0;
    const RewardConfig cfg;
    int rows = 0;
    bool saw_lower = false;
    bool saw_upper = false;
    double worst = 0.0;
    while (std::getline(in, line)) {
        double p = 0.0;
        double want_pre = 0.0;
        double want_ret = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p, &want_pre, &want_ret) != 3) {
            return {false, "unreadable grid row: " + line};
        }
        worst = std::max(worst, std::abs(pre_retirement_reward(p, pre, cfg) - want_pre));
        worst = std::max(worst, std::abs(retirement_reward(p, goals.retirement, cfg) - want_ret));
        saw_lower = saw_lower || p == goals.retirement.threshold;
        saw_upper = saw_upper || p == goals.retirement.threshold + goals.retirement.tolerance;
        ++rows;
    }
    return {rows == 1000 && saw_lower && saw_upper && worst <= 1e-12,
            std::to_string(rows) + " probabilities (P and P+D included: " + (saw_lower && saw_upper ? "yes" : "no") +
                "), max error " + fmt("%.3g", worst)};
}

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto doc = load_profile(testkit::config_path("oracle_toy.json"));
    const OracleReport report = run_oracle(doc.training.env, doc.oracle);
    const double secs = seconds_since(t0);
    const bool shape_ok = doc.oracle.wealth_levels <= 50 && doc.oracle.horizon <= 10 &&
                          doc.training.env.goals.pre_retirement.size() == 1;
    return {shape_ok && report.agreement >= 0.90 && secs < 300.0,
            "agreement " + fmt("%.2f", 100.0 * report.agreement) + "% on " + std::to_string(report.nonterminal_states) +
                " nonterminal states, " + fmt("%.1f", secs) + " s"};
}

Outcome gradient_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(77);
    double worst_norm = 0.0;
    double worst_elem = 0.0;
    int checked = 0;
    int skipped = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<int> sizes{kStateDim};
        const int hidden_layers = 1 + static_cast<int>(rng.uniform_index(2));
        for (int h = 0; h < hidden_layers; ++h) {
            sizes.push_back(4 + static_cast<int>(rng.uniform_index(13)));
        }
        sizes.push_back(kNumActions);
        const QNetwork net = QNetwork::random(sizes, 1000 + static_cast<std::uint64_t>(k));
        const QNetwork target = QNetwork::random(sizes, 2000 + static_cast<std::uint64_t>(k));

        auto state = [&] {
            std::vector<double> x(kStateDim);
            for (double& v : x) {
                v = 2.0 * rng.uniform() - 1.0;
            }
            return x;
        };
        const auto x = state();
        const auto out = testkit::check_output_gradient(net, x, static_cast<int>(rng.uniform_index(kNumActions)));
        std::vector<Experience> batch;
        for (int j = 0; j < 4; ++j) {
            batch.push_back({state(), static_cast<int>(rng.uniform_index(kNumActions)), 2.0 * rng.uniform() - 1.0,
                             state(), rng.uniform() < 0.3});
        }
        const auto td = testkit::check_td_gradient(net, target, batch, 0.95);
        for (const auto& r : {out, td}) {
            worst_norm = std::max(worst_norm, r.norm_relative);
            worst_elem = std::max(worst_elem, r.max_elem_relative);
            checked += r.checked;
            skipped += r.skipped;
        }
    }
    const double secs = seconds_since(t0);
    return {worst_norm < 1e-4 && worst_elem < 1e-4 && secs < 60.0,
            "100 networks, worst relative error " + fmt("%.2e", worst_norm) + " (per-parameter " +
                fmt("%.2e", worst_elem) + "), " + std::to_string(checked) + " parameters checked, " +
                std::to_string(skipped) + " skipped at kinks, " + fmt("%.1f", secs) + " s"};
}

struct ReferenceRun {
    TrainingResult result;
    double seconds = 0.0;
};

ReferenceRun reference_run() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto doc = load_profile(testkit::config_path("reference.json"));
    ReferenceRun run;
    run.result = train(doc.training);
    run.seconds = seconds_since(t0);
    return run;
}

Outcome reward_curve(const ReferenceRun& run) {
    const auto& metrics = run.result.metrics;
    std::vector<double> rewards;
    for (const auto& m : metrics) {
        rewards.push_back(m.accumulated_reward);
    }
    const std::size_t n = rewards.size();
    const auto ma = moving_average(rewards, 100);
    const double early = mean(std::span<const double>(ma.data(), 500));
    const double late = mean(std::span<const double>(ma.data() + n - 500, 500));
    const std::size_t tenth = n / 10;
    const double var_first = variance(std::span<const double>(rewards.data(), tenth));
    const double var_last = variance(std::span<const double>(rewards.data() + n - tenth, tenth));
    const bool pass = n == 6000 && late > 0.0 && late > early && var_last < var_first && run.seconds < 1800.0;
    return {pass, "MA100 first 500 = " + fmt("%.2f", early) + ", last 500 = " + fmt("%.2f", late) +
                      "; variance first 10% = " + fmt("%.1f", var_first) + ", last 10% = " + fmt("%.1f", var_last) +
                      "; " + fmt("%.0f", run.seconds) + " s"};
}

Outcome success_curve(const ReferenceRun& run) {
    std::vector<double> success;
    for (const auto& m : run.result.metrics) {
        success.push_back(m.goal_success.at(0).value_or(0.0));
    }
    const auto ma = moving_average(success, 100);
    const std::span<const double> last(ma.data() + ma.size() - 500, 500);
    const double lowest = *std::min_element(last.begin(), last.end());
    return {lowest >= 0.70, "pre-retirement success MA100 over last 500 episodes: min " + fmt("%.3f", lowest) +
                                ", mean " + fmt("%.3f", mean(last))};
}

Outcome monte_carlo() {
    ClientProfile prof;
    prof.annual_income = 100000;
    prof.annual_spending = 80000;
    prof.initial_balances.taxable = 20000;
    const std::vector<double> contributions(10, 10000.0);

    // Exactly 0 or 1 without noise.
    bool degenerate_ok = true;
    const auto flat = MarketModel::uniform(std::log(1.05), 0.0);
    for (double goal : {50000.0, 100000.0, 150000.0, 200000.0}) {
        MonteCarloOptions o;
        o.n_paths = 250;
        const double p = estimate_goal_success(prof, contributions, goal, 10, flat, o);
        const double r = estimate_retirement_success(prof, contributions, goal / 10.0, 30, flat, o);
        degenerate_ok = degenerate_ok && (p == 0.0 || p == 1.0) && (r == 0.0 || r == 1.0);
    }

    // Standard deviation over 50 seeds, 250 vs 1000 paths, goal near the median outcome.
    const auto model = MarketModel::defaults();
    auto spread = [&](int n_paths, bool retirement) {
        std::vector<double> est;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            MonteCarloOptions o;
            o.n_paths = n_paths;
            o.seed = seed;
            est.push_back(retirement ? estimate_retirement_success(prof, contributions, 14000, 30, model, o)
                                     : estimate_goal_success(prof, contributions, 150000, 10, model, o));
        }
        return std::sqrt(variance(est));
    };
    const double goal_ratio = spread(250, false) / spread(1000, false);
    const double ret_ratio = spread(250, true) / spread(1000, true);
    const bool halves = goal_ratio >= 1.5 && goal_ratio <= 2.5 && ret_ratio >= 1.5 && ret_ratio <= 2.5;
    return {degenerate_ok && halves, std::string("zero-volatility estimates in {0,1}: ") +
                                         (degenerate_ok ? "yes" : "no") + "; sd(250)/sd(1000) goal " +
                                         fmt("%.2f", goal_ratio) + ", retirement " + fmt("%.2f", ret_ratio) +
                                         " (band 1.5 to 2.5)"};
}

Outcome determinism(const ReferenceRun& run) {
    const fs::path dir = fs::temp_directory_path() / "goalrl_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto doc = load_profile(testkit::config_path("reference.json"));
    doc.training.n_episodes = 200;
    const fs::path cfg = dir / "reference_200.json";
    std::ofstream(cfg) << to_json(doc);

    std::ostringstream sink;
    bool identical = true;
    std::string diff;
    std::vector<std::string> args_a{"goalrl", "train", "--config", cfg.string(), "--out", (dir / "a").string()};
    std::vector<std::string> args_b{"goalrl", "train", "--config", cfg.string(), "--out", (dir / "b").string()};
    for (auto* args : {&args_a, &args_b}) {
        std::vector<const char*> argv;
        for (const auto& s : *args) {
            argv.push_back(s.c_str());
        }
        if (cli_dispatch(static_cast<int>(argv.size()), argv.data(), sink, sink) != 0) {
            return {false, "train command failed: " + sink.str()};
        }
    }
    for (const char* f : {"metrics.csv", "moving_average.csv", "checkpoint.txt"}) {
        if (slurp(dir / "a" / f) != slurp(dir / "b" / f) || slurp(dir / "a" / f).empty()) {
            identical = false;
            diff += std::string(" ") + f;
        }
    }

    // Round trip of the 6,000-episode network.
    const QNetwork& net = run.result.checkpoint.network;
    save_checkpoint(dir / "reference.txt", run.result.checkpoint);
    const Checkpoint loaded = load_checkpoint(dir / "reference.txt");
    RngStream rng(31);
    int exact = 0;
    GoalEnv env(doc.training.env);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> probe(kStateDim);
        if (i % 2 == 0) {
            // States the agent actually visits.
            env.reset(static_cast<std::uint64_t>(i));
            for (int y = 0; y < i % 29; ++y) {
                env.step(static_cast<int>(rng.uniform_index(kNumActions)));
            }
            const auto s = env.encode_state();
            probe.assign(s.begin(), s.end());
        } else {
            for (double& v : probe) {
                v = rng.uniform();
            }
        }
        const auto a = net.forward(probe);
        const auto b = loaded.network.forward(probe);
        exact += (a.array() == b.array()).all();
    }
    return {identical && exact == 100, std::string("two train runs byte-identical: ") +
                                           (identical ? "yes" : "no (" + diff + " )") + "; checkpoint round trip exact on " +
                                           std::to_string(exact) + "/100 probe states"};
}

Outcome epsilon_schedule() {
    const EpsilonSchedule s;
    const double e0 = epsilon_at(s, 0);
    const double e_end = epsilon_at(s, 100000);
    const double e_far = epsilon_at(s, 1000000);
    const double mid = epsilon_at(s, 50000);
    const bool pass = e0 == 1.0 && e_end == 0.01 && e_far == 0.01 && std::abs(mid - 0.505) <= 1e-12;
    return {pass, "eps(0) = " + fmt("%.17g", e0) + ", eps(100000) = " + fmt("%.17g", e_end) + ", eps(1e6) = " +
                      fmt("%.17g", e_far) + ", eps(50000) = " + fmt("%.17g", mid)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    ReferenceRun run;
    bool have_run = false;
    auto ensure_run = [&]() -> const ReferenceRun& {
        if (!have_run) {
            run = reference_run();
            have_run = true;
        }
        return run;
    };

    const std::vector<Criterion> criteria{
        {1, "one-hot linear TD step equals tabular Q-learning", tabular_equivalence},
        {2, "reward formulas on a 1000-point grid", reward_grid},
        {3, "DQN agrees with value iteration on the planning toy", oracle_equivalence},
        {4, "analytic gradients match finite differences", gradient_checks},
        {5, "reference training: reward curve", [&] { return reward_curve(ensure_run()); }},
        {6, "reference training: goal success curve", [&] { return success_curve(ensure_run()); }},
        {7, "Monte Carlo estimator", monte_carlo},
        {8, "determinism and checkpoint round trip", [&] { return determinism(ensure_run()); }},
        {9, "epsilon schedule", epsilon_schedule},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
