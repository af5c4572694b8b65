#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "goalrl/config.hpp"
#include "goalrl/io.hpp"
#include "goalrl/oracle.hpp"
#include "goalrl/training.hpp"

namespace goalrl {

namespace fs = std::filesystem;

namespace {

std::string percent(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * x);
    return buf;
}

std::string fmt(double x, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
    return buf;
}

int run_train(const std::string& config_path, const std::string& out_dir, int log_every, std::ostream& out) {
    const ProfileDocument doc = load_profile(config_path);
    const TrainingConfig& cfg = doc.training;
    const auto names = goal_column_names(cfg.env.goals);

    fs::create_directories(out_dir);
    TrainingResult result = train(cfg, [&](const EpisodeMetrics& m) {
        if (log_every > 0 && (m.episode + 1) % log_every == 0) {
            out << "episode " << m.episode + 1 << " reward " << fmt(m.accumulated_reward) << " epsilon "
                << fmt(m.epsilon) << "\n";
        }
    });

    const fs::path dir(out_dir);
    save_checkpoint(dir / "checkpoint.txt", result.checkpoint);
    emit_metrics(dir / "metrics.csv", result.metrics, names);
    write_text(dir / "moving_average.csv", moving_average_csv(result.metrics, names, cfg.moving_average_window));

    std::vector<double> rewards;
    for (const auto& m : result.metrics) {
        rewards.push_back(m.accumulated_reward);
    }
    const auto ma = moving_average(rewards, cfg.moving_average_window);
    out << "trained " << result.metrics.size() << " episodes, " << result.checkpoint.step << " steps\n";
    out << "final moving-average reward " << fmt(ma.back()) << "\n";
    out << "wrote " << (dir / "checkpoint.txt").string() << ", " << (dir / "metrics.csv").string() << ", "
        << (dir / "moving_average.csv").string() << "\n";
    return 0;
}

int run_evaluate(const std::string& checkpoint_path, const std::string& config_path, int episodes,
                 std::uint64_t seed, int threads, std::string schedule_path, std::ostream& out) {
    const ProfileDocument doc = load_profile(config_path);
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const EnvConfig& env = doc.training.env;
    const EvaluationReport report = evaluate_policy(ckpt, env, episodes, seed, threads);

    if (schedule_path.empty()) {
        schedule_path = (fs::path(checkpoint_path).parent_path() / "schedule.csv").string();
    }
    write_text(schedule_path, schedule_csv(report));

    const auto names = goal_column_names(env.goals);
    out << "episodes " << episodes << "\n";
    out << "mean accumulated reward " << fmt(report.mean_accumulated_reward) << "\n";
    for (std::size_t g = 0; g < names.size(); ++g) {
        out << "success " << names[g] << " " << fmt(report.mean_success[g]) << "\n";
    }
    out << "schedule " << (report.schedule_is_deterministic ? "deterministic" : "varies by episode") << "\n";
    if (!report.schedules.empty()) {
        out << "contributions (episode 0):";
        for (double c : report.schedules.front()) {
            out << " " << fmt(c, 0);
        }
        out << "\n";
    }
    out << "wrote " << schedule_path << "\n";
    return 0;
}

int run_oracle_command(const std::string& config_path, std::ostream& out) {
    const ProfileDocument doc = load_profile(config_path);
    const OracleReport report = run_oracle(doc.training.env, doc.oracle);
    out << "tabular states " << report.n_states << " (" << report.nonterminal_states << " nonterminal)\n";
    out << "value iteration sweeps " << report.value_iterations << "\n";
    out << "policy agreement " << percent(report.agreement) << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Goal-based savings planning with deep Q-learning", "goalrl"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int log_every = 0;
    auto* train_cmd = app.add_subcommand("train", "Train a contribution policy for one profile");
    train_cmd->add_option("--config", config, "Profile document (JSON)")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", out_dir, "Output directory")->required();
    train_cmd->add_option("--log-every", log_every, "Print progress every N episodes (0 = quiet)");

    std::string checkpoint;
    int episodes = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string schedule;
    auto* eval_cmd = app.add_subcommand("evaluate", "Run greedy episodes with a trained checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--config", config, "Profile document (JSON)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", seed, "Evaluation seed");
    eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--schedule", schedule, "Schedule CSV path (default: next to the checkpoint)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Compare DQN with value iteration on a discretized toy");
    oracle_cmd->add_option("--config", config, "Profile document (JSON)")->required()->check(CLI::ExistingFile);

    if (argc <= 1) {
        out << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) {
            return run_train(config, out_dir, log_every, out);
        }
        if (*eval_cmd) {
            return run_evaluate(checkpoint, config, episodes, seed, threads, schedule, out);
        }
        if (*oracle_cmd) {
            return run_oracle_command(config, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    out << app.help();
    return 2;
}

}  // namespace goalrl
