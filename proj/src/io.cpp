#include "goalrl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "goalrl/error.hpp"

namespace goalrl {

namespace {

constexpr const char* kMagic = "goalrl-checkpoint";

std::string number(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return {buf, res.ptr};
}

std::string fixed(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

class Tokens {
public:
    explicit Tokens(const std::string& text) {
        std::istringstream in(text);
        std::string t;
        while (in >> t) {
            items_.push_back(std::move(t));
        }
    }

    const std::string& next(const char* what) {
        if (pos_ >= items_.size()) {
            throw IntegrityError(std::string("checkpoint truncated while reading ") + what);
        }
        return items_[pos_++];
    }

    void expect(const char* word) {
        const std::string& t = next(word);
        if (t != word) {
            throw IntegrityError("checkpoint: expected '" + std::string(word) + "', found '" + t + "'");
        }
    }

    template <class T>
    T parse(const char* what) {
        const std::string& t = next(what);
        T value{};
        const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
            throw IntegrityError("checkpoint: bad " + std::string(what) + " '" + t + "'");
        }
        return value;
    }

    bool exhausted() const { return pos_ == items_.size(); }

private:
    std::vector<std::string> items_;
    std::size_t pos_ = 0;
};

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string goal_header(const std::vector<std::string>& goal_names, const char* suffix) {
    std::string h;
    for (const auto& name : goal_names) {
        h += ",success_" + name + suffix;
    }
    return h;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& c) {
    const AgentConfig& a = c.agent;
    const QNetwork& net = c.network;
    std::string out = std::string(kMagic) + " " + std::to_string(c.format_version) + "\n";
    out += "step " + std::to_string(c.step) + "\n";
    out += "agent " + number(a.gamma) + " " + number(a.learning_rate) + " " + std::to_string(a.batch_size) + " " +
           std::to_string(a.target_sync_period) + " " + std::to_string(a.warmup_transitions) + " " +
           std::to_string(a.replay_capacity) + " " + std::to_string(a.train_every) + "\n";
    out += "sizes " + std::to_string(net.layer_sizes().size());
    for (int d : net.layer_sizes()) {
        out += " " + std::to_string(d);
    }
    out += "\nbias " + std::string(net.has_bias() ? "1" : "0") + "\n";
    for (const DenseLayer& layer : net.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index k = 0; k < layer.weight.cols(); ++k) {
                out += (k == 0 ? "" : " ") + number(layer.weight(r, k));
            }
            out += "\n";
        }
        if (net.has_bias()) {
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
                out += (r == 0 ? "" : " ") + number(layer.bias(r));
            }
            out += "\n";
        }
    }
    out += "end\n";
    return out;
}

Checkpoint checkpoint_from_string(const std::string& text) {
    Tokens tok(text);
    const std::string& magic = tok.next("header");
    if (magic != kMagic) {
        throw CompatibilityError("not a checkpoint file (header '" + magic + "')");
    }
    const int version = tok.parse<int>("format version");
    if (version != kCheckpointFormatVersion) {
        throw CompatibilityError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kCheckpointFormatVersion) + ")");
    }

    Checkpoint c;
    c.format_version = version;
    tok.expect("step");
    c.step = tok.parse<std::int64_t>("step");
    tok.expect("agent");
    c.agent.gamma = tok.parse<double>("gamma");
    c.agent.learning_rate = tok.parse<double>("learning_rate");
    c.agent.batch_size = tok.parse<int>("batch_size");
    c.agent.target_sync_period = tok.parse<int>("target_sync_period");
    c.agent.warmup_transitions = tok.parse<int>("warmup_transitions");
    c.agent.replay_capacity = tok.parse<int>("replay_capacity");
    c.agent.train_every = tok.parse<int>("train_every");

    tok.expect("sizes");
    const int n_sizes = tok.parse<int>("layer count");
    if (n_sizes < 2 || n_sizes > 64) {
        throw IntegrityError("checkpoint: implausible layer count " + std::to_string(n_sizes));
    }
    std::vector<int> sizes;
    for (int i = 0; i < n_sizes; ++i) {
        const int d = tok.parse<int>("layer size");
        if (d < 1) {
            throw IntegrityError("checkpoint: layer size must be positive");
        }
        sizes.push_back(d);
    }
    c.agent.hidden_sizes.assign(sizes.begin() + 1, sizes.end() - 1);
    tok.expect("bias");
    const int bias = tok.parse<int>("bias flag");
    if (bias != 0 && bias != 1) {
        throw IntegrityError("checkpoint: bias flag must be 0 or 1");
    }

    QNetwork net(sizes, bias == 1);
    for (DenseLayer& layer : net.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index k = 0; k < layer.weight.cols(); ++k) {
                layer.weight(r, k) = tok.parse<double>("weight");
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = tok.parse<double>("bias");
        }
    }
    tok.expect("end");
    if (!tok.exhausted()) {
        throw IntegrityError("checkpoint: trailing data after end marker");
    }
    c.network = std::move(net);
    return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    write_text(path, checkpoint_to_string(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_string(read_text(path));
}

std::string metrics_csv(const std::vector<EpisodeMetrics>& metrics, const std::vector<std::string>& goal_names) {
    std::string out = "episode,steps,accumulated_reward,epsilon" + goal_header(goal_names, "") + "\n";
    for (const EpisodeMetrics& m : metrics) {
        if (m.goal_success.size() != goal_names.size()) {
            throw ShapeError("metrics row has " + std::to_string(m.goal_success.size()) + " goal columns, header has " +
                             std::to_string(goal_names.size()));
        }
        out += std::to_string(m.episode) + "," + std::to_string(m.steps) + "," + fixed(m.accumulated_reward) + "," +
               fixed(m.epsilon);
        for (const auto& p : m.goal_success) {
            out += ",";
            if (p) {
                out += fixed(*p);
            }
        }
        out += "\n";
    }
    return out;
}

std::string moving_average_csv(const std::vector<EpisodeMetrics>& metrics, const std::vector<std::string>& goal_names,
                               int window) {
    std::vector<double> rewards;
    std::vector<std::vector<double>> success(goal_names.size());
    for (const EpisodeMetrics& m : metrics) {
        rewards.push_back(m.accumulated_reward);
        for (std::size_t g = 0; g < goal_names.size(); ++g) {
            success[g].push_back(m.goal_success.at(g).value_or(0.0));
        }
    }
    const auto reward_ma = moving_average(rewards, window);
    std::vector<std::vector<double>> success_ma;
    for (const auto& s : success) {
        success_ma.push_back(moving_average(s, window));
    }

    std::string out = "episode,accumulated_reward_ma" + goal_header(goal_names, "_ma") + "\n";
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        out += std::to_string(metrics[i].episode) + "," + fixed(reward_ma[i]);
        for (const auto& s : success_ma) {
            out += "," + fixed(s[i]);
        }
        out += "\n";
    }
    return out;
}

std::string schedule_csv(const EvaluationReport& report) {
    std::string out = "year,mean_contribution,min_contribution,max_contribution\n";
    if (report.schedules.empty()) {
        return out;
    }
    const std::size_t years = report.schedules.front().size();
    for (std::size_t y = 0; y < years; ++y) {
        double sum = 0.0;
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto& s : report.schedules) {
            sum += s.at(y);
            lo = std::min(lo, s[y]);
            hi = std::max(hi, s[y]);
        }
        out += std::to_string(y) + "," + fixed(sum / static_cast<double>(report.schedules.size())) + "," + fixed(lo) +
               "," + fixed(hi) + "\n";
    }
    return out;
}

void emit_metrics(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& metrics,
                  const std::vector<std::string>& goal_names) {
    write_text(path, metrics_csv(metrics, goal_names));
}

}  // namespace goalrl
