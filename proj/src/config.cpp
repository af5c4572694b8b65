#include "goalrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "goalrl/error.hpp"

namespace goalrl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Walks one JSON object, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ValidationError(path_ + " must be an object");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (v == nullptr) {
            throw ValidationError("missing required field " + field(key));
        }
        return *v;
    }

    void read(const std::string& key, double& out, bool required = false) {
        const json* v = required ? &require(key) : find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_number()) {
            throw ValidationError(field(key) + " must be a number");
        }
        out = v->get<double>();
    }

    void read(const std::string& key, int& out, bool required = false) {
        const json* v = required ? &require(key) : find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_number_integer()) {
            throw ValidationError(field(key) + " must be an integer");
        }
        const auto x = v->get<std::int64_t>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
            throw ValidationError(field(key) + " is out of range");
        }
        out = static_cast<int>(x);
    }

    void read(const std::string& key, std::int64_t& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_number_integer()) {
            throw ValidationError(field(key) + " must be an integer");
        }
        out = v->get<std::int64_t>();
    }

    void read(const std::string& key, std::uint64_t& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_number_unsigned()) {
            throw ValidationError(field(key) + " must be a nonnegative integer");
        }
        out = v->get<std::uint64_t>();
    }

    void read(const std::string& key, std::string& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_string()) {
            throw ValidationError(field(key) + " must be a string");
        }
        out = v->get<std::string>();
    }

    void read(const std::string& key, std::vector<int>& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& x) { return x.is_number_integer(); })) {
            throw ValidationError(field(key) + " must be an array of integers");
        }
        out = v->get<std::vector<int>>();
    }

    // A scalar applies to all three buckets.
    void read(const std::string& key, std::array<double, kNumBuckets>& out) {
        const json* v = find(key);
        if (v == nullptr) {
            return;
        }
        if (v->is_number()) {
            out.fill(v->get<double>());
            return;
        }
        if (!v->is_array() || v->size() != kNumBuckets ||
            !std::all_of(v->begin(), v->end(), [](const json& x) { return x.is_number(); })) {
            throw ValidationError(field(key) + " must be a number or an array of 3 numbers");
        }
        for (std::size_t i = 0; i < kNumBuckets; ++i) {
            out[i] = (*v)[i].get<double>();
        }
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!seen_.contains(item.key())) {
                throw ValidationError("unknown field " + field(item.key()));
            }
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_profile(Section& root, ClientProfile& p) {
    Section s(root.require("profile"), "profile");
    s.read("current_age", p.current_age, true);
    s.read("domicile", p.domicile);
    s.read("annual_income", p.annual_income, true);
    s.read("annual_spending", p.annual_spending, true);
    s.read("income_growth_rate", p.income_growth_rate);
    if (const json* b = s.find("balances")) {
        Section bs(*b, "profile.balances");
        bs.read("taxable", p.initial_balances.taxable);
        bs.read("tax_deferred", p.initial_balances.tax_deferred);
        bs.read("tax_free", p.initial_balances.tax_free);
        bs.finish();
    }
    s.finish();
}

void read_goals(Section& root, GoalSet& goals) {
    Section s(root.require("goals"), "goals");
    {
        Section r(s.require("retirement"), "goals.retirement");
        r.read("year", goals.retirement.target_year_index, true);
        r.read("annual_spending", goals.retirement.target_amount, true);
        r.read("threshold", goals.retirement.threshold);
        r.read("tolerance", goals.retirement.tolerance);
        r.finish();
    }
    if (const json* list = s.find("pre_retirement")) {
        if (!list->is_array()) {
            throw ValidationError("goals.pre_retirement must be an array");
        }
        for (std::size_t i = 0; i < list->size(); ++i) {
            Section g((*list)[i], "goals.pre_retirement[" + std::to_string(i) + "]");
            Goal goal;
            goal.name = "goal" + std::to_string(i + 1);
            g.read("name", goal.name);
            g.read("year", goal.target_year_index, true);
            g.read("amount", goal.target_amount, true);
            g.read("threshold", goal.threshold);
            g.finish();
            goals.pre_retirement.push_back(std::move(goal));
        }
        std::stable_sort(goals.pre_retirement.begin(), goals.pre_retirement.end(),
                         [](const Goal& a, const Goal& b) { return a.target_year_index < b.target_year_index; });
    }
    s.finish();
}

void read_market(Section& root, EnvConfig& env) {
    const json* node = root.find("market");
    if (node == nullptr) {
        return;
    }
    Section s(*node, "market");
    s.read("log_mean", env.market.log_mean);
    s.read("log_vol", env.market.log_vol);
    s.read("contribution_split", env.contribution_split);
    s.read("mc_paths", env.mc_paths);
    s.read("drawdown_years", env.drawdown_years);
    s.read("mc_threads", env.mc_threads);
    s.finish();
}

void read_reward(Section& root, RewardConfig& reward) {
    const json* node = root.find("reward");
    if (node == nullptr) {
        return;
    }
    Section s(*node, "reward");
    s.read("rho", reward.rho);
    s.read("rho_prime", reward.rho_prime);
    s.finish();
}

void read_agent(Section& root, AgentConfig& a) {
    const json* node = root.find("agent");
    if (node == nullptr) {
        return;
    }
    Section s(*node, "agent");
    s.read("gamma", a.gamma);
    s.read("learning_rate", a.learning_rate);
    s.read("batch_size", a.batch_size);
    s.read("target_sync_period", a.target_sync_period);
    s.read("warmup_transitions", a.warmup_transitions);
    s.read("replay_capacity", a.replay_capacity);
    s.read("train_every", a.train_every);
    s.read("hidden_sizes", a.hidden_sizes);
    s.finish();
}

void read_training(Section& root, TrainingConfig& t) {
    const json* node = root.find("training");
    if (node == nullptr) {
        return;
    }
    Section s(*node, "training");
    s.read("episodes", t.n_episodes);
    s.read("seed", t.seed);
    s.read("epsilon_start", t.schedule.start);
    s.read("epsilon_end", t.schedule.end);
    s.read("epsilon_decay_steps", t.schedule.decay_steps);
    s.read("moving_average_window", t.moving_average_window);
    s.finish();
}

void read_oracle(Section& root, OracleConfig& o) {
    const json* node = root.find("oracle");
    if (node == nullptr) {
        return;
    }
    Section s(*node, "oracle");
    s.read("wealth_levels", o.wealth_levels);
    s.read("horizon", o.horizon);
    s.read("actions", o.actions);
    s.read("saving_cost", o.saving_cost);
    s.read("goal_level_fraction", o.goal_level_fraction);
    s.read("episodes", o.dqn.episodes);
    s.read("max_episode_steps", o.dqn.max_episode_steps);
    s.read("gamma", o.dqn.gamma);
    s.read("learning_rate", o.dqn.agent.learning_rate);
    s.read("final_learning_rate", o.dqn.final_learning_rate);
    s.read("seed", o.dqn.seed);
    s.finish();
    o.dqn.agent.gamma = o.dqn.gamma;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ordered_json bucket_array(const std::array<double, kNumBuckets>& a) {
    return ordered_json::array({a[0], a[1], a[2]});
}

}  // namespace

ProfileDocument parse_profile(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(text, e.byte);
        throw ParseError("malformed profile document at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }

    ProfileDocument doc;
    TrainingConfig& t = doc.training;
    Section s(root, "");
    read_profile(s, t.env.profile);
    read_goals(s, t.env.goals);
    read_market(s, t.env);
    read_reward(s, t.env.reward);
    read_agent(s, t.agent);
    read_training(s, t);
    read_oracle(s, doc.oracle);
    s.finish();

    t.validate();
    doc.oracle.validate();
    return doc;
}

ProfileDocument load_profile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_profile(buf.str());
}

std::string to_json(const ProfileDocument& doc) {
    const TrainingConfig& t = doc.training;
    const EnvConfig& env = t.env;
    const ClientProfile& p = env.profile;

    ordered_json goals;
    goals["retirement"] = {{"year", env.goals.retirement.target_year_index},
                           {"annual_spending", env.goals.retirement.target_amount},
                           {"threshold", env.goals.retirement.threshold},
                           {"tolerance", env.goals.retirement.tolerance}};
    goals["pre_retirement"] = ordered_json::array();
    for (const Goal& g : env.goals.pre_retirement) {
        goals["pre_retirement"].push_back(
            {{"name", g.name}, {"year", g.target_year_index}, {"amount", g.target_amount}, {"threshold", g.threshold}});
    }

    ordered_json out;
    out["profile"] = {{"current_age", p.current_age},
                      {"domicile", p.domicile},
                      {"annual_income", p.annual_income},
                      {"annual_spending", p.annual_spending},
                      {"income_growth_rate", p.income_growth_rate},
                      {"balances",
                       {{"taxable", p.initial_balances.taxable},
                        {"tax_deferred", p.initial_balances.tax_deferred},
                        {"tax_free", p.initial_balances.tax_free}}}};
    out["goals"] = goals;
    out["market"] = {{"log_mean", bucket_array(env.market.log_mean)},
                     {"log_vol", bucket_array(env.market.log_vol)},
                     {"contribution_split", bucket_array(env.contribution_split)},
                     {"mc_paths", env.mc_paths},
                     {"drawdown_years", env.drawdown_years},
                     {"mc_threads", env.mc_threads}};
    out["reward"] = {{"rho", env.reward.rho}, {"rho_prime", env.reward.rho_prime}};
    out["agent"] = {{"gamma", t.agent.gamma},
                    {"learning_rate", t.agent.learning_rate},
                    {"batch_size", t.agent.batch_size},
                    {"target_sync_period", t.agent.target_sync_period},
                    {"warmup_transitions", t.agent.warmup_transitions},
                    {"replay_capacity", t.agent.replay_capacity},
                    {"train_every", t.agent.train_every},
                    {"hidden_sizes", t.agent.hidden_sizes}};
    out["training"] = {{"episodes", t.n_episodes},
                       {"seed", t.seed},
                       {"epsilon_start", t.schedule.start},
                       {"epsilon_end", t.schedule.end},
                       {"epsilon_decay_steps", t.schedule.decay_steps},
                       {"moving_average_window", t.moving_average_window}};
    const OracleConfig& o = doc.oracle;
    out["oracle"] = {{"wealth_levels", o.wealth_levels},
                     {"horizon", o.horizon},
                     {"actions", o.actions},
                     {"saving_cost", o.saving_cost},
                     {"goal_level_fraction", o.goal_level_fraction},
                     {"episodes", o.dqn.episodes},
                     {"max_episode_steps", o.dqn.max_episode_steps},
                     {"gamma", o.dqn.gamma},
                     {"learning_rate", o.dqn.agent.learning_rate},
                     {"final_learning_rate", o.dqn.final_learning_rate},
                     {"seed", o.dqn.seed}};
    return out.dump(2) + "\n";
}

}  // namespace goalrl
