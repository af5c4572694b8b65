#include "goalrl/goal_env.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "goalrl/error.hpp"

namespace goalrl {

namespace {

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("success probability must lie in [0, 1], got " + std::to_string(p));
    }
}

// Stream index 0 drives the episode's own market path; goal estimates use
// fresh streams so the replay noise is independent of the realized path.
constexpr std::uint64_t kMarketStream = 0;
constexpr std::uint64_t kEstimateStreamBase = 1;

}  // namespace

void Goal::validate() const {
    const std::string label = name.empty() ? std::string("goal") : "goal '" + name + "'";
    if (target_year_index < 1) {
        throw ValidationError(label + ": target year must be at least 1");
    }
    if (!(target_amount > 0.0) || !std::isfinite(target_amount)) {
        throw ValidationError(label + ": amount must be positive");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ValidationError(label + ": threshold must lie in (0, 1)");
    }
    if (kind == GoalKind::retirement && !(tolerance >= 0.0 && threshold + tolerance <= 1.0)) {
        throw ValidationError(label + ": tolerance must be nonnegative with threshold + tolerance <= 1");
    }
}

void GoalSet::validate() const {
    if (retirement.kind != GoalKind::retirement) {
        throw ValidationError("goal set: retirement goal has the wrong kind");
    }
    retirement.validate();
    if (pre_retirement.size() > static_cast<std::size_t>(kMaxCustomGoals)) {
        throw ValidationError("goal set: at most 3 pre-retirement goals are supported");
    }
    std::set<int> years{retirement.target_year_index};
    int previous = 0;
    for (const auto& g : pre_retirement) {
        if (g.kind != GoalKind::pre_retirement) {
            throw ValidationError("goal set: pre-retirement goal has the wrong kind");
        }
        g.validate();
        if (g.target_year_index >= retirement.target_year_index) {
            throw ValidationError("goal set: pre-retirement goal '" + g.name + "' must precede retirement");
        }
        if (!years.insert(g.target_year_index).second) {
            throw ValidationError("goal set: goal target years must be distinct");
        }
        if (g.target_year_index < previous) {
            throw ValidationError("goal set: pre-retirement goals must be sorted by target year");
        }
        previous = g.target_year_index;
    }
}

void RewardConfig::validate() const {
    if (!(rho > 0.0) || !(rho_prime > 0.0)) {
        throw ValidationError("reward: rho and rho_prime must be positive");
    }
}

void EnvConfig::validate() const {
    profile.validate();
    goals.validate();
    market.validate();
    reward.validate();
    double sum = 0.0;
    for (double f : contribution_split) {
        if (f < 0.0) {
            throw ValidationError("contribution split fractions must be nonnegative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("contribution split fractions must sum to 1");
    }
    if (mc_paths < 1) {
        throw ValidationError("mc_paths must be at least 1");
    }
    if (drawdown_years < 1) {
        throw ValidationError("drawdown_years must be at least 1");
    }
    if (mc_threads < 1) {
        throw ValidationError("mc_threads must be at least 1");
    }
}

double max_contribution(const ClientProfile& profile, int year_index) {
    return std::max(0.0, profile.income_at(year_index) - profile.annual_spending);
}

double action_to_contribution(int action, double c_max) {
    if (action < 0 || action >= kNumActions) {
        throw DomainError("action index must lie in [0, 20], got " + std::to_string(action));
    }
    return 0.05 * action * c_max;
}

double pre_retirement_reward(double p_actual, const Goal& goal, const RewardConfig& cfg) {
    check_probability(p_actual);
    if (p_actual >= goal.threshold) {
        return cfg.rho;
    }
    return cfg.rho_prime * (p_actual - goal.threshold);
}

double retirement_reward(double p_actual, const Goal& goal, const RewardConfig& cfg) {
    check_probability(p_actual);
    const double upper = goal.threshold + goal.tolerance;
    if (p_actual < goal.threshold) {
        return cfg.rho_prime * (p_actual - goal.threshold);
    }
    if (p_actual > upper) {
        return cfg.rho_prime * (upper - p_actual);
    }
    return cfg.rho;
}

GoalEnv::GoalEnv(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
}

EnvState GoalEnv::reset(std::uint64_t seed) {
    seed_ = seed;
    market_rng_ = RngStream(seed, kMarketStream);
    year_ = 0;
    done_ = false;
    balances_ = config_.profile.initial_balances;
    total_contribution_ = 0.0;
    contributions_.clear();
    contributions_.reserve(static_cast<std::size_t>(config_.goals.horizon()));
    return encode_state();
}

MonteCarloOptions GoalEnv::mc_options(int slot, int before_year) const {
    MonteCarloOptions options;
    options.n_paths = config_.mc_paths;
    options.seed = derive_seed(seed_, kEstimateStreamBase + static_cast<std::uint64_t>(slot));
    options.threads = config_.mc_threads;
    options.split = config_.contribution_split;
    for (const auto& g : config_.goals.pre_retirement) {
        if (g.target_year_index < before_year) {
            options.withdrawals.push_back({g.target_year_index, g.target_amount});
        }
    }
    return options;
}

StepResult GoalEnv::step(int action) {
    if (done_) {
        throw StateError("step called on a finished episode; call reset first");
    }
    const double contribution = action_to_contribution(action, max_contribution(config_.profile, year_));
    balances_ = step_year(balances_, contribution, config_.contribution_split,
                          sample_year_factors(config_.market, market_rng_));
    contributions_.push_back(contribution);
    total_contribution_ += contribution;
    ++year_;

    StepResult result;
    const auto& goals = config_.goals;
    for (std::size_t k = 0; k < goals.pre_retirement.size(); ++k) {
        const Goal& g = goals.pre_retirement[k];
        if (g.target_year_index != year_) {
            continue;
        }
        const int slot = static_cast<int>(k);
        const double p = estimate_goal_success(config_.profile, contributions_, g.target_amount, year_,
                                               config_.market, mc_options(slot, year_));
        result.reward += pre_retirement_reward(p, g, config_.reward);
        result.info.push_back({slot, p});
        balances_ = withdraw_for_goal(balances_, g.target_amount).balances;
    }
    if (year_ == goals.retirement.target_year_index) {
        const double p = estimate_retirement_success(config_.profile, contributions_, goals.retirement.target_amount,
                                                     config_.drawdown_years, config_.market,
                                                     mc_options(kRetirementSlot, year_));
        result.reward += retirement_reward(p, goals.retirement, config_.reward);
        result.info.push_back({kRetirementSlot, p});
        done_ = true;
    }
    result.done = done_;
    result.next_state = encode_state();
    return result;
}

EnvState GoalEnv::encode_state() const {
    namespace si = state_index;
    const auto& p = config_.profile;
    const auto& goals = config_.goals;
    EnvState s{};
    s[si::age] = (p.current_age + year_) / kYearUnit;
    s[si::domicile] = static_cast<double>(p.domicile);
    s[si::income] = p.income_at(year_) / kMoneyUnit;
    s[si::spending] = p.annual_spending / kMoneyUnit;
    s[si::taxable] = balances_.taxable / kMoneyUnit;
    s[si::tax_deferred] = balances_.tax_deferred / kMoneyUnit;
    s[si::tax_free] = balances_.tax_free / kMoneyUnit;
    s[si::total_contribution] = total_contribution_ / kMoneyUnit;
    s[si::n_custom_goals] = static_cast<double>(goals.pre_retirement.size()) / kYearUnit;
    s[si::retirement_years_left] = std::max(0, goals.retirement.target_year_index - year_) / kYearUnit;
    s[si::retirement_amount] = goals.retirement.target_amount / kMoneyUnit;
    for (std::size_t k = 0; k < goals.pre_retirement.size(); ++k) {
        const Goal& g = goals.pre_retirement[k];
        const int slot = static_cast<int>(k);
        s[si::goal_years_left(slot)] = std::max(0, g.target_year_index - year_) / kYearUnit;
        s[si::goal_amount(slot)] = g.target_amount / kMoneyUnit;
    }
    return s;
}

}  // namespace goalrl
