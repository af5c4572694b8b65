#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "goalrl/market.hpp"
#include "goalrl/rng.hpp"

namespace goalrl {

inline constexpr int kStateDim = 17;
inline constexpr int kNumActions = 21;
inline constexpr int kMaxCustomGoals = 3;

// Observations divide by these so that round figures encode exactly.
inline constexpr double kMoneyUnit = 1e6;
inline constexpr double kYearUnit = 1e2;

/// Observation layout. Monetary entries are in millions, year counts (and
/// the goal count) in hundreds; empty goal slots are zero.
namespace state_index {
inline constexpr int age = 0;
inline constexpr int domicile = 1;
inline constexpr int income = 2;
inline constexpr int spending = 3;
inline constexpr int taxable = 4;
inline constexpr int tax_deferred = 5;
inline constexpr int tax_free = 6;
inline constexpr int total_contribution = 7;
inline constexpr int n_custom_goals = 8;
inline constexpr int retirement_years_left = 9;
inline constexpr int retirement_amount = 10;
inline constexpr int goal_years_left(int slot) { return 11 + 2 * slot; }
inline constexpr int goal_amount(int slot) { return 12 + 2 * slot; }
}  // namespace state_index

using EnvState = std::array<double, kStateDim>;

enum class GoalKind { pre_retirement, retirement };

struct Goal {
    GoalKind kind = GoalKind::pre_retirement;
    std::string name;
    int target_year_index = 1;
    /// Lump sum for pre-retirement goals; annual spending for retirement.
    double target_amount = 0.0;
    double threshold = 0.70;
    /// Width of the acceptable band above threshold; retirement only.
    double tolerance = 0.06;

    void validate() const;
    bool operator==(const Goal&) const = default;
};

/// One retirement goal plus up to kMaxCustomGoals pre-retirement goals,
/// kept sorted by target year.
struct GoalSet {
    Goal retirement{GoalKind::retirement, "retirement", 30, 40000.0, 0.70, 0.06};
    std::vector<Goal> pre_retirement;

    void validate() const;
    int horizon() const { return retirement.target_year_index; }
    bool operator==(const GoalSet&) const = default;
};

struct RewardConfig {
    double rho = 10.0;
    double rho_prime = 100.0;

    void validate() const;
    bool operator==(const RewardConfig&) const = default;
};

/// Everything needed to instantiate the planning environment.
struct EnvConfig {
    ClientProfile profile;
    GoalSet goals;
    MarketModel market = MarketModel::defaults();
    RewardConfig reward;
    BucketFractions contribution_split{1.0, 0.0, 0.0};
    int mc_paths = 1000;
    int drawdown_years = 30;
    int mc_threads = 1;

    void validate() const;
    bool operator==(const EnvConfig&) const = default;
};

/// Success probability observed for one goal on the step its year arrives.
/// slot 0..2 are pre-retirement goals in year order, kRetirementSlot is retirement.
struct GoalObservation {
    int slot = 0;
    double success_probability = 0.0;
};

inline constexpr int kRetirementSlot = kMaxCustomGoals;

struct StepResult {
    EnvState next_state{};
    double reward = 0.0;
    bool done = false;
    std::vector<GoalObservation> info;
};

double max_contribution(const ClientProfile& profile, int year_index);

double action_to_contribution(int action, double c_max);

double pre_retirement_reward(double p_actual, const Goal& goal, const RewardConfig& cfg);

double retirement_reward(double p_actual, const Goal& goal, const RewardConfig& cfg);

/// Annual multi-goal planning environment.
///
/// Each step is one year: the action picks a contribution on the 21-level
/// grid over [0, C_max], balances advance with one market draw, and goal
/// years pay the sparse reward computed from a Monte Carlo replay of the
/// contributions made so far. Not thread-safe; use one instance per thread.
class GoalEnv {
public:
    explicit GoalEnv(EnvConfig config);

    EnvState reset(std::uint64_t seed);
    StepResult step(int action);
    EnvState encode_state() const;

    bool done() const { return done_; }
    int year() const { return year_; }
    const AccountBalances& balances() const { return balances_; }
    const std::vector<double>& contributions() const { return contributions_; }
    const EnvConfig& config() const { return config_; }

private:
    MonteCarloOptions mc_options(int slot, int before_year) const;

    EnvConfig config_;
    std::uint64_t seed_ = 0;
    RngStream market_rng_;
    int year_ = 0;
    bool done_ = true;
    AccountBalances balances_;
    double total_contribution_ = 0.0;
    std::vector<double> contributions_;
};

}  // namespace goalrl
