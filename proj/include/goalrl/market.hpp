#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "goalrl/rng.hpp"

namespace goalrl {

enum class Bucket : int { taxable = 0, tax_deferred = 1, tax_free = 2 };

inline constexpr int kNumBuckets = 3;

struct AccountBalances {
    double taxable = 0.0;
    double tax_deferred = 0.0;
    double tax_free = 0.0;

    double total() const { return taxable + tax_deferred + tax_free; }
    double& operator[](Bucket b);
    double operator[](Bucket b) const;

    bool operator==(const AccountBalances&) const = default;
};

using BucketFractions = std::array<double, kNumBuckets>;
using BucketFactors = std::array<double, kNumBuckets>;

/// Per-bucket i.i.d. lognormal annual gross returns.
struct MarketModel {
    std::array<double, kNumBuckets> log_mean;
    std::array<double, kNumBuckets> log_vol;

    /// ln(1.05) mean, 0.12 volatility in every bucket.
    static MarketModel defaults();
    static MarketModel uniform(double log_mean, double log_vol);

    void validate() const;
    bool operator==(const MarketModel&) const = default;
};

/// Demographic and financial starting conditions of one investor.
struct ClientProfile {
    double current_age = 35.0;
    int domicile = 0;
    double annual_income = 0.0;
    double annual_spending = 0.0;
    AccountBalances initial_balances;
    double income_growth_rate = 0.0;

    double income_at(int year_index) const;
    void validate() const;
    bool operator==(const ClientProfile&) const = default;
};

/// A goal expenditure that leaves the portfolio at the end of a given year.
struct ScheduledWithdrawal {
    int year_index = 0;
    double amount = 0.0;
};

struct WithdrawResult {
    AccountBalances balances;
    double withdrawn = 0.0;
};

struct MonteCarloOptions {
    int n_paths = 1000;
    std::uint64_t seed = 0;
    /// Worker threads for path fan-out. Results do not depend on this.
    int threads = 1;
    BucketFractions split{1.0, 0.0, 0.0};
    /// Earlier goal withdrawals replayed during accumulation.
    std::vector<ScheduledWithdrawal> withdrawals;
};

double sample_annual_return(const MarketModel& model, Bucket bucket, RngStream& rng);

/// One factor per bucket, drawn in bucket order.
BucketFactors sample_year_factors(const MarketModel& model, RngStream& rng);

/// Contribute, then grow: new_b = (old_b + contribution * split_b) * factor_b.
AccountBalances step_year(const AccountBalances& balances, double contribution, const BucketFractions& split,
                          const BucketFactors& factors);

/// Takes min(amount, total), draining taxable, then tax_free, then tax_deferred.
WithdrawResult withdraw_for_goal(const AccountBalances& balances, double amount);

/// Fraction of paths whose total balance at goal_year_index reaches goal_amount.
/// contributions[y] is the contribution made during year y.
double estimate_goal_success(const ClientProfile& profile, std::span<const double> contributions, double goal_amount,
                             int goal_year_index, const MarketModel& model, const MonteCarloOptions& options);

/// Fraction of paths that fund annual_spending at the start of each of
/// drawdown_years retirement years without running out first.
double estimate_retirement_success(const ClientProfile& profile, std::span<const double> contributions,
                                   double annual_spending, int drawdown_years, const MarketModel& model,
                                   const MonteCarloOptions& options);

}  // namespace goalrl
