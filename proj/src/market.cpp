#include "goalrl/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "goalrl/error.hpp"

namespace goalrl {

namespace {

// Runs one Bernoulli trial per path and counts successes. Each path owns its
// stream, so the count is independent of how paths are spread over threads.
template <typename PathFn>
double success_fraction(int n_paths, int threads, PathFn&& path_succeeds) {
    std::vector<unsigned char> outcome(static_cast<std::size_t>(n_paths), 0);
    const int workers = std::clamp(threads, 1, n_paths);
    if (workers == 1) {
        for (int i = 0; i < n_paths; ++i) {
            outcome[i] = path_succeeds(i) ? 1 : 0;
        }
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < n_paths; i += workers) {
                    outcome[i] = path_succeeds(i) ? 1 : 0;
                }
            });
        }
    }
    long count = 0;
    for (unsigned char o : outcome) {
        count += o;
    }
    return static_cast<double>(count) / n_paths;
}

void check_options(const MonteCarloOptions& options) {
    if (options.n_paths < 1) {
        throw DomainError("n_paths must be at least 1");
    }
}

// Replays the accumulation phase for one path and returns the balances at
// the end of year `years`. Withdrawals scheduled for year `years` itself are
// not applied; callers decide what happens at the horizon.
AccountBalances accumulate(const ClientProfile& profile, std::span<const double> contributions, int years,
                           const MarketModel& model, const MonteCarloOptions& options, RngStream& rng) {
    AccountBalances balances = profile.initial_balances;
    for (int y = 0; y < years; ++y) {
        balances = step_year(balances, contributions[y], options.split, sample_year_factors(model, rng));
        for (const auto& w : options.withdrawals) {
            if (w.year_index == y + 1 && w.year_index < years) {
                balances = withdraw_for_goal(balances, w.amount).balances;
            }
        }
    }
    return balances;
}

}  // namespace

double& AccountBalances::operator[](Bucket b) {
    switch (b) {
        case Bucket::taxable: return taxable;
        case Bucket::tax_deferred: return tax_deferred;
        case Bucket::tax_free: return tax_free;
    }
    throw DomainError("unknown bucket");
}

double AccountBalances::operator[](Bucket b) const {
    return const_cast<AccountBalances&>(*this)[b];
}

MarketModel MarketModel::defaults() {
    return uniform(std::log(1.05), 0.12);
}

MarketModel MarketModel::uniform(double log_mean, double log_vol) {
    MarketModel m;
    m.log_mean.fill(log_mean);
    m.log_vol.fill(log_vol);
    return m;
}

void MarketModel::validate() const {
    for (int b = 0; b < kNumBuckets; ++b) {
        if (!std::isfinite(log_mean[b]) || !std::isfinite(log_vol[b]) || log_vol[b] < 0.0) {
            throw ValidationError("market model: log_vol must be finite and nonnegative");
        }
    }
}

double ClientProfile::income_at(int year_index) const {
    return annual_income * std::pow(1.0 + income_growth_rate, year_index);
}

void ClientProfile::validate() const {
    if (!(current_age > 0.0)) {
        throw ValidationError("profile: current_age must be positive");
    }
    if (!(annual_income >= 0.0) || !(annual_spending >= 0.0)) {
        throw ValidationError("profile: income and spending must be nonnegative");
    }
    if (initial_balances.taxable < 0.0 || initial_balances.tax_deferred < 0.0 || initial_balances.tax_free < 0.0) {
        throw ValidationError("profile: balances must be nonnegative");
    }
    if (!(income_growth_rate > -1.0)) {
        throw ValidationError("profile: income_growth_rate must exceed -1");
    }
}

double sample_annual_return(const MarketModel& model, Bucket bucket, RngStream& rng) {
    const auto b = static_cast<int>(bucket);
    const double z = rng.normal();
    return std::exp(model.log_mean[b] + model.log_vol[b] * z);
}

BucketFactors sample_year_factors(const MarketModel& model, RngStream& rng) {
    return {sample_annual_return(model, Bucket::taxable, rng), sample_annual_return(model, Bucket::tax_deferred, rng),
            sample_annual_return(model, Bucket::tax_free, rng)};
}

AccountBalances step_year(const AccountBalances& balances, double contribution, const BucketFractions& split,
                          const BucketFactors& factors) {
    if (!(contribution >= 0.0)) {
        throw DomainError("contribution must be nonnegative, got " + std::to_string(contribution));
    }
    AccountBalances out;
    for (int b = 0; b < kNumBuckets; ++b) {
        const auto bucket = static_cast<Bucket>(b);
        out[bucket] = (balances[bucket] + contribution * split[b]) * factors[b];
    }
    return out;
}

WithdrawResult withdraw_for_goal(const AccountBalances& balances, double amount) {
    if (!(amount >= 0.0)) {
        throw DomainError("withdrawal amount must be nonnegative");
    }
    WithdrawResult out{balances, 0.0};
    double remaining = amount;
    for (Bucket b : {Bucket::taxable, Bucket::tax_free, Bucket::tax_deferred}) {
        const double take = std::min(remaining, out.balances[b]);
        out.balances[b] -= take;
        remaining -= take;
    }
    out.withdrawn = amount - remaining;
    return out;
}

double estimate_goal_success(const ClientProfile& profile, std::span<const double> contributions, double goal_amount,
                             int goal_year_index, const MarketModel& model, const MonteCarloOptions& options) {
    check_options(options);
    if (goal_year_index < 0 || contributions.size() != static_cast<std::size_t>(goal_year_index)) {
        throw ShapeError("contribution sequence length " + std::to_string(contributions.size()) +
                         " does not match goal year " + std::to_string(goal_year_index));
    }
    return success_fraction(options.n_paths, options.threads, [&](int path) {
        RngStream rng(options.seed, static_cast<std::uint64_t>(path));
        const AccountBalances at_goal = accumulate(profile, contributions, goal_year_index, model, options, rng);
        return at_goal.total() >= goal_amount;
    });
}

double estimate_retirement_success(const ClientProfile& profile, std::span<const double> contributions,
                                   double annual_spending, int drawdown_years, const MarketModel& model,
                                   const MonteCarloOptions& options) {
    check_options(options);
    if (drawdown_years < 1) {
        throw DomainError("drawdown_years must be at least 1");
    }
    if (!(annual_spending >= 0.0)) {
        throw DomainError("annual spending must be nonnegative");
    }
    const int retirement_year = static_cast<int>(contributions.size());
    return success_fraction(options.n_paths, options.threads, [&](int path) {
        RngStream rng(options.seed, static_cast<std::uint64_t>(path));
        AccountBalances balances = accumulate(profile, contributions, retirement_year, model, options, rng);
        for (int k = 0; k < drawdown_years; ++k) {
            if (balances.total() < annual_spending) {
                return false;
            }
            balances = withdraw_for_goal(balances, annual_spending).balances;
            balances = step_year(balances, 0.0, options.split, sample_year_factors(model, rng));
        }
        return true;
    });
}

}  // namespace goalrl
