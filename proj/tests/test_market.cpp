#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "goalrl/error.hpp"
#include "goalrl/market.hpp"

using namespace goalrl;

namespace {

const MarketModel kFlat = MarketModel::uniform(0.0, 0.0);

ClientProfile with_taxable(double amount) {
    ClientProfile p;
    p.annual_income = 100000;
    p.annual_spending = 80000;
    p.initial_balances.taxable = amount;
    return p;
}

MonteCarloOptions paths(int n, std::uint64_t seed = 0, int threads = 1) {
    MonteCarloOptions o;
    o.n_paths = n;
    o.seed = seed;
    o.threads = threads;
    return o;
}

}  // namespace

TEST(Rng, SameSeedAndCounterSameDraws) {
    RngStream a(42, 3, 17);
    RngStream b(42, 3, 17);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
    RngStream c(42, 4, 17);
    EXPECT_NE(RngStream(42, 3, 17).next_u64(), c.next_u64());
}

TEST(Rng, NormalUsesTwoCounters) {
    RngStream r(1);
    r.normal();
    EXPECT_EQ(r.counter(), 2u);
}

TEST(SampleAnnualReturn, DegenerateDistribution) {
    const auto model = MarketModel::uniform(std::log(1.05), 0.0);
    RngStream rng(0);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(sample_annual_return(model, Bucket::tax_free, rng), std::exp(std::log(1.05)));
        EXPECT_NEAR(sample_annual_return(model, Bucket::taxable, rng), 1.05, 1e-15);
    }
}

TEST(SampleAnnualReturn, Deterministic) {
    const auto model = MarketModel::defaults();
    RngStream a(9, 0, 40);
    RngStream b(9, 0, 40);
    EXPECT_EQ(sample_annual_return(model, Bucket::taxable, a), sample_annual_return(model, Bucket::taxable, b));
}

TEST(SampleAnnualReturn, LognormalMean) {
    const auto model = MarketModel::defaults();
    RngStream rng(2024);
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_annual_return(model, Bucket::taxable, rng);
        ASSERT_GT(x, 0.0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    // exp(ln 1.05 + 0.12^2 / 2), from tests/oracle/derive.py
    EXPECT_NEAR(mean, 1.0575872814361427, 3.0 * se);
}

TEST(StepYear, Examples) {
    AccountBalances b;
    b.taxable = 100000;
    const BucketFractions all_taxable{1, 0, 0};
    const auto next = step_year(b, 10000, all_taxable, {1.05, 1.05, 1.05});
    EXPECT_NEAR(next.taxable, 115500.0, 1e-9);
    EXPECT_EQ(next.tax_deferred, 0.0);

    AccountBalances c{1, 2, 3};
    EXPECT_EQ(step_year(c, 0, all_taxable, {1, 1, 1}), c);
    EXPECT_EQ(step_year(AccountBalances{}, 0, all_taxable, {1.1, 0.9, 1.2}), AccountBalances{});
    EXPECT_THROW(step_year(c, -1, all_taxable, {1, 1, 1}), DomainError);
}

TEST(StepYear, ConservesMoneyAtUnitFactors) {
    RngStream rng(5);
    for (int i = 0; i < 200; ++i) {
        const AccountBalances b{1e5 * rng.uniform(), 1e5 * rng.uniform(), 1e5 * rng.uniform()};
        const double c = 3e4 * rng.uniform();
        const double f0 = rng.uniform();
        const double f1 = (1.0 - f0) * rng.uniform();
        const BucketFractions split{f0, f1, 1.0 - f0 - f1};
        const auto next = step_year(b, c, split, {1, 1, 1});
        EXPECT_NEAR(next.total(), b.total() + c, 1e-8);
    }
}

TEST(WithdrawForGoal, Examples) {
    const auto r = withdraw_for_goal({50000, 0, 0}, 20000);
    EXPECT_EQ(r.balances, (AccountBalances{30000, 0, 0}));
    EXPECT_EQ(r.withdrawn, 20000.0);

    const AccountBalances b{1, 2, 3};
    const auto none = withdraw_for_goal(b, 0);
    EXPECT_EQ(none.balances, b);
    EXPECT_EQ(none.withdrawn, 0.0);

    const auto clamp = withdraw_for_goal({4000, 3000, 3000}, 25000);
    EXPECT_EQ(clamp.balances, AccountBalances{});
    EXPECT_EQ(clamp.withdrawn, 10000.0);
}

TEST(WithdrawForGoal, DrainOrderTaxableTaxFreeTaxDeferred) {
    const auto r = withdraw_for_goal({100, 300, 200}, 250);
    EXPECT_EQ(r.balances.taxable, 0.0);
    EXPECT_EQ(r.balances.tax_free, 50.0);
    EXPECT_EQ(r.balances.tax_deferred, 300.0);
}

TEST(WithdrawForGoal, Conservation) {
    RngStream rng(6);
    for (int i = 0; i < 200; ++i) {
        const AccountBalances b{1e4 * rng.uniform(), 1e4 * rng.uniform(), 1e4 * rng.uniform()};
        const double amount = 4e4 * rng.uniform();
        const auto r = withdraw_for_goal(b, amount);
        EXPECT_NEAR(r.balances.total(), b.total() - r.withdrawn, 1e-9);
        EXPECT_GE(r.balances.taxable, 0.0);
        EXPECT_GE(r.balances.tax_deferred, 0.0);
        EXPECT_GE(r.balances.tax_free, 0.0);
        EXPECT_LE(r.withdrawn, amount);
    }
}

TEST(EstimateGoalSuccess, DeterministicOutcomes) {
    // 100k now, 20k contributed once, flat market: 120k at year 1.
    const auto p = with_taxable(100000);
    const std::vector<double> c{20000};
    EXPECT_EQ(estimate_goal_success(p, c, 100000, 1, kFlat, paths(50)), 1.0);
    EXPECT_EQ(estimate_goal_success(p, c, 200000, 1, kFlat, paths(50)), 0.0);
}

TEST(EstimateGoalSuccess, LengthMismatch) {
    const std::vector<double> c{1, 2};
    EXPECT_THROW(estimate_goal_success(with_taxable(0), c, 1, 3, kFlat, paths(10)), ShapeError);
}

TEST(EstimateRetirementSuccess, Examples) {
    const std::vector<double> none;
    // 1M at retirement, 40k a year for 25 years at unit growth: depleted exactly at the end.
    EXPECT_EQ(estimate_retirement_success(with_taxable(1e6), none, 40000, 25, kFlat, paths(20)), 1.0);
    EXPECT_EQ(estimate_retirement_success(with_taxable(1e6), none, 40000, 26, kFlat, paths(20)), 0.0);
    EXPECT_EQ(estimate_retirement_success(with_taxable(0), none, 0, 30, MarketModel::defaults(), paths(20)), 1.0);
    EXPECT_EQ(estimate_retirement_success(with_taxable(0), none, 1, 30, MarketModel::defaults(), paths(20)), 0.0);
}

TEST(Estimators, AlwaysProbabilities) {
    RngStream rng(77);
    const auto model = MarketModel::defaults();
    for (int i = 0; i < 20; ++i) {
        std::vector<double> c(5);
        for (double& x : c) {
            x = 20000 * rng.uniform();
        }
        const auto prof = with_taxable(50000 * rng.uniform());
        const double g = estimate_goal_success(prof, c, 150000 * rng.uniform(), 5, model, paths(200, i));
        const double r = estimate_retirement_success(prof, c, 30000 * rng.uniform(), 10, model, paths(200, i));
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, 1.0);
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
    }
}

TEST(Estimators, MonotoneInContributionsWithoutNoise) {
    const auto model = MarketModel::uniform(std::log(1.05), 0.0);
    const auto prof = with_taxable(10000);
    std::vector<double> c(8, 5000.0);
    double last_goal = -1.0;
    double last_ret = -1.0;
    for (int k = 0; k < 30; ++k) {
        const double g = estimate_goal_success(prof, c, 90000, 8, model, paths(5));
        const double r = estimate_retirement_success(prof, c, 12000, 10, model, paths(5));
        EXPECT_GE(g, last_goal);
        EXPECT_GE(r, last_ret);
        last_goal = g;
        last_ret = r;
        for (double& x : c) {
            x += 1000.0;
        }
    }
    EXPECT_EQ(last_goal, 1.0);
}

TEST(Estimators, IndependentOfThreadCount) {
    const auto model = MarketModel::defaults();
    const auto prof = with_taxable(20000);
    const std::vector<double> c(10, 15000.0);
    const double g1 = estimate_goal_success(prof, c, 200000, 10, model, paths(999, 7, 1));
    const double r1 = estimate_retirement_success(prof, c, 20000, 30, model, paths(999, 7, 1));
    for (int t : {2, 3, 8}) {
        EXPECT_EQ(estimate_goal_success(prof, c, 200000, 10, model, paths(999, 7, t)), g1);
        EXPECT_EQ(estimate_retirement_success(prof, c, 20000, 30, model, paths(999, 7, t)), r1);
    }
}

TEST(Estimators, PriorWithdrawalsReduceSuccess) {
    const auto model = MarketModel::uniform(0.0, 0.0);
    const auto prof = with_taxable(100000);
    const std::vector<double> c(5, 0.0);
    auto opts = paths(10);
    EXPECT_EQ(estimate_goal_success(prof, c, 100000, 5, model, opts), 1.0);
    opts.withdrawals.push_back({2, 1.0});
    EXPECT_EQ(estimate_goal_success(prof, c, 100000, 5, model, opts), 0.0);
}
