#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "builders.hpp"
#include "equiplan/utility.hpp"

using namespace equiplan;

TEST(Sigmoid, InflectionAndLimits) {
    EXPECT_DOUBLE_EQ(sigmoid_rate_utility(7.0, 7.0, 3.0), 0.5);
    EXPECT_NEAR(sigmoid_rate_utility(1e6, 1.0, 10.0), 1.0, 1e-15);
    EXPECT_NEAR(sigmoid_rate_utility(0.0, 1.0, 10.0), 1.0 / (1.0 + std::exp(10.0)), 1e-18);
}

TEST(Sigmoid, ExtremeArgumentsStayFinite) {
    double v = sigmoid_rate_utility(0.0, 80.0, 10.0);  // theta (r - r_hat) = -800
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, 0.0, 1e-12);
    EXPECT_EQ(sigmoid_rate_utility(1e300, 0.0, 1e10), 1.0);
}

TEST(Sigmoid, StrictlyIncreasingOnRandomGrids) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> rh(0.5, 100.0), th(0.05, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        double r_hat = rh(rng), theta = th(rng);
        double prev = -1;
        for (int i = 0; i <= 200; ++i) {
            // stay inside the band where doubles still resolve the change
            double r = r_hat + (i - 100) * 0.1 / theta;
            double v = sigmoid_rate_utility(r, r_hat, theta);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

namespace {

Scenario one_area(int users, ScenarioParams p) {
    std::vector<HouseholdProfile> hs;
    for (int i = 0; i < users; ++i) hs.push_back(oracle::household("k" + std::to_string(i), 1, 10, p.horizon));
    return Scenario(std::move(hs), p);
}

}  // namespace

TEST(PerceivedRate, SplitsByShare) {
    auto sc2 = one_area(2, build::params(2, 100, 0));
    auto plan = make_plan(sc2, std::vector<int>{1}, std::vector<double>{10}, std::vector<double>{0.5, 0.5});
    EXPECT_DOUBLE_EQ(perceived_rate(sc2, plan, 0), 5.0);
    EXPECT_DOUBLE_EQ(perceived_rate(sc2, plan, 1), 5.0);

    plan = make_plan(sc2, std::vector<int>{1}, std::vector<double>{7}, std::vector<double>{1, 0});
    EXPECT_DOUBLE_EQ(perceived_rate(sc2, plan, 0), 7.0);
    EXPECT_DOUBLE_EQ(perceived_rate(sc2, plan, 1), 0.0);

    auto sc3 = one_area(3, build::params(2, 100, 0));
    plan = make_plan(sc3, std::vector<int>{2}, std::vector<double>{100}, std::vector<double>{0.2, 0.3, 0.5});
    EXPECT_NEAR(perceived_rate(sc3, plan, 0), 20.0, 1e-12);
    EXPECT_NEAR(perceived_rate(sc3, plan, 1), 30.0, 1e-12);
    EXPECT_NEAR(perceived_rate(sc3, plan, 2), 50.0, 1e-12);

    plan = make_plan(sc3, std::vector<int>{0}, std::vector<double>{100}, std::vector<double>{0.2, 0.3, 0.5});
    EXPECT_EQ(perceived_rate(sc3, plan, 2), 0.0);
}

TEST(UserUtility, DeadlineAndServiceRules) {
    // race 3 gives tau = 3 under the default tau source
    auto sc = build::singles({4.0}, {2}, build::params(4, 100, 1), {3});
    auto at = [&](int slot) {
        return make_plan(sc, std::vector<int>{slot}, std::vector<double>{4.0}, std::vector<double>{1.0});
    };
    EXPECT_DOUBLE_EQ(user_utility(sc, at(2), 0), 1.5);
    EXPECT_DOUBLE_EQ(user_utility(sc, at(1), 0), 1.5);
    EXPECT_EQ(user_utility(sc, at(3), 0), 0.0);  // one slot past the deadline
    EXPECT_EQ(user_utility(sc, at(0), 0), 0.0);

    auto late_rich = make_plan(sc, std::vector<int>{3}, std::vector<double>{100.0}, std::vector<double>{1.0});
    EXPECT_EQ(user_utility(sc, late_rich, 0), 0.0);
}

TEST(TotalObjective, Composition) {
    Scenario empty;
    EXPECT_EQ(total_true_objective(empty, empty_plan(empty)), 0.0);

    ScenarioParams p = build::params(3, 50, 1);
    p.tau_source = TauSource::income;
    std::vector<HouseholdProfile> hs{oracle::household("a", 1, 8, 3, 1, /*income*/ 5)};
    Scenario sc(hs, p);
    auto plan = make_plan(sc, std::vector<int>{1}, std::vector<double>{8}, std::vector<double>{1});
    EXPECT_DOUBLE_EQ(total_true_objective(sc, plan), 2.5);
}

TEST(TotalObjective, AllocationFormMatchesShareForm) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto sc = oracle::tiny_instance(rng);
        auto plan = build::random_plan(sc, rng);
        EXPECT_NEAR(objective_from_allocation(sc, plan), total_true_objective(sc, plan), 1e-9);
    }
}

TEST(Validate, ZeroPlanIsFeasible) {
    auto sc = build::singles({1, 10}, {2, 3}, build::params(3, 10, 1));
    EXPECT_TRUE(validate_feasibility(sc, empty_plan(sc)).empty());
}

TEST(Validate, AreaServedTwice) {
    auto sc = build::singles({1}, {3}, build::params(3, 10, 0));
    auto plan = make_plan(sc, std::vector<int>{1}, std::vector<double>{2}, std::vector<double>{1});
    plan.z(0, 2) = 1;
    refresh_allocation(sc, plan);
    auto v = validate_feasibility(sc, plan);
    ASSERT_FALSE(v.empty());
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.tag == violation::once_served; }));
}

TEST(Validate, WindowSpansFreezeout) {
    auto sc = build::singles({1, 1}, {2, 2}, build::params(2, 10, 1));
    auto plan = make_plan(sc, std::vector<int>{1, 2}, std::vector<double>{6, 6}, std::vector<double>{1, 1});
    auto v = validate_feasibility(sc, plan);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].tag, violation::window_capacity);
    EXPECT_NE(v[0].message.find("slot 2"), std::string::npos);

    // without freeze-out the two deployments do not overlap
    auto sc0 = sc.with_params(build::params(2, 10, 0));
    auto plan0 = make_plan(sc0, std::vector<int>{1, 2}, std::vector<double>{6, 6}, std::vector<double>{1, 1});
    EXPECT_TRUE(validate_feasibility(sc0, plan0).empty());
}

TEST(Validate, BoundsSharesAndConsistency) {
    auto sc = one_area(2, build::params(2, 10, 0));
    auto plan = make_plan(sc, std::vector<int>{1}, std::vector<double>{11}, std::vector<double>{0.5, 0.5});
    auto tags = [&](const AllocationPlan& p) {
        std::vector<std::string> out;
        for (const auto& v : validate_feasibility(sc, p)) out.push_back(v.tag);
        return out;
    };
    EXPECT_EQ(tags(plan), (std::vector<std::string>{violation::window_capacity, violation::deploy_bounds}));

    plan = make_plan(sc, std::vector<int>{1}, std::vector<double>{5}, std::vector<double>{0.5, 0.4});
    EXPECT_EQ(tags(plan), std::vector<std::string>{violation::shares});

    plan = make_plan(sc, std::vector<int>{1}, std::vector<double>{5}, std::vector<double>{0.5, 0.5});
    plan.x(0, 0) = 4;
    EXPECT_EQ(tags(plan), std::vector<std::string>{violation::consistency});
}

TEST(Recycling, MatchesWindowForm) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        auto sc = oracle::tiny_instance(rng);
        auto plan = build::random_plan(sc, rng);
        auto usage = slot_usage(plan);
        auto load = window_loads(usage, sc.freezeout());
        auto avail = recycling_availability(sc, plan);
        bool window_ok = true, recycle_ok = true;
        for (std::size_t t = 0; t < usage.size(); ++t) {
            EXPECT_NEAR(avail[t] - usage[t], sc.smax() - load[t], 1e-9);
            window_ok &= load[t] <= sc.smax() + 1e-9;
            recycle_ok &= usage[t] <= avail[t] + 1e-9;
        }
        EXPECT_EQ(window_ok, recycle_ok);
    }
}
