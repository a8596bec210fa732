#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "builders.hpp"
#include "equiplan/heuristic.hpp"

using namespace equiplan;

namespace {

UrrTable table(std::vector<std::vector<double>> rows) {
    UrrTable u{Grid<double>(rows.size(), rows.front().size(), 0.0)};
    for (std::size_t n = 0; n < rows.size(); ++n)
        for (std::size_t t = 0; t < rows[n].size(); ++t) u.gamma(n, t) = rows[n][t];
    return u;
}

}  // namespace

TEST(Urr, SingleUserRatio) {
    double r_hat = 4.0 - std::log(4.0) / 10.0;  // sigmoid(10 (4 - r_hat)) = 0.8
    auto sc = build::singles({r_hat}, {2}, build::params(2, 100, 0));
    Grid<double> x(1, 2, 0.0);
    x(0, 0) = 4.0;
    auto urr = compute_urr(sc, x);
    EXPECT_NEAR(urr.gamma(0, 0), 0.2, 1e-12);
    EXPECT_EQ(urr.gamma(0, 1), 0.0);
}

TEST(Urr, SumsOverUsersOfTheArea) {
    ScenarioParams p = build::params(1, 100, 0);
    p.tau_source = TauSource::education;
    Scenario sc({oracle::household("a", 1, 2.0, 1, 1, 1, /*education*/ 2), oracle::household("b", 1, 1.0, 1)}, p);
    Grid<double> x(2, 1, 0.0);
    x(0, 0) = 2.0;  // utility 2 * 0.5
    x(1, 0) = 1.0;  // utility 1 * 0.5
    EXPECT_NEAR(compute_urr(sc, x).gamma(0, 0), 1.0, 1e-12);
    EXPECT_EQ(compute_urr(sc, Grid<double>(2, 1, 0.0)).gamma(0, 0), 0.0);
}

TEST(Policies, UniqueMaximumIsKept) {
    std::vector<std::size_t> areas{0};
    auto d = apply_policies(table({{0.1, 0.5, 0.3}}), areas);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kept_slot, 2);
    EXPECT_EQ(d[0].policy, Policy::temporal);
    EXPECT_EQ(d[0].forbidden_slots, (std::vector<int>{1, 3}));
}

TEST(Policies, TiesGoToTheBetterRankedSlot) {
    // area 0 has two areas below it at t=1 and five at t=2
    auto urr = table({{0.4, 0.4},
                      {0.1, 0.1},
                      {0.2, 0.2},
                      {0.9, 0.3},
                      {0.8, 0.1},
                      {0.7, 0.2},
                      {0.6, 0.9}});
    std::vector<std::size_t> areas{0};
    EXPECT_EQ(detail::urr_rank(urr, 0, 0), 2u);
    EXPECT_EQ(detail::urr_rank(urr, 0, 1), 5u);
    auto d = apply_policies(urr, areas);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kept_slot, 2);
    EXPECT_EQ(d[0].policy, Policy::spatial);
    EXPECT_EQ(d[0].forbidden_slots, std::vector<int>{1});
}

TEST(Policies, FullTieKeepsEarliest) {
    std::vector<std::size_t> one{0};
    auto d = apply_policies(table({{0, 0.3, 0.3, 0.3}}), one);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kept_slot, 2);
    EXPECT_EQ(d[0].policy, Policy::tie_breaker);
    EXPECT_EQ(d[0].forbidden_slots, (std::vector<int>{3, 4}));

    std::vector<std::size_t> both{0, 1};
    d = apply_policies(table({{0.3, 0.3}, {0.3, 0.3}}), both);
    ASSERT_EQ(d.size(), 2u);
    for (const auto& dec : d) {
        EXPECT_EQ(dec.kept_slot, 1);
        EXPECT_EQ(dec.policy, Policy::tie_breaker);
    }
}

TEST(Heuristic, DeadlineForcesFirstSlot) {
    auto sc = build::singles({5}, {1}, build::params(2, 50, 0));
    auto trace = solve_heuristic(sc);
    EXPECT_EQ(trace.final_plan.serve_slot(0), 1);
    // the envelope is flat past its cap, so the LP stops short of S_max
    EXPECT_GT(trace.final_plan.s[0], 5.0);
    EXPECT_LE(trace.final_plan.s[0], 50.0);
    EXPECT_TRUE(validate_feasibility(sc, trace.final_plan).empty());
}

TEST(Heuristic, CheapDemandWinsScarceCapacity) {
    auto sc = build::singles({1, 1000}, {2, 2}, build::params(2, 500, 2));
    auto trace = solve_heuristic(sc);
    auto ref = oracle::brute_force(sc);
    ASSERT_GT(ref.slots[0], 0);
    EXPECT_GT(trace.final_plan.serve_slot(0), 0);
    EXPECT_GT(trace.final_plan.s[0], 1.0);
    EXPECT_NEAR(trace.true_objective, ref.value, ref.tolerance + 1e-9);
}

TEST(Heuristic, ExtractRejectsDoublyActiveAreas) {
    auto sc = build::singles({5}, {2}, build::params(2, 50, 0));
    Grid<double> x(1, 2, 0.0);
    x(0, 0) = x(0, 1) = 1;
    EXPECT_THROW(extract_plan(sc, x), std::logic_error);
}

TEST(Heuristic, PropertiesOnRandomInstances) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto sc = oracle::tiny_instance(rng);
        auto trace = solve_heuristic(sc);
        EXPECT_TRUE(validate_feasibility(sc, trace.final_plan).empty());
        EXPECT_LE(trace.true_objective, relaxation_upper_bound(sc) + 1e-9);
        EXPECT_LE(trace.lp_solves, sc.area_count() * static_cast<std::size_t>(sc.horizon()));
        EXPECT_EQ(trace.lp_solves, trace.iterations.size());
        std::size_t forbidden = 0;
        for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
            if (i > 0) {
                EXPECT_LE(trace.iterations[i].lp_value, trace.iterations[i - 1].lp_value + 1e-9);
            }
            if (i + 1 < trace.iterations.size()) {
                EXPECT_GT(trace.iterations[i].forbidden.size(), 0u);
                forbidden += trace.iterations[i].forbidden.size();
            }
        }
        EXPECT_LE(forbidden, sc.area_count() * static_cast<std::size_t>(sc.horizon()));
        EXPECT_EQ(trace.iterations.back().policy, "none");
    }
}

TEST(Heuristic, SameInputSameTrace) {
    std::mt19937_64 rng(32);
    auto sc = oracle::tiny_instance(rng);
    auto a = solve_heuristic(sc), b = solve_heuristic(sc);
    EXPECT_EQ(a.final_plan, b.final_plan);
    std::ostringstream ta, tb;
    write_trace_csv(ta, a);
    write_trace_csv(tb, b);
    EXPECT_EQ(ta.str(), tb.str());
    EXPECT_EQ(ta.str().rfind("iteration,lp_value,n_violating,policy\n", 0), 0u);
}
