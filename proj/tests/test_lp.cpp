#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "equiplan/lp.hpp"
#include "oracle.hpp"

using namespace equiplan;

namespace {

LpProblem two_var() {
    LpProblem p;
    int x = p.add_column(2, 0, kInf);
    int y = p.add_column(1, 0, kInf);
    p.add_row({{x, 1}, {y, 1}}, Relation::less_equal, 3);
    p.add_row({{x, 1}}, Relation::less_equal, 2);
    p.add_row({{y, 1}}, Relation::less_equal, 2);
    return p;
}

LpProblem random_lp(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nvars(1, 8), nrows(0, 6), rel(0, 5);
    std::uniform_real_distribution<double> coef(-5, 5), bound(0, 10);
    LpProblem p;
    int n = nvars(rng);
    for (int j = 0; j < n; ++j) {
        double lo = rel(rng) == 0 ? -bound(rng) : 0.0;
        p.add_column(coef(rng), lo, lo + bound(rng) + 0.5);
    }
    int m = nrows(rng);
    for (int i = 0; i < m; ++i) {
        std::vector<LpTerm> terms;
        for (int j = 0; j < n; ++j)
            if (rel(rng) < 4) terms.push_back({j, coef(rng)});
        int r = rel(rng);
        Relation kind = r < 4 ? Relation::less_equal : (r == 4 ? Relation::greater_equal : Relation::equal);
        p.add_row(std::move(terms), kind, coef(rng) + (kind == Relation::less_equal ? 5 : 0));
    }
    return p;
}

}  // namespace

TEST(Lp, TextbookExample) {
    auto sol = solve_lp(two_var());
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 5.0, 1e-9);
    EXPECT_NEAR(sol.x_values[0], 2.0, 1e-9);
    EXPECT_NEAR(sol.x_values[1], 1.0, 1e-9);
    auto check = oracle::vertex_enumeration([] {
        auto p = two_var();
        p.upper = {10, 10};
        return p;
    }());
    EXPECT_NEAR(check.value, 5.0, 1e-9);
}

TEST(Lp, RowTighterThanBox) {
    LpProblem p;
    int x = p.add_column(1, 0, 10);
    p.add_row({{x, 1}}, Relation::less_equal, 5);
    auto sol = solve_lp(p);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 5.0, 1e-12);
}

TEST(Lp, Infeasible) {
    LpProblem p;
    int x = p.add_column(1, 0, kInf);
    p.add_row({{x, 1}}, Relation::less_equal, -1);
    EXPECT_EQ(solve_lp(p).status, LpStatus::infeasible);

    LpProblem q;
    int a = q.add_column(1, 0, 1);
    int b = q.add_column(1, 0, 1);
    q.add_row({{a, 1}, {b, 1}}, Relation::greater_equal, 3);
    EXPECT_EQ(solve_lp(q).status, LpStatus::infeasible);
}

TEST(Lp, Unbounded) {
    LpProblem p;
    int x = p.add_column(1, 0, kInf);
    int y = p.add_column(0, 0, kInf);
    p.add_row({{x, 1}, {y, -1}}, Relation::less_equal, 1);
    EXPECT_EQ(solve_lp(p).status, LpStatus::unbounded);
}

TEST(Lp, EqualityAndNegativeLowerBounds) {
    LpProblem p;
    int x = p.add_column(1, -3, 3);
    int y = p.add_column(-1, -3, 3);
    p.add_row({{x, 1}, {y, 1}}, Relation::equal, 1);
    auto sol = solve_lp(p);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    // x - y with x + y = 1: best is x = 3, y = -2
    EXPECT_NEAR(sol.objective_value, 5.0, 1e-9);
    EXPECT_LE(max_violation(p, sol.x_values), 1e-9);
}

TEST(Lp, DegenerateProblemTerminates) {
    // many redundant constraints through the same vertex
    LpProblem p;
    int x = p.add_column(1, 0, kInf);
    int y = p.add_column(1, 0, kInf);
    for (int k = 1; k <= 12; ++k) p.add_row({{x, double(k)}, {y, 1}}, Relation::less_equal, double(k));
    p.add_row({{x, 1}, {y, 1}}, Relation::less_equal, 1);
    auto sol = solve_lp(p);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, 1.0, 1e-9);
}

TEST(Lp, MatchesVertexEnumeration) {
    std::mt19937_64 rng(123);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto p = random_lp(rng);
        auto sol = solve_lp(p);
        auto ref = oracle::vertex_enumeration(p);
        if (!ref.feasible) {
            EXPECT_EQ(sol.status, LpStatus::infeasible) << "trial " << trial;
            continue;
        }
        ASSERT_EQ(sol.status, LpStatus::optimal) << "trial " << trial;
        EXPECT_NEAR(sol.objective_value, ref.value, 1e-6) << "trial " << trial;
        EXPECT_LE(max_violation(p, sol.x_values), 1e-7);
        ++compared;
    }
    EXPECT_GT(compared, 20);
}

TEST(Lp, PermutedProblemHasSameValue) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 60; ++trial) {
        auto p = random_lp(rng);
        auto sol = solve_lp(p);
        std::vector<int> perm(p.column_count());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        LpProblem q;
        std::vector<int> where(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k)
            where[perm[k]] = q.add_column(p.objective[perm[k]], p.lower[perm[k]], p.upper[perm[k]]);
        auto rows = p.rows;
        std::reverse(rows.begin(), rows.end());
        for (auto& r : rows) {
            for (auto& t : r.terms) t.column = where[static_cast<std::size_t>(t.column)];
            q.add_row(r.terms, r.relation, r.rhs);
        }
        auto other = solve_lp(q);
        ASSERT_EQ(sol.status, other.status);
        if (sol.status == LpStatus::optimal) {
            EXPECT_NEAR(sol.objective_value, other.objective_value, 1e-6);
        }
    }
}

TEST(Lp, RepeatedSolvesAreIdentical) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_lp(rng);
        auto first = solve_lp(p);
        for (int k = 0; k < 4; ++k) {
            auto again = solve_lp(p);
            EXPECT_EQ(again.status, first.status);
            EXPECT_EQ(again.objective_value, first.objective_value);
            EXPECT_EQ(again.x_values, first.x_values);
        }
    }
}

TEST(Lp, TextDumpListsEveryRow) {
    std::ostringstream out;
    write_lp_text(out, two_var());
    auto text = out.str();
    EXPECT_FALSE(text.empty());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n') >= 3, true);
}
