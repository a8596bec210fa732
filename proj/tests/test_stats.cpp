#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "builders.hpp"
#include "equiplan/stats.hpp"

using namespace equiplan;

namespace {

std::vector<double> tied_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> level(1, 6);
    std::vector<double> v(n);
    for (double& x : v) x = level(rng);
    return v;
}

}  // namespace

TEST(Pearson, PerfectLine) {
    std::vector<double> xs{1, 2, 3, 4, 5}, ys;
    for (double x : xs) ys.push_back(2 * x + 1);
    auto c = pearson(xs, ys);
    EXPECT_DOUBLE_EQ(c.coefficient, 1.0);
    EXPECT_EQ(c.p_value, 0.0);
    EXPECT_EQ(c.n, 5u);
}

TEST(Pearson, ZeroCorrelationHasUnitP) {
    std::vector<double> xs{1, 2, 3}, ys{1, 0, 1};
    auto c = pearson(xs, ys);
    EXPECT_NEAR(c.coefficient, 0.0, 1e-15);
    EXPECT_NEAR(c.p_value, 1.0, 1e-12);
}

TEST(Pearson, SmallExampleAgainstLonghand) {
    std::vector<double> xs{1, 2, 3, 4, 5}, ys{2, 1, 4, 3, 5};
    auto c = pearson(xs, ys);
    EXPECT_NEAR(c.coefficient, oracle::pearson_longhand(xs, ys), 1e-12);
    EXPECT_NEAR(c.coefficient, 0.8, 1e-12);
    EXPECT_NEAR(c.p_value, oracle::correlation_p_numeric(0.8, 5), 1e-8);
}

TEST(Pearson, Errors) {
    std::vector<double> a{1, 2, 3}, flat{2, 2, 2}, shorter{1, 2};
    EXPECT_THROW(pearson(a, flat), UndefinedCorrelation);
    EXPECT_THROW(pearson(a, shorter), ArgumentError);
    EXPECT_THROW(pearson(shorter, shorter), ArgumentError);
    EXPECT_THROW(spearman(flat, a), UndefinedCorrelation);
}

TEST(StudentT, MatchesNumericIntegration) {
    for (double nu : {1.0, 3.0, 10.0, 58.0, 458.0})
        for (double t : {0.1, 0.7, 1.5, 2.2, 4.0})
            EXPECT_NEAR(student_t_two_tailed(t, nu), oracle::t_two_tailed_numeric(t, nu), 1e-8)
                << "t=" << t << " nu=" << nu;
    EXPECT_EQ(student_t_two_tailed(0.0, 5), 1.0);
    EXPECT_EQ(student_t_two_tailed(INFINITY, 5), 0.0);
    EXPECT_THROW(student_t_two_tailed(1.0, 0.0), ArgumentError);
}

TEST(Ranks, AverageTies) {
    std::vector<double> v{1, 2, 2, 3};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
    std::vector<double> w{5, 1, 5, 5, 0};
    EXPECT_EQ(average_ranks(w), oracle::ranks_longhand(w));
}

TEST(Spearman, SmallExamples) {
    std::vector<double> xs{1, 2, 2, 3}, ys{1, 2, 3, 4};
    EXPECT_NEAR(spearman(xs, ys).coefficient, oracle::spearman_longhand(xs, ys), 1e-12);
    std::vector<double> cubes;
    for (double x : {0.5, -2.0, 3.0, 1.0, 7.0}) cubes.push_back(x * x * x);
    EXPECT_DOUBLE_EQ(spearman(std::vector<double>{0.5, -2.0, 3.0, 1.0, 7.0}, cubes).coefficient, 1.0);
}

TEST(Correlation, MatchesLonghandOnTiedVectors) {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(3, 60)(rng);
        auto xs = tied_vector(rng, n), ys = tied_vector(rng, n);
        try {
            EXPECT_NEAR(pearson(xs, ys).coefficient, oracle::pearson_longhand(xs, ys), 1e-10);
            EXPECT_NEAR(spearman(xs, ys).coefficient, oracle::spearman_longhand(xs, ys), 1e-10);
        } catch (const UndefinedCorrelation&) {
            // a constant draw; nothing to compare
        }
    }
}

TEST(Correlation, SymmetryScaleAndBounds) {
    std::mt19937_64 rng(302);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(30), ys(30);
        for (std::size_t i = 0; i < 30; ++i) {
            xs[i] = g(rng);
            ys[i] = 0.3 * xs[i] + g(rng);
        }
        auto p = pearson(xs, ys), s = spearman(xs, ys);
        EXPECT_NEAR(p.coefficient, pearson(ys, xs).coefficient, 1e-14);
        EXPECT_NEAR(s.coefficient, spearman(ys, xs).coefficient, 1e-14);
        EXPECT_LE(std::abs(p.coefficient), 1.0);
        EXPECT_LE(std::abs(s.coefficient), 1.0);
        std::vector<double> scaled, warped;
        for (double x : xs) {
            scaled.push_back(3.5 * x - 2);
            warped.push_back(std::exp(x));
        }
        EXPECT_NEAR(pearson(scaled, ys).coefficient, p.coefficient, 1e-12);
        EXPECT_NEAR(spearman(warped, ys).coefficient, s.coefficient, 1e-12);
    }
}

TEST(Correlation, IndependentColumnsRarelySignificant) {
    int quiet = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> xs(500), ys(500);
        for (std::size_t i = 0; i < 500; ++i) {
            xs[i] = u(rng);
            ys[i] = u(rng);
        }
        auto c = spearman(xs, ys);
        quiet += std::abs(c.coefficient) < 0.15 && c.p_value > 0.05;
    }
    EXPECT_GE(quiet, 90);
}

TEST(CorrelationTable, PlantedSignPattern) {
    auto sc = build::planted_survey(7, 460);
    auto rep = correlation_table(sc);
    ASSERT_EQ(rep.pairs.size(), 2u * 4 * 3);
    EXPECT_EQ(rep.pairs.front().method, CorrelationMethod::spearman);
    for (const auto& e : rep.pairs) {
        ASSERT_TRUE(e.error.empty()) << e.error;
        EXPECT_EQ(e.n, 460u);
        if (e.row == "hardship") {
            EXPECT_GT(e.coefficient, 0) << e.col;
            EXPECT_TRUE(e.significant) << e.col;
        }
        if (e.row == "tolerance") {
            EXPECT_LT(e.coefficient, 0) << e.col;
            EXPECT_TRUE(e.significant) << e.col;
        }
    }
}

TEST(CorrelationTable, ConstantColumnOnlySpoilsItsCells) {
    auto hs = build::planted_survey(8, 100).household_list();
    for (auto& h : hs) h.race_code = 1;
    Scenario sc(hs, build::params(15, 10000, 1));
    auto rep = correlation_table(sc);
    for (const auto& e : rep.pairs) {
        if (e.col == "race") {
            EXPECT_FALSE(e.error.empty());
            EXPECT_FALSE(e.significant);
        } else {
            EXPECT_TRUE(e.error.empty());
        }
    }
    std::ostringstream out;
    write_correlation_csv(out, rep);
    EXPECT_EQ(out.str().rfind("method,row,col,n,coefficient,p_value,significant,error\n", 0), 0u);
}

TEST(CorrelationTable, UnknownAttributeIsAnArgumentError) {
    auto sc = build::planted_survey(9, 20);
    std::array<std::string_view, 1> rows{"age"};
    EXPECT_THROW(correlation_table(sc, rows), ArgumentError);
}
