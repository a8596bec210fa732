#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equiplan/envelope.hpp"
#include "equiplan/utility.hpp"
#include "oracle.hpp"

using namespace equiplan;

namespace {

double weighted(double tau, double r_hat, double theta, double x) {
    return tau * oracle::sigmoid(std::clamp(theta * (x - r_hat), -700.0, 700.0));
}

/// The tangent from (0, f(0)) touches where the chord slope (f(x) - f(0)) / x
/// peaks. Dense scan, then golden-section refinement.
double chord_slope_oracle(double tau, double r_hat, double theta, double s_max) {
    const double y0 = weighted(tau, r_hat, theta, 0);
    auto slope = [&](double x) { return (weighted(tau, r_hat, theta, x) - y0) / x; };
    const int steps = 20000;
    double best_x = s_max;
    for (int i = 1; i <= steps; ++i) {
        double x = s_max * i / steps;
        if (slope(x) > slope(best_x)) best_x = x;
    }
    double lo = std::max(s_max / steps * 1e-3, best_x - s_max / steps), hi = std::min(s_max, best_x + s_max / steps);
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
        double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (slope(a) < slope(b))
            lo = a;
        else
            hi = b;
    }
    return slope(0.5 * (lo + hi));
}

}  // namespace

TEST(Envelope, AnchorsAtZero) {
    auto p = build_envelope(2.0, 5.0, 10.0, 100.0);
    EXPECT_DOUBLE_EQ(envelope_value(p, 0.0), weighted(2.0, 5.0, 10.0, 0.0));
    EXPECT_EQ(p.b, 2.0 * logistic(-50.0));
    EXPECT_EQ(envelope_value(p, 1e9), 2.0);
}

TEST(Envelope, TouchesAtTangencyPoint) {
    for (double theta : {0.5, 1.0, 10.0}) {
        auto p = build_envelope(1.0, 5.0, theta, 1000.0);
        ASSERT_TRUE(p.tangent);
        EXPECT_NEAR(p.a * p.x1 + p.b, p.y1, 1e-6);
        EXPECT_NEAR(p.y1, weighted(1.0, 5.0, theta, p.x1), 1e-12);
        EXPECT_GT(p.x1, 5.0);
    }
}

TEST(Envelope, SlopeMatchesChordOracle) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> tau(0.5, 7), rh(0.5, 50), th(0.05, 3);
    for (int i = 0; i < 60; ++i) {
        double t = tau(rng), r = rh(rng), h = th(rng), S = 4 * r + 20 / h;
        auto p = build_envelope(t, r, h, S);
        double oracle_a = chord_slope_oracle(t, r, h, S);
        EXPECT_NEAR(p.a, oracle_a, 1e-6 * oracle_a + 1e-12) << "tau=" << t << " r_hat=" << r << " theta=" << h;
    }
}

TEST(Envelope, SteepSigmoidApproachesStep) {
    // slope tends to tau / r_hat from below as theta grows
    double r_hat = 10, tau = 3, prev = 0;
    for (double theta : {1.0, 10.0, 100.0, 1000.0}) {
        auto p = build_envelope(tau, r_hat, theta, 1000);
        EXPECT_LT(p.a, tau / r_hat);
        EXPECT_GT(p.a, prev);
        EXPECT_EQ(p.cap, tau);
        prev = p.a;
    }
    EXPECT_NEAR(prev, tau / r_hat, 0.002 * tau / r_hat);
}

TEST(Envelope, SecantWhenTangentPastDomain) {
    auto p = build_envelope(1.0, 500.0, 0.01, 100.0);
    EXPECT_FALSE(p.tangent);
    EXPECT_DOUBLE_EQ(p.x1, 100.0);
    for (int i = 0; i <= 1000; ++i) {
        double x = i * 0.1;
        EXPECT_GE(envelope_value(p, x) + 1e-9, weighted(1.0, 500.0, 0.01, x));
    }
}

TEST(Envelope, DominatesOnDenseGrid) {
    auto p = build_envelope(1.0, 5.0, 10.0, 100.0);
    for (int i = 0; i <= 10000; ++i) {
        double x = 100.0 * i / 10000;
        EXPECT_GE(envelope_value(p, x) + 1e-9, weighted(1.0, 5.0, 10.0, x)) << x;
    }
}

TEST(Envelope, MidpointConcavity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tau(0.5, 7), rh(0.5, 50), th(0.05, 30), unit(0, 1);
    for (int i = 0; i < 2000; ++i) {
        double S = 200;
        auto p = build_envelope(tau(rng), rh(rng), th(rng), S);
        double a = unit(rng) * S, b = unit(rng) * S;
        EXPECT_GE(envelope_value(p, 0.5 * (a + b)) + 1e-12,
                  0.5 * (envelope_value(p, a) + envelope_value(p, b)));
    }
}

TEST(Envelope, RejectsNonPositiveInputs) {
    EXPECT_THROW(build_envelope(0, 1, 1, 1), ArgumentError);
    EXPECT_THROW(build_envelope(1, 0, 1, 1), ArgumentError);
    EXPECT_THROW(build_envelope(1, 1, 0, 1), ArgumentError);
    EXPECT_THROW(build_envelope(1, 1, 1, 0), ArgumentError);
}
