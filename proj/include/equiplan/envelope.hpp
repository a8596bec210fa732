#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "equiplan/errors.hpp"
#include "equiplan/utility.hpp"

namespace equiplan {

/// Concave over-estimator min(a x + b, cap) of tau * sigmoid(theta (x - r_hat))
/// on [0, S_max]. The affine piece passes through the anchor (0, y0) and
/// touches the sigmoid's concave branch at (x1, y1). When the touching point
/// would lie beyond S_max the piece is the secant to (S_max, f(S_max)).
struct EnvelopePiece {
    double a = 0;    // slope, utility per Mbps
    double b = 0;    // intercept, equals y0
    double cap = 0;  // tau
    double x0 = 0;
    double y0 = 0;
    double x1 = 0;
    double y1 = 0;
    double theta = 0;
    double r_hat = 0;
    bool tangent = true;  // false when the secant fallback was used

    /// Allocation beyond which the piece is capped.
    double cap_point() const { return (cap - b) / a; }
};

inline constexpr double kTangentTolerance = 1e-9;
inline constexpr int kMaxBisectionSteps = 200;

inline EnvelopePiece build_envelope(double tau, double r_hat, double theta, double s_max) {
    if (!(tau > 0) || !(r_hat > 0) || !(theta > 0) || !(s_max > 0))
        throw ArgumentError("envelope parameters must be positive");

    auto f = [&](double x) { return tau * logistic(theta * (x - r_hat)); };
    // derivative written with logistic(-z) to avoid 1 - logistic(z) cancellation
    auto df = [&](double x) {
        double z = theta * (x - r_hat);
        return tau * theta * logistic(z) * logistic(-z);
    };
    const double y0 = f(0.0);
    // positive left of the tangency point, negative right of it
    auto gap = [&](double x) { return df(x) * x - (f(x) - y0); };

    EnvelopePiece p;
    p.b = p.y0 = y0;
    p.cap = tau;
    p.theta = theta;
    p.r_hat = r_hat;

    double lo = r_hat + 1e-12 * std::max(1.0, r_hat);
    double hi = s_max;
    if (hi <= lo || gap(hi) > 0) {
        p.tangent = false;
        p.x1 = s_max;
        p.y1 = f(s_max);
        p.a = std::max((p.y1 - y0) / s_max, std::numeric_limits<double>::min());
        return p;
    }
    for (int i = 0; i < kMaxBisectionSteps && hi - lo > kTangentTolerance; ++i) {
        double mid = 0.5 * (lo + hi);
        if (gap(mid) >= 0)
            lo = mid;
        else
            hi = mid;
    }
    // Keep the left end: the slope there is at least the true tangent slope,
    // so the line still dominates the sigmoid.
    p.x1 = lo;
    p.y1 = f(lo);
    p.a = df(lo);
    return p;
}

inline double envelope_value(const EnvelopePiece& p, double x) {
    return std::min(p.a * x + p.b, p.cap);
}

}  // namespace equiplan
