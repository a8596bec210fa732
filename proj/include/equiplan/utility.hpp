#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/grid.hpp"
#include "equiplan/scenario.hpp"

namespace equiplan {

/// Exponent magnitude beyond which exp() is clamped.
inline constexpr double kExponentClamp = 700.0;

/// Logistic function with its argument clamped to [-700, 700].
inline double logistic(double z) {
    z = std::clamp(z, -kExponentClamp, kExponentClamp);
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// Rate satisfaction 1 / (1 + exp(-theta (r - r_hat))), in (0, 1).
inline double sigmoid_rate_utility(double rate, double r_hat, double theta) {
    return logistic(theta * (rate - r_hat));
}

/// Overall regained rate of an area for deployed resource s. Identity here;
/// any monotone non-negative map can be substituted at this one point.
inline double regained_rate(double deployed) { return deployed; }

/// Decision triple <z, s, w> together with the flattened per-slot allocation
/// x(user, slot) = z(area, slot) * w(user) * s(area). Slots are 1-based in the
/// API and stored 0-based in the grids.
struct AllocationPlan {
    Grid<std::uint8_t> z;  // area x slot
    std::vector<double> s;  // per area, Mbps
    std::vector<double> w;  // per user
    Grid<double> x;         // user x slot, Mbps

    /// First slot (1-based) with z = 1, or 0 when the area is never served.
    int serve_slot(std::size_t area) const {
        for (std::size_t t = 0; t < z.cols(); ++t)
            if (z(area, t)) return static_cast<int>(t) + 1;
        return 0;
    }

    friend bool operator==(const AllocationPlan&, const AllocationPlan&) = default;
};

inline AllocationPlan empty_plan(const Scenario& sc) {
    auto T = static_cast<std::size_t>(sc.horizon());
    return AllocationPlan{Grid<std::uint8_t>(sc.area_count(), T, 0),
                          std::vector<double>(sc.area_count(), 0.0),
                          std::vector<double>(sc.user_count(), 0.0),
                          Grid<double>(sc.user_count(), T, 0.0)};
}

/// Recomputes x from z, s and w.
inline void refresh_allocation(const Scenario& sc, AllocationPlan& plan) {
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        for (std::size_t t = 0; t < plan.x.cols(); ++t)
            plan.x(u, t) = plan.z(n, t) ? plan.w[u] * plan.s[n] : 0.0;
    }
}

/// Builds a consistent plan. serve_slots holds a 1-based slot per area, 0 for
/// unserved areas.
inline AllocationPlan make_plan(const Scenario& sc, std::span<const int> serve_slots,
                                std::span<const double> deployed, std::span<const double> shares) {
    if (serve_slots.size() != sc.area_count() || deployed.size() != sc.area_count() ||
        shares.size() != sc.user_count())
        throw ArgumentError("plan vectors do not match the scenario dimensions");
    AllocationPlan plan = empty_plan(sc);
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        int t = serve_slots[n];
        if (t < 0 || t > sc.horizon()) throw ArgumentError("serve slot outside [0, T]");
        if (t > 0) plan.z(n, static_cast<std::size_t>(t - 1)) = 1;
    }
    plan.s.assign(deployed.begin(), deployed.end());
    plan.w.assign(shares.begin(), shares.end());
    refresh_allocation(sc, plan);
    return plan;
}

inline bool area_served(const AllocationPlan& plan, std::size_t area) {
    return plan.serve_slot(area) != 0;
}

/// w(user) / sum of w in the area, times the area's regained rate. Zero when
/// the area is unserved or holds no shares.
inline double perceived_rate(const Scenario& sc, const AllocationPlan& plan, std::size_t user) {
    std::size_t n = sc.area_of(user);
    if (!area_served(plan, n)) return 0.0;
    double total = 0;
    for (std::size_t k : sc.areas()[n].household_ids) total += plan.w[k];
    if (total <= 0) return 0.0;
    return plan.w[user] / total * regained_rate(plan.s[n]);
}

/// tau * sigmoid(rate) * (number of serve slots no later than the deadline).
inline double user_utility(const Scenario& sc, const AllocationPlan& plan, std::size_t user) {
    std::size_t n = sc.area_of(user);
    int in_time = 0;
    auto d = static_cast<std::size_t>(std::min(sc.deadline(user), sc.horizon()));
    for (std::size_t t = 0; t < d; ++t) in_time += plan.z(n, t);
    if (in_time == 0) return 0.0;
    return sc.tau(user) *
           sigmoid_rate_utility(perceived_rate(sc, plan, user), sc.demand(user), sc.theta()) * in_time;
}

/// Canonical score: exact sigmoid utility summed over all users.
inline double total_true_objective(const Scenario& sc, const AllocationPlan& plan) {
    double sum = 0;
    for (std::size_t u = 0; u < sc.user_count(); ++u) sum += user_utility(sc, plan, u);
    return sum;
}

/// The same objective evaluated from the flattened allocation x instead of
/// shares and perceived rates.
inline double objective_from_allocation(const Scenario& sc, const AllocationPlan& plan) {
    double sum = 0;
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        auto d = static_cast<std::size_t>(std::min(sc.deadline(u), sc.horizon()));
        for (std::size_t t = 0; t < d; ++t)
            if (plan.z(n, t))
                sum += sc.tau(u) * sigmoid_rate_utility(plan.x(u, t), sc.demand(u), sc.theta());
    }
    return sum;
}

struct Violation {
    std::string tag;
    std::string message;
};

/// Violation tags.
namespace violation {
inline constexpr const char* once_served = "once-served";
inline constexpr const char* window_capacity = "window-capacity";
inline constexpr const char* deploy_bounds = "deploy-bounds";
inline constexpr const char* shares = "shares";
inline constexpr const char* consistency = "consistency";
inline constexpr const char* shape = "shape";
inline constexpr const char* minimum_rate = "minimum-rate";
}  // namespace violation

/// Absolute slack (Mbps) allowed on capacity comparisons.
inline double capacity_tolerance(double smax) { return 1e-6 + 1e-9 * smax; }

/// Resource used in each slot: sum over users of x(user, slot).
inline std::vector<double> slot_usage(const AllocationPlan& plan) {
    std::vector<double> use(plan.x.cols(), 0.0);
    for (std::size_t u = 0; u < plan.x.rows(); ++u)
        for (std::size_t t = 0; t < plan.x.cols(); ++t) use[t] += plan.x(u, t);
    return use;
}

/// Window load for every slot t: usage summed over [t - delta, t], slots
/// before 1 contributing nothing.
inline std::vector<double> window_loads(std::span<const double> usage, int delta) {
    std::vector<double> load(usage.size(), 0.0);
    for (std::size_t t = 0; t < usage.size(); ++t) {
        std::size_t from = t >= static_cast<std::size_t>(delta) ? t - delta : 0;
        for (std::size_t q = from; q <= t; ++q) load[t] += usage[q];
    }
    return load;
}

/// Resource available at the start of each slot by the recycling recursion
/// s(t) = s(t-1) - used(t-1) + used(t-1-delta), s(1) = S_max, where used(t)
/// is sum_n z_n(t) s_n.
inline std::vector<double> recycling_availability(const Scenario& sc, const AllocationPlan& plan) {
    auto T = static_cast<std::size_t>(sc.horizon());
    std::vector<double> used(T, 0.0);
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        for (std::size_t t = 0; t < T; ++t)
            if (plan.z(n, t)) used[t] += plan.s[n];
    std::vector<double> avail(T, 0.0);
    const auto delta = static_cast<std::size_t>(sc.freezeout());
    for (std::size_t t = 0; t < T; ++t) {
        if (t == 0) {
            avail[t] = sc.smax();
            continue;
        }
        avail[t] = avail[t - 1] - used[t - 1];
        if (t >= 1 + delta) avail[t] += used[t - 1 - delta];
    }
    return avail;
}

/// Checks once-served, sliding-window capacity, deployment bounds, share
/// normalisation and x = z w s consistency. An empty result means feasible.
inline std::vector<Violation> validate_feasibility(const Scenario& sc, const AllocationPlan& plan) {
    std::vector<Violation> out;
    auto T = static_cast<std::size_t>(sc.horizon());
    if (plan.z.rows() != sc.area_count() || plan.z.cols() != T || plan.s.size() != sc.area_count() ||
        plan.w.size() != sc.user_count() || plan.x.rows() != sc.user_count() || plan.x.cols() != T) {
        out.push_back({violation::shape, "plan dimensions do not match the scenario"});
        return out;
    }
    const double tol = capacity_tolerance(sc.smax());

    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        int served = 0;
        for (std::size_t t = 0; t < T; ++t) {
            if (plan.z(n, t) > 1)
                out.push_back({violation::once_served, "area " + std::to_string(sc.areas()[n].area_id) +
                                                           ": z is not binary"});
            served += plan.z(n, t) != 0;
        }
        if (served > 1)
            out.push_back({violation::once_served, "area " + std::to_string(sc.areas()[n].area_id) +
                                                       " served " + std::to_string(served) + " times"});
    }

    auto load = window_loads(slot_usage(plan), sc.freezeout());
    for (std::size_t t = 0; t < T; ++t)
        if (load[t] > sc.smax() + tol)
            out.push_back({violation::window_capacity,
                           "slot " + std::to_string(t + 1) + ": window load " +
                               std::to_string(load[t]) + " exceeds S_max " + std::to_string(sc.smax())});

    for (std::size_t n = 0; n < sc.area_count(); ++n)
        if (!(plan.s[n] >= -tol) || plan.s[n] > sc.smax() + tol)
            out.push_back({violation::deploy_bounds, "area " + std::to_string(sc.areas()[n].area_id) +
                                                         ": deployed " + std::to_string(plan.s[n]) +
                                                         " outside [0, S_max]"});

    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        double sum = 0;
        bool in_range = true;
        for (std::size_t k : sc.areas()[n].household_ids) {
            in_range &= plan.w[k] >= 0.0 && plan.w[k] <= 1.0;
            sum += plan.w[k];
        }
        if (!in_range)
            out.push_back({violation::shares,
                           "area " + std::to_string(sc.areas()[n].area_id) + ": share outside [0, 1]"});
        if (area_served(plan, n) && std::abs(sum - 1.0) > 1e-9)
            out.push_back({violation::shares, "area " + std::to_string(sc.areas()[n].area_id) +
                                                  ": shares sum to " + std::to_string(sum)});
    }

    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        for (std::size_t t = 0; t < T; ++t) {
            double expect = plan.z(n, t) ? plan.w[u] * plan.s[n] : 0.0;
            if (std::abs(plan.x(u, t) - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
                out.push_back({violation::consistency, "user " + sc.household(u).id + ", slot " +
                                                           std::to_string(t + 1) +
                                                           ": x differs from z*w*s"});
                break;
            }
        }
    }
    return out;
}

}  // namespace equiplan
