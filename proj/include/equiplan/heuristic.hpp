#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equiplan/format.hpp"
#include "equiplan/relaxation.hpp"
#include "equiplan/utility.hpp"

namespace equiplan {

/// Allocations at or below this many Mbps count as zero.
inline constexpr double kActiveThreshold = 1e-6;

/// Utility-resource ratio gamma(area, slot): utility gained per Mbps placed.
struct UrrTable {
    Grid<double> gamma;  // area x slot
};

/// gamma(n, t) = sum over users k of area n with x(k, t) above the zero
/// threshold of V(k, t) / x(k, t), where V is the exact sigmoid utility the
/// user would get if area n were served at t with rate x(k, t).
inline UrrTable compute_urr(const Scenario& sc, const Grid<double>& x) {
    const auto T = static_cast<std::size_t>(sc.horizon());
    UrrTable urr{Grid<double>(sc.area_count(), T, 0.0)};
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        for (std::size_t t = 0; t < T; ++t) {
            double xv = x(u, t);
            if (xv <= kActiveThreshold) continue;
            if (static_cast<int>(t) + 1 > sc.deadline(u)) continue;
            double v = sc.tau(u) * sigmoid_rate_utility(xv, sc.demand(u), sc.theta());
            urr.gamma(n, t) += v / xv;
        }
    }
    return urr;
}

/// z(n, t) = 1 when some user of area n has a non-zero allocation at t.
inline Grid<std::uint8_t> active_slots(const Scenario& sc, const Grid<double>& x) {
    const auto T = static_cast<std::size_t>(sc.horizon());
    Grid<std::uint8_t> z(sc.area_count(), T, 0);
    for (std::size_t u = 0; u < sc.user_count(); ++u)
        for (std::size_t t = 0; t < T; ++t)
            if (x(u, t) > kActiveThreshold) z(sc.area_of(u), t) = 1;
    return z;
}

inline std::vector<std::size_t> multiply_served_areas(const Grid<std::uint8_t>& z) {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < z.rows(); ++n) {
        int count = 0;
        for (std::size_t t = 0; t < z.cols(); ++t) count += z(n, t);
        if (count > 1) out.push_back(n);
    }
    return out;
}

enum class Policy { temporal, spatial, tie_breaker };

inline std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::temporal: return "temporal";
        case Policy::spatial: return "spatial";
        case Policy::tie_breaker: return "tie-breaker";
    }
    return "temporal";
}

struct PolicyDecision {
    std::size_t area = 0;
    int kept_slot = 0;                 // 1-based
    Policy policy = Policy::temporal;  // the rule that settled the choice
    std::vector<int> forbidden_slots;  // 1-based
};

namespace detail {

inline bool urr_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Competition rank of area n among all areas at slot t in ascending gamma
/// order: the number of areas with strictly smaller gamma.
inline std::size_t urr_rank(const UrrTable& urr, std::size_t n, std::size_t t) {
    std::size_t rank = 0;
    const double g = urr.gamma(n, t);
    for (std::size_t m = 0; m < urr.gamma.rows(); ++m)
        if (urr.gamma(m, t) < g && !urr_equal(urr.gamma(m, t), g)) ++rank;
    return rank;
}

}  // namespace detail

/// For every area served more than once keeps one slot and forbids the other
/// active ones. The kept slot maximises gamma; ties go to the slot where the
/// area ranks highest against the other areas, then to the earliest slot.
inline std::vector<PolicyDecision> apply_policies(const UrrTable& urr,
                                                  std::span<const std::size_t> violating_areas) {
    std::vector<PolicyDecision> out;
    for (std::size_t n : violating_areas) {
        std::vector<std::size_t> active;
        for (std::size_t t = 0; t < urr.gamma.cols(); ++t)
            if (urr.gamma(n, t) > 0) active.push_back(t);
        if (active.empty()) continue;

        double best = 0;
        for (std::size_t t : active) best = std::max(best, urr.gamma(n, t));
        std::vector<std::size_t> tied;
        for (std::size_t t : active)
            if (detail::urr_equal(urr.gamma(n, t), best)) tied.push_back(t);

        PolicyDecision dec;
        dec.area = n;
        std::size_t keep = tied.front();
        if (tied.size() == 1) {
            dec.policy = Policy::temporal;
        } else {
            std::size_t best_rank = 0;
            for (std::size_t t : tied) best_rank = std::max(best_rank, detail::urr_rank(urr, n, t));
            std::vector<std::size_t> top;
            for (std::size_t t : tied)
                if (detail::urr_rank(urr, n, t) == best_rank) top.push_back(t);
            keep = top.front();  // earliest among equally ranked slots
            dec.policy = top.size() == 1 ? Policy::spatial : Policy::tie_breaker;
        }
        dec.kept_slot = static_cast<int>(keep) + 1;
        for (std::size_t t : active)
            if (t != keep) dec.forbidden_slots.push_back(static_cast<int>(t) + 1);
        out.push_back(std::move(dec));
    }
    return out;
}

/// Turns a relaxation solution in which every area has at most one active
/// slot into <z, s, w>: s_n is the area's total at its slot and
/// w_k = x_k / s_n. Unserved areas get z = 0, s = 0 and w = 0.
inline AllocationPlan extract_plan(const Scenario& sc, const Grid<double>& x) {
    auto z = active_slots(sc, x);
    if (!multiply_served_areas(z).empty())
        throw std::logic_error("extract_plan needs at most one active slot per area");
    std::vector<int> slots(sc.area_count(), 0);
    std::vector<double> deployed(sc.area_count(), 0.0);
    std::vector<double> shares(sc.user_count(), 0.0);
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        for (std::size_t t = 0; t < z.cols(); ++t)
            if (z(n, t)) slots[n] = static_cast<int>(t) + 1;
        if (slots[n] == 0) continue;
        auto t = static_cast<std::size_t>(slots[n] - 1);
        double total = 0;
        for (std::size_t u : sc.areas()[n].household_ids)
            if (x(u, t) > kActiveThreshold) total += x(u, t);
        deployed[n] = total;
        for (std::size_t u : sc.areas()[n].household_ids)
            if (x(u, t) > kActiveThreshold) shares[u] = x(u, t) / total;
    }
    return make_plan(sc, slots, deployed, shares);
}

struct HeuristicIteration {
    double lp_value = 0;
    std::vector<std::size_t> violating_areas;
    std::string policy;  // policies used this round joined by '+', or "none"
    std::vector<std::pair<std::size_t, int>> forbidden;  // (area index, 1-based slot)
};

struct HeuristicTrace {
    std::vector<HeuristicIteration> iterations;
    AllocationPlan final_plan;
    double upper_bound = 0;
    double true_objective = 0;
    std::size_t lp_solves = 0;
};

/// Spatial-temporal rounding: re-solve the relaxation, resolving areas that
/// are served in several slots by forbidding all but one of those slots,
/// until every area is served at most once.
inline HeuristicTrace solve_heuristic(const Scenario& sc) {
    HeuristicTrace trace;
    const auto env = build_user_envelopes(sc);
    SlotMask forbidden = no_forbidden_slots(sc);
    while (true) {
        auto sol = solve_relaxation(sc, env, forbidden);
        if (sol.status != LpStatus::optimal)
            throw std::logic_error("relaxation LP ended with status " + std::string(to_string(sol.status)));
        if (trace.lp_solves++ == 0) trace.upper_bound = sol.value;

        HeuristicIteration it;
        it.lp_value = sol.value;
        it.violating_areas = multiply_served_areas(active_slots(sc, sol.x));
        if (it.violating_areas.empty()) {
            it.policy = "none";
            trace.iterations.push_back(std::move(it));
            trace.final_plan = extract_plan(sc, sol.x);
            break;
        }
        auto decisions = apply_policies(compute_urr(sc, sol.x), it.violating_areas);
        bool used[3] = {false, false, false};
        for (const auto& dec : decisions) {
            used[static_cast<int>(dec.policy)] = true;
            for (int t : dec.forbidden_slots) {
                forbidden(dec.area, static_cast<std::size_t>(t - 1)) = 1;
                it.forbidden.emplace_back(dec.area, t);
            }
        }
        for (Policy p : {Policy::temporal, Policy::spatial, Policy::tie_breaker})
            if (used[static_cast<int>(p)]) {
                if (!it.policy.empty()) it.policy += '+';
                it.policy += to_string(p);
            }
        if (it.forbidden.empty())
            throw std::logic_error("rounding made no progress");
        trace.iterations.push_back(std::move(it));
    }
    trace.true_objective = total_true_objective(sc, trace.final_plan);
    return trace;
}

/// One row per LP solve: iteration, lp_value, n_violating, policy.
inline void write_trace_csv(std::ostream& out, const HeuristicTrace& trace) {
    out << "iteration,lp_value,n_violating,policy\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& it = trace.iterations[i];
        out << i + 1 << ',' << format_report(it.lp_value) << ',' << it.violating_areas.size() << ','
            << it.policy << '\n';
    }
}

}  // namespace equiplan
