#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "equiplan/format.hpp"
#include "equiplan/utility.hpp"

namespace equiplan {

/// Normalised utility above this is "satisfied" (the sigmoid inflection).
inline constexpr double kSatisfiedThreshold = 0.5;

/// Effective data rate: w_k * s_n when the area is served no later than the
/// user's deadline, otherwise 0.
inline std::vector<double> compute_edr(const Scenario& sc, const AllocationPlan& plan) {
    std::vector<double> edr(sc.user_count(), 0.0);
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        int t = plan.serve_slot(n);
        if (t > 0 && t <= sc.deadline(u)) edr[u] = plan.w[u] * plan.s[n];
    }
    return edr;
}

struct UserMetrics {
    double edr_mbps = 0;
    double utility = 0;
    double normalized_utility = 0;  // utility / tau
    bool satisfied = false;
};

struct Quantiles {
    double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

/// Linear-interpolation quantiles of a non-empty sample.
inline Quantiles quantiles(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        double h = p * static_cast<double>(v.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(h));
        std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

struct GroupStats {
    std::string attribute;
    double value = 0;
    std::size_t count = 0;
    double mean_normalized_utility = 0;
    double satisfied_fraction = 0;
    Quantiles edr;
};

struct MetricsReport {
    double total_utility = 0;
    std::vector<UserMetrics> per_user;
    std::vector<GroupStats> per_group;
    std::vector<double> per_area;  // utility by area index
    std::vector<double> per_slot;  // utility by 0-based slot
    double upper_bound = 0;
    double gap = 0;
    bool has_bounds = false;
};

inline std::vector<UserMetrics> user_metrics(const Scenario& sc, const AllocationPlan& plan) {
    auto edr = compute_edr(sc, plan);
    std::vector<UserMetrics> out(sc.user_count());
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        out[u].edr_mbps = edr[u];
        out[u].utility = user_utility(sc, plan, u);
        out[u].normalized_utility = out[u].utility / sc.tau(u);
        out[u].satisfied = out[u].normalized_utility > kSatisfiedThreshold;
    }
    return out;
}

/// Statistics per distinct value of the attribute, ascending by value.
/// Values no user holds do not appear.
inline std::vector<GroupStats> group_report(const Scenario& sc, const AllocationPlan& plan,
                                            std::string_view attribute) {
    (void)attribute_value(HouseholdProfile{}, attribute);  // rejects unknown names up front
    auto users = user_metrics(sc, plan);
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t u = 0; u < sc.user_count(); ++u)
        groups[attribute_value(sc.household(u), attribute)].push_back(u);

    std::vector<GroupStats> out;
    for (const auto& [value, members] : groups) {
        GroupStats g;
        g.attribute = std::string(attribute);
        g.value = value;
        g.count = members.size();
        std::vector<double> edr;
        double norm = 0, satisfied = 0;
        for (std::size_t u : members) {
            norm += users[u].normalized_utility;
            satisfied += users[u].satisfied ? 1 : 0;
            edr.push_back(users[u].edr_mbps);
        }
        g.mean_normalized_utility = norm / static_cast<double>(members.size());
        g.satisfied_fraction = satisfied / static_cast<double>(members.size());
        g.edr = quantiles(std::move(edr));
        out.push_back(std::move(g));
    }
    return out;
}

inline MetricsReport compute_metrics(const Scenario& sc, const AllocationPlan& plan,
                                     const std::vector<std::string>& group_by = {"income", "race", "education"}) {
    MetricsReport rep;
    rep.per_user = user_metrics(sc, plan);
    rep.per_area.assign(sc.area_count(), 0.0);
    rep.per_slot.assign(static_cast<std::size_t>(sc.horizon()), 0.0);
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        std::size_t n = sc.area_of(u);
        rep.total_utility += rep.per_user[u].utility;
        rep.per_area[n] += rep.per_user[u].utility;
        auto d = static_cast<std::size_t>(std::min(sc.deadline(u), sc.horizon()));
        double v = sc.tau(u) * sigmoid_rate_utility(perceived_rate(sc, plan, u), sc.demand(u), sc.theta());
        for (std::size_t t = 0; t < d; ++t)
            if (plan.z(n, t)) rep.per_slot[t] += v;
    }
    for (const auto& attr : group_by) {
        auto g = group_report(sc, plan, attr);
        rep.per_group.insert(rep.per_group.end(), g.begin(), g.end());
    }
    return rep;
}

inline void attach_bounds(MetricsReport& rep, double upper_bound) {
    rep.has_bounds = true;
    rep.upper_bound = upper_bound;
    rep.gap = upper_bound > 0 ? (upper_bound - rep.total_utility) / upper_bound : 0.0;
}

}  // namespace equiplan
