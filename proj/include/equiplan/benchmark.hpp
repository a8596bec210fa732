#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/lp.hpp"
#include "equiplan/utility.hpp"

namespace equiplan {

/// Service differentiation: the fraction phi of a user's demand that must be
/// delivered when served.
struct BenchmarkConfig {
    std::vector<std::pair<double, double>> phi_by_demand = {{1.0, 1.0}};  // (demand Mbps, phi)
    double phi_default = 0.0;
    bool strict = false;          // every phi > 0 user must be served by the deadline
    bool per_area_split = false;  // leftover split evenly across areas instead of users
    std::size_t node_limit = 100000;

    double phi(double demand) const {
        for (const auto& [d, p] : phi_by_demand)
            if (d == demand) return p;
        return phi_default;
    }
};

inline void validate_config(const BenchmarkConfig& c) {
    auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!ok(c.phi_default)) throw ArgumentError("phi must lie in [0, 1]");
    for (const auto& [d, p] : c.phi_by_demand)
        if (!ok(p)) throw ArgumentError("phi must lie in [0, 1]");
}

enum class BenchmarkStatus { optimal, node_limit, model_infeasible };

inline std::string_view to_string(BenchmarkStatus s) {
    switch (s) {
        case BenchmarkStatus::optimal: return "optimal";
        case BenchmarkStatus::node_limit: return "node_limit";
        case BenchmarkStatus::model_infeasible: return "model_infeasible";
    }
    return "unknown";
}

struct BenchmarkPlan {
    Grid<std::uint8_t> z;        // area x slot
    std::vector<double> s_user;  // Mbps per user
    int served_count = 0;        // users served no later than their deadline
    BenchmarkStatus status = BenchmarkStatus::optimal;
    std::vector<std::size_t> blocking_users;  // strict mode only
    std::size_t nodes_explored = 0;

    int serve_slot(std::size_t area) const {
        for (std::size_t t = 0; t < z.cols(); ++t)
            if (z(area, t)) return static_cast<int>(t) + 1;
        return 0;
    }

    friend bool operator==(const BenchmarkPlan&, const BenchmarkPlan&) = default;
};

/// Minimum rate r_hat * phi owed to the user when served in time.
inline double minimum_rate(const Scenario& sc, const BenchmarkConfig& c, std::size_t user) {
    return sc.demand(user) * c.phi(sc.demand(user));
}

namespace detail {

struct BoColumn {
    std::size_t area;
    int slot;          // 1-based
    double count;      // users with deadline >= slot
    double resource;   // sum of their minimum rates
};

struct BoModel {
    LpProblem lp;
    std::vector<BoColumn> cols;
};

/// LP over z(area, slot) in [0, 1]: at most one slot per area, window
/// capacity on the minimum rates of in-time users, and (strict) a served slot
/// within every critical user's deadline.
inline BoModel build_bo_model(const Scenario& sc, const BenchmarkConfig& c, bool strict) {
    BoModel m;
    const int T = sc.horizon();
    std::vector<std::vector<int>> col_of(sc.area_count(), std::vector<int>(static_cast<std::size_t>(T), -1));
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        for (int t = 1; t <= T; ++t) {
            double count = 0, res = 0;
            for (std::size_t u : sc.areas()[n].household_ids)
                if (sc.deadline(u) >= t) {
                    count += 1;
                    res += minimum_rate(sc, c, u);
                }
            if (count == 0) continue;
            col_of[n][static_cast<std::size_t>(t - 1)] = m.lp.add_column(count, 0.0, 1.0);
            m.cols.push_back({n, t, count, res});
        }
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        std::vector<LpTerm> terms;
        for (int v : col_of[n])
            if (v >= 0) terms.push_back({v, 1.0});
        if (!terms.empty()) m.lp.add_row(std::move(terms), Relation::less_equal, 1.0);
    }
    for (int t = 1; t <= T; ++t) {
        std::vector<LpTerm> terms;
        for (std::size_t i = 0; i < m.cols.size(); ++i) {
            int q = m.cols[i].slot;
            if (q >= t - sc.freezeout() && q <= t && m.cols[i].resource > 0)
                terms.push_back({static_cast<int>(i), m.cols[i].resource});
        }
        if (!terms.empty()) m.lp.add_row(std::move(terms), Relation::less_equal, sc.smax());
    }
    if (strict)
        for (std::size_t u = 0; u < sc.user_count(); ++u) {
            if (minimum_rate(sc, c, u) <= 0) continue;
            std::vector<LpTerm> terms;
            std::size_t n = sc.area_of(u);
            for (int t = 1; t <= std::min(sc.deadline(u), T); ++t) {
                int v = col_of[n][static_cast<std::size_t>(t - 1)];
                if (v >= 0) terms.push_back({v, 1.0});
            }
            m.lp.add_row(std::move(terms), Relation::greater_equal, 1.0);
        }
    return m;
}

inline bool satisfies(const BoModel& m, const std::vector<double>& z) {
    return max_violation(m.lp, z) <= 1e-9;
}

/// Serves areas in index order at the slot with the most in-time users that
/// still fits the windows.
inline std::vector<double> greedy_assignment(const Scenario& sc, const BoModel& m) {
    std::vector<double> z(m.cols.size(), 0.0);
    std::vector<double> used(static_cast<std::size_t>(sc.horizon()), 0.0);
    const double tol = capacity_tolerance(sc.smax());
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        int best = -1;
        for (std::size_t i = 0; i < m.cols.size(); ++i) {
            if (m.cols[i].area != n) continue;
            auto t = static_cast<std::size_t>(m.cols[i].slot - 1);
            used[t] += m.cols[i].resource;
            bool fits = true;
            for (double w : window_loads(used, sc.freezeout())) fits &= w <= sc.smax() + tol;
            used[t] -= m.cols[i].resource;
            if (fits && (best < 0 || m.cols[i].count > m.cols[static_cast<std::size_t>(best)].count))
                best = static_cast<int>(i);
        }
        if (best >= 0) {
            z[static_cast<std::size_t>(best)] = 1.0;
            used[static_cast<std::size_t>(m.cols[static_cast<std::size_t>(best)].slot - 1)] +=
                m.cols[static_cast<std::size_t>(best)].resource;
        }
    }
    return z;
}

struct BoSearch {
    std::vector<double> z;
    double value = -1;  // -1: no feasible assignment found
    bool complete = true;
    std::size_t nodes = 0;
};

/// Best-first branch and bound on the binary z columns. Bounds are floored
/// since the objective counts users.
inline BoSearch search_bo(const Scenario& sc, const BoModel& m, std::size_t node_limit) {
    BoSearch out;
    auto greedy = greedy_assignment(sc, m);
    if (satisfies(m, greedy)) {
        out.z = greedy;
        out.value = 0;
        for (std::size_t i = 0; i < greedy.size(); ++i) out.value += greedy[i] * m.cols[i].count;
    }

    struct Node {
        std::vector<double> lo, hi;
        double bound;
        std::size_t id;
        int branch;  // column to branch on
    };
    auto worse = [](const Node& a, const Node& b) {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    std::size_t next_id = 0;

    auto evaluate = [&](std::vector<double> lo, std::vector<double> hi) {
        LpProblem p = m.lp;
        p.lower = lo;
        p.upper = hi;
        auto sol = solve_lp(p);
        if (sol.status != LpStatus::optimal) return;
        double bound = std::floor(sol.objective_value + 1e-6);
        if (bound <= out.value) return;
        int branch = -1;
        double best_frac = 0;
        for (std::size_t i = 0; i < sol.x_values.size(); ++i) {
            double f = sol.x_values[i] - std::floor(sol.x_values[i]);
            double dist = std::min(f, 1.0 - f);
            if (dist > 1e-9 && dist > best_frac + 1e-12) {
                best_frac = dist;
                branch = static_cast<int>(i);
            }
        }
        if (branch < 0) {
            std::vector<double> z(sol.x_values.size());
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::round(sol.x_values[i]);
            double v = 0;
            for (std::size_t i = 0; i < z.size(); ++i) v += z[i] * m.cols[i].count;
            if (v > out.value && satisfies(m, z)) {
                out.value = v;
                out.z = std::move(z);
            }
            return;
        }
        open.push(Node{std::move(lo), std::move(hi), bound, next_id++, branch});
    };

    evaluate(m.lp.lower, m.lp.upper);
    while (!open.empty()) {
        if (open.top().bound <= out.value) break;
        if (out.nodes >= node_limit) {
            out.complete = false;
            break;
        }
        Node node = open.top();
        open.pop();
        ++out.nodes;
        auto b = static_cast<std::size_t>(node.branch);
        auto lo1 = node.lo;
        lo1[b] = 1.0;
        evaluate(std::move(lo1), node.hi);
        auto hi0 = node.hi;
        hi0[b] = 0.0;
        evaluate(node.lo, std::move(hi0));
    }
    return out;
}

inline BenchmarkPlan plan_from_assignment(const Scenario& sc, const BenchmarkConfig& c, const BoModel& m,
                                          const std::vector<double>& z) {
    BenchmarkPlan plan;
    plan.z = Grid<std::uint8_t>(sc.area_count(), static_cast<std::size_t>(sc.horizon()), 0);
    plan.s_user.assign(sc.user_count(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] > 0.5) plan.z(m.cols[i].area, static_cast<std::size_t>(m.cols[i].slot - 1)) = 1;
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        int t = plan.serve_slot(sc.area_of(u));
        if (t > 0 && t <= sc.deadline(u)) {
            plan.s_user[u] = minimum_rate(sc, c, u);
            ++plan.served_count;
        }
    }
    return plan;
}

}  // namespace detail

/// Maximises the number of users served by their deadline subject to window
/// capacity on the minimum rates. The minimum rate binds only for users whose
/// area is served in time unless config.strict is set; in strict mode an
/// unsatisfiable model yields status model_infeasible, the best plan of the
/// conditional model, and the critical users it leaves unserved.
inline BenchmarkPlan solve_benchmark(const Scenario& sc, const BenchmarkConfig& config) {
    validate_config(config);
    auto model = detail::build_bo_model(sc, config, config.strict);
    auto found = detail::search_bo(sc, model, config.node_limit);
    if (found.value >= 0) {
        auto plan = detail::plan_from_assignment(sc, config, model, found.z);
        plan.status = found.complete ? BenchmarkStatus::optimal : BenchmarkStatus::node_limit;
        plan.nodes_explored = found.nodes;
        return plan;
    }
    if (!config.strict) throw std::logic_error("benchmark model without a feasible assignment");

    // Strict reading failed: report the conditional optimum and who blocks.
    auto relaxed = detail::build_bo_model(sc, config, false);
    auto fallback = detail::search_bo(sc, relaxed, config.node_limit);
    auto plan = detail::plan_from_assignment(sc, config, relaxed, fallback.z);
    plan.status = BenchmarkStatus::model_infeasible;
    plan.nodes_explored = found.nodes + fallback.nodes;
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        int t = plan.serve_slot(sc.area_of(u));
        if (minimum_rate(sc, config, u) > 0 && (t == 0 || t > sc.deadline(u))) plan.blocking_users.push_back(u);
    }
    return plan;
}

/// Hands leftover window capacity to users served in time by progressive
/// filling: all growing units rise together until some window is full, the
/// units in full windows stop, and the rest continue. A unit is a user, or an
/// area (split evenly among its in-time users) when per_area is set.
inline BenchmarkPlan redistribute_surplus(const Scenario& sc, const BenchmarkPlan& plan, bool per_area = false) {
    BenchmarkPlan out = plan;
    const auto T = static_cast<std::size_t>(sc.horizon());
    const int delta = sc.freezeout();

    std::vector<double> usage(T, 0.0);
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        int t = plan.serve_slot(sc.area_of(u));
        if (t > 0) usage[static_cast<std::size_t>(t - 1)] += plan.s_user[u];
    }

    struct Unit {
        std::size_t slot;  // 0-based
        std::vector<std::size_t> users;
        bool growing = true;
    };
    std::vector<Unit> units;
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        int t = plan.serve_slot(n);
        if (t == 0) continue;
        std::vector<std::size_t> in_time;
        for (std::size_t u : sc.areas()[n].household_ids)
            if (sc.deadline(u) >= t) in_time.push_back(u);
        if (in_time.empty()) continue;
        if (per_area) {
            units.push_back({static_cast<std::size_t>(t - 1), in_time, true});
        } else {
            for (std::size_t u : in_time) units.push_back({static_cast<std::size_t>(t - 1), {u}, true});
        }
    }

    auto in_window = [&](std::size_t slot, std::size_t t) {
        return slot <= t && slot + static_cast<std::size_t>(delta) >= t;
    };
    const double tol = 1e-12 * std::max(1.0, sc.smax());
    for (std::size_t guard = 0; guard <= units.size() + T; ++guard) {
        auto load = window_loads(usage, delta);
        double step = kInf;
        std::size_t growing = 0;
        for (std::size_t t = 0; t < T; ++t) {
            double count = 0;
            for (const auto& un : units)
                if (un.growing && in_window(un.slot, t)) count += 1;
            if (count > 0) step = std::min(step, std::max(0.0, sc.smax() - load[t]) / count);
        }
        for (const auto& un : units) growing += un.growing;
        if (growing == 0 || step == kInf) break;
        for (auto& un : units) {
            if (!un.growing) continue;
            double each = step / static_cast<double>(un.users.size());
            for (std::size_t u : un.users) out.s_user[u] += each;
            usage[un.slot] += step;
        }
        load = window_loads(usage, delta);
        for (std::size_t t = 0; t < T; ++t)
            if (sc.smax() - load[t] <= tol)
                for (auto& un : units)
                    if (in_window(un.slot, t)) un.growing = false;
    }
    return out;
}

/// Checks Problem-13 style feasibility: one slot per area, minimum rates for
/// users served in time (for every critical user in strict mode), window
/// capacity and non-negative rates.
inline std::vector<Violation> validate_benchmark(const Scenario& sc, const BenchmarkConfig& c,
                                                 const BenchmarkPlan& plan) {
    std::vector<Violation> out;
    const auto T = static_cast<std::size_t>(sc.horizon());
    if (plan.z.rows() != sc.area_count() || plan.z.cols() != T || plan.s_user.size() != sc.user_count()) {
        out.push_back({violation::shape, "plan dimensions do not match the scenario"});
        return out;
    }
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        int served = 0;
        for (std::size_t t = 0; t < T; ++t) served += plan.z(n, t) != 0;
        if (served > 1)
            out.push_back({violation::once_served, "area " + std::to_string(sc.areas()[n].area_id) +
                                                       " served " + std::to_string(served) + " times"});
    }
    std::vector<double> usage(T, 0.0);
    for (std::size_t u = 0; u < sc.user_count(); ++u) {
        if (plan.s_user[u] < 0)
            out.push_back({violation::deploy_bounds, "user " + sc.household(u).id + ": negative rate"});
        int t = plan.serve_slot(sc.area_of(u));
        if (t > 0) usage[static_cast<std::size_t>(t - 1)] += plan.s_user[u];
        bool in_time = t > 0 && t <= sc.deadline(u);
        double need = minimum_rate(sc, c, u);
        if (need > 0 && (in_time || c.strict) && (!in_time || plan.s_user[u] < need - 1e-9 * std::max(1.0, need)))
            out.push_back({violation::minimum_rate, "user " + sc.household(u).id + ": minimum rate not met"});
    }
    auto load = window_loads(usage, sc.freezeout());
    for (std::size_t t = 0; t < T; ++t)
        if (load[t] > sc.smax() + capacity_tolerance(sc.smax()))
            out.push_back({violation::window_capacity, "slot " + std::to_string(t + 1) + ": window load " +
                                                           std::to_string(load[t]) + " exceeds S_max"});
    return out;
}

/// Expresses a benchmark plan as <z, s, w> with s_n = sum of the area's user
/// rates and w = s_user / s_n (uniform when s_n = 0).
inline AllocationPlan to_allocation_plan(const Scenario& sc, const BenchmarkPlan& plan) {
    std::vector<int> slots(sc.area_count(), 0);
    std::vector<double> deployed(sc.area_count(), 0.0);
    std::vector<double> shares(sc.user_count(), 0.0);
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        slots[n] = plan.serve_slot(n);
        const auto& members = sc.areas()[n].household_ids;
        double total = 0;
        for (std::size_t u : members) total += plan.s_user[u];
        deployed[n] = slots[n] ? total : 0.0;
        for (std::size_t u : members)
            shares[u] = total > 0 ? plan.s_user[u] / total : 1.0 / static_cast<double>(members.size());
    }
    return make_plan(sc, slots, deployed, shares);
}

}  // namespace equiplan
