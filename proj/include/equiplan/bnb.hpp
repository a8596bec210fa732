#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"
#include "equiplan/heuristic.hpp"
#include "equiplan/polish.hpp"
#include "equiplan/relaxation.hpp"

namespace equiplan {

inline constexpr std::size_t kDefaultNodeLimit = 100000;

/// Per-area assignment in a search node.
inline constexpr int kFree = -1;
inline constexpr int kFixedNull = 0;  // positive values: fixed at that 1-based slot

struct BnbNode {
    std::vector<int> assignment;  // per area: kFree, kFixedNull or a slot
    double bound = 0;
    int depth = 0;
    std::size_t id = 0;
    // branching decision, taken when the node is created
    std::size_t branch_area = 0;
    std::vector<int> child_slots;
};

enum class BnbStatus { converged, exhausted, node_limit };

inline std::string_view to_string(BnbStatus s) {
    switch (s) {
        case BnbStatus::converged: return "converged";
        case BnbStatus::exhausted: return "exhausted";
        case BnbStatus::node_limit: return "node_limit";
    }
    return "unknown";
}

struct BnbProgress {
    std::size_t nodes_explored = 0;
    double upper_bound = 0;
    double lower_bound = 0;
    double gap = 0;
};

struct BnbResult {
    AllocationPlan best_plan;
    double lower_bound = 0;  // exact objective of best_plan
    double upper_bound = 0;
    double gap_alpha = 0;
    std::size_t nodes_explored = 0;
    BnbStatus status = BnbStatus::exhausted;
    double root_bound = 0;
    std::vector<BnbProgress> progress;
};

inline double relative_gap(double upper, double lower) {
    if (upper <= 0) return 0.0;
    return std::max(0.0, (upper - lower) / upper);
}

namespace detail {

inline SlotMask node_mask(const Scenario& sc, const std::vector<int>& assignment) {
    SlotMask mask = no_forbidden_slots(sc);
    for (std::size_t n = 0; n < assignment.size(); ++n) {
        if (assignment[n] == kFree) continue;
        for (std::size_t t = 0; t < mask.cols(); ++t)
            if (static_cast<int>(t) + 1 != assignment[n]) mask(n, t) = 1;
    }
    return mask;
}

/// Last slot at which serving the area can still earn utility.
inline int latest_useful_slot(const Scenario& sc, std::size_t area) {
    int d = 0;
    for (std::size_t u : sc.areas()[area].household_ids) d = std::max(d, sc.deadline(u));
    return std::min(d, sc.horizon());
}

/// Picks the free area to branch on and the slots its children fix. Areas
/// whose mass is spread over two or more slots come first (largest mass
/// wins), then areas with any mass, then the lowest-index free area.
inline bool choose_branch(const Scenario& sc, const std::vector<int>& assignment, const Grid<double>& x,
                          std::size_t& area, std::vector<int>& slots) {
    const auto T = static_cast<std::size_t>(sc.horizon());
    Grid<double> mass(sc.area_count(), T, 0.0);
    for (std::size_t u = 0; u < sc.user_count(); ++u)
        for (std::size_t t = 0; t < T; ++t)
            if (x(u, t) > kActiveThreshold) mass(sc.area_of(u), t) += x(u, t);

    int best_class = -1;
    double best_mass = -1;
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        if (assignment[n] != kFree) continue;
        int active = 0;
        double total = 0;
        for (std::size_t t = 0; t < T; ++t) {
            active += mass(n, t) > 0;
            total += mass(n, t);
        }
        int cls = active >= 2 ? 2 : (active == 1 ? 1 : 0);
        if (cls > best_class || (cls == best_class && total > best_mass)) {
            best_class = cls;
            best_mass = total;
            area = n;
        }
    }
    if (best_class < 0) return false;

    slots.clear();
    for (std::size_t t = 0; t < T; ++t)
        if (mass(area, t) > 0) slots.push_back(static_cast<int>(t) + 1);
    // Zero-mass slots still hold feasible plans; dropping them would make
    // the subtree bounds incomplete.
    int last = latest_useful_slot(sc, area);
    for (int t = 1; t <= last; ++t)
        if (mass(area, static_cast<std::size_t>(t - 1)) <= 0) slots.push_back(t);
    return true;
}

/// Plan from a single-slot-consistent node solution. Areas the node fixes
/// at a slot count as served there even when the LP left them empty, so the
/// local improvement can still hand them capacity.
inline AllocationPlan node_plan(const Scenario& sc, const Grid<double>& x, const std::vector<int>& assignment) {
    auto z = active_slots(sc, x);
    std::vector<int> slots(sc.area_count(), 0);
    std::vector<double> deployed(sc.area_count(), 0.0);
    std::vector<double> shares(sc.user_count(), 0.0);
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        if (assignment[n] > 0) {
            slots[n] = assignment[n];
        } else if (assignment[n] == kFree) {
            for (std::size_t t = 0; t < z.cols(); ++t)
                if (z(n, t)) slots[n] = static_cast<int>(t) + 1;
        }
        if (slots[n] == 0) continue;
        auto t = static_cast<std::size_t>(slots[n] - 1);
        const auto& members = sc.areas()[n].household_ids;
        double total = 0;
        for (std::size_t u : members)
            if (x(u, t) > kActiveThreshold) total += x(u, t);
        deployed[n] = total;
        for (std::size_t u : members)
            shares[u] = total > 0 ? (x(u, t) > kActiveThreshold ? x(u, t) / total : 0.0)
                                  : 1.0 / static_cast<double>(members.size());
    }
    return make_plan(sc, slots, deployed, shares);
}

}  // namespace detail

/// Best-first branch and bound over area serve slots with the envelope LP as
/// node bound. The incumbent starts from the rounding heuristic and is
/// replaced whenever a node relaxation is single-slot consistent and its
/// extracted (and locally improved) plan scores higher.
inline BnbResult solve_bnb(const Scenario& sc, double alpha_target, std::size_t node_limit = kDefaultNodeLimit) {
    if (!(alpha_target > 0) || !(alpha_target < 1)) throw ArgumentError("alpha must lie in (0, 1)");

    BnbResult res;
    const auto env = build_user_envelopes(sc);
    const double eps = 1e-9;

    auto offer = [&](const AllocationPlan& candidate) {
        AllocationPlan improved = improve_allocation(sc, candidate);
        double v = total_true_objective(sc, improved);
        if (v > res.lower_bound + 1e-12 * std::max(1.0, v)) {
            res.lower_bound = v;
            res.best_plan = std::move(improved);
        }
    };

    {
        auto seed = solve_heuristic(sc);
        res.best_plan = seed.final_plan;
        res.lower_bound = seed.true_objective;
        offer(seed.final_plan);
    }

    std::size_t next_id = 0;
    double leaf_max = 0;

    // Solves the node relaxation; returns false when the node is closed at
    // creation (infeasible, pruned, or a fully fixed leaf).
    auto evaluate = [&](BnbNode& node) {
        auto sol = solve_relaxation(sc, env, detail::node_mask(sc, node.assignment));
        if (sol.status != LpStatus::optimal)
            throw std::logic_error("node relaxation ended with status " + std::string(to_string(sol.status)));
        node.bound = sol.value;
        if (multiply_served_areas(active_slots(sc, sol.x)).empty()) offer(detail::node_plan(sc, sol.x, node.assignment));
        if (node.bound <= res.lower_bound + eps) return false;
        if (!detail::choose_branch(sc, node.assignment, sol.x, node.branch_area, node.child_slots)) {
            leaf_max = std::max(leaf_max, node.bound);
            return false;
        }
        return true;
    };

    auto worse = [](const BnbNode& a, const BnbNode& b) {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    };
    std::priority_queue<BnbNode, std::vector<BnbNode>, decltype(worse)> open(worse);

    BnbNode root;
    root.assignment.assign(sc.area_count(), kFree);
    root.id = next_id++;
    bool root_open = evaluate(root);
    res.root_bound = root.bound;
    if (root_open) open.push(std::move(root));

    auto current_upper = [&]() {
        double ub = std::max(leaf_max, res.lower_bound);
        if (!open.empty()) ub = std::max(ub, open.top().bound);
        return ub;
    };

    res.status = BnbStatus::exhausted;
    while (!open.empty()) {
        double ub = current_upper();
        if (relative_gap(ub, res.lower_bound) <= alpha_target) {
            res.status = BnbStatus::converged;
            break;
        }
        if (res.nodes_explored >= node_limit) {
            res.status = BnbStatus::node_limit;
            break;
        }
        BnbNode node = open.top();
        open.pop();
        ++res.nodes_explored;
        if (node.bound > res.lower_bound + eps) {
            auto make_child = [&](int state) {
                BnbNode child;
                child.assignment = node.assignment;
                child.assignment[node.branch_area] = state;
                child.depth = node.depth + 1;
                child.id = next_id++;
                if (evaluate(child)) open.push(std::move(child));
            };
            for (int t : node.child_slots) make_child(t);
            make_child(kFixedNull);
        }
        double after = current_upper();
        res.progress.push_back({res.nodes_explored, after, res.lower_bound, relative_gap(after, res.lower_bound)});
    }

    res.upper_bound = current_upper();
    res.gap_alpha = relative_gap(res.upper_bound, res.lower_bound);
    if (res.status == BnbStatus::exhausted && res.gap_alpha <= alpha_target) res.status = BnbStatus::converged;
    return res;
}

/// (UB - objective(plan)) / UB for a feasible plan.
inline double certify(const Scenario& sc, const AllocationPlan& plan, const BnbResult& result) {
    double v = total_true_objective(sc, plan);
    if (result.upper_bound <= 0) {
        if (v == 0) return 0.0;
        throw ArgumentError("upper bound is zero but the plan has positive objective");
    }
    return (result.upper_bound - v) / result.upper_bound;
}

inline void write_progress_csv(std::ostream& out, const BnbResult& result) {
    out << "nodes_explored,ub,lb,gap\n";
    for (const auto& p : result.progress)
        out << p.nodes_explored << ',' << format_report(p.upper_bound) << ',' << format_report(p.lower_bound)
            << ',' << format_report(p.gap) << '\n';
}

}  // namespace equiplan
