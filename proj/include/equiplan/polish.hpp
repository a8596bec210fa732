#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "equiplan/utility.hpp"

namespace equiplan {

namespace detail {

struct PolishState {
    const Scenario* sc = nullptr;
    std::vector<int> slot;    // per user: 0-based serve slot, -1 when no utility is possible
    std::vector<double> x;    // per user
    std::vector<double> load; // window load per slot

    double value(std::size_t u, double v) const {
        return sc->tau(u) * sigmoid_rate_utility(v, sc->demand(u), sc->theta());
    }

    // Windows [t - delta, t] containing slot a.
    std::pair<int, int> windows_of(int a) const {
        int T = sc->horizon();
        return {a, std::min(T - 1, a + sc->freezeout())};
    }

    // Largest amount that can move onto slot a while leaving slot b (b = -1:
    // taken from nowhere).
    double room(int a, int b) const {
        auto [lo, hi] = windows_of(a);
        double r = kRoomUnbounded;
        for (int t = lo; t <= hi; ++t) {
            bool holds_b = b >= 0 && b <= t && b >= t - sc->freezeout();
            if (!holds_b) r = std::min(r, sc->smax() - load[static_cast<std::size_t>(t)]);
        }
        return std::max(r, 0.0);
    }

    void shift(int slot_t, double amount) {
        auto [lo, hi] = windows_of(slot_t);
        for (int t = lo; t <= hi; ++t) load[static_cast<std::size_t>(t)] += amount;
    }

    static constexpr double kRoomUnbounded = 1e300;
};

/// Lifts one user sitting below its demand past the sigmoid knee, paying
/// with other users' surplus above their own knee and, if that is not
/// enough, by emptying the users worth least. Small transfers cannot cross
/// the flat part of the sigmoid, so without this a plan can stay stuck with
/// one over-served user and one starving one. Applies the best improving
/// move and reports whether it found one.
inline bool activate_starving(PolishState& st, const std::vector<std::size_t>& live) {
    const Scenario& sc = *st.sc;
    const double S = sc.smax();
    auto total = [&](const PolishState& s) {
        double v = 0;
        for (std::size_t u : live) v += s.value(u, s.x[u]);
        return v;
    };
    const double base = total(st);
    double best = base;
    PolishState best_state;

    for (std::size_t i : live) {
        if (st.x[i] >= sc.demand(i)) continue;
        for (double knee : {1.0, 2.0, 3.0, 5.0}) {
            PolishState s = st;
            double lift = sc.demand(i) + knee / sc.theta() - s.x[i];
            if (lift > S) continue;
            s.x[i] += lift;
            s.shift(s.slot[i], lift);

            auto overload = [&](int slot) {
                auto [lo, hi] = s.windows_of(slot);
                double o = 0;
                for (int t = lo; t <= hi; ++t) o = std::max(o, s.load[static_cast<std::size_t>(t)] - S);
                return o;
            };
            auto cut = [&](std::size_t j, double floor_rate) {
                double m = std::min(std::max(0.0, s.x[j] - floor_rate), overload(s.slot[j]));
                if (m <= 0) return;
                s.x[j] -= m;
                s.shift(s.slot[j], -m);
            };
            std::vector<std::size_t> donors;
            for (std::size_t j : live)
                if (j != i && s.x[j] > 0) donors.push_back(j);
            // trim surplus first, largest surplus first
            std::sort(donors.begin(), donors.end(), [&](std::size_t a, std::size_t b) {
                double sa = s.x[a] - sc.demand(a), sb = s.x[b] - sc.demand(b);
                return sa != sb ? sa > sb : a < b;
            });
            for (std::size_t j : donors) cut(j, sc.demand(j) + knee / sc.theta());
            // then give up whole users, cheapest first
            std::sort(donors.begin(), donors.end(), [&](std::size_t a, std::size_t b) {
                double va = s.value(a, s.x[a]), vb = s.value(b, s.x[b]);
                return va != vb ? va < vb : a < b;
            });
            for (std::size_t j : donors) cut(j, 0.0);

            bool fits = true;
            for (double l : s.load) fits &= l <= S + capacity_tolerance(S) * 0.5;
            if (!fits) continue;
            double v = total(s);
            if (v > best + 1e-12 * std::max(1.0, best)) {
                best = v;
                best_state = s;
            }
        }
    }
    if (best_state.sc == nullptr) return false;
    st = std::move(best_state);
    return true;
}

}  // namespace detail

/// Local improvement of the allocation under fixed serve slots: users served
/// after their deadline release their share, idle window capacity is handed
/// out, and pairwise transfers are applied while the exact objective rises.
/// Serve slots never change, so feasibility is preserved.
inline AllocationPlan improve_allocation(const Scenario& sc, const AllocationPlan& plan,
                                         std::size_t transfer_user_limit = 200) {
    detail::PolishState st;
    st.sc = &sc;
    const std::size_t K = sc.user_count();
    st.slot.assign(K, -1);
    st.x.assign(K, 0.0);
    st.load.assign(static_cast<std::size_t>(sc.horizon()), 0.0);

    std::vector<std::size_t> live;
    for (std::size_t u = 0; u < K; ++u) {
        std::size_t n = sc.area_of(u);
        int t = plan.serve_slot(n);
        if (t == 0 || t > sc.deadline(u)) continue;
        st.slot[u] = t - 1;
        st.x[u] = std::max(0.0, plan.w[u] * plan.s[n]);
        st.shift(t - 1, st.x[u]);
        live.push_back(u);
    }

    constexpr int kRounds = 20;
    constexpr int kCoarse = 16;
    for (int round = 0; round < kRounds; ++round) {
        bool improved = false;
        for (std::size_t u : live) {
            double r = st.room(st.slot[u], -1);
            if (r > 1e-12 && st.value(u, st.x[u] + r) > st.value(u, st.x[u])) {
                st.x[u] += r;
                st.shift(st.slot[u], r);
                improved = true;
            }
        }
        if (live.size() <= transfer_user_limit) {
            for (std::size_t i : live)
                for (std::size_t j : live) {
                    if (i == j || st.x[j] <= 0) continue;
                    double m_max = std::min(st.x[j], st.room(st.slot[i], st.slot[j]));
                    if (m_max <= 1e-12) continue;
                    double base = st.value(i, st.x[i]) + st.value(j, st.x[j]);
                    auto gain = [&](double m) {
                        return st.value(i, st.x[i] + m) + st.value(j, st.x[j] - m) - base;
                    };
                    double best_m = 0, best_g = 0;
                    for (int c = 1; c <= kCoarse; ++c) {
                        double m = m_max * c / kCoarse;
                        double g = gain(m);
                        if (g > best_g) best_g = g, best_m = m;
                    }
                    if (best_m > 0) {
                        // golden-section refinement around the best coarse point
                        double a = std::max(0.0, best_m - m_max / kCoarse);
                        double b = std::min(m_max, best_m + m_max / kCoarse);
                        const double phi = 0.6180339887498949;
                        for (int it = 0; it < 40 && b - a > 1e-12 * std::max(1.0, m_max); ++it) {
                            double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
                            if (gain(c1) >= gain(c2))
                                b = c2;
                            else
                                a = c1;
                        }
                        double m = 0.5 * (a + b);
                        if (gain(m) > best_g) best_g = gain(m), best_m = m;
                    }
                    if (best_g > 1e-12 * std::max(1.0, base)) {
                        st.x[i] += best_m;
                        st.x[j] -= best_m;
                        st.shift(st.slot[i], best_m);
                        st.shift(st.slot[j], -best_m);
                        improved = true;
                    }
                }
        }
        if (live.size() <= transfer_user_limit && detail::activate_starving(st, live)) improved = true;
        if (!improved) break;
    }

    std::vector<int> slots(sc.area_count(), 0);
    std::vector<double> deployed(sc.area_count(), 0.0);
    std::vector<double> shares(K, 0.0);
    for (std::size_t n = 0; n < sc.area_count(); ++n) {
        slots[n] = plan.serve_slot(n);
        if (slots[n] == 0) continue;
        const auto& members = sc.areas()[n].household_ids;
        double total = 0;
        for (std::size_t u : members) total += st.x[u];
        deployed[n] = total;
        for (std::size_t u : members)
            shares[u] = total > 0 ? st.x[u] / total : 1.0 / static_cast<double>(members.size());
    }
    return make_plan(sc, slots, deployed, shares);
}

}  // namespace equiplan
