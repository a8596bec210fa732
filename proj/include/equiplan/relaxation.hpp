#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "equiplan/envelope.hpp"
#include "equiplan/grid.hpp"
#include "equiplan/lp.hpp"
#include "equiplan/scenario.hpp"

namespace equiplan {

/// (area, slot) pairs excluded from the relaxation; 1 = forbidden.
using SlotMask = Grid<std::uint8_t>;

inline SlotMask no_forbidden_slots(const Scenario& sc) {
    return SlotMask(sc.area_count(), static_cast<std::size_t>(sc.horizon()), 0);
}

/// Interval [0, S] the envelopes must dominate on. A degenerate S_max = 0
/// uses [0, 1], which still covers the only feasible point.
inline double envelope_domain(const Scenario& sc) { return sc.smax() > 0 ? sc.smax() : 1.0; }

/// Envelope coefficients depend only on (tau, r_hat), so one piece per user
/// serves every slot of that user.
inline std::vector<EnvelopePiece> build_user_envelopes(const Scenario& sc) {
    std::vector<EnvelopePiece> out;
    out.reserve(sc.user_count());
    for (std::size_t u = 0; u < sc.user_count(); ++u)
        out.push_back(build_envelope(sc.tau(u), sc.demand(u), sc.theta(), envelope_domain(sc)));
    return out;
}

struct RelaxationColumn {
    std::size_t user = 0;
    std::size_t area = 0;
    int slot = 1;  // 1-based
};

/// Columns x(user, slot) exist only for slots no later than the user's
/// deadline whose (area, slot) pair is not forbidden. With include_late the
/// slots past the deadline are admitted too.
inline std::vector<RelaxationColumn> admitted_columns(const Scenario& sc, const SlotMask& forbidden,
                                                      bool include_late = false) {
    std::vector<RelaxationColumn> cols;
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        for (std::size_t u : sc.areas()[n].household_ids) {
            int d = include_late ? sc.horizon() : std::min(sc.deadline(u), sc.horizon());
            for (int t = 1; t <= d; ++t)
                if (!forbidden(n, static_cast<std::size_t>(t - 1))) cols.push_back({u, n, t});
        }
    return cols;
}

/// Auxiliary-variable LP: maximize sum beta subject to
///   beta <= a x + b,  beta <= tau,  windowed capacity,  0 <= x <= S_max.
/// Columns past a deadline (include_late only) earn nothing and get no beta.
struct RelaxationModel {
    LpProblem lp;
    std::vector<RelaxationColumn> columns;
    std::vector<int> x_column;     // LP column of x for columns[i]
    std::vector<int> beta_column;  // LP column of beta for columns[i], -1 for late columns
    std::size_t capacity_rows = 0;
    std::size_t envelope_rows = 0;

    /// LP column of x(user, slot), or -1 when that column was eliminated.
    int column_of(std::size_t user, int slot) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].user == user && columns[i].slot == slot) return x_column[i];
        return -1;
    }
};

inline RelaxationModel build_relaxation(const Scenario& sc, std::span<const EnvelopePiece> envelopes,
                                        const SlotMask& forbidden, bool include_late = false) {
    RelaxationModel m;
    m.columns = admitted_columns(sc, forbidden, include_late);
    const double S = sc.smax();
    auto late = [&](const RelaxationColumn& c) { return c.slot > sc.deadline(c.user); };
    for (std::size_t i = 0; i < m.columns.size(); ++i) m.x_column.push_back(m.lp.add_column(0.0, 0.0, S));
    for (std::size_t i = 0; i < m.columns.size(); ++i)
        m.beta_column.push_back(late(m.columns[i]) ? -1 : m.lp.add_column(1.0, 0.0, kInf));

    const int T = sc.horizon(), delta = sc.freezeout();
    for (int t = 1; t <= T; ++t) {
        std::vector<LpTerm> terms;
        for (std::size_t i = 0; i < m.columns.size(); ++i) {
            int q = m.columns[i].slot;
            if (q >= t - delta && q <= t) terms.push_back({m.x_column[i], 1.0});
        }
        m.lp.add_row(std::move(terms), Relation::less_equal, S);
        ++m.capacity_rows;
    }
    for (std::size_t i = 0; i < m.columns.size(); ++i) {
        if (m.beta_column[i] < 0) continue;
        const EnvelopePiece& e = envelopes[m.columns[i].user];
        m.lp.add_row({{m.beta_column[i], 1.0}, {m.x_column[i], -e.a}}, Relation::less_equal, e.b);
        m.lp.add_row({{m.beta_column[i], 1.0}}, Relation::less_equal, e.cap);
        m.envelope_rows += 2;
    }
    return m;
}

struct RelaxationSolution {
    LpStatus status = LpStatus::optimal;
    double value = 0;         // sum of beta at the optimum
    Grid<double> x;           // user x slot
    std::size_t iterations = 0;
    std::size_t columns = 0;  // admitted x columns
};

/// Solves the relaxation through its compact equivalent. Writing
/// beta = b + a y with 0 <= y <= min(S_max, (tau - b) / a) removes both
/// envelope rows per column; any x above the cap point buys nothing, so the
/// optimal values coincide and y is an optimal x.
inline RelaxationSolution solve_relaxation(const Scenario& sc, std::span<const EnvelopePiece> envelopes,
                                           const SlotMask& forbidden) {
    RelaxationSolution out;
    const auto T = static_cast<std::size_t>(sc.horizon());
    out.x = Grid<double>(sc.user_count(), T, 0.0);
    auto cols = admitted_columns(sc, forbidden);
    out.columns = cols.size();

    LpProblem lp;
    double baseline = 0;
    const double S = std::max(sc.smax(), 0.0);
    for (const auto& c : cols) {
        const EnvelopePiece& e = envelopes[c.user];
        lp.add_column(e.a, 0.0, std::min(S, e.cap_point()));
        baseline += e.b;
    }
    const int delta = sc.freezeout();
    for (int t = 1; t <= sc.horizon(); ++t) {
        std::vector<LpTerm> terms;
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].slot >= t - delta && cols[i].slot <= t) terms.push_back({static_cast<int>(i), 1.0});
        if (!terms.empty()) lp.add_row(std::move(terms), Relation::less_equal, S);
    }
    auto sol = solve_lp(lp);
    out.status = sol.status;
    out.iterations = sol.iterations;
    if (sol.status != LpStatus::optimal) return out;
    out.value = sol.objective_value + baseline;
    for (std::size_t i = 0; i < cols.size(); ++i)
        out.x(cols[i].user, static_cast<std::size_t>(cols[i].slot - 1)) = sol.x_values[i];
    return out;
}

/// Optimal value of the relaxation with nothing forbidden; an upper bound on
/// the exact-sigmoid objective of every feasible plan.
inline double relaxation_upper_bound(const Scenario& sc) {
    auto env = build_user_envelopes(sc);
    auto sol = solve_relaxation(sc, env, no_forbidden_slots(sc));
    if (sol.status != LpStatus::optimal)
        throw ValidationError("relaxation LP ended with status " + std::string(to_string(sol.status)));
    return sol.value;
}

}  // namespace equiplan
