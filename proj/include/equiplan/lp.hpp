#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"

namespace equiplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, greater_equal, equal };

struct LpTerm {
    int column = 0;
    double coef = 0;
};

struct LpRow {
    std::vector<LpTerm> terms;
    Relation relation = Relation::less_equal;
    double rhs = 0;
};

/// maximize c'x  subject to rows and lower <= x <= upper.
struct LpProblem {
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<double> lower;
    std::vector<double> upper;

    int add_column(double cost, double lo, double hi) {
        objective.push_back(cost);
        lower.push_back(lo);
        upper.push_back(hi);
        return static_cast<int>(objective.size()) - 1;
    }

    void add_row(std::vector<LpTerm> terms, Relation rel, double rhs) {
        rows.push_back(LpRow{std::move(terms), rel, rhs});
    }

    std::size_t column_count() const noexcept { return objective.size(); }
    std::size_t row_count() const noexcept { return rows.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string_view to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective_value = 0;
    std::vector<double> x_values;
    std::size_t iterations = 0;
};

/// Largest amount by which x violates a row or a bound.
inline double max_violation(const LpProblem& p, std::span<const double> x) {
    double worst = 0;
    for (const auto& row : p.rows) {
        double lhs = 0;
        for (const auto& t : row.terms) lhs += t.coef * x[static_cast<std::size_t>(t.column)];
        double v = 0;
        switch (row.relation) {
            case Relation::less_equal: v = lhs - row.rhs; break;
            case Relation::greater_equal: v = row.rhs - lhs; break;
            case Relation::equal: v = std::abs(lhs - row.rhs); break;
        }
        worst = std::max(worst, v);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        worst = std::max(worst, p.lower[j] - x[j]);
        worst = std::max(worst, x[j] - p.upper[j]);
    }
    return worst;
}

namespace detail {

/// Dense-tableau primal simplex over y >= 0 with optional finite upper
/// bounds. Nonbasic columns sit at a bound; Bland's least-index rule picks
/// both the entering and the leaving column, which rules out cycling and
/// makes the pivot sequence a pure function of the input.
class BoundedSimplex {
public:
    static constexpr double kCostTol = 1e-9;
    static constexpr double kPivotTol = 1e-9;
    static constexpr double kRatioTie = 1e-12;

    BoundedSimplex(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), tab_(rows * cols, 0.0), up_(cols, kInf), at_upper_(cols, false),
          basis_(rows, 0), xb_(rows, 0.0), is_basic_(cols, false) {}

    double& at(std::size_t i, std::size_t j) { return tab_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return tab_[i * n_ + j]; }

    void set_upper(std::size_t j, double u) { up_[j] = u; }
    double upper(std::size_t j) const { return up_[j]; }

    void set_basic(std::size_t row, std::size_t col, double value) {
        basis_[row] = col;
        is_basic_[col] = true;
        xb_[row] = value;
    }

    std::size_t basic(std::size_t row) const { return basis_[row]; }
    double basic_value(std::size_t row) const { return xb_[row]; }

    double value(std::size_t j) const {
        if (is_basic_[j]) {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] == j) return xb_[i];
        }
        return at_upper_[j] ? up_[j] : 0.0;
    }

    std::vector<double> values() const {
        std::vector<double> v(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            if (!is_basic_[j] && at_upper_[j]) v[j] = up_[j];
        for (std::size_t i = 0; i < m_; ++i) v[basis_[i]] = xb_[i];
        return v;
    }

    /// Runs primal iterations for `cost` (maximised). Columns flagged in
    /// `frozen` never enter.
    LpStatus optimize(std::span<const double> cost, const std::vector<bool>& frozen,
                      std::size_t& iterations, std::size_t max_iterations) {
        std::vector<double> d(cost.begin(), cost.end());
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = cost[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j < n_; ++j) d[j] -= cb * at(i, j);
        }
        while (true) {
            if (iterations >= max_iterations) return LpStatus::iteration_limit;
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (is_basic_[j] || frozen[j]) continue;
                if (!at_upper_[j] && d[j] > kCostTol && up_[j] > 0) {
                    enter = j;
                    break;
                }
                if (at_upper_[j] && d[j] < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_) return LpStatus::optimal;
            ++iterations;

            const double dir = at_upper_[enter] ? -1.0 : 1.0;
            double step = up_[enter];
            std::size_t leave = m_;  // m_ means "bound flip"
            for (std::size_t i = 0; i < m_; ++i) {
                double a = at(i, enter);
                if (std::abs(a) < kPivotTol) continue;
                double rate = -a * dir;
                double limit;
                if (rate < 0) {
                    limit = xb_[i] / -rate;
                } else {
                    double u = up_[basis_[i]];
                    if (u == kInf) continue;
                    limit = (u - xb_[i]) / rate;
                }
                limit = std::max(limit, 0.0);
                bool better = limit < step - kRatioTie;
                bool tie = !better && std::abs(limit - step) <= kRatioTie;
                if (tie) {
                    std::size_t incumbent = leave == m_ ? enter : basis_[leave];
                    better = basis_[i] < incumbent;
                }
                if (better) {
                    step = limit;
                    leave = i;
                }
            }
            if (step == kInf) return LpStatus::unbounded;

            for (std::size_t i = 0; i < m_; ++i) {
                double a = at(i, enter);
                if (a != 0) xb_[i] -= a * dir * step;
            }
            if (leave == m_) {
                at_upper_[enter] = !at_upper_[enter];
                continue;
            }

            std::size_t out = basis_[leave];
            double out_rate = -at(leave, enter) * dir;
            double entering_value = (dir > 0 ? 0.0 : up_[enter]) + dir * step;
            pivot(leave, enter, d);
            is_basic_[out] = false;
            at_upper_[out] = out_rate > 0;
            if (at_upper_[out] && up_[out] == kInf) at_upper_[out] = false;
            basis_[leave] = enter;
            is_basic_[enter] = true;
            at_upper_[enter] = false;
            xb_[leave] = entering_value;
        }
    }

    /// Degenerate pivot used to swap a zero-level basic column out of `row`.
    void swap_into_basis(std::size_t row, std::size_t col) {
        std::vector<double> dummy(n_, 0.0);
        std::size_t out = basis_[row];
        double v = at_upper_[col] ? up_[col] : 0.0;
        pivot(row, col, dummy);
        is_basic_[out] = false;
        at_upper_[out] = false;
        basis_[row] = col;
        is_basic_[col] = true;
        at_upper_[col] = false;
        xb_[row] = v;
    }

    bool is_basic(std::size_t j) const { return is_basic_[j]; }

private:
    void pivot(std::size_t r, std::size_t c, std::vector<double>& d) {
        double* prow = &tab_[r * n_];
        const double inv = 1.0 / prow[c];
        for (std::size_t j = 0; j < n_; ++j) prow[j] *= inv;
        prow[c] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row = &tab_[i * n_];
            double f = row[c];
            if (f == 0) continue;
            for (std::size_t j = 0; j < n_; ++j) row[j] -= f * prow[j];
            row[c] = 0.0;
        }
        double f = d[c];
        if (f != 0) {
            for (std::size_t j = 0; j < n_; ++j) d[j] -= f * prow[j];
            d[c] = 0.0;
        }
    }

    std::size_t m_, n_;
    std::vector<double> tab_;
    std::vector<double> up_;
    std::vector<bool> at_upper_;
    std::vector<std::size_t> basis_;
    std::vector<double> xb_;
    std::vector<bool> is_basic_;
};

}  // namespace detail

/// Exact LP optimum by two-phase primal simplex. Infeasible and unbounded
/// problems are reported through the status.
inline LpSolution solve_lp(const LpProblem& p) {
    const std::size_t n = p.column_count();
    if (p.lower.size() != n || p.upper.size() != n)
        throw ArgumentError("bounds do not match the objective length");

    LpSolution sol;
    sol.x_values.assign(n, 0.0);

    // Map each original column onto one or two non-negative columns:
    // x = offset + sign * y  (or y1 - y2 for a free column).
    struct Map {
        std::size_t first;
        std::size_t second;  // == npos unless free
        double offset;
        double sign;
    };
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<Map> map(n);
    std::vector<double> ycost, yup;
    for (std::size_t j = 0; j < n; ++j) {
        double lo = p.lower[j], hi = p.upper[j];
        if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf)
            throw ArgumentError("invalid column bounds");
        if (lo > hi) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        if (lo > -kInf) {
            map[j] = {ycost.size(), npos, lo, 1.0};
            ycost.push_back(p.objective[j]);
            yup.push_back(hi == kInf ? kInf : hi - lo);
        } else if (hi < kInf) {
            map[j] = {ycost.size(), npos, hi, -1.0};
            ycost.push_back(-p.objective[j]);
            yup.push_back(kInf);
        } else {
            map[j] = {ycost.size(), ycost.size() + 1, 0.0, 1.0};
            ycost.push_back(p.objective[j]);
            ycost.push_back(-p.objective[j]);
            yup.push_back(kInf);
            yup.push_back(kInf);
        }
    }
    const std::size_t ny = ycost.size();
    const std::size_t m = p.row_count();

    // Row data in y-space with non-negative right-hand sides.
    std::vector<std::vector<double>> coef(m, std::vector<double>(ny, 0.0));
    std::vector<double> rhs(m);
    std::vector<Relation> rel(m);
    std::size_t n_slack = 0, n_art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = p.rows[i];
        if (!std::isfinite(row.rhs)) throw ArgumentError("row right-hand side must be finite");
        double b = row.rhs;
        for (const auto& t : row.terms) {
            if (t.column < 0 || static_cast<std::size_t>(t.column) >= n)
                throw ArgumentError("row references an unknown column");
            const Map& mp = map[static_cast<std::size_t>(t.column)];
            b -= t.coef * mp.offset;
            coef[i][mp.first] += t.coef * mp.sign;
            if (mp.second != npos) coef[i][mp.second] -= t.coef;
        }
        rel[i] = row.relation;
        if (b < 0) {
            b = -b;
            for (double& c : coef[i]) c = -c;
            if (rel[i] == Relation::less_equal)
                rel[i] = Relation::greater_equal;
            else if (rel[i] == Relation::greater_equal)
                rel[i] = Relation::less_equal;
        }
        rhs[i] = b;
        if (rel[i] != Relation::equal) ++n_slack;
        if (rel[i] != Relation::less_equal) ++n_art;
    }

    const std::size_t total = ny + n_slack + n_art;
    detail::BoundedSimplex sx(m, total);
    for (std::size_t j = 0; j < ny; ++j) sx.set_upper(j, yup[j]);
    std::vector<bool> artificial(total, false);
    std::size_t next_slack = ny, next_art = ny + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < ny; ++j) sx.at(i, j) = coef[i][j];
        if (rel[i] == Relation::less_equal) {
            sx.at(i, next_slack) = 1.0;
            sx.set_basic(i, next_slack, rhs[i]);
            ++next_slack;
        } else {
            if (rel[i] == Relation::greater_equal) sx.at(i, next_slack++) = -1.0;
            sx.at(i, next_art) = 1.0;
            artificial[next_art] = true;
            sx.set_basic(i, next_art, rhs[i]);
            ++next_art;
        }
    }

    const std::size_t max_iter = 10'000 + 50 * (m + total);
    std::vector<bool> frozen(total, false);
    if (n_art > 0) {
        std::vector<double> phase1(total, 0.0);
        for (std::size_t j = 0; j < total; ++j)
            if (artificial[j]) phase1[j] = -1.0;
        auto st = sx.optimize(phase1, frozen, sol.iterations, max_iter);
        if (st == LpStatus::iteration_limit) {
            sol.status = st;
            return sol;
        }
        double infeas = 0, scale = 1.0;
        for (double b : rhs) scale = std::max(scale, b);
        for (std::size_t i = 0; i < m; ++i)
            if (artificial[sx.basic(i)]) infeas += sx.basic_value(i);
        if (infeas > 1e-9 * scale) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (!artificial[sx.basic(i)]) continue;
            for (std::size_t j = 0; j < total; ++j) {
                if (artificial[j] || sx.is_basic(j)) continue;
                if (std::abs(sx.at(i, j)) > 1e-7) {
                    sx.swap_into_basis(i, j);
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < total; ++j)
            if (artificial[j]) {
                frozen[j] = true;
                sx.set_upper(j, 0.0);
            }
    }

    std::vector<double> phase2(total, 0.0);
    std::copy(ycost.begin(), ycost.end(), phase2.begin());
    auto st = sx.optimize(phase2, frozen, sol.iterations, max_iter);
    sol.status = st;
    if (st != LpStatus::optimal) return sol;

    auto y = sx.values();
    double obj = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const Map& mp = map[j];
        double v = mp.second == npos ? mp.offset + mp.sign * y[mp.first] : y[mp.first] - y[mp.second];
        v = std::clamp(v, p.lower[j], p.upper[j]);
        sol.x_values[j] = v;
        obj += p.objective[j] * v;
    }
    sol.objective_value = obj;
    return sol;
}

/// Plain-text dump for cross-checking with external solvers.
inline void write_lp_text(std::ostream& out, const LpProblem& p) {
    out << "# columns " << p.column_count() << " rows " << p.row_count() << '\n';
    out << "maximize\n";
    for (std::size_t j = 0; j < p.column_count(); ++j)
        if (p.objective[j] != 0) out << "  " << format_exact(p.objective[j]) << " x" << j << '\n';
    out << "subject to\n";
    for (std::size_t i = 0; i < p.row_count(); ++i) {
        const auto& row = p.rows[i];
        out << "  r" << i << ':';
        for (const auto& t : row.terms) out << ' ' << format_exact(t.coef) << " x" << t.column;
        out << (row.relation == Relation::less_equal      ? " <= "
                : row.relation == Relation::greater_equal ? " >= "
                                                          : " = ")
            << format_exact(row.rhs) << '\n';
    }
    out << "bounds\n";
    for (std::size_t j = 0; j < p.column_count(); ++j)
        out << "  " << format_exact(p.lower[j]) << " <= x" << j << " <= " << format_exact(p.upper[j])
            << '\n';
}

}  // namespace equiplan
