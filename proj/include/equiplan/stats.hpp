#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"
#include "equiplan/scenario.hpp"

namespace equiplan {

/// Correlation is undefined (constant input).
class UndefinedCorrelation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Correlation {
    double coefficient = 0;
    double p_value = 1;
    std::size_t n = 0;
};

/// Two-tailed p-value of Student's t with nu degrees of freedom:
/// I_{nu / (nu + t^2)}(nu / 2, 1 / 2).
inline double student_t_two_tailed(double t, double nu) {
    if (!(nu > 0)) throw ArgumentError("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    if (t == 0) return 1.0;
    double x = nu / (nu + t * t);
    return std::clamp(boost::math::ibeta(nu / 2, 0.5, x), 0.0, 1.0);
}

namespace detail {

inline void check_pair(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ArgumentError("vectors differ in length");
    if (xs.size() < 3) throw ArgumentError("at least 3 observations are required");
}

/// p-value of a correlation coefficient through the t statistic; |r| = 1
/// gives 0.
inline double correlation_p(double r, std::size_t n) {
    const double nu = static_cast<double>(n) - 2;
    if (1.0 - std::abs(r) <= 4 * std::numeric_limits<double>::epsilon()) return 0.0;
    double t = r * std::sqrt(nu / (1.0 - r * r));
    return student_t_two_tailed(t, nu);
}

}  // namespace detail

/// Product-moment coefficient (two-pass) with its t-test p-value.
inline Correlation pearson(std::span<const double> xs, std::span<const double> ys) {
    detail::check_pair(xs, ys);
    const std::size_t n = xs.size();
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw UndefinedCorrelation("correlation undefined: zero variance");
    double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    return {r, detail::correlation_p(r, n), n};
}

/// 1-based ranks, ties sharing the average of the positions they span.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2 + 1;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Pearson on average ranks, p-value by the same t approximation.
inline Correlation spearman(std::span<const double> xs, std::span<const double> ys) {
    detail::check_pair(xs, ys);
    auto rx = average_ranks(xs);
    auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

enum class CorrelationMethod { spearman, pearson };

inline std::string_view to_string(CorrelationMethod m) {
    return m == CorrelationMethod::spearman ? "spearman" : "pearson";
}

struct CorrelationEntry {
    std::string row;
    std::string col;
    CorrelationMethod method = CorrelationMethod::spearman;
    double coefficient = 0;
    double p_value = 1;
    std::size_t n = 0;
    bool significant = false;
    std::string error;  // non-empty when the cell is undefined
};

struct CorrelationReport {
    std::vector<CorrelationEntry> pairs;
};

inline constexpr double kSignificanceLevel = 0.05;

inline std::vector<double> attribute_column(const Scenario& sc, std::string_view name) {
    std::vector<double> out;
    out.reserve(sc.user_count());
    for (const auto& h : sc.households()) out.push_back(attribute_value(h, name));
    return out;
}

/// Both methods for every (row, col) attribute pair. A failing cell records
/// its error and leaves the others untouched.
inline CorrelationReport correlation_table(
    const Scenario& sc,
    std::span<const std::string_view> rows = std::span<const std::string_view>(),
    std::span<const std::string_view> cols = std::span<const std::string_view>()) {
    static constexpr std::array<std::string_view, 4> default_rows = {"hardship", "perception", "tolerance",
                                                                     "demand"};
    static constexpr std::array<std::string_view, 3> default_cols = {"income", "education", "race"};
    if (rows.empty()) rows = default_rows;
    if (cols.empty()) cols = default_cols;

    CorrelationReport rep;
    for (auto method : {CorrelationMethod::spearman, CorrelationMethod::pearson})
        for (auto r : rows)
            for (auto c : cols) {
                CorrelationEntry e;
                e.row = std::string(r);
                e.col = std::string(c);
                e.method = method;
                auto xs = attribute_column(sc, r);
                auto ys = attribute_column(sc, c);
                e.n = xs.size();
                try {
                    auto res = method == CorrelationMethod::spearman ? spearman(xs, ys) : pearson(xs, ys);
                    e.coefficient = res.coefficient;
                    e.p_value = res.p_value;
                    e.significant = res.p_value < kSignificanceLevel;
                } catch (const std::exception& ex) {
                    e.error = ex.what();
                }
                rep.pairs.push_back(std::move(e));
            }
    return rep;
}

/// method,row,col,n,coefficient,p_value,significant,error
inline void write_correlation_csv(std::ostream& out, const CorrelationReport& rep) {
    out << "method,row,col,n,coefficient,p_value,significant,error\n";
    for (const auto& e : rep.pairs) {
        out << to_string(e.method) << ',' << e.row << ',' << e.col << ',' << e.n << ',';
        if (e.error.empty())
            out << format_report(e.coefficient) << ',' << format_report(e.p_value) << ','
                << (e.significant ? 1 : 0) << ",\n";
        else
            out << ",,0," << e.error << '\n';
    }
}

}  // namespace equiplan
