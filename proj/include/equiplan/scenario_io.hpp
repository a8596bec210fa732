#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"
#include "equiplan/scenario.hpp"

namespace equiplan {

inline constexpr std::string_view kHouseholdHeader =
    "id,area_id,income_code,race_code,education_code,demand_mbps,tolerance_days,hardship_code,"
    "perception_code";

namespace detail {

/// Splits one CSV record. Double quotes protect commas; "" is a literal quote.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string csv_quote(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

template <std::size_t N>
double coded_value(std::string_view field, const std::array<codes::Label, N>& labels,
                   std::string_view column, std::size_t line_no) {
    double v = 0;
    if (parse_double(field, v)) return v;
    auto t = trim(field);
    for (const auto& l : labels)
        if (l.text == t) return l.value;
    throw ParseError("column " + std::string(column) + ": '" + std::string(t) +
                         "' is neither a number nor a known answer",
                     line_no);
}

inline int coded_int(std::string_view field, std::span<const codes::Label> labels,
                     std::string_view column, std::size_t line_no) {
    int v = 0;
    if (parse_int(field, v)) return v;
    auto t = trim(field);
    for (const auto& l : labels)
        if (l.text == t) return static_cast<int>(l.value);
    throw ParseError("column " + std::string(column) + ": '" + std::string(t) +
                         "' is neither an integer nor a known answer",
                     line_no);
}

/// Multi-choice demand answers are '|'-separated; the household keeps the
/// largest requested rate.
inline double demand_value(std::string_view field, std::size_t line_no) {
    double best = 0;
    bool any = false;
    std::size_t start = 0;
    while (start <= field.size()) {
        auto end = field.find('|', start);
        if (end == std::string_view::npos) end = field.size();
        double v = coded_value(field.substr(start, end - start), codes::demand_labels,
                               "demand_mbps", line_no);
        best = any ? std::max(best, v) : v;
        any = true;
        start = end + 1;
    }
    return best;
}

}  // namespace detail

/// Reads the household table. Row-level problems carry the line number.
inline Scenario read_scenario(std::istream& in, const ScenarioParams& params) {
    validate_params(params);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<HouseholdProfile> rows;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty()) continue;
        auto fields = detail::split_csv(view, line_no);
        if (!header_seen) {
            std::string joined;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (i) joined += ',';
                joined += trim(fields[i]);
            }
            if (joined != kHouseholdHeader)
                throw ParseError("expected header '" + std::string(kHouseholdHeader) + "'", line_no);
            header_seen = true;
            continue;
        }
        if (fields.size() != 9)
            throw ParseError("expected 9 fields, found " + std::to_string(fields.size()), line_no);
        HouseholdProfile h;
        h.id = std::string(trim(fields[0]));
        if (h.id.empty()) throw ParseError("empty household id", line_no);
        if (!parse_int(fields[1], h.area_id)) throw ParseError("area_id is not an integer", line_no);
        h.income_code = detail::coded_int(fields[2], codes::income_labels, "income_code", line_no);
        h.race_code = detail::coded_int(fields[3], codes::race_labels, "race_code", line_no);
        h.education_code =
            detail::coded_int(fields[4], codes::education_labels, "education_code", line_no);
        h.demand_mbps = detail::demand_value(fields[5], line_no);
        if (!parse_int(fields[6], h.tolerance_days))
            throw ParseError("tolerance_days is not an integer", line_no);
        h.hardship_code =
            detail::coded_int(fields[7], codes::hardship_labels, "hardship_code", line_no);
        h.perception_code =
            detail::coded_int(fields[8], codes::perception_labels, "perception_code", line_no);
        if (auto why = household_problem(h, params.horizon); !why.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": " + why);
        rows.push_back(std::move(h));
    }
    if (rows.empty()) throw ValidationError("no households");
    return Scenario(std::move(rows), params);
}

inline Scenario load_scenario(const std::string& path, const ScenarioParams& params) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open household file '" + path + "'");
    return read_scenario(in, params);
}

inline void write_households(std::ostream& out, const Scenario& scenario) {
    out << kHouseholdHeader << '\n';
    for (const auto& h : scenario.households()) {
        out << detail::csv_quote(h.id) << ',' << h.area_id << ',' << h.income_code << ','
            << h.race_code << ',' << h.education_code << ',' << format_exact(h.demand_mbps) << ','
            << h.tolerance_days << ',' << h.hardship_code << ',' << h.perception_code << '\n';
    }
}

/// Parameter file: `key = value` lines, `#` comments. S_max is given in Gbps.
inline ScenarioParams read_params(std::istream& in, ScenarioParams base = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        auto sep = view.find_first_of("= \t");
        if (sep == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        auto key = trim(view.substr(0, sep));
        auto value = trim(view.substr(sep + 1));
        if (!value.empty() && value.front() == '=') value = trim(value.substr(1));
        if (value.empty()) throw ParseError("missing value for '" + std::string(key) + "'", line_no);

        double d = 0;
        if (key == "T") {
            if (!parse_int(value, base.horizon)) throw ParseError("T must be an integer", line_no);
        } else if (key == "smax_gbps") {
            if (!parse_double(value, d)) throw ParseError("smax_gbps must be a number", line_no);
            base.smax_mbps = d * 1000.0;
        } else if (key == "delta") {
            if (!parse_int(value, base.freezeout)) throw ParseError("delta must be an integer", line_no);
        } else if (key == "theta") {
            if (!parse_double(value, base.theta)) throw ParseError("theta must be a number", line_no);
        } else if (key == "tau_source") {
            try {
                base.tau_source = parse_tau_source(value);
            } catch (const ArgumentError& e) {
                throw ParseError(e.what(), line_no);
            }
        } else {
            throw ParseError("unknown key '" + std::string(key) + "'", line_no);
        }
    }
    validate_params(base);
    return base;
}

inline ScenarioParams load_params(const std::string& path, ScenarioParams base = {}) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open parameter file '" + path + "'");
    return read_params(in, base);
}

inline void write_params(std::ostream& out, const ScenarioParams& p) {
    out << "T = " << p.horizon << '\n'
        << "smax_gbps = " << format_exact(p.smax_mbps / 1000.0) << '\n'
        << "delta = " << p.freezeout << '\n'
        << "theta = " << format_exact(p.theta) << '\n'
        << "tau_source = " << to_string(p.tau_source) << '\n';
}

}  // namespace equiplan
