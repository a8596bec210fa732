#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"
#include "equiplan/scenario_io.hpp"
#include "equiplan/utility.hpp"

namespace equiplan {

inline constexpr std::string_view kPlanAreaHeader = "area_id,serve_slot,s_n_mbps";
inline constexpr std::string_view kPlanShareHeader = "user_id,w";

/// Two CSV sections separated by a blank line: one row per area
/// (serve_slot 0 = unserved) and one row per user. Numbers are written in
/// shortest round-trip form so a re-read plan is bit-identical.
inline void write_plan(std::ostream& out, const Scenario& sc, const AllocationPlan& plan) {
    out << kPlanAreaHeader << '\n';
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        out << sc.areas()[n].area_id << ',' << plan.serve_slot(n) << ',' << format_exact(plan.s[n]) << '\n';
    out << '\n' << kPlanShareHeader << '\n';
    for (std::size_t u = 0; u < sc.user_count(); ++u)
        out << detail::csv_quote(sc.household(u).id) << ',' << format_exact(plan.w[u]) << '\n';
}

/// Reads a plan against a scenario. An area listed on several rows is marked
/// served at each listed slot (the last s_n wins) so that validation can
/// report it; areas and users not listed are unserved and get w = 0.
inline AllocationPlan read_plan(std::istream& in, const Scenario& sc) {
    std::map<int, std::size_t> area_index;
    for (std::size_t n = 0; n < sc.area_count(); ++n) area_index[sc.areas()[n].area_id] = n;
    std::map<std::string, std::size_t> user_index;
    for (std::size_t u = 0; u < sc.user_count(); ++u) user_index[sc.household(u).id] = u;

    AllocationPlan plan = empty_plan(sc);
    enum { areas_header, areas, shares_header, shares } part = areas_header;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty()) {
            if (part == areas) part = shares_header;
            continue;
        }
        if (part == areas_header || part == shares_header) {
            auto expected = part == areas_header ? kPlanAreaHeader : kPlanShareHeader;
            if (view != expected) throw ParseError("expected header '" + std::string(expected) + "'", line_no);
            part = part == areas_header ? areas : shares;
            continue;
        }
        auto fields = detail::split_csv(view, line_no);
        if (part == areas) {
            if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
            int id = 0, slot = 0;
            double s = 0;
            if (!parse_int(fields[0], id)) throw ParseError("area_id is not an integer", line_no);
            if (!parse_int(fields[1], slot)) throw ParseError("serve_slot is not an integer", line_no);
            if (!parse_double(fields[2], s)) throw ParseError("s_n_mbps is not a number", line_no);
            auto it = area_index.find(id);
            if (it == area_index.end())
                throw ValidationError("line " + std::to_string(line_no) + ": unknown area " + std::to_string(id));
            if (slot < 0 || slot > sc.horizon())
                throw ValidationError("line " + std::to_string(line_no) + ": serve_slot outside [0, T]");
            if (slot > 0) plan.z(it->second, static_cast<std::size_t>(slot - 1)) = 1;
            plan.s[it->second] = s;
        } else {
            if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
            double w = 0;
            if (!parse_double(fields[1], w)) throw ParseError("w is not a number", line_no);
            auto it = user_index.find(std::string(trim(fields[0])));
            if (it == user_index.end())
                throw ValidationError("line " + std::to_string(line_no) + ": unknown user '" +
                                      std::string(trim(fields[0])) + "'");
            plan.w[it->second] = w;
        }
    }
    if (part == areas_header) throw ParseError("empty plan file", line_no);
    refresh_allocation(sc, plan);
    return plan;
}

inline AllocationPlan load_plan(const std::string& path, const Scenario& sc) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open plan file '" + path + "'");
    return read_plan(in, sc);
}

}  // namespace equiplan
