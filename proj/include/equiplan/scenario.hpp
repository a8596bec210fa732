#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equiplan/errors.hpp"

namespace equiplan {

/// Which sociodemographic code populates a user's priority weight.
enum class TauSource { income, race, education };

/// Coded survey attributes. Code sets follow the survey coding table:
/// larger codes mark more vulnerable groups for income, race and education.
namespace codes {

inline constexpr std::array<int, 3> income = {1, 3, 5};
inline constexpr std::array<int, 2> race = {1, 3};
inline constexpr std::array<int, 5> education = {1, 2, 4, 5, 7};
inline constexpr std::array<double, 4> demand_mbps = {1.0, 10.0, 500.0, 1000.0};
inline constexpr std::array<int, 4> hardship = {1, 2, 3, 4};
inline constexpr std::array<int, 5> perception = {1, 2, 3, 4, 5};

template <typename Set, typename V>
constexpr bool contains(const Set& set, V v) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

/// Label-to-code tables for ingesting survey-style text answers.
struct Label {
    std::string_view text;
    double value;
};

inline constexpr std::array<Label, 3> income_labels = {{
    {"Above $100,000", 1},
    {"$49,999 - $99,999", 3},
    {"Less than $49,999", 5},
}};
inline constexpr std::array<Label, 2> race_labels = {{{"White", 1}, {"Non-White", 3}}};
inline constexpr std::array<Label, 5> education_labels = {{
    {"Graduate school", 1},
    {"Bachelor", 2},
    {"Some college", 4},
    {"High school", 5},
    {"Less than high school", 7},
}};
inline constexpr std::array<Label, 4> demand_labels = {{
    {"Communicate with family", 1},
    {"Use social media", 10},
    {"Remote work or education", 500},
    {"Streaming entertainment", 1000},
}};
inline constexpr std::array<Label, 4> hardship_labels = {{
    {"A little", 1},
    {"A moderate amount", 2},
    {"A lot", 3},
    {"A great deal", 4},
}};
inline constexpr std::array<Label, 5> perception_labels = {{
    {"Not important", 1},
    {"Slightly important", 2},
    {"Moderately important", 3},
    {"Very important", 4},
    {"Extremely important", 5},
}};

}  // namespace codes

struct HouseholdProfile {
    std::string id;
    int area_id = 0;
    int income_code = 1;
    int race_code = 1;
    int education_code = 1;
    double demand_mbps = 1.0;
    int tolerance_days = 1;
    int hardship_code = 1;
    int perception_code = 1;

    friend bool operator==(const HouseholdProfile&, const HouseholdProfile&) = default;
};

struct Area {
    int area_id = 0;
    std::vector<std::size_t> household_ids;  // indices into Scenario::households()

    friend bool operator==(const Area&, const Area&) = default;
};

/// Global model parameters. Rates in Mbps, time in slots.
struct ScenarioParams {
    int horizon = 15;
    double smax_mbps = 10'000.0;
    int freezeout = 1;
    double theta = 10.0;
    TauSource tau_source = TauSource::race;

    friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

inline std::string_view to_string(TauSource s) {
    switch (s) {
        case TauSource::income: return "income";
        case TauSource::race: return "race";
        case TauSource::education: return "education";
    }
    return "race";
}

inline TauSource parse_tau_source(std::string_view s) {
    if (s == "income") return TauSource::income;
    if (s == "race") return TauSource::race;
    if (s == "education") return TauSource::education;
    throw ArgumentError("unknown tau source '" + std::string(s) + "'");
}

inline double tau_of(const HouseholdProfile& h, TauSource source) {
    switch (source) {
        case TauSource::income: return h.income_code;
        case TauSource::race: return h.race_code;
        case TauSource::education: return h.education_code;
    }
    return h.race_code;
}

/// Household attributes usable for grouping and correlation.
inline constexpr std::array<std::string_view, 7> attribute_names = {
    "income", "race", "education", "demand", "tolerance", "hardship", "perception"};

/// Numeric value of a named attribute; ArgumentError for unknown names.
inline double attribute_value(const HouseholdProfile& h, std::string_view name) {
    if (name == "income") return h.income_code;
    if (name == "race") return h.race_code;
    if (name == "education") return h.education_code;
    if (name == "demand") return h.demand_mbps;
    if (name == "tolerance") return h.tolerance_days;
    if (name == "hardship") return h.hardship_code;
    if (name == "perception") return h.perception_code;
    throw ArgumentError("unknown attribute '" + std::string(name) + "'");
}

/// Returns an empty string when the household is valid under horizon T.
inline std::string household_problem(const HouseholdProfile& h, int horizon) {
    if (!codes::contains(codes::income, h.income_code))
        return "income_code " + std::to_string(h.income_code) + " not in {1,3,5}";
    if (!codes::contains(codes::race, h.race_code))
        return "race_code " + std::to_string(h.race_code) + " not in {1,3}";
    if (!codes::contains(codes::education, h.education_code))
        return "education_code " + std::to_string(h.education_code) + " not in {1,2,4,5,7}";
    if (!codes::contains(codes::hardship, h.hardship_code))
        return "hardship_code " + std::to_string(h.hardship_code) + " not in 1..4";
    if (!codes::contains(codes::perception, h.perception_code))
        return "perception_code " + std::to_string(h.perception_code) + " not in 1..5";
    if (!(h.demand_mbps > 0.0) || h.demand_mbps == std::numeric_limits<double>::infinity())
        return "demand_mbps must be positive and finite";
    if (h.tolerance_days < 1) return "tolerance_days must be >= 1";
    if (h.tolerance_days > horizon)
        return "tolerance_days " + std::to_string(h.tolerance_days) + " exceeds horizon T=" +
               std::to_string(horizon);
    return {};
}

inline void validate_params(const ScenarioParams& p) {
    if (p.horizon < 1) throw ValidationError("horizon T must be >= 1");
    if (!(p.smax_mbps >= 0.0) || !std::isfinite(p.smax_mbps))
        throw ValidationError("S_max must be finite and non-negative");
    if (p.freezeout < 0) throw ValidationError("freeze-out delta must be >= 0");
    if (!(p.theta > 0.0) || !std::isfinite(p.theta))
        throw ValidationError("theta must be positive");
}

/// A validated problem instance. Households are stored grouped by area
/// (areas in ascending area_id order, input order kept within an area), so
/// every area's members form a contiguous index range. Immutable once built.
class Scenario {
public:
    Scenario() = default;

    Scenario(std::vector<HouseholdProfile> households, ScenarioParams params)
        : params_(params) {
        validate_params(params_);
        std::map<int, std::vector<std::size_t>> by_area;
        for (std::size_t i = 0; i < households.size(); ++i) {
            if (auto why = household_problem(households[i], params_.horizon); !why.empty())
                throw ValidationError("household '" + households[i].id + "': " + why);
            by_area[households[i].area_id].push_back(i);
        }
        std::map<std::string, int> seen;
        for (const auto& h : households)
            if (++seen[h.id] > 1) throw ValidationError("duplicate household id '" + h.id + "'");

        households_.reserve(households.size());
        for (auto& [area_id, members] : by_area) {
            Area area{area_id, {}};
            for (std::size_t i : members) {
                area.household_ids.push_back(households_.size());
                area_index_.push_back(areas_.size());
                households_.push_back(std::move(households[i]));
            }
            areas_.push_back(std::move(area));
        }
    }

    const ScenarioParams& params() const noexcept { return params_; }
    int horizon() const noexcept { return params_.horizon; }
    double smax() const noexcept { return params_.smax_mbps; }
    int freezeout() const noexcept { return params_.freezeout; }
    double theta() const noexcept { return params_.theta; }

    std::span<const HouseholdProfile> households() const noexcept { return households_; }
    std::span<const Area> areas() const noexcept { return areas_; }
    std::size_t user_count() const noexcept { return households_.size(); }
    std::size_t area_count() const noexcept { return areas_.size(); }

    const HouseholdProfile& household(std::size_t user) const { return households_.at(user); }
    std::size_t area_of(std::size_t user) const { return area_index_.at(user); }
    double tau(std::size_t user) const { return tau_of(households_.at(user), params_.tau_source); }
    double demand(std::size_t user) const { return households_.at(user).demand_mbps; }
    int deadline(std::size_t user) const { return households_.at(user).tolerance_days; }

    std::vector<HouseholdProfile> household_list() const { return households_; }

    /// Same households under different global parameters.
    Scenario with_params(const ScenarioParams& p) const { return Scenario(households_, p); }

    friend bool operator==(const Scenario&, const Scenario&) = default;

private:
    ScenarioParams params_;
    std::vector<HouseholdProfile> households_;
    std::vector<Area> areas_;
    std::vector<std::size_t> area_index_;
};

}  // namespace equiplan
