#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "equiplan/errors.hpp"
#include "equiplan/scenario.hpp"

namespace equiplan {

/// Categorical distributions over each attribute's code set, in code order
/// (see `codes`). An empty `tolerance` means uniform over 1..min(14, T).
struct Marginals {
    std::vector<double> income = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::vector<double> race = {0.5, 0.5};
    std::vector<double> education = {0.2, 0.2, 0.2, 0.2, 0.2};
    std::vector<double> demand = {0.25, 0.25, 0.25, 0.25};
    std::vector<double> hardship = {0.25, 0.25, 0.25, 0.25};
    std::vector<double> perception = {0.2, 0.2, 0.2, 0.2, 0.2};
    std::vector<double> tolerance;
};

struct GeneratorConfig {
    std::uint64_t seed = 0;
    int n_areas = 1;
    int users_min = 1;
    int users_max = 1;
    Marginals marginals;
    ScenarioParams params;
};

/// Longest tolerance any survey household reported.
inline constexpr int kMaxSurveyTolerance = 14;

namespace detail {

/// Draws from the raw engine output only, so results do not depend on the
/// standard library's distribution implementations.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    int integer(int lo, int hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(rng_() % span);
    }

    std::size_t categorical(std::span<const double> probs) {
        double u = uniform();
        double acc = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        // u landed in the rounding gap above the last cumulative sum
        for (std::size_t i = probs.size(); i-- > 0;)
            if (probs[i] > 0) return i;
        return probs.size() - 1;
    }

private:
    std::mt19937_64 rng_;
};

inline void check_distribution(std::span<const double> p, std::size_t expected, const char* name) {
    if (p.size() != expected)
        throw ValidationError(std::string("marginal '") + name + "' must have " +
                              std::to_string(expected) + " entries");
    double sum = 0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError(std::string("marginal '") + name + "' has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError(std::string("marginal '") + name + "' does not sum to 1");
}

}  // namespace detail

inline int tolerance_cap(int horizon) { return std::min(kMaxSurveyTolerance, horizon); }

inline void validate_marginals(const Marginals& m, int horizon) {
    detail::check_distribution(m.income, codes::income.size(), "income");
    detail::check_distribution(m.race, codes::race.size(), "race");
    detail::check_distribution(m.education, codes::education.size(), "education");
    detail::check_distribution(m.demand, codes::demand_mbps.size(), "demand");
    detail::check_distribution(m.hardship, codes::hardship.size(), "hardship");
    detail::check_distribution(m.perception, codes::perception.size(), "perception");
    if (!m.tolerance.empty())
        detail::check_distribution(m.tolerance, static_cast<std::size_t>(tolerance_cap(horizon)),
                                   "tolerance");
}

/// Seeded synthetic scenario with the survey's attribute coding. The same
/// config always yields the same scenario.
inline Scenario generate_scenario(const GeneratorConfig& cfg) {
    validate_params(cfg.params);
    if (cfg.n_areas < 1) throw ValidationError("n_areas must be >= 1");
    if (cfg.users_min < 1 || cfg.users_max < cfg.users_min)
        throw ValidationError("users per area must satisfy 1 <= min <= max");
    validate_marginals(cfg.marginals, cfg.params.horizon);

    const auto& m = cfg.marginals;
    const int cap = tolerance_cap(cfg.params.horizon);
    detail::Sampler rng(cfg.seed);
    std::vector<HouseholdProfile> out;
    int serial = 0;
    for (int a = 1; a <= cfg.n_areas; ++a) {
        int k = rng.integer(cfg.users_min, cfg.users_max);
        for (int i = 0; i < k; ++i) {
            HouseholdProfile h;
            char id[32];
            std::snprintf(id, sizeof id, "h%05d", ++serial);
            h.id = id;
            h.area_id = a;
            h.income_code = codes::income[rng.categorical(m.income)];
            h.race_code = codes::race[rng.categorical(m.race)];
            h.education_code = codes::education[rng.categorical(m.education)];
            h.demand_mbps = codes::demand_mbps[rng.categorical(m.demand)];
            h.tolerance_days = m.tolerance.empty()
                                   ? rng.integer(1, cap)
                                   : static_cast<int>(rng.categorical(m.tolerance)) + 1;
            h.hardship_code = codes::hardship[rng.categorical(m.hardship)];
            h.perception_code = codes::perception[rng.categorical(m.perception)];
            out.push_back(std::move(h));
        }
    }
    return Scenario(std::move(out), cfg.params);
}

}  // namespace equiplan
