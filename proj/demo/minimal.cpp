// Generates a small scenario, plans it with the rounding heuristic and
// prints the served slot and rate of every area.
#include <iostream>

#include "equiplan/equiplan.hpp"

int main() {
    equiplan::GeneratorConfig cfg;
    cfg.seed = 7;
    cfg.n_areas = 4;
    cfg.users_min = 2;
    cfg.users_max = 3;
    cfg.params.smax_mbps = 1000;

    auto sc = equiplan::generate_scenario(cfg);
    auto trace = equiplan::solve_heuristic(sc);

    std::cout << "objective " << trace.true_objective << " (relaxation bound " << trace.upper_bound << ")\n";
    for (std::size_t n = 0; n < sc.area_count(); ++n)
        std::cout << "area " << sc.areas()[n].area_id << ": slot " << trace.final_plan.serve_slot(n) << ", "
                  << trace.final_plan.s[n] << " Mbps\n";
    return 0;
}
