#pragma once

// JSON documents for scenarios and droop solutions. Powers are MW in files
// and per-unit in memory.
//
// scenario:
//   { "base": {"s_base_mva": 1850, "f_nom_hz": 50, "omega_ref_pu": 1},
//     "converters": [{"id": "UK", "rating_mva": 1850, "p_ref_mw": 1740,
//                     "p_max_pu": 0.95, "x_min": 10}, ...],
//     "wind": [{"node": "W1", "p_mw": 2000}, ...],
//     "network": {"nodes": [...], "edges": [{"from": "UK", "to": "HUB", "b_pu": 10}],
//                 "grounded_node": "HUB"} }          (network optional: star)
//
// droops:
//   { "ids": [...], "x": [...], "k_f": [...], "alpha": 600, "objective": 0,
//     "status": "optimal", "residual": 0, "backend": "oracle", "precision": -3 }

#include "zidroop/core.hpp"
#include "zidroop/droop_problem.hpp"

#include <iosfwd>
#include <string>

namespace zidroop {

GridScenario read_scenario(std::istream& in);
GridScenario load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const GridScenario& scenario);

struct DroopFile {
    std::vector<std::string> ids;
    DroopAssignment assignment;
    DroopStatus status = DroopStatus::Optimal;
};

void write_droops(std::ostream& out, const DroopSolution& solution, const std::vector<std::string>& ids,
                  int precision);
DroopFile read_droops(std::istream& in);
DroopFile load_droops(const std::string& path);

/// Droops ordered like the scenario's converters; throws InputError on id mismatch.
DroopAssignment align_droops(const DroopFile& file, const GridScenario& scenario);

}  // namespace zidroop
