#pragma once

// Backend selection for the droop problem: the exact LP oracle, the built-in
// branch-and-bound on the disaggregated MILP, or an external MILP solver.

#include "zidroop/branch_and_bound.hpp"
#include "zidroop/external_backend.hpp"
#include "zidroop/oracle.hpp"

#include <string>

namespace zidroop {

enum class Backend { Oracle, BranchAndBound, External };

const char* to_string(Backend backend);
/// "oracle", "bnb" or "external"; throws InputError otherwise.
Backend parse_backend(const std::string& name);

struct SolverConfig {
    Backend backend = Backend::BranchAndBound;
    BnbOptions bnb;
    ExternalOptions external;
};

/// Solves the MILP recast of `model` with the configured MILP backend.
DroopSolution solve(const MilpModel& model, const DroopProblem& problem, const SolverConfig& config = {});

/// Dispatches on the backend, building the MILP when one is needed.
DroopSolution solve_droops(const DroopProblem& problem, const SolverConfig& config = {});

}  // namespace zidroop
