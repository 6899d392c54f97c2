#include "zidroop/droop_solver.hpp"

namespace zidroop {

const char* to_string(Backend backend)
{
    switch (backend) {
    case Backend::Oracle:
        return "oracle";
    case Backend::BranchAndBound:
        return "bnb";
    case Backend::External:
        return "external";
    }
    return "unknown";
}

Backend parse_backend(const std::string& name)
{
    if (name == "oracle") {
        return Backend::Oracle;
    }
    if (name == "bnb" || name == "milp") {
        return Backend::BranchAndBound;
    }
    if (name == "external") {
        return Backend::External;
    }
    throw InputError("unknown backend '" + name + "' (expected oracle, bnb or external)");
}

DroopSolution solve(const MilpModel& model, const DroopProblem& problem, const SolverConfig& config)
{
    if (config.backend == Backend::External) {
        return solve_external(model, problem, config.external);
    }
    return solve_branch_and_bound(model, problem, config.bnb);
}

DroopSolution solve_droops(const DroopProblem& problem, const SolverConfig& config)
{
    if (config.backend == Backend::Oracle) {
        return solve_exact_oracle(problem);
    }
    return solve(build_milp(problem), problem, config);
}

}  // namespace zidroop
