#pragma once

// Depth-first branch-and-bound over the digit binaries of the disaggregated
// MILP. Nodes restrict each digit family to a subset of {0..9}; digit
// subsets are propagated to intervals of x_i and alpha_k, which in turn
// tighten the continuous columns before each warm-started LP relaxation.

#include "zidroop/droop_problem.hpp"
#include "zidroop/milp.hpp"

namespace zidroop {

struct BnbOptions {
    long node_limit = 2000000;
    double time_limit = 120.0;  // seconds
    double abs_gap = 1e-6;
    double rel_gap = 1e-9;
    double integrality_tol = 1e-9;
    bool rounding_heuristic = true;
    /// Add the post-fault limits in exact linear form to every relaxation.
    bool valid_inequalities = true;
    /// Prune nodes that cannot beat the incumbent by a full grid step.
    bool integral_objective = true;
};

struct BnbStats {
    long nodes = 0;
    long lp_iterations = 0;
    long pruned_by_bound = 0;
    long pruned_infeasible = 0;
    long incumbent_updates = 0;
    int max_depth = 0;
    double seconds = 0.0;
    bool limit_hit = false;
};

DroopSolution solve_branch_and_bound(const MilpModel& model, const DroopProblem& problem,
                                     const BnbOptions& options = {}, BnbStats* stats = nullptr);

}  // namespace zidroop
