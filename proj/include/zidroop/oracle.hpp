#pragma once

// Exact LP reformulation of the droop problem. Multiplying the post-fault
// limit by alpha - x_k > 0 gives, for every ordered pair i != k,
//
//    P_k x_i + (p_max_i - P_i) x_k <= (p_max_i - P_i) alpha
//   -P_k x_i + (p_max_i + P_i) x_k <= (p_max_i + P_i) alpha
//
// and the spread objective is split with epigraph variables t_ic.

#include "zidroop/droop_problem.hpp"
#include "zidroop/lp.hpp"

namespace zidroop {

struct OracleLp {
    lp::LinearProgram lp;
    std::vector<int> x;  // column of x_i
    std::vector<int> t;  // column of t_ic, pairs in (i, c) lexicographic order
    int spread_row = -1; // sum t <= +inf, tightened for the tie-break passes
};

OracleLp build_oracle_lp(const DroopProblem& problem);

struct OracleOptions {
    bool lexicographic = true;
    double tie_tolerance = 1e-9;  // relative slack on the optimal spread
};

/// Globally optimal x of the exact problem; ties broken by lexicographic minimization of x.
DroopSolution solve_exact_oracle(const DroopProblem& problem, const OracleOptions& options = {});

}  // namespace zidroop
