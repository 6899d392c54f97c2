#pragma once

// The droop-gain selection problem in its exact (nonconvex) form:
//
//   minimize    sum_{i<c} |x_i - x_c|
//   subject to  sum_i x_i = alpha,  x_i >= x_min_i,
//               |P_i + x_i / (alpha - x_k) * P_k| <= p_max_i   for all i != k.

#include "zidroop/core.hpp"

#include <string>
#include <vector>

namespace zidroop {

inline constexpr double kDefaultAlpha = 600.0;
inline constexpr int kDefaultPrecision = -3;

struct DroopProblem {
    double alpha = kDefaultAlpha;
    Eigen::VectorXd x_min;
    Eigen::VectorXd p_ref;
    Eigen::VectorXd p_max;
    std::vector<std::string> ids;
    int precision = kDefaultPrecision;  // lowest digit exponent (psi_b = psi_d)
    int eta_b = 2;                      // top digit exponent of alpha_k
    int eta_d = 2;                      // top digit exponent of x_i

    [[nodiscard]] int size() const { return static_cast<int>(p_ref.size()); }
    /// Largest value x_i can take: alpha minus the other lower bounds.
    [[nodiscard]] double x_upper(int i) const;
    /// Number of two-sided post-fault constraints (ordered pairs i != k).
    [[nodiscard]] int post_fault_constraint_count() const { return size() * (size() - 1); }
};

/// Top digit exponent able to represent every value up to `upper`.
int top_exponent(double upper);

/// Throws InputError("stiffness target unreachable ...") when alpha <= sum x_min.
DroopProblem build_exact_problem(const GridScenario& scenario, double alpha = kDefaultAlpha,
                                 int precision = kDefaultPrecision);

/// Problem straight from vectors (used by tests and the market loop).
DroopProblem make_problem(double alpha, Eigen::VectorXd x_min, Eigen::VectorXd p_ref, Eigen::VectorXd p_max,
                          int precision = kDefaultPrecision);

/// sum_{i<c} |x_i - x_c|
double pairwise_spread(const Eigen::VectorXd& x);

/// Worst exact post-fault limit excess, clipped at zero.
double exact_residual(const DroopProblem& problem, const Eigen::VectorXd& x);

/// Residual tolerated for an optimal answer at `precision`: 10 * 10^psi * max|P|.
double residual_tolerance(const DroopProblem& problem);

enum class DroopStatus { Optimal, Infeasible, PrecisionLimited, LimitReached };

const char* to_string(DroopStatus status);

struct DroopSolution {
    DroopStatus status = DroopStatus::Infeasible;
    DroopAssignment assignment;
    double objective = 0.0;
    double residual = 0.0;
    std::string backend;
    long nodes = 0;
    long lp_iterations = 0;

    [[nodiscard]] bool has_assignment() const { return assignment.size() > 0; }
};

}  // namespace zidroop
