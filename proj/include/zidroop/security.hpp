#pragma once

// Closed-form steady state after a converter outage and N-1 screening.

#include "zidroop/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace zidroop {

struct LimitViolation {
    std::string converter_id;
    double excess = 0.0;  // pu above p_max
};

struct ContingencyReport {
    std::string outage_id;
    std::size_t outage_index = 0;
    double ssfd_pu = 0.0;
    double ssfd_hz = 0.0;
    /// Remaining converters in scenario order (outaged converter skipped).
    std::vector<std::size_t> converter_indices;
    Eigen::VectorXd post_fault_flows;
    std::vector<LimitViolation> violations;

    [[nodiscard]] bool secure() const { return violations.empty(); }
};

/// Absolute slack (pu) tolerated above p_max before a flow counts as a violation.
inline constexpr double kViolationTolerance = 1e-9;

/// Droop characteristic: p_ref + x * delta_omega.
[[nodiscard]] inline double droop_response(double p_ref, double x, double delta_omega) { return p_ref + x * delta_omega; }

/// Steady-state frequency deviation (pu) after losing converter `k`.
double ssfd(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k);
double ssfd(const DroopAssignment& assignment, const GridScenario& scenario, const std::string& outage_id);

/// Share z_{k,i} = x_i / (alpha - x_k) of outage k taken by converter i.
double outage_share(const Eigen::VectorXd& x, std::size_t k, std::size_t i);

/// Post-fault flows of every converter i != k, in scenario order.
Eigen::VectorXd post_fault_flows(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k);
Eigen::VectorXd post_fault_flows(const DroopAssignment& assignment, const GridScenario& scenario,
                                 const std::string& outage_id);

ContingencyReport analyse_outage(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k,
                                 double tolerance = kViolationTolerance);

/// One report per converter outage, in scenario order.
std::vector<ContingencyReport> screen_all_contingencies(const DroopAssignment& assignment,
                                                        const GridScenario& scenario,
                                                        double tolerance = kViolationTolerance);

[[nodiscard]] bool is_n1_secure(const std::vector<ContingencyReport>& reports);

/// Largest excess |P_i^*| - p_max_i over all ordered pairs (negative when slack everywhere).
double worst_post_fault_excess(const Eigen::VectorXd& x, const Eigen::VectorXd& p_ref, const Eigen::VectorXd& p_max);

/// CSV with one row per (outage, remaining converter).
void write_contingency_csv(std::ostream& out, const std::vector<ContingencyReport>& reports,
                           const GridScenario& scenario);

}  // namespace zidroop
