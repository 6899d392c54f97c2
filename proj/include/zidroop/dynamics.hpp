#pragma once

// Linear droop dynamics of the converter network and H2 analysis.
//
// States are (theta, omega) per converter. With measurement delay tau,
// droop gains K = diag(k) and the converter Laplacian L (passive buses
// Kron-reduced away):
//
//   A = [[0, I], [-K L / tau, -I / tau]],  B = [0; -K / tau],  C = [0, I].

#include "zidroop/core.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace zidroop {

inline constexpr double kDefaultTau = 0.02;
inline constexpr double kStabilityMargin = 1e-10;

class UnstableModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DynamicModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    double tau = kDefaultTau;
    Eigen::VectorXd k_f;
    Eigen::MatrixXd laplacian;
    std::vector<std::string> ids;
    bool reduced = false;

    [[nodiscard]] Eigen::Index states() const { return A.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return C.rows(); }
};

/// Schur complement of `L` onto the `keep` indices (in the given order).
Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L, const std::vector<int>& keep);

/// Laplacian seen by the converters (hub and wind buses eliminated).
Eigen::MatrixXd converter_laplacian(const GridScenario& scenario);

DynamicModel assemble_model(const Eigen::MatrixXd& laplacian, const Eigen::VectorXd& k_f, double tau,
                            std::vector<std::string> ids = {});
DynamicModel assemble_model(const GridScenario& scenario, const DroopAssignment& assignment, double tau);

/// Modal reduction: theta = U theta', omega = U omega' with U the eigenvectors of
/// L, dropping the zero-eigenvalue coordinates. Yields 2(n-1) states.
DynamicModel reduce_grounded(const DynamicModel& model);

/// Grounds node `node` (Dirichlet): its row, column and converter disappear.
DynamicModel ground_node(const DynamicModel& model, Eigen::Index node);

/// Nonzero Laplacian eigenvalues used by the reduction, ascending.
Eigen::VectorXd laplacian_modes(const Eigen::MatrixXd& L);

/// Solves A'X + XA = -Q (A Hurwitz) by complex Schur and forward substitution.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Largest real part over the eigenvalues of `A`.
double spectral_abscissa(const Eigen::MatrixXd& A);

/// Squared H2 norm tr(B' X B); throws UnstableModel unless A is Hurwitz.
double h2_norm(const DynamicModel& model);

/// (n-1) k^2 / (2 tau): equal gains, any connected graph.
[[nodiscard]] inline double equal_gain_h2(std::size_t n, double k, double tau)
{
    return static_cast<double>(n - 1) * k * k / (2.0 * tau);
}

/// k^2 / (2 tau): one attached converter behind a grounded bus.
[[nodiscard]] inline double attached_node_h2(double k, double tau) { return k * k / (2.0 * tau); }

/// Lyapunov norm of one converter tied by `b` to a grounded bus.
double attached_subsystem_h2(double k, double b, double tau);

struct H2Decomposition {
    double lhs = 0.0;   // norm of the extended, grounded network
    double rhs = 0.0;   // base + sub1 + sub2
    double base = 0.0;  // grounded base network
    double sub1 = 0.0;
    double sub2 = 0.0;
    double sigma = 0.0;    // k_m1 + k_m2
    double epsilon = 0.0;  // sigma^2 - 2 k_m1 k_m2

    [[nodiscard]] double relative_gap() const;
};

/// Attaches converters m1, m2 (edges b_m1, b_m2) to node `grounded` of the full
/// base model, grounds that node and compares the joint norm with the sum
/// of the three decoupled subsystems. `grounded` < 0 selects the last node.
H2Decomposition h2_decomposition_check(const DynamicModel& base, double k_m1, double k_m2, double b_m1 = 1.0,
                                       double b_m2 = 1.0, Eigen::Index grounded = -1);

}  // namespace zidroop
