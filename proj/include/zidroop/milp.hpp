#pragma once

// Mixed-integer linear recast of the droop problem by multi-parametric
// disaggregation. The bilinear products sigma_k * alpha_k = 1 and
// z_ki = sigma_k * x_i are linearized by expanding alpha_k and x_i into
// decimal digits a * 10^p (p = psi..eta) selected by binaries, with one
// disaggregated copy of sigma_k per digit.

#include "zidroop/droop_problem.hpp"
#include "zidroop/lp.hpp"

#include <array>
#include <vector>

namespace zidroop {

/// The ten binaries selecting one decimal digit of alpha_k or x_i at one place.
struct DigitFamily {
    enum class Kind { Alpha, X };
    Kind kind = Kind::X;
    int owner = 0;  // k for Alpha, i for X
    int place = 0;  // exponent of ten
    std::array<int, 10> y{};      // binary column per digit
    std::array<double, 10> y_hi{};  // structural upper bound of each binary (0 when the digit overshoots)
};

struct MilpModel {
    lp::LinearProgram lp;
    int n = 0;
    int psi = 0;
    int eta_b = 0;
    int eta_d = 0;

    std::vector<int> x;             // x_i
    std::vector<int> alpha_k;       // alpha - x_k
    std::vector<int> sigma;         // 1 / alpha_k
    std::vector<std::vector<int>> z;  // z[k][i], -1 on the diagonal
    std::vector<int> t;             // |x_i - x_c| epigraph
    std::vector<double> s_bar;      // 1 / sum_{i != k} x_min_i

    std::vector<DigitFamily> families;  // all Alpha families first, then X
    std::vector<int> binaries;          // every y column
    std::vector<int> sigma_hat_alpha;
    std::vector<int> sigma_hat_x;

    [[nodiscard]] int places_b() const { return eta_b - psi + 1; }
    [[nodiscard]] int places_d() const { return eta_d - psi + 1; }
    [[nodiscard]] int y_alpha_count() const { return n * 10 * places_b(); }
    [[nodiscard]] int y_x_count() const { return n * 10 * places_d(); }
    /// Index of the family of `kind`, owner and place.
    [[nodiscard]] int family_index(DigitFamily::Kind kind, int owner, int place) const;
};

/// Total construction: the model for every valid problem (infeasibility shows up in the solve).
MilpModel build_milp(const DroopProblem& problem);

/// Column bounds that pin x to `x_values` through its digit binaries.
/// Values are rounded to the nearest multiple of 10^psi first.
void fix_digits(const MilpModel& model, const Eigen::VectorXd& x_values, lp::DualSimplex& simplex);

/// Power of ten as an exactly rounded double.
double pow10(int e);

/// Decimal digit of `value` (assumed on the 10^psi grid) at `place`.
int digit_at(double value, int place, int psi);

}  // namespace zidroop
