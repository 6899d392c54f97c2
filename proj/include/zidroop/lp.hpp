#pragma once

// Sparse bounded-variable dual simplex.
//
//   minimize   c'x
//   subject to row_lo <= A x <= row_hi
//              col_lo <=  x  <= col_hi
//
// Every column must carry finite bounds; infinite row bounds are replaced
// by the activity range implied by the column box. With all variables boxed
// any basis is made dual feasible by parking nonbasic columns at the bound
// matching the sign of their reduced cost, so a single dual phase suffices
// and bound changes (branching) warm-start from the previous basis.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace zidroop::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
    std::vector<double> cost;
    std::vector<double> col_lo;
    std::vector<double> col_hi;
    std::vector<std::string> col_names;

    std::vector<double> row_lo;
    std::vector<double> row_hi;
    std::vector<std::string> row_names;

    std::vector<Eigen::Triplet<double>> entries;

    [[nodiscard]] int cols() const { return static_cast<int>(cost.size()); }
    [[nodiscard]] int rows() const { return static_cast<int>(row_lo.size()); }

    int add_column(double lo, double hi, double c, std::string name = {});
    int add_row(double lo, double hi, const std::vector<std::pair<int, double>>& coefficients, std::string name = {});

    [[nodiscard]] Eigen::SparseMatrix<double> matrix() const;
    [[nodiscard]] double objective(const Eigen::VectorXd& x) const;
    /// Largest bound or row violation of `x`.
    [[nodiscard]] double max_violation(const Eigen::VectorXd& x) const;
};

enum class Status { Optimal, Infeasible, IterationLimit, NumericalFailure };

const char* to_string(Status s);

struct Options {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_interval = 64;
    long max_iterations = -1;  // <0: automatic
    bool perturb_costs = true;
};

/// Basis snapshot used to warm-start a solver after bound changes.
struct Basis {
    std::vector<int> head;           // variable basic in each row position
    std::vector<std::int8_t> state;  // per variable (structurals then logicals)
    [[nodiscard]] bool empty() const { return head.empty(); }
};

class DualSimplex {
public:
    explicit DualSimplex(const LinearProgram& lp, Options options = {});

    void set_column_bounds(int col, double lo, double hi);
    [[nodiscard]] double column_lower(int col) const { return lo_[static_cast<std::size_t>(col)]; }
    [[nodiscard]] double column_upper(int col) const { return hi_[static_cast<std::size_t>(col)]; }
    void set_cost(int col, double c);
    void set_row_bounds(int row, double lo, double hi);

    Status solve();

    [[nodiscard]] Status status() const { return status_; }
    [[nodiscard]] double objective() const;
    [[nodiscard]] Eigen::VectorXd primal() const;
    [[nodiscard]] long iterations() const { return iterations_; }

    [[nodiscard]] Basis basis() const;
    void set_basis(const Basis& basis);

private:
    enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2 };

    struct Eta {
        int row;
        double pivot;
        std::vector<std::pair<int, double>> entries;  // off-pivot entries of the entering column
    };

    void reset_slack_basis();
    bool refactor();
    void ftran(Eigen::VectorXd& v) const;
    void btran(Eigen::VectorXd& v) const;
    void column(int var, Eigen::VectorXd& out) const;
    void add_column_to(int var, double scale, Eigen::VectorXd& out) const;
    void compute_primal();
    void compute_dual();
    /// Moves nonbasic columns to the bound matching their reduced-cost sign; dual
    /// infeasibilities up to `shift_below` are removed by a cost shift instead.
    bool park_nonbasic(double shift_below = 0.0);  // true when any nonbasic value moved
    void apply_perturbation();
    void remove_perturbation();
    [[nodiscard]] bool is_fixed(int var) const { return hi_[static_cast<std::size_t>(var)] - lo_[static_cast<std::size_t>(var)] <= 0.0; }
    Status iterate();

    Options opt_;
    int n_ = 0;
    int m_ = 0;
    Eigen::SparseMatrix<double, Eigen::ColMajor> a_cols_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> a_rows_;

    std::vector<double> cost_;
    std::vector<double> work_cost_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> x_;
    std::vector<double> d_;
    std::vector<std::int8_t> state_;
    std::vector<int> head_;
    std::vector<int> position_;
    std::vector<double> weight_;

    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;

    bool factor_valid_ = false;
    bool perturbed_ = false;
    std::uint32_t perturb_seed_ = 12345u;
    Status status_ = Status::NumericalFailure;
    long iterations_ = 0;
};

struct Result {
    Status status = Status::NumericalFailure;
    double objective = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
};

Result solve(const LinearProgram& lp, Options options = {});

}  // namespace zidroop::lp
