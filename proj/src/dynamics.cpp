#include "zidroop/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

namespace zidroop {

namespace {

std::vector<int> complement(int n, const std::vector<int>& keep)
{
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    for (int k : keep) {
        kept[static_cast<std::size_t>(k)] = true;
    }
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
        if (!kept[static_cast<std::size_t>(i)]) {
            rest.push_back(i);
        }
    }
    return rest;
}

Eigen::MatrixXd pick(const Eigen::MatrixXd& M, const std::vector<int>& rows, const std::vector<int>& cols)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M(rows[r], cols[c]);
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L, const std::vector<int>& keep)
{
    const auto rest = complement(static_cast<int>(L.rows()), keep);
    Eigen::MatrixXd red = pick(L, keep, keep);
    if (rest.empty()) {
        return red;
    }
    const Eigen::MatrixXd lpp = pick(L, rest, rest);
    const Eigen::MatrixXd lkp = pick(L, keep, rest);
    Eigen::LDLT<Eigen::MatrixXd> f(lpp);
    if (f.info() != Eigen::Success || (f.vectorD().array() <= 0.0).any()) {
        throw InputError("Kron reduction: passive buses are not tied to the converters");
    }
    red -= lkp * f.solve(lkp.transpose());
    // symmetrize and restore exact zero row sums
    red = 0.5 * (red + red.transpose()).eval();
    for (Eigen::Index i = 0; i < red.rows(); ++i) {
        red(i, i) -= red.row(i).sum();
    }
    return red;
}

Eigen::MatrixXd converter_laplacian(const GridScenario& scenario)
{
    const auto L = laplacian(scenario.network);
    std::vector<int> keep;
    for (const auto& c : scenario.converters) {
        const int idx = scenario.network.index_of(c.id);
        if (idx < 0) {
            throw InputError("converter " + c.id + " is not a network node");
        }
        keep.push_back(idx);
    }
    return kron_reduce(L, keep);
}

DynamicModel assemble_model(const Eigen::MatrixXd& laplacian, const Eigen::VectorXd& k_f, double tau,
                            std::vector<std::string> ids)
{
    if (!(tau > 0.0)) {
        throw InputError("tau must be positive");
    }
    const Eigen::Index n = k_f.size();
    if (laplacian.rows() != n || laplacian.cols() != n) {
        throw InputError("Laplacian and gain vector dimensions differ");
    }
    DynamicModel m;
    m.tau = tau;
    m.k_f = k_f;
    m.laplacian = laplacian;
    m.ids = std::move(ids);
    m.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.A.topRightCorner(n, n).setIdentity();
    m.A.bottomLeftCorner(n, n) = -(k_f.asDiagonal() * laplacian) / tau;
    m.A.bottomRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n) / tau;
    m.B = Eigen::MatrixXd::Zero(2 * n, n);
    m.B.bottomRows(n) = -Eigen::MatrixXd(k_f.asDiagonal()) / tau;
    m.C = Eigen::MatrixXd::Zero(n, 2 * n);
    m.C.rightCols(n).setIdentity();
    return m;
}

DynamicModel assemble_model(const GridScenario& scenario, const DroopAssignment& assignment, double tau)
{
    if (assignment.size() != scenario.size()) {
        throw InputError("assignment dimension does not match the scenario");
    }
    std::vector<std::string> ids;
    for (const auto& c : scenario.converters) {
        ids.push_back(c.id);
    }
    return assemble_model(converter_laplacian(scenario), assignment.k_f(), tau, std::move(ids));
}

Eigen::VectorXd laplacian_modes(const Eigen::MatrixXd& L)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    return es.eigenvalues().tail(L.rows() - 1);
}

DynamicModel reduce_grounded(const DynamicModel& model)
{
    if (model.reduced) {
        return model;
    }
    const Eigen::Index n = model.k_f.size();
    if (n < 2) {
        throw InputError("degenerate system: reduction needs at least two converters");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.laplacian);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda(1) <= 1e-9 * scale) {
        throw InputError("Laplacian has a repeated zero eigenvalue (disconnected graph)");
    }
    const Eigen::MatrixXd U = es.eigenvectors();
    const Eigen::MatrixXd Ur = U.rightCols(n - 1);
    const Eigen::Index r = n - 1;
    const Eigen::MatrixXd M = Ur.transpose() * model.k_f.asDiagonal() * Ur;

    DynamicModel red = model;
    red.reduced = true;
    red.A = Eigen::MatrixXd::Zero(2 * r, 2 * r);
    red.A.topRightCorner(r, r).setIdentity();
    red.A.bottomLeftCorner(r, r) = -(M * lambda.tail(r).asDiagonal()) / model.tau;
    red.A.bottomRightCorner(r, r) = -Eigen::MatrixXd::Identity(r, r) / model.tau;
    red.B = Eigen::MatrixXd::Zero(2 * r, n);
    red.B.bottomRows(r) = -(Ur.transpose() * model.k_f.asDiagonal()) / model.tau;
    red.C = Eigen::MatrixXd::Zero(r, 2 * r);
    red.C.rightCols(r).setIdentity();
    return red;
}

DynamicModel ground_node(const DynamicModel& model, Eigen::Index node)
{
    const Eigen::Index n = model.k_f.size();
    if (node < 0 || node >= n) {
        throw InputError("grounded node out of range");
    }
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i != node) {
            keep.push_back(static_cast<int>(i));
        }
    }
    const Eigen::MatrixXd L = pick(model.laplacian, keep, keep);
    Eigen::VectorXd k(static_cast<Eigen::Index>(keep.size()));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        k(static_cast<Eigen::Index>(i)) = model.k_f(keep[i]);
        if (!model.ids.empty()) {
            ids.push_back(model.ids[static_cast<std::size_t>(keep[i])]);
        }
    }
    DynamicModel g = assemble_model(L, k, model.tau, std::move(ids));
    g.reduced = true;
    return g;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q)
{
    using Complex = std::complex<double>;
    const Eigen::Index n = A.rows();
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(A);
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& Z = schur.matrixU();
    // A = Z T Z*, so T* Y + Y T = -Z* Q Z with Y = Z* X Z
    const Eigen::MatrixXcd Qt = Z.adjoint() * Q.cast<Complex>() * Z;
    const Eigen::MatrixXcd Ts = T.adjoint();  // lower triangular
    Eigen::MatrixXcd Y(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd rhs = -Qt.col(j);
        for (Eigen::Index k = 0; k < j; ++k) {
            rhs -= T(k, j) * Y.col(k);
        }
        Eigen::MatrixXcd Mj = Ts;
        Mj.diagonal().array() += T(j, j);
        Y.col(j) = Mj.triangularView<Eigen::Lower>().solve(rhs);
    }
    Eigen::MatrixXd X = (Z * Y * Z.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

double spectral_abscissa(const Eigen::MatrixXd& A)
{
    if (A.rows() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

double h2_norm(const DynamicModel& model)
{
    if (model.states() == 0 || model.B.isZero(0.0)) {
        return 0.0;
    }
    const double abscissa = spectral_abscissa(model.A);
    if (abscissa >= -kStabilityMargin) {
        throw UnstableModel("unstable model: spectral abscissa " + std::to_string(abscissa) +
                            (model.reduced ? "" : " (reduce the full model first)"));
    }
    const Eigen::MatrixXd X = solve_lyapunov(model.A, model.C.transpose() * model.C);
    return std::max(0.0, (model.B.transpose() * X * model.B).trace());
}

double H2Decomposition::relative_gap() const
{
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

double attached_subsystem_h2(double k, double b, double tau)
{
    DynamicModel m = assemble_model(Eigen::MatrixXd::Constant(1, 1, b), Eigen::VectorXd::Constant(1, k), tau);
    m.reduced = true;
    return h2_norm(m);
}

H2Decomposition h2_decomposition_check(const DynamicModel& base, double k_m1, double k_m2, double b_m1, double b_m2,
                                       Eigen::Index grounded)
{
    const Eigen::Index n = base.k_f.size();
    if (base.reduced || base.laplacian.rows() != n) {
        throw InputError("decomposition check needs the full base model");
    }
    if (grounded < 0) {
        grounded = n - 1;
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n + 2, n + 2);
    L.topLeftCorner(n, n) = base.laplacian;
    const Eigen::Index m1 = n;
    const Eigen::Index m2 = n + 1;
    for (const auto& [m, b] : {std::pair{m1, b_m1}, std::pair{m2, b_m2}}) {
        L(grounded, grounded) += b;
        L(m, m) += b;
        L(grounded, m) -= b;
        L(m, grounded) -= b;
    }
    Eigen::VectorXd k(n + 2);
    k << base.k_f, k_m1, k_m2;

    H2Decomposition d;
    d.lhs = h2_norm(ground_node(assemble_model(L, k, base.tau), grounded));
    d.base = h2_norm(ground_node(base, grounded));
    d.sub1 = attached_subsystem_h2(k_m1, b_m1, base.tau);
    d.sub2 = attached_subsystem_h2(k_m2, b_m2, base.tau);
    d.rhs = d.base + d.sub1 + d.sub2;
    d.sigma = k_m1 + k_m2;
    d.epsilon = d.sigma * d.sigma - 2.0 * k_m1 * k_m2;
    return d;
}

}  // namespace zidroop
