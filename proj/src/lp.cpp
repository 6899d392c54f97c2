#include "zidroop/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace zidroop::lp {

namespace {

// Largest dual infeasibility repaired by shifting rather than a bound flip.
constexpr double kDriftShift = 1e-6;

}  // namespace

int LinearProgram::add_column(double lo, double hi, double c, std::string name)
{
    cost.push_back(c);
    col_lo.push_back(lo);
    col_hi.push_back(hi);
    col_names.push_back(std::move(name));
    return cols() - 1;
}

int LinearProgram::add_row(double lo, double hi, const std::vector<std::pair<int, double>>& coefficients,
                           std::string name)
{
    const int r = rows();
    row_lo.push_back(lo);
    row_hi.push_back(hi);
    row_names.push_back(std::move(name));
    for (const auto& [col, v] : coefficients) {
        if (v != 0.0) {
            entries.emplace_back(r, col, v);
        }
    }
    return r;
}

Eigen::SparseMatrix<double> LinearProgram::matrix() const
{
    Eigen::SparseMatrix<double> a(rows(), cols());
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

double LinearProgram::objective(const Eigen::VectorXd& x) const
{
    double v = 0.0;
    for (int j = 0; j < cols(); ++j) {
        v += cost[static_cast<std::size_t>(j)] * x(j);
    }
    return v;
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const
{
    double worst = 0.0;
    for (int j = 0; j < cols(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        worst = std::max({worst, col_lo[jj] - x(j), x(j) - col_hi[jj]});
    }
    const Eigen::VectorXd act = matrix() * x;
    for (int i = 0; i < rows(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        worst = std::max({worst, row_lo[ii] - act(i), act(i) - row_hi[ii]});
    }
    return worst;
}

const char* to_string(Status s)
{
    switch (s) {
    case Status::Optimal:
        return "optimal";
    case Status::Infeasible:
        return "infeasible";
    case Status::IterationLimit:
        return "iteration-limit";
    case Status::NumericalFailure:
        return "numerical-failure";
    }
    return "unknown";
}

DualSimplex::DualSimplex(const LinearProgram& lp, Options options) : opt_(options), n_(lp.cols()), m_(lp.rows())
{
    a_cols_ = lp.matrix();
    a_cols_.makeCompressed();
    a_rows_ = a_cols_;
    a_rows_.makeCompressed();

    const auto total = static_cast<std::size_t>(n_ + m_);
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (!std::isfinite(lp.col_lo[jj]) || !std::isfinite(lp.col_hi[jj])) {
            throw std::invalid_argument("DualSimplex requires finite column bounds");
        }
        cost_[jj] = lp.cost[jj];
        lo_[jj] = lp.col_lo[jj];
        hi_[jj] = lp.col_hi[jj];
    }
    // Logical bounds: row bounds clipped to the activity range of the box.
    std::vector<double> act_lo(static_cast<std::size_t>(m_), 0.0);
    std::vector<double> act_hi(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_cols_, j); it; ++it) {
            const double a = it.value();
            const auto r = static_cast<std::size_t>(it.row());
            const auto jj = static_cast<std::size_t>(j);
            act_lo[r] += std::min(a * lo_[jj], a * hi_[jj]);
            act_hi[r] += std::max(a * lo_[jj], a * hi_[jj]);
        }
    }
    for (int i = 0; i < m_; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const auto v = static_cast<std::size_t>(n_ + i);
        lo_[v] = std::isfinite(lp.row_lo[ii]) ? lp.row_lo[ii] : act_lo[ii];
        hi_[v] = std::isfinite(lp.row_hi[ii]) ? lp.row_hi[ii] : act_hi[ii];
        if (!std::isfinite(lp.row_lo[ii]) && lo_[v] > hi_[v]) {
            lo_[v] = hi_[v];
        }
        if (!std::isfinite(lp.row_hi[ii]) && hi_[v] < lo_[v]) {
            hi_[v] = lo_[v];
        }
    }
    work_cost_ = cost_;
    x_.assign(total, 0.0);
    d_.assign(total, 0.0);
    reset_slack_basis();
}

void DualSimplex::reset_slack_basis()
{
    const auto total = static_cast<std::size_t>(n_ + m_);
    state_.assign(total, kAtLower);
    head_.assign(static_cast<std::size_t>(m_), 0);
    position_.assign(total, -1);
    for (int i = 0; i < m_; ++i) {
        head_[static_cast<std::size_t>(i)] = n_ + i;
        position_[static_cast<std::size_t>(n_ + i)] = i;
        state_[static_cast<std::size_t>(n_ + i)] = kBasic;
    }
    for (int j = 0; j < n_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        state_[jj] = work_cost_[jj] >= 0.0 ? kAtLower : kAtUpper;
        x_[jj] = state_[jj] == kAtLower ? lo_[jj] : hi_[jj];
    }
    weight_.assign(static_cast<std::size_t>(m_), 1.0);
    etas_.clear();
    factor_valid_ = false;
}

void DualSimplex::set_column_bounds(int col, double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("DualSimplex requires finite column bounds");
    }
    const auto jj = static_cast<std::size_t>(col);
    lo_[jj] = lo;
    hi_[jj] = hi;
}

void DualSimplex::set_cost(int col, double c)
{
    const auto jj = static_cast<std::size_t>(col);
    cost_[jj] = c;
    work_cost_[jj] = c;
}

void DualSimplex::set_row_bounds(int row, double lo, double hi)
{
    const auto v = static_cast<std::size_t>(n_ + row);
    if (std::isfinite(lo)) {
        lo_[v] = lo;
    }
    if (std::isfinite(hi)) {
        hi_[v] = hi;
    }
}

Basis DualSimplex::basis() const { return {head_, state_}; }

void DualSimplex::set_basis(const Basis& basis)
{
    if (basis.head.size() != static_cast<std::size_t>(m_) || basis.state.size() != state_.size()) {
        throw std::invalid_argument("basis dimension mismatch");
    }
    head_ = basis.head;
    state_ = basis.state;
    std::fill(position_.begin(), position_.end(), -1);
    for (int p = 0; p < m_; ++p) {
        position_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] = p;
    }
    weight_.assign(static_cast<std::size_t>(m_), 1.0);
    etas_.clear();
    factor_valid_ = false;
}

void DualSimplex::column(int var, Eigen::VectorXd& out) const
{
    out.setZero(m_);
    add_column_to(var, 1.0, out);
}

void DualSimplex::add_column_to(int var, double scale, Eigen::VectorXd& out) const
{
    if (var < n_) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_cols_, var); it; ++it) {
            out(it.row()) += scale * it.value();
        }
    } else {
        out(var - n_) -= scale;
    }
}

bool DualSimplex::refactor()
{
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) {
        const int var = head_[static_cast<std::size_t>(p)];
        if (var < n_) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(a_cols_, var); it; ++it) {
                trips.emplace_back(static_cast<int>(it.row()), p, it.value());
            }
        } else {
            trips.emplace_back(var - n_, p, -1.0);
        }
    }
    Eigen::SparseMatrix<double> b(m_, m_);
    b.setFromTriplets(trips.begin(), trips.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    etas_.clear();
    factor_valid_ = lu_.info() == Eigen::Success;
    return factor_valid_;
}

void DualSimplex::ftran(Eigen::VectorXd& v) const
{
    if (m_ == 0) {
        return;
    }
    v = lu_.solve(v).eval();
    for (const auto& eta : etas_) {
        const double vr = v(eta.row) / eta.pivot;
        v(eta.row) = vr;
        if (vr != 0.0) {
            for (const auto& [i, a] : eta.entries) {
                v(i) -= a * vr;
            }
        }
    }
}

void DualSimplex::btran(Eigen::VectorXd& v) const
{
    if (m_ == 0) {
        return;
    }
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = v(it->row);
        for (const auto& [i, a] : it->entries) {
            s -= a * v(i);
        }
        v(it->row) = s / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
}

void DualSimplex::compute_primal()
{
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    const auto total = n_ + m_;
    for (int j = 0; j < total; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (state_[jj] == kBasic) {
            continue;
        }
        x_[jj] = state_[jj] == kAtUpper ? hi_[jj] : lo_[jj];
        if (x_[jj] != 0.0) {
            add_column_to(j, -x_[jj], rhs);
        }
    }
    ftran(rhs);
    for (int p = 0; p < m_; ++p) {
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] = rhs(p);
    }
}

void DualSimplex::compute_dual()
{
    Eigen::VectorXd y(m_);
    for (int p = 0; p < m_; ++p) {
        y(p) = work_cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])];
    }
    btran(y);
    for (int j = 0; j < n_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (state_[jj] == kBasic) {
            d_[jj] = 0.0;
            continue;
        }
        double dot = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_cols_, j); it; ++it) {
            dot += it.value() * y(it.row());
        }
        d_[jj] = work_cost_[jj] - dot;
    }
    for (int i = 0; i < m_; ++i) {
        const auto v = static_cast<std::size_t>(n_ + i);
        d_[v] = state_[v] == kBasic ? 0.0 : work_cost_[v] + y(i);
    }
}

bool DualSimplex::park_nonbasic(double shift_below)
{
    bool moved = false;
    const auto total = static_cast<std::size_t>(n_ + m_);
    for (std::size_t j = 0; j < total; ++j) {
        if (state_[j] == kBasic) {
            continue;
        }
        std::int8_t want = state_[j];
        const bool wrong = (state_[j] == kAtLower && d_[j] < -opt_.dual_tol) ||
                           (state_[j] == kAtUpper && d_[j] > opt_.dual_tol);
        if (hi_[j] <= lo_[j]) {
            want = kAtLower;
        } else if (wrong && std::abs(d_[j]) <= shift_below) {
            // small drift left by the Harris ratio test: shift the cost instead of flipping
            work_cost_[j] -= d_[j];
            d_[j] = 0.0;
            perturbed_ = true;
        } else if (state_[j] == kAtLower && d_[j] < -opt_.dual_tol) {
            want = kAtUpper;
        } else if (state_[j] == kAtUpper && d_[j] > opt_.dual_tol) {
            want = kAtLower;
        }
        state_[j] = want;
        const double value = want == kAtUpper ? hi_[j] : lo_[j];
        if (value != x_[j]) {
            moved = true;
        }
        x_[j] = value;
    }
    return moved;
}

void DualSimplex::apply_perturbation()
{
    std::mt19937 rng(perturb_seed_);
    for (int j = 0; j < n_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const double u = static_cast<double>(rng()) / 4294967296.0;
        const double mag = 5e-7 * (1.0 + std::abs(cost_[jj])) * (0.5 + 0.5 * u);
        work_cost_[jj] = cost_[jj] + (state_[jj] == kAtUpper ? -mag : mag);
    }
    perturbed_ = true;
}

void DualSimplex::remove_perturbation()
{
    work_cost_ = cost_;
    perturbed_ = false;
}

Status DualSimplex::solve()
{
    const long limit = opt_.max_iterations >= 0 ? opt_.max_iterations : 50L * (n_ + m_) + 10000L;
    iterations_ = 0;
    if (!factor_valid_ && !refactor()) {
        reset_slack_basis();
        if (!refactor()) {
            return status_ = Status::NumericalFailure;
        }
    }
    work_cost_ = cost_;
    perturbed_ = false;
    if (opt_.perturb_costs) {
        compute_dual();
        park_nonbasic();
        apply_perturbation();
    }
    compute_dual();
    park_nonbasic();
    compute_primal();

    for (int round = 0; round < 4; ++round) {
        const Status s = iterate();
        if (iterations_ > limit) {
            return status_ = Status::IterationLimit;
        }
        if (s != Status::Optimal || !perturbed_) {
            return status_ = s;
        }
        remove_perturbation();
        if (!refactor()) {
            return status_ = Status::NumericalFailure;
        }
        compute_dual();
        park_nonbasic();
        compute_primal();
    }
    return status_ = iterate();
}

Status DualSimplex::iterate()
{
    const long limit = opt_.max_iterations >= 0 ? opt_.max_iterations : 50L * (n_ + m_) + 10000L;
    const auto total = n_ + m_;
    Eigen::VectorXd rho(m_);
    Eigen::VectorXd tau(m_);
    Eigen::VectorXd alpha_q(m_);
    Eigen::VectorXd work(m_);
    std::vector<double> row_alpha(static_cast<std::size_t>(total), 0.0);
    std::vector<char> mark(static_cast<std::size_t>(total), 0);
    std::vector<int> touched;
    touched.reserve(static_cast<std::size_t>(total));

    struct Candidate {
        int var;
        double ratio;
        double harris;
        double abs_alpha;
    };
    std::vector<Candidate> cands;
    std::vector<double> suffix_min;
    bool retried = false;

    while (true) {
        if (iterations_ > limit) {
            return Status::IterationLimit;
        }
        if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
            if (!refactor()) {
                reset_slack_basis();
                if (!refactor()) {
                    return Status::NumericalFailure;
                }
            }
            compute_dual();
            park_nonbasic(kDriftShift);
            compute_primal();
        }

        // Leaving row: largest squared infeasibility over its steepest-edge weight.
        int r = -1;
        double best = 0.0;
        double delta = 0.0;
        for (int p = 0; p < m_; ++p) {
            const auto v = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
            double infeas = 0.0;
            if (x_[v] < lo_[v] - opt_.primal_tol) {
                infeas = x_[v] - lo_[v];
            } else if (x_[v] > hi_[v] + opt_.primal_tol) {
                infeas = x_[v] - hi_[v];
            } else {
                continue;
            }
            const double score = infeas * infeas / weight_[static_cast<std::size_t>(p)];
            if (score > best) {
                best = score;
                r = p;
                delta = infeas;
            }
        }
        if (r < 0) {
            if (!etas_.empty()) {
                if (!refactor()) {
                    return Status::NumericalFailure;
                }
                compute_dual();
                park_nonbasic(kDriftShift);
                compute_primal();
                continue;
            }
            return Status::Optimal;
        }

        const int leaving = head_[static_cast<std::size_t>(r)];
        const double sigma = delta > 0.0 ? 1.0 : -1.0;  // +1: leaving variable decreases to its upper bound

        rho.setZero();
        rho(r) = 1.0;
        btran(rho);

        // Pivot row over nonbasic variables.
        for (int j : touched) {
            row_alpha[static_cast<std::size_t>(j)] = 0.0;
            mark[static_cast<std::size_t>(j)] = 0;
        }
        touched.clear();
        auto touch = [&](std::size_t j) {
            if (!mark[j]) {
                mark[j] = 1;
                touched.push_back(static_cast<int>(j));
            }
        };
        for (int i = 0; i < m_; ++i) {
            const double ri = rho(i);
            if (std::abs(ri) < 1e-13) {
                continue;
            }
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a_rows_, i); it; ++it) {
                const auto j = static_cast<std::size_t>(it.col());
                touch(j);
                row_alpha[j] += ri * it.value();
            }
            const auto lv = static_cast<std::size_t>(n_ + i);
            touch(lv);
            row_alpha[lv] -= ri;
        }

        cands.clear();
        for (int j : touched) {
            const auto jj = static_cast<std::size_t>(j);
            if (state_[jj] == kBasic || hi_[jj] <= lo_[jj]) {
                continue;
            }
            const double a = row_alpha[jj];
            const double sa = sigma * a;
            double dt = 0.0;
            if (state_[jj] == kAtLower && sa > opt_.pivot_tol) {
                dt = d_[jj];
            } else if (state_[jj] == kAtUpper && sa < -opt_.pivot_tol) {
                dt = -d_[jj];
            } else {
                continue;
            }
            const double aa = std::abs(a);
            cands.push_back({j, std::max(dt, 0.0) / aa, (std::max(dt, 0.0) + opt_.dual_tol) / aa, aa});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.ratio < b.ratio || (a.ratio == b.ratio && a.var < b.var);
        });
        suffix_min.assign(cands.size() + 1, kInf);
        for (std::size_t k = cands.size(); k-- > 0;) {
            suffix_min[k] = std::min(suffix_min[k + 1], cands[k].harris);
        }

        // Bound-flipping ratio test with Harris groups.
        double slope = std::abs(delta);
        std::size_t idx = 0;
        int entering = -1;
        std::size_t flip_end = 0;
        while (idx < cands.size()) {
            const double bound = suffix_min[idx];
            std::size_t end = idx;
            double gain = 0.0;
            while (end < cands.size() && cands[end].ratio <= bound) {
                const auto jj = static_cast<std::size_t>(cands[end].var);
                gain += cands[end].abs_alpha * (hi_[jj] - lo_[jj]);
                ++end;
            }
            if (end == idx) {
                end = idx + 1;
                const auto jj = static_cast<std::size_t>(cands[idx].var);
                gain = cands[idx].abs_alpha * (hi_[jj] - lo_[jj]);
            }
            if (slope - gain > opt_.primal_tol) {
                slope -= gain;
                idx = end;
                flip_end = end;
                continue;
            }
            double best_alpha = -1.0;
            for (std::size_t k = idx; k < end; ++k) {
                if (cands[k].abs_alpha > best_alpha) {
                    best_alpha = cands[k].abs_alpha;
                    entering = cands[k].var;
                }
            }
            break;
        }

        if (entering < 0) {
            if (!retried) {
                retried = true;
                if (!refactor()) {
                    return Status::NumericalFailure;
                }
                compute_dual();
                park_nonbasic(kDriftShift);
                compute_primal();
                continue;
            }
            return Status::Infeasible;
        }
        retried = false;

        // Flip the passed boxed candidates.
        if (flip_end > 0) {
            work.setZero();
            for (std::size_t k = 0; k < flip_end; ++k) {
                const int j = cands[k].var;
                const auto jj = static_cast<std::size_t>(j);
                const double target = state_[jj] == kAtLower ? hi_[jj] : lo_[jj];
                add_column_to(j, target - x_[jj], work);
                x_[jj] = target;
                state_[jj] = state_[jj] == kAtLower ? kAtUpper : kAtLower;
            }
            ftran(work);
            for (int p = 0; p < m_; ++p) {
                x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= work(p);
            }
        }

        column(entering, alpha_q);
        ftran(alpha_q);
        const double pivot = alpha_q(r);
        const double pivot_row = row_alpha[static_cast<std::size_t>(entering)];
        if (std::abs(pivot) < 1e-11 ||
            std::abs(pivot - pivot_row) > 1e-7 * (1.0 + std::abs(pivot))) {
            if (!etas_.empty()) {
                if (!refactor()) {
                    return Status::NumericalFailure;
                }
                compute_dual();
                park_nonbasic(kDriftShift);
                compute_primal();
                continue;
            }
            if (std::abs(pivot) < 1e-11) {
                return Status::NumericalFailure;
            }
        }

        // Dual-steepest-edge reference vector.
        tau = rho;
        ftran(tau);

        // Dual step.
        const auto eq = static_cast<std::size_t>(entering);
        if ((state_[eq] == kAtLower && d_[eq] < 0.0) || (state_[eq] == kAtUpper && d_[eq] > 0.0)) {
            work_cost_[eq] -= d_[eq];
            d_[eq] = 0.0;
            perturbed_ = true;
        }
        const double t = d_[eq] / pivot;
        if (t != 0.0) {
            for (int j : touched) {
                const auto jj = static_cast<std::size_t>(j);
                if (state_[jj] != kBasic) {
                    d_[jj] -= t * row_alpha[jj];
                }
            }
        }
        d_[static_cast<std::size_t>(leaving)] = -t;
        d_[eq] = 0.0;

        // Primal step.
        const auto lv = static_cast<std::size_t>(leaving);
        const double target = sigma > 0.0 ? hi_[lv] : lo_[lv];
        const double theta = (x_[lv] - target) / pivot;
        x_[eq] += theta;
        for (int p = 0; p < m_; ++p) {
            x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= theta * alpha_q(p);
        }
        x_[lv] = target;

        // Steepest-edge weights.
        const double wr = weight_[static_cast<std::size_t>(r)];
        for (int p = 0; p < m_; ++p) {
            if (p == r || alpha_q(p) == 0.0) {
                continue;
            }
            const double ratio = alpha_q(p) / pivot;
            auto& w = weight_[static_cast<std::size_t>(p)];
            w = std::max(w - 2.0 * ratio * tau(p) + ratio * ratio * wr, 1e-6);
        }
        weight_[static_cast<std::size_t>(r)] = std::max(wr / (pivot * pivot), 1e-6);

        // Basis change.
        head_[static_cast<std::size_t>(r)] = entering;
        position_[eq] = r;
        position_[lv] = -1;
        state_[eq] = kBasic;
        state_[lv] = (sigma > 0.0 && hi_[lv] > lo_[lv]) ? kAtUpper : kAtLower;

        Eta eta{r, pivot, {}};
        for (int p = 0; p < m_; ++p) {
            if (p != r && std::abs(alpha_q(p)) > 1e-14) {
                eta.entries.emplace_back(p, alpha_q(p));
            }
        }
        etas_.push_back(std::move(eta));
        ++iterations_;
    }
}

double DualSimplex::objective() const
{
    double v = 0.0;
    for (int j = 0; j < n_; ++j) {
        v += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    }
    return v;
}

Eigen::VectorXd DualSimplex::primal() const
{
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) {
        x(j) = x_[static_cast<std::size_t>(j)];
    }
    return x;
}

Result solve(const LinearProgram& lp, Options options)
{
    DualSimplex simplex(lp, options);
    Result result;
    result.status = simplex.solve();
    result.iterations = simplex.iterations();
    if (result.status == Status::Optimal) {
        result.x = simplex.primal();
        result.objective = simplex.objective();
    }
    return result;
}

}  // namespace zidroop::lp
