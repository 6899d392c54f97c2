#include "zidroop/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

namespace zidroop {

namespace {

using Units = long long;
using Mask = std::uint16_t;

constexpr Mask kAllDigits = 0x3FF;

int lowest_digit(Mask m) { return __builtin_ctz(m); }
int highest_digit(Mask m) { return 31 - __builtin_clz(static_cast<unsigned>(m)); }
bool single_digit(Mask m) { return (m & (m - 1)) == 0; }

Units floor_units(double v) { return static_cast<Units>(std::floor(v + 1e-7)); }
Units ceil_units(double v) { return static_cast<Units>(std::ceil(v - 1e-7)); }

struct Node {
    std::vector<Mask> masks;
    std::vector<Units> lo;  // x_i interval in grid units
    std::vector<Units> hi;
    std::shared_ptr<const lp::Basis> basis;
    long parent = -1;
    double bound = -lp::kInf;
    int depth = 0;
};

/// LP relaxation: the model rows plus, optionally, the post-fault limits in
/// their exact linear form, which every integer-feasible point satisfies.
lp::LinearProgram relaxation(const MilpModel& model, const DroopProblem& problem, const BnbOptions& options)
{
    lp::LinearProgram lp = model.lp;
    if (!options.valid_inequalities) {
        return lp;
    }
    const int n = model.n;
    for (int k = 0; k < n; ++k) {
        const double pk = problem.p_ref(k);
        const int xk = model.x[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            if (i == k) {
                continue;
            }
            const int xi = model.x[static_cast<std::size_t>(i)];
            const double pi = problem.p_ref(i);
            const double pm = problem.p_max(i);
            lp.add_row(-lp::kInf, (pm - pi) * problem.alpha, {{xi, pk}, {xk, pm - pi}});
            lp.add_row(-lp::kInf, (pm + pi) * problem.alpha, {{xi, -pk}, {xk, pm + pi}});
        }
    }
    return lp;
}

class Search {
public:
    Search(const MilpModel& model, const DroopProblem& problem, const BnbOptions& options)
        : m_(model), p_(problem), opt_(options), simplex_(relaxation(model, problem, options)), n_(model.n)
    {
        unit_ = pow10(m_.psi);
        alpha_u_ = std::llround(p_.alpha / unit_);
        on_grid_ = std::abs(static_cast<double>(alpha_u_) * unit_ - p_.alpha) <= 1e-9 * (1.0 + p_.alpha);
        for (int p = 0; p <= std::max(m_.eta_b, m_.eta_d) - m_.psi; ++p) {
            weight_.push_back(p == 0 ? 1 : weight_.back() * 10);
        }
        for (int i = 0; i < n_; ++i) {
            root_lo_.push_back(ceil_units(p_.x_min(i) / unit_));
            root_hi_.push_back(floor_units(p_.x_upper(i) / unit_));
        }
        for (int k = 0; k < n_; ++k) {
            z_root_hi_.push_back(std::vector<double>(static_cast<std::size_t>(n_), 0.0));
            for (int i = 0; i < n_; ++i) {
                if (i != k) {
                    z_root_hi_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                        m_.lp.col_hi[static_cast<std::size_t>(col_z(k, i))];
                }
            }
        }
    }

    DroopSolution run(BnbStats& stats);

private:
    int col_z(int k, int i) const { return m_.z[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }
    int family(DigitFamily::Kind kind, int owner, int place) const { return m_.family_index(kind, owner, place); }

    bool propagate(std::vector<Mask>& masks, const std::vector<Units>& lo, const std::vector<Units>& hi);
    bool digits_to_interval(std::vector<Mask>& masks, DigitFamily::Kind kind, int owner, int top, Units& lo, Units& hi,
                            bool& changed) const;
    void apply_bounds(const std::vector<Mask>& masks);
    bool integral(const Eigen::VectorXd& primal) const;
    int choose_family(const std::vector<Mask>& masks, const Eigen::VectorXd& primal) const;
    void consider(const std::vector<Units>& x_units, bool from_lp);
    void rounding(const Eigen::VectorXd& primal);
    /// Spreads of grid points are multiples of 10^psi, so a node whose bound
    /// lies within one grid step below the incumbent cannot improve it.
    [[nodiscard]] double gap() const
    {
        const double g = std::max(opt_.abs_gap, opt_.rel_gap * std::abs(incumbent_obj_));
        return opt_.integral_objective ? std::max(g, unit_ * (1.0 - 1e-6)) : g;
    }

    const MilpModel& m_;
    const DroopProblem& p_;
    BnbOptions opt_;
    lp::DualSimplex simplex_;
    int n_;
    double unit_ = 1.0;
    Units alpha_u_ = 0;
    bool on_grid_ = true;
    std::vector<Units> weight_;
    std::vector<Units> root_lo_;
    std::vector<Units> root_hi_;
    std::vector<std::vector<double>> z_root_hi_;

    // node-local intervals (grid units) after propagation
    std::vector<Units> xlo_;
    std::vector<Units> xhi_;

    bool have_incumbent_ = false;
    double incumbent_obj_ = lp::kInf;
    std::vector<Units> incumbent_;
    long updates_ = 0;
};

bool Search::digits_to_interval(std::vector<Mask>& masks, DigitFamily::Kind kind, int owner, int top, Units& lo,
                                Units& hi, bool& changed) const
{
    // Interval implied by the digit subsets, then digits that cannot reach
    // [lo, hi] whatever the other places hold are removed.
    for (int pass = 0; pass < 4; ++pass) {
        Units minsum = 0;
        Units maxsum = 0;
        for (int pl = m_.psi; pl <= top; ++pl) {
            const Mask mk = masks[static_cast<std::size_t>(family(kind, owner, pl))];
            if (mk == 0) {
                return false;
            }
            const Units w = weight_[static_cast<std::size_t>(pl - m_.psi)];
            minsum += lowest_digit(mk) * w;
            maxsum += highest_digit(mk) * w;
        }
        lo = std::max(lo, minsum);
        hi = std::min(hi, maxsum);
        if (lo > hi) {
            return false;
        }
        bool removed = false;
        for (int pl = m_.psi; pl <= top; ++pl) {
            auto& mk = masks[static_cast<std::size_t>(family(kind, owner, pl))];
            const Units w = weight_[static_cast<std::size_t>(pl - m_.psi)];
            const Units rest_min = minsum - lowest_digit(mk) * w;
            const Units rest_max = maxsum - highest_digit(mk) * w;
            for (int a = 0; a < 10; ++a) {
                if (!(mk & (1u << a))) {
                    continue;
                }
                if (rest_max + a * w < lo || rest_min + a * w > hi) {
                    mk = static_cast<Mask>(mk & ~(1u << a));
                    removed = true;
                }
            }
            if (mk == 0) {
                return false;
            }
        }
        if (!removed) {
            return true;
        }
        changed = true;
    }
    return true;
}

bool Search::propagate(std::vector<Mask>& masks, const std::vector<Units>& lo, const std::vector<Units>& hi)
{
    xlo_ = lo;
    xhi_ = hi;
    std::vector<Units> alo(static_cast<std::size_t>(n_), 0);
    std::vector<Units> ahi(static_cast<std::size_t>(n_), alpha_u_);
    for (int round = 0; round < 30; ++round) {
        bool changed = false;
        const auto before_lo = xlo_;
        const auto before_hi = xhi_;
        for (int i = 0; i < n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (!digits_to_interval(masks, DigitFamily::Kind::X, i, m_.eta_d, xlo_[ii], xhi_[ii], changed)) {
                return false;
            }
            alo[ii] = std::max(alo[ii], alpha_u_ - xhi_[ii]);
            ahi[ii] = std::min(ahi[ii], alpha_u_ - xlo_[ii]);
            if (!digits_to_interval(masks, DigitFamily::Kind::Alpha, i, m_.eta_b, alo[ii], ahi[ii], changed)) {
                return false;
            }
            xlo_[ii] = std::max(xlo_[ii], alpha_u_ - ahi[ii]);
            xhi_[ii] = std::min(xhi_[ii], alpha_u_ - alo[ii]);
        }
        // stiffness: sum x = alpha
        const Units sum_lo = std::accumulate(xlo_.begin(), xlo_.end(), Units{0});
        const Units sum_hi = std::accumulate(xhi_.begin(), xhi_.end(), Units{0});
        if (sum_lo > alpha_u_ || sum_hi < alpha_u_) {
            return false;
        }
        for (int i = 0; i < n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            xlo_[ii] = std::max(xlo_[ii], alpha_u_ - (sum_hi - xhi_[ii]));
            xhi_[ii] = std::min(xhi_[ii], alpha_u_ - (sum_lo - xlo_[ii]));
        }
        // post-fault limits, in the linear form valid for every feasible point:
        //  P_k x_i + (pm_i - P_i) x_k <= (pm_i - P_i) alpha, and the mirror row
        for (int k = 0; k < n_; ++k) {
            const double pk = p_.p_ref(k);
            const auto kk = static_cast<std::size_t>(k);
            for (int i = 0; i < n_; ++i) {
                if (i == k) {
                    continue;
                }
                const auto ii = static_cast<std::size_t>(i);
                const double pi = p_.p_ref(i);
                const double pm = p_.p_max(i);
                const double au = static_cast<double>(alpha_u_);
                for (const double s : {1.0, -1.0}) {
                    const double a = s * pk;
                    const double b = pm - s * pi;
                    const double r = b * au;
                    // x_k range from the row (b >= 0)
                    const double min_ax = std::min(a * static_cast<double>(xlo_[ii]), a * static_cast<double>(xhi_[ii]));
                    if (b > 1e-12) {
                        xhi_[kk] = std::min(xhi_[kk], floor_units((r - min_ax) / b));
                    } else if (r - min_ax < -1e-9 * (1.0 + std::abs(r))) {
                        return false;
                    }
                    const double min_bx = b * static_cast<double>(xlo_[kk]);
                    if (a > 1e-12) {
                        xhi_[ii] = std::min(xhi_[ii], floor_units((r - min_bx) / a));
                    } else if (a < -1e-12) {
                        xlo_[ii] = std::max(xlo_[ii], ceil_units((r - min_bx) / a));
                    }
                }
            }
        }
        for (int i = 0; i < n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (xlo_[ii] > xhi_[ii]) {
                return false;
            }
        }
        if (!changed && xlo_ == before_lo && xhi_ == before_hi) {
            break;
        }
    }
    return true;
}

void Search::apply_bounds(const std::vector<Mask>& masks)
{
    const double alpha = p_.alpha;
    std::vector<double> lo(static_cast<std::size_t>(n_));
    std::vector<double> hi(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        lo[ii] = static_cast<double>(xlo_[ii]) * unit_;
        hi[ii] = static_cast<double>(xhi_[ii]) * unit_;
        simplex_.set_column_bounds(m_.x[ii], lo[ii], hi[ii]);
        simplex_.set_column_bounds(m_.alpha_k[ii], alpha - hi[ii], alpha - lo[ii]);
        const double s_lo = 1.0 / (alpha - lo[ii]);
        const double s_hi = 1.0 / (alpha - hi[ii]);
        simplex_.set_column_bounds(m_.sigma[ii], s_lo * (1.0 - 1e-12), s_hi * (1.0 + 1e-12));
    }
    const double sum_lo = std::accumulate(lo.begin(), lo.end(), 0.0);
    const double sum_hi = std::accumulate(hi.begin(), hi.end(), 0.0);
    for (int k = 0; k < n_; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        for (int i = 0; i < n_; ++i) {
            if (i == k) {
                continue;
            }
            const auto ii = static_cast<std::size_t>(i);
            const double others_lo = sum_lo - lo[ii] - lo[kk];
            const double others_hi = sum_hi - hi[ii] - hi[kk];
            double zl = std::max(lo[ii] / (alpha - lo[kk]), lo[ii] / (lo[ii] + others_hi));
            double zh = std::min(hi[ii] / (alpha - hi[kk]), hi[ii] / (hi[ii] + others_lo));
            zl = std::max(0.0, zl * (1.0 - 1e-12));
            zh = std::min(z_root_hi_[kk][ii], zh * (1.0 + 1e-12));
            simplex_.set_column_bounds(col_z(k, i), zl, std::max(zl, zh));
        }
    }
    for (std::size_t f = 0; f < m_.families.size(); ++f) {
        const auto& fam = m_.families[f];
        const Mask mk = masks[f];
        const bool fixed = single_digit(mk);
        for (int a = 0; a < 10; ++a) {
            const bool allowed = (mk >> a) & 1u;
            const double up = allowed ? 1.0 : 0.0;
            simplex_.set_column_bounds(fam.y[static_cast<std::size_t>(a)], fixed && allowed ? 1.0 : 0.0, up);
        }
    }
}

bool Search::integral(const Eigen::VectorXd& primal) const
{
    for (int col : m_.binaries) {
        const double v = primal(col);
        if (v > opt_.integrality_tol && v < 1.0 - opt_.integrality_tol) {
            return false;
        }
    }
    return true;
}

int Search::choose_family(const std::vector<Mask>& masks, const Eigen::VectorXd& primal) const
{
    // Most fractional family; ties go to the higher place, then the lower index.
    int best = -1;
    double best_frac = opt_.integrality_tol;
    int best_place = 0;
    for (std::size_t f = 0; f < m_.families.size(); ++f) {
        if (single_digit(masks[f])) {
            continue;
        }
        const auto& fam = m_.families[f];
        double top = 0.0;
        for (int a = 0; a < 10; ++a) {
            top = std::max(top, primal(fam.y[static_cast<std::size_t>(a)]));
        }
        const double frac = 1.0 - top;
        if (frac > best_frac + 1e-12 || (std::abs(frac - best_frac) <= 1e-12 && best >= 0 && fam.place > best_place)) {
            best = static_cast<int>(f);
            best_frac = frac;
            best_place = fam.place;
        }
    }
    return best;
}

void Search::consider(const std::vector<Units>& x_units, bool from_lp)
{
    if (std::accumulate(x_units.begin(), x_units.end(), Units{0}) != alpha_u_) {
        return;
    }
    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (x_units[ii] < root_lo_[ii] || x_units[ii] > root_hi_[ii]) {
            return;
        }
        x(i) = static_cast<double>(x_units[ii]) * unit_;
    }
    const double residual = exact_residual(p_, x);
    // heuristic points must be genuinely feasible; LP-integral points are MILP-feasible by construction
    if (!from_lp && residual > 1e-12) {
        return;
    }
    const double obj = pairwise_spread(x);
    const bool better = !have_incumbent_ || obj < incumbent_obj_ - gap() ||
                        (obj <= incumbent_obj_ + gap() && x_units < incumbent_);
    if (better) {
        have_incumbent_ = true;
        incumbent_obj_ = obj;
        incumbent_ = x_units;
        ++updates_;
    }
}

void Search::rounding(const Eigen::VectorXd& primal)
{
    std::vector<Units> xu(static_cast<std::size_t>(n_));
    std::vector<double> rem(static_cast<std::size_t>(n_));
    Units sum = 0;
    for (int i = 0; i < n_; ++i) {
        const double v = primal(m_.x[static_cast<std::size_t>(i)]) / unit_;
        xu[static_cast<std::size_t>(i)] = std::llround(v);
        rem[static_cast<std::size_t>(i)] = v - static_cast<double>(xu[static_cast<std::size_t>(i)]);
        sum += xu[static_cast<std::size_t>(i)];
    }
    Units diff = alpha_u_ - sum;
    while (diff != 0) {
        int pick = -1;
        for (int i = 0; i < n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const bool can = diff > 0 ? xu[ii] < root_hi_[ii] : xu[ii] > root_lo_[ii];
            if (!can) {
                continue;
            }
            if (pick < 0 || (diff > 0 ? rem[ii] > rem[static_cast<std::size_t>(pick)]
                                      : rem[ii] < rem[static_cast<std::size_t>(pick)])) {
                pick = i;
            }
        }
        if (pick < 0) {
            return;
        }
        const auto pp = static_cast<std::size_t>(pick);
        const Units step = diff > 0 ? 1 : -1;
        xu[pp] += step;
        rem[pp] -= static_cast<double>(step);
        diff -= step;
    }
    consider(xu, false);
}

DroopSolution Search::run(BnbStats& stats)
{
    const auto start = std::chrono::steady_clock::now();
    DroopSolution sol;
    sol.backend = "bnb";
    if (!on_grid_) {
        sol.status = DroopStatus::Infeasible;
        return sol;
    }

    Node root;
    root.masks.resize(m_.families.size());
    for (std::size_t f = 0; f < m_.families.size(); ++f) {
        Mask mk = 0;
        for (int a = 0; a < 10; ++a) {
            if (m_.families[f].y_hi[static_cast<std::size_t>(a)] > 0.5) {
                mk = static_cast<Mask>(mk | (1u << a));
            }
        }
        root.masks[f] = mk & kAllDigits;
    }
    root.lo = root_lo_;
    root.hi = root_hi_;

    std::vector<Node> stack;
    stack.push_back(std::move(root));
    long last_solved = -2;
    long counter = 0;
    std::shared_ptr<const lp::Basis> root_basis;

    while (!stack.empty()) {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (stats.nodes >= opt_.node_limit || elapsed > opt_.time_limit) {
            stats.limit_hit = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (have_incumbent_ && node.bound >= incumbent_obj_ - gap()) {
            ++stats.pruned_by_bound;
            continue;
        }
        const long id = counter++;
        ++stats.nodes;
        stats.max_depth = std::max(stats.max_depth, node.depth);

        if (!propagate(node.masks, node.lo, node.hi)) {
            ++stats.pruned_infeasible;
            continue;
        }
        apply_bounds(node.masks);
        if (node.basis && node.parent != last_solved) {
            simplex_.set_basis(*node.basis);
        }
        lp::Status st = simplex_.solve();
        stats.lp_iterations += simplex_.iterations();
        if (st != lp::Status::Optimal && st != lp::Status::Infeasible && root_basis) {
            simplex_.set_basis(*root_basis);
            st = simplex_.solve();
            stats.lp_iterations += simplex_.iterations();
        }
        last_solved = id;
        if (st == lp::Status::Infeasible) {
            ++stats.pruned_infeasible;
            continue;
        }
        if (st != lp::Status::Optimal) {
            throw std::runtime_error(std::string("branch-and-bound LP failed: ") + lp::to_string(st));
        }
        const Eigen::VectorXd primal = simplex_.primal();
        const double bound = std::max(node.bound, simplex_.objective());
        auto basis = std::make_shared<const lp::Basis>(simplex_.basis());
        if (!root_basis) {
            root_basis = basis;
        }
        if (have_incumbent_ && bound >= incumbent_obj_ - gap()) {
            ++stats.pruned_by_bound;
            continue;
        }

        if (integral(primal)) {
            std::vector<Units> xu(static_cast<std::size_t>(n_), 0);
            for (int i = 0; i < n_; ++i) {
                for (int d = m_.psi; d <= m_.eta_d; ++d) {
                    const auto& fam = m_.families[static_cast<std::size_t>(family(DigitFamily::Kind::X, i, d))];
                    for (int a = 0; a < 10; ++a) {
                        if (primal(fam.y[static_cast<std::size_t>(a)]) > 0.5) {
                            xu[static_cast<std::size_t>(i)] += a * weight_[static_cast<std::size_t>(d - m_.psi)];
                        }
                    }
                }
            }
            consider(xu, true);
            continue;
        }
        if (opt_.rounding_heuristic) {
            rounding(primal);
            if (have_incumbent_ && bound >= incumbent_obj_ - gap()) {
                ++stats.pruned_by_bound;
                continue;
            }
        }

        // Branch on the grid value of the most fractional x_i; once every x_i
        // sits on the grid, split the most fractional digit family instead.
        int bx = -1;
        double bfrac = 1e-6;
        double bval = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double v = primal(m_.x[static_cast<std::size_t>(i)]) / unit_;
            const double frac = std::abs(v - std::round(v));
            if (frac > bfrac) {
                bx = i;
                bfrac = frac;
                bval = v;
            }
        }
        auto push_pair = [&](Node&& first, Node&& second) {
            stack.push_back(std::move(second));
            stack.push_back(std::move(first));
        };
        // propagate() tightened the intervals; children inherit them
        node.lo = xlo_;
        node.hi = xhi_;
        if (bx >= 0) {
            const auto bi = static_cast<std::size_t>(bx);
            Node down{node.masks, node.lo, node.hi, basis, id, bound, node.depth + 1};
            down.hi[bi] = static_cast<Units>(std::floor(bval));
            Node up{std::move(node.masks), std::move(node.lo), std::move(node.hi), basis, id, bound, node.depth + 1};
            up.lo[bi] = static_cast<Units>(std::ceil(bval));
            if (bval - std::floor(bval) <= 0.5) {
                push_pair(std::move(down), std::move(up));
            } else {
                push_pair(std::move(up), std::move(down));
            }
            continue;
        }

        const int f = choose_family(node.masks, primal);
        if (f < 0) {
            continue;
        }
        const auto& fam = m_.families[static_cast<std::size_t>(f)];
        const Mask mk = node.masks[static_cast<std::size_t>(f)];
        double mean = 0.0;
        double mass = 0.0;
        for (int a = 0; a < 10; ++a) {
            const double y = std::max(0.0, primal(fam.y[static_cast<std::size_t>(a)]));
            mean += a * y;
            mass += y;
        }
        mean = mass > 0.0 ? mean / mass : 0.5 * (lowest_digit(mk) + highest_digit(mk));
        int cut = static_cast<int>(std::floor(mean));
        cut = std::clamp(cut, lowest_digit(mk), highest_digit(mk) - 1);
        const Mask low_mask = static_cast<Mask>(mk & ((1u << (cut + 1)) - 1u));
        const Mask high_mask = static_cast<Mask>(mk & ~low_mask);
        double low_mass = 0.0;
        for (int a = 0; a <= cut; ++a) {
            low_mass += std::max(0.0, primal(fam.y[static_cast<std::size_t>(a)]));
        }
        Node low{node.masks, node.lo, node.hi, basis, id, bound, node.depth + 1};
        low.masks[static_cast<std::size_t>(f)] = low_mask;
        Node high{std::move(node.masks), std::move(node.lo), std::move(node.hi), basis, id, bound, node.depth + 1};
        high.masks[static_cast<std::size_t>(f)] = high_mask;
        if (low_mass >= 0.5 * mass) {
            push_pair(std::move(low), std::move(high));
        } else {
            push_pair(std::move(high), std::move(low));
        }
    }

    stats.incumbent_updates = updates_;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sol.nodes = stats.nodes;
    sol.lp_iterations = stats.lp_iterations;
    if (!have_incumbent_) {
        sol.status = stats.limit_hit ? DroopStatus::LimitReached : DroopStatus::Infeasible;
        return sol;
    }
    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) {
        x(i) = static_cast<double>(incumbent_[static_cast<std::size_t>(i)]) * unit_;
    }
    sol.assignment = DroopAssignment(x);
    sol.objective = pairwise_spread(x);
    sol.residual = exact_residual(p_, x);
    if (stats.limit_hit) {
        sol.status = DroopStatus::LimitReached;
    } else if (sol.residual > residual_tolerance(p_)) {
        sol.status = DroopStatus::PrecisionLimited;
    } else {
        sol.status = DroopStatus::Optimal;
    }
    return sol;
}

}  // namespace

DroopSolution solve_branch_and_bound(const MilpModel& model, const DroopProblem& problem, const BnbOptions& options,
                                     BnbStats* stats)
{
    BnbStats local;
    Search search(model, problem, options);
    DroopSolution sol = search.run(stats ? *stats : local);
    return sol;
}

}  // namespace zidroop
