#include "zidroop/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace zidroop {

OracleLp build_oracle_lp(const DroopProblem& problem)
{
    const int n = problem.size();
    OracleLp o;
    for (int i = 0; i < n; ++i) {
        o.x.push_back(o.lp.add_column(problem.x_min(i), problem.x_upper(i), 0.0, "x_" + std::to_string(i + 1)));
    }
    std::vector<std::pair<int, double>> sum_row;
    for (int i = 0; i < n; ++i) {
        sum_row.emplace_back(o.x[static_cast<std::size_t>(i)], 1.0);
    }
    o.lp.add_row(problem.alpha, problem.alpha, sum_row, "stiffness");

    for (int k = 0; k < n; ++k) {
        const double pk = problem.p_ref(k);
        for (int i = 0; i < n; ++i) {
            if (i == k) {
                continue;
            }
            const double pi = problem.p_ref(i);
            const double pm = problem.p_max(i);
            const int xi = o.x[static_cast<std::size_t>(i)];
            const int xk = o.x[static_cast<std::size_t>(k)];
            const std::string tag = std::to_string(k + 1) + "_" + std::to_string(i + 1);
            o.lp.add_row(-lp::kInf, (pm - pi) * problem.alpha, {{xi, pk}, {xk, pm - pi}}, "upper_" + tag);
            o.lp.add_row(-lp::kInf, (pm + pi) * problem.alpha, {{xi, -pk}, {xk, pm + pi}}, "lower_" + tag);
        }
    }

    std::vector<std::pair<int, double>> spread;
    for (int i = 0; i < n; ++i) {
        for (int c = i + 1; c < n; ++c) {
            const int t = o.lp.add_column(0.0, problem.alpha, 1.0,
                                          "t_" + std::to_string(i + 1) + "_" + std::to_string(c + 1));
            o.t.push_back(t);
            spread.emplace_back(t, 1.0);
            const int xi = o.x[static_cast<std::size_t>(i)];
            const int xc = o.x[static_cast<std::size_t>(c)];
            o.lp.add_row(0.0, lp::kInf, {{t, 1.0}, {xi, -1.0}, {xc, 1.0}});
            o.lp.add_row(0.0, lp::kInf, {{t, 1.0}, {xi, 1.0}, {xc, -1.0}});
        }
    }
    o.spread_row = o.lp.add_row(-lp::kInf, lp::kInf, spread, "spread");
    return o;
}

DroopSolution solve_exact_oracle(const DroopProblem& problem, const OracleOptions& options)
{
    const OracleLp o = build_oracle_lp(problem);
    lp::DualSimplex simplex(o.lp);
    DroopSolution sol;
    sol.backend = "oracle";
    lp::Status st = simplex.solve();
    sol.lp_iterations += simplex.iterations();
    if (st == lp::Status::Infeasible) {
        sol.status = DroopStatus::Infeasible;
        return sol;
    }
    if (st != lp::Status::Optimal) {
        throw std::runtime_error(std::string("oracle LP failed: ") + lp::to_string(st));
    }

    const double best = simplex.objective();
    if (best <= 1e-9 * problem.alpha) {
        // zero spread means all gains equal, which pins x = alpha / n
        const Eigen::VectorXd equal = Eigen::VectorXd::Constant(problem.size(), problem.alpha / problem.size());
        if ((equal.array() >= problem.x_min.array()).all() &&
            exact_residual(problem, equal) <= std::max(1e-7, 1e-9 * problem.alpha)) {
            sol.assignment = DroopAssignment(equal);
            sol.objective = 0.0;
            sol.residual = exact_residual(problem, equal);
            sol.status = DroopStatus::Optimal;
            return sol;
        }
    }
    if (options.lexicographic) {
        simplex.set_row_bounds(o.spread_row, 0.0, best + options.tie_tolerance * (1.0 + std::abs(best)));
        for (int t : o.t) {
            simplex.set_cost(t, 0.0);
        }
        for (std::size_t i = 0; i < o.x.size(); ++i) {
            const int col = o.x[i];
            simplex.set_cost(col, 1.0);
            st = simplex.solve();
            sol.lp_iterations += simplex.iterations();
            if (st != lp::Status::Optimal) {
                throw std::runtime_error(std::string("oracle tie-break pass failed: ") + lp::to_string(st));
            }
            const double v = simplex.primal()(col);
            const double lo = simplex.column_lower(col);
            simplex.set_column_bounds(col, lo, std::max(lo, v + 1e-10 * (1.0 + std::abs(v))));
            simplex.set_cost(col, 0.0);
        }
    }

    Eigen::VectorXd x(problem.size());
    const Eigen::VectorXd primal = simplex.primal();
    for (int i = 0; i < problem.size(); ++i) {
        x(i) = std::max(primal(o.x[static_cast<std::size_t>(i)]), problem.x_min(i));
    }
    // restore the exact stiffness lost to LP round-off
    x *= problem.alpha / x.sum();
    sol.assignment = DroopAssignment(x);
    sol.objective = pairwise_spread(x);
    sol.residual = exact_residual(problem, x);
    sol.status = sol.residual <= std::max(1e-7, 1e-9 * problem.alpha) ? DroopStatus::Optimal
                                                                      : DroopStatus::PrecisionLimited;
    return sol;
}

}  // namespace zidroop
