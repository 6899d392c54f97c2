#include "zidroop/droop_problem.hpp"

#include "zidroop/security.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zidroop {

double DroopProblem::x_upper(int i) const { return alpha - (x_min.sum() - x_min(i)); }

int top_exponent(double upper)
{
    if (!(upper >= 1.0)) {
        return 0;
    }
    int eta = static_cast<int>(std::floor(std::log10(upper)));
    // guard against log10 rounding at exact powers of ten
    while (std::pow(10.0, eta + 1) <= upper) {
        ++eta;
    }
    while (eta > 0 && std::pow(10.0, eta) > upper) {
        --eta;
    }
    return eta;
}

DroopProblem make_problem(double alpha, Eigen::VectorXd x_min, Eigen::VectorXd p_ref, Eigen::VectorXd p_max,
                          int precision)
{
    if (x_min.size() != p_ref.size() || p_max.size() != p_ref.size()) {
        throw InputError("droop problem vectors differ in length");
    }
    if (p_ref.size() < 2) {
        throw InputError("degenerate system: droop problem needs at least two converters");
    }
    if (precision > 0) {
        throw InputError("precision exponent must be <= 0");
    }
    if (!(alpha > x_min.sum())) {
        std::ostringstream msg;
        msg << "stiffness target unreachable: alpha " << alpha << " <= sum of x_min " << x_min.sum();
        throw InputError(msg.str());
    }
    DroopProblem p;
    p.alpha = alpha;
    p.x_min = std::move(x_min);
    p.p_ref = std::move(p_ref);
    p.p_max = std::move(p_max);
    p.precision = precision;
    double upper = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        upper = std::max(upper, p.x_upper(i));
    }
    p.eta_b = p.eta_d = top_exponent(upper);
    for (int i = 0; i < p.size(); ++i) {
        p.ids.push_back("C" + std::to_string(i + 1));
    }
    return p;
}

DroopProblem build_exact_problem(const GridScenario& scenario, double alpha, int precision)
{
    require_valid(scenario);
    DroopProblem p = make_problem(alpha, scenario.x_min(), scenario.p_ref(), scenario.p_max(), precision);
    p.ids.clear();
    for (const auto& c : scenario.converters) {
        p.ids.push_back(c.id);
    }
    return p;
}

double pairwise_spread(const Eigen::VectorXd& x)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (Eigen::Index c = i + 1; c < x.size(); ++c) {
            s += std::abs(x(i) - x(c));
        }
    }
    return s;
}

double exact_residual(const DroopProblem& problem, const Eigen::VectorXd& x)
{
    return std::max(0.0, worst_post_fault_excess(x, problem.p_ref, problem.p_max));
}

double residual_tolerance(const DroopProblem& problem)
{
    return 10.0 * std::pow(10.0, problem.precision) * std::max(problem.p_ref.cwiseAbs().maxCoeff(), 1e-12);
}

const char* to_string(DroopStatus status)
{
    switch (status) {
    case DroopStatus::Optimal:
        return "optimal";
    case DroopStatus::Infeasible:
        return "infeasible";
    case DroopStatus::PrecisionLimited:
        return "precision-limited";
    case DroopStatus::LimitReached:
        return "limit-reached";
    }
    return "unknown";
}

}  // namespace zidroop
