#include "zidroop/security.hpp"

#include "zidroop/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace zidroop {

namespace {

void check_outage(const DroopAssignment& a, const GridScenario& s, std::size_t k)
{
    if (s.size() < 2) {
        throw InputError("degenerate system: outage analysis needs at least two converters");
    }
    if (a.size() != s.size()) {
        throw InputError("assignment dimension does not match the scenario");
    }
    if (k >= s.size()) {
        throw InputError("outage index out of range");
    }
}

}  // namespace

double ssfd(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k)
{
    check_outage(assignment, scenario, k);
    const auto kk = static_cast<Eigen::Index>(k);
    return scenario.converters[k].p_ref / (assignment.alpha() - assignment.x()(kk));
}

double ssfd(const DroopAssignment& assignment, const GridScenario& scenario, const std::string& outage_id)
{
    return ssfd(assignment, scenario, scenario.converter_index(outage_id));
}

double outage_share(const Eigen::VectorXd& x, std::size_t k, std::size_t i)
{
    return x(static_cast<Eigen::Index>(i)) / (x.sum() - x(static_cast<Eigen::Index>(k)));
}

Eigen::VectorXd post_fault_flows(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k)
{
    check_outage(assignment, scenario, k);
    const double remaining = assignment.alpha() - assignment.x()(static_cast<Eigen::Index>(k));
    const double p_k = scenario.converters[k].p_ref;
    Eigen::VectorXd flows(static_cast<Eigen::Index>(scenario.size() - 1));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < scenario.size(); ++i) {
        if (i == k) {
            continue;
        }
        flows(row++) = scenario.converters[i].p_ref + assignment.x()(static_cast<Eigen::Index>(i)) / remaining * p_k;
    }
    return flows;
}

Eigen::VectorXd post_fault_flows(const DroopAssignment& assignment, const GridScenario& scenario,
                                 const std::string& outage_id)
{
    return post_fault_flows(assignment, scenario, scenario.converter_index(outage_id));
}

ContingencyReport analyse_outage(const DroopAssignment& assignment, const GridScenario& scenario, std::size_t k,
                                 double tolerance)
{
    ContingencyReport report;
    report.outage_index = k;
    report.outage_id = scenario.converters.at(k).id;
    report.ssfd_pu = ssfd(assignment, scenario, k);
    report.ssfd_hz = to_hz(report.ssfd_pu, scenario.base);
    report.post_fault_flows = post_fault_flows(assignment, scenario, k);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < scenario.size(); ++i) {
        if (i == k) {
            continue;
        }
        report.converter_indices.push_back(i);
        const double excess = std::abs(report.post_fault_flows(row++)) - scenario.converters[i].p_max;
        if (excess > tolerance) {
            report.violations.push_back({scenario.converters[i].id, excess});
        }
    }
    return report;
}

std::vector<ContingencyReport> screen_all_contingencies(const DroopAssignment& assignment,
                                                        const GridScenario& scenario, double tolerance)
{
    std::vector<ContingencyReport> reports;
    reports.reserve(scenario.size());
    for (std::size_t k = 0; k < scenario.size(); ++k) {
        reports.push_back(analyse_outage(assignment, scenario, k, tolerance));
    }
    return reports;
}

bool is_n1_secure(const std::vector<ContingencyReport>& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](const ContingencyReport& r) { return r.secure(); });
}

double worst_post_fault_excess(const Eigen::VectorXd& x, const Eigen::VectorXd& p_ref, const Eigen::VectorXd& p_max)
{
    const double alpha = x.sum();
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double remaining = alpha - x(k);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (i == k) {
                continue;
            }
            worst = std::max(worst, std::abs(p_ref(i) + x(i) / remaining * p_ref(k)) - p_max(i));
        }
    }
    return worst;
}

void write_contingency_csv(std::ostream& out, const std::vector<ContingencyReport>& reports,
                           const GridScenario& scenario)
{
    const double sb = scenario.base.s_base;
    out << "outage_id,converter_id,p_pre_mw,p_post_mw,limit_mw,violation_mw,ssfd_hz\n";
    for (const auto& r : reports) {
        for (std::size_t row = 0; row < r.converter_indices.size(); ++row) {
            const auto& c = scenario.converters[r.converter_indices[row]];
            const double post = r.post_fault_flows(static_cast<Eigen::Index>(row));
            const double excess = std::abs(post) - c.p_max;
            const double violation = excess > kViolationTolerance ? excess : 0.0;
            out << r.outage_id << ',' << c.id << ',' << fmt_num(c.p_ref * sb) << ',' << fmt_num(post * sb) << ','
                << fmt_num(c.p_max * sb) << ',' << fmt_num(violation * sb) << ',' << fmt_num(r.ssfd_hz) << '\n';
        }
    }
}

}  // namespace zidroop
