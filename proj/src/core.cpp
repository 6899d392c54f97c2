#include "zidroop/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace zidroop {

int NetworkGraph::index_of(const std::string& node) const
{
    const auto it = std::find(nodes.begin(), nodes.end(), node);
    return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

std::size_t GridScenario::converter_index(const std::string& id) const
{
    for (std::size_t i = 0; i < converters.size(); ++i) {
        if (converters[i].id == id) {
            return i;
        }
    }
    throw InputError("unknown converter id: " + id);
}

Eigen::VectorXd GridScenario::p_ref() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(converters.size()));
    for (std::size_t i = 0; i < converters.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = converters[i].p_ref;
    }
    return v;
}

Eigen::VectorXd GridScenario::p_max() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(converters.size()));
    for (std::size_t i = 0; i < converters.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = converters[i].p_max;
    }
    return v;
}

Eigen::VectorXd GridScenario::x_min() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(converters.size()));
    for (std::size_t i = 0; i < converters.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = converters[i].x_min;
    }
    return v;
}

double GridScenario::total_wind() const
{
    return std::accumulate(wind.begin(), wind.end(), 0.0,
                           [](double acc, const WindInjection& w) { return acc + w.p; });
}

DroopAssignment::DroopAssignment(Eigen::VectorXd x) : x_(std::move(x)), alpha_(x_.sum())
{
    if ((x_.array() <= 0.0).any()) {
        throw InputError("inverse droop gains must be positive");
    }
}

DroopAssignment DroopAssignment::equal(std::size_t n, double alpha)
{
    return DroopAssignment(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), alpha / static_cast<double>(n)));
}

bool ValidationReport::ok() const
{
    return std::none_of(items.begin(), items.end(), [](const Violation& v) { return v.severity == Severity::Error; });
}

bool ValidationReport::contains(const std::string& fragment) const
{
    return std::any_of(items.begin(), items.end(),
                       [&](const Violation& v) { return v.message.find(fragment) != std::string::npos; });
}

namespace {

void error(ValidationReport& r, std::string msg) { r.items.push_back({Severity::Error, std::move(msg)}); }
void warning(ValidationReport& r, std::string msg) { r.items.push_back({Severity::Warning, std::move(msg)}); }

void validate_network(const GridScenario& s, ValidationReport& report)
{
    const auto& g = s.network;
    std::set<std::string> seen;
    for (const auto& node : g.nodes) {
        if (!seen.insert(node).second) {
            error(report, "duplicate id: network node " + node);
        }
    }
    for (const auto& c : s.converters) {
        if (!seen.count(c.id)) {
            error(report, "converter " + c.id + " has no network node");
        }
    }
    for (const auto& w : s.wind) {
        if (!seen.count(w.node)) {
            error(report, "wind injection at unknown node " + w.node);
        }
    }
    bool endpoints_ok = true;
    for (const auto& e : g.edges) {
        if (!seen.count(e.from) || !seen.count(e.to)) {
            error(report, "edge references unknown node: " + e.from + "-" + e.to);
            endpoints_ok = false;
        }
        if (e.from == e.to) {
            error(report, "self-loop at node " + e.from);
        }
        if (!(e.b > 0.0)) {
            error(report, "non-positive susceptance on edge " + e.from + "-" + e.to);
        }
    }
    if (g.grounded_node && !seen.count(*g.grounded_node)) {
        error(report, "grounded node " + *g.grounded_node + " is not a network node");
    }
    if (endpoints_ok && !g.nodes.empty() && !is_connected(g)) {
        error(report, "disconnected graph");
    }
}

}  // namespace

ValidationReport validate_scenario(const GridScenario& s)
{
    ValidationReport report;
    if (!(s.base.s_base > 0.0)) {
        error(report, "s_base must be positive");
    }
    if (!(s.base.f_nom > 0.0)) {
        error(report, "f_nom must be positive");
    }
    if (s.converters.size() < 2) {
        error(report, "at least two converters are required");
    }

    std::set<std::string> ids;
    for (const auto& c : s.converters) {
        if (!ids.insert(c.id).second) {
            error(report, "duplicate id: " + c.id);
        }
        if (!(c.p_max > 0.0 && c.p_max <= 1.0)) {
            error(report, "p_max of " + c.id + " outside (0, 1]");
        }
        if (std::abs(c.p_ref) > c.p_max) {
            std::ostringstream msg;
            msg << "set-point exceeds limit: " << c.id << " |p_ref| = " << std::abs(c.p_ref) << " > " << c.p_max;
            error(report, msg.str());
        }
        if (!(c.x_min > 0.0)) {
            error(report, "x_min of " + c.id + " must be positive");
        }
        if (!(c.rating > 0.0)) {
            error(report, "rating of " + c.id + " must be positive");
        }
    }

    validate_network(s, report);

    const double exported = s.p_ref().sum();
    const double injected = s.total_wind();
    if (std::abs(exported - injected) > kBalanceTolerance) {
        std::ostringstream msg;
        msg << "power imbalance: converters " << exported << " pu vs wind " << injected << " pu";
        warning(report, msg.str());
    }
    return report;
}

void require_valid(const GridScenario& scenario)
{
    const auto report = validate_scenario(scenario);
    if (report.ok()) {
        return;
    }
    std::string msg = "invalid scenario:";
    for (const auto& v : report.items) {
        if (v.severity == Severity::Error) {
            msg += "\n  " + v.message;
        }
    }
    throw InputError(msg);
}

ValidationReport validate_assignment(const DroopAssignment& assignment, const GridScenario& scenario)
{
    ValidationReport report;
    if (assignment.size() != scenario.size()) {
        error(report, "assignment has " + std::to_string(assignment.size()) + " gains for " +
                          std::to_string(scenario.size()) + " converters");
        return report;
    }
    for (std::size_t i = 0; i < scenario.size(); ++i) {
        const auto& c = scenario.converters[i];
        if (assignment.x()(static_cast<Eigen::Index>(i)) < c.x_min * (1.0 - 1e-9)) {
            error(report, "inverse gain of " + c.id + " below x_min");
        }
    }
    return report;
}

NetworkGraph default_star_network(const std::vector<Converter>& converters, const std::vector<WindInjection>& wind,
                                  double b)
{
    NetworkGraph g;
    g.nodes.emplace_back(kHubNode);
    for (const auto& c : converters) {
        g.nodes.push_back(c.id);
        g.edges.push_back({kHubNode, c.id, b});
    }
    for (const auto& w : wind) {
        if (g.index_of(w.node) >= 0) {
            continue;
        }
        g.nodes.push_back(w.node);
        g.edges.push_back({kHubNode, w.node, b});
    }
    return g;
}

bool is_connected(const NetworkGraph& graph)
{
    const auto n = graph.nodes.size();
    if (n == 0) {
        return true;
    }
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : graph.edges) {
        const int i = graph.index_of(e.from);
        const int j = graph.index_of(e.to);
        if (i < 0 || j < 0) {
            return false;
        }
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++count;
                frontier.push(v);
            }
        }
    }
    return count == n;
}

}  // namespace zidroop
