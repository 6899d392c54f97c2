#pragma once

// Domain types shared by every zidroop module. All quantities are per-unit on
// the system base unless the name says otherwise (MW only at I/O boundaries).

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zidroop {

/// Thrown for malformed inputs that no downstream module can work with.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Megawatts {
    double value = 0.0;
};

struct SystemBase {
    double s_base = 1850.0;  // MVA
    double f_nom = 50.0;     // Hz
    double omega_ref = 1.0;  // pu
};

struct Converter {
    std::string id;
    double rating = 1850.0;  // MVA
    double p_ref = 0.0;      // pu, positive = export from the island
    double p_max = 0.95;     // pu
    double x_min = 10.0;     // lower bound on the inverse droop gain
};

struct WindInjection {
    std::string node;
    double p = 0.0;  // pu, injected into the island
};

struct Edge {
    std::string from;
    std::string to;
    double b = 0.0;  // pu susceptance
};

struct NetworkGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::optional<std::string> grounded_node;

    /// Index of `node` in `nodes`, or -1.
    [[nodiscard]] int index_of(const std::string& node) const;
};

inline constexpr const char* kHubNode = "HUB";
inline constexpr double kDefaultHubSusceptance = 10.0;

struct GridScenario {
    SystemBase base;
    std::vector<Converter> converters;
    std::vector<WindInjection> wind;
    NetworkGraph network;

    [[nodiscard]] std::size_t size() const { return converters.size(); }
    /// Index of converter `id`; throws InputError when absent.
    [[nodiscard]] std::size_t converter_index(const std::string& id) const;
    [[nodiscard]] Eigen::VectorXd p_ref() const;
    [[nodiscard]] Eigen::VectorXd p_max() const;
    [[nodiscard]] Eigen::VectorXd x_min() const;
    [[nodiscard]] double total_wind() const;
};

/// Inverse droop gains x (one per converter), their sum alpha and k_f = 1/x.
class DroopAssignment {
public:
    DroopAssignment() = default;
    explicit DroopAssignment(Eigen::VectorXd x);

    /// x_i = alpha / n for all i.
    static DroopAssignment equal(std::size_t n, double alpha);

    [[nodiscard]] const Eigen::VectorXd& x() const { return x_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] Eigen::VectorXd k_f() const { return x_.cwiseInverse(); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(x_.size()); }

private:
    Eigen::VectorXd x_;
    double alpha_ = 0.0;
};

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Warning, Error };

struct Violation {
    Severity severity;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> items;

    [[nodiscard]] bool ok() const;  // no hard errors
    [[nodiscard]] bool empty() const { return items.empty(); }
    [[nodiscard]] bool contains(const std::string& fragment) const;
};

inline constexpr double kBalanceTolerance = 1e-9;

ValidationReport validate_scenario(const GridScenario& scenario);

/// Throws InputError listing every hard error in the report.
void require_valid(const GridScenario& scenario);

/// Checks x >= x_min and dimension against the scenario.
ValidationReport validate_assignment(const DroopAssignment& assignment, const GridScenario& scenario);

// ---------------------------------------------------------------------------
// Units

[[nodiscard]] inline double to_per_unit(Megawatts mw, const SystemBase& base) { return mw.value / base.s_base; }
[[nodiscard]] inline Megawatts from_per_unit(double pu, const SystemBase& base) { return {pu * base.s_base}; }
[[nodiscard]] inline double to_hz(double omega_pu, const SystemBase& base) { return omega_pu * base.f_nom; }

// ---------------------------------------------------------------------------
// Network

/// Star graph: every converter and wind node tied to a central hub bus.
NetworkGraph default_star_network(const std::vector<Converter>& converters, const std::vector<WindInjection>& wind,
                                  double b = kDefaultHubSusceptance);

/// True when every node is reachable from the first one.
bool is_connected(const NetworkGraph& graph);

/// b-weighted Laplacian over `graph.nodes` ordering.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> laplacian(const NetworkGraph& graph)
{
    const auto n = static_cast<Eigen::Index>(graph.nodes.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> L =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (const auto& e : graph.edges) {
        const int i = graph.index_of(e.from);
        const int j = graph.index_of(e.to);
        if (i < 0 || j < 0) {
            throw InputError("edge references unknown node: " + e.from + "-" + e.to);
        }
        const Scalar b(e.b);
        L(i, i) += b;
        L(j, j) += b;
        L(i, j) -= b;
        L(j, i) -= b;
    }
    return L;
}

}  // namespace zidroop
