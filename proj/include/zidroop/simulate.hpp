#pragma once

// Time-domain response of the droop network to wind steps and converter
// outages. Hub and wind buses stay algebraic (Kron-reduced each time the
// topology changes); each active converter carries (theta, omega).
//
// Event syntax (CLI and files):  outage:ID@T   wind:NODE:DELTA_MW@T

#include "zidroop/core.hpp"
#include "zidroop/dynamics.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace zidroop {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimEvent {
    enum class Kind { WindStep, Outage };
    Kind kind = Kind::WindStep;
    double time = 0.0;    // s
    std::string target;   // node or converter id
    double delta = 0.0;   // pu, wind steps only

    [[nodiscard]] std::string describe(const SystemBase& base) const;
};

inline constexpr double kDefaultEventTime = 1.0;

/// Parses `outage:UK@1.5` or `wind:W1:-250@2` (MW converted with `base`).
SimEvent parse_event(const std::string& text, const SystemBase& base);

enum class Integrator { RungeKutta4, MatrixExponential };

struct SimulationOptions {
    double tau = kDefaultTau;
    double dt = 1e-3;
    double t_end = 60.0;
    double sample_interval = 0.01;  // rounded to a multiple of dt
    Integrator integrator = Integrator::RungeKutta4;
    double divergence_limit = 1e6;
};

struct Trajectory {
    std::vector<std::string> ids;
    std::vector<SimEvent> events;
    std::vector<double> time;
    Eigen::MatrixXd frequency;  // samples x converters, nan once outaged
    Eigen::MatrixXd power;      // export pu, 0 once outaged
    std::vector<double> injection;  // total wind at each sample
    double max_conservation_error = 0.0;

    [[nodiscard]] std::size_t samples() const { return time.size(); }
    /// Mean over the converters still in service at sample `s`.
    [[nodiscard]] double mean_frequency(std::size_t s) const;
    /// Largest |mean frequency| over the run.
    [[nodiscard]] double peak_mean_deviation() const;
    [[nodiscard]] Eigen::VectorXd final_frequency() const { return frequency.bottomRows(1).transpose(); }
    [[nodiscard]] Eigen::VectorXd final_power() const { return power.bottomRows(1).transpose(); }
};

Trajectory simulate(const GridScenario& scenario, const DroopAssignment& assignment, std::vector<SimEvent> events,
                    const SimulationOptions& options = {});

/// Header comments echo the events; columns time_s, freq_pu_<id>, p_pu_<id>
/// per converter, then mean_freq_pu and mean_freq_hz.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const SystemBase& base);

}  // namespace zidroop
