#pragma once

// Subcommand bodies behind the zidroop executable. Each returns the process
// exit code; diagnostics go to `log`, artifacts to files or `out`.

#include "zidroop/droop_solver.hpp"
#include "zidroop/dynamics.hpp"
#include "zidroop/market.hpp"
#include "zidroop/simulate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace zidroop {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInfeasible = 2,
    kExitInsecure = 3,
    kExitPrecisionLimited = 4,
};

struct RunConfig {
    std::string grid;
    std::string droops;  // empty: equal gains over alpha
    std::string hours;
    std::string bids;    // empty: every link bids at one price
    double alpha = kDefaultAlpha;
    int precision = kDefaultPrecision;
    double tau = kDefaultTau;
    double dt = 1e-3;
    double t_end = 60.0;
    double sample = 0.01;
    std::string integrator = "rk4";
    std::vector<std::string> events;
    std::string policy = "adaptive";
    double step_mw = kDefaultStepMw;
    std::string backend = "bnb";  // market-loop falls back to oracle unless set
    bool backend_given = false;
    std::string external_command;
    double time_limit = 120.0;
    unsigned threads = 0;
    unsigned seed = 2030;
    int year_hours = 8760;
    std::string out;  // file, or directory for market-loop; empty: stdout
};

/// Throws InputError for values outside the consuming modules' domains.
void validate_config(const RunConfig& config, const std::string& command);

int cmd_solve_droops(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_check_n1(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_h2(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_market_loop(const RunConfig& config, std::ostream& out, std::ostream& log);
/// Writes a synthetic hours CSV (to --out) and its bid fixtures (to --bids).
int cmd_make_year(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Runs `command` with error mapping: InputError and I/O failures give 1.
int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace zidroop
