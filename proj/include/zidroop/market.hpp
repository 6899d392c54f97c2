#pragma once

// Day-ahead planning loop: a transport-model market clears wind against
// per-link bid curves, the cleared flows become converter set-points, and
// capacity on violated links is cut in fixed steps until the droop
// configuration is N-1 secure.

#include "zidroop/core.hpp"
#include "zidroop/droop_solver.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace zidroop {

/// Step of a marginal bid curve: up to `quantity_mw` bought at `price`.
struct BidSegment {
    double quantity_mw = 0.0;
    double price = 0.0;
};

using BidCurve = std::vector<BidSegment>;

/// Bid curves per link, in converter order.
struct BidFixture {
    std::vector<BidCurve> curves;
};

struct MarketData {
    std::vector<std::string> links;
    std::map<std::string, BidFixture> fixtures;

    [[nodiscard]] const BidFixture& fixture(const std::string& id) const;
};

inline constexpr const char* kDefaultFixture = "default";

/// Every link bids its whole capacity at one common price.
MarketData default_market(const std::vector<std::string>& links);

struct HourScenario {
    int hour = 0;
    double wind_mw = 0.0;
    std::vector<double> capacity_mw;  // offered, per link
    std::string fixture = kDefaultFixture;
};

struct Clearing {
    std::vector<double> flow_mw;
    double curtailed_mw = 0.0;
    double welfare = 0.0;
};

/// Greedy merit order: segments with positive price, highest first, ties to the
/// lower link index then the earlier segment; limited by link capacity and wind.
Clearing clear_market(const HourScenario& hour, const BidFixture& bids);

enum class Policy { Equal, Adaptive };

const char* to_string(Policy policy);
Policy parse_policy(const std::string& name);

inline constexpr double kDefaultStepMw = 50.0;
/// Set-point limit headroom (pu) kept by the adaptive solve so its answer
/// passes screening without relying on the screening tolerance.
inline constexpr double kPlanningMargin = 1e-8;

struct PlanningOptions {
    Policy policy = Policy::Adaptive;
    double step_mw = kDefaultStepMw;
    double alpha = 600.0;
    int precision = -3;
    SolverConfig solver{Backend::Oracle, {}, {}};
    unsigned threads = 0;  // 0: hardware concurrency
};

struct PlanningIteration {
    std::vector<double> capacity_mw;
    std::vector<double> flow_mw;
    bool droops_found = false;  // equal policy: always true
    bool secure = false;
    std::vector<std::size_t> reduced_links;
};

struct HourRecord {
    int hour = 0;
    std::vector<double> offered_mw;
    std::vector<PlanningIteration> iterations;
    DroopAssignment droops;
    double wind_mw = 0.0;
    double curtailed_mwh = 0.0;

    [[nodiscard]] const PlanningIteration& final_state() const { return iterations.back(); }
    [[nodiscard]] double reduced_mw(std::size_t link) const;
    [[nodiscard]] double total_reduction_mw() const;
    [[nodiscard]] bool secure() const { return !iterations.empty() && final_state().secure; }
};

struct PlanningRun {
    Policy policy = Policy::Adaptive;
    std::vector<std::string> links;
    std::vector<HourRecord> hours;  // ordered by input position

    [[nodiscard]] double curtailed_mwh() const;
};

/// Set-points of `grid` replaced by `flow_mw`, wind scaled to balance them.
GridScenario dispatch_scenario(const GridScenario& grid, const std::vector<double>& flow_mw);

HourRecord plan_hour(const HourScenario& hour, const GridScenario& grid, const MarketData& market,
                     const PlanningOptions& options);

/// Hours are independent; processed concurrently and merged in input order.
PlanningRun run_planning(const std::vector<HourScenario>& hours, const GridScenario& grid, const MarketData& market,
                         const PlanningOptions& options);

struct LinkDuration {
    std::string link;
    std::vector<double> capacity_mw;  // descending
    std::vector<double> flow_mw;      // descending
    int hours_at_full_capacity = 0;
};

struct DurationSummary {
    std::vector<LinkDuration> links;
    int hours = 0;
    double curtailed_mwh = 0.0;
};

DurationSummary duration_curves(const PlanningRun& run);

// ---------------------------------------------------------------------------
// Files

/// Header: hour,wind_mw,capacity_mw_<link>...,fixture (link order from `links`).
std::vector<HourScenario> read_hours_csv(std::istream& in, const std::vector<std::string>& links);
std::vector<HourScenario> load_hours_csv(const std::string& path, const std::vector<std::string>& links);
void write_hours_csv(std::ostream& out, const std::vector<HourScenario>& hours, const std::vector<std::string>& links);

/// {"fixtures": {"<id>": {"<link>": [[quantity_mw, price], ...]}}}
MarketData read_market_json(std::istream& in, const std::vector<std::string>& links);
MarketData load_market_json(const std::string& path, const std::vector<std::string>& links);
void write_market_json(std::ostream& out, const MarketData& market);

/// hour,link,capacity_mw,flow_mw,reduced_mw,secure (final state per hour).
void write_capacities_csv(std::ostream& out, const PlanningRun& run);
/// Per-iteration log: hour,iteration,link,capacity_mw,flow_mw,droops_found,secure.
void write_iterations_csv(std::ostream& out, const PlanningRun& run);
void write_summary_json(std::ostream& out, const PlanningRun& run);
/// link,rank,capacity_mw,flow_mw.
void write_duration_csv(std::ostream& out, const DurationSummary& summary);

// ---------------------------------------------------------------------------
// Synthetic year

struct SyntheticYear {
    std::vector<HourScenario> hours;
    MarketData market;
};

/// Deterministic 8760-hour fixture for `grid`: seasonal wind with AR(1) noise,
/// occasional derated links and peak/off-peak price fixtures.
SyntheticYear synthetic_year(const GridScenario& grid, unsigned seed = 2030, int hours = 8760);

}  // namespace zidroop
