#include "zidroop/commands.hpp"

#include "zidroop/format.hpp"
#include "zidroop/scenario_io.hpp"
#include "zidroop/security.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

namespace zidroop {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes through `fn` to config.out, or to `fallback` when no path is given.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn)
{
    if (path.empty() || path == "-") {
        fn(fallback);
        return;
    }
    if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + path);
    }
    fn(f);
    if (!f) {
        throw IoError("write failed: " + path);
    }
}

GridScenario load_grid(const RunConfig& c)
{
    if (c.grid.empty()) {
        throw InputError("--grid is required");
    }
    auto s = load_scenario(c.grid);
    require_valid(s);
    return s;
}

DroopAssignment load_assignment(const RunConfig& c, const GridScenario& s, std::ostream& log)
{
    if (c.droops.empty()) {
        log << "no --droops given: equal gains x = " << fmt_num(c.alpha / static_cast<double>(s.size())) << "\n";
        return DroopAssignment::equal(s.size(), c.alpha);
    }
    const auto f = load_droops(c.droops);
    return align_droops(f, s);
}

SolverConfig solver_config(const RunConfig& c, Backend fallback)
{
    SolverConfig cfg;
    cfg.backend = c.backend_given ? parse_backend(c.backend) : fallback;
    cfg.bnb.time_limit = c.time_limit;
    cfg.external.command = c.external_command;
    if (cfg.backend == Backend::External && cfg.external.command.empty()) {
        throw InputError("--backend external needs --solver-cmd");
    }
    return cfg;
}

std::vector<std::string> ids_of(const GridScenario& s)
{
    std::vector<std::string> ids;
    for (const auto& c : s.converters) {
        ids.push_back(c.id);
    }
    return ids;
}

}  // namespace

void validate_config(const RunConfig& c, const std::string& command)
{
    if (!(c.alpha > 0.0)) {
        throw InputError("--alpha must be positive");
    }
    if (c.precision > 0 || c.precision < -8) {
        throw InputError("--precision must lie in [-8, 0]");
    }
    if (!(c.tau > 0.0)) {
        throw InputError("--tau must be positive");
    }
    if (command == "simulate") {
        if (!(c.dt > 0.0) || !(c.t_end >= 0.0) || !(c.sample > 0.0)) {
            throw InputError("--dt and --sample must be positive, --t-end nonnegative");
        }
        if (c.integrator != "rk4" && c.integrator != "expm") {
            throw InputError("--integrator must be rk4 or expm");
        }
    }
    if (command == "market-loop") {
        if (!(c.step_mw > 0.0)) {
            throw InputError("--step-mw must be positive");
        }
        parse_policy(c.policy);
    }
    if (c.backend_given) {
        parse_backend(c.backend);
    }
}

int cmd_solve_droops(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    const auto ids = ids_of(s);
    DroopSolution sol;
    sol.backend = to_string(solver_config(c, Backend::BranchAndBound).backend);
    if (c.alpha <= s.x_min().sum()) {
        log << "stiffness target unreachable: alpha " << fmt_num(c.alpha) << " <= sum of x_min "
            << fmt_num(s.x_min().sum()) << "\n";
        sol.status = DroopStatus::Infeasible;
    } else {
        sol = solve_droops(build_exact_problem(s, c.alpha, c.precision), solver_config(c, Backend::BranchAndBound));
    }
    emit(c.out, out, [&](std::ostream& o) { write_droops(o, sol, ids, c.precision); });
    log << "status " << to_string(sol.status);
    if (sol.has_assignment()) {
        log << ", objective " << fmt_num(sol.objective) << ", residual " << fmt_num(sol.residual);
    }
    log << " (" << sol.backend << ")\n";
    switch (sol.status) {
    case DroopStatus::Optimal:
        return kExitOk;
    case DroopStatus::Infeasible:
        return kExitInfeasible;
    case DroopStatus::PrecisionLimited:
    case DroopStatus::LimitReached:
        return kExitPrecisionLimited;
    }
    return kExitUsage;
}

int cmd_check_n1(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    const auto a = load_assignment(c, s, log);
    const auto report = validate_assignment(a, s);
    for (const auto& v : report.items) {
        log << (v.severity == Severity::Error ? "error: " : "warning: ") << v.message << "\n";
    }
    const auto reports = screen_all_contingencies(a, s);
    emit(c.out, out, [&](std::ostream& o) { write_contingency_csv(o, reports, s); });
    std::size_t violations = 0;
    for (const auto& r : reports) {
        violations += r.violations.size();
    }
    log << (violations == 0 ? "N-1 secure" : "N-1 insecure: " + std::to_string(violations) + " violations") << "\n";
    return violations == 0 ? kExitOk : kExitInsecure;
}

int cmd_h2(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    const auto a = load_assignment(c, s, log);
    const auto full = assemble_model(s, a, c.tau);
    const auto red = reduce_grounded(full);
    const double h2 = h2_norm(red);
    const auto k = a.k_f();
    const bool equal = (k.array() == k(0)).all();

    nlohmann::ordered_json j;
    j["ids"] = ids_of(s);
    j["tau"] = round_sig(c.tau);
    j["k_f"] = std::vector<double>(k.data(), k.data() + k.size());
    for (auto& v : j["k_f"]) {
        v = round_sig(v.get<double>());
    }
    j["states_full"] = full.states();
    j["states_reduced"] = red.states();
    j["spectral_abscissa"] = round_sig(spectral_abscissa(red.A));
    j["h2_squared"] = round_sig(h2);
    j["h2_norm"] = round_sig(std::sqrt(h2));
    if (equal) {
        j["closed_form_squared"] = round_sig(equal_gain_h2(s.size(), k(0), c.tau));
    } else {
        j["closed_form_squared"] = nullptr;
    }
    const auto modes = laplacian_modes(full.laplacian);
    j["laplacian_modes"] = std::vector<double>(modes.data(), modes.data() + modes.size());
    for (auto& v : j["laplacian_modes"]) {
        v = round_sig(v.get<double>());
    }
    emit(c.out, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
    log << "squared H2 norm " << fmt_num(h2) << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    const auto a = load_assignment(c, s, log);
    std::vector<SimEvent> events;
    for (const auto& e : c.events) {
        events.push_back(parse_event(e, s.base));
    }
    SimulationOptions o;
    o.tau = c.tau;
    o.dt = c.dt;
    o.t_end = c.t_end;
    o.sample_interval = c.sample;
    o.integrator = c.integrator == "expm" ? Integrator::MatrixExponential : Integrator::RungeKutta4;
    const auto tr = simulate(s, a, events, o);
    emit(c.out, out, [&](std::ostream& f) { write_trajectory_csv(f, tr, s.base); });
    log << tr.samples() << " samples, final mean frequency deviation " << fmt_num(tr.mean_frequency(tr.samples() - 1))
        << " pu, conservation error " << fmt_num(tr.max_conservation_error) << " pu\n";
    return kExitOk;
}

int cmd_market_loop(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    const auto ids = ids_of(s);
    if (c.hours.empty()) {
        throw InputError("--hours is required");
    }
    const auto hours = load_hours_csv(c.hours, ids);
    const auto market = c.bids.empty() ? default_market(ids) : load_market_json(c.bids, ids);
    PlanningOptions o;
    o.policy = parse_policy(c.policy);
    o.step_mw = c.step_mw;
    o.alpha = c.alpha;
    o.precision = c.precision;
    o.solver = solver_config(c, Backend::Oracle);
    o.threads = c.threads;
    const auto run = run_planning(hours, s, market, o);

    if (c.out.empty() || c.out == "-") {
        write_capacities_csv(out, run);
    } else {
        std::error_code ec;
        std::filesystem::create_directories(c.out, ec);
        if (ec) {
            throw IoError("cannot create " + c.out + ": " + ec.message());
        }
        const std::filesystem::path dir(c.out);
        emit((dir / "capacities.csv").string(), out, [&](std::ostream& f) { write_capacities_csv(f, run); });
        emit((dir / "iterations.csv").string(), out, [&](std::ostream& f) { write_iterations_csv(f, run); });
        emit((dir / "summary.json").string(), out, [&](std::ostream& f) { write_summary_json(f, run); });
        emit((dir / "duration.csv").string(), out,
             [&](std::ostream& f) { write_duration_csv(f, duration_curves(run)); });
    }
    int insecure = 0;
    for (const auto& h : run.hours) {
        insecure += h.secure() ? 0 : 1;
    }
    log << run.hours.size() << " hours, policy " << to_string(run.policy) << ", curtailed "
        << fmt_num(run.curtailed_mwh()) << " MWh\n";
    return insecure == 0 ? kExitOk : kExitInsecure;
}

int cmd_make_year(const RunConfig& c, std::ostream& out, std::ostream& log)
{
    const auto s = load_grid(c);
    if (c.year_hours <= 0) {
        throw InputError("--year-hours must be positive");
    }
    const auto y = synthetic_year(s, c.seed, c.year_hours);
    emit(c.out, out, [&](std::ostream& f) { write_hours_csv(f, y.hours, y.market.links); });
    if (!c.bids.empty()) {
        emit(c.bids, out, [&](std::ostream& f) { write_market_json(f, y.market); });
    }
    log << y.hours.size() << " synthetic hours (seed " << c.seed << ")\n";
    return kExitOk;
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& log)
{
    static const std::map<std::string, int (*)(const RunConfig&, std::ostream&, std::ostream&)> table{
        {"solve-droops", cmd_solve_droops}, {"check-n1", cmd_check_n1},       {"h2", cmd_h2},
        {"simulate", cmd_simulate},         {"market-loop", cmd_market_loop}, {"make-year", cmd_make_year},
    };
    const auto it = table.find(command);
    if (it == table.end()) {
        log << "error: unknown command " << command << "\n";
        return kExitUsage;
    }
    try {
        validate_config(config, command);
        return it->second(config, out, log);
    } catch (const InputError& e) {
        log << "error: " << e.what() << "\n";
    } catch (const IoError& e) {
        log << "error: " << e.what() << "\n";
    } catch (const UnstableModel& e) {
        log << "error: " << e.what() << "\n";
    } catch (const SimulationError& e) {
        log << "error: " << e.what() << "\n";
    }
    return kExitUsage;
}

}  // namespace zidroop
