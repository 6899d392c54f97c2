#include "zidroop/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace zidroop;
    CLI::App app{"N-1 secure droop gains for zero-inertia offshore grids"};
    app.require_subcommand(1);
    RunConfig cfg;

    const auto grid = [&](CLI::App* sub) { sub->add_option("--grid", cfg.grid, "scenario JSON")->required(); };
    const auto alpha = [&](CLI::App* sub) { sub->add_option("--alpha", cfg.alpha, "stiffness, sum of x")->capture_default_str(); };
    const auto droops = [&](CLI::App* sub) {
        sub->add_option("--droops", cfg.droops, "droops JSON (default: equal gains over --alpha)");
    };
    const auto out = [&](CLI::App* sub, const char* what) { sub->add_option("--out", cfg.out, what); };
    const auto solver = [&](CLI::App* sub) {
        sub->add_option("--precision", cfg.precision, "lowest digit exponent psi")->capture_default_str();
        sub->add_option("--backend", cfg.backend, "oracle, bnb or external")
            ->each([&](const std::string&) { cfg.backend_given = true; });
        sub->add_option("--solver-cmd", cfg.external_command, "external MILP command (MODEL SOLUTION appended)");
        sub->add_option("--time-limit", cfg.time_limit, "branch-and-bound limit in seconds")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve-droops", "optimal N-1 secure inverse droop gains");
    grid(solve);
    alpha(solve);
    solver(solve);
    out(solve, "droops JSON (default stdout)");

    auto* n1 = app.add_subcommand("check-n1", "screen every converter outage");
    grid(n1);
    droops(n1);
    alpha(n1);
    out(n1, "contingency CSV (default stdout)");

    auto* h2 = app.add_subcommand("h2", "squared H2 norm of the grounded droop dynamics");
    grid(h2);
    droops(h2);
    alpha(h2);
    h2->add_option("--tau", cfg.tau, "measurement delay in seconds")->capture_default_str();
    out(h2, "norms JSON (default stdout)");

    auto* sim = app.add_subcommand("simulate", "time-domain response to wind steps and outages");
    grid(sim);
    droops(sim);
    alpha(sim);
    sim->add_option("--tau", cfg.tau, "measurement delay in seconds")->capture_default_str();
    sim->add_option("--dt", cfg.dt, "integrator step in seconds")->capture_default_str();
    sim->add_option("--t-end", cfg.t_end, "end time in seconds")->capture_default_str();
    sim->add_option("--sample", cfg.sample, "output interval in seconds")->capture_default_str();
    sim->add_option("--integrator", cfg.integrator, "rk4 or expm")->capture_default_str();
    sim->add_option("--event", cfg.events, "outage:ID@T or wind:NODE:MW@T (repeatable)");
    out(sim, "trajectory CSV (default stdout)");

    auto* market = app.add_subcommand("market-loop", "capacity reduction loop over market hours");
    grid(market);
    market->add_option("--hours", cfg.hours, "hours CSV")->required();
    market->add_option("--bids", cfg.bids, "bid fixtures JSON (default: one flat price)");
    market->add_option("--policy", cfg.policy, "equal or adaptive")->capture_default_str();
    market->add_option("--step-mw", cfg.step_mw, "capacity reduction step")->capture_default_str();
    market->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
    alpha(market);
    solver(market);
    out(market, "output directory (default: capacities CSV on stdout)");

    auto* year = app.add_subcommand("make-year", "write a synthetic hours CSV and bid fixtures");
    grid(year);
    year->add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
    year->add_option("--year-hours", cfg.year_hours, "number of hours")->capture_default_str();
    year->add_option("--bids", cfg.bids, "where to write the bid fixtures JSON");
    out(year, "hours CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    return run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
