// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failed criteria.

#include "zidroop/droop_solver.hpp"
#include "zidroop/dynamics.hpp"
#include "zidroop/market.hpp"
#include "zidroop/scenario_io.hpp"
#include "zidroop/security.hpp"
#include "zidroop/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace zidroop;

namespace {

using Clock = std::chrono::steady_clock;

const std::string kGrid = ZIDROOP_DATA_DIR "/nswph_hour3.json";

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            detail << "failed: " << what << "; ";
        }
        ok = ok && cond;
    }
};

std::vector<std::string> links_of(const GridScenario& g)
{
    std::vector<std::string> l;
    for (const auto& c : g.converters) {
        l.push_back(c.id);
    }
    return l;
}

DroopAssignment spread_droops()
{
    Eigen::VectorXd x(6);
    x << 15.789, 142.105, 142.106, 100.0, 100.0, 100.0;
    return DroopAssignment(x);
}

Eigen::MatrixXd from_edges(int n, const std::vector<std::tuple<int, int, double>>& edges)
{
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j, b] : edges) {
        L(i, i) += b;
        L(j, j) += b;
        L(i, j) -= b;
        L(j, i) -= b;
    }
    return L;
}

std::vector<Eigen::MatrixXd> graphs(int n, std::mt19937& rng)
{
    std::vector<std::tuple<int, int, double>> path;
    std::vector<std::tuple<int, int, double>> star;
    std::vector<std::tuple<int, int, double>> ring;
    std::vector<std::tuple<int, int, double>> rnd;
    std::uniform_real_distribution<double> w(0.2, 5.0);
    for (int i = 0; i + 1 < n; ++i) {
        path.emplace_back(i, i + 1, 1.0 + 0.5 * i);
        star.emplace_back(0, i + 1, 2.0);
        ring.emplace_back(i, i + 1, w(rng));
        rnd.emplace_back(std::uniform_int_distribution<int>(0, i)(rng), i + 1, w(rng));
    }
    if (n > 2) {
        ring.emplace_back(n - 1, 0, w(rng));
    }
    for (int c = 0; c < n; ++c) {
        const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (i != j) {
            rnd.emplace_back(i, j, w(rng));
        }
    }
    return {from_edges(n, path), from_edges(n, star), from_edges(n, ring), from_edges(n, rnd)};
}

GridScenario nswph() { return load_scenario(kGrid); }

void steady_state_sharing(Check& c)
{
    const auto s = nswph();
    const auto a = DroopAssignment::equal(6, 600.0);
    const std::size_t uk = s.converter_index("UK");
    const double p_uk = 1740.0 / 1850.0;
    const double dw_closed = p_uk / (600.0 - 100.0);
    const double share_closed = 100.0 / 500.0 * p_uk;

    const auto t0 = Clock::now();
    constexpr int reps = 1000;
    double dw = 0.0;
    Eigen::VectorXd flows;
    for (int r = 0; r < reps; ++r) {
        dw = ssfd(a, s, uk);
        flows = post_fault_flows(a, s, uk);
    }
    const double per_call = seconds_since(t0) / reps;

    c.require(s.converters[uk].p_ref == p_uk, "fixture UK loading");
    c.require(std::abs(dw - dw_closed) <= 1e-9, "SSFD closed form");
    c.require(std::abs(dw - 1.8811e-3) <= 5e-8, "SSFD 1.8811e-3 pu");
    c.require(std::abs(to_hz(dw, s.base) - 0.09405) <= 5e-6, "SSFD 0.09405 Hz");
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == uk) {
            continue;
        }
        const double pickup = flows(row++) - s.converters[i].p_ref;
        c.require(std::abs(pickup - share_closed) <= 1e-9, "pickup closed form");
        c.require(std::abs(pickup * 1850.0 - 348.0) <= 1e-6, "+348 MW pickup");
    }
    c.require(per_call < 1e-3, "runtime");
    c.detail << "dw=" << dw << " pu (" << to_hz(dw, s.base) << " Hz), pickup=" << share_closed * 1850.0
             << " MW, " << per_call * 1e6 << " us/call";
}

void optimizer_equivalence(Check& c)
{
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> pd(-0.8, 0.8);
    int compared = 0;
    int drawn = 0;
    double worst_oracle = 0.0;
    double worst_bnb = 0.0;
    double worst_gap = 0.0;  // relative to the allowed band
    while (compared < 100 && drawn < 1000) {
        const int n = 2 + drawn % 5;
        ++drawn;
        Eigen::VectorXd p(n);
        for (int i = 0; i < n; ++i) {
            p(i) = pd(rng);
        }
        const auto prob = make_problem(600.0, Eigen::VectorXd::Constant(n, 10.0), p, Eigen::VectorXd::Constant(n, 0.95));
        auto t0 = Clock::now();
        const auto o = solve_exact_oracle(prob);
        worst_oracle = std::max(worst_oracle, seconds_since(t0));
        if (o.status != DroopStatus::Optimal) {
            continue;
        }
        ++compared;
        t0 = Clock::now();
        const auto b = solve_droops(prob);
        worst_bnb = std::max(worst_bnb, seconds_since(t0));
        const double max_p = p.cwiseAbs().maxCoeff();
        const double band = n * n * 1e-3 * max_p;
        c.require(b.status == DroopStatus::Optimal, "MILP optimal on a feasible instance");
        if (b.status != DroopStatus::Optimal) {
            continue;
        }
        const double gap = std::abs(b.objective - o.objective);
        worst_gap = std::max(worst_gap, band > 0.0 ? gap / band : (gap > 0.0 ? 1e9 : 0.0));
        c.require(gap <= band + 1e-12, "objective within n^2 1e-3 max|P|");
        c.require(exact_residual(prob, b.assignment.x()) <= 1e-2 * max_p, "MILP residual");
        c.require(exact_residual(prob, o.assignment.x()) <= 1e-2 * max_p, "oracle residual");
    }
    c.require(compared >= 100, "at least 100 feasible instances");

    const auto three = make_problem(300.0, Eigen::Vector3d::Constant(10.0), Eigen::Vector3d(0.9, 0.5, 0.1),
                                    Eigen::Vector3d::Constant(0.95), -3);
    const Eigen::Vector3d expected(15.789, 142.105, 142.105);
    const auto o = solve_exact_oracle(three);
    const auto b = solve_droops(three);
    c.require(o.status == DroopStatus::Optimal && (o.assignment.x() - expected).cwiseAbs().maxCoeff() <= 1e-3,
              "three-converter oracle");
    c.require(b.status == DroopStatus::Optimal && (b.assignment.x() - expected).cwiseAbs().maxCoeff() <= 1e-1,
              "three-converter MILP");
    c.require(worst_oracle < 10e-3, "oracle runtime");
    c.require(worst_bnb < 10.0, "MILP runtime");
    c.detail << compared << " instances, worst gap " << worst_gap << " of band, oracle max " << worst_oracle * 1e3
             << " ms, MILP max " << worst_bnb << " s";
}

void trivial_optimum(Check& c)
{
    for (int n = 2; n <= 6; ++n) {
        const auto prob = make_problem(600.0, Eigen::VectorXd::Constant(n, 10.0), Eigen::VectorXd::Zero(n),
                                       Eigen::VectorXd::Constant(n, 0.95));
        const double eq = 600.0 / n;
        for (const auto& sol : {solve_exact_oracle(prob), solve_droops(prob)}) {
            c.require(sol.status == DroopStatus::Optimal, "optimal");
            c.require((sol.assignment.x().array() == eq).all(), "exactly alpha/n");
            c.require(sol.objective == 0.0, "objective exactly 0");
        }
    }
    c.detail << "n=2..6, oracle and MILP";
}

void h2_closed_forms(Check& c)
{
    std::mt19937 rng(4242);
    double worst = 0.0;
    int cases = 0;
    for (int n = 2; n <= 10; ++n) {
        const auto gs = graphs(n, rng);
        for (double k : {0.005, 0.01, 0.05}) {
            for (double tau : {0.01, 0.02, 0.1}) {
                const double closed = (n - 1) * k * k / (2.0 * tau);
                for (const auto& L : gs) {
                    const double h = h2_norm(reduce_grounded(assemble_model(L, Eigen::VectorXd::Constant(n, k), tau)));
                    worst = std::max(worst, std::abs(h - closed) / closed);
                    ++cases;
                }
            }
        }
    }
    c.require(worst <= 1e-8, "equal-gain closed form");

    double worst_sub = 0.0;
    for (double k : {0.005, 0.01, 0.05}) {
        for (double tau : {0.01, 0.02, 0.1}) {
            for (double b : {0.5, 3.0, 20.0}) {
                const double closed = k * k / (2.0 * tau);
                worst_sub = std::max(worst_sub, std::abs(attached_subsystem_h2(k, b, tau) - closed) / closed);
            }
        }
    }
    c.require(worst_sub <= 1e-8, "subsystem closed form");

    double worst_dec = 0.0;
    std::uniform_real_distribution<double> kd(0.002, 0.08);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 7;
        Eigen::VectorXd k(n);
        for (int i = 0; i < n; ++i) {
            k(i) = kd(rng);
        }
        const auto gs = graphs(n, rng);
        const auto base = assemble_model(gs[static_cast<std::size_t>(trial % 4)], k, 0.02);
        worst_dec = std::max(worst_dec, h2_decomposition_check(base, kd(rng), kd(rng), 1.0 + trial % 3, 2.0).relative_gap());
    }
    c.require(worst_dec <= 1e-8, "full vs decomposed");

    const double sigma = 0.02;
    const auto base = assemble_model(graphs(4, rng)[2], Eigen::VectorXd::Constant(4, 0.01), 0.02);
    double best_eps = 1e9;
    double best_k1 = -1.0;
    for (int s = 1; s < 100; ++s) {
        const double k1 = sigma * s / 100.0;
        const auto d = h2_decomposition_check(base, k1, sigma - k1);
        if (d.epsilon < best_eps) {
            best_eps = d.epsilon;
            best_k1 = k1;
        }
    }
    c.require(std::abs(best_k1 - sigma / 2.0) <= 1e-15, "sweep minimiser at k1 = k2");
    c.require(std::abs(best_eps - sigma * sigma / 2.0) <= 1e-15, "sweep minimum sigma^2/2");
    c.detail << cases << " graph cases, worst rel " << worst << ", subsystem " << worst_sub << ", decomposition "
             << worst_dec;
}

SimulationOptions long_run()
{
    SimulationOptions o;
    o.t_end = 400.0;
    o.sample_interval = 0.05;
    return o;
}

void ssfd_independence(Check& c)
{
    const auto s = nswph();
    const auto step = parse_event("wind:W1:-250@1", s.base);
    const auto eq = simulate(s, DroopAssignment::equal(6, 600.0), {step}, long_run());
    const auto sp = simulate(s, spread_droops(), {step}, long_run());
    const double w_eq = eq.mean_frequency(eq.samples() - 1);
    const double w_sp = sp.mean_frequency(sp.samples() - 1);
    const double expected = -250.0 / 1850.0 / 600.0;
    c.require(std::abs(expected - (-2.2523e-4)) <= 5e-9, "closed form -2.2523e-4");
    c.require(std::abs(w_eq - expected) <= 1e-9, "equal settles");
    c.require(std::abs(w_sp - expected) <= 1e-9, "spread settles");
    c.require(std::abs(w_eq - w_sp) <= 1e-9, "same SSFD");
    c.require(sp.peak_mean_deviation() >= eq.peak_mean_deviation(), "spread peak >= equal peak");
    c.detail << "dw_equal=" << w_eq << " dw_spread=" << w_sp << " peak_equal=" << eq.peak_mean_deviation()
             << " peak_spread=" << sp.peak_mean_deviation();
}

void ode_vs_algebra(Check& c)
{
    const auto s = nswph();
    double worst_flow = 0.0;
    double worst_cons = 0.0;
    int runs = 0;
    for (const auto& a : {DroopAssignment::equal(6, 600.0), spread_droops()}) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto tr = simulate(s, a, {parse_event("outage:" + s.converters[k].id + "@1", s.base)}, long_run());
            const auto flows = post_fault_flows(a, s, k);
            const Eigen::VectorXd p = tr.final_power();
            Eigen::Index row = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (i != k) {
                    worst_flow = std::max(worst_flow, std::abs(p(static_cast<Eigen::Index>(i)) - flows(row++)));
                }
            }
            worst_cons = std::max(worst_cons, tr.max_conservation_error);
            ++runs;
        }
    }
    c.require(worst_flow <= 1e-6, "steady state");
    c.require(worst_cons <= 1e-8, "conservation");
    c.detail << runs << " outages, worst flow error " << worst_flow << " pu, worst conservation " << worst_cons << " pu";
}

void qualitative_reproduction(Check& c)
{
    const auto g = nswph();
    const auto market = load_market_json(ZIDROOP_DATA_DIR "/bids.json", links_of(g));
    const auto hours = load_hours_csv(ZIDROOP_DATA_DIR "/hour3.csv", links_of(g));
    const auto cleared = clear_market(hours.at(0), market.fixture(hours[0].fixture));
    const auto sc = dispatch_scenario(g, cleared.flow_mw);
    std::size_t violating = 0;
    for (const auto& r : screen_all_contingencies(DroopAssignment::equal(6, 600.0), sc)) {
        violating = std::max(violating, r.violations.size());
    }
    const auto opt = solve_droops(build_exact_problem(sc, 600.0), {Backend::Oracle});
    const bool adaptive_clean = opt.status == DroopStatus::Optimal &&
                                is_n1_secure(screen_all_contingencies(opt.assignment, sc));
    c.require(violating >= 1, "equal droops violate");
    c.require(adaptive_clean, "adaptive droops secure");

    PlanningOptions eq;
    eq.policy = Policy::Equal;
    PlanningOptions ad;
    const auto he = plan_hour(hours[0], g, market, eq);
    const auto ha = plan_hour(hours[0], g, market, ad);
    const auto steps_e = he.iterations.size() - 1;
    const auto steps_a = ha.iterations.size() - 1;
    c.require(steps_e >= 1 && he.iterations[1].capacity_mw[0] == he.iterations[0].capacity_mw[0] - 50.0,
              "equal policy takes a 50 MW step");
    c.require(steps_a == 0 && ha.secure(), "adaptive policy takes no step");

    const auto t0 = Clock::now();
    const auto year = synthetic_year(g, 2030, 8760);
    const auto re = run_planning(year.hours, g, year.market, eq);
    const auto ra = run_planning(year.hours, g, year.market, ad);
    const double elapsed = seconds_since(t0);
    bool dominated = re.hours.size() == 8760 && ra.hours.size() == 8760;
    bool secure = true;
    for (std::size_t h = 0; h < ra.hours.size() && h < re.hours.size(); ++h) {
        dominated = dominated && ra.hours[h].curtailed_mwh <= re.hours[h].curtailed_mwh;
        for (const auto* r : {&re.hours[h], &ra.hours[h]}) {
            const auto fin = dispatch_scenario(g, r->final_state().flow_mw);
            secure = secure && is_n1_secure(screen_all_contingencies(r->droops, fin));
        }
    }
    c.require(dominated, "hourly curtailment dominance");
    c.require(ra.curtailed_mwh() <= re.curtailed_mwh(), "total curtailment dominance");
    c.require(secure, "final hours N-1 secure");
    c.require(elapsed < 300.0, "8760-hour runtime");
    c.detail << "hour 3: " << violating << " violation(s), " << steps_e << " vs " << steps_a
             << " steps; year curtailment " << re.curtailed_mwh() << " vs " << ra.curtailed_mwh() << " MWh in "
             << elapsed << " s";
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void determinism(Check& c)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "zidroop_acceptance";
    fs::remove_all(dir);
    const std::string cli = ZIDROOP_CLI;
    const std::string data = ZIDROOP_DATA_DIR;
    struct Run {
        std::string name;
        std::string args;
        std::vector<std::string> outputs;
    };
    // make-year first so market-loop can read its files
    const std::vector<Run> runs{
        {"make-year", "make-year --grid " + kGrid + " --year-hours 168 --out @/hours.csv --bids @/bids.json",
         {"hours.csv", "bids.json"}},
        {"solve-droops", "solve-droops --grid " + kGrid + " --out @/droops.json", {"droops.json"}},
        {"check-n1", "check-n1 --grid " + kGrid + " --droops " + (dir / "a" / "droops.json").string() + " --out @/n1.csv",
         {"n1.csv"}},
        {"h2", "h2 --grid " + kGrid + " --droops " + (dir / "a" / "droops.json").string() + " --out @/h2.json",
         {"h2.json"}},
        {"simulate",
         "simulate --grid " + kGrid + " --event wind:W1:-250@1 --event outage:UK@3 --t-end 6 --out @/traj.csv",
         {"traj.csv"}},
        {"market-loop",
         "market-loop --grid " + kGrid + " --hours " + data + "/hour3.csv --bids " + data +
             "/bids.json --policy equal --out @/m3",
         {"m3/capacities.csv", "m3/iterations.csv", "m3/summary.json", "m3/duration.csv"}},
        {"market-loop-year",
         "market-loop --grid " + kGrid + " --hours " + (dir / "a" / "hours.csv").string() + " --bids " +
             (dir / "a" / "bids.json").string() + " --out @/my",
         {"my/capacities.csv", "my/iterations.csv", "my/summary.json", "my/duration.csv"}},
    };
    std::vector<std::string> names;
    for (const auto& r : runs) {
        std::vector<std::string> bytes[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path d = dir / (rep == 0 ? "a" : "b");
            fs::create_directories(d);
            std::string args = r.args;
            for (auto pos = args.find('@'); pos != std::string::npos; pos = args.find('@', pos)) {
                if (pos + 1 < args.size() && args[pos + 1] == '/') {
                    args.replace(pos, 1, d.string());
                    pos += d.string().size();
                } else {
                    ++pos;
                }
            }
            const std::string cmd = cli + " " + args + " > " + (d / (r.name + ".stdout")).string() + " 2>&1";
            const int code = std::system(cmd.c_str());
            c.require(code == 0, r.name + " exit status");
            for (const auto& o : r.outputs) {
                bytes[rep].push_back(slurp(d / o));
            }
            bytes[rep].push_back(slurp(d / (r.name + ".stdout")));
        }
        for (std::size_t i = 0; i < bytes[0].size(); ++i) {
            c.require(!bytes[0][i].empty() || i + 1 == bytes[0].size(), r.name + " output present");
            c.require(bytes[0][i] == bytes[1][i], r.name + " byte-identical");
        }
        names.push_back(r.name);
    }
    c.detail << names.size() << " command runs compared byte for byte";
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"steady-state sharing", steady_state_sharing},
        {"optimizer equivalence", optimizer_equivalence},
        {"trivial optimum", trivial_optimum},
        {"H2 closed forms", h2_closed_forms},
        {"SSFD independence of the droop split", ssfd_independence},
        {"ODE vs algebra", ode_vs_algebra},
        {"hour-3 and synthetic-year reproduction", qualitative_reproduction},
        {"CLI determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = Clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << "exception: " << e.what();
        }
        const double t = seconds_since(t0);
        failed += c.ok ? 0 : 1;
        std::printf("criterion %zu %s: %s (%.3f s) %s\n", i + 1, criteria[i].first.c_str(), c.ok ? "PASS" : "FAIL", t,
                    c.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed;
}
