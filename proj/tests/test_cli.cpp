#include "zidroop/commands.hpp"
#include "zidroop/scenario_io.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zidroop;

namespace {

const std::string kGrid = ZIDROOP_DATA_DIR "/nswph_hour3.json";

struct Result {
    int code;
    std::string out;
    std::string log;
};

Result run(const std::string& cmd, const RunConfig& c)
{
    std::ostringstream out;
    std::ostringstream log;
    const int code = run_command(cmd, c, out, log);
    return {code, out.str(), log.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("zidroop_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string write_zero_grid(const std::filesystem::path& dir)
{
    auto s = load_scenario(kGrid);
    for (auto& c : s.converters) {
        c.p_ref = 0.0;
    }
    for (auto& w : s.wind) {
        w.p = 0.0;
    }
    const auto path = (dir / "zero.json").string();
    std::ofstream f(path);
    write_scenario(f, s);
    return path;
}

}  // namespace

TEST_CASE("solve-droops exit codes", "[cli]")
{
    RunConfig c;
    c.grid = kGrid;
    c.backend = "oracle";
    c.backend_given = true;
    auto r = run("solve-droops", c);
    REQUIRE(r.code == kExitOk);
    REQUIRE(r.out.find("\"status\": \"optimal\"") != std::string::npos);

    c.alpha = 50.0;
    r = run("solve-droops", c);
    REQUIRE(r.code == kExitInfeasible);
    REQUIRE(r.log.find("stiffness target unreachable") != std::string::npos);

    RunConfig missing;
    REQUIRE(run("solve-droops", missing).code == kExitUsage);
    missing.grid = "/nonexistent.json";
    REQUIRE(run("solve-droops", missing).code == kExitUsage);
    REQUIRE(run("no-such-command", c).code == kExitUsage);

    RunConfig bad;
    bad.grid = kGrid;
    bad.precision = 2;
    REQUIRE(run("solve-droops", bad).code == kExitUsage);
}

TEST_CASE("zero loading writes equal droops", "[cli]")
{
    const auto dir = scratch("zero");
    RunConfig c;
    c.grid = write_zero_grid(dir);
    const auto r = run("solve-droops", c);
    REQUIRE(r.code == kExitOk);
    std::istringstream in(r.out);
    const auto f = read_droops(in);
    REQUIRE((f.assignment.x().array() == 100.0).all());
}

TEST_CASE("analytic instance through the CLI", "[cli]")
{
    const auto dir = scratch("three");
    GridScenario s;
    const double p[3] = {0.9, 0.5, 0.1};
    for (int i = 0; i < 3; ++i) {
        s.converters.push_back({"C" + std::to_string(i + 1), 1850.0, p[i], 0.95, 10.0});
    }
    s.wind.push_back({"W", 1.5});
    s.network = default_star_network(s.converters, s.wind);
    const auto grid = (dir / "three.json").string();
    {
        std::ofstream f(grid);
        write_scenario(f, s);
    }
    RunConfig c;
    c.grid = grid;
    c.alpha = 300.0;
    const auto r = run("solve-droops", c);
    REQUIRE(r.code == kExitOk);
    std::istringstream in(r.out);
    const auto x = read_droops(in).assignment.x();
    REQUIRE(std::abs(x(0) - 15.789) < 0.1);
    REQUIRE(std::abs(x(1) - 142.105) < 0.1);
    REQUIRE(std::abs(x(2) - 142.105) < 0.1);
}

TEST_CASE("droops file feeds every consumer", "[cli]")
{
    const auto dir = scratch("round");
    RunConfig c;
    c.grid = kGrid;
    c.backend = "oracle";
    c.backend_given = true;
    c.out = (dir / "droops.json").string();
    REQUIRE(run("solve-droops", c).code == kExitOk);

    RunConfig use;
    use.grid = kGrid;
    use.droops = c.out;
    auto n1 = run("check-n1", use);
    REQUIRE(n1.code == kExitOk);
    // no row carries a violation
    std::istringstream rows(n1.out);
    std::string line;
    std::getline(rows, line);
    int count = 0;
    while (std::getline(rows, line)) {
        ++count;
        REQUIRE(line.find(",0,") != std::string::npos);
    }
    REQUIRE(count == 30);

    REQUIRE(run("h2", use).code == kExitOk);
    use.t_end = 1.0;
    REQUIRE(run("simulate", use).code == kExitOk);

    RunConfig eq;
    eq.grid = kGrid;
    REQUIRE(run("check-n1", eq).code == kExitInsecure);
}

TEST_CASE("h2 on equal gains matches the closed form", "[cli]")
{
    RunConfig c;
    c.grid = kGrid;
    c.tau = 0.05;
    const auto r = run("h2", c);
    REQUIRE(r.code == kExitOk);
    const double expected = 5.0 * 0.01 * 0.01 / (2.0 * 0.05);
    const auto j = r.out;
    REQUIRE(j.find("\"closed_form_squared\": 0.005") != std::string::npos);
    REQUIRE(j.find("\"h2_squared\": 0.005") != std::string::npos);
    REQUIRE(expected == 0.005);
}

TEST_CASE("simulate reproduces the outage steady state", "[cli]")
{
    RunConfig c;
    c.grid = kGrid;
    c.events = {"outage:UK@1"};
    c.t_end = 300.0;
    c.sample = 1.0;
    const auto r = run("simulate", c);
    REQUIRE(r.code == kExitOk);
    REQUIRE(r.out.find("# event outage UK at t=1 s") != std::string::npos);
    const auto last = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
    // DE settles at 800 MW + 348 MW
    REQUIRE(last.find("nan,0,0.00188108108108,0.620540540541") != std::string::npos);

    c.events = {"wind:HUB2:-5@1"};
    REQUIRE(run("simulate", c).code == kExitUsage);
    c.events = {"outage:UK"};
    c.integrator = "euler";
    REQUIRE(run("simulate", c).code == kExitUsage);
}

TEST_CASE("market loop writes its artifacts", "[cli]")
{
    const auto dir = scratch("market");
    RunConfig c;
    c.grid = kGrid;
    c.hours = ZIDROOP_DATA_DIR "/hour3.csv";
    c.bids = ZIDROOP_DATA_DIR "/bids.json";
    c.policy = "equal";
    c.out = (dir / "equal").string();
    REQUIRE(run("market-loop", c).code == kExitOk);
    for (const char* f : {"capacities.csv", "iterations.csv", "summary.json", "duration.csv"}) {
        REQUIRE(std::filesystem::exists(dir / "equal" / f));
    }
    REQUIRE(slurp(dir / "equal" / "summary.json").find("\"reduction_steps\": 3") != std::string::npos);
    c.policy = "adaptive";
    c.out = (dir / "adaptive").string();
    REQUIRE(run("market-loop", c).code == kExitOk);
    REQUIRE(slurp(dir / "adaptive" / "summary.json").find("\"reduction_steps\": 0") != std::string::npos);
    c.policy = "greedy";
    REQUIRE(run("market-loop", c).code == kExitUsage);
}

TEST_CASE("commands are deterministic", "[cli]")
{
    const auto dir = scratch("det");
    RunConfig year;
    year.grid = kGrid;
    year.year_hours = 96;
    year.out = (dir / "hours.csv").string();
    year.bids = (dir / "bids.json").string();
    REQUIRE(run("make-year", year).code == kExitOk);
    const auto hours_a = slurp(dir / "hours.csv");
    REQUIRE(run("make-year", year).code == kExitOk);
    REQUIRE(slurp(dir / "hours.csv") == hours_a);

    RunConfig c;
    c.grid = kGrid;
    c.hours = year.out;
    c.bids = year.bids;
    c.events = {"wind:W1:-250@0.5", "outage:NO@2"};
    c.t_end = 4.0;
    for (const char* cmd : {"solve-droops", "check-n1", "h2", "simulate", "market-loop"}) {
        const auto a = run(cmd, c);
        const auto b = run(cmd, c);
        REQUIRE(a.out == b.out);
        REQUIRE(a.code == b.code);
        REQUIRE(!a.out.empty());
    }
}
