#include "zidroop/market.hpp"
#include "zidroop/scenario_io.hpp"
#include "zidroop/security.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace zidroop;
using Catch::Matchers::WithinAbs;

namespace {

GridScenario nswph() { return load_scenario(ZIDROOP_DATA_DIR "/nswph_hour3.json"); }

std::vector<std::string> links_of(const GridScenario& g)
{
    std::vector<std::string> l;
    for (const auto& c : g.converters) {
        l.push_back(c.id);
    }
    return l;
}

GridScenario three_links()
{
    GridScenario g;
    for (const char* id : {"A", "B", "C"}) {
        g.converters.push_back({id, 1850.0, 0.0, 0.95, 10.0});
    }
    g.wind.push_back({"W", 0.0});
    g.network = default_star_network(g.converters, g.wind);
    return g;
}

BidFixture flat(std::size_t n, double price = 10.0)
{
    BidFixture f;
    for (std::size_t i = 0; i < n; ++i) {
        f.curves.push_back({{1e9, price}});
    }
    return f;
}

}  // namespace

TEST_CASE("clearing corner cases", "[market]")
{
    HourScenario h;
    h.wind_mw = 1740.0;
    h.capacity_mw = {0.0, 0.0};
    auto c = clear_market(h, flat(2));
    REQUIRE(c.flow_mw == std::vector<double>{0.0, 0.0});
    REQUIRE(c.curtailed_mw == 1740.0);

    h.capacity_mw = {1000.0};
    c = clear_market(h, flat(1));
    REQUIRE(c.flow_mw[0] == 1000.0);
    REQUIRE(c.curtailed_mw == 740.0);

    // identical links: the lower index fills first
    h.capacity_mw = {1000.0, 1000.0};
    c = clear_market(h, flat(2));
    REQUIRE(c.flow_mw == std::vector<double>{1000.0, 740.0});

    // merit order by price, non-positive bids never clear
    BidFixture b;
    b.curves = {{{500.0, 20.0}, {500.0, 5.0}}, {{800.0, 12.0}}, {{2000.0, 0.0}}, {{2000.0, -3.0}}};
    h.capacity_mw = {1000.0, 1000.0, 1000.0, 1000.0};
    h.wind_mw = 1500.0;
    c = clear_market(h, b);
    REQUIRE(c.flow_mw == std::vector<double>{700.0, 800.0, 0.0, 0.0});
    REQUIRE(c.curtailed_mw == 0.0);
    REQUIRE_THAT(c.welfare, WithinAbs(500 * 20 + 800 * 12 + 200 * 5, 1e-9));
    h.wind_mw = 5000.0;
    c = clear_market(h, b);
    REQUIRE(c.flow_mw == std::vector<double>{1000.0, 800.0, 0.0, 0.0});
    REQUIRE(c.curtailed_mw == 3200.0);

    h.capacity_mw = {1000.0};
    REQUIRE_THROWS_AS(clear_market(h, b), InputError);
}

TEST_CASE("hour-3 fixture separates the policies", "[market]")
{
    const auto g = nswph();
    const auto market = load_market_json(ZIDROOP_DATA_DIR "/bids.json", links_of(g));
    const auto hours = load_hours_csv(ZIDROOP_DATA_DIR "/hour3.csv", links_of(g));
    REQUIRE(hours.size() == 1);
    REQUIRE(hours[0].capacity_mw[0] == 1740.0);

    // equal droops violate at the cleared loading
    const auto first = clear_market(hours[0], market.fixture(hours[0].fixture));
    const auto sc = dispatch_scenario(g, first.flow_mw);
    REQUIRE(!is_n1_secure(screen_all_contingencies(DroopAssignment::equal(6, 600.0), sc)));

    PlanningOptions eq;
    eq.policy = Policy::Equal;
    const auto re = plan_hour(hours[0], g, market, eq);
    PlanningOptions ad;
    const auto ra = plan_hour(hours[0], g, market, ad);

    REQUIRE(re.iterations.size() >= 2);
    REQUIRE(re.total_reduction_mw() >= 50.0);
    REQUIRE(std::fmod(re.reduced_mw(0), 50.0) == 0.0);
    REQUIRE(ra.iterations.size() == 1);
    REQUIRE(ra.total_reduction_mw() == 0.0);
    REQUIRE(ra.curtailed_mwh <= re.curtailed_mwh);
    for (const auto* r : {&re, &ra}) {
        REQUIRE(r->secure());
        const auto fin = dispatch_scenario(g, r->final_state().flow_mw);
        REQUIRE(is_n1_secure(screen_all_contingencies(r->droops, fin)));
        for (std::size_t k = 1; k < r->iterations.size(); ++k) {
            for (std::size_t l = 0; l < g.size(); ++l) {
                REQUIRE(r->iterations[k].capacity_mw[l] <= r->iterations[k - 1].capacity_mw[l]);
            }
        }
    }
    // the light converter gets the largest share
    const auto& x = ra.droops.x();
    REQUIRE(x(5) >= x.maxCoeff() - 1e-6);
}

TEST_CASE("zero wind plans immediately", "[market]")
{
    const auto g = nswph();
    const auto market = default_market(links_of(g));
    HourScenario h;
    h.capacity_mw.assign(6, 1000.0);
    for (auto pol : {Policy::Equal, Policy::Adaptive}) {
        PlanningOptions o;
        o.policy = pol;
        const auto r = plan_hour(h, g, market, o);
        REQUIRE(r.iterations.size() == 1);
        REQUIRE(r.total_reduction_mw() == 0.0);
        REQUIRE(r.curtailed_mwh == 0.0);
    }
}

TEST_CASE("a 30 MW excess takes one step", "[market]")
{
    const auto g = three_links();
    const auto market = default_market(links_of(g));
    HourScenario h;
    h.capacity_mw = {1687.5, 200.0, 200.0};
    h.wind_mw = 2087.5;
    const auto sc = dispatch_scenario(g, clear_market(h, market.fixture(h.fixture)).flow_mw);
    const auto reports = screen_all_contingencies(DroopAssignment::equal(3, 600.0), sc);
    REQUIRE(reports[1].violations.size() == 1);
    REQUIRE_THAT(reports[1].violations[0].excess * 1850.0, WithinAbs(30.0, 1e-9));

    PlanningOptions o;
    o.policy = Policy::Equal;
    const auto r = plan_hour(h, g, market, o);
    REQUIRE(r.iterations.size() == 2);
    REQUIRE(r.iterations[0].reduced_links == std::vector<std::size_t>{0});
    REQUIRE(r.reduced_mw(0) == 50.0);
    REQUIRE(r.curtailed_mwh == 50.0);
}

TEST_CASE("capacity outside the link limit is rejected", "[market]")
{
    const auto g = three_links();
    HourScenario h;
    h.capacity_mw = {1800.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(plan_hour(h, g, default_market(links_of(g)), {}), InputError);
    h.capacity_mw = {100.0, 0.0};
    REQUIRE_THROWS_AS(plan_hour(h, g, default_market(links_of(g)), {}), InputError);
    PlanningOptions o;
    o.step_mw = 0.0;
    h.capacity_mw = {100.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(plan_hour(h, g, default_market(links_of(g)), o), InputError);
}

TEST_CASE("loop terminates within the step bound", "[market]")
{
    // every link full: nothing is secure until capacities collapse
    const auto g = three_links();
    HourScenario h;
    h.capacity_mw = {1757.5, 1757.5, 1757.5};
    h.wind_mw = 6000.0;
    for (auto pol : {Policy::Equal, Policy::Adaptive}) {
        PlanningOptions o;
        o.policy = pol;
        const auto r = plan_hour(h, g, default_market(links_of(g)), o);
        REQUIRE(r.secure());
        REQUIRE(r.iterations.size() <= 3 * 36 + 1);
        REQUIRE(r.total_reduction_mw() > 0.0);
    }
}

TEST_CASE("synthetic months: dominance, security, determinism", "[market]")
{
    const auto g = nswph();
    auto year = synthetic_year(g, 7, 24 * 60);
    REQUIRE(year.hours.size() == 1440);
    PlanningOptions eq;
    eq.policy = Policy::Equal;
    PlanningOptions ad;
    const auto re = run_planning(year.hours, g, year.market, eq);
    const auto ra = run_planning(year.hours, g, year.market, ad);
    double tot_e = 0.0;
    double tot_a = 0.0;
    for (std::size_t h = 0; h < year.hours.size(); ++h) {
        const auto& he = re.hours[h];
        const auto& ha = ra.hours[h];
        REQUIRE(he.hour == year.hours[h].hour);
        REQUIRE(he.secure());
        REQUIRE(ha.secure());
        REQUIRE(ha.curtailed_mwh <= he.curtailed_mwh);
        for (std::size_t l = 0; l < g.size(); ++l) {
            REQUIRE(ha.final_state().capacity_mw[l] >= he.final_state().capacity_mw[l]);
        }
        const auto& fin = ha.final_state();
        double sum = fin.flow_mw[0] + fin.flow_mw[1] + fin.flow_mw[2] + fin.flow_mw[3] + fin.flow_mw[4] + fin.flow_mw[5];
        REQUIRE(sum + ha.curtailed_mwh == year.hours[h].wind_mw);
        tot_e += he.curtailed_mwh;
        tot_a += ha.curtailed_mwh;
    }
    REQUIRE(tot_a <= tot_e);

    const auto de = duration_curves(re);
    const auto da = duration_curves(ra);
    REQUIRE(de.links[0].hours_at_full_capacity < de.hours);
    for (const auto& l : da.links) {
        REQUIRE(l.hours_at_full_capacity == da.hours);
        REQUIRE(std::is_sorted(l.capacity_mw.rbegin(), l.capacity_mw.rend()));
        REQUIRE(std::is_sorted(l.flow_mw.rbegin(), l.flow_mw.rend()));
    }

    PlanningOptions single = ad;
    single.threads = 1;
    std::ostringstream a;
    std::ostringstream b;
    write_capacities_csv(a, ra);
    write_summary_json(a, ra);
    write_capacities_csv(b, run_planning(year.hours, g, year.market, single));
    write_summary_json(b, run_planning(year.hours, g, year.market, single));
    REQUIRE(a.str() == b.str());
}

TEST_CASE("constant capacities give flat duration curves", "[market]")
{
    const auto g = three_links();
    std::vector<HourScenario> hours(5);
    for (int i = 0; i < 5; ++i) {
        hours[static_cast<std::size_t>(i)].hour = i;
        hours[static_cast<std::size_t>(i)].capacity_mw = {300.0, 300.0, 300.0};
        hours[static_cast<std::size_t>(i)].wind_mw = 100.0 * i;
    }
    const auto d = duration_curves(run_planning(hours, g, default_market(links_of(g)), {}));
    for (const auto& l : d.links) {
        REQUIRE(l.capacity_mw == std::vector<double>(5, 300.0));
        REQUIRE(l.hours_at_full_capacity == 5);
    }
    REQUIRE(d.links[0].flow_mw == std::vector<double>{300.0, 300.0, 200.0, 100.0, 0.0});
}

TEST_CASE("hours and market files", "[market]")
{
    const std::vector<std::string> links{"A", "B"};
    std::vector<HourScenario> hours(2);
    hours[0] = {0, 1500.5, {100.0, 200.0}, "peak"};
    hours[1] = {1, 0.0, {0.0, 50.0}, "default"};
    std::stringstream s;
    write_hours_csv(s, hours, links);
    const auto back = read_hours_csv(s, links);
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].wind_mw == 1500.5);
    REQUIRE(back[0].capacity_mw == hours[0].capacity_mw);
    REQUIRE(back[0].fixture == "peak");
    REQUIRE(back[1].hour == 1);

    std::istringstream missing("hour,wind_mw,capacity_mw_A\n0,1,2\n");
    REQUIRE_THROWS_AS(read_hours_csv(missing, links), InputError);
    std::istringstream bad("hour,wind_mw,capacity_mw_A,capacity_mw_B\n0,x,2,3\n");
    REQUIRE_THROWS_AS(read_hours_csv(bad, links), InputError);
    std::istringstream short_row("hour,wind_mw,capacity_mw_A,capacity_mw_B\n0,1,2\n");
    REQUIRE_THROWS_AS(read_hours_csv(short_row, links), InputError);

    std::istringstream mj(R"({"fixtures": {"f": {"A": [[100, 5], [50, 2]]}}})");
    const auto m = read_market_json(mj, links);
    REQUIRE(m.fixture("f").curves[0].size() == 2);
    REQUIRE(m.fixture("f").curves[1].empty());
    REQUIRE_THROWS_AS(m.fixture("nope"), InputError);
    std::istringstream unknown(R"({"fixtures": {"f": {"Z": [[100, 5]]}}})");
    REQUIRE_THROWS_AS(read_market_json(unknown, links), InputError);
}
