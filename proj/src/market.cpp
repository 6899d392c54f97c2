#include "zidroop/market.hpp"

#include "zidroop/format.hpp"
#include "zidroop/security.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace zidroop {

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? std::string{} : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double to_double(const std::string& s, const std::string& where)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw InputError("bad number '" + s + "' " + where);
    }
    return v;
}

std::vector<double> link_limits_mw(const GridScenario& grid)
{
    std::vector<double> lim;
    for (const auto& c : grid.converters) {
        lim.push_back(c.rating * c.p_max);
    }
    return lim;
}

std::vector<std::size_t> violated_links(const std::vector<ContingencyReport>& reports, const GridScenario& s)
{
    std::vector<bool> hit(s.size(), false);
    for (const auto& r : reports) {
        for (const auto& v : r.violations) {
            hit[s.converter_index(v.converter_id)] = true;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < hit.size(); ++i) {
        if (hit[i]) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

const BidFixture& MarketData::fixture(const std::string& id) const
{
    const auto it = fixtures.find(id);
    if (it == fixtures.end()) {
        throw InputError("unknown bid fixture '" + id + "'");
    }
    return it->second;
}

MarketData default_market(const std::vector<std::string>& links)
{
    MarketData m;
    m.links = links;
    BidFixture f;
    for (std::size_t i = 0; i < links.size(); ++i) {
        f.curves.push_back({{1e12, 1.0}});
    }
    m.fixtures[kDefaultFixture] = f;
    return m;
}

Clearing clear_market(const HourScenario& hour, const BidFixture& bids)
{
    const std::size_t n = hour.capacity_mw.size();
    if (bids.curves.size() != n) {
        throw InputError("bid fixture covers " + std::to_string(bids.curves.size()) + " links, hour has " +
                         std::to_string(n));
    }
    struct Offer {
        double price;
        std::size_t link;
        std::size_t segment;
        double quantity;
    };
    std::vector<Offer> offers;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < bids.curves[i].size(); ++s) {
            const auto& seg = bids.curves[i][s];
            if (seg.price > 0.0 && seg.quantity_mw > 0.0) {
                offers.push_back({seg.price, i, s, seg.quantity_mw});
            }
        }
    }
    std::sort(offers.begin(), offers.end(), [](const Offer& a, const Offer& b) {
        if (a.price != b.price) {
            return a.price > b.price;
        }
        return a.link != b.link ? a.link < b.link : a.segment < b.segment;
    });

    Clearing c;
    c.flow_mw.assign(n, 0.0);
    double remaining = std::max(0.0, hour.wind_mw);
    for (const auto& o : offers) {
        if (remaining <= 0.0) {
            break;
        }
        const double room = std::max(0.0, hour.capacity_mw[o.link]) - c.flow_mw[o.link];
        const double q = std::min({o.quantity, room, remaining});
        if (q <= 0.0) {
            continue;
        }
        c.flow_mw[o.link] += q;
        remaining -= q;
        c.welfare += q * o.price;
    }
    c.curtailed_mw = std::max(0.0, hour.wind_mw) - std::accumulate(c.flow_mw.begin(), c.flow_mw.end(), 0.0);
    return c;
}

const char* to_string(Policy policy) { return policy == Policy::Equal ? "equal" : "adaptive"; }

Policy parse_policy(const std::string& name)
{
    if (name == "equal") {
        return Policy::Equal;
    }
    if (name == "adaptive") {
        return Policy::Adaptive;
    }
    throw InputError("unknown policy '" + name + "' (expected equal or adaptive)");
}

double HourRecord::reduced_mw(std::size_t link) const
{
    return offered_mw.at(link) - final_state().capacity_mw.at(link);
}

double HourRecord::total_reduction_mw() const
{
    double total = 0.0;
    for (std::size_t i = 0; i < offered_mw.size(); ++i) {
        total += reduced_mw(i);
    }
    return total;
}

double PlanningRun::curtailed_mwh() const
{
    double total = 0.0;
    for (const auto& h : hours) {
        total += h.curtailed_mwh;
    }
    return total;
}

GridScenario dispatch_scenario(const GridScenario& grid, const std::vector<double>& flow_mw)
{
    if (flow_mw.size() != grid.size()) {
        throw InputError("flow vector does not match the converters");
    }
    GridScenario s = grid;
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        s.converters[i].p_ref = to_per_unit({flow_mw[i]}, s.base);
        total += s.converters[i].p_ref;
    }
    if (!s.wind.empty()) {
        const double template_total = grid.total_wind();
        for (auto& w : s.wind) {
            w.p = template_total > 0.0 ? total * (w.p / template_total) : total / static_cast<double>(s.wind.size());
        }
    }
    return s;
}

HourRecord plan_hour(const HourScenario& hour, const GridScenario& grid, const MarketData& market,
                     const PlanningOptions& options)
{
    if (!(options.step_mw > 0.0)) {
        throw InputError("step_mw must be positive");
    }
    const std::size_t n = grid.size();
    if (hour.capacity_mw.size() != n) {
        throw InputError("hour " + std::to_string(hour.hour) + " lists " + std::to_string(hour.capacity_mw.size()) +
                         " capacities for " + std::to_string(n) + " links");
    }
    const auto limits = link_limits_mw(grid);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = hour.capacity_mw[i];
        if (!(c >= 0.0) || c > limits[i] * (1.0 + 1e-12)) {
            throw InputError("hour " + std::to_string(hour.hour) + ": capacity " + fmt_num(c) + " MW on " +
                             grid.converters[i].id + " outside [0, " + fmt_num(limits[i]) + "]");
        }
    }
    const BidFixture& bids = market.fixture(hour.fixture);
    const auto equal = DroopAssignment::equal(n, options.alpha);

    HourRecord rec;
    rec.hour = hour.hour;
    rec.wind_mw = hour.wind_mw;
    rec.offered_mw = hour.capacity_mw;
    HourScenario cur = hour;

    long guard = 1;
    for (std::size_t i = 0; i < n; ++i) {
        guard += static_cast<long>(std::ceil(hour.capacity_mw[i] / options.step_mw));
    }
    for (long iter = 0;; ++iter) {
        const Clearing clr = clear_market(cur, bids);
        const GridScenario sc = dispatch_scenario(grid, clr.flow_mw);
        PlanningIteration it;
        it.capacity_mw = cur.capacity_mw;
        it.flow_mw = clr.flow_mw;

        const auto equal_reports = screen_all_contingencies(equal, sc);
        std::vector<std::size_t> violated;
        if (options.policy == Policy::Equal) {
            it.droops_found = true;
            it.secure = is_n1_secure(equal_reports);
            rec.droops = equal;
            violated = violated_links(equal_reports, sc);
        } else {
            auto problem = build_exact_problem(sc, options.alpha, options.precision);
            problem.p_max = (problem.p_max.array() - kPlanningMargin).cwiseMax(0.0);
            const auto sol = solve_droops(problem, options.solver);
            if (sol.status == DroopStatus::Optimal && sol.has_assignment()) {
                it.droops_found = true;
                const auto reports = screen_all_contingencies(sol.assignment, sc);
                it.secure = is_n1_secure(reports);
                rec.droops = sol.assignment;
                violated = violated_links(reports, sc);
            }
            if (!it.secure) {
                violated = violated_links(equal_reports, sc);
            }
        }
        if (!it.secure && violated.empty()) {
            // no link to blame: trim the heaviest one
            const auto heaviest = std::max_element(clr.flow_mw.begin(), clr.flow_mw.end());
            violated.push_back(static_cast<std::size_t>(heaviest - clr.flow_mw.begin()));
        }
        if (it.secure) {
            rec.curtailed_mwh = clr.curtailed_mw;
            rec.iterations.push_back(std::move(it));
            break;
        }
        if (iter > guard) {
            throw std::logic_error("capacity loop failed to terminate in hour " + std::to_string(hour.hour));
        }
        for (auto i : violated) {
            cur.capacity_mw[i] = std::max(0.0, cur.capacity_mw[i] - options.step_mw);
        }
        it.reduced_links = violated;
        rec.iterations.push_back(std::move(it));
    }
    return rec;
}

PlanningRun run_planning(const std::vector<HourScenario>& hours, const GridScenario& grid, const MarketData& market,
                         const PlanningOptions& options)
{
    PlanningRun run;
    run.policy = options.policy;
    for (const auto& c : grid.converters) {
        run.links.push_back(c.id);
    }
    run.hours.resize(hours.size());
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, hours.size())));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < hours.size(); i = next++) {
            try {
                run.hours[i] = plan_hour(hours[i], grid, market, options);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = hours.size();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return run;
}

DurationSummary duration_curves(const PlanningRun& run)
{
    DurationSummary d;
    d.hours = static_cast<int>(run.hours.size());
    d.curtailed_mwh = run.curtailed_mwh();
    for (std::size_t l = 0; l < run.links.size(); ++l) {
        LinkDuration ld;
        ld.link = run.links[l];
        for (const auto& h : run.hours) {
            ld.capacity_mw.push_back(h.final_state().capacity_mw[l]);
            ld.flow_mw.push_back(h.final_state().flow_mw[l]);
            if (h.reduced_mw(l) == 0.0) {
                ++ld.hours_at_full_capacity;
            }
        }
        std::sort(ld.capacity_mw.begin(), ld.capacity_mw.end(), std::greater<>());
        std::sort(ld.flow_mw.begin(), ld.flow_mw.end(), std::greater<>());
        d.links.push_back(std::move(ld));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Files

std::vector<HourScenario> read_hours_csv(std::istream& in, const std::vector<std::string>& links)
{
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line.find_first_not_of(" \t\r") != std::string::npos) {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) {
        throw InputError("hours CSV is empty");
    }
    const auto column = [&](const std::string& name, bool required) -> int {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            if (required) {
                throw InputError("hours CSV lacks column " + name);
            }
            return -1;
        }
        return static_cast<int>(it - header.begin());
    };
    const int c_hour = column("hour", true);
    const int c_wind = column("wind_mw", true);
    const int c_fix = column("fixture", false);
    std::vector<int> c_cap;
    for (const auto& l : links) {
        c_cap.push_back(column("capacity_mw_" + l, true));
    }

    std::vector<HourScenario> hours;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != header.size()) {
            throw InputError("hours CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        }
        const std::string where = "on hours CSV line " + std::to_string(line_no);
        HourScenario h;
        h.hour = static_cast<int>(to_double(f[static_cast<std::size_t>(c_hour)], where));
        h.wind_mw = to_double(f[static_cast<std::size_t>(c_wind)], where);
        for (int c : c_cap) {
            h.capacity_mw.push_back(to_double(f[static_cast<std::size_t>(c)], where));
        }
        if (c_fix >= 0 && !f[static_cast<std::size_t>(c_fix)].empty()) {
            h.fixture = f[static_cast<std::size_t>(c_fix)];
        }
        hours.push_back(std::move(h));
    }
    return hours;
}

std::vector<HourScenario> load_hours_csv(const std::string& path, const std::vector<std::string>& links)
{
    std::ifstream f(path);
    if (!f) {
        throw InputError("cannot open " + path);
    }
    return read_hours_csv(f, links);
}

void write_hours_csv(std::ostream& out, const std::vector<HourScenario>& hours, const std::vector<std::string>& links)
{
    out << "hour,wind_mw";
    for (const auto& l : links) {
        out << ",capacity_mw_" << l;
    }
    out << ",fixture\n";
    for (const auto& h : hours) {
        out << h.hour << ',' << fmt_num(h.wind_mw);
        for (double c : h.capacity_mw) {
            out << ',' << fmt_num(c);
        }
        out << ',' << h.fixture << '\n';
    }
}

MarketData read_market_json(std::istream& in, const std::vector<std::string>& links)
{
    using nlohmann::json;
    MarketData m;
    m.links = links;
    try {
        const json j = json::parse(in);
        for (const auto& [id, fx] : j.at("fixtures").items()) {
            BidFixture f;
            for (const auto& l : links) {
                BidCurve curve;
                if (fx.contains(l)) {
                    for (const auto& seg : fx.at(l)) {
                        if (!seg.is_array() || seg.size() != 2) {
                            throw InputError("fixture " + id + " link " + l + ": segments are [quantity_mw, price]");
                        }
                        curve.push_back({seg[0].get<double>(), seg[1].get<double>()});
                    }
                }
                f.curves.push_back(std::move(curve));
            }
            for (const auto& [l, _] : fx.items()) {
                if (std::find(links.begin(), links.end(), l) == links.end()) {
                    throw InputError("fixture " + id + " names unknown link " + l);
                }
            }
            m.fixtures[id] = std::move(f);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed market JSON: ") + e.what());
    }
    return m;
}

MarketData load_market_json(const std::string& path, const std::vector<std::string>& links)
{
    std::ifstream f(path);
    if (!f) {
        throw InputError("cannot open " + path);
    }
    return read_market_json(f, links);
}

void write_market_json(std::ostream& out, const MarketData& market)
{
    using nlohmann::ordered_json;
    ordered_json fixtures = ordered_json::object();
    for (const auto& [id, f] : market.fixtures) {
        ordered_json fx = ordered_json::object();
        for (std::size_t l = 0; l < market.links.size() && l < f.curves.size(); ++l) {
            ordered_json curve = ordered_json::array();
            for (const auto& seg : f.curves[l]) {
                curve.push_back({round_sig(seg.quantity_mw), round_sig(seg.price)});
            }
            fx[market.links[l]] = curve;
        }
        fixtures[id] = fx;
    }
    ordered_json j;
    j["fixtures"] = fixtures;
    out << j.dump(2) << '\n';
}

void write_capacities_csv(std::ostream& out, const PlanningRun& run)
{
    out << "hour,link,capacity_mw,flow_mw,reduced_mw,secure\n";
    for (const auto& h : run.hours) {
        const auto& fin = h.final_state();
        for (std::size_t l = 0; l < run.links.size(); ++l) {
            out << h.hour << ',' << run.links[l] << ',' << fmt_num(fin.capacity_mw[l]) << ','
                << fmt_num(fin.flow_mw[l]) << ',' << fmt_num(h.reduced_mw(l)) << ',' << (fin.secure ? 1 : 0) << '\n';
        }
    }
}

void write_iterations_csv(std::ostream& out, const PlanningRun& run)
{
    out << "hour,iteration,link,capacity_mw,flow_mw,droops_found,secure\n";
    for (const auto& h : run.hours) {
        for (std::size_t k = 0; k < h.iterations.size(); ++k) {
            const auto& it = h.iterations[k];
            for (std::size_t l = 0; l < run.links.size(); ++l) {
                out << h.hour << ',' << k << ',' << run.links[l] << ',' << fmt_num(it.capacity_mw[l]) << ','
                    << fmt_num(it.flow_mw[l]) << ',' << (it.droops_found ? 1 : 0) << ',' << (it.secure ? 1 : 0)
                    << '\n';
            }
        }
    }
}

void write_summary_json(std::ostream& out, const PlanningRun& run)
{
    using nlohmann::ordered_json;
    const auto d = duration_curves(run);
    ordered_json j;
    j["policy"] = to_string(run.policy);
    j["hours"] = d.hours;
    j["curtailed_mwh"] = round_sig(d.curtailed_mwh);
    ordered_json full = ordered_json::object();
    ordered_json reduced = ordered_json::object();
    for (std::size_t l = 0; l < d.links.size(); ++l) {
        full[d.links[l].link] = d.links[l].hours_at_full_capacity;
        double sum = 0.0;
        for (const auto& h : run.hours) {
            sum += h.reduced_mw(l);
        }
        reduced[d.links[l].link] = round_sig(sum);
    }
    j["hours_at_full_capacity"] = full;
    j["reduced_mwh"] = reduced;
    long steps = 0;
    int secure = 0;
    for (const auto& h : run.hours) {
        for (const auto& it : h.iterations) {
            steps += static_cast<long>(it.reduced_links.size());
        }
        secure += h.secure() ? 1 : 0;
    }
    j["reduction_steps"] = steps;
    j["secure_hours"] = secure;
    out << j.dump(2) << '\n';
}

void write_duration_csv(std::ostream& out, const DurationSummary& summary)
{
    out << "link,rank,capacity_mw,flow_mw\n";
    for (const auto& l : summary.links) {
        for (std::size_t r = 0; r < l.capacity_mw.size(); ++r) {
            out << l.link << ',' << r << ',' << fmt_num(l.capacity_mw[r]) << ',' << fmt_num(l.flow_mw[r]) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Synthetic year

SyntheticYear synthetic_year(const GridScenario& grid, unsigned seed, int hours)
{
    const std::size_t n = grid.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // offered capacities: the heaviest link near its limit, the rest at ~45%
    // of theirs, so that adaptive droops keep every hour secure
    const auto limits = link_limits_mw(grid);
    std::vector<double> base_offer(n);
    for (std::size_t i = 0; i < n; ++i) {
        base_offer[i] = i == 0 ? 0.99 * limits[i] : (i + 1 == n && n > 2 ? 0.17 : 0.455) * limits[i];
    }
    double installed = 0.0;
    for (double b : base_offer) {
        installed += b;
    }
    installed *= 1.15;

    SyntheticYear y;
    y.market.links.clear();
    for (const auto& c : grid.converters) {
        y.market.links.push_back(c.id);
    }
    // hub-side price levels; the first link is the most valuable market
    BidFixture peak;
    BidFixture offpeak;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = 90.0 - 8.0 * static_cast<double>(i);
        const double q = 0.6 * limits[i];
        peak.curves.push_back({{q, p}, {limits[i] - q, p - 25.0}});
        offpeak.curves.push_back({{q, 0.6 * p + 3.0 * static_cast<double>(i % 3)}, {limits[i] - q, 0.3 * p}});
    }
    y.market.fixtures["peak"] = peak;
    y.market.fixtures["offpeak"] = offpeak;

    double ar = 0.0;
    std::vector<int> derate_hours(n, 0);
    for (int h = 0; h < hours; ++h) {
        const double day = h / 24.0;
        ar = 0.97 * ar + 0.24 * noise(rng);
        const double cf = std::clamp(0.5 + 0.18 * std::cos(2.0 * std::numbers::pi * (day - 15.0) / 365.0) + ar, 0.0, 1.0);
        HourScenario hs;
        hs.hour = h;
        hs.wind_mw = std::round(cf * installed);
        for (std::size_t i = 0; i < n; ++i) {
            if (derate_hours[i] == 0 && unit(rng) < 0.002) {
                derate_hours[i] = 6 + static_cast<int>(unit(rng) * 42.0);
            }
            double offer = base_offer[i] * (0.9 + 0.1 * unit(rng));
            if (derate_hours[i] > 0) {
                offer *= 0.5;
                --derate_hours[i];
            }
            hs.capacity_mw.push_back(std::round(std::min(offer, limits[i])));
        }
        const int hod = h % 24;
        hs.fixture = hod >= 7 && hod < 22 ? "peak" : "offpeak";
        y.hours.push_back(std::move(hs));
    }
    return y;
}

}  // namespace zidroop
