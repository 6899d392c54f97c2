#include "zidroop/scenario_io.hpp"

#include "zidroop/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace zidroop {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

json parse(std::istream& in, const char* what)
{
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed ") + what + " JSON: " + e.what());
    }
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw InputError("cannot open " + path);
    }
    return f;
}

}  // namespace

GridScenario read_scenario(std::istream& in)
{
    const json j = parse(in, "scenario");
    GridScenario s;
    try {
        if (j.contains("base")) {
            const auto& b = j["base"];
            s.base.s_base = get_or(b, "s_base_mva", s.base.s_base);
            s.base.f_nom = get_or(b, "f_nom_hz", s.base.f_nom);
            s.base.omega_ref = get_or(b, "omega_ref_pu", s.base.omega_ref);
        }
        if (!(s.base.s_base > 0.0)) {
            throw InputError("s_base must be positive");
        }
        for (const auto& c : j.at("converters")) {
            Converter cv;
            cv.id = c.at("id").get<std::string>();
            cv.rating = get_or(c, "rating_mva", cv.rating);
            cv.p_ref = to_per_unit({get_or(c, "p_ref_mw", 0.0)}, s.base);
            cv.p_max = get_or(c, "p_max_pu", cv.p_max);
            cv.x_min = get_or(c, "x_min", cv.x_min);
            s.converters.push_back(cv);
        }
        if (j.contains("wind")) {
            for (const auto& w : j["wind"]) {
                s.wind.push_back({w.at("node").get<std::string>(), to_per_unit({get_or(w, "p_mw", 0.0)}, s.base)});
            }
        }
        if (j.contains("network") && !j["network"].is_null()) {
            const auto& n = j["network"];
            s.network.nodes = n.at("nodes").get<std::vector<std::string>>();
            for (const auto& e : n.at("edges")) {
                s.network.edges.push_back(
                    {e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("b_pu").get<double>()});
            }
            if (n.contains("grounded_node") && !n["grounded_node"].is_null()) {
                s.network.grounded_node = n["grounded_node"].get<std::string>();
            }
        } else {
            s.network = default_star_network(s.converters, s.wind);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario field error: ") + e.what());
    }
    return s;
}

GridScenario load_scenario(const std::string& path)
{
    auto f = open_input(path);
    return read_scenario(f);
}

void write_scenario(std::ostream& out, const GridScenario& s)
{
    json j;
    j["base"] = {{"s_base_mva", round_sig(s.base.s_base)},
                 {"f_nom_hz", round_sig(s.base.f_nom)},
                 {"omega_ref_pu", round_sig(s.base.omega_ref)}};
    j["converters"] = json::array();
    for (const auto& c : s.converters) {
        j["converters"].push_back({{"id", c.id},
                                   {"rating_mva", round_sig(c.rating)},
                                   {"p_ref_mw", round_sig(from_per_unit(c.p_ref, s.base).value)},
                                   {"p_max_pu", round_sig(c.p_max)},
                                   {"x_min", round_sig(c.x_min)}});
    }
    j["wind"] = json::array();
    for (const auto& w : s.wind) {
        j["wind"].push_back({{"node", w.node}, {"p_mw", round_sig(from_per_unit(w.p, s.base).value)}});
    }
    json net;
    net["nodes"] = s.network.nodes;
    net["edges"] = json::array();
    for (const auto& e : s.network.edges) {
        net["edges"].push_back({{"from", e.from}, {"to", e.to}, {"b_pu", round_sig(e.b)}});
    }
    if (s.network.grounded_node) {
        net["grounded_node"] = *s.network.grounded_node;
    }
    j["network"] = net;
    out << j.dump(2) << "\n";
}

void write_droops(std::ostream& out, const DroopSolution& solution, const std::vector<std::string>& ids,
                  int precision)
{
    json j;
    j["ids"] = ids;
    j["status"] = to_string(solution.status);
    j["backend"] = solution.backend;
    j["precision"] = precision;
    if (solution.has_assignment()) {
        std::vector<double> x;
        std::vector<double> k;
        for (Eigen::Index i = 0; i < solution.assignment.x().size(); ++i) {
            x.push_back(round_sig(solution.assignment.x()(i)));
            k.push_back(round_sig(1.0 / solution.assignment.x()(i)));
        }
        j["x"] = x;
        j["k_f"] = k;
        j["alpha"] = round_sig(solution.assignment.alpha());
        j["objective"] = round_sig(solution.objective);
        j["residual"] = round_sig(solution.residual);
    } else {
        j["x"] = nullptr;
        j["k_f"] = nullptr;
        j["alpha"] = nullptr;
        j["objective"] = nullptr;
        j["residual"] = nullptr;
    }
    out << j.dump(2) << "\n";
}

DroopFile read_droops(std::istream& in)
{
    const json j = parse(in, "droops");
    DroopFile f;
    try {
        if (!j.contains("x") || j["x"].is_null()) {
            throw InputError("droops file carries no assignment (status " + get_or<std::string>(j, "status", "?") +
                             ")");
        }
        const auto x = j["x"].get<std::vector<double>>();
        f.assignment = DroopAssignment(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
        f.ids = get_or(j, "ids", std::vector<std::string>{});
        const std::string st = get_or<std::string>(j, "status", "optimal");
        f.status = st == "precision-limited" ? DroopStatus::PrecisionLimited
                   : st == "limit-reached"  ? DroopStatus::LimitReached
                                            : DroopStatus::Optimal;
    } catch (const json::exception& e) {
        throw InputError(std::string("droops field error: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("droops file: ") + e.what());
    }
    return f;
}

DroopFile load_droops(const std::string& path)
{
    auto f = open_input(path);
    return read_droops(f);
}

DroopAssignment align_droops(const DroopFile& file, const GridScenario& scenario)
{
    const auto n = scenario.size();
    if (file.assignment.size() != n) {
        throw InputError("droops file has " + std::to_string(file.assignment.size()) + " entries, scenario has " +
                         std::to_string(n) + " converters");
    }
    if (file.ids.empty()) {
        return file.assignment;
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = std::find(file.ids.begin(), file.ids.end(), scenario.converters[i].id);
        if (it == file.ids.end()) {
            throw InputError("droops file lacks converter " + scenario.converters[i].id);
        }
        x(static_cast<Eigen::Index>(i)) = file.assignment.x()(static_cast<Eigen::Index>(it - file.ids.begin()));
    }
    return DroopAssignment(x);
}

}  // namespace zidroop
