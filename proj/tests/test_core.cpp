#include "zidroop/scenario_io.hpp"
#include "zidroop/security.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace zidroop;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GridScenario hour3() { return load_scenario(ZIDROOP_DATA_DIR "/nswph_hour3.json"); }

GridScenario make(const std::vector<double>& p_ref)
{
    GridScenario s;
    double total = 0.0;
    for (std::size_t i = 0; i < p_ref.size(); ++i) {
        s.converters.push_back({"C" + std::to_string(i + 1), 1850.0, p_ref[i], 0.95, 10.0});
        total += p_ref[i];
    }
    s.wind.push_back({"W", total});
    s.network = default_star_network(s.converters, s.wind);
    return s;
}

}  // namespace

TEST_CASE("per-unit conversion", "[core]")
{
    const SystemBase base;
    REQUIRE_THAT(to_per_unit({1740.0}, base), WithinRel(0.94054054054054, 1e-12));
    REQUIRE(to_per_unit({0.0}, base) == 0.0);
    REQUIRE(to_per_unit({1850.0}, base) == 1.0);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> d(-5000.0, 5000.0);
    for (int i = 0; i < 1000; ++i) {
        const double mw = d(rng);
        REQUIRE_THAT(from_per_unit(to_per_unit({mw}, base), base).value, WithinRel(mw, 1e-12));
    }
    REQUIRE_THAT(to_hz(1.8811e-3, base), WithinRel(0.094055, 1e-12));
}

TEST_CASE("scenario validation", "[core]")
{
    const auto s = hour3();
    REQUIRE(validate_scenario(s).empty());

    auto dup = s;
    dup.converters[1].id = "UK";
    dup.network = default_star_network(dup.converters, dup.wind);
    REQUIRE(validate_scenario(dup).contains("duplicate id"));
    REQUIRE(!validate_scenario(dup).ok());

    auto over = s;
    over.converters[0].p_ref = 0.96;
    REQUIRE(validate_scenario(over).contains("set-point exceeds limit"));

    auto imbalance = s;
    imbalance.converters[5].p_ref += 0.01;
    const auto r = validate_scenario(imbalance);
    REQUIRE(r.ok());
    REQUIRE(!r.empty());

    auto cut = s;
    cut.network.edges.pop_back();
    REQUIRE(validate_scenario(cut).contains("disconnected graph"));
    REQUIRE_THROWS_AS(require_valid(cut), InputError);

    auto single = make({0.0});
    REQUIRE(!validate_scenario(single).ok());
}

TEST_CASE("Laplacian spectrum of valid graphs", "[core]")
{
    const auto s = hour3();
    const Eigen::MatrixXd L = laplacian(s.network);
    REQUIRE(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    REQUIRE(std::abs(es.eigenvalues()(0)) < 1e-9);
    REQUIRE(es.eigenvalues()(1) > 0.0);
}

TEST_CASE("assignments", "[core]")
{
    const auto a = DroopAssignment::equal(6, 600.0);
    REQUIRE(a.alpha() == 600.0);
    REQUIRE((a.x().array() == 100.0).all());
    REQUIRE(((a.k_f().array() * a.x().array()) == 1.0).all());
    REQUIRE_THROWS_AS(DroopAssignment(Eigen::Vector2d(1.0, -1.0)), InputError);
    const auto s = hour3();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 100.0);
    x(2) = 5.0;
    REQUIRE(validate_assignment(DroopAssignment(x), s).contains("below x_min"));
}

TEST_CASE("droop response and SSFD", "[security]")
{
    REQUIRE(droop_response(0.5, 100.0, 0.0) == 0.5);
    REQUIRE_THAT(droop_response(0.5, 100.0, 1.881e-3), WithinAbs(0.6881, 1e-12));
    REQUIRE_THAT(droop_response(0.0, 10.0, -2e-3), WithinAbs(-0.02, 1e-15));

    const auto s = hour3();
    const auto eq = DroopAssignment::equal(6, 600.0);
    REQUIRE_THAT(ssfd(eq, s, "UK"), WithinAbs(1740.0 / 1850.0 / 500.0, 1e-15));
    REQUIRE_THAT(ssfd(eq, s, "UK"), WithinAbs(1.8811e-3, 1e-7));

    auto two = make({0.5, -0.5});
    REQUIRE_THAT(ssfd(DroopAssignment(Eigen::Vector2d(10.0, 590.0)), two, 0), WithinRel(0.5 / 590.0, 1e-14));
    REQUIRE_THAT(0.5 / 590.0, WithinAbs(8.4746e-4, 1e-8));
    auto idle = make({0.0, 0.0, 0.0});
    REQUIRE(ssfd(DroopAssignment::equal(3, 300.0), idle, 1) == 0.0);
    REQUIRE_THROWS_AS(ssfd(eq, s, "XX"), InputError);
    REQUIRE_THROWS_AS(ssfd(DroopAssignment::equal(1, 10.0), make({0.0}), 0), InputError);
}

TEST_CASE("post-fault flows", "[security]")
{
    auto s = make({0.94054054054054, 0.5, 0.5, 0.5, 0.5, 0.5});
    const auto eq = DroopAssignment::equal(6, 600.0);
    const auto f = post_fault_flows(eq, s, 0);
    REQUIRE(f.size() == 5);
    for (Eigen::Index i = 0; i < 5; ++i) {
        REQUIRE_THAT(f(i), WithinAbs(0.68811, 1e-5));
        REQUIRE_THAT((f(i) - 0.5) * 1850.0, WithinAbs(348.0, 1e-9));
    }
    s.converters[1].p_ref = 0.9;
    const auto r = analyse_outage(eq, s, 0);
    REQUIRE_THAT(r.post_fault_flows(0), WithinAbs(1.0881, 1e-4));
    REQUIRE(r.violations.size() == 1);
    REQUIRE(r.violations[0].converter_id == "C2");

    auto idle = make({0.0, 0.3, -0.3});
    const auto g = post_fault_flows(DroopAssignment::equal(3, 300.0), idle, 0);
    REQUIRE(g(0) == 0.3);
    REQUIRE(g(1) == -0.3);

    // equal droops on hour 3 are insecure
    REQUIRE(!is_n1_secure(screen_all_contingencies(eq, hour3())));
    const auto zero = make({0.0, 0.0, 0.0, 0.0});
    REQUIRE(is_n1_secure(screen_all_contingencies(DroopAssignment::equal(4, 600.0), zero)));
}

TEST_CASE("sharing properties on random cases", "[security]")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> p(-0.9, 0.9);
    std::uniform_real_distribution<double> xd(10.0, 200.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 7;
        std::vector<double> pr;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            pr.push_back(p(rng));
            x(i) = xd(rng);
        }
        const auto s = make(pr);
        const DroopAssignment a(x);
        for (int k = 0; k < n; ++k) {
            const auto f = post_fault_flows(a, s, static_cast<std::size_t>(k));
            const double dw = ssfd(a, s, static_cast<std::size_t>(k));
            double redistributed = 0.0;
            Eigen::Index row = 0;
            for (int i = 0; i < n; ++i) {
                if (i == k) {
                    continue;
                }
                redistributed += f(row) - pr[static_cast<std::size_t>(i)];
                REQUIRE_THAT(f(row), WithinAbs(droop_response(pr[static_cast<std::size_t>(i)], x(i), dw), 1e-14));
                ++row;
            }
            REQUIRE_THAT(redistributed, WithinAbs(pr[static_cast<std::size_t>(k)], 1e-12 * (1.0 + std::abs(pr[static_cast<std::size_t>(k)]))));

            // scale covariance
            auto scaled = pr;
            for (auto& v : scaled) {
                v *= 0.5;
            }
            const auto s2 = make(scaled);
            REQUIRE_THAT(ssfd(a, s2, static_cast<std::size_t>(k)), WithinAbs(0.5 * dw, 1e-15));
        }
        // a larger x_i increases its share of any other outage
        if (n >= 3) {
            Eigen::VectorXd y = x;
            y(0) += 5.0;
            REQUIRE(outage_share(y, 1, 0) > outage_share(x, 1, 0));
        }
    }
}

TEST_CASE("contingency CSV", "[security]")
{
    const auto s = hour3();
    std::ostringstream out;
    write_contingency_csv(out, screen_all_contingencies(DroopAssignment::equal(6, 600.0), s), s);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "outage_id,converter_id,p_pre_mw,p_post_mw,limit_mw,violation_mw,ssfd_hz");
    std::getline(in, line);
    REQUIRE(line == "UK,DE,800,1148,1757.5,0,0.0940540540541");
    int rows = 1;
    while (std::getline(in, line)) {
        ++rows;
    }
    REQUIRE(rows == 30);
}

TEST_CASE("scenario JSON round trip", "[io]")
{
    const auto s = hour3();
    std::stringstream buf;
    write_scenario(buf, s);
    const auto back = read_scenario(buf);
    REQUIRE(back.size() == s.size());
    REQUIRE(back.network.nodes == s.network.nodes);
    for (std::size_t i = 0; i < s.size(); ++i) {
        REQUIRE(back.converters[i].id == s.converters[i].id);
        REQUIRE_THAT(back.converters[i].p_ref, WithinRel(s.converters[i].p_ref, 1e-11));
    }
    std::istringstream junk("{not json");
    REQUIRE_THROWS_AS(read_scenario(junk), InputError);
    std::istringstream no_conv(R"({"base": {"s_base_mva": 100}})");
    REQUIRE_THROWS_AS(read_scenario(no_conv), InputError);
    REQUIRE_THROWS_AS(load_scenario("/nonexistent/grid.json"), InputError);
}

TEST_CASE("droops JSON round trip and alignment", "[io]")
{
    const auto s = hour3();
    DroopSolution sol;
    sol.status = DroopStatus::Optimal;
    Eigen::VectorXd x(6);
    x << 10.5, 117.9, 117.9, 117.9, 117.9, 117.9;
    sol.assignment = DroopAssignment(x);
    sol.backend = "oracle";
    std::vector<std::string> ids{"NO", "DE", "NL", "BE", "DK", "UK"};
    std::stringstream buf;
    write_droops(buf, sol, ids, -3);
    const auto text = buf.str();
    REQUIRE(text.find("\"k_f\"") != std::string::npos);
    REQUIRE(text.find("\"status\": \"optimal\"") != std::string::npos);
    const auto f = read_droops(buf);
    const auto a = align_droops(f, s);
    REQUIRE(a.x()(0) == 117.9);  // UK
    REQUIRE(a.x()(5) == 10.5);   // NO

    DroopSolution bad;
    bad.status = DroopStatus::Infeasible;
    std::stringstream none;
    write_droops(none, bad, ids, -3);
    REQUIRE_THROWS_AS(read_droops(none), InputError);

    DroopFile wrong = f;
    wrong.ids[0] = "XX";
    REQUIRE_THROWS_AS(align_droops(wrong, s), InputError);
}
