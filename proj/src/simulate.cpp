#include "zidroop/simulate.hpp"

#include "zidroop/format.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace zidroop {

namespace {

double parse_number(const std::string& s, const std::string& context)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw InputError("bad number '" + s + "' in event " + context);
    }
    return v;
}

// Affine system for one topology: xdot = A x + f, export e = E x + e0.
struct Segment {
    std::vector<std::size_t> active;  // converter indices in service
    Eigen::MatrixXd A;
    Eigen::VectorXd f;
    Eigen::MatrixXd E;
    Eigen::VectorXd e0;
    Eigen::MatrixXd step;       // exponential stepping, when used
    Eigen::VectorXd step_bias;
};

class Simulator {
public:
    Simulator(const GridScenario& s, const DroopAssignment& a, const SimulationOptions& o)
        : scenario_(s), x_(a.x()), opt_(o), L_(laplacian(s.network)), injection_(Eigen::VectorXd::Zero(L_.rows()))
    {
        for (const auto& c : s.converters) {
            const int idx = s.network.index_of(c.id);
            if (idx < 0) {
                throw InputError("converter " + c.id + " is not a network node");
            }
            node_of_.push_back(idx);
        }
        for (const auto& w : s.wind) {
            const int idx = s.network.index_of(w.node);
            if (idx < 0) {
                throw InputError("wind node " + w.node + " is not a network node");
            }
            injection_(idx) += w.p;
        }
        in_service_.assign(s.size(), true);
    }

    void wind_step(const std::string& node, double delta)
    {
        const int idx = scenario_.network.index_of(node);
        if (idx < 0) {
            throw InputError("wind step at unknown node " + node);
        }
        if (std::find(node_of_.begin(), node_of_.end(), idx) != node_of_.end()) {
            throw InputError("wind step at converter bus " + node);
        }
        injection_(idx) += delta;
    }

    void outage(std::size_t k)
    {
        if (!in_service_[k]) {
            throw InputError("converter " + scenario_.converters[k].id + " is already out of service");
        }
        in_service_[k] = false;
        if (std::count(in_service_.begin(), in_service_.end(), true) == 0) {
            throw SimulationError("every converter is out of service");
        }
    }

    Segment build() const
    {
        Segment seg;
        std::vector<int> keep;
        for (std::size_t i = 0; i < in_service_.size(); ++i) {
            if (in_service_[i]) {
                seg.active.push_back(i);
                keep.push_back(node_of_[i]);
            }
        }
        const auto m = static_cast<Eigen::Index>(keep.size());
        // passive buses: theta_P = Lpp^-1 (P_P - Lpc theta_C)
        std::vector<int> passive;
        for (Eigen::Index i = 0; i < L_.rows(); ++i) {
            if (std::find(keep.begin(), keep.end(), static_cast<int>(i)) == keep.end()) {
                passive.push_back(static_cast<int>(i));
            }
        }
        const Eigen::MatrixXd Lred = kron_reduce(L_, keep);
        Eigen::VectorXd out_bias = Eigen::VectorXd::Zero(m);  // network outflow at theta = 0
        if (!passive.empty()) {
            const auto np = static_cast<Eigen::Index>(passive.size());
            Eigen::MatrixXd lpp(np, np);
            Eigen::MatrixXd lcp(m, np);
            Eigen::VectorXd pp(np);
            for (Eigen::Index a = 0; a < np; ++a) {
                pp(a) = injection_(passive[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < np; ++b) {
                    lpp(a, b) = L_(passive[static_cast<std::size_t>(a)], passive[static_cast<std::size_t>(b)]);
                }
                for (Eigen::Index c = 0; c < m; ++c) {
                    lcp(c, a) = L_(keep[static_cast<std::size_t>(c)], passive[static_cast<std::size_t>(a)]);
                }
            }
            out_bias = lcp * lpp.ldlt().solve(pp);
        }
        Eigen::VectorXd k(m);
        Eigen::VectorXd e_ref(m);
        for (Eigen::Index c = 0; c < m; ++c) {
            const auto i = seg.active[static_cast<std::size_t>(c)];
            k(c) = 1.0 / x_(static_cast<Eigen::Index>(i));
            e_ref(c) = scenario_.converters[i].p_ref;
        }
        // export e = -(Lred theta + bias); tau omega' = -omega + k (e - e_ref)
        seg.E = Eigen::MatrixXd::Zero(m, 2 * m);
        seg.E.leftCols(m) = -Lred;
        seg.e0 = -out_bias;
        seg.A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        seg.A.topRightCorner(m, m).setIdentity();
        seg.A.bottomLeftCorner(m, m) = -(k.asDiagonal() * Lred) / opt_.tau;
        seg.A.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m) / opt_.tau;
        seg.f = Eigen::VectorXd::Zero(2 * m);
        seg.f.tail(m) = (k.asDiagonal() * (seg.e0 - e_ref)) / opt_.tau;
        if (opt_.integrator == Integrator::MatrixExponential) {
            Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * m + 1, 2 * m + 1);
            aug.topLeftCorner(2 * m, 2 * m) = seg.A * opt_.dt;
            aug.topRightCorner(2 * m, 1) = seg.f * opt_.dt;
            const Eigen::MatrixXd ex = aug.exp();
            seg.step = ex.topLeftCorner(2 * m, 2 * m);
            seg.step_bias = ex.topRightCorner(2 * m, 1);
        }
        return seg;
    }

    /// Pre-fault equilibrium: omega = 0 and export at set-point, first angle pinned.
    Eigen::VectorXd equilibrium(const Segment& seg) const
    {
        const auto m = static_cast<Eigen::Index>(seg.active.size());
        Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * m);
        if (m < 2) {
            return state;
        }
        Eigen::VectorXd e_ref(m);
        for (Eigen::Index c = 0; c < m; ++c) {
            e_ref(c) = scenario_.converters[seg.active[static_cast<std::size_t>(c)]].p_ref;
        }
        // -Lred theta = e_ref - e0
        const Eigen::MatrixXd Lred = -seg.E.leftCols(m);
        const Eigen::VectorXd rhs = seg.e0 - e_ref;
        state.segment(1, m - 1) =
            Lred.bottomRightCorner(m - 1, m - 1).ldlt().solve(rhs.tail(m - 1));
        return state;
    }

    const std::vector<bool>& in_service() const { return in_service_; }
    double total_injection() const { return injection_.sum(); }
    const SimulationOptions& options() const { return opt_; }

private:
    const GridScenario& scenario_;
    Eigen::VectorXd x_;
    SimulationOptions opt_;
    Eigen::MatrixXd L_;
    Eigen::VectorXd injection_;
    std::vector<int> node_of_;
    std::vector<bool> in_service_;
};

void rk4(const Segment& s, Eigen::VectorXd& x, double h)
{
    const Eigen::VectorXd k1 = s.A * x + s.f;
    const Eigen::VectorXd k2 = s.A * (x + 0.5 * h * k1) + s.f;
    const Eigen::VectorXd k3 = s.A * (x + 0.5 * h * k2) + s.f;
    const Eigen::VectorXd k4 = s.A * (x + h * k3) + s.f;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Carries (theta, omega) of surviving converters into the next segment.
Eigen::VectorXd remap(const Eigen::VectorXd& x, const std::vector<std::size_t>& from,
                      const std::vector<std::size_t>& to)
{
    const auto m0 = static_cast<Eigen::Index>(from.size());
    const auto m1 = static_cast<Eigen::Index>(to.size());
    Eigen::VectorXd y(2 * m1);
    for (Eigen::Index c = 0; c < m1; ++c) {
        const auto it = std::find(from.begin(), from.end(), to[static_cast<std::size_t>(c)]);
        const auto src = static_cast<Eigen::Index>(it - from.begin());
        y(c) = x(src);
        y(m1 + c) = x(m0 + src);
    }
    return y;
}

}  // namespace

std::string SimEvent::describe(const SystemBase& base) const
{
    if (kind == Kind::Outage) {
        return "outage " + target + " at t=" + fmt_num(time) + " s";
    }
    return "wind step " + target + " " + fmt_num(from_per_unit(delta, base).value) + " MW at t=" + fmt_num(time) +
           " s";
}

SimEvent parse_event(const std::string& text, const SystemBase& base)
{
    SimEvent ev;
    std::string body = text;
    ev.time = kDefaultEventTime;
    if (const auto at = text.rfind('@'); at != std::string::npos) {
        body = text.substr(0, at);
        ev.time = parse_number(text.substr(at + 1), text);
        if (ev.time < 0.0) {
            throw InputError("event time must be nonnegative: " + text);
        }
    }
    const auto c1 = body.find(':');
    if (c1 == std::string::npos) {
        throw InputError("event must look like outage:ID@T or wind:NODE:MW@T, got " + text);
    }
    const std::string kind = body.substr(0, c1);
    const std::string rest = body.substr(c1 + 1);
    if (kind == "outage") {
        if (rest.empty()) {
            throw InputError("outage event without converter id: " + text);
        }
        ev.kind = SimEvent::Kind::Outage;
        ev.target = rest;
    } else if (kind == "wind") {
        const auto c2 = rest.rfind(':');
        if (c2 == std::string::npos || c2 == 0) {
            throw InputError("wind event must look like wind:NODE:MW@T, got " + text);
        }
        ev.kind = SimEvent::Kind::WindStep;
        ev.target = rest.substr(0, c2);
        ev.delta = to_per_unit({parse_number(rest.substr(c2 + 1), text)}, base);
    } else {
        throw InputError("unknown event kind '" + kind + "' in " + text);
    }
    return ev;
}

double Trajectory::mean_frequency(std::size_t s) const
{
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < frequency.cols(); ++i) {
        const double w = frequency(static_cast<Eigen::Index>(s), i);
        if (!std::isnan(w)) {
            sum += w;
            ++count;
        }
    }
    return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / count;
}

double Trajectory::peak_mean_deviation() const
{
    double peak = 0.0;
    for (std::size_t s = 0; s < samples(); ++s) {
        peak = std::max(peak, std::abs(mean_frequency(s)));
    }
    return peak;
}

Trajectory simulate(const GridScenario& scenario, const DroopAssignment& assignment, std::vector<SimEvent> events,
                    const SimulationOptions& options)
{
    if (!(options.dt > 0.0) || !(options.t_end >= 0.0) || !(options.tau > 0.0)) {
        throw InputError("simulation needs dt > 0, t_end >= 0 and tau > 0");
    }
    if (assignment.size() != scenario.size()) {
        throw InputError("assignment dimension does not match the scenario");
    }
    std::stable_sort(events.begin(), events.end(), [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });

    Simulator sim(scenario, assignment, options);
    const long steps = std::lround(options.t_end / options.dt);
    const long every = std::max(1L, std::lround(options.sample_interval / options.dt));
    const auto n = static_cast<Eigen::Index>(scenario.size());

    Trajectory tr;
    for (const auto& c : scenario.converters) {
        tr.ids.push_back(c.id);
    }
    tr.events = events;
    const auto rows = static_cast<Eigen::Index>(steps / every + 2);
    tr.frequency.resize(rows, n);
    tr.power.resize(rows, n);

    Segment seg = sim.build();
    Eigen::VectorXd state = sim.equilibrium(seg);

    const auto record = [&](long step) {
        const auto r = static_cast<Eigen::Index>(tr.time.size());
        const auto m = static_cast<Eigen::Index>(seg.active.size());
        tr.frequency.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
        tr.power.row(r).setZero();
        const Eigen::VectorXd e = seg.E * state + seg.e0;
        for (Eigen::Index c = 0; c < m; ++c) {
            const auto i = static_cast<Eigen::Index>(seg.active[static_cast<std::size_t>(c)]);
            tr.frequency(r, i) = state(m + c);
            tr.power(r, i) = e(c);
        }
        const double total = sim.total_injection();
        tr.max_conservation_error = std::max(tr.max_conservation_error, std::abs(e.sum() - total));
        tr.injection.push_back(total);
        tr.time.push_back(static_cast<double>(step) * options.dt);
    };

    std::size_t next_event = 0;
    const auto apply_due = [&](long step) {
        bool changed = false;
        while (next_event < events.size() && std::lround(events[next_event].time / options.dt) <= step) {
            const auto& ev = events[next_event++];
            if (ev.kind == SimEvent::Kind::Outage) {
                sim.outage(scenario.converter_index(ev.target));
            } else {
                sim.wind_step(ev.target, ev.delta);
            }
            changed = true;
        }
        if (changed) {
            const auto before = seg.active;
            seg = sim.build();
            state = remap(state, before, seg.active);
        }
    };

    record(0);
    for (long step = 0; step < steps; ++step) {
        apply_due(step);
        if (options.integrator == Integrator::RungeKutta4) {
            rk4(seg, state, options.dt);
        } else {
            state = seg.step * state + seg.step_bias;
        }
        if (!(state.norm() < options.divergence_limit)) {
            throw SimulationError("instability detected at t=" + fmt_num(static_cast<double>(step + 1) * options.dt) +
                                  " s: state norm " + fmt_num(state.norm()) + " exceeds " +
                                  fmt_num(options.divergence_limit));
        }
        if ((step + 1) % every == 0 || step + 1 == steps) {
            apply_due(step + 1);
            record(step + 1);
        }
    }
    tr.frequency.conservativeResize(static_cast<Eigen::Index>(tr.time.size()), n);
    tr.power.conservativeResize(static_cast<Eigen::Index>(tr.time.size()), n);
    return tr;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr, const SystemBase& base)
{
    out << "# f_nom_hz=" << fmt_num(base.f_nom) << " s_base_mva=" << fmt_num(base.s_base) << '\n';
    for (const auto& ev : tr.events) {
        out << "# event " << ev.describe(base) << '\n';
    }
    out << "time_s";
    for (const auto& id : tr.ids) {
        out << ",freq_pu_" << id << ",p_pu_" << id;
    }
    out << ",mean_freq_pu,mean_freq_hz\n";
    for (std::size_t s = 0; s < tr.samples(); ++s) {
        const auto r = static_cast<Eigen::Index>(s);
        out << fmt_num(tr.time[s]);
        for (Eigen::Index i = 0; i < tr.frequency.cols(); ++i) {
            out << ',' << fmt_num(tr.frequency(r, i)) << ',' << fmt_num(tr.power(r, i));
        }
        const double mean = tr.mean_frequency(s);
        out << ',' << fmt_num(mean) << ',' << fmt_num(to_hz(mean, base)) << '\n';
    }
}

}  // namespace zidroop
