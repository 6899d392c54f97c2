#include "zidroop/external_backend.hpp"

#include "zidroop/format.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace zidroop {

namespace {

std::string col_name(const lp::LinearProgram& lp, int j)
{
    const auto& s = lp.col_names[static_cast<std::size_t>(j)];
    return s.empty() ? "C" + std::to_string(j) : s;
}

std::string row_name(const lp::LinearProgram& lp, int i)
{
    const auto& s = lp.row_names[static_cast<std::size_t>(i)];
    return s.empty() ? "R" + std::to_string(i) : s;
}

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') {
            q += "'\\''";
        } else {
            q += c;
        }
    }
    return q + "'";
}

}  // namespace

void write_mps(std::ostream& out, const lp::LinearProgram& lp, const std::vector<int>& integer_columns,
               const std::string& name)
{
    const std::set<int> ints(integer_columns.begin(), integer_columns.end());
    std::vector<std::vector<std::pair<int, double>>> by_col(static_cast<std::size_t>(lp.cols()));
    for (const auto& e : lp.entries) {
        by_col[static_cast<std::size_t>(e.col())].emplace_back(e.row(), e.value());
    }

    out << "NAME " << name << "\n";
    out << "ROWS\n N obj\n";
    for (int i = 0; i < lp.rows(); ++i) {
        const double lo = lp.row_lo[static_cast<std::size_t>(i)];
        const double hi = lp.row_hi[static_cast<std::size_t>(i)];
        char type = 'E';
        if (lo == hi) {
            type = 'E';
        } else if (std::isfinite(lo) && !std::isfinite(hi)) {
            type = 'G';
        } else if (!std::isfinite(lo) && std::isfinite(hi)) {
            type = 'L';
        } else if (std::isfinite(lo) && std::isfinite(hi)) {
            type = 'L';  // ranged below
        } else {
            type = 'N';
        }
        out << ' ' << type << ' ' << row_name(lp, i) << "\n";
    }
    out << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (int j = 0; j < lp.cols(); ++j) {
        const bool is_int = ints.count(j) > 0;
        if (is_int != in_int) {
            out << " M" << marker++ << " 'MARKER' " << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
            in_int = is_int;
        }
        const std::string cn = col_name(lp, j);
        const double c = lp.cost[static_cast<std::size_t>(j)];
        if (c != 0.0) {
            out << ' ' << cn << " obj " << fmt_num(c) << "\n";
        }
        for (const auto& [r, v] : by_col[static_cast<std::size_t>(j)]) {
            out << ' ' << cn << ' ' << row_name(lp, r) << ' ' << fmt_num(v) << "\n";
        }
        if (c == 0.0 && by_col[static_cast<std::size_t>(j)].empty()) {
            out << ' ' << cn << " obj 0\n";
        }
    }
    if (in_int) {
        out << " M" << marker++ << " 'MARKER' 'INTEND'\n";
    }
    out << "RHS\n";
    for (int i = 0; i < lp.rows(); ++i) {
        const double lo = lp.row_lo[static_cast<std::size_t>(i)];
        const double hi = lp.row_hi[static_cast<std::size_t>(i)];
        double rhs = 0.0;
        if (lo == hi || (std::isfinite(lo) && !std::isfinite(hi))) {
            rhs = lo;
        } else if (std::isfinite(hi)) {
            rhs = hi;
        }
        if (rhs != 0.0) {
            out << " rhs " << row_name(lp, i) << ' ' << fmt_num(rhs) << "\n";
        }
    }
    out << "RANGES\n";
    for (int i = 0; i < lp.rows(); ++i) {
        const double lo = lp.row_lo[static_cast<std::size_t>(i)];
        const double hi = lp.row_hi[static_cast<std::size_t>(i)];
        if (lo != hi && std::isfinite(lo) && std::isfinite(hi)) {
            out << " rng " << row_name(lp, i) << ' ' << fmt_num(hi - lo) << "\n";
        }
    }
    out << "BOUNDS\n";
    for (int j = 0; j < lp.cols(); ++j) {
        const std::string cn = col_name(lp, j);
        const double lo = lp.col_lo[static_cast<std::size_t>(j)];
        const double hi = lp.col_hi[static_cast<std::size_t>(j)];
        if (lo == hi) {
            out << " FX bnd " << cn << ' ' << fmt_num(lo) << "\n";
            continue;
        }
        if (lo != 0.0) {
            if (std::isfinite(lo)) {
                out << " LO bnd " << cn << ' ' << fmt_num(lo) << "\n";
            } else {
                out << " MI bnd " << cn << "\n";
            }
        }
        if (std::isfinite(hi)) {
            out << " UP bnd " << cn << ' ' << fmt_num(hi) << "\n";
        } else {
            out << " PL bnd " << cn << "\n";
        }
    }
    out << "ENDATA\n";
}

ExternalSolution read_solution(std::istream& in)
{
    ExternalSolution sol;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') {
            continue;
        }
        if (key == "status") {
            ls >> sol.status;
            continue;
        }
        double v = 0.0;
        if (ls >> v) {
            sol.values[key] = v;
        }
    }
    if (sol.status.empty()) {
        throw std::runtime_error("external solver wrote no status line");
    }
    return sol;
}

DroopSolution solve_external(const MilpModel& model, const DroopProblem& problem, const ExternalOptions& options)
{
    if (options.command.empty()) {
        throw InputError("external backend selected but no solver command given");
    }
    namespace fs = std::filesystem;
    const fs::path dir = options.work_dir.empty() ? fs::temp_directory_path() : fs::path(options.work_dir);
    const std::string stem = "zidroop_" + std::to_string(::getpid());
    const fs::path mps = dir / (stem + ".mps");
    const fs::path out = dir / (stem + ".sol");
    {
        std::ofstream f(mps);
        if (!f) {
            throw std::runtime_error("cannot write " + mps.string());
        }
        write_mps(f, model.lp, model.binaries);
    }
    const std::string cmd = options.command + " " + quote(mps.string()) + " " + quote(out.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        throw std::runtime_error("external solver command failed (" + std::to_string(rc) + "): " + cmd);
    }
    std::ifstream f(out);
    if (!f) {
        throw std::runtime_error("external solver wrote no solution file " + out.string());
    }
    const ExternalSolution ext = read_solution(f);
    std::error_code ec;
    fs::remove(mps, ec);
    fs::remove(out, ec);

    DroopSolution sol;
    sol.backend = "external";
    if (ext.status == "infeasible") {
        sol.status = DroopStatus::Infeasible;
        return sol;
    }
    if (ext.status != "optimal") {
        sol.status = DroopStatus::LimitReached;
        return sol;
    }
    const double unit = pow10(model.psi);
    Eigen::VectorXd x(problem.size());
    for (int i = 0; i < problem.size(); ++i) {
        const std::string name = col_name(model.lp, model.x[static_cast<std::size_t>(i)]);
        const auto it = ext.values.find(name);
        if (it == ext.values.end()) {
            throw std::runtime_error("external solution lacks column " + name);
        }
        x(i) = std::round(it->second / unit) * unit;
    }
    sol.assignment = DroopAssignment(x);
    sol.objective = pairwise_spread(x);
    sol.residual = exact_residual(problem, x);
    sol.status = sol.residual > residual_tolerance(problem) ? DroopStatus::PrecisionLimited : DroopStatus::Optimal;
    return sol;
}

}  // namespace zidroop
