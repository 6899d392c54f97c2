#include "zidroop/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zidroop {

double pow10(int e)
{
    double v = 1.0;
    if (e >= 0) {
        for (int i = 0; i < e; ++i) {
            v *= 10.0;
        }
        return v;
    }
    for (int i = 0; i < -e; ++i) {
        v *= 10.0;
    }
    return 1.0 / v;
}

int digit_at(double value, int place, int psi)
{
    const auto units = static_cast<long long>(std::llround(value / pow10(psi)));
    long long div = 1;
    for (int p = psi; p < place; ++p) {
        div *= 10;
    }
    return static_cast<int>((units / div) % 10);
}

int MilpModel::family_index(DigitFamily::Kind kind, int owner, int place) const
{
    if (kind == DigitFamily::Kind::Alpha) {
        return owner * places_b() + (place - psi);
    }
    return n * places_b() + owner * places_d() + (place - psi);
}

namespace {

std::string idx(int a) { return std::to_string(a + 1); }

}  // namespace

MilpModel build_milp(const DroopProblem& problem)
{
    MilpModel m;
    const int n = problem.size();
    m.n = n;
    m.psi = problem.precision;
    m.eta_b = problem.eta_b;
    m.eta_d = problem.eta_d;
    auto& lp = m.lp;
    const double alpha = problem.alpha;
    const double sum_min = problem.x_min.sum();

    // Continuous variables.
    for (int i = 0; i < n; ++i) {
        m.x.push_back(lp.add_column(problem.x_min(i), problem.x_upper(i), 0.0, "x_" + idx(i)));
    }
    for (int k = 0; k < n; ++k) {
        const double lo = alpha - problem.x_upper(k);
        const double hi = alpha - problem.x_min(k);
        m.alpha_k.push_back(lp.add_column(lo, hi, 0.0, "alpha_" + idx(k)));
    }
    for (int k = 0; k < n; ++k) {
        m.s_bar.push_back(1.0 / (sum_min - problem.x_min(k)));
        m.sigma.push_back(lp.add_column(1.0 / (alpha - problem.x_min(k)), m.s_bar.back(), 0.0, "sigma_" + idx(k)));
    }
    m.z.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            if (i != k) {
                const double hi = std::min(1.0, problem.x_upper(i) * m.s_bar[static_cast<std::size_t>(k)]);
                m.z[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                    lp.add_column(0.0, hi, 0.0, "z_" + idx(k) + "_" + idx(i));
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int c = i + 1; c < n; ++c) {
            m.t.push_back(lp.add_column(0.0, alpha, 1.0, "t_" + idx(i) + "_" + idx(c)));
        }
    }

    // Stiffness and the outage stiffness alpha_k = alpha - x_k.
    {
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < n; ++i) {
            row.emplace_back(m.x[static_cast<std::size_t>(i)], 1.0);
        }
        lp.add_row(alpha, alpha, row, "stiffness");
    }
    for (int k = 0; k < n; ++k) {
        lp.add_row(alpha, alpha, {{m.alpha_k[static_cast<std::size_t>(k)], 1.0}, {m.x[static_cast<std::size_t>(k)], 1.0}},
                   "outage_stiffness_" + idx(k));
    }

    // Digit families, all alpha_k families first so family_index() holds.
    auto make_family = [&](DigitFamily::Kind kind, int owner, int place, double upper, const std::string& tag) {
        DigitFamily f;
        f.kind = kind;
        f.owner = owner;
        f.place = place;
        const double unit = pow10(place);
        for (int a = 0; a < 10; ++a) {
            // a digit whose own contribution already exceeds the variable's bound can never be chosen
            const double hi = a * unit > upper * (1.0 + 1e-12) ? 0.0 : 1.0;
            f.y_hi[static_cast<std::size_t>(a)] = hi;
            f.y[static_cast<std::size_t>(a)] =
                lp.add_column(0.0, hi, 0.0, tag + "_" + std::to_string(a) + "_" + std::to_string(place));
            m.binaries.push_back(f.y[static_cast<std::size_t>(a)]);
        }
        m.families.push_back(f);
    };
    for (int k = 0; k < n; ++k) {
        for (int b = m.psi; b <= m.eta_b; ++b) {
            make_family(DigitFamily::Kind::Alpha, k, b, alpha - problem.x_min(k), "ya_" + idx(k));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int d = m.psi; d <= m.eta_d; ++d) {
            make_family(DigitFamily::Kind::X, i, d, problem.x_upper(i), "yx_" + idx(i));
        }
    }

    // One active digit per place.
    for (const auto& f : m.families) {
        std::vector<std::pair<int, double>> row;
        for (int a = 0; a < 10; ++a) {
            row.emplace_back(f.y[static_cast<std::size_t>(a)], 1.0);
        }
        lp.add_row(1.0, 1.0, row,
                   std::string(f.kind == DigitFamily::Kind::Alpha ? "one_digit_a_" : "one_digit_x_") + idx(f.owner) +
                       "_" + std::to_string(f.place));
    }

    // Digit expansions of alpha_k and x_i.
    for (int k = 0; k < n; ++k) {
        std::vector<std::pair<int, double>> row{{m.alpha_k[static_cast<std::size_t>(k)], -1.0}};
        for (int b = m.psi; b <= m.eta_b; ++b) {
            const auto& f = m.families[static_cast<std::size_t>(m.family_index(DigitFamily::Kind::Alpha, k, b))];
            for (int a = 1; a < 10; ++a) {
                row.emplace_back(f.y[static_cast<std::size_t>(a)], a * pow10(b));
            }
        }
        lp.add_row(0.0, 0.0, row, "alpha_digits_" + idx(k));
    }
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> row{{m.x[static_cast<std::size_t>(i)], -1.0}};
        for (int d = m.psi; d <= m.eta_d; ++d) {
            const auto& f = m.families[static_cast<std::size_t>(m.family_index(DigitFamily::Kind::X, i, d))];
            for (int a = 1; a < 10; ++a) {
                row.emplace_back(f.y[static_cast<std::size_t>(a)], a * pow10(d));
            }
        }
        lp.add_row(0.0, 0.0, row, "x_digits_" + idx(i));
    }

    // Reciprocal coupling sigma_k * alpha_k = 1.
    for (int k = 0; k < n; ++k) {
        const double sb = m.s_bar[static_cast<std::size_t>(k)];
        const int sk = m.sigma[static_cast<std::size_t>(k)];
        std::vector<std::pair<int, double>> product;
        for (int b = m.psi; b <= m.eta_b; ++b) {
            const auto& f = m.families[static_cast<std::size_t>(m.family_index(DigitFamily::Kind::Alpha, k, b))];
            std::vector<std::pair<int, double>> copy{{sk, -1.0}};
            for (int a = 0; a < 10; ++a) {
                const std::string tag = idx(k) + "_" + std::to_string(a) + "_" + std::to_string(b);
                const int sh = lp.add_column(0.0, sb, 0.0, "sha_" + tag);
                m.sigma_hat_alpha.push_back(sh);
                copy.emplace_back(sh, 1.0);
                if (a > 0) {
                    product.emplace_back(sh, a * pow10(b));
                }
                lp.add_row(-lp::kInf, 0.0, {{sh, 1.0}, {f.y[static_cast<std::size_t>(a)], -sb}}, "sha_bound_" + tag);
            }
            lp.add_row(0.0, 0.0, copy, "sigma_copy_a_" + idx(k) + "_" + std::to_string(b));
        }
        lp.add_row(1.0, 1.0, product, "reciprocal_" + idx(k));
    }

    // Shares z_ki = sigma_k * x_i.
    for (int k = 0; k < n; ++k) {
        const double sb = m.s_bar[static_cast<std::size_t>(k)];
        const int sk = m.sigma[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            if (i == k) {
                continue;
            }
            const int zki = m.z[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            std::vector<std::pair<int, double>> product{{zki, -1.0}};
            for (int d = m.psi; d <= m.eta_d; ++d) {
                const auto& f = m.families[static_cast<std::size_t>(m.family_index(DigitFamily::Kind::X, i, d))];
                std::vector<std::pair<int, double>> copy{{sk, -1.0}};
                for (int a = 0; a < 10; ++a) {
                    const std::string tag =
                        idx(k) + "_" + idx(i) + "_" + std::to_string(a) + "_" + std::to_string(d);
                    const int sh = lp.add_column(0.0, sb, 0.0, "shx_" + tag);
                    m.sigma_hat_x.push_back(sh);
                    copy.emplace_back(sh, 1.0);
                    if (a > 0) {
                        product.emplace_back(sh, a * pow10(d));
                    }
                    lp.add_row(-lp::kInf, 0.0, {{sh, 1.0}, {f.y[static_cast<std::size_t>(a)], -sb}},
                               "shx_bound_" + tag);
                }
                lp.add_row(0.0, 0.0, copy, "sigma_copy_x_" + idx(k) + "_" + idx(i) + "_" + std::to_string(d));
            }
            lp.add_row(0.0, 0.0, product, "share_" + idx(k) + "_" + idx(i));
        }
    }

    // Linear security constraints |P_i + z_ki P_k| <= p_max_i.
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            if (i == k) {
                continue;
            }
            const double pi = problem.p_ref(i);
            const double pm = problem.p_max(i);
            lp.add_row(-pm - pi, pm - pi,
                       {{m.z[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)], problem.p_ref(k)}},
                       "security_" + idx(k) + "_" + idx(i));
        }
    }

    // Spread epigraph.
    std::size_t tp = 0;
    for (int i = 0; i < n; ++i) {
        for (int c = i + 1; c < n; ++c) {
            const int t = m.t[tp++];
            const int xi = m.x[static_cast<std::size_t>(i)];
            const int xc = m.x[static_cast<std::size_t>(c)];
            lp.add_row(0.0, lp::kInf, {{t, 1.0}, {xi, -1.0}, {xc, 1.0}});
            lp.add_row(0.0, lp::kInf, {{t, 1.0}, {xi, 1.0}, {xc, -1.0}});
        }
    }
    return m;
}

void fix_digits(const MilpModel& model, const Eigen::VectorXd& x_values, lp::DualSimplex& simplex)
{
    const double alpha = [&] {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x_values.size(); ++i) {
            s += x_values(i);
        }
        return s;
    }();
    for (const auto& f : model.families) {
        const double v = f.kind == DigitFamily::Kind::X ? x_values(f.owner) : alpha - x_values(f.owner);
        const int digit = digit_at(v, f.place, model.psi);
        for (int a = 0; a < 10; ++a) {
            const double fixed = a == digit ? 1.0 : 0.0;
            simplex.set_column_bounds(f.y[static_cast<std::size_t>(a)], fixed, fixed);
        }
    }
}

}  // namespace zidroop
