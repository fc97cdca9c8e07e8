// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mdode/experiments.hpp"
#include "mdode/fields.hpp"
#include "mdode/integration.hpp"
#include "mdode/quadrature.hpp"
#include "mdode/slowfast.hpp"
#include "mdode/solver.hpp"
#include "mdode/topology.hpp"

using namespace mdode;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, double seconds, double limit, const std::string& detail) {
    const bool in_time = seconds <= limit;
    if (!(pass && in_time)) ++failures;
    std::printf("criterion %2d: %s  (%.2fs / %.0fs)  %s%s\n", id, pass && in_time ? "PASS" : "FAIL", seconds, limit,
                detail.c_str(), in_time ? "" : "  [time limit exceeded]");
    std::fflush(stdout);
}

template <class Fn>
void run(int id, double limit, Fn&& body) {
    const auto t0 = Clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail += std::string(" exception: ") + e.what();
        pass = false;
    }
    report(id, pass, std::chrono::duration<double>(Clock::now() - t0).count(), limit, detail);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Random piecewise-linear curve on I with knots uniformly inside the ball of radius r.
Curve random_curve(std::mt19937_64& rng, Interval I, std::size_t dim, double r, int knots = 6) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec ts(knots);
    std::vector<Vec> ps(knots);
    for (int k = 0; k < knots; ++k) {
        ts[k] = I.a + I.length() * k / (knots - 1);
        Vec p(dim);
        double n;
        do {
            for (auto& v : p) v = u(rng);
            n = norm2(p);
        } while (n > 1.0);
        for (auto& v : p) v *= r * 0.999;
        ps[k] = p;
    }
    return Curve::piecewise_linear(ts, ps);
}

// y(s) = c0 + sum a_k sin(w_k s + p_k), one smooth curve per component.
Curve random_smooth_curve(std::mt19937_64& rng, Interval I, std::size_t dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::array<double, 7>> coef(dim);
    for (auto& c : coef)
        for (auto& v : c) v = u(rng);
    return Curve::from_function(I, dim, [coef](double s, std::span<double> out) {
        for (std::size_t i = 0; i < coef.size(); ++i) {
            const auto& c = coef[i];
            out[i] = c[0] + 0.5 * c[1] * std::sin(3 * c[2] * s + c[3]) + 0.3 * c[4] * std::cos(5 * c[5] * s + c[6]);
        }
    });
}

CaratheodoryField random_smooth_field(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> c(5 * dim * dim);
    for (auto& v : c) v = u(rng);
    CaratheodoryField f;
    f.dim = dim;
    f.g = [c, dim](std::span<const double> y, double t, std::span<double> out) {
        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double* a = &c[5 * (i * dim + k)];
                s += a[0] * std::sin(a[1] * y[k] + a[2] * t) + a[3] * y[k] * std::cos(a[4] * t);
            }
            out[i] = s;
        }
    };
    return f;
}

fields::Table bundled_table() {
    const Vec ys{-3.0, -1.0, 0.0, 1.5, 3.0};
    const Vec ts{-2.0, 0.0, 0.5, 2.0, 4.0};
    std::vector<Vec> g{{1.0, 0.5, -0.2, 0.0, 2.0},
                       {0.0, -1.0, 1.0, 0.3, 0.1},
                       {-0.5, 0.2, 0.8, -1.2, 0.4},
                       {1.1, 0.0, -0.7, 0.9, -0.3},
                       {0.4, 1.6, 0.0, -0.8, 1.0}};
    return fields::Table(ys, ts, g);
}

struct NamedField {
    std::string name;
    ParametricMeasure nu;
    bool singular;
};

std::vector<NamedField> bundled_fields() {
    std::vector<NamedField> out;
    out.push_back({"riccati-cantor", fields::RiccatiCantor().measure(), true});
    out.push_back({"linear-1d", fields::Linear(1, {-1.0}, {0.5}).measure(), false});
    out.push_back({"linear-2d", fields::Linear(2, {-0.5, 1.0, -1.0, -0.5}, {0.2, -0.1}).measure(), false});
    out.push_back({"table", bundled_table().measure(), false});
    return out;
}

}  // namespace

int main() {
    // 1. Forcing amplitude and unit mass of one Cantor-iteration bump.
    run(1, 1.0, [](std::string& d) {
        const CantorForcing cf;
        const double expected = std::pow(1.5, 10);  // exactly representable
        double mass = 0.0;
        for (const auto& [a, b] : cf.intervals()) mass += (b - a) * cf.f_val();
        const double integral = cf.single().eval({-1.0, 2.0});
        d = "f_val=" + fmt("%.10f", cf.f_val()) + " |int f - 1|=" + fmt("%.2e", std::abs(integral - 1.0));
        return cf.f_val() == expected && std::abs(integral - 1.0) <= 1e-12 && std::abs(mass - 1.0) <= 1e-12 &&
               cf.intervals().size() == 1024u;
    });

    // 2. Euler telescopes exactly for state-independent measures.
    run(2, 1.0, [](std::string& d) {
        const auto c = BMeasure::cantor();
        const auto nu = constant_parametric(c, PositiveMeasure(c));
        double worst = 0.0;
        for (double h : {1e-1, 1e-2, 1e-3}) {
            const auto path = solve_euler(nu, 0.0, Vec{0.0}, 1.0, h);
            for (std::size_t k = 0; k < path.size(); ++k)
                worst = std::max(worst, std::abs(path.values[k][0] - cantor_cdf(path.times[k])));
        }
        d = "max residual=" + fmt("%.2e", worst);
        return worst <= 1e-12;
    });

    // 3. Curve integrals of lifted Caratheodory fields against direct quadrature.
    run(3, 30.0, [](std::string& d) {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ua(-1.0, 0.5), ul(0.3, 2.0);
        QuadratureOptions q;
        q.abs_tol = 1e-13;
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            const std::size_t dim = s % 2 == 0 ? 1 : 2;
            const auto field = random_smooth_field(rng, dim);
            const double a = ua(rng);
            const Interval I{a, a + ul(rng)};
            const auto y = random_smooth_curve(rng, I, dim);
            const auto nu = from_caratheodory(field, q);
            IntegrationOptions opts;
            opts.tol = 1e-10;
            const auto got = integrate_along(nu, y, I, opts);
            auto direct = [&](double t, std::span<double> out) { field.g(y(t), t, out); };
            const auto ref = integrate_vector(direct, dim, I.a, I.b, q);
            const double rel = distance_inf(got.value, ref.value) / norm_inf(ref.value);
            worst = std::max(worst, rel);
        }
        d = "max rel err=" + fmt("%.2e", worst);
        return worst <= 1e-6;
    });

    // 4. Both integral bounds along random curve pairs inside B_j.
    run(4, 60.0, [](std::string& d) {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> ua(-1.0, 2.0), ul(0.05, 1.5);
        std::uniform_int_distribution<int> uj(1, 3);
        const auto fs = bundled_fields();
        int violations = 0;
        double m_ratio = 0.0, l_ratio = 0.0;
        for (int s = 0; s < 1000; ++s) {
            const auto& f = fs[s % fs.size()];
            const int j = uj(rng);
            const double a = ua(rng);
            const Interval I{a, a + ul(rng)};
            const auto x = random_curve(rng, I, f.nu.input_dim(), j);
            const auto y = random_curve(rng, I, f.nu.input_dim(), j);
            IntegrationOptions opts;
            opts.tol = default_integration_tol(f.singular);
            const auto r = check_bounds_along(f.nu, x, y, I, j, opts);
            if (!r.m_bound_holds || !r.l_bound_holds) ++violations;
            m_ratio = std::max(m_ratio, r.m_ratio);
            l_ratio = std::max(l_ratio, r.l_ratio);
        }
        d = "violations=" + std::to_string(violations) + " max m-ratio=" + fmt("%.3f", m_ratio) +
            " max l-ratio=" + fmt("%.3f", l_ratio);
        return violations == 0;
    });

    // 5. Translation identity for curve integrals.
    run(5, 30.0, [](std::string& d) {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ut(-2.0, 2.0), ua(-1.0, 2.0), ul(0.1, 1.5);
        const auto fs = bundled_fields();
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const auto& f = fs[s % fs.size()];
            const double a = ua(rng);
            const Interval I{a, a + ul(rng)};
            const auto y = random_curve(rng, I, f.nu.input_dim(), 2.0);
            IntegrationOptions opts;
            opts.tol = default_integration_tol(f.singular);
            const auto c = translation_identity_check(f.nu, y, ut(rng), 1e-8, opts);
            worst = std::max(worst, c.residual);
        }
        d = "max residual=" + fmt("%.2e", worst);
        return worst <= 1e-8;
    });

    // 6. Picard windows contract and agree with a fine Euler solve.
    run(6, 60.0, [](std::string& d) {
        const auto nu = fields::RiccatiCantor().measure();
        double worst_c = 0.0, worst_diff = 0.0;
        for (double y0 : {0.0, 1.0, -1.0, 2.0}) {
            const auto res = solve_picard(nu, 0.0, Vec{y0}, 2.0, {});
            double dmin = INFINITY;
            for (const auto& w : res.windows) {
                worst_c = std::max(worst_c, w.contraction);
                dmin = std::min(dmin, w.delta);
            }
            const auto euler = solve_euler(nu, 0.0, Vec{y0}, 2.0, dmin / 2048.0).curve();
            for (std::size_t k = 0; k < res.path.size(); ++k)
                worst_diff = std::max(worst_diff, std::abs(euler(res.path.times[k])[0] - res.path.values[k][0]));
        }
        d = "max contraction=" + fmt("%.3f", worst_c) + " max |picard - euler|=" + fmt("%.2e", worst_diff);
        return worst_c <= 0.55 && worst_diff <= 1e-3;
    });

    // 7. Skew-product cocycle.
    run(7, 60.0, [](std::string& d) {
        const fields::RiccatiCantor field;
        const auto nu = field.measure();
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> ut(0.0, 1.5), uy(-1.0, 2.0);
        const double h = 1e-3;
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const double t1 = ut(rng), t2 = ut(rng);
            const Vec y0{uy(rng)};
            const auto whole = solve_euler(nu, 0.0, y0, t1 + t2, h);
            const auto first = skew_product_step(t1, nu, y0, h);
            const auto second = skew_product_step(t2, first.base, first.fiber, h);
            const int j = std::max(1, static_cast<int>(std::ceil(whole.max_norm())));
            const double L = field.l_density(j, 0.0);
            worst = std::max(worst, std::abs(second.fiber[0] - whole.back()[0]) / (h * L));
        }
        d = "max residual/(h L)=" + fmt("%.3f", worst);
        return worst <= 5.0;
    });

    // 8. Staircase and forced Riccati dynamics.
    run(8, 120.0, [](std::string& d) {
        const auto st = experiments::run_cantor_staircase();
        const CantorForcing cf;
        const double n_tr = cf.params().translates;
        // before the second translate starts only the first one acts, so y is monotone there
        double max_jump = 0.0;
        bool rising = true, falling = true, later_up = false, later_down = false;
        for (std::size_t i = 0; i + 1 < st.t.size(); ++i) {
            const double dy = st.y[i + 1] - st.y[i];
            max_jump = std::max(max_jump, std::abs(dy));
            if (st.t[i + 1] <= 2 * cf.params().shift) {
                if (dy < -1e-12) rising = false;
                if (dy > 1e-12) falling = false;
            } else if (st.t[i] >= 2 * cf.params().shift) {
                if (dy < -1e-12) later_down = true;
                if (dy > 1e-12) later_up = true;
            }
        }
        const bool oscillates = later_up && later_down;
        // samples are 1.11e-4 apart; a continuous staircase moves at most f_val * 2 steps per sample
        const bool continuous = max_jump <= n_tr * cf.f_val() * (st.t[1] - st.t[0]);
        const bool tv_ok = std::abs(st.total_variation - n_tr) <= 1e-6;
        const bool a_ok = continuous && rising && oscillates && tv_ok;

        const auto rd = experiments::run_riccati_devil();
        const double spread = experiments::forward_spread(rd, 5.0);
        double att_max = 0.0;
        for (const auto& v : rd.attracting.path.values) att_max = std::max(att_max, std::abs(v[0]));
        const bool bounded = !rd.attracting.escaped && att_max < 10.0;
        const double r0 = rd.repelling_at_zero();
        bool separates = !rd.repelling.escaped;
        int escaped = 0;
        for (const auto& tr : rd.forward) {
            if (tr.escaped) ++escaped;
            if (tr.escaped != (tr.y0 < r0)) separates = false;
        }
        const bool b_ok = spread <= 1e-3 && bounded && separates && escaped > 0;
        d = "(a) TV=" + fmt("%.6f", st.total_variation) + " vs " + fmt("%.0f", n_tr) +
            (continuous ? " continuous" : " JUMP") + " shape=" + (rising ? "nondecreasing" : falling ? "NONINCREASING" : "MIXED") + "-then-" +
            (oscillates ? "oscillating" : "MONOTONE") +
            " (b) spread(t>=5)=" + fmt("%.2e", spread) + " attracting max=" + fmt("%.3f", att_max) +
            " repelling(0)=" + fmt("%.5f", r0) + " escaped=" + std::to_string(escaped) +
            (separates ? " separates" : " NOT-SEPARATING");
        return a_ok && b_ok;
    });

    // 9. Translates by 2^-n approach the measure in the sigma_D metric.
    run(9, 60.0, [](std::string& d) {
        const auto nu = fields::RiccatiCantor().measure();
        Vec dist;
        for (int n = 0; n <= 10; ++n) dist.push_back(dist_sigma_D(nu, nu.translated(std::ldexp(1.0, -n))));
        bool decreasing = true;
        int first_bad = -1;
        for (std::size_t n = 1; n < dist.size(); ++n)
            if (!(dist[n] < dist[n - 1])) {
                decreasing = false;
                if (first_bad < 0) first_bad = static_cast<int>(n);
            }
        const bool shrinks = dist.back() < dist.front() / 10.0;
        d = "d(0)=" + fmt("%.4f", dist.front()) + " d(10)=" + fmt("%.4f", dist.back()) +
            (decreasing ? " decreasing"
                        : " not decreasing at n=" + std::to_string(first_bad) + " (" +
                              fmt("%.4f", dist[first_bad - 1]) + " -> " + fmt("%.4f", dist[first_bad]) + ")") +
            (shrinks ? " final<initial/10" : " final>=initial/10");
        return decreasing && shrinks;
    });

    // 10. Slow-fast tracking of the frozen-x attractor.
    run(10, 600.0, [](std::string& d) {
        const auto r = experiments::run_slowfast(bundled_slowfast(), {});
        bool within = true, ordered = true;
        std::size_t unconverged = 0;
        std::string rows;
        for (std::size_t i = 0; i < r.tracking.size(); ++i) {
            const auto& tr = r.tracking[i];
            within = within && tr.max_distance <= tr.delta;
            unconverged += r.unconverged_fibers[i];
            if (i > 0) ordered = ordered && tr.max_distance <= 1.2 * r.tracking[i - 1].max_distance + 1e-12;
            rows += " eps=" + fmt("%g", tr.eps) + ":" + fmt("%.4f", tr.max_distance) + "(raw " +
                    fmt("%.4f", tr.max_raw_distance) + ")";
        }
        d = "T=" + fmt("%g", r.T) + " max pullback=" + fmt("%g", r.max_pullback) + rows + " unconverged=" + std::to_string(unconverged);
        return within && ordered && unconverged == 0;
    });

    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
    return failures == 0 ? 0 : 1;
}
