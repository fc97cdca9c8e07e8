#pragma once

// Slow-fast systems in fast time,
//   x' = eps f(x, y),   y' = g(x, y, tau),
// where the fast field is measure-valued in tau (exact interval increments at
// frozen (x, y)). Layer equations, pullback fiber estimates, tracking distances
// and a Gronwall comparison check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/fields.hpp"
#include "mdode/forcing.hpp"
#include "mdode/integration.hpp"
#include "mdode/parametric.hpp"
#include "mdode/solver.hpp"

namespace mdode {

struct SlowFastSystem {
    std::size_t n = 1;  // slow dimension
    std::size_t m = 1;  // fast dimension
    std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)> f;
    double growth_a = 0.0;  // declared |f(x, y)| <= a + b |x|
    double growth_b = 0.0;
    double growth_y_radius = std::numeric_limits<double>::infinity();  // y-range on which the growth bound is claimed
    /// int_I g(x, y, tau) d tau (as a measure in tau) at frozen (x, y).
    std::function<void(std::span<const double> x, std::span<const double> y, Interval I, std::span<double> out)>
        g_increment;
    /// Pointwise density g(x, y, tau) (used only for assumption sampling).
    std::function<void(std::span<const double> x, std::span<const double> y, double tau, std::span<double> out)>
        g_density;
    /// Mixed bound: |g(x1,y1,tau) - g(x2,y2,tau)| <= l_j(tau) [omega(|x1-x2|) + |y1-y2|] on B_j.
    std::function<double(int j, double tau)> l_density;
    Modulus omega = Modulus::identity();
    /// m/l-bounds of the layer measure at frozen x (optional; needed for Picard on layers).
    std::function<BoundFamily(std::span<const double> x)> layer_bounds;
    std::string label;

    /// The layer field y' = g(x, y, .) at frozen x as a parametric measure.
    ParametricMeasure layer(std::span<const double> x) const {
        auto self = std::make_shared<const SlowFastSystem>(*this);
        Vec xs(x.begin(), x.end());
        auto fn = [self, xs](std::span<const double> y, Interval I, std::span<double> out) {
            self->g_increment(xs, y, I, out);
        };
        BoundFamily b = layer_bounds ? layer_bounds(xs) : BoundFamily{};
        return ParametricMeasure(m, m, std::move(fn), std::move(b));
    }
};

struct EpsilonRun {
    double eps = 0.0;
    Vec taus;                 // fast time grid
    std::vector<Vec> xs;      // slow variable
    std::vector<Vec> ys;      // fast variable
    bool escaped = false;

    double horizon_slow() const { return taus.empty() ? 0.0 : eps * taus.back(); }
    Vec slow_times() const {
        Vec t(taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i) t[i] = eps * taus[i];
        return t;
    }
    Curve x_curve_slow() const { return Curve::piecewise_linear(slow_times(), xs); }
    Curve y_curve_fast() const { return Curve::piecewise_linear(taus, ys); }
};

/// Coupled Euler in fast time on [0, t0/eps]: x += eps f(x_k, y_k) h, y += g-increment
/// at frozen (x_k, y_k). Escape (|x| or |y| > escape_radius) truncates the run.
inline EpsilonRun simulate(const SlowFastSystem& sys, double eps, std::span<const double> x0,
                           std::span<const double> y0, double t0, double h_fast, double escape_radius = 1e6) {
    if (!(eps > 0)) throw PreconditionError("simulate: eps must be positive");
    if (!(h_fast > 0)) throw PreconditionError("simulate: h_fast must be positive");
    if (x0.size() != sys.n || y0.size() != sys.m) throw PreconditionError("simulate: dimension mismatch");
    EpsilonRun run;
    run.eps = eps;
    run.taus = detail::uniform_grid(0.0, t0 / eps, h_fast);
    Vec x(x0.begin(), x0.end()), y(y0.begin(), y0.end());
    Vec fx(sys.n), gy(sys.m);
    run.xs.reserve(run.taus.size());
    run.ys.reserve(run.taus.size());
    run.xs.push_back(x);
    run.ys.push_back(y);
    for (std::size_t k = 0; k + 1 < run.taus.size(); ++k) {
        const double a = run.taus[k];
        const double b = run.taus[k + 1];
        sys.f(x, y, fx);
        sys.g_increment(x, y, {a, b}, gy);
        for (std::size_t i = 0; i < sys.n; ++i) x[i] += eps * fx[i] * (b - a);
        for (std::size_t i = 0; i < sys.m; ++i) y[i] += gy[i];
        run.xs.push_back(x);
        run.ys.push_back(y);
        const double r = std::max(norm2(x), norm2(y));
        if (!std::isfinite(r) || r > escape_radius) {
            run.taus.resize(k + 2);
            run.escaped = true;
            break;
        }
    }
    return run;
}

/// Layer equation y'(s) = (nu_g . tau0)^x_{y(s)} from s = 0 over `horizon` (signed).
inline SolutionPath layer_solve(const SlowFastSystem& sys, std::span<const double> x, double tau0,
                                std::span<const double> y0, double horizon, double h, double escape_radius = 1e6) {
    return solve_euler(sys.layer(x).translated(tau0), 0.0, y0, horizon, h, escape_radius);
}

// ---------------------------------------------------------------------------
// Pullback fibers
// ---------------------------------------------------------------------------

/// Grid of 9^m points in the box [-r, r]^m.
inline std::vector<Vec> box_seeds(std::size_t m, double r = 3.0, std::size_t per_axis = 9) {
    std::vector<Vec> out;
    std::vector<std::size_t> idx(m, 0);
    while (true) {
        Vec p(m);
        for (std::size_t i = 0; i < m; ++i)
            p[i] = per_axis == 1 ? 0.0 : -r + 2.0 * r * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
        out.push_back(std::move(p));
        std::size_t i = 0;
        while (i < m && ++idx[i] == per_axis) idx[i++] = 0;
        if (i == m) return out;
    }
}

/// Hausdorff distance between finite point clouds (infinite if exactly one is empty).
inline double hausdorff(const std::vector<Vec>& A, const std::vector<Vec>& B) {
    if (A.empty() && B.empty()) return 0.0;
    if (A.empty() || B.empty()) return std::numeric_limits<double>::infinity();
    auto one_sided = [](const std::vector<Vec>& P, const std::vector<Vec>& Q) {
        double h = 0.0;
        for (const auto& p : P) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& q : Q) d = std::min(d, distance2(p, q));
            h = std::max(h, d);
        }
        return h;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

inline double distance_to_cloud(std::span<const double> y, const std::vector<Vec>& cloud) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : cloud) d = std::min(d, distance2(y, c));
    return d;
}

struct AttractorFiberEstimate {
    double tau = 0.0;
    Vec x;
    std::vector<Vec> cloud;  // endpoints at tau of layer solutions started at tau - T_pb
    double pullback = 0.0;
    double delta = 0.0;
    bool converged = false;
    double doubling_change = std::numeric_limits<double>::infinity();  // Hausdorff(cloud(T), cloud(2T))
    std::size_t escaped = 0;

    Vec center() const {
        if (cloud.empty()) return {};
        Vec c(cloud.front().size(), 0.0);
        for (const auto& p : cloud)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i] / static_cast<double>(cloud.size());
        return c;
    }

    double diameter() const {
        double d = 0.0;
        for (const auto& p : cloud)
            for (const auto& q : cloud) d = std::max(d, distance2(p, q));
        return d;
    }
};

namespace detail {

inline std::vector<Vec> pullback_cloud(const ParametricMeasure& layer, double tau, double depth,
                                       const std::vector<Vec>& seeds, double h, double escape_radius,
                                       std::size_t& escaped) {
    std::vector<Vec> cloud;
    escaped = 0;
    if (depth <= 0) return seeds;
    for (const auto& s : seeds) {
        try {
            cloud.push_back(solve_euler(layer, tau - depth, s, tau, h, escape_radius).back());
        } catch (const BlowupError&) {
            ++escaped;
        }
    }
    return cloud;
}

}  // namespace detail

struct FiberOptions {
    double h = 1e-3;
    double escape_radius = 1e3;
};

/// Pullback estimate of the fiber A_{(nu_g . tau, x)} from a bounded seed set.
inline AttractorFiberEstimate attractor_fiber(const SlowFastSystem& sys, std::span<const double> x, double tau,
                                              double T_pb, const std::vector<Vec>& seeds, double delta,
                                              FiberOptions opts = {}) {
    if (T_pb < 0) throw PreconditionError("attractor_fiber: pullback depth must be >= 0");
    if (seeds.empty()) throw PreconditionError("attractor_fiber: empty seed set");
    AttractorFiberEstimate est;
    est.tau = tau;
    est.x.assign(x.begin(), x.end());
    est.pullback = T_pb;
    est.delta = delta;
    const auto layer = sys.layer(x);
    est.cloud = detail::pullback_cloud(layer, tau, T_pb, seeds, opts.h, opts.escape_radius, est.escaped);
    if (T_pb == 0.0) return est;
    std::size_t esc2 = 0;
    const auto deeper = detail::pullback_cloud(layer, tau, 2.0 * T_pb, seeds, opts.h, opts.escape_radius, esc2);
    est.doubling_change = hausdorff(est.cloud, deeper);
    est.converged = est.doubling_change < delta / 10.0;
    return est;
}

/// Fiber at (x, tau) with the pullback depth doubled from T0 until the doubling test
/// passes or T_max is exceeded (the last estimate is returned unconverged).
inline AttractorFiberEstimate converged_fiber(const SlowFastSystem& sys, std::span<const double> x, double tau,
                                              double T0, const std::vector<Vec>& seeds, double delta,
                                              FiberOptions opts = {}, double T_max = 64.0) {
    if (!(T0 > 0)) throw PreconditionError("converged_fiber: initial pullback depth must be positive");
    auto est = attractor_fiber(sys, x, tau, T0, seeds, delta, opts);
    for (double T = 2.0 * T0; !est.converged && T <= T_max; T *= 2.0)
        est = attractor_fiber(sys, x, tau, T, seeds, delta, opts);
    return est;
}

/// Smallest T in {T0, 2 T0, 4 T0, ...} (up to T_max) at which the fiber at (x, tau) is
/// converged; the measured counterpart of the attraction time in the tracking result.
inline double fiber_convergence_time(const SlowFastSystem& sys, std::span<const double> x, double tau,
                                     const std::vector<Vec>& seeds, double delta, FiberOptions opts = {},
                                     double T0 = 0.5, double T_max = 64.0) {
    for (double T = T0; T <= T_max; T *= 2.0)
        if (attractor_fiber(sys, x, tau, T, seeds, delta, opts).converged) return T;
    throw ToleranceFailure("fiber did not converge within the pullback budget", Vec(x.begin(), x.end()), T_max);
}

// ---------------------------------------------------------------------------
// Tracking
// ---------------------------------------------------------------------------

struct TrackingRow {
    double tau = 0.0;
    Vec y;
    Vec fiber_center;
    double raw_distance = 0.0;  // dist(y_eps(tau), cloud)
    double distance = 0.0;      // dist(y_eps(tau), delta-neighbourhood of cloud)
};

struct TrackingResult {
    double eps = 0.0;
    double delta = 0.0;
    double T = 0.0;
    double max_distance = 0.0;
    double max_raw_distance = 0.0;
    double argmax_tau = 0.0;
    std::vector<TrackingRow> rows;
};

/// max over fiber grid times tau >= T of dist(y_eps(tau), A[delta]), with A[delta] the
/// Euclidean delta-neighbourhood of the fiber cloud.
inline TrackingResult tracking_distance(const EpsilonRun& run, const std::vector<AttractorFiberEstimate>& fibers,
                                        double delta, double T) {
    if (fibers.empty()) throw ConfigurationError("tracking_distance: no fibers");
    const double tau_end = run.taus.back();
    Vec grid;
    for (const auto& f : fibers)
        if (f.tau >= T - 1e-12 && f.tau <= tau_end + 1e-9) grid.push_back(f.tau);
    std::sort(grid.begin(), grid.end());
    if (grid.empty()) throw ConfigurationError("tracking_distance: no fiber in [T, end]");
    double gap = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) gap = std::max(gap, grid[i] - grid[i - 1]);
    if (grid.size() == 1) gap = tau_end - T;
    if (grid.front() - T > gap + 1e-9 || tau_end - grid.back() > gap + 1e-9)
        throw ConfigurationError("tracking_distance: fiber grid does not cover [T, end]");
    TrackingResult r;
    r.eps = run.eps;
    r.delta = delta;
    r.T = T;
    const Curve y = run.y_curve_fast();
    for (const auto& f : fibers) {
        if (f.tau < T - 1e-12 || f.tau > tau_end + 1e-9) continue;
        if (f.cloud.empty()) throw ConfigurationError("tracking_distance: empty fiber at tau=" + std::to_string(f.tau));
        TrackingRow row;
        row.tau = f.tau;
        row.y = y(std::min(f.tau, tau_end));
        row.fiber_center = f.center();
        row.raw_distance = distance_to_cloud(row.y, f.cloud);
        row.distance = std::max(0.0, row.raw_distance - delta);
        r.max_distance = std::max(r.max_distance, row.distance);
        if (row.raw_distance >= r.max_raw_distance) {
            r.max_raw_distance = row.raw_distance;
            r.argmax_tau = row.tau;
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Gronwall comparison
// ---------------------------------------------------------------------------

struct GronwallInput {
    std::function<void(std::span<const double> y, double tau, std::span<double> out)> g1, g2;
    Curve y1, y2;
    Interval window;
    std::function<double(double tau)> l_density;  // l~_j on the window
    double sigma = 0.0;
    int ball = 1;
    std::optional<double> c_override;  // replaces int l~_j (e.g. to test understated constants)
    std::size_t samples = 2000;
};

struct GronwallResult {
    bool pass = false;
    double c = 0.0;
    double bound = 0.0;     // c e^c sigma
    double max_gap = 0.0;   // sup |y1 - y2|
    double ratio = 0.0;     // max_gap / bound (0 when both vanish)
};

/// Checks sup |y1 - y2| <= c e^c sigma on the window with c = int l~_j. Throws
/// PreconditionError if y1(a) != y2(a), a path leaves B_j, or the sampled
/// perturbation exceeds l~_j sigma.
inline GronwallResult gronwall_compare(const GronwallInput& in, double slack = 1e-9) {
    const Interval I = in.window;
    require_finite(I);
    if (distance2(in.y1(I.a), in.y2(I.a)) > slack) throw PreconditionError("gronwall: paths differ at the start");
    GronwallResult r;
    CompensatedSum c;
    const std::size_t n = std::max<std::size_t>(in.samples, 2);
    Vec d1(in.y1.dim()), d2(in.y1.dim());
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = I.a + I.length() * static_cast<double>(i) / static_cast<double>(n);
        const Vec a = in.y1(t);
        const Vec b = in.y2(t);
        if (norm2(a) > in.ball + slack || norm2(b) > in.ball + slack)
            throw PreconditionError("gronwall: path leaves B_j at t=" + std::to_string(t));
        in.g1(b, t, d1);
        in.g2(b, t, d2);
        const double l = in.l_density(t);
        if (distance2(d1, d2) > l * in.sigma * (1 + 1e-9) + slack)
            throw PreconditionError("gronwall: perturbation exceeds l_j sigma at t=" + std::to_string(t));
        r.max_gap = std::max(r.max_gap, distance2(a, b));
        if (i < n) {
            const double t1 = I.a + I.length() * static_cast<double>(i + 1) / static_cast<double>(n);
            c.add(0.5 * (l + in.l_density(t1)) * (t1 - t));
        }
    }
    r.c = in.c_override.value_or(c.value());
    r.bound = r.c * std::exp(r.c) * in.sigma;
    r.ratio = r.bound > 0 ? r.max_gap / r.bound : (r.max_gap > slack ? std::numeric_limits<double>::infinity() : 0.0);
    r.pass = r.max_gap <= r.bound + slack;
    return r;
}

// ---------------------------------------------------------------------------
// Assumption sampling
// ---------------------------------------------------------------------------

struct AssumptionReport {
    double growth_ratio = 0.0;  // max |f| / (a + b|x|)
    double mixed_ratio = 0.0;   // max |g1 - g2| / (l_j (omega(|dx|) + |dy|))
    std::size_t samples = 0;
    bool growth_ok = false;
    bool mixed_ok = false;
};

inline AssumptionReport check_assumptions(const SlowFastSystem& sys, int j, Interval taus, std::size_t samples = 2000,
                                          std::uint64_t seed = 1, double tol = 1e-9) {
    if (!sys.g_density || !sys.l_density) throw ConfigurationError("check_assumptions: pointwise g and l needed");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(taus.a, taus.b);
    AssumptionReport r;
    const double yr = std::min<double>(j, sys.growth_y_radius);
    Vec fx(sys.n), g1(sys.m), g2(sys.m);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec x1 = detail::sample_in_ball(rng, sys.n, j);
        const Vec y1 = detail::sample_in_ball(rng, sys.m, yr);
        sys.f(x1, y1, fx);
        r.growth_ratio = std::max(r.growth_ratio, norm2(fx) / (sys.growth_a + sys.growth_b * norm2(x1)));
        const Vec x2 = detail::sample_in_ball(rng, sys.n, j);
        const Vec y2 = detail::sample_in_ball(rng, sys.m, j);
        const Vec y1j = detail::sample_in_ball(rng, sys.m, j);
        const double t = ut(rng);
        sys.g_density(x1, y1j, t, g1);
        sys.g_density(x2, y2, t, g2);
        const double denom = sys.l_density(j, t) * (sys.omega(distance2(x1, x2)) + distance2(y1j, y2));
        if (denom > 0) r.mixed_ratio = std::max(r.mixed_ratio, distance2(g1, g2) / denom);
        ++r.samples;
    }
    r.growth_ok = r.growth_ratio <= 1 + tol;
    r.mixed_ok = r.mixed_ratio <= 1 + tol;
    return r;
}

// ---------------------------------------------------------------------------
// Bundled scenario
// ---------------------------------------------------------------------------

/// n = m = 1, f(x, y) = y - x, g(x, y, tau) = -y^2 + 2 + x + f_sum(tau).
/// The growth bound |f| <= a + b|x| holds with a = 3, b = 1 for |y| <= 3 only.
inline SlowFastSystem bundled_slowfast(CantorForcingParams forcing = {}) {
    auto cf = std::make_shared<const CantorForcing>(forcing);
    SlowFastSystem s;
    s.n = 1;
    s.m = 1;
    s.label = "riccati-cantor-slowfast";
    s.f = [](std::span<const double> x, std::span<const double> y, std::span<double> out) { out[0] = y[0] - x[0]; };
    s.growth_a = 3.0;
    s.growth_b = 1.0;
    s.growth_y_radius = 3.0;
    s.g_increment = [cf](std::span<const double> x, std::span<const double> y, Interval I, std::span<double> out) {
        out[0] = (-y[0] * y[0] + 2.0 + x[0]) * (I.b - I.a) + cf->sum().eval(I);
    };
    s.g_density = [cf](std::span<const double> x, std::span<const double> y, double tau, std::span<double> out) {
        out[0] = -y[0] * y[0] + 2.0 + x[0] + cf->value_at(tau);
    };
    s.l_density = [](int j, double) { return std::max(2.0 * j, 1.0); };
    s.omega = Modulus::identity();
    s.layer_bounds = [cf](std::span<const double> x) {
        return fields::RiccatiCantor(cf, 1.0, 2.0 + x[0]).bounds();
    };
    return s;
}

}  // namespace mdode
