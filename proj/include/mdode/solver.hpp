#pragma once

// Solutions of generalized ODEs y'(t) = nu_{y(t)}, i.e. of
//   y(t) = y0 + int_{t0}^{t} d nu_{y(s)},
// by measure-increment Euler stepping and by the windowed contraction (Picard)
// construction.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/integration.hpp"
#include "mdode/parametric.hpp"

namespace mdode {

enum class Scheme { euler, picard };

inline const char* to_string(Scheme s) { return s == Scheme::euler ? "euler" : "picard"; }

struct SolutionPath {
    Vec times;
    std::vector<Vec> values;
    Scheme scheme = Scheme::euler;
    double step = 0.0;
    int iterations = 0;

    std::size_t size() const { return times.size(); }
    std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
    const Vec& front() const { return values.front(); }
    const Vec& back() const { return values.back(); }

    /// Piecewise-linear interpolant on [min t, max t] (works for backward paths too).
    Curve curve() const {
        if (times.size() < 2) throw ConfigurationError("solution path has fewer than two points");
        if (times.front() < times.back()) return Curve::piecewise_linear(times, values);
        Vec t(times.rbegin(), times.rend());
        std::vector<Vec> v(values.rbegin(), values.rend());
        return Curve::piecewise_linear(std::move(t), std::move(v));
    }

    /// Linear interpolation at t inside the path's time range.
    Vec at(double t) const { return curve()(t); }

    /// sum_k |y_{k+1} - y_k|.
    double variation() const {
        double v = 0.0;
        for (std::size_t k = 0; k + 1 < values.size(); ++k) v += distance2(values[k + 1], values[k]);
        return v;
    }

    double max_norm() const {
        double r = 0.0;
        for (const auto& y : values) r = std::max(r, norm2(y));
        return r;
    }
};

class BlowupError : public Error {
public:
    BlowupError(const std::string& what, SolutionPath partial) : Error(what), partial_(std::move(partial)) {}
    const SolutionPath& partial() const noexcept { return partial_; }

private:
    SolutionPath partial_;
};

struct SolverConfig {
    double h = 1e-3;
    double tol = 1e-12;
    int max_picard_iterations = 200;
    int picard_grid = 1024;
    int max_ball = BoundFamily::default_max_ball;
    double escape_radius = 1e6;
};

/// Default Euler step for stiff forced Riccati problems.
inline constexpr double stiff_riccati_step = 1e-4;

namespace detail {

inline Vec uniform_grid(double t0, double T, double h) {
    if (!(h > 0)) throw ConfigurationError("step must be positive");
    const double len = std::abs(T - t0);
    const auto K = static_cast<std::size_t>(std::max(1.0, std::ceil(len / h - 1e-9)));
    const double dir = T >= t0 ? 1.0 : -1.0;
    Vec ts(K + 1);
    for (std::size_t k = 0; k < K; ++k) ts[k] = t0 + dir * h * static_cast<double>(k);
    ts[K] = T;
    return ts;
}

}  // namespace detail

/// Measure-increment Euler: y_{k+1} = y_k + nu_{y_k}[t_k, t_{k+1}] (orientation-signed
/// when T < t0). Increments come from exact interval masses, so singular parts are
/// integrated faithfully; for y-independent nu the grid values telescope to primitive
/// differences.
inline SolutionPath solve_euler(const ParametricMeasure& nu, double t0, std::span<const double> y0, double T,
                                double h, double escape_radius = 1e6) {
    if (!std::isfinite(t0) || !std::isfinite(T)) throw InvalidInterval("solve_euler: times must be finite");
    if (y0.size() != nu.input_dim() || nu.output_dim() != nu.input_dim())
        throw PreconditionError("solve_euler: state dimension mismatch");
    SolutionPath path;
    path.scheme = Scheme::euler;
    path.step = h;
    path.times = (T == t0) ? Vec{t0} : detail::uniform_grid(t0, T, h);
    path.values.reserve(path.times.size());
    path.values.emplace_back(y0.begin(), y0.end());
    Vec y(y0.begin(), y0.end());
    Vec inc(y.size());
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double a = path.times[k];
        const double b = path.times[k + 1];
        if (a < b) {
            nu.eval(y, {a, b}, inc);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += inc[i];
        } else {
            nu.eval(y, {b, a}, inc);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= inc[i];
        }
        path.values.push_back(y);
        const double r = norm2(y);
        if (!std::isfinite(r) || r > escape_radius) {
            path.times.resize(k + 2);
            throw BlowupError("solution left the escape ball at t=" + std::to_string(b), std::move(path));
        }
    }
    return path;
}

/// Same stepping as solve_euler, keeping only the final value (long pre-runs).
inline Vec euler_endpoint(const ParametricMeasure& nu, double t0, std::span<const double> y0, double T, double h,
                          double escape_radius = 1e6) {
    if (y0.size() != nu.input_dim() || nu.output_dim() != nu.input_dim())
        throw PreconditionError("euler_endpoint: state dimension mismatch");
    Vec y(y0.begin(), y0.end());
    if (T == t0) return y;
    const Vec ts = detail::uniform_grid(t0, T, h);
    Vec inc(y.size());
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double a = ts[k];
        const double b = ts[k + 1];
        nu.eval(y, {std::min(a, b), std::max(a, b)}, inc);
        const double s = a < b ? 1.0 : -1.0;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * inc[i];
        const double r = norm2(y);
        if (!std::isfinite(r) || r > escape_radius) {
            SolutionPath p;
            p.times = {t0, b};
            p.values = {Vec(y0.begin(), y0.end()), y};
            throw BlowupError("solution left the escape ball at t=" + std::to_string(b), std::move(p));
        }
    }
    return y;
}

// ---------------------------------------------------------------------------
// Picard construction
// ---------------------------------------------------------------------------

struct PicardWindow {
    double t_start = 0.0;
    double delta = 0.0;
    int ball = 1;
    std::vector<double> distances;  // sup-grid distances between successive iterates
    double contraction = 0.0;       // max d_{k+1}/d_k above the noise floor
};

struct PicardResult {
    SolutionPath path;
    std::vector<PicardWindow> windows;
};

namespace detail {

/// Largest delta <= delta_max with m_j[window] <= j/(2 sqrt N) and l_j[window] <= 1/(2 sqrt N).
inline double picard_window(const BallBounds& b, int j, std::size_t N, double t0, double dir, double delta_max) {
    const double root = 2.0 * std::sqrt(static_cast<double>(N));
    auto ok = [&](double d) {
        const Interval w = dir > 0 ? Interval{t0, t0 + d} : Interval{t0 - d, t0};
        return b.m.eval(w) <= j / root && b.l.eval(w) <= 1.0 / root;
    };
    if (ok(delta_max)) return delta_max;
    double lo = 0.0;
    double hi = delta_max;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace detail

/// Iterates (Ty)(t) = y0 + int_{t0}^{t} d nu_{y(s)} on uniform window grids with
/// midpoint tags, on windows whose length makes T a 1/2-contraction, until the
/// sup-grid change drops below cfg.tol; windows are concatenated up to T.
inline PicardResult solve_picard(const ParametricMeasure& nu, double t0, std::span<const double> y0, double T,
                                 const SolverConfig& cfg = {}) {
    if (!nu.has_bounds()) throw ConfigurationError("solve_picard needs m/l-bounds");
    if (y0.size() != nu.input_dim() || nu.output_dim() != nu.input_dim())
        throw PreconditionError("solve_picard: state dimension mismatch");
    const std::size_t N = y0.size();
    const double dir = T >= t0 ? 1.0 : -1.0;
    const auto n = static_cast<std::size_t>(cfg.picard_grid);
    PicardResult result;
    result.path.scheme = Scheme::picard;
    result.path.times.push_back(t0);
    result.path.values.emplace_back(y0.begin(), y0.end());

    double t = t0;
    Vec start(y0.begin(), y0.end());
    std::vector<Vec> cur(n + 1), next(n + 1);
    Vec mid(N), inc(N);
    while (dir * (T - t) > 0) {
        const double remaining = std::abs(T - t);
        const int j_min = std::max(1, static_cast<int>(std::ceil(2.0 * norm2(start) * std::sqrt(double(N)))));
        double delta = 0.0;
        int j_best = j_min;
        for (int j = j_min; j <= std::min(cfg.max_ball, j_min + 3); ++j) {
            const double d = detail::picard_window(nu.bounds().ball(j), j, N, t, dir, std::min(1.0, remaining));
            if (d > delta) {
                delta = d;
                j_best = j;
            }
        }
        if (!(delta > 1e-12))
            throw ConfigurationError("solve_picard: no admissible window length (bounds too coarse) at t=" +
                                     std::to_string(t));
        if (remaining - delta < 1e-12 * std::max(1.0, std::abs(T))) delta = remaining;
        const double t_end = (delta == remaining) ? T : t + dir * delta;

        Vec grid(n + 1);
        for (std::size_t i = 0; i <= n; ++i) grid[i] = i == n ? t_end : t + (t_end - t) * double(i) / double(n);
        for (auto& v : cur) v = start;

        PicardWindow win{t, delta, j_best, {}, 0.0};
        bool converged = false;
        for (int it = 0; it < cfg.max_picard_iterations; ++it) {
            next[0] = start;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < N; ++c) mid[c] = 0.5 * (cur[i][c] + cur[i + 1][c]);
                const double a = grid[i];
                const double b = grid[i + 1];
                next[i + 1] = next[i];
                if (a < b) {
                    nu.eval(mid, {a, b}, inc);
                    for (std::size_t c = 0; c < N; ++c) next[i + 1][c] += inc[c];
                } else {
                    nu.eval(mid, {b, a}, inc);
                    for (std::size_t c = 0; c < N; ++c) next[i + 1][c] -= inc[c];
                }
            }
            double d = 0.0;
            for (std::size_t i = 0; i <= n; ++i) d = std::max(d, distance_inf(next[i], cur[i]));
            win.distances.push_back(d);
            std::swap(cur, next);
            ++result.path.iterations;
            if (d < cfg.tol) {
                converged = true;
                break;
            }
        }
        const double floor = std::max(100.0 * cfg.tol, 1e-12);
        for (std::size_t k = 0; k + 1 < win.distances.size(); ++k)
            if (win.distances[k] > floor)
                win.contraction = std::max(win.contraction, win.distances[k + 1] / win.distances[k]);
        for (std::size_t i = 1; i <= n; ++i) {
            result.path.times.push_back(grid[i]);
            result.path.values.push_back(cur[i]);
        }
        result.windows.push_back(std::move(win));
        if (!converged)
            throw ToleranceFailure("solve_picard: max iterations reached", cur.back(),
                                   result.windows.back().distances.back());
        start = cur.back();
        if (norm2(start) > cfg.escape_radius)
            throw BlowupError("picard iterate left the escape ball", result.path);
        t = t_end;
    }
    result.path.step = std::abs(T - t0) / static_cast<double>(result.path.times.size() - 1);
    return result;
}

// ---------------------------------------------------------------------------
// Maximal extension and skew-product
// ---------------------------------------------------------------------------

enum class Termination { horizon, blowup };

struct MaximalExtensionResult {
    SolutionPath path;
    Termination reason = Termination::horizon;
};

/// Euler-extends from (t0, y0) until |y| > escape_radius or |t - t0| reaches `horizon`
/// (forward for horizon > 0, backward for horizon < 0).
inline MaximalExtensionResult extend_maximal(const ParametricMeasure& nu, double t0, std::span<const double> y0,
                                             double escape_radius, double horizon, double h) {
    if (!(escape_radius > norm2(y0))) throw PreconditionError("extend_maximal: escape radius must exceed |y0|");
    try {
        return {solve_euler(nu, t0, y0, t0 + horizon, h, escape_radius), Termination::horizon};
    } catch (const BlowupError& e) {
        return {e.partial(), Termination::blowup};
    }
}

struct SkewProductState {
    ParametricMeasure base;  // nu . tau
    Vec fiber;               // y(tau, nu, y0)
};

/// (tau, nu, y0) -> (nu . tau, y(tau, nu, y0)) with y(0, nu, y0) = y0.
inline SkewProductState skew_product_step(double tau, const ParametricMeasure& nu, std::span<const double> y0,
                                          double h, double escape_radius = 1e6) {
    if (tau == 0.0) return {nu, Vec(y0.begin(), y0.end())};
    const auto path = solve_euler(nu, 0.0, y0, tau, h, escape_radius);
    return {nu.translated(tau), path.back()};
}

/// max_k |y_k - y0 - int_{t0}^{t_k} d nu_{y(s)}| with the curve integral taken along
/// the path's piecewise-linear interpolant, cell by cell.
inline double integral_equation_residual(const ParametricMeasure& nu, const SolutionPath& path,
                                         IntegrationOptions opts = {}) {
    if (path.size() < 2) return 0.0;
    const Curve c = path.curve();
    const std::size_t N = path.dim();
    Vec acc(N, 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double a = path.times[k];
        const double b = path.times[k + 1];
        const auto r = integrate_along(nu, c, {std::min(a, b), std::max(a, b)}, opts);
        const double sign = a < b ? 1.0 : -1.0;
        for (std::size_t i = 0; i < N; ++i) acc[i] += sign * r.value[i];
        for (std::size_t i = 0; i < N; ++i)
            worst = std::max(worst, std::abs(path.values[k + 1][i] - path.values[0][i] - acc[i]));
    }
    return worst;
}

}  // namespace mdode
