#pragma once

// Seminorms and distances on parametric b-measures (pointwise "D" seminorms and
// curve-family "Theta" seminorms), window moduli, family diagnostics and hull
// sampling.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/integration.hpp"
#include "mdode/parametric.hpp"

namespace mdode {

// ---------------------------------------------------------------------------
// Pointwise seminorms
// ---------------------------------------------------------------------------

/// |nu_y(I)|.
inline double seminorm_D(const ParametricMeasure& nu, Interval I, std::span<const double> y) {
    return norm2(nu.eval(y, I));
}

/// Finite index set: rational interval endpoints q = n/d with d <= max_denominator,
/// |q| <= radius, and parameter points on a grid of step point_step inside the ball
/// of radius point_radius.
///
/// The distance is organised in levels k = 1, 2, ...; level k uses denominators
/// <= min(k, Q), endpoints in [-min(k,R), min(k,R)] and points in B_{min(k, r_D)}.
/// Levels stop growing after k_sat = max(Q, ceil R, ceil r_D); every index of the
/// set belongs to some level.
struct SeminormIndexSet {
    int max_denominator = 8;
    double radius = 10.0;
    double point_step = 0.25;
    double point_radius = 4.0;

    int saturation_level() const {
        return std::max({max_denominator, static_cast<int>(std::ceil(radius)), static_cast<int>(std::ceil(point_radius)),
                         1});
    }

    /// Sorted rationals with denominator <= d_max inside [-r, r].
    static Vec rationals(int d_max, double r) {
        Vec q;
        for (int d = 1; d <= d_max; ++d) {
            const auto n_max = static_cast<long>(std::floor(r * d));
            for (long n = -n_max; n <= n_max; ++n)
                if (std::gcd(n < 0 ? -n : n, static_cast<long>(d)) == 1 || n == 0)
                    q.push_back(static_cast<double>(n) / d);
        }
        std::sort(q.begin(), q.end());
        q.erase(std::unique(q.begin(), q.end()), q.end());
        return q;
    }

    Vec endpoints(int level) const {
        return rationals(std::min(level, max_denominator), std::min(static_cast<double>(level), radius));
    }

    /// Grid points of B_r (Euclidean) in R^dim, in lexicographic order.
    std::vector<Vec> points(int level, std::size_t dim) const {
        const double r = std::min(static_cast<double>(level), point_radius);
        const auto m = static_cast<long>(std::floor(r / point_step + 1e-9));
        std::vector<Vec> out;
        Vec y(dim);
        std::vector<long> idx(dim, -m);
        while (true) {
            for (std::size_t i = 0; i < dim; ++i) y[i] = static_cast<double>(idx[i]) * point_step;
            if (norm2(y) <= r + 1e-12) out.push_back(y);
            std::size_t i = dim;
            while (i > 0) {
                --i;
                if (++idx[i] <= m) break;
                idx[i] = -m;
                if (i == 0) return out;
            }
            if (dim == 0) return out;
        }
    }

    std::size_t size() const {
        const auto q = endpoints(saturation_level()).size();
        return q * (q - 1) / 2 * points(saturation_level(), 1).size();
    }
};

namespace detail {

/// sup over intervals with endpoints in q and points in ys of |(nu1 - nu2)_y(I)|.
inline double level_seminorm(const ParametricMeasure& nu1, const ParametricMeasure& nu2, const Vec& q,
                             const std::vector<Vec>& ys) {
    if (q.size() < 2) return 0.0;
    const std::size_t M = nu1.output_dim();
    double best = 0.0;
    std::vector<Vec> P(q.size(), Vec(M, 0.0));
    for (const auto& y : ys) {
        for (std::size_t i = 1; i < q.size(); ++i) {
            const Interval I{q.front(), q[i]};
            const Vec a = nu1.eval(y, I);
            const Vec b = nu2.eval(y, I);
            for (std::size_t c = 0; c < M; ++c) P[i][c] = a[c] - b[c];
        }
        if (M == 1) {
            double lo = 0.0, hi = 0.0;
            for (const auto& p : P) {
                lo = std::min(lo, p[0]);
                hi = std::max(hi, p[0]);
            }
            best = std::max(best, hi - lo);
        } else {
            for (std::size_t i = 0; i < P.size(); ++i)
                for (std::size_t k = i + 1; k < P.size(); ++k) best = std::max(best, distance2(P[i], P[k]));
        }
    }
    return best;
}

}  // namespace detail

struct SigmaDDistance {
    double value = 0.0;
    Vec level_seminorms;  // p_1 .. p_{k_sat}
};

/// sum_k 2^{-k} p_k / (1 + p_k) with p_k the level-k sup of |(nu1 - nu2)_y(I)|;
/// levels beyond saturation repeat p_{k_sat}, summed in closed form.
inline SigmaDDistance dist_sigma_D_detail(const ParametricMeasure& nu1, const ParametricMeasure& nu2,
                                          const SeminormIndexSet& idx = {}) {
    if (nu1.input_dim() != nu2.input_dim() || nu1.output_dim() != nu2.output_dim())
        throw PreconditionError("dist_sigma_D: dimension mismatch");
    SigmaDDistance d;
    const int K = idx.saturation_level();
    double w = 0.5;
    for (int k = 1; k <= K; ++k, w *= 0.5) {
        const double p = detail::level_seminorm(nu1, nu2, idx.endpoints(k), idx.points(k, nu1.input_dim()));
        d.level_seminorms.push_back(p);
        d.value += w * p / (1.0 + p);
    }
    const double p = d.level_seminorms.back();
    d.value += 2.0 * w * p / (1.0 + p);  // tail: sum_{k>K} 2^{-k} = 2^{-K} = 2w
    return d;
}

inline double dist_sigma_D(const ParametricMeasure& nu1, const ParametricMeasure& nu2,
                           const SeminormIndexSet& idx = {}) {
    return dist_sigma_D_detail(nu1, nu2, idx).value;
}

// ---------------------------------------------------------------------------
// Window moduli and family diagnostics
// ---------------------------------------------------------------------------

/// theta(s) = sup_{t in I, m in E} m[t, t+s], sup taken over a uniform t-grid.
inline double theta_modulus(std::span<const PositiveMeasure> E, Interval I, double s, std::size_t grid = 1024) {
    if (!(s >= 0)) throw PreconditionError("theta_modulus: s must be >= 0");
    require_finite(I);
    if (s == 0.0) return 0.0;
    double best = 0.0;
    for (const auto& m : E)
        for (std::size_t i = 0; i <= grid; ++i) {
            const double t = I.a + I.length() * static_cast<double>(i) / static_cast<double>(grid);
            best = std::max(best, m.eval({t, t + s}));
        }
    return best;
}

inline double theta_modulus(const PositiveMeasure& m, Interval I, double s, std::size_t grid = 1024) {
    return theta_modulus(std::span<const PositiveMeasure>(&m, 1), I, s, grid);
}

struct FamilyProbe {
    Interval range{0.0, 10.0};
    std::size_t grid = 1000;
    Vec epsilons{0.5, 0.1, 0.05, 0.01};
    double claimed_bound = std::numeric_limits<double>::infinity();
};

struct EquicontinuityRow {
    double epsilon = 0.0;
    double delta = 0.0;  // largest probed s with window sup < epsilon
};

struct FamilyDiagnostics {
    double c = 0.0;  // sup over probed windows [t, t+1]
    std::vector<EquicontinuityRow> table;
    bool bounded = false;
    bool equicontinuous = false;
};

namespace detail {

inline double family_window_sup(std::span<const PositiveMeasure> family, const FamilyProbe& probe, double s) {
    return theta_modulus(family, probe.range, s, probe.grid);
}

}  // namespace detail

inline FamilyDiagnostics family_diagnostics(std::span<const PositiveMeasure> family, const FamilyProbe& probe = {}) {
    FamilyDiagnostics d;
    d.c = detail::family_window_sup(family, probe, 1.0);
    d.bounded = std::isfinite(d.c) && d.c <= probe.claimed_bound;
    d.equicontinuous = true;
    for (double eps : probe.epsilons) {
        double lo = 0.0, hi = 1.0;
        if (detail::family_window_sup(family, probe, hi) < eps) {
            lo = hi;
        } else {
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (detail::family_window_sup(family, probe, mid) < eps)
                    lo = mid;
                else
                    hi = mid;
            }
        }
        d.table.push_back({eps, lo});
        if (!(lo > 0.0)) d.equicontinuous = false;
    }
    for (std::size_t i = 1; i < d.table.size(); ++i)
        if (d.table[i].epsilon < d.table[i - 1].epsilon && d.table[i].delta > d.table[i - 1].delta + 1e-12)
            d.equicontinuous = false;
    return d;
}

// ---------------------------------------------------------------------------
// Curve families with a prescribed modulus
// ---------------------------------------------------------------------------

/// Random piecewise-linear curves in C(I, B_j) whose breakpoint increments obey
/// |y(t_a) - y(t_b)| <= theta(|t_a - t_b|), plus constant curves.
class CurveFamilySampler {
public:
    struct Config {
        Interval interval{0.0, 1.0};
        int ball = 1;
        std::size_t dim = 1;
        std::size_t n_curves = 16;
        std::size_t n_constant = 9;
        std::size_t pieces = 32;
        std::uint64_t seed = 1;
    };

    CurveFamilySampler(Config cfg, std::function<double(double)> theta) : cfg_(cfg), theta_(std::move(theta)) {
        if (cfg_.pieces < 1 || cfg_.ball < 1 || cfg_.dim < 1) throw ConfigurationError("curve sampler: bad config");
    }

    const Config& config() const { return cfg_; }

    /// Constant curves: the grid {-j, ..., j} on the first axis (plus the origin).
    std::vector<Curve> constant_curves() const {
        std::vector<Curve> out;
        const std::size_t n = std::max<std::size_t>(cfg_.n_constant, 1);
        for (std::size_t i = 0; i < n; ++i) {
            Vec p(cfg_.dim, 0.0);
            if (n > 1) p[0] = -cfg_.ball + 2.0 * cfg_.ball * static_cast<double>(i) / static_cast<double>(n - 1);
            out.push_back(Curve::constant(cfg_.interval, p));
        }
        return out;
    }

    std::vector<Curve> random_curves() const {
        std::mt19937_64 rng(cfg_.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::size_t n = cfg_.pieces;
        Vec ts(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            ts[i] = cfg_.interval.a + cfg_.interval.length() * static_cast<double>(i) / static_cast<double>(n);
        Vec theta_k(n + 1, 0.0);
        for (std::size_t k = 1; k <= n; ++k) theta_k[k] = theta_(ts[k] - ts[0]);

        std::vector<Curve> out;
        for (std::size_t c = 0; c < cfg_.n_curves; ++c) {
            Vec center = detail::sample_in_ball(rng, cfg_.dim, 0.5 * cfg_.ball);
            std::vector<Vec> w(n + 1, Vec(cfg_.dim, 0.0));
            for (std::size_t i = 1; i <= n; ++i)
                for (std::size_t d = 0; d < cfg_.dim; ++d) w[i][d] = w[i - 1][d] + gauss(rng);
            double lambda = std::numeric_limits<double>::infinity();
            double wmax = 0.0;
            for (std::size_t a = 0; a <= n; ++a) {
                wmax = std::max(wmax, norm2(w[a]));
                for (std::size_t b = a + 1; b <= n; ++b) {
                    const double dw = distance2(w[a], w[b]);
                    if (dw > 0) lambda = std::min(lambda, theta_k[b - a] / dw);
                }
            }
            if (wmax > 0) lambda = std::min(lambda, (cfg_.ball - norm2(center)) / wmax);
            if (!std::isfinite(lambda)) lambda = 0.0;
            lambda *= 0.5 + 0.5 * unif(rng);
            std::vector<Vec> pts(n + 1, center);
            for (std::size_t i = 0; i <= n; ++i)
                for (std::size_t d = 0; d < cfg_.dim; ++d) pts[i][d] += lambda * w[i][d];
            out.push_back(Curve::piecewise_linear(ts, std::move(pts)));
        }
        return out;
    }

    std::vector<Curve> curves() const {
        auto out = constant_curves();
        auto r = random_curves();
        out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
        return out;
    }

    /// Checks the modulus and ball constraints on the breakpoints of `c`.
    bool admissible(const Curve& c, double slack = 1e-12) const {
        if (!c.is_table()) return c.sup_radius(64) <= cfg_.ball + slack;
        const auto& ts = c.breakpoints();
        for (std::size_t a = 0; a < ts.size(); ++a) {
            const Vec ya = c(ts[a]);
            if (norm2(ya) > cfg_.ball + slack) return false;
            for (std::size_t b = a + 1; b < ts.size(); ++b)
                if (distance2(ya, c(ts[b])) > theta_(ts[b] - ts[a]) + slack) return false;
        }
        return true;
    }

private:
    Config cfg_;
    std::function<double(double)> theta_;
};

/// Modulus theta_j^I of the m_j-bounds of a family, tabulated lazily by window length.
inline std::function<double(double)> make_theta(std::vector<PositiveMeasure> bounds, Interval I,
                                                std::size_t grid = 512) {
    auto cache = std::make_shared<std::map<double, double>>();
    auto E = std::make_shared<const std::vector<PositiveMeasure>>(std::move(bounds));
    return [E, I, grid, cache](double s) {
        auto it = cache->find(s);
        if (it != cache->end()) return it->second;
        const double v = theta_modulus(*E, I, s, grid);
        cache->emplace(s, v);
        return v;
    };
}

struct ThetaSeminorm {
    double value = 0.0;  // lower bound of the sup over the curve family
    std::size_t curves = 0;
    std::size_t failures = 0;
};

/// max over sampled curves of |int_I d nu_{y(s)}|; a lower bound of the true seminorm.
inline ThetaSeminorm seminorm_Theta(const ParametricMeasure& nu, Interval I, const CurveFamilySampler& sampler,
                                    IntegrationOptions opts = {}) {
    ThetaSeminorm r;
    for (const auto& c : sampler.curves()) {
        try {
            const auto res = integrate_along(nu, c, I, opts);
            r.value = std::max(r.value, norm2(res.value));
            ++r.curves;
        } catch (const Error&) {
            ++r.failures;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Hull sampling
// ---------------------------------------------------------------------------

struct FlowReport {
    bool identity_exact = false;     // nu . 0 has the same descriptor as nu
    bool composition_holds = false;  // (nu . t) . s and nu . (t + s) agree on sampled pairs
    double composition_max_distance = 0.0;
    std::size_t pairs_checked = 0;
};

struct HullSample {
    Vec shifts;
    std::vector<Vec> distances;
    FlowReport flow;
    Vec cover_radius;  // r(n): greedy n-center covering radius
    Vec epsilon;       // eps(n) = 2 r(n-1): every n-subset has a pair closer than this
};

inline HullSample hull_sample(const ParametricMeasure& nu, Vec shifts, const SeminormIndexSet& idx = {}) {
    HullSample h;
    const std::size_t n = shifts.size();
    h.shifts = shifts;
    std::vector<ParametricMeasure> members;
    members.reserve(n);
    for (double s : shifts) members.push_back(nu.translated(s));
    h.distances.assign(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            h.distances[i][k] = h.distances[k][i] = dist_sigma_D(members[i], members[k], idx);

    const auto id = nu.translated(0.0);
    h.flow.identity_exact = id.shift() == nu.shift() && dist_sigma_D(id, nu, idx) == 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 4); ++i)
        for (std::size_t k = 0; k < std::min<std::size_t>(n, 4); ++k) {
            const double d = dist_sigma_D(members[i].translated(shifts[k]), nu.translated(shifts[i] + shifts[k]), idx);
            h.flow.composition_max_distance = std::max(h.flow.composition_max_distance, d);
            ++h.flow.pairs_checked;
        }
    h.flow.composition_holds = h.flow.composition_max_distance <= 1e-12;

    if (n > 0) {
        Vec nearest(n, std::numeric_limits<double>::infinity());
        std::size_t next = 0;
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], h.distances[next][i]);
            const auto far = std::max_element(nearest.begin(), nearest.end());
            h.cover_radius.push_back(*far);
            next = static_cast<std::size_t>(far - nearest.begin());
        }
        for (std::size_t m = 2; m <= n; ++m) h.epsilon.push_back(2.0 * h.cover_radius[m - 2]);
    }
    return h;
}

}  // namespace mdode
