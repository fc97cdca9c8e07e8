#pragma once

// Riemann sums of parametric b-measures along continuous curves over tagged
// partitions, and the refinement-until-Cauchy integral.
//
// The integral of a bounded h against nu reduces to the h == 1 case through
// the lift to R^{N+1} (append h as an extra coordinate); only h == 1 is provided.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/parametric.hpp"

namespace mdode {

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

class Curve {
public:
    using Fn = std::function<void(double t, std::span<double> out)>;

    static Curve from_function(Interval domain, std::size_t dim, Fn f) {
        require_finite(domain);
        Curve c;
        c.domain_ = domain;
        c.dim_ = dim;
        c.fn_ = std::make_shared<const Fn>(std::move(f));
        return c;
    }

    /// Piecewise-linear interpolant through (times[k], points[k]).
    static Curve piecewise_linear(Vec times, std::vector<Vec> points) {
        if (times.size() < 2 || times.size() != points.size())
            throw ConfigurationError("piecewise-linear curve needs >= 2 matching samples");
        for (std::size_t k = 0; k + 1 < times.size(); ++k)
            if (!(times[k] < times[k + 1])) throw ConfigurationError("curve times must increase");
        const auto dim = points.front().size();
        for (const auto& p : points) {
            if (p.size() != dim) throw ConfigurationError("curve points have inconsistent dimension");
            for (double v : p)
                if (!std::isfinite(v)) throw ConfigurationError("curve points must be finite");
        }
        Curve c;
        c.domain_ = {times.front(), times.back()};
        c.dim_ = dim;
        c.table_ = std::make_shared<const Table>(Table{std::move(times), std::move(points)});
        return c;
    }

    static Curve constant(Interval domain, Vec p) {
        return from_function(domain, p.size(),
                             [p](double, std::span<double> out) { std::copy(p.begin(), p.end(), out.begin()); });
    }

    Interval domain() const { return domain_; }
    std::size_t dim() const { return dim_; }
    bool is_table() const { return static_cast<bool>(table_); }

    /// Breakpoints of a table curve (empty for callables).
    const Vec& breakpoints() const {
        static const Vec empty;
        return table_ ? table_->t : empty;
    }

    void at(double t, std::span<double> out) const {
        if (table_) {
            const auto& T = table_->t;
            const auto& P = table_->p;
            if (t <= T.front()) {
                std::copy(P.front().begin(), P.front().end(), out.begin());
                return;
            }
            if (t >= T.back()) {
                std::copy(P.back().begin(), P.back().end(), out.begin());
                return;
            }
            const auto k = static_cast<std::size_t>(std::upper_bound(T.begin(), T.end(), t) - T.begin()) - 1;
            const double w = (t - T[k]) / (T[k + 1] - T[k]);
            for (std::size_t i = 0; i < dim_; ++i) out[i] = P[k][i] + w * (P[k + 1][i] - P[k][i]);
            return;
        }
        (*fn_)(t + shift_, out);
    }

    Vec operator()(double t) const {
        Vec out(dim_);
        at(t, out);
        return out;
    }

    /// s -> y(s - t) on the domain shifted by t.
    Curve shifted(double t) const {
        if (table_) {
            Vec times = table_->t;
            for (double& s : times) s += t;
            return piecewise_linear(std::move(times), table_->p);
        }
        Curve c = *this;
        c.domain_ = domain_.shifted(t);
        c.shift_ = shift_ - t;
        return c;
    }

    /// Sample times: breakpoints for tables, otherwise a uniform grid with `samples` cells.
    Vec sample_times(std::size_t samples = 1024) const {
        if (table_) return table_->t;
        Vec ts(samples + 1);
        for (std::size_t k = 0; k <= samples; ++k)
            ts[k] = k == samples ? domain_.b : domain_.a + domain_.length() * static_cast<double>(k) / samples;
        return ts;
    }

    /// max |y(t)| over sample times (exact for piecewise-linear curves).
    double sup_radius(std::size_t samples = 1024) const {
        double r = 0.0;
        Vec buf(dim_);
        for (double t : sample_times(samples)) {
            at(t, buf);
            r = std::max(r, norm2(buf));
        }
        return r;
    }

private:
    struct Table {
        Vec t;
        std::vector<Vec> p;
    };

    Interval domain_{};
    std::size_t dim_ = 1;
    std::shared_ptr<const Fn> fn_;
    std::shared_ptr<const Table> table_;
    double shift_ = 0.0;
};

/// Sup of |x(t) - y(t)| on [a,b]; exact when both curves are piecewise linear
/// (the maximum sits on the union of breakpoints), sampled otherwise.
inline double sup_distance(const Curve& x, const Curve& y, Interval I, std::size_t samples = 2048) {
    Vec ts;
    for (const Curve* c : {&x, &y})
        for (double t : c->breakpoints())
            if (I.contains(t)) ts.push_back(t);
    if (!x.is_table() || !y.is_table())
        for (std::size_t k = 0; k <= samples; ++k) ts.push_back(I.a + I.length() * static_cast<double>(k) / samples);
    ts.push_back(I.a);
    ts.push_back(I.b);
    double d = 0.0;
    Vec bx(x.dim()), by(y.dim());
    for (double t : ts) {
        x.at(t, bx);
        y.at(t, by);
        d = std::max(d, distance2(bx, by));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Tagged partitions
// ---------------------------------------------------------------------------

enum class TagRule { left, midpoint, right };

struct TaggedPartition {
    Vec points;  // t_0 < ... < t_k
    Vec tags;    // tags[i] in [t_i, t_{i+1}]

    static TaggedPartition uniform(Interval I, std::size_t pieces, TagRule rule = TagRule::midpoint) {
        if (pieces == 0) throw ConfigurationError("partition needs at least one piece");
        TaggedPartition p;
        p.points.resize(pieces + 1);
        for (std::size_t i = 0; i <= pieces; ++i)
            p.points[i] = i == pieces ? I.b : I.a + I.length() * static_cast<double>(i) / static_cast<double>(pieces);
        p.tags.resize(pieces);
        for (std::size_t i = 0; i < pieces; ++i) {
            switch (rule) {
                case TagRule::left: p.tags[i] = p.points[i]; break;
                case TagRule::right: p.tags[i] = p.points[i + 1]; break;
                case TagRule::midpoint: p.tags[i] = 0.5 * (p.points[i] + p.points[i + 1]); break;
            }
        }
        return p;
    }

    Interval span() const { return {points.front(), points.back()}; }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i) m = std::max(m, points[i + 1] - points[i]);
        return m;
    }

    /// Ordered points, tags inside their cells and mesh < delta.
    bool is_delta_fine(double delta) const {
        if (points.size() < 2 || tags.size() + 1 != points.size()) return false;
        for (std::size_t i = 0; i + 1 < points.size(); ++i) {
            if (!(points[i] < points[i + 1])) return false;
            if (tags[i] < points[i] || tags[i] > points[i + 1]) return false;
        }
        return mesh() < delta;
    }
};

// ---------------------------------------------------------------------------
// Riemann sums and integrals
// ---------------------------------------------------------------------------

/// sum_i nu_{y(tau_i)}[t_i, t_{i+1}], componentwise, compensated in index order.
inline Vec riemann_sum(const ParametricMeasure& nu, const Curve& y, const TaggedPartition& p) {
    if (p.points.size() < 2 || p.tags.size() + 1 != p.points.size())
        throw ConfigurationError("malformed tagged partition");
    const Interval dom = y.domain();
    const double slack = 1e-12 * std::max(1.0, std::abs(dom.a) + std::abs(dom.b));
    if (p.points.front() < dom.a - slack || p.points.back() > dom.b + slack)
        throw PreconditionError("partition is not contained in the curve's domain");
    if (y.dim() != nu.input_dim()) throw PreconditionError("curve dimension does not match the measure");
    const auto M = nu.output_dim();
    std::vector<CompensatedSum> acc(M);
    Vec yt(y.dim()), inc(M);
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
        y.at(p.tags[i], yt);
        nu.eval(yt, {p.points[i], p.points[i + 1]}, inc);
        for (std::size_t c = 0; c < M; ++c) acc[c].add(inc[c]);
    }
    Vec out(M);
    for (std::size_t c = 0; c < M; ++c) out[c] = acc[c].value();
    return out;
}

struct IntegrationOptions {
    double tol = 1e-9;
    int max_refinements = 24;
    int min_refinements = 1;
    TagRule tags = TagRule::midpoint;
};

struct IntegralResult {
    Vec value;
    double mesh = 0.0;
    int refinements = 0;
    double est_error = 0.0;

    double scalar() const { return value.at(0); }
};

/// Halves a uniform partition until two successive sums differ (max norm) by less than tol.
inline IntegralResult integrate_along(const ParametricMeasure& nu, const Curve& y, Interval I,
                                      const IntegrationOptions& opts = {}) {
    require_finite(I);
    if (!(opts.tol > 0)) throw ConfigurationError("integrate_along: tol must be positive");
    if (I.a == I.b) return {Vec(nu.output_dim(), 0.0), 0.0, 0, 0.0};
    Vec prev = riemann_sum(nu, y, TaggedPartition::uniform(I, 1, opts.tags));
    double diff = INFINITY;
    for (int r = 1; r <= opts.max_refinements; ++r) {
        const std::size_t pieces = std::size_t{1} << r;
        Vec cur = riemann_sum(nu, y, TaggedPartition::uniform(I, pieces, opts.tags));
        diff = distance_inf(cur, prev);
        prev = std::move(cur);
        if (r >= opts.min_refinements && diff < opts.tol)
            return {prev, I.length() / static_cast<double>(pieces), r, diff};
    }
    throw ToleranceFailure("integrate_along: no convergence within max refinements", prev, diff);
}

/// Default tolerance: 1e-9 for smooth fields, 1e-7 when a Cantor-type component is present.
inline double default_integration_tol(bool has_singular_component) { return has_singular_component ? 1e-7 : 1e-9; }

struct BoundsAlongResult {
    bool m_bound_holds = true;   // |int d nu_y| <= m_j[a,b] (and for x)
    bool l_bound_holds = true;   // |int d nu_x - int d nu_y| <= l_j[a,b] omega_j(|x - y|_inf)
    double m_ratio = 0.0;
    double l_ratio = 0.0;
};

/// Checks both integral bounds for curves with images inside B_j.
inline BoundsAlongResult check_bounds_along(const ParametricMeasure& nu, const Curve& x, const Curve& y, Interval I,
                                            int j, const IntegrationOptions& opts = {}) {
    if (x.sup_radius() > j * (1 + 1e-12) || y.sup_radius() > j * (1 + 1e-12))
        throw PreconditionError("curve image escapes the ball B_j");
    const auto& b = nu.bounds().ball(j);
    const auto ix = integrate_along(nu, x, I, opts);
    const auto iy = integrate_along(nu, y, I, opts);
    const double mI = b.m.eval(I);
    const double lI = b.l.eval(I);
    const double w = b.omega(sup_distance(x, y, I));
    const double slack = 10.0 * opts.tol + 1e-12;
    BoundsAlongResult r;
    for (std::size_t c = 0; c < nu.output_dim(); ++c) {
        const double mx = std::max(std::abs(ix.value[c]), std::abs(iy.value[c]));
        const double dl = std::abs(ix.value[c] - iy.value[c]);
        r.m_ratio = std::max(r.m_ratio, mI > 0 ? mx / mI : (mx > slack ? INFINITY : 0.0));
        r.l_ratio = std::max(r.l_ratio, lI * w > 0 ? dl / (lI * w) : (dl > slack ? INFINITY : 0.0));
        if (mx > mI + slack) r.m_bound_holds = false;
        if (dl > lI * w + slack) r.l_bound_holds = false;
    }
    return r;
}

struct TranslationCheck {
    bool holds = true;
    double residual = 0.0;
};

/// int_a^b d(nu.t)_{y(s)} versus int_{a+t}^{b+t} d nu_{y(s-t)}, each integrated separately.
inline TranslationCheck translation_identity_check(const ParametricMeasure& nu, const Curve& y, double t, double tol,
                                                   IntegrationOptions opts = {}) {
    opts.tol = std::min(opts.tol, tol);
    const Interval I = y.domain();
    const auto lhs = integrate_along(nu.translated(t), y, I, opts);
    const auto rhs = integrate_along(nu, y.shifted(t), I.shifted(t), opts);
    TranslationCheck c;
    c.residual = distance_inf(lhs.value, rhs.value);
    c.holds = c.residual < tol;
    return c;
}

}  // namespace mdode
