#pragma once

// Parametric b-measures y -> nu_y on R^N with m-bounds, l-bounds and moduli
// of continuity per ball B_j, plus the Caratheodory lift d nu_y = g(y,t) dt.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/measures.hpp"
#include "mdode/quadrature.hpp"

namespace mdode {

// ---------------------------------------------------------------------------
// Moduli of continuity
// ---------------------------------------------------------------------------

class Modulus {
public:
    enum class Kind { identity, power, table, max_of };

    Modulus() = default;  // identity

    static Modulus identity() { return {}; }

    /// omega(h) = coefficient * h^alpha, 0 < alpha <= 1.
    static Modulus power(double alpha, double coefficient = 1.0) {
        if (!(alpha > 0.0) || alpha > 1.0 || !(coefficient > 0.0))
            throw ConfigurationError("power modulus needs 0 < alpha <= 1 and a positive coefficient");
        Modulus m;
        m.kind_ = Kind::power;
        m.alpha_ = alpha;
        m.coef_ = coefficient;
        return m;
    }

    /// Piecewise-linear through (0,0) and the samples; constant past the last sample.
    static Modulus table(Vec h, Vec w) {
        if (h.empty() || h.size() != w.size()) throw ConfigurationError("modulus table needs matching samples");
        double ph = 0.0;
        double pw = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (!(h[i] > ph) || w[i] < pw) throw ConfigurationError("modulus table must be increasing in h and nondecreasing");
            ph = h[i];
            pw = w[i];
        }
        Modulus m;
        m.kind_ = Kind::table;
        m.h_ = std::make_shared<const Vec>(std::move(h));
        m.w_ = std::make_shared<const Vec>(std::move(w));
        return m;
    }

    /// Pointwise maximum, again a modulus.
    static Modulus max_of(std::vector<Modulus> parts) {
        if (parts.empty()) return identity();
        if (parts.size() == 1) return parts.front();
        Modulus m;
        m.kind_ = Kind::max_of;
        m.parts_ = std::make_shared<const std::vector<Modulus>>(std::move(parts));
        return m;
    }

    Kind kind() const { return kind_; }

    double operator()(double h) const {
        if (h <= 0.0) return 0.0;
        switch (kind_) {
            case Kind::identity: return h;
            case Kind::power: return coef_ * std::pow(h, alpha_);
            case Kind::table: {
                const auto& H = *h_;
                const auto& W = *w_;
                if (h >= H.back()) return W.back();
                const auto i = static_cast<std::size_t>(std::upper_bound(H.begin(), H.end(), h) - H.begin());
                const double h0 = i == 0 ? 0.0 : H[i - 1];
                const double w0 = i == 0 ? 0.0 : W[i - 1];
                return w0 + (W[i] - w0) * (h - h0) / (H[i] - h0);
            }
            case Kind::max_of: {
                double v = 0.0;
                for (const auto& p : *parts_) v = std::max(v, p(h));
                return v;
            }
        }
        return h;
    }

private:
    Kind kind_ = Kind::identity;
    double alpha_ = 1.0;
    double coef_ = 1.0;
    std::shared_ptr<const Vec> h_;
    std::shared_ptr<const Vec> w_;
    std::shared_ptr<const std::vector<Modulus>> parts_;
};

/// Samples omega(0) = 0, monotonicity and omega(h) -> 0.
inline bool is_valid_modulus(const Modulus& w, double h_max = 10.0, int samples = 200) {
    if (w(0.0) != 0.0) return false;
    double prev = 0.0;
    for (int i = 1; i <= samples; ++i) {
        const double v = w(h_max * i / samples);
        if (v < prev) return false;
        prev = v;
    }
    return w(1e-12) < 1e-3;
}

// ---------------------------------------------------------------------------
// Bounds per ball
// ---------------------------------------------------------------------------

struct BallBounds {
    PositiveMeasure m;
    PositiveMeasure l;
    Modulus omega;
};

/// Bounds for balls B_1..B_Jmax; larger indices clamp to Jmax with a warning.
class BoundFamily {
public:
    static constexpr int default_max_ball = 16;

    BoundFamily() = default;

    explicit BoundFamily(std::vector<BallBounds> balls) : balls_(std::move(balls)) {
        if (balls_.empty()) throw ConfigurationError("bound family needs at least one ball");
    }

    static BoundFamily from(const std::function<BallBounds(int)>& make, int max_ball = default_max_ball) {
        if (max_ball < 1) throw ConfigurationError("bound family: max ball index must be >= 1");
        std::vector<BallBounds> balls;
        balls.reserve(static_cast<std::size_t>(max_ball));
        for (int j = 1; j <= max_ball; ++j) balls.push_back(make(j));
        return BoundFamily(std::move(balls));
    }

    bool empty() const { return balls_.empty(); }
    int max_ball() const { return static_cast<int>(balls_.size()); }

    const BallBounds& ball(int j) const {
        if (balls_.empty()) throw ConfigurationError("no bounds attached to this parametric measure");
        if (j < 1) j = 1;
        if (j > max_ball()) {
            warn("ball index " + std::to_string(j) + " clamped to " + std::to_string(max_ball()));
            j = max_ball();
        }
        return balls_[static_cast<std::size_t>(j - 1)];
    }

    /// Bounds of nu.t are {m_j.t}, {l_j.t} with the same moduli.
    BoundFamily translated(double t) const {
        std::vector<BallBounds> out;
        out.reserve(balls_.size());
        for (const auto& b : balls_) out.push_back({b.m.translated(t), b.l.translated(t), b.omega});
        return BoundFamily(std::move(out));
    }

    /// Checks m_j <= m_{j+1}, l_j <= l_{j+1} on the intervals and omega_j <= omega_{j+1} on a grid.
    bool is_nested(std::span<const Interval> intervals, double slack = 1e-12) const {
        for (std::size_t j = 0; j + 1 < balls_.size(); ++j) {
            for (const auto& I : intervals) {
                if (balls_[j].m.eval(I) > balls_[j + 1].m.eval(I) + slack) return false;
                if (balls_[j].l.eval(I) > balls_[j + 1].l.eval(I) + slack) return false;
            }
            for (int k = 1; k <= 50; ++k) {
                const double h = 0.1 * k;
                if (balls_[j].omega(h) > balls_[j + 1].omega(h) + slack) return false;
            }
        }
        return true;
    }

private:
    std::vector<BallBounds> balls_;
};

// ---------------------------------------------------------------------------
// Parametric measures
// ---------------------------------------------------------------------------

/// y in R^N -> (nu^1_y, ..., nu^M_y). The scalar case is M = 1.
/// Translation is stored as an accumulated shift so that (nu.s).t == nu.(s+t) exactly.
class ParametricMeasure {
public:
    using EvalFn = std::function<void(std::span<const double> y, Interval I, std::span<double> out)>;

    ParametricMeasure() = default;

    ParametricMeasure(std::size_t input_dim, std::size_t output_dim, EvalFn fn, BoundFamily bounds = {})
        : in_(input_dim), out_(output_dim), fn_(std::make_shared<const EvalFn>(std::move(fn))),
          bounds_(std::move(bounds)) {
        if (in_ == 0 || out_ == 0) throw ConfigurationError("parametric measure dimensions must be positive");
    }

    std::size_t input_dim() const { return in_; }
    std::size_t output_dim() const { return out_; }
    double shift() const { return shift_; }
    const BoundFamily& bounds() const { return bounds_; }
    bool has_bounds() const { return !bounds_.empty(); }

    void eval(std::span<const double> y, Interval I, std::span<double> out) const {
        require_finite(I);
        if (I.a == I.b) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        (*fn_)(y, shift_ == 0.0 ? I : I.shifted(shift_), out);
    }

    Vec eval(std::span<const double> y, Interval I) const {
        Vec out(out_);
        eval(y, I, out);
        return out;
    }

    double eval_scalar(std::span<const double> y, Interval I, std::size_t component = 0) const {
        Vec out(out_);
        eval(y, I, out);
        return out.at(component);
    }

    /// (nu.t)_y(I) = nu_y(I + t).
    ParametricMeasure translated(double t) const {
        ParametricMeasure r = *this;
        r.shift_ = shift_ + t;
        r.bounds_ = bounds_.empty() ? bounds_ : bounds_.translated(t);
        return r;
    }

    /// Single component i as a scalar parametric measure sharing the bounds.
    ParametricMeasure component(std::size_t i) const {
        if (i >= out_) throw ConfigurationError("component index out of range");
        auto base = *this;
        auto fn = [base, i](std::span<const double> y, Interval I, std::span<double> out) {
            Vec all(base.output_dim());
            base.eval(y, I, all);
            out[0] = all[i];
        };
        return ParametricMeasure(in_, 1, std::move(fn), bounds_);
    }

    ParametricMeasure with_bounds(BoundFamily b) const {
        auto r = *this;
        r.bounds_ = std::move(b);
        return r;
    }

private:
    std::size_t in_ = 1;
    std::size_t out_ = 1;
    std::shared_ptr<const EvalFn> fn_;
    double shift_ = 0.0;
    BoundFamily bounds_;
};

inline ParametricMeasure translate_parametric(const ParametricMeasure& nu, double t) { return nu.translated(t); }

/// Linear combination sum_k alpha_k nu_k. Bounds: m = sum |alpha| m_k, l = sum |alpha| l_k,
/// omega = pointwise max of the moduli.
inline ParametricMeasure combine(const std::vector<std::pair<double, ParametricMeasure>>& terms) {
    if (terms.empty()) throw ConfigurationError("combine: no terms");
    const auto in = terms.front().second.input_dim();
    const auto outd = terms.front().second.output_dim();
    bool bounded = true;
    for (const auto& [c, nu] : terms) {
        if (nu.input_dim() != in || nu.output_dim() != outd) throw ConfigurationError("combine: dimension mismatch");
        bounded = bounded && nu.has_bounds();
    }
    auto fn = [terms, outd](std::span<const double> y, Interval I, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        Vec buf(outd);
        for (const auto& [c, nu] : terms) {
            nu.eval(y, I, buf);
            for (std::size_t i = 0; i < outd; ++i) out[i] += c * buf[i];
        }
    };
    BoundFamily bounds;
    if (bounded) {
        int jmax = terms.front().second.bounds().max_ball();
        for (const auto& t : terms) jmax = std::min(jmax, t.second.bounds().max_ball());
        bounds = BoundFamily::from(
            [&terms](int j) {
                std::vector<std::pair<double, BMeasure>> m_terms, l_terms;
                std::vector<Modulus> moduli;
                for (const auto& [c, nu] : terms) {
                    const auto& b = nu.bounds().ball(j);
                    m_terms.emplace_back(std::abs(c), b.m.measure());
                    l_terms.emplace_back(std::abs(c), b.l.measure());
                    moduli.push_back(b.omega);
                }
                return BallBounds{PositiveMeasure(BMeasure::combo(std::move(m_terms))),
                                  PositiveMeasure(BMeasure::combo(std::move(l_terms))),
                                  Modulus::max_of(std::move(moduli))};
            },
            jmax);
    }
    return ParametricMeasure(in, outd, std::move(fn), std::move(bounds));
}

/// y-independent parametric measure nu_y = mu (every component equal to mu, M = output_dim).
/// `m_bound` must dominate |mu|; the l-bound is zero.
inline ParametricMeasure constant_parametric(const BMeasure& mu, const PositiveMeasure& m_bound,
                                             std::size_t input_dim = 1, std::size_t output_dim = 1) {
    auto fn = [mu](std::span<const double>, Interval I, std::span<double> out) {
        const double v = mu.eval(I);
        std::fill(out.begin(), out.end(), v);
    };
    auto bounds = BoundFamily::from(
        [m_bound](int) { return BallBounds{m_bound, PositiveMeasure(BMeasure{}), Modulus::identity()}; });
    return ParametricMeasure(input_dim, output_dim, std::move(fn), std::move(bounds));
}

// ---------------------------------------------------------------------------
// Separable fields: nu_y = sum_k c_k(y) mu_k
// ---------------------------------------------------------------------------

/// One term c(y) * mu of a separable parametric measure; c writes M components.
struct SeparableTerm {
    std::function<void(std::span<const double> y, std::span<double> coeff)> coefficient;
    BMeasure measure;
};

/// Exact evaluation: each interval mass mu_k(I) is taken from the primitive,
/// so singular or piecewise-constant parts are integrated without quadrature.
inline ParametricMeasure separable(std::size_t input_dim, std::size_t output_dim, std::vector<SeparableTerm> terms,
                                   BoundFamily bounds = {}) {
    auto shared = std::make_shared<const std::vector<SeparableTerm>>(std::move(terms));
    auto fn = [shared, output_dim](std::span<const double> y, Interval I, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        double coeff_buf[16];
        Vec heap;
        std::span<double> coeff;
        if (output_dim <= 16) {
            coeff = std::span<double>(coeff_buf, output_dim);
        } else {
            heap.resize(output_dim);
            coeff = heap;
        }
        for (const auto& term : *shared) {
            const double mass = term.measure.eval(I);
            term.coefficient(y, coeff);
            for (std::size_t i = 0; i < output_dim; ++i) out[i] += coeff[i] * mass;
        }
    };
    return ParametricMeasure(input_dim, output_dim, std::move(fn), std::move(bounds));
}

// ---------------------------------------------------------------------------
// Caratheodory fields
// ---------------------------------------------------------------------------

/// g(y,t) in R^N with pointwise bound densities |g(y,t)| <= m_density(j,t) on B_j and
/// |g(y1,t) - g(y2,t)| <= l_density(j,t) |y1 - y2|.
struct CaratheodoryField {
    std::size_t dim = 1;
    std::function<void(std::span<const double> y, double t, std::span<double> out)> g;
    std::function<double(int j, double t)> m_density;
    std::function<double(int j, double t)> l_density;
    /// Optional exact bound measures; when empty they are built from the densities by quadrature.
    std::function<BallBounds(int j)> bound_measures;
    int max_ball = BoundFamily::default_max_ball;

    Vec operator()(std::span<const double> y, double t) const {
        Vec out(dim);
        g(y, t, out);
        return out;
    }

    BoundFamily bounds(const QuadratureOptions& quad = {}) const {
        if (bound_measures) return BoundFamily::from(bound_measures, max_ball);
        if (!m_density || !l_density) return {};
        auto md = m_density;
        auto ld = l_density;
        return BoundFamily::from(
            [md, ld, quad](int j) {
                return BallBounds{PositiveMeasure(BMeasure::density([md, j](double t) { return md(j, t); }, quad)),
                                  PositiveMeasure(BMeasure::density([ld, j](double t) { return ld(j, t); }, quad)),
                                  Modulus::identity()};
            },
            max_ball);
    }
};

/// Lift d nu_y = g(y,t) dt, each component integrated by adaptive Simpson over I.
inline ParametricMeasure from_caratheodory(const CaratheodoryField& field, const QuadratureOptions& quad = {}) {
    if (!field.g) throw ConfigurationError("caratheodory field without g");
    auto g = field.g;
    const auto dim = field.dim;
    auto fn = [g, dim, quad](std::span<const double> y, Interval I, std::span<double> out) {
        Vec ycopy(y.begin(), y.end());
        auto integrand = [&](double t, std::span<double> o) { g(ycopy, t, o); };
        auto r = integrate_vector(integrand, dim, I.a, I.b, quad);
        if (!r.converged)
            throw ToleranceFailure("caratheodory quadrature did not converge", r.value, r.est_error);
        std::copy(r.value.begin(), r.value.end(), out.begin());
    };
    return ParametricMeasure(dim, dim, std::move(fn), field.bounds(quad));
}

struct FieldSampleReport {
    double max_m_ratio = 0.0;
    double max_l_ratio = 0.0;
    bool pass = true;
};

/// Samples |g| <= m_density and the Lipschitz quotient <= l_density on B_j x [t0,t1].
inline FieldSampleReport check_caratheodory_bounds(const CaratheodoryField& field, int j, Interval times,
                                                   int n_samples, std::uint64_t seed = 7, double tol = 1e-9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(times.a, times.b);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto sample_ball = [&]() {
        Vec y(field.dim);
        for (auto& v : y) v = gauss(rng);
        const double n = norm2(y);
        const double r = j * std::pow(u01(rng), 1.0 / static_cast<double>(field.dim));
        for (auto& v : y) v = n > 0 ? v / n * r : 0.0;
        return y;
    };
    FieldSampleReport rep;
    for (int s = 0; s < n_samples; ++s) {
        const double t = ut(rng);
        const Vec y1 = sample_ball();
        const Vec y2 = sample_ball();
        const Vec g1 = field(y1, t);
        const Vec g2 = field(y2, t);
        const double md = field.m_density(j, t);
        const double ld = field.l_density(j, t);
        const double gn = norm_inf(g1);
        rep.max_m_ratio = std::max(rep.max_m_ratio, md > 0 ? gn / md : (gn > 0 ? INFINITY : 0.0));
        const double dy = distance2(y1, y2);
        const double dg = distance_inf(g1, g2);
        const double denom = ld * dy;
        rep.max_l_ratio = std::max(rep.max_l_ratio, denom > 0 ? dg / denom : (dg > 0 ? INFINITY : 0.0));
    }
    rep.pass = rep.max_m_ratio <= 1.0 + tol && rep.max_l_ratio <= 1.0 + tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Bump-scaled measures
// ---------------------------------------------------------------------------

/// nu_y = phi(y) nu0 for a C^1 bump phi: R^N -> [0,1] with Lipschitz constant c0.
/// m-bound m0, l-bound c0 m0, identity modulus.
inline ParametricMeasure bump_scaled(std::size_t input_dim, std::function<double(std::span<const double>)> phi,
                                     double c0, const BMeasure& nu0, const PositiveMeasure& m0) {
    if (!(c0 >= 0.0)) throw ConfigurationError("bump_scaled: Lipschitz constant must be nonnegative");
    auto fn = [phi, nu0](std::span<const double> y, Interval I, std::span<double> out) {
        const double p = phi(y);
        out[0] = p == 0.0 ? 0.0 : p * nu0.eval(I);
    };
    auto bounds = BoundFamily::from([&](int) { return BallBounds{m0, m0.scaled(c0), Modulus::identity()}; });
    return ParametricMeasure(input_dim, 1, std::move(fn), std::move(bounds));
}

/// Estimates the Lipschitz constant of phi on a box [-R,R]^N by sampling finite differences.
inline double estimate_lipschitz(std::size_t input_dim, const std::function<double(std::span<const double>)>& phi,
                                 double radius, int samples = 4000, std::uint64_t seed = 11) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0.0;
    Vec y(input_dim), z(input_dim);
    for (int s = 0; s < samples; ++s) {
        for (auto& v : y) v = u(rng);
        const double h = 1e-6;
        for (std::size_t i = 0; i < input_dim; ++i) z[i] = y[i] + h * gauss(rng);
        const double d = distance2(y, z);
        if (d > 0) best = std::max(best, std::abs(phi(y) - phi(z)) / d);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Bound verification
// ---------------------------------------------------------------------------

struct BoundsReport {
    double max_m_ratio = 0.0;  // max |nu_y(I)| / m_j(I)
    double max_l_ratio = 0.0;  // max |nu_y1(I) - nu_y2(I)| / (l_j(I) omega_j(|y1 - y2|))
    int m_violations = 0;
    int l_violations = 0;
    int samples = 0;
    bool pass = true;
};

namespace detail {

inline Vec sample_in_ball(std::mt19937_64& rng, std::size_t dim, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Vec y(dim);
    for (auto& v : y) v = gauss(rng);
    const double n = norm2(y);
    const double r = radius * std::pow(u01(rng), 1.0 / static_cast<double>(dim));
    for (auto& v : y) v = n > 0 ? v / n * r : 0.0;
    return y;
}

inline double bound_ratio(double value, double bound) {
    if (bound > 0) return value / bound;
    return value > 0 ? INFINITY : 0.0;
}

}  // namespace detail

/// Samples the two defining inequalities of the ball-j bounds on the given intervals.
/// Half of the pairs are close (|y1 - y2| <= 1e-2 j) to probe the local Lipschitz quotient.
inline BoundsReport verify_bounds(const ParametricMeasure& nu, int j, int n_samples, std::span<const Interval> intervals,
                                  std::uint64_t seed = 1, double tol = 1e-9) {
    if (n_samples < 1) throw ConfigurationError("verify_bounds: n_samples must be >= 1");
    const auto& b = nu.bounds().ball(j);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    BoundsReport rep;
    Vec v1(nu.output_dim()), v2(nu.output_dim());
    for (int s = 0; s < n_samples; ++s) {
        const Vec y1 = detail::sample_in_ball(rng, nu.input_dim(), j);
        Vec y2 = detail::sample_in_ball(rng, nu.input_dim(), j);
        if (s % 2 == 1) {
            const Vec d = detail::sample_in_ball(rng, nu.input_dim(), 1e-2 * j);
            for (std::size_t i = 0; i < y2.size(); ++i) y2[i] = y1[i] + d[i];
            if (norm2(y2) > j) y2 = y1;
        }
        const double w = b.omega(distance2(y1, y2));
        for (const auto& I : intervals) {
            nu.eval(y1, I, v1);
            nu.eval(y2, I, v2);
            const double mI = b.m.eval(I);
            const double lI = b.l.eval(I);
            for (std::size_t i = 0; i < v1.size(); ++i) {
                const double rm = detail::bound_ratio(std::abs(v1[i]), mI);
                const double rl = detail::bound_ratio(std::abs(v1[i] - v2[i]), lI * w);
                rep.max_m_ratio = std::max(rep.max_m_ratio, rm);
                rep.max_l_ratio = std::max(rep.max_l_ratio, rl);
                if (rm > 1.0 + tol) ++rep.m_violations;
                if (rl > 1.0 + tol) ++rep.l_violations;
            }
            ++rep.samples;
        }
    }
    rep.pass = rep.m_violations == 0 && rep.l_violations == 0;
    return rep;
}

}  // namespace mdode
