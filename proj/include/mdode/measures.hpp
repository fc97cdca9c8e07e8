#pragma once

// Continuous real measures on bounded intervals ("b-measures"), represented
// through their primitive F with mu[a,b] = F(b) - F(a) and F(0) = 0.
//
// Descriptors are immutable and shared; every evaluation is pure.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mdode/cantor.hpp"
#include "mdode/core.hpp"
#include "mdode/quadrature.hpp"

namespace mdode {

class BMeasure;

namespace node {

struct Cantor {
    int depth;
    Interval support;
};

struct Density {
    std::function<double(double)> rho;
    QuadratureOptions quad;
};

struct Primitive {
    std::function<double(double)> F;
    std::function<double(double)> rho;  // optional pointwise density
};

/// Piecewise-constant density: values[i] on [breaks[i], breaks[i+1]), zero outside.
struct PiecewiseConstant {
    Vec breaks;
    Vec values;
    Vec cumulative;  // integral from breaks[0] to breaks[i]
};

/// Sampled primitive with linear interpolation, constant outside the table.
struct PrimitiveTable {
    Vec t;
    Vec F;
};

struct Combo {
    std::vector<std::pair<double, BMeasure>> terms;
};

struct Translated;

}  // namespace node

class BMeasure {
public:
    enum class Kind { cantor, density, primitive, piecewise_constant, primitive_table, combo, translated };

    /// Zero measure.
    BMeasure();

    static BMeasure cantor(int depth = 52, Interval support = {0.0, 1.0}, std::string origin = {});
    static BMeasure density(std::function<double(double)> rho, QuadratureOptions quad = {},
                            std::string origin = {});
    /// F must be continuous and locally of bounded variation; it is normalized by F(0).
    static BMeasure primitive_defined(std::function<double(double)> F, std::string origin = {},
                                      std::function<double(double)> rho = {});
    static BMeasure lebesgue();
    static BMeasure piecewise_constant(Vec breaks, Vec values, std::string origin = {});
    static BMeasure primitive_table(Vec t, Vec F, std::string origin = {});
    static BMeasure combo(std::vector<std::pair<double, BMeasure>> terms, std::string origin = {});

    Kind kind() const;

    /// F(t) = mu[0,t] for t >= 0 and -mu[t,0] for t < 0.
    double primitive(double t) const;

    /// mu[a,b] = F(b) - F(a); exactly zero on degenerate intervals.
    double eval(Interval I) const {
        require_finite(I);
        if (I.a == I.b) return 0.0;
        return primitive(I.b) - primitive(I.a);
    }

    /// Value of the density at t when the descriptor has one (density / piecewise-constant
    /// and combinations or translates of those); throws otherwise.
    double density_at(double t) const;
    bool has_density() const;

    /// JSON text this descriptor was built from, if any.
    const std::string& origin() const;

    // Descriptor-level access (used by serialization).
    const node::Cantor* as_cantor() const;
    const node::PiecewiseConstant* as_piecewise_constant() const;
    const node::PrimitiveTable* as_primitive_table() const;
    const node::Combo* as_combo() const;
    const node::Translated* as_translated() const;

    friend BMeasure translate(const BMeasure& mu, double s);

private:
    struct Node;
    explicit BMeasure(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

namespace node {
struct Translated {
    BMeasure base;
    double shift;
};
}  // namespace node

struct BMeasure::Node {
    std::variant<node::Cantor, node::Density, node::Primitive, node::PiecewiseConstant,
                 node::PrimitiveTable, node::Combo, node::Translated>
        v;
    std::string origin;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

inline BMeasure::BMeasure() : BMeasure(std::make_shared<const Node>(Node{node::Combo{}, {}})) {}

inline BMeasure BMeasure::cantor(int depth, Interval support, std::string origin) {
    if (depth < 1) throw ConfigurationError("cantor measure: depth must be >= 1");
    require_finite(support);
    if (!(support.a < support.b)) throw InvalidInterval("cantor measure: support must have positive length");
    return BMeasure(std::make_shared<const Node>(Node{node::Cantor{depth, support}, std::move(origin)}));
}

inline BMeasure BMeasure::density(std::function<double(double)> rho, QuadratureOptions quad, std::string origin) {
    return BMeasure(
        std::make_shared<const Node>(Node{node::Density{std::move(rho), quad}, std::move(origin)}));
}

inline BMeasure BMeasure::primitive_defined(std::function<double(double)> F, std::string origin,
                                            std::function<double(double)> rho) {
    return BMeasure(
        std::make_shared<const Node>(Node{node::Primitive{std::move(F), std::move(rho)}, std::move(origin)}));
}

inline BMeasure BMeasure::lebesgue() {
    static const BMeasure leb = primitive_defined([](double t) { return t; }, R"({"kind":"lebesgue"})",
                                                 [](double) { return 1.0; });
    return leb;
}

inline BMeasure BMeasure::piecewise_constant(Vec breaks, Vec values, std::string origin) {
    if (breaks.size() < 2 || values.size() + 1 != breaks.size())
        throw ConfigurationError("piecewise-constant measure needs n+1 breakpoints for n values");
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (!(breaks[i] < breaks[i + 1])) throw ConfigurationError("piecewise-constant breakpoints must increase");
    for (double b : breaks)
        if (!std::isfinite(b)) throw ConfigurationError("piecewise-constant breakpoints must be finite");
    Vec cumulative(breaks.size(), 0.0);
    CompensatedSum acc;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        acc.add(values[i] * (breaks[i + 1] - breaks[i]));
        cumulative[i + 1] = acc.value();
    }
    return BMeasure(std::make_shared<const Node>(
        Node{node::PiecewiseConstant{std::move(breaks), std::move(values), std::move(cumulative)},
             std::move(origin)}));
}

inline BMeasure BMeasure::primitive_table(Vec t, Vec F, std::string origin) {
    if (t.size() < 2 || t.size() != F.size())
        throw ConfigurationError("primitive table needs matching t/F arrays with at least two samples");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (!(t[i] < t[i + 1])) throw ConfigurationError("primitive table times must increase");
    for (double v : F)
        if (!std::isfinite(v)) throw ConfigurationError("primitive table values must be finite");
    return BMeasure(
        std::make_shared<const Node>(Node{node::PrimitiveTable{std::move(t), std::move(F)}, std::move(origin)}));
}

inline BMeasure BMeasure::combo(std::vector<std::pair<double, BMeasure>> terms, std::string origin) {
    return BMeasure(std::make_shared<const Node>(Node{node::Combo{std::move(terms)}, std::move(origin)}));
}

inline BMeasure::Kind BMeasure::kind() const { return static_cast<Kind>(node_->v.index()); }

inline const std::string& BMeasure::origin() const { return node_->origin; }

inline const node::Cantor* BMeasure::as_cantor() const { return std::get_if<node::Cantor>(&node_->v); }
inline const node::PiecewiseConstant* BMeasure::as_piecewise_constant() const {
    return std::get_if<node::PiecewiseConstant>(&node_->v);
}
inline const node::PrimitiveTable* BMeasure::as_primitive_table() const {
    return std::get_if<node::PrimitiveTable>(&node_->v);
}
inline const node::Combo* BMeasure::as_combo() const { return std::get_if<node::Combo>(&node_->v); }
inline const node::Translated* BMeasure::as_translated() const {
    return std::get_if<node::Translated>(&node_->v);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

inline double piecewise_cumulative(const node::PiecewiseConstant& pc, double t) {
    const auto& x = pc.breaks;
    if (t <= x.front()) return 0.0;
    if (t >= x.back()) return pc.cumulative.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const auto i = static_cast<std::size_t>(it - x.begin()) - 1;
    return pc.cumulative[i] + pc.values[i] * (t - x[i]);
}

inline double table_interp(const node::PrimitiveTable& tab, double t) {
    const auto& x = tab.t;
    if (t <= x.front()) return tab.F.front();
    if (t >= x.back()) return tab.F.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const auto i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double w = (t - x[i]) / (x[i + 1] - x[i]);
    return tab.F[i] + w * (tab.F[i + 1] - tab.F[i]);
}

inline double cantor_on_support(const node::Cantor& c, double t) {
    return cantor_cdf((t - c.support.a) / (c.support.b - c.support.a), c.depth);
}

}  // namespace detail

inline double BMeasure::primitive(double t) const {
    if (!std::isfinite(t)) throw InvalidInterval("primitive: argument must be finite");
    if (t == 0.0) return 0.0;
    return std::visit(
        [t](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Cantor>) {
                return detail::cantor_on_support(n, t) - detail::cantor_on_support(n, 0.0);
            } else if constexpr (std::is_same_v<T, node::Density>) {
                auto r = integrate_scalar(n.rho, 0.0, t, n.quad);
                if (!r.converged)
                    throw ToleranceFailure("density quadrature did not converge", r.value, r.est_error);
                return r.value[0];
            } else if constexpr (std::is_same_v<T, node::Primitive>) {
                return n.F(t) - n.F(0.0);
            } else if constexpr (std::is_same_v<T, node::PiecewiseConstant>) {
                return detail::piecewise_cumulative(n, t) - detail::piecewise_cumulative(n, 0.0);
            } else if constexpr (std::is_same_v<T, node::PrimitiveTable>) {
                return detail::table_interp(n, t) - detail::table_interp(n, 0.0);
            } else if constexpr (std::is_same_v<T, node::Combo>) {
                double s = 0.0;
                for (const auto& [c, mu] : n.terms) s += c * mu.primitive(t);
                return s;
            } else {
                // (mu.s)[0,t] = mu[s, t+s]
                return n.base.primitive(t + n.shift) - n.base.primitive(n.shift);
            }
        },
        node_->v);
}

inline bool BMeasure::has_density() const {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Density> || std::is_same_v<T, node::PiecewiseConstant>) {
                return true;
            } else if constexpr (std::is_same_v<T, node::Combo>) {
                return std::all_of(n.terms.begin(), n.terms.end(),
                                   [](const auto& term) { return term.second.has_density(); });
            } else if constexpr (std::is_same_v<T, node::Translated>) {
                return n.base.has_density();
            } else if constexpr (std::is_same_v<T, node::Primitive>) {
                return static_cast<bool>(n.rho);
            } else {
                return false;
            }
        },
        node_->v);
}

inline double BMeasure::density_at(double t) const {
    return std::visit(
        [t](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Density>) {
                return n.rho(t);
            } else if constexpr (std::is_same_v<T, node::PiecewiseConstant>) {
                const auto& x = n.breaks;
                if (t < x.front() || t >= x.back()) return 0.0;
                const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
                return n.values[i];
            } else if constexpr (std::is_same_v<T, node::Combo>) {
                double s = 0.0;
                for (const auto& [c, mu] : n.terms) s += c * mu.density_at(t);
                return s;
            } else if constexpr (std::is_same_v<T, node::Translated>) {
                return n.base.density_at(t + n.shift);
            } else if constexpr (std::is_same_v<T, node::Primitive>) {
                if (!n.rho) throw ConfigurationError("measure has no pointwise density");
                return n.rho(t);
            } else {
                throw ConfigurationError("measure has no pointwise density");
            }
        },
        node_->v);
}

// ---------------------------------------------------------------------------
// Vector structure and translation
// ---------------------------------------------------------------------------

/// (mu.s)(A) = mu(A + s). Nested translations collapse into one shift.
inline BMeasure translate(const BMeasure& mu, double s) {
    if (const auto* tr = mu.as_translated())
        return BMeasure(std::make_shared<const BMeasure::Node>(
            BMeasure::Node{node::Translated{tr->base, tr->shift + s}, {}}));
    return BMeasure(std::make_shared<const BMeasure::Node>(BMeasure::Node{node::Translated{mu, s}, {}}));
}

inline BMeasure scale(const BMeasure& mu, double alpha) { return BMeasure::combo({{alpha, mu}}); }

inline BMeasure add(const BMeasure& m1, const BMeasure& m2) { return BMeasure::combo({{1.0, m1}, {1.0, m2}}); }

inline BMeasure operator+(const BMeasure& m1, const BMeasure& m2) { return add(m1, m2); }
inline BMeasure operator-(const BMeasure& m1, const BMeasure& m2) {
    return BMeasure::combo({{1.0, m1}, {-1.0, m2}});
}
inline BMeasure operator*(double alpha, const BMeasure& mu) { return scale(mu, alpha); }

inline double eval_interval(const BMeasure& mu, Interval I) { return mu.eval(I); }
inline double primitive(const BMeasure& mu, double t) { return mu.primitive(t); }

/// Lower bound for |mu|(I): the largest sum of |mu(A_i)| over uniform dyadic
/// partitions of I with up to 2^levels pieces. Nondecreasing in `levels`.
inline double total_variation_lower(const BMeasure& mu, Interval I, int levels) {
    require_finite(I);
    if (levels < 1) throw ConfigurationError("total_variation_lower: levels must be >= 1");
    if (I.a == I.b) return 0.0;
    double best = 0.0;
    Vec F;
    for (int level = 0; level <= levels; ++level) {
        const std::size_t pieces = std::size_t{1} << level;
        F.resize(pieces + 1);
        for (std::size_t i = 0; i <= pieces; ++i) {
            const double t = (i == pieces) ? I.b : I.a + (I.b - I.a) * static_cast<double>(i) / pieces;
            F[i] = mu.primitive(t);
        }
        CompensatedSum s;
        for (std::size_t i = 0; i < pieces; ++i) s.add(std::abs(F[i + 1] - F[i]));
        best = std::max(best, s.value());
    }
    return best;
}

/// Masses of [t-h, t+h] for h = 1e-2, 1e-3, ..., 1e-8; tends to zero for atom-free measures.
inline Vec atom_probe(const BMeasure& mu, double t) {
    Vec out;
    for (int k = 2; k <= 8; ++k) {
        const double h = std::pow(10.0, -k);
        out.push_back(std::abs(mu.eval({t - h, t + h})));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Positive measures
// ---------------------------------------------------------------------------

/// A b-measure asserted to be nonnegative on intervals (m-bounds and l-bounds).
class PositiveMeasure {
public:
    PositiveMeasure() = default;
    /// Caller asserts nonnegativity; `is_positive_on` samples it.
    explicit PositiveMeasure(BMeasure mu) : mu_(std::move(mu)) {}

    double eval(Interval I) const { return mu_.eval(I); }
    double primitive(double t) const { return mu_.primitive(t); }
    const BMeasure& measure() const { return mu_; }

    PositiveMeasure translated(double s) const { return PositiveMeasure(translate(mu_, s)); }
    PositiveMeasure scaled(double alpha) const {
        if (alpha < 0) throw ConfigurationError("positive measure scaled by a negative factor");
        return PositiveMeasure(scale(mu_, alpha));
    }
    friend PositiveMeasure operator+(const PositiveMeasure& p, const PositiveMeasure& q) {
        return PositiveMeasure(p.mu_ + q.mu_);
    }

private:
    BMeasure mu_;
};

/// Samples nonnegativity and monotonicity under inclusion on a uniform grid of I.
inline bool is_positive_on(const BMeasure& mu, Interval I, int samples = 256, double slack = 1e-12) {
    require_finite(I);
    double prev = mu.primitive(I.a);
    for (int i = 1; i <= samples; ++i) {
        const double t = I.a + I.length() * i / samples;
        const double F = mu.primitive(t);
        if (F - prev < -slack) return false;
        prev = F;
    }
    return true;
}

}  // namespace mdode
