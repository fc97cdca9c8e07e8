#pragma once

// Built-in fields with exact measure increments and their bound families.

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "mdode/forcing.hpp"
#include "mdode/measures.hpp"
#include "mdode/parametric.hpp"

namespace mdode::fields {

/// Scalar Riccati field with Cantor-iteration forcing:
///   d nu_y = (-y^2 + c) dt + s d F_sum,
/// i.e. g(y,t) = -y^2 + c + s f_sum(t). Bounds on B_j:
///   m_j = (j^2 + |c|) dt + |s| |f_sum| dt,  l_j = 2j dt,  omega_j = id.
class RiccatiCantor {
public:
    explicit RiccatiCantor(CantorForcingParams forcing = {}, double forcing_scale = 1.0, double constant = 2.0)
        : forcing_(std::make_shared<const CantorForcing>(forcing)), scale_(forcing_scale), constant_(constant) {}

    RiccatiCantor(std::shared_ptr<const CantorForcing> forcing, double forcing_scale, double constant)
        : forcing_(std::move(forcing)), scale_(forcing_scale), constant_(constant) {}

    const CantorForcing& forcing() const { return *forcing_; }
    double forcing_scale() const { return scale_; }
    double constant() const { return constant_; }

    double m_density(int j, double t) const {
        return j * double(j) + std::abs(constant_) + std::abs(scale_) * std::abs(forcing_->value_at(t));
    }
    double l_density(int j, double) const { return 2.0 * j; }

    BallBounds ball(int j) const {
        const BMeasure leb = BMeasure::lebesgue();
        BMeasure m = (j * double(j) + std::abs(constant_)) * leb;
        if (scale_ != 0.0) m = m + std::abs(scale_) * forcing_->abs_sum();
        return {PositiveMeasure(m), PositiveMeasure((2.0 * j) * leb), Modulus::identity()};
    }

    BoundFamily bounds(int max_ball = BoundFamily::default_max_ball) const {
        auto self = *this;
        return BoundFamily::from([self](int j) { return self.ball(j); }, max_ball);
    }

    ParametricMeasure measure(int max_ball = BoundFamily::default_max_ball) const {
        const double c = constant_;
        std::vector<SeparableTerm> terms;
        terms.push_back({[c](std::span<const double> y, std::span<double> k) { k[0] = -y[0] * y[0] + c; },
                         BMeasure::lebesgue()});
        if (scale_ != 0.0) {
            const double s = scale_;
            terms.push_back({[s](std::span<const double>, std::span<double> k) { k[0] = s; }, forcing_->sum()});
        }
        return separable(1, 1, std::move(terms), bounds(max_ball));
    }

    /// Pointwise field g(y,t); shares bound measures with measure().
    CaratheodoryField caratheodory(int max_ball = BoundFamily::default_max_ball) const {
        auto self = *this;
        CaratheodoryField f;
        f.dim = 1;
        f.g = [self](std::span<const double> y, double t, std::span<double> out) {
            out[0] = -y[0] * y[0] + self.constant_ + self.scale_ * self.forcing_->value_at(t);
        };
        f.m_density = [self](int j, double t) { return self.m_density(j, t); };
        f.l_density = [self](int j, double t) { return self.l_density(j, t); };
        f.bound_measures = [self](int j) { return self.ball(j); };
        f.max_ball = max_ball;
        return f;
    }

private:
    std::shared_ptr<const CantorForcing> forcing_;
    double scale_;
    double constant_;
};

/// Autonomous affine field g(y,t) = A y + b on R^N (A row-major N x N).
/// Bounds: m_j = (|A|_F j + |b|) dt, l_j = |A|_F dt, omega = id.
class Linear {
public:
    Linear(std::size_t dim, Vec A, Vec b) : dim_(dim), A_(std::move(A)), b_(std::move(b)) {
        if (A_.size() != dim * dim || b_.size() != dim) throw ConfigurationError("linear field: bad matrix shape");
        double f = 0.0;
        for (double a : A_) f += a * a;
        normA_ = std::sqrt(f);
        normb_ = norm2(b_);
    }

    std::size_t dim() const { return dim_; }

    void apply(std::span<const double> y, std::span<double> out) const {
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = b_[i];
            for (std::size_t k = 0; k < dim_; ++k) s += A_[i * dim_ + k] * y[k];
            out[i] = s;
        }
    }

    BallBounds ball(int j) const {
        const BMeasure leb = BMeasure::lebesgue();
        return {PositiveMeasure((normA_ * j + normb_) * leb), PositiveMeasure(normA_ * leb), Modulus::identity()};
    }

    BoundFamily bounds(int max_ball = BoundFamily::default_max_ball) const {
        auto self = *this;
        return BoundFamily::from([self](int j) { return self.ball(j); }, max_ball);
    }

    ParametricMeasure measure(int max_ball = BoundFamily::default_max_ball) const {
        auto self = *this;
        std::vector<SeparableTerm> terms;
        terms.push_back({[self](std::span<const double> y, std::span<double> k) { self.apply(y, k); },
                         BMeasure::lebesgue()});
        return separable(dim_, dim_, std::move(terms), bounds(max_ball));
    }

    CaratheodoryField caratheodory(int max_ball = BoundFamily::default_max_ball) const {
        auto self = *this;
        CaratheodoryField f;
        f.dim = dim_;
        f.g = [self](std::span<const double> y, double, std::span<double> out) { self.apply(y, out); };
        f.m_density = [self](int j, double) { return self.normA_ * j + self.normb_; };
        f.l_density = [self](int, double) { return self.normA_; };
        f.bound_measures = [self](int j) { return self.ball(j); };
        f.max_ball = max_ball;
        return f;
    }

private:
    std::size_t dim_;
    Vec A_;
    Vec b_;
    double normA_ = 0.0;
    double normb_ = 0.0;
};

/// Scalar field tabulated on a (y, t) grid, bilinear in between and clamped
/// outside the grid. Interval masses are exact (piecewise linear in t).
class Table {
public:
    Table(Vec ys, Vec ts, std::vector<Vec> values) : ys_(std::move(ys)), ts_(std::move(ts)), g_(std::move(values)) {
        if (ys_.size() < 2 || ts_.size() < 2) throw ConfigurationError("table field needs at least a 2x2 grid");
        if (g_.size() != ys_.size()) throw ConfigurationError("table field: one row per y sample");
        for (const auto& row : g_)
            if (row.size() != ts_.size()) throw ConfigurationError("table field: one column per t sample");
        for (std::size_t i = 0; i + 1 < ys_.size(); ++i)
            if (!(ys_[i] < ys_[i + 1])) throw ConfigurationError("table field: y grid must increase");
        for (std::size_t i = 0; i + 1 < ts_.size(); ++i)
            if (!(ts_[i] < ts_[i + 1])) throw ConfigurationError("table field: t grid must increase");
        for (std::size_t i = 0; i < ys_.size(); ++i)
            for (std::size_t k = 0; k < ts_.size(); ++k) {
                max_abs_ = std::max(max_abs_, std::abs(g_[i][k]));
                if (i + 1 < ys_.size())
                    max_slope_ = std::max(max_slope_, std::abs(g_[i + 1][k] - g_[i][k]) / (ys_[i + 1] - ys_[i]));
            }
    }

    /// Column of g at y (interpolated in y, clamped).
    Vec column(double y) const {
        Vec c(ts_.size());
        if (y <= ys_.front()) return g_.front();
        if (y >= ys_.back()) return g_.back();
        const auto i = static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin()) - 1;
        const double w = (y - ys_[i]) / (ys_[i + 1] - ys_[i]);
        for (std::size_t k = 0; k < ts_.size(); ++k) c[k] = (1 - w) * g_[i][k] + w * g_[i + 1][k];
        return c;
    }

    double value(double y, double t) const {
        const Vec c = column(y);
        return interp_t(c, t);
    }

    /// Exact integral over [a,b] of the piecewise-linear-in-t column at y.
    double integral(double y, Interval I) const {
        const Vec c = column(y);
        auto prim = [&](double t) {
            // Integral from ts_.front() to t, with constant extension on both sides.
            if (t <= ts_.front()) return c.front() * (t - ts_.front());
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < ts_.size(); ++k) {
                if (t <= ts_[k]) break;
                const double hi = std::min(t, ts_[k + 1]);
                const double vh = interp_t(c, hi);
                s += 0.5 * (c[k] + vh) * (hi - ts_[k]);
            }
            if (t > ts_.back()) s += c.back() * (t - ts_.back());
            return s;
        };
        return prim(I.b) - prim(I.a);
    }

    BallBounds ball(int) const {
        const BMeasure leb = BMeasure::lebesgue();
        return {PositiveMeasure(max_abs_ * leb), PositiveMeasure(max_slope_ * leb), Modulus::identity()};
    }

    ParametricMeasure measure(int max_ball = BoundFamily::default_max_ball) const {
        auto self = std::make_shared<const Table>(*this);
        auto fn = [self](std::span<const double> y, Interval I, std::span<double> out) {
            out[0] = self->integral(y[0], I);
        };
        return ParametricMeasure(1, 1, std::move(fn),
                                 BoundFamily::from([self](int j) { return self->ball(j); }, max_ball));
    }

private:
    double interp_t(const Vec& c, double t) const {
        if (t <= ts_.front()) return c.front();
        if (t >= ts_.back()) return c.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(ts_.begin(), ts_.end(), t) - ts_.begin()) - 1;
        const double w = (t - ts_[k]) / (ts_[k + 1] - ts_[k]);
        return (1 - w) * c[k] + w * c[k + 1];
    }

    Vec ys_;
    Vec ts_;
    std::vector<Vec> g_;
    double max_abs_ = 0.0;
    double max_slope_ = 0.0;
};

}  // namespace mdode::fields
