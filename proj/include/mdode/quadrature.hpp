#pragma once

// Adaptive composite Simpson quadrature for scalar and vector integrands.

#include <cstddef>
#include <functional>
#include <type_traits>
#include <span>
#include <vector>

#include "mdode/core.hpp"

namespace mdode {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    std::size_t max_intervals = std::size_t{1} << 20;
    int min_depth = 2;
    int max_depth = 60;
};

struct QuadratureResult {
    Vec value;
    double est_error = 0.0;
    std::size_t intervals = 0;
    bool converged = true;
};

namespace detail {

template <class F>
class SimpsonWorker {
public:
    SimpsonWorker(F& f, std::size_t dim, const QuadratureOptions& opts)
        : f_(f), dim_(dim), opts_(opts),
          arena_(static_cast<std::size_t>(opts.max_depth + 2) * 4 * dim),
          result_(dim, 0.0) {}

    QuadratureResult run(double a, double b) {
        Vec fa(dim_), fm(dim_), fb(dim_), S(dim_);
        const double m = 0.5 * (a + b);
        f_(a, std::span<double>(fa));
        f_(m, std::span<double>(fm));
        f_(b, std::span<double>(fb));
        for (std::size_t i = 0; i < dim_; ++i) S[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
        recurse(a, b, fa, fm, fb, S, opts_.abs_tol, 0);
        QuadratureResult r;
        r.value = result_;
        r.est_error = error_;
        r.intervals = leaves_;
        r.converged = converged_;
        return r;
    }

private:
    std::span<double> slot(int depth, int k) {
        return {arena_.data() + (static_cast<std::size_t>(depth) * 4 + k) * dim_, dim_};
    }

    void recurse(double a, double b, std::span<const double> fa, std::span<const double> fm,
                 std::span<const double> fb, std::span<const double> S, double tol, int depth) {
        const double m = 0.5 * (a + b);
        auto flm = slot(depth, 0);
        auto frm = slot(depth, 1);
        auto Sl = slot(depth, 2);
        auto Sr = slot(depth, 3);
        f_(0.5 * (a + m), flm);
        f_(0.5 * (m + b), frm);
        double err = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            Sl[i] = (m - a) / 6.0 * (fa[i] + 4.0 * flm[i] + fm[i]);
            Sr[i] = (b - m) / 6.0 * (fm[i] + 4.0 * frm[i] + fb[i]);
            err = std::max(err, std::abs(Sl[i] + Sr[i] - S[i]));
        }
        const bool small = err <= 15.0 * tol;
        const bool exhausted = depth + 1 >= opts_.max_depth || leaves_ + pending_ >= opts_.max_intervals ||
                               !(m > a && b > m);
        if (depth >= opts_.min_depth && (small || exhausted)) {
            if (!small) converged_ = false;
            for (std::size_t i = 0; i < dim_; ++i)
                result_[i] += Sl[i] + Sr[i] + (Sl[i] + Sr[i] - S[i]) / 15.0;
            error_ += err / 15.0;
            ++leaves_;
            return;
        }
        ++pending_;
        recurse(a, m, fa, flm, fm, Sl, 0.5 * tol, depth + 1);
        recurse(m, b, fm, frm, fb, Sr, 0.5 * tol, depth + 1);
        --pending_;
    }

    F& f_;
    std::size_t dim_;
    QuadratureOptions opts_;
    Vec arena_;
    Vec result_;
    double error_ = 0.0;
    std::size_t leaves_ = 0;
    std::size_t pending_ = 0;
    bool converged_ = true;
};

}  // namespace detail

/// Integrates a vector-valued f(t, out) over [a,b]. Orientation is respected (a > b flips sign).
template <class F>
QuadratureResult integrate_vector(F&& f, std::size_t dim, double a, double b,
                                  const QuadratureOptions& opts = {}) {
    if (a == b) return QuadratureResult{Vec(dim, 0.0), 0.0, 0, true};
    if (a > b) {
        auto r = integrate_vector(f, dim, b, a, opts);
        for (double& v : r.value) v = -v;
        return r;
    }
    detail::SimpsonWorker<std::remove_reference_t<F>> worker(f, dim, opts);
    return worker.run(a, b);
}

/// Scalar convenience wrapper around integrate_vector.
template <class F>
QuadratureResult integrate_scalar(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    auto g = [&f](double t, std::span<double> out) { out[0] = f(t); };
    return integrate_vector(g, 1, a, b, opts);
}

}  // namespace mdode
