#pragma once

// Shared vocabulary: vectors, intervals, error types and small numeric helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdode {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInterval : public Error {
public:
    using Error::Error;
};

/// Raised when an iterative approximation does not reach its tolerance.
/// Carries the best available value and the achieved error estimate.
class ToleranceFailure : public Error {
public:
    ToleranceFailure(const std::string& what, Vec best, double est_error)
        : Error(what + " (est_error=" + std::to_string(est_error) + ")"),
          best_(std::move(best)), est_error_(est_error) {}

    const Vec& best_value() const noexcept { return best_; }
    double est_error() const noexcept { return est_error_; }

private:
    Vec best_;
    double est_error_;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class SerializationError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Interval
// ---------------------------------------------------------------------------

struct Interval {
    double a = 0.0;
    double b = 0.0;

    double length() const noexcept { return b - a; }
    Interval shifted(double t) const noexcept { return {a + t, b + t}; }
    bool contains(double t) const noexcept { return a <= t && t <= b; }
    bool contains(const Interval& o) const noexcept { return a <= o.a && o.b <= b; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

inline void require_finite(const Interval& I) {
    if (!std::isfinite(I.a) || !std::isfinite(I.b))
        throw InvalidInterval("interval endpoints must be finite");
}

/// Validated construction: finite endpoints with a <= b.
inline Interval make_interval(double a, double b) {
    Interval I{a, b};
    require_finite(I);
    if (a > b) throw InvalidInterval("interval requires a <= b");
    return I;
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double distance2(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
}

inline double distance_inf(std::span<const double> u, std::span<const double> v) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

/// Ball index j >= 1 with |y| <= j.
inline int ball_index(std::span<const double> y) {
    return std::max(1, static_cast<int>(std::ceil(norm2(y))));
}

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool& warnings_enabled() {
    static bool enabled = true;
    return enabled;
}

inline void warn(const std::string& msg) {
    if (warnings_enabled()) std::cerr << "mdode warning: " << msg << '\n';
}

}  // namespace mdode
