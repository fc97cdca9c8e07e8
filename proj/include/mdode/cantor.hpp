#pragma once

// Cantor function (Devil's staircase) and the finite middle-third iterations.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mdode/core.hpp"

namespace mdode {

namespace detail {

// Fraction r / 2^E held as little-endian 64-bit limbs; r < 2^E.
class DyadicFraction {
public:
    DyadicFraction(std::uint64_t mantissa, int exponent) : bits_(exponent) {
        limbs_.assign(static_cast<std::size_t>(exponent / 64 + 2), 0);
        limbs_[0] = mantissa;
    }

    // r <- 3r; returns the integer part (0, 1 or 2) and keeps the fraction.
    int next_ternary_digit() {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs_) {
            const unsigned __int128 v = static_cast<unsigned __int128>(limb) * 3u + carry;
            limb = static_cast<std::uint64_t>(v);
            carry = v >> 64;
        }
        const std::size_t word = static_cast<std::size_t>(bits_ / 64);
        const int shift = bits_ % 64;
        unsigned __int128 top = limbs_[word] >> shift;
        if (shift != 0 && word + 1 < limbs_.size())
            top |= static_cast<unsigned __int128>(limbs_[word + 1]) << (64 - shift);
        const int digit = static_cast<int>(top & 3u);
        if (shift == 0) {
            limbs_[word] = 0;
        } else {
            limbs_[word] &= (std::uint64_t{1} << shift) - 1;
        }
        for (std::size_t i = word + 1; i < limbs_.size(); ++i) limbs_[i] = 0;
        return digit;
    }

    bool is_zero() const {
        for (auto limb : limbs_)
            if (limb != 0) return false;
        return true;
    }

private:
    int bits_;
    std::vector<std::uint64_t> limbs_;
};

}  // namespace detail

/// Cantor function C(t) on [0,1], clamped outside. Reads the exact ternary
/// expansion of the binary double t up to `depth` digits, stopping at the
/// first digit 1; the truncation error is at most 2^-depth.
inline double cantor_cdf(double t, int depth = 52) {
    if (depth < 1) throw ConfigurationError("cantor_cdf: depth must be >= 1");
    if (std::isnan(t)) throw InvalidInterval("cantor_cdf: NaN argument");
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;

    int e = 0;
    const double m = std::frexp(t, &e);  // t = m * 2^e, m in [0.5, 1)
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
    int exponent = 53 - e;
    while ((mantissa & 1u) == 0 && exponent > 0) {
        mantissa >>= 1;
        --exponent;
    }
    detail::DyadicFraction frac(mantissa, exponent);

    double value = 0.0;
    double weight = 0.5;
    for (int k = 1; k <= depth; ++k, weight *= 0.5) {
        const int digit = frac.next_ternary_digit();
        if (digit == 1) return value + weight;
        if (digit == 2) value += weight;
        if (frac.is_zero()) break;
    }
    return value;
}

/// Closed intervals of the n-th middle-third iteration, left to right.
/// Endpoints are k / 3^n computed from exact integers.
inline std::vector<std::pair<double, double>> cantor_iteration_intervals(int level) {
    if (level < 0 || level > 30) throw ConfigurationError("cantor iteration level must be in [0, 30]");
    std::int64_t scale = 1;
    for (int i = 0; i < level; ++i) scale *= 3;
    std::vector<std::int64_t> lefts{0};
    std::int64_t len = scale;
    for (int i = 0; i < level; ++i) {
        len /= 3;
        std::vector<std::int64_t> next;
        next.reserve(lefts.size() * 2);
        for (auto l : lefts) {
            next.push_back(l);
            next.push_back(l + 2 * len);
        }
        lefts = std::move(next);
    }
    const auto denom = static_cast<double>(scale);
    std::vector<std::pair<double, double>> out;
    out.reserve(lefts.size());
    for (auto l : lefts)
        out.emplace_back(static_cast<double>(l) / denom, static_cast<double>(l + len) / denom);
    return out;
}

/// Height making the piecewise-constant density of the n-th iteration integrate to one: (3/2)^n.
inline double cantor_iteration_height(int level) {
    double num = 1.0;
    double den = 1.0;
    for (int i = 0; i < level; ++i) {
        num *= 3.0;
        den *= 2.0;
    }
    return num / den;
}

}  // namespace mdode
