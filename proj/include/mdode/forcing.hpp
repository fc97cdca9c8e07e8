#pragma once

// Piecewise-constant forcing built from a finite middle-third Cantor iteration:
// f = f_val on the 2^n intervals of the n-th iteration (zero elsewhere), and the
// signed translate sum f_sum(t) = sum_{j=1..n_tr} s_j f(t - j*shift).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdode/cantor.hpp"
#include "mdode/measures.hpp"

namespace mdode {

struct CantorForcingParams {
    int iterations = 10;
    int translates = 100;
    double shift = 0.01;
    bool alternating = true;  // s_j = (-1)^j, otherwise s_j = +1
};

class CantorForcing {
public:
    explicit CantorForcing(CantorForcingParams p = {}) : params_(p) {
        if (p.iterations < 0 || p.iterations > 20)
            throw ConfigurationError("cantor forcing: iterations must be in [0, 20]");
        if (p.translates < 1) throw ConfigurationError("cantor forcing: translates must be >= 1");
        if (!std::isfinite(p.shift)) throw ConfigurationError("cantor forcing: shift must be finite");
        intervals_ = cantor_iteration_intervals(p.iterations);
        f_val_ = cantor_iteration_height(p.iterations);
        build_single();
        build_sum();
    }

    const CantorForcingParams& params() const { return params_; }
    double f_val() const { return f_val_; }
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

    double total_length() const {
        CompensatedSum s;
        for (const auto& [a, b] : intervals_) s.add(b - a);
        return s.value();
    }

    int sign(int j) const { return params_.alternating && (j % 2 != 0) ? -1 : 1; }

    /// Density f of the n-th iteration, normalized to unit mass.
    const BMeasure& single() const { return single_; }
    /// The translate sum f_sum as one merged piecewise-constant measure.
    const BMeasure& sum() const { return sum_; }
    /// |f_sum| dt, used inside m-bounds.
    const BMeasure& abs_sum() const { return abs_sum_; }

    /// Same measure as sum(), assembled as a combination of translated copies of single().
    BMeasure sum_as_combo() const {
        std::vector<std::pair<double, BMeasure>> terms;
        for (int j = 1; j <= params_.translates; ++j)
            terms.emplace_back(static_cast<double>(sign(j)), translate(single_, -j * params_.shift));
        return BMeasure::combo(std::move(terms));
    }

    double value_at(double t) const { return sum_.density_at(t); }

    /// Closed support hull [shift, 1 + n_tr * shift] of f_sum.
    Interval support() const {
        const double lo = std::min(params_.shift, params_.translates * params_.shift);
        const double hi = std::max(1.0 + params_.shift, 1.0 + params_.translates * params_.shift);
        return {lo, hi};
    }

    std::string origin_json(bool absolute) const {
        std::string s = R"({"kind":"cantor-forcing","iterations":)" + std::to_string(params_.iterations) +
                        R"(,"translates":)" + std::to_string(params_.translates) + R"(,"shift":)" +
                        format_double(params_.shift) + R"(,"alternating":)" +
                        (params_.alternating ? "true" : "false");
        if (absolute) s += R"(,"absolute":true)";
        return s + "}";
    }

private:
    static std::string format_double(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    void build_single() {
        Vec breaks;
        Vec values;
        for (std::size_t i = 0; i < intervals_.size(); ++i) {
            breaks.push_back(intervals_[i].first);
            values.push_back(f_val_);
            breaks.push_back(intervals_[i].second);
            if (i + 1 < intervals_.size()) values.push_back(0.0);
        }
        single_ = BMeasure::piecewise_constant(std::move(breaks), std::move(values),
                                               R"({"kind":"cantor-iteration","level":)" +
                                                   std::to_string(params_.iterations) + "}");
    }

    void build_sum() {
        // Sweep over translated endpoints tracking the integer signed multiplicity,
        // so cancelled regions are exactly zero.
        std::vector<std::pair<double, int>> events;
        events.reserve(intervals_.size() * 2 * static_cast<std::size_t>(params_.translates));
        for (int j = 1; j <= params_.translates; ++j) {
            const double off = j * params_.shift;
            const int s = sign(j);
            for (const auto& [a, b] : intervals_) {
                events.emplace_back(a + off, s);
                events.emplace_back(b + off, -s);
            }
        }
        std::sort(events.begin(), events.end());
        Vec breaks;
        std::vector<std::int64_t> counts;
        std::int64_t count = 0;
        for (std::size_t i = 0; i < events.size();) {
            const double x = events[i].first;
            while (i < events.size() && events[i].first == x) count += events[i++].second;
            breaks.push_back(x);
            counts.push_back(count);
        }
        counts.pop_back();  // multiplicity after the last breakpoint is zero
        Vec values(counts.size());
        Vec abs_values(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            values[i] = static_cast<double>(counts[i]) * f_val_;
            abs_values[i] = std::abs(values[i]);
        }
        sum_ = BMeasure::piecewise_constant(breaks, std::move(values), origin_json(false));
        abs_sum_ = BMeasure::piecewise_constant(std::move(breaks), std::move(abs_values), origin_json(true));
    }

    CantorForcingParams params_;
    std::vector<std::pair<double, double>> intervals_;
    double f_val_ = 1.0;
    BMeasure single_;
    BMeasure sum_;
    BMeasure abs_sum_;
};

}  // namespace mdode
