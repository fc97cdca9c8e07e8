#pragma once

// The numerical experiments: Cantor-forcing staircase, forced Riccati trajectories
// with the attracting/repelling hyperbolic solutions, and slow-fast tracking.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mdode/core.hpp"
#include "mdode/fields.hpp"
#include "mdode/forcing.hpp"
#include "mdode/report.hpp"
#include "mdode/slowfast.hpp"
#include "mdode/solver.hpp"

namespace mdode::experiments {

// ---------------------------------------------------------------------------
// Staircase: y' = f_sum(t), y(0) = 0
// ---------------------------------------------------------------------------

struct StaircaseConfig {
    CantorForcingParams forcing{};
    std::size_t samples = 10000;
    double t_end = std::numeric_limits<double>::quiet_NaN();  // default: end of support + 0.1
};

struct StaircaseResult {
    double f_val = 0.0;
    double unit_mass_error = 0.0;    // |f_val * total length - 1|
    Vec t, y;
    double total_variation = 0.0;    // exact: |f_sum|-mass of [0, t_end]
    double sampled_variation = 0.0;  // sum |y_{k+1} - y_k| on the samples
    double y_min = 0.0, y_max = 0.0;

    report::Table table() const {
        report::Table tab;
        tab.header = {"t", "y"};
        for (std::size_t i = 0; i < t.size(); ++i) tab.add_numbers({t[i], y[i]});
        return tab;
    }
};

inline StaircaseResult run_cantor_staircase(const StaircaseConfig& cfg = {}) {
    const CantorForcing cf(cfg.forcing);
    StaircaseResult r;
    r.f_val = cf.f_val();
    r.unit_mass_error = std::abs(cf.f_val() * cf.total_length() - 1.0);
    const double t_end = std::isnan(cfg.t_end) ? cf.support().b + 0.1 : cfg.t_end;
    const std::size_t n = std::max<std::size_t>(cfg.samples, 1);
    r.t.resize(n + 1);
    r.y.resize(n + 1);
    const BMeasure& F = cf.sum();
    for (std::size_t i = 0; i <= n; ++i) {
        r.t[i] = t_end * static_cast<double>(i) / static_cast<double>(n);
        r.y[i] = F.eval({0.0, r.t[i]});
    }
    r.total_variation = cf.abs_sum().eval({0.0, t_end});
    for (std::size_t i = 0; i < n; ++i) r.sampled_variation += std::abs(r.y[i + 1] - r.y[i]);
    r.y_min = *std::min_element(r.y.begin(), r.y.end());
    r.y_max = *std::max_element(r.y.begin(), r.y.end());
    return r;
}

// ---------------------------------------------------------------------------
// Forced Riccati: y' = -y^2 + 2 + f_sum(t)
// ---------------------------------------------------------------------------

struct RiccatiDevilConfig {
    CantorForcingParams forcing{};
    double forcing_scale = 1.0;
    double h = stiff_riccati_step;
    int trajectories = 10;
    double y_low = -2.0, y_high = 2.0;
    Interval window{-10.0, 10.0};
    double attracting_start = -100.0, attracting_value = 2.0;
    double repelling_start = 100.0, repelling_value = -2.0;
    double escape_radius = 1e6;
    double output_step = 0.01;
};

struct Trajectory {
    std::string label;
    double y0 = 0.0;
    SolutionPath path;
    bool escaped = false;
};

struct RiccatiDevilResult {
    std::vector<Trajectory> forward;  // from t = 0
    Trajectory attracting;            // forward from far past, restricted to the window
    Trajectory repelling;             // backward from far future, restricted to the window
    Interval window;
    double output_step = 0.01;

    /// Repelling solution value at t = 0.
    double repelling_at_zero() const { return repelling.path.at(0.0)[0]; }

    report::Table table() const {
        report::Table tab;
        tab.header = {"t"};
        for (const auto& tr : forward) tab.header.push_back(tr.label);
        tab.header.push_back("attracting");
        tab.header.push_back("repelling");
        std::vector<Curve> curves;
        std::vector<Interval> doms;
        auto add = [&](const Trajectory& tr) {
            if (tr.path.size() >= 2) {
                curves.push_back(tr.path.curve());
                doms.push_back(curves.back().domain());
            } else {
                curves.push_back(Curve::constant({0, 0}, {0.0}));
                doms.push_back({1, 0});
            }
        };
        for (const auto& tr : forward) add(tr);
        add(attracting);
        add(repelling);
        const auto steps = static_cast<std::size_t>(std::llround(window.length() / output_step));
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = window.a + output_step * static_cast<double>(i);
            Vec row{t};
            for (std::size_t c = 0; c < curves.size(); ++c)
                row.push_back(doms[c].contains(t) ? curves[c](t)[0] : std::numeric_limits<double>::quiet_NaN());
            tab.add_numbers(row);
        }
        return tab;
    }
};

inline RiccatiDevilResult run_riccati_devil(const RiccatiDevilConfig& cfg = {}) {
    const auto nu = fields::RiccatiCantor(cfg.forcing, cfg.forcing_scale, 2.0).measure();
    RiccatiDevilResult r;
    r.window = cfg.window;
    r.output_step = cfg.output_step;
    for (int i = 0; i < cfg.trajectories; ++i) {
        Trajectory tr;
        tr.y0 = cfg.trajectories == 1
                    ? cfg.y_low
                    : cfg.y_low + (cfg.y_high - cfg.y_low) * i / static_cast<double>(cfg.trajectories - 1);
        tr.label = "y0=" + report::num(tr.y0);
        try {
            tr.path = solve_euler(nu, 0.0, Vec{tr.y0}, cfg.window.b, cfg.h, cfg.escape_radius);
        } catch (const BlowupError& e) {
            tr.path = e.partial();
            tr.escaped = true;
        }
        r.forward.push_back(std::move(tr));
    }
    // Long pre-runs keep only the endpoint; the window part is stored.
    {
        Trajectory& a = r.attracting;
        a.label = "attracting";
        a.y0 = cfg.attracting_value;
        try {
            const Vec y = euler_endpoint(nu, cfg.attracting_start, Vec{a.y0}, cfg.window.a, cfg.h, cfg.escape_radius);
            a.path = solve_euler(nu, cfg.window.a, y, cfg.window.b, cfg.h, cfg.escape_radius);
        } catch (const BlowupError& e) {
            a.path = e.partial();
            a.escaped = true;
        }
    }
    {
        Trajectory& b = r.repelling;
        b.label = "repelling";
        b.y0 = cfg.repelling_value;
        try {
            const Vec y = euler_endpoint(nu, cfg.repelling_start, Vec{b.y0}, cfg.window.b, cfg.h, cfg.escape_radius);
            b.path = solve_euler(nu, cfg.window.b, y, cfg.window.a, cfg.h, cfg.escape_radius);
        } catch (const BlowupError& e) {
            b.path = e.partial();
            b.escaped = true;
        }
    }
    return r;
}

/// Max sup-distance between non-escaping forward trajectories on grid times t >= t_from.
inline double forward_spread(const RiccatiDevilResult& r, double t_from) {
    double worst = 0.0;
    std::vector<const Trajectory*> ok;
    for (const auto& tr : r.forward)
        if (!tr.escaped) ok.push_back(&tr);
    for (std::size_t a = 0; a < ok.size(); ++a)
        for (std::size_t b = a + 1; b < ok.size(); ++b) {
            const auto& pa = ok[a]->path;
            const auto& pb = ok[b]->path;
            for (std::size_t k = 0; k < std::min(pa.size(), pb.size()); ++k)
                if (pa.times[k] >= t_from) worst = std::max(worst, distance2(pa.values[k], pb.values[k]));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Slow-fast tracking
// ---------------------------------------------------------------------------

struct SlowFastConfig {
    CantorForcingParams forcing{};
    Vec eps{0.1, 0.05, 0.02};
    double delta = 0.1;
    double t0 = 1.0;  // slow-time horizon
    Vec x0{0.0};
    Vec y0{0.0};
    double h_fast = 1e-3;
    double fiber_step = 0.25;
    double seed_radius = 3.0;
    std::size_t seeds_per_axis = 9;
};

struct SlowFastResult {
    double T = 0.0;  // measured fiber-convergence (pullback) time
    std::vector<EpsilonRun> runs;
    std::vector<TrackingResult> tracking;
    std::vector<std::size_t> unconverged_fibers;  // fibers still moving after the pullback budget
    double max_pullback = 0.0;                     // deepest pullback any fiber needed
    double slow_limit_consistency = 0.0;  // sup |x_{eps_min} - x_{eps_next}| in slow time
    std::string fiber_note = "fiber inflation A[delta] is the Euclidean delta-neighbourhood of the pullback cloud";

    report::Table table() const {
        report::Table tab;
        tab.header = {"eps", "tau", "y", "fiber_center", "raw_distance", "distance"};
        for (const auto& tr : tracking)
            for (const auto& row : tr.rows)
                tab.add_numbers({tr.eps, row.tau, row.y[0], row.fiber_center.empty() ? NAN : row.fiber_center[0],
                                 row.raw_distance, row.distance});
        return tab;
    }

    report::Table summary() const {
        report::Table tab;
        tab.header = {"eps", "delta", "T", "max_distance", "max_raw_distance", "argmax_tau", "unconverged_fibers"};
        for (std::size_t i = 0; i < tracking.size(); ++i)
            tab.add_numbers({tracking[i].eps, tracking[i].delta, tracking[i].T, tracking[i].max_distance,
                             tracking[i].max_raw_distance, tracking[i].argmax_tau,
                             static_cast<double>(unconverged_fibers[i])});
        return tab;
    }
};

inline SlowFastResult run_slowfast(const SlowFastSystem& sys, const SlowFastConfig& cfg = {}) {
    if (cfg.eps.empty()) throw ConfigurationError("slowfast: empty eps ladder");
    SlowFastResult r;
    const auto seeds = box_seeds(sys.m, cfg.seed_radius, cfg.seeds_per_axis);
    for (double e : cfg.eps) r.runs.push_back(simulate(sys, e, cfg.x0, cfg.y0, cfg.t0, cfg.h_fast));
    for (const auto& run : r.runs)
        if (run.escaped) throw Error("slowfast: run with eps=" + report::num(run.eps) + " escaped");

    // Slow limit approximated by the smallest-eps run.
    std::size_t imin = 0, inext = 0;
    for (std::size_t i = 0; i < cfg.eps.size(); ++i)
        if (cfg.eps[i] < cfg.eps[imin]) imin = i;
    inext = imin;
    for (std::size_t i = 0; i < cfg.eps.size(); ++i)
        if (i != imin && (inext == imin || cfg.eps[i] < cfg.eps[inext])) inext = i;
    const Curve xlim = r.runs[imin].x_curve_slow();
    if (inext != imin) {
        const Curve xn = r.runs[inext].x_curve_slow();
        r.slow_limit_consistency = sup_distance(xlim, xn, {0.0, std::min(xlim.domain().b, xn.domain().b)}, 1000);
    }

    FiberOptions fo;
    fo.h = cfg.h_fast;
    r.T = fiber_convergence_time(sys, cfg.x0, 0.0, seeds, cfg.delta, fo);
    for (const auto& run : r.runs) {
        std::vector<AttractorFiberEstimate> fibers;
        const double end = run.taus.back();
        std::size_t unconverged = 0;
        const auto steps = static_cast<std::size_t>(std::floor((end - r.T) / cfg.fiber_step + 1e-9));
        for (std::size_t i = 0; i <= steps; ++i) {
            const double tau = std::min(r.T + cfg.fiber_step * static_cast<double>(i), end);
            const Vec x = xlim(std::min(run.eps * tau, xlim.domain().b));
            fibers.push_back(converged_fiber(sys, x, tau, r.T, seeds, cfg.delta, fo));
            if (!fibers.back().converged) ++unconverged;
            r.max_pullback = std::max(r.max_pullback, fibers.back().pullback);
        }
        if (fibers.back().tau < end - 1e-9) {
            const Vec x = xlim(std::min(run.eps * end, xlim.domain().b));
            fibers.push_back(converged_fiber(sys, x, end, r.T, seeds, cfg.delta, fo));
            if (!fibers.back().converged) ++unconverged;
            r.max_pullback = std::max(r.max_pullback, fibers.back().pullback);
        }
        r.tracking.push_back(tracking_distance(run, fibers, cfg.delta, r.T));
        r.unconverged_fibers.push_back(unconverged);
    }
    return r;
}

}  // namespace mdode::experiments
