#pragma once

// Versioned scenario documents ("schema": 1) and their dispatch. Every experiment
// writes CSV tables (and optional SVG plots) into an output directory.
//
// {
//   "schema": 1,
//   "experiment": "cantor-staircase" | "riccati-devil" | "slowfast-tracking" | "integrate" | "solve" | "topology",
//   "seed": 1,
//   "params": { ... experiment specific ... }
// }

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdode/experiments.hpp"
#include "mdode/integration.hpp"
#include "mdode/report.hpp"
#include "mdode/serialization.hpp"
#include "mdode/solver.hpp"
#include "mdode/topology.hpp"

namespace mdode::scenario {

inline constexpr int schema_version = 1;

struct RunOptions {
    std::filesystem::path out_dir = "out";
    bool svg = false;
    std::optional<std::uint64_t> seed;  // overrides the document seed
};

struct RunOutput {
    std::vector<std::filesystem::path> files;
    std::string summary;  // short human-readable digest
};

namespace detail {

using mdode::detail::allow_keys;
using mdode::detail::get_number;
using mdode::detail::get_number_or;
using mdode::detail::get_vector;

inline json params_or_empty(const json& p) { return p.is_null() ? json::object() : p; }

inline Interval get_interval(const json& j, const char* key, Interval dflt, const std::string& what) {
    if (!j.contains(key)) return dflt;
    const Vec v = get_vector(j, key, what);
    if (v.size() != 2) throw SerializationError(what + ": '" + key + "' must be [a, b]");
    return make_interval(v[0], v[1]);
}

inline CantorForcingParams forcing_or_default(const json& p, const std::string& what) {
    return p.contains("forcing") ? mdode::detail::forcing_params(p.at("forcing"), what + " forcing")
                                 : CantorForcingParams{};
}

inline void emit(RunOutput& out, const RunOptions& opt, const std::string& name, const report::Table& t) {
    const auto path = opt.out_dir / (name + ".csv");
    report::write_csv(path, t);
    out.files.push_back(path);
}

inline void emit_svg(RunOutput& out, const RunOptions& opt, const std::string& name, const report::PlotSpec& spec,
                     const std::vector<report::Series>& series) {
    if (!opt.svg) return;
    const auto path = opt.out_dir / (name + ".svg");
    report::write_text(path, report::svg_plot(spec, series));
    out.files.push_back(path);
}

/// Curves: {"kind":"constant","value":[..]}, {"kind":"linear","from":[..],"to":[..]},
/// {"kind":"sin","amplitude":A,"frequency":w}, {"kind":"table","t":[..],"y":[[..],..]}.
inline Curve curve_from_json(const json& c, Interval I) {
    const std::string what = "curve";
    const std::string kind = mdode::detail::kind_of(c, what);
    if (kind == "constant") {
        allow_keys(c, {"kind", "value"}, what);
        return Curve::constant(I, get_vector(c, "value", what));
    }
    if (kind == "linear") {
        allow_keys(c, {"kind", "from", "to"}, what);
        const Vec a = get_vector(c, "from", what), b = get_vector(c, "to", what);
        if (a.size() != b.size()) throw SerializationError("linear curve: endpoint dimensions differ");
        return Curve::piecewise_linear({I.a, I.b}, {a, b});
    }
    if (kind == "sin") {
        allow_keys(c, {"kind", "amplitude", "frequency"}, what);
        const double A = get_number_or(c, "amplitude", 1.0, what), w = get_number_or(c, "frequency", 1.0, what);
        return Curve::from_function(I, 1, [A, w](double t, std::span<double> out) { out[0] = A * std::sin(w * t); });
    }
    if (kind == "table") {
        allow_keys(c, {"kind", "t", "y"}, what);
        std::vector<Vec> ys;
        for (const auto& row : c.at("y")) ys.push_back(row.get<Vec>());
        return Curve::piecewise_linear(get_vector(c, "t", what), std::move(ys));
    }
    throw SerializationError("curve: unknown kind '" + kind + "'");
}

inline SeminormIndexSet index_from_json(const json& p) {
    SeminormIndexSet idx;
    if (!p.contains("index")) return idx;
    const json& j = p.at("index");
    mdode::detail::require_object(j, "index");
    allow_keys(j, {"max_denominator", "radius", "point_step", "point_radius"}, "index");
    if (j.contains("max_denominator")) idx.max_denominator = j.at("max_denominator").get<int>();
    idx.radius = get_number_or(j, "radius", idx.radius, "index");
    idx.point_step = get_number_or(j, "point_step", idx.point_step, "index");
    idx.point_radius = get_number_or(j, "point_radius", idx.point_radius, "index");
    if (idx.max_denominator < 1 || !(idx.radius > 0) || !(idx.point_step > 0) || idx.point_radius < 0)
        throw SerializationError("index: parameters must be positive");
    return idx;
}

// ---------------------------------------------------------------------------

inline RunOutput run_staircase(const json& p, const RunOptions& opt) {
    allow_keys(p, {"forcing", "samples", "t_end"}, "cantor-staircase params");
    experiments::StaircaseConfig cfg;
    cfg.forcing = forcing_or_default(p, "cantor-staircase");
    if (p.contains("samples")) cfg.samples = p.at("samples").get<std::size_t>();
    cfg.t_end = get_number_or(p, "t_end", cfg.t_end, "cantor-staircase params");
    const auto r = experiments::run_cantor_staircase(cfg);
    RunOutput out;
    emit(out, opt, "staircase", r.table());
    emit_svg(out, opt, "staircase", {"y' = f_sum(t), y(0) = 0"}, {{"y", r.t, r.y, "black", 1.0}});
    std::ostringstream s;
    s.precision(12);
    s << "f_val=" << r.f_val << " total_variation=" << r.total_variation << " y_range=[" << r.y_min << ","
      << r.y_max << "]";
    out.summary = s.str();
    return out;
}

inline RunOutput run_riccati(const json& p, const RunOptions& opt) {
    const std::string what = "riccati-devil params";
    allow_keys(p,
               {"forcing", "forcing_scale", "h", "trajectories", "y_range", "window", "attracting", "repelling",
                "output_step", "escape_radius"},
               what);
    experiments::RiccatiDevilConfig cfg;
    cfg.forcing = forcing_or_default(p, "riccati-devil");
    cfg.forcing_scale = get_number_or(p, "forcing_scale", cfg.forcing_scale, what);
    cfg.h = get_number_or(p, "h", cfg.h, what);
    if (p.contains("trajectories")) cfg.trajectories = p.at("trajectories").get<int>();
    const Interval yr = get_interval(p, "y_range", {cfg.y_low, cfg.y_high}, what);
    cfg.y_low = yr.a;
    cfg.y_high = yr.b;
    cfg.window = get_interval(p, "window", cfg.window, what);
    for (const char* key : {"attracting", "repelling"}) {
        if (!p.contains(key)) continue;
        const json& j = p.at(key);
        allow_keys(j, {"start", "value"}, key);
        double& start = key[0] == 'a' ? cfg.attracting_start : cfg.repelling_start;
        double& value = key[0] == 'a' ? cfg.attracting_value : cfg.repelling_value;
        start = get_number_or(j, "start", start, key);
        value = get_number_or(j, "value", value, key);
    }
    cfg.output_step = get_number_or(p, "output_step", cfg.output_step, what);
    cfg.escape_radius = get_number_or(p, "escape_radius", cfg.escape_radius, what);
    if (!(cfg.h > 0) || !(cfg.output_step > 0) || cfg.trajectories < 1)
        throw SerializationError(what + ": h, output_step and trajectories must be positive");
    const auto r = experiments::run_riccati_devil(cfg);
    RunOutput out;
    const auto tab = r.table();
    emit(out, opt, "riccati_devil", tab);
    if (opt.svg) {
        std::vector<report::Series> series;
        Vec t;
        for (const auto& row : tab.rows) t.push_back(std::stod(row[0]));
        for (std::size_t c = 1; c < tab.header.size(); ++c) {
            Vec y;
            for (const auto& row : tab.rows)
                y.push_back(row[c].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(row[c]));
            const bool last = c + 1 == tab.header.size(), pen = c + 2 == tab.header.size();
            series.push_back({tab.header[c], t, y, last ? "blue" : pen ? "red" : "black", last || pen ? 2.0 : 0.8});
        }
        emit_svg(out, opt, "riccati_devil", {"y' = -y^2 + 2 + f_sum(t)", "t", "y", cfg.window.a, cfg.window.b, -3, 3},
                 series);
    }
    std::size_t escaped = 0;
    for (const auto& tr : r.forward) escaped += tr.escaped;
    std::ostringstream s;
    s.precision(8);
    s << "trajectories=" << r.forward.size() << " escaped=" << escaped
      << " spread(t>=5)=" << experiments::forward_spread(r, 5.0) << " repelling(0)=" << r.repelling_at_zero();
    out.summary = s.str();
    return out;
}

inline RunOutput run_slowfast(const json& p, const RunOptions& opt) {
    const std::string what = "slowfast-tracking params";
    allow_keys(p,
               {"forcing", "eps", "delta", "t0", "x0", "y0", "h_fast", "fiber_step", "seed_radius", "seeds_per_axis"},
               what);
    experiments::SlowFastConfig cfg;
    cfg.forcing = forcing_or_default(p, "slowfast-tracking");
    if (p.contains("eps")) cfg.eps = get_vector(p, "eps", what);
    cfg.delta = get_number_or(p, "delta", cfg.delta, what);
    cfg.t0 = get_number_or(p, "t0", cfg.t0, what);
    if (p.contains("x0")) cfg.x0 = get_vector(p, "x0", what);
    if (p.contains("y0")) cfg.y0 = get_vector(p, "y0", what);
    cfg.h_fast = get_number_or(p, "h_fast", cfg.h_fast, what);
    cfg.fiber_step = get_number_or(p, "fiber_step", cfg.fiber_step, what);
    cfg.seed_radius = get_number_or(p, "seed_radius", cfg.seed_radius, what);
    if (p.contains("seeds_per_axis")) cfg.seeds_per_axis = p.at("seeds_per_axis").get<std::size_t>();
    for (double e : cfg.eps)
        if (!(e > 0)) throw SerializationError(what + ": eps values must be positive");
    if (!(cfg.delta > 0) || !(cfg.h_fast > 0) || !(cfg.fiber_step > 0) || !(cfg.t0 > 0))
        throw SerializationError(what + ": delta, t0, h_fast and fiber_step must be positive");
    const auto r = experiments::run_slowfast(bundled_slowfast(cfg.forcing), cfg);
    RunOutput out;
    emit(out, opt, "slowfast", r.table());
    emit(out, opt, "slowfast_summary", r.summary());
    if (opt.svg) {
        std::vector<report::Series> series;
        const char* colors[] = {"black", "red", "blue", "green", "orange"};
        std::size_t c = 0;
        for (const auto& tr : r.tracking) {
            Vec t, d;
            for (const auto& row : tr.rows) {
                t.push_back(row.tau * tr.eps);
                d.push_back(row.raw_distance);
            }
            series.push_back({"eps=" + report::num(tr.eps), t, d, colors[c++ % 5], 1.2});
        }
        emit_svg(out, opt, "slowfast", {"distance to pullback fiber (slow time)", "t", "dist"}, series);
    }
    std::ostringstream s;
    s.precision(6);
    s << "T=" << r.T << " max_pullback=" << r.max_pullback;
    for (const auto& tr : r.tracking) s << " eps=" << tr.eps << ":max=" << tr.max_distance << ",raw=" << tr.max_raw_distance;
    out.summary = s.str();
    return out;
}

// "field": a builtin name, a JSON document, or absent (the forced Riccati field).
inline ParametricMeasure field_param(const json& p) {
    if (!p.contains("field")) return fields::RiccatiCantor().measure();
    const json& f = p.at("field");
    return f.is_string() ? field_from_spec(f.get<std::string>()) : field_from_json(f);
}

inline RunOutput run_integrate(const json& p, const RunOptions& opt) {
    const std::string what = "integrate params";
    allow_keys(p, {"measure", "field", "curve", "interval", "tol"}, what);
    if (p.contains("measure") == p.contains("field"))
        throw SerializationError(what + ": give exactly one of 'measure' or 'field'");
    const Interval I = get_interval(p, "interval", {0.0, 1.0}, what);
    ParametricMeasure nu = p.contains("field") ? field_param(p) : [&] {
        const BMeasure mu = measure_from_json(p.at("measure"));
        return constant_parametric(mu, PositiveMeasure(BMeasure{}));
    }();
    const Curve y = p.contains("curve") ? curve_from_json(p.at("curve"), I)
                                        : Curve::constant(I, Vec(nu.input_dim(), 0.0));
    IntegrationOptions io;
    io.tol = get_number_or(p, "tol", io.tol, what);
    const auto r = integrate_along(nu, y, I, io);
    report::Table t;
    t.header = {"component", "value", "mesh", "est_error", "refinements"};
    for (std::size_t i = 0; i < r.value.size(); ++i)
        t.add_numbers({static_cast<double>(i), r.value[i], r.mesh, r.est_error, static_cast<double>(r.refinements)});
    RunOutput out;
    emit(out, opt, "integrate", t);
    out.summary = "value=" + report::num(r.value[0]) + " est_error=" + report::num(r.est_error);
    return out;
}

inline RunOutput run_solve(const json& p, const RunOptions& opt) {
    const std::string what = "solve params";
    allow_keys(p, {"field", "y0", "t0", "T", "h", "scheme", "tol"}, what);
    ParametricMeasure nu = field_param(p);
    const Vec y0 = p.contains("y0") ? get_vector(p, "y0", what) : Vec(nu.input_dim(), 0.0);
    const double t0 = get_number_or(p, "t0", 0.0, what);
    const double T = get_number_or(p, "T", 1.0, what);
    const std::string scheme = p.contains("scheme") ? p.at("scheme").get<std::string>() : "euler";
    SolutionPath path;
    if (scheme == "euler") {
        const double h = get_number_or(p, "h", 1e-3, what);
        if (!(h > 0)) throw SerializationError(what + ": h must be positive");
        path = solve_euler(nu, t0, y0, T, h);
    } else if (scheme == "picard") {
        SolverConfig cfg;
        cfg.tol = get_number_or(p, "tol", cfg.tol, what);
        path = solve_picard(nu, t0, y0, T, cfg).path;
    } else {
        throw SerializationError(what + ": scheme must be 'euler' or 'picard'");
    }
    report::Table t;
    t.header = {"t"};
    for (std::size_t i = 0; i < path.dim(); ++i) t.header.push_back("y" + std::to_string(i + 1));
    for (std::size_t k = 0; k < path.size(); ++k) {
        Vec row{path.times[k]};
        row.insert(row.end(), path.values[k].begin(), path.values[k].end());
        t.add_numbers(row);
    }
    RunOutput out;
    emit(out, opt, "solve", t);
    if (opt.svg) {
        std::vector<report::Series> series;
        for (std::size_t i = 0; i < path.dim(); ++i) {
            Vec y;
            for (const auto& v : path.values) y.push_back(v[i]);
            series.push_back({"y" + std::to_string(i + 1), path.times, y, i == 0 ? "black" : "red", 1.2});
        }
        emit_svg(out, opt, "solve", {std::string("solution (") + scheme + ")"}, series);
    }
    out.summary = "points=" + std::to_string(path.size()) + " y(T)=" + report::num(path.back()[0]);
    return out;
}

inline RunOutput run_topology(const json& p, const RunOptions& opt, std::uint64_t seed) {
    const std::string what = "topology params";
    allow_keys(p, {"mode", "field", "shifts", "index", "ball", "probe", "interval", "curves"}, what);
    const std::string mode = p.contains("mode") ? p.at("mode").get<std::string>() : "hull";
    ParametricMeasure nu = field_param(p);
    const SeminormIndexSet idx = index_from_json(p);
    RunOutput out;
    if (mode == "dist") {
        // distance of nu to its translates nu . t for each t in "shifts"
        const Vec shifts = p.contains("shifts") ? get_vector(p, "shifts", what) : Vec{1.0, 0.5, 0.25, 0.125};
        report::Table t;
        t.header = {"shift", "distance"};
        for (double s : shifts) t.add_numbers({s, dist_sigma_D(nu, nu.translated(s), idx)});
        emit(out, opt, "topology_dist", t);
        out.summary = "distances=" + std::to_string(shifts.size());
        return out;
    }
    if (mode == "hull") {
        const Vec shifts = p.contains("shifts") ? get_vector(p, "shifts", what) : Vec{0.0};
        const auto h = hull_sample(nu, shifts, idx);
        report::Table m;
        m.header = {"shift"};
        for (double s : shifts) m.header.push_back(report::num(s));
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            Vec row{shifts[i]};
            row.insert(row.end(), h.distances[i].begin(), h.distances[i].end());
            m.add_numbers(row);
        }
        emit(out, opt, "topology_hull_matrix", m);
        report::Table c;
        c.header = {"n", "cover_radius", "epsilon"};
        for (std::size_t n = 1; n <= h.cover_radius.size(); ++n)
            c.add_numbers({static_cast<double>(n), h.cover_radius[n - 1],
                           n >= 2 ? h.epsilon[n - 2] : std::numeric_limits<double>::quiet_NaN()});
        emit(out, opt, "topology_hull_cover", c);
        out.summary = std::string("identity_exact=") + (h.flow.identity_exact ? "true" : "false") +
                      " composition_holds=" + (h.flow.composition_holds ? "true" : "false");
        return out;
    }
    if (mode == "diagnose") {
        const int j = p.contains("ball") ? p.at("ball").get<int>() : 1;
        if (!nu.has_bounds()) throw SerializationError(what + ": field has no bounds to diagnose");
        const Vec shifts = p.contains("shifts") ? get_vector(p, "shifts", what) : Vec{0.0};
        std::vector<PositiveMeasure> family;
        for (double s : shifts) family.push_back(nu.bounds().ball(j).m.translated(s));
        FamilyProbe probe;
        if (p.contains("probe")) {
            const json& q = p.at("probe");
            allow_keys(q, {"range", "grid", "epsilons", "claimed_bound"}, "probe");
            probe.range = get_interval(q, "range", probe.range, "probe");
            if (q.contains("grid")) probe.grid = q.at("grid").get<std::size_t>();
            if (q.contains("epsilons")) probe.epsilons = get_vector(q, "epsilons", "probe");
            probe.claimed_bound = get_number_or(q, "claimed_bound", probe.claimed_bound, "probe");
        }
        const auto d = family_diagnostics(family, probe);
        report::Table t;
        t.header = {"epsilon", "delta"};
        for (const auto& row : d.table) t.add_numbers({row.epsilon, row.delta});
        emit(out, opt, "topology_diagnostics", t);
        out.summary = "c=" + report::num(d.c) + " bounded=" + (d.bounded ? "true" : "false") +
                      " equicontinuous=" + (d.equicontinuous ? "true" : "false");
        return out;
    }
    if (mode == "theta") {
        // sampled lower bound of the curve-family seminorm on (interval, ball)
        const int j = p.contains("ball") ? p.at("ball").get<int>() : 1;
        const Interval I = get_interval(p, "interval", {0.0, 1.0}, what);
        if (!nu.has_bounds()) throw SerializationError(what + ": field has no bounds for the window modulus");
        CurveFamilySampler::Config sc;
        sc.interval = I;
        sc.ball = j;
        sc.dim = nu.input_dim();
        sc.seed = seed;
        if (p.contains("curves")) sc.n_curves = p.at("curves").get<std::size_t>();
        const CurveFamilySampler sampler(sc, make_theta({nu.bounds().ball(j).m}, I));
        const auto th = seminorm_Theta(nu, I, sampler);
        report::Table t;
        t.header = {"a", "b", "ball", "seed", "lower_bound", "curves", "failures"};
        t.add_numbers({I.a, I.b, static_cast<double>(j), static_cast<double>(seed), th.value,
                       static_cast<double>(th.curves), static_cast<double>(th.failures)});
        emit(out, opt, "topology_theta", t);
        out.summary = "theta_lower_bound=" + report::num(th.value);
        return out;
    }
    throw SerializationError(what + ": mode must be dist, hull, diagnose or theta");
}

}  // namespace detail

/// Validates and runs a scenario document.
inline RunOutput run_scenario(const json& doc, const RunOptions& opt) {
    mdode::detail::require_object(doc, "scenario");
    detail::allow_keys(doc, {"schema", "experiment", "seed", "params"}, "scenario");
    if (!doc.contains("schema") || !doc.at("schema").is_number_integer() ||
        doc.at("schema").get<int>() != schema_version)
        throw SerializationError("scenario: 'schema' must be 1");
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        throw SerializationError("scenario: missing string 'experiment'");
    const std::string exp = doc.at("experiment").get<std::string>();
    const json params = detail::params_or_empty(doc.value("params", json()));
    mdode::detail::require_object(params, "scenario params");
    const std::uint64_t seed = opt.seed.value_or(doc.value("seed", std::uint64_t{1}));
    try {
        if (exp == "cantor-staircase") return detail::run_staircase(params, opt);
        if (exp == "riccati-devil") return detail::run_riccati(params, opt);
        if (exp == "slowfast-tracking") return detail::run_slowfast(params, opt);
        if (exp == "integrate") return detail::run_integrate(params, opt);
        if (exp == "solve") return detail::run_solve(params, opt);
        if (exp == "topology") return detail::run_topology(params, opt, seed);
    } catch (const json::exception& e) {
        throw SerializationError(std::string("scenario: ") + e.what());
    }
    throw SerializationError("scenario: unknown experiment '" + exp + "'");
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw SerializationError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw SerializationError(path.string() + ": " + e.what());
    }
}

}  // namespace mdode::scenario
