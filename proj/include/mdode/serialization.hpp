#pragma once

// JSON descriptors for measures and fields. Unknown keys are rejected.
//
// Measures:
//   {"kind":"lebesgue"}
//   {"kind":"cantor", "support":[a,b], "depth":52}
//   {"kind":"density", "function":"constant|sin|cos|polynomial", ...}
//   {"kind":"piecewise-constant", "breaks":[...], "values":[...]}
//   {"kind":"cantor-iteration", "level":n}
//   {"kind":"cantor-forcing", "iterations":10, "translates":100, "shift":0.01, "alternating":true, "absolute":false}
//   {"kind":"combo", "terms":[{"coefficient":c, "measure":{...}}, ...]}
//   {"kind":"translate", "shift":t, "measure":{...}}
//   {"kind":"primitive-table", "t":[...], "F":[...]}
//
// Fields:
//   {"kind":"riccati-cantor", "forcing":{...}, "forcing_scale":1, "constant":2}
//   {"kind":"linear", "A":[[...]], "b":[...]}
//   {"kind":"custom-table", "y":[...], "t":[...], "values":[[...]]}
//   {"kind":"measure", "measure":{...}, "bound":{...}}

#include <cmath>
#include <initializer_list>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "mdode/core.hpp"
#include "mdode/fields.hpp"
#include "mdode/forcing.hpp"
#include "mdode/measures.hpp"
#include "mdode/parametric.hpp"

namespace mdode {

using json = nlohmann::json;

namespace detail {

inline void require_object(const json& j, const std::string& what) {
    if (!j.is_object()) throw SerializationError(what + ": expected a JSON object");
}

inline void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw SerializationError(what + ": unknown key '" + k + "'");
}

inline double get_number(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) throw SerializationError(what + ": missing '" + key + "'");
    if (!j.at(key).is_number()) throw SerializationError(what + ": '" + key + "' must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw SerializationError(what + ": '" + key + "' must be finite");
    return v;
}

inline double get_number_or(const json& j, const char* key, double dflt, const std::string& what) {
    return j.contains(key) ? get_number(j, key, what) : dflt;
}

inline Vec get_vector(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_array()) throw SerializationError(what + ": '" + key + "' must be an array");
    Vec out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw SerializationError(what + ": '" + key + "' must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::string kind_of(const json& j, const std::string& what) {
    require_object(j, what);
    if (!j.contains("kind") || !j.at("kind").is_string()) throw SerializationError(what + ": missing string 'kind'");
    return j.at("kind").get<std::string>();
}

inline std::function<double(double)> named_density(const json& j) {
    const std::string what = "density measure";
    if (!j.contains("function") || !j.at("function").is_string())
        throw SerializationError(what + ": missing string 'function'");
    const std::string fn = j.at("function").get<std::string>();
    if (fn == "constant") {
        allow_keys(j, {"kind", "function", "value"}, what);
        const double v = get_number(j, "value", what);
        return [v](double) { return v; };
    }
    if (fn == "sin" || fn == "cos") {
        allow_keys(j, {"kind", "function", "amplitude", "frequency", "phase"}, what);
        const double A = get_number_or(j, "amplitude", 1.0, what);
        const double w = get_number_or(j, "frequency", 1.0, what);
        const double p = get_number_or(j, "phase", 0.0, what);
        if (fn == "sin") return [A, w, p](double t) { return A * std::sin(w * t + p); };
        return [A, w, p](double t) { return A * std::cos(w * t + p); };
    }
    if (fn == "polynomial") {
        allow_keys(j, {"kind", "function", "coefficients"}, what);
        const Vec c = get_vector(j, "coefficients", what);
        return [c](double t) {
            double s = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
            return s;
        };
    }
    throw SerializationError(what + ": unknown function '" + fn + "'");
}

inline CantorForcingParams forcing_params(const json& j, const std::string& what,
                                          std::initializer_list<const char*> extra = {}) {
    require_object(j, what);
    std::set<std::string> ok{"kind", "iterations", "translates", "shift", "alternating"};
    for (const char* e : extra) ok.insert(e);
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw SerializationError(what + ": unknown key '" + k + "'");
    CantorForcingParams p;
    if (j.contains("iterations")) p.iterations = j.at("iterations").get<int>();
    if (j.contains("translates")) p.translates = j.at("translates").get<int>();
    p.shift = get_number_or(j, "shift", p.shift, what);
    if (j.contains("alternating")) {
        if (!j.at("alternating").is_boolean()) throw SerializationError(what + ": 'alternating' must be a boolean");
        p.alternating = j.at("alternating").get<bool>();
    }
    return p;
}

}  // namespace detail

inline BMeasure measure_from_json(const json& j) {
    const std::string what = "measure";
    const std::string kind = detail::kind_of(j, what);
    const std::string origin = j.dump();
    try {
        if (kind == "lebesgue") {
            detail::allow_keys(j, {"kind"}, what);
            return BMeasure::lebesgue();
        }
        if (kind == "cantor") {
            detail::allow_keys(j, {"kind", "support", "depth"}, what);
            Interval s{0.0, 1.0};
            if (j.contains("support")) {
                const Vec v = detail::get_vector(j, "support", what);
                if (v.size() != 2) throw SerializationError("cantor measure: 'support' must be [a, b]");
                s = {v[0], v[1]};
            }
            const int depth = j.contains("depth") ? j.at("depth").get<int>() : 52;
            return BMeasure::cantor(depth, s, origin);
        }
        if (kind == "density") return BMeasure::density(detail::named_density(j), {}, origin);
        if (kind == "piecewise-constant") {
            detail::allow_keys(j, {"kind", "breaks", "values"}, what);
            return BMeasure::piecewise_constant(detail::get_vector(j, "breaks", what),
                                                detail::get_vector(j, "values", what), origin);
        }
        if (kind == "cantor-iteration") {
            detail::allow_keys(j, {"kind", "level"}, what);
            const int level = j.contains("level") ? j.at("level").get<int>() : 10;
            return CantorForcing({level, 1, 0.0, false}).single();
        }
        if (kind == "cantor-forcing") {
            const auto p = detail::forcing_params(j, "cantor-forcing measure", {"absolute"});
            const bool absolute = j.contains("absolute") && j.at("absolute").get<bool>();
            CantorForcing cf(p);
            return absolute ? cf.abs_sum() : cf.sum();
        }
        if (kind == "combo") {
            detail::allow_keys(j, {"kind", "terms"}, what);
            if (!j.contains("terms") || !j.at("terms").is_array())
                throw SerializationError("combo measure: 'terms' must be an array");
            std::vector<std::pair<double, BMeasure>> terms;
            for (const auto& t : j.at("terms")) {
                detail::require_object(t, "combo term");
                detail::allow_keys(t, {"coefficient", "measure"}, "combo term");
                terms.emplace_back(detail::get_number_or(t, "coefficient", 1.0, "combo term"),
                                   measure_from_json(t.at("measure")));
            }
            return BMeasure::combo(std::move(terms));
        }
        if (kind == "translate") {
            detail::allow_keys(j, {"kind", "shift", "measure"}, what);
            if (!j.contains("measure")) throw SerializationError("translate measure: missing 'measure'");
            return translate(measure_from_json(j.at("measure")), detail::get_number(j, "shift", what));
        }
        if (kind == "primitive-table") {
            detail::allow_keys(j, {"kind", "t", "F"}, what);
            return BMeasure::primitive_table(detail::get_vector(j, "t", what), detail::get_vector(j, "F", what));
        }
    } catch (const json::exception& e) {
        throw SerializationError(std::string("measure: ") + e.what());
    } catch (const ConfigurationError& e) {
        throw SerializationError(e.what());
    }
    throw SerializationError("measure: unknown kind '" + kind + "'");
}

inline BMeasure measure_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SerializationError(std::string("invalid JSON: ") + e.what());
    }
    return measure_from_json(j);
}

/// Inverse of measure_from_json. Descriptors built from JSON round-trip through their
/// origin; descriptors without a closed form (arbitrary densities or primitives)
/// must be tabulated first (see tabulate).
inline json measure_to_json(const BMeasure& mu) {
    if (!mu.origin().empty()) return json::parse(mu.origin());
    if (const auto* c = mu.as_cantor())
        return {{"kind", "cantor"}, {"support", {c->support.a, c->support.b}}, {"depth", c->depth}};
    if (const auto* pc = mu.as_piecewise_constant())
        return {{"kind", "piecewise-constant"}, {"breaks", pc->breaks}, {"values", pc->values}};
    if (const auto* tab = mu.as_primitive_table()) return {{"kind", "primitive-table"}, {"t", tab->t}, {"F", tab->F}};
    if (const auto* co = mu.as_combo()) {
        json terms = json::array();
        for (const auto& [c, m] : co->terms) terms.push_back({{"coefficient", c}, {"measure", measure_to_json(m)}});
        return {{"kind", "combo"}, {"terms", terms}};
    }
    if (const auto* tr = mu.as_translated())
        return {{"kind", "translate"}, {"shift", tr->shift}, {"measure", measure_to_json(tr->base)}};
    throw SerializationError("measure has no JSON descriptor; tabulate it as a primitive-table first");
}

/// Samples the primitive on a uniform grid of I (interchange format).
inline BMeasure tabulate(const BMeasure& mu, Interval I, std::size_t samples = 4096) {
    require_finite(I);
    if (samples < 1 || !(I.a < I.b)) throw ConfigurationError("tabulate: need a nondegenerate interval");
    Vec t(samples + 1), F(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) {
        t[i] = I.a + I.length() * static_cast<double>(i) / static_cast<double>(samples);
        F[i] = mu.primitive(t[i]);
    }
    return BMeasure::primitive_table(std::move(t), std::move(F));
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

inline ParametricMeasure field_from_json(const json& j, int max_ball = BoundFamily::default_max_ball) {
    const std::string what = "field";
    const std::string kind = detail::kind_of(j, what);
    try {
        if (kind == "riccati-cantor") {
            detail::allow_keys(j, {"kind", "forcing", "forcing_scale", "constant"}, what);
            CantorForcingParams p;
            if (j.contains("forcing")) p = detail::forcing_params(j.at("forcing"), "riccati-cantor forcing");
            return fields::RiccatiCantor(p, detail::get_number_or(j, "forcing_scale", 1.0, what),
                                         detail::get_number_or(j, "constant", 2.0, what))
                .measure(max_ball);
        }
        if (kind == "linear") {
            detail::allow_keys(j, {"kind", "A", "b"}, what);
            if (!j.contains("A") || !j.at("A").is_array()) throw SerializationError("linear field: 'A' must be a matrix");
            const std::size_t n = j.at("A").size();
            Vec A;
            for (const auto& row : j.at("A")) {
                if (!row.is_array() || row.size() != n) throw SerializationError("linear field: 'A' must be square");
                for (const auto& v : row) A.push_back(v.get<double>());
            }
            Vec b = j.contains("b") ? detail::get_vector(j, "b", what) : Vec(n, 0.0);
            return fields::Linear(n, std::move(A), std::move(b)).measure(max_ball);
        }
        if (kind == "custom-table") {
            detail::allow_keys(j, {"kind", "y", "t", "values"}, what);
            std::vector<Vec> values;
            if (!j.contains("values") || !j.at("values").is_array())
                throw SerializationError("custom-table field: 'values' must be a matrix");
            for (const auto& row : j.at("values")) values.push_back(row.get<Vec>());
            return fields::Table(detail::get_vector(j, "y", what), detail::get_vector(j, "t", what), std::move(values))
                .measure(max_ball);
        }
        if (kind == "measure") {
            detail::allow_keys(j, {"kind", "measure", "bound"}, what);
            if (!j.contains("measure")) throw SerializationError("measure field: missing 'measure'");
            const BMeasure mu = measure_from_json(j.at("measure"));
            if (!j.contains("bound")) throw SerializationError("measure field: missing positive 'bound' measure");
            return constant_parametric(mu, PositiveMeasure(measure_from_json(j.at("bound"))));
        }
    } catch (const json::exception& e) {
        throw SerializationError(std::string("field: ") + e.what());
    } catch (const ConfigurationError& e) {
        throw SerializationError(e.what());
    }
    throw SerializationError("field: unknown kind '" + kind + "'");
}

/// Accepts either a built-in field name or a JSON field document.
inline ParametricMeasure field_from_spec(const std::string& spec, int max_ball = BoundFamily::default_max_ball) {
    if (spec == "riccati-cantor" || spec == "linear" || spec == "custom-table") {
        if (spec == "riccati-cantor") return fields::RiccatiCantor().measure(max_ball);
        if (spec == "linear") return fields::Linear(1, {-1.0}, {0.0}).measure(max_ball);
        throw SerializationError("custom-table field needs a JSON document");
    }
    json j;
    try {
        j = json::parse(spec);
    } catch (const json::exception& e) {
        throw SerializationError(std::string("field spec is neither a built-in name nor JSON: ") + e.what());
    }
    return field_from_json(j, max_ball);
}

}  // namespace mdode
