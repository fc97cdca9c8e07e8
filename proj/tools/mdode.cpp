// Command-line runner for the measure-driven ODE experiments.
//
//   mdode [--out-dir DIR] [--seed N] [--format csv|csv+svg] <subcommand> ...
//
// Every subcommand assembles a schema-1 scenario document (optionally starting
// from --scenario FILE) and hands it to the scenario runner.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mdode/scenario.hpp"

namespace {

using mdode::json;

// Inline JSON text, or a path to a JSON file.
json json_arg(const std::string& s) {
    if (std::filesystem::exists(s)) return mdode::scenario::load_json_file(s);
    try {
        return json::parse(s);
    } catch (const json::exception& e) {
        throw mdode::SerializationError("'" + s + "' is neither a file nor valid JSON: " + e.what());
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

// Curve argument: a CSV file (t,y1,...,yN with header), or builtin
// "constant:v1,..,vN", "linear:a,b", "sin".
json curve_arg(const std::string& s) {
    if (std::filesystem::exists(s)) {
        std::ifstream f(s);
        std::string line;
        std::getline(f, line);  // header
        json t = json::array(), y = json::array();
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            const auto v = parse_list(line);
            if (v.size() < 2) throw mdode::SerializationError("curve CSV rows need t and at least one coordinate");
            t.push_back(v[0]);
            y.push_back(std::vector<double>(v.begin() + 1, v.end()));
        }
        return {{"kind", "table"}, {"t", t}, {"y", y}};
    }
    const auto colon = s.find(':');
    const std::string name = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (name == "constant") return {{"kind", "constant"}, {"value", parse_list(rest.empty() ? "0" : rest)}};
    if (name == "linear") {
        const auto v = parse_list(rest);
        if (v.size() != 2) throw mdode::SerializationError("linear curve needs 'linear:a,b'");
        return {{"kind", "linear"}, {"from", {v[0]}}, {"to", {v[1]}}};
    }
    if (name == "sin") return {{"kind", "sin"}};
    throw mdode::SerializationError("unknown curve '" + s + "'");
}

json field_arg(const std::string& s) {
    if (s == "riccati-cantor" || s == "linear") return s;
    return json_arg(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measure-driven generalized ODEs: experiments, solvers and diagnostics"};
    app.require_subcommand(1);
    // "--h" is the step-size flag, so help is long-form only
    app.set_help_flag("--help", "Print this help message and exit");

    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed = 1;
    app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides scenario seed)");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "csv+svg"}))->capture_default_str();

    json doc = {{"schema", mdode::scenario::schema_version}, {"params", json::object()}};
    std::string scenario_file;
    auto from_scenario = [&](const std::string& experiment) {
        if (!scenario_file.empty()) {
            doc = mdode::scenario::load_json_file(scenario_file);
            if (!doc.contains("params")) doc["params"] = json::object();
        }
        doc["experiment"] = experiment;
    };

    // cantor-staircase
    auto* st = app.add_subcommand("cantor-staircase", "Staircase y' = f_sum(t), y(0) = 0");
    int iterations = 10, translates = 100;
    double shift = 0.01;
    bool non_alternating = false;
    std::size_t samples = 10000;
    st->add_option("--scenario", scenario_file, "Scenario JSON to start from");
    auto* st_it = st->add_option("--iterations", iterations, "Cantor iteration depth");
    auto* st_tr = st->add_option("--translates", translates, "Number of translates");
    auto* st_sh = st->add_option("--shift", shift, "Translate spacing");
    auto* st_na = st->add_flag("--non-alternating", non_alternating, "Use +1 signs instead of (-1)^j");
    auto* st_sa = st->add_option("--samples", samples, "Output samples");

    // riccati-devil
    auto* rd = app.add_subcommand("riccati-devil", "Trajectories of y' = -y^2 + 2 + f_sum(t)");
    double rd_h = mdode::stiff_riccati_step;
    std::string rd_window;
    rd->add_option("--scenario", scenario_file, "Scenario JSON to start from");
    auto* rd_h_opt = rd->add_option("--h", rd_h, "Euler step");
    rd->add_option("--window", rd_window, "Output window a,b");

    // slowfast
    auto* sf = app.add_subcommand("slowfast", "Slow-fast tracking of pullback fibers");
    std::string eps_list;
    double delta = 0.1;
    sf->add_option("--scenario", scenario_file, "Scenario JSON to start from");
    sf->add_option("--eps", eps_list, "Comma-separated eps ladder");
    auto* sf_delta = sf->add_option("--delta", delta, "Inflation radius");

    // integrate
    auto* in = app.add_subcommand("integrate", "Curve integral of a (parametric) measure");
    std::string measure_s, field_s, curve_s, interval_s = "0,1";
    double tol = 1e-9;
    in->add_option("--measure", measure_s, "Measure JSON (inline or file)");
    in->add_option("--field", field_s, "Field name or JSON");
    in->add_option("--curve", curve_s, "Curve CSV file or builtin (constant:v, linear:a,b, sin)");
    in->add_option("--interval", interval_s, "Interval a,b")->capture_default_str();
    auto* in_tol = in->add_option("--tol", tol, "Tolerance");

    // solve
    auto* so = app.add_subcommand("solve", "Solve y' = nu_y by Euler or Picard");
    std::string so_field = "riccati-cantor", y0_s = "0", scheme = "euler";
    double t0 = 0.0, T = 1.0, h = 1e-3;
    so->add_option("--field", so_field, "Field name or JSON")->capture_default_str();
    so->add_option("--y0", y0_s, "Initial value (comma-separated)")->capture_default_str();
    so->add_option("--t0", t0, "Initial time")->capture_default_str();
    so->add_option("--T", T, "Final time")->capture_default_str();
    so->add_option("--h", h, "Euler step")->capture_default_str();
    so->add_option("--scheme", scheme, "euler | picard")->check(CLI::IsMember({"euler", "picard"}))->capture_default_str();

    // topology
    auto* to = app.add_subcommand("topology", "Distances, hull samples and family diagnostics");
    std::string mode, config;
    to->add_option("mode", mode, "dist | hull | diagnose | theta")
        ->required()
        ->check(CLI::IsMember({"dist", "hull", "diagnose", "theta"}));
    to->add_option("--config", config, "Topology params JSON (inline or file)");

    // run
    auto* run = app.add_subcommand("run", "Run a scenario JSON file");
    std::string run_file;
    run->add_option("scenario", run_file, "Scenario file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (st->parsed()) {
            from_scenario("cantor-staircase");
            json& p = doc["params"];
            if (*st_it || *st_tr || *st_sh || *st_na) {
                json f = p.value("forcing", json::object());
                if (*st_it) f["iterations"] = iterations;
                if (*st_tr) f["translates"] = translates;
                if (*st_sh) f["shift"] = shift;
                if (*st_na) f["alternating"] = false;
                p["forcing"] = f;
            }
            if (*st_sa) p["samples"] = samples;
        } else if (rd->parsed()) {
            from_scenario("riccati-devil");
            json& p = doc["params"];
            if (*rd_h_opt) p["h"] = rd_h;
            if (!rd_window.empty()) p["window"] = parse_list(rd_window);
        } else if (sf->parsed()) {
            from_scenario("slowfast-tracking");
            json& p = doc["params"];
            if (!eps_list.empty()) p["eps"] = parse_list(eps_list);
            if (*sf_delta) p["delta"] = delta;
        } else if (in->parsed()) {
            doc["experiment"] = "integrate";
            json& p = doc["params"];
            if (!measure_s.empty()) p["measure"] = json_arg(measure_s);
            if (!field_s.empty()) p["field"] = field_arg(field_s);
            if (!curve_s.empty()) p["curve"] = curve_arg(curve_s);
            p["interval"] = parse_list(interval_s);
            if (*in_tol) p["tol"] = tol;
        } else if (so->parsed()) {
            doc["experiment"] = "solve";
            doc["params"] = {{"field", field_arg(so_field)}, {"y0", parse_list(y0_s)}, {"t0", t0}, {"T", T},
                             {"h", h},                       {"scheme", scheme}};
        } else if (to->parsed()) {
            doc["experiment"] = "topology";
            json p = config.empty() ? json::object() : json_arg(config);
            p["mode"] = mode;
            doc["params"] = p;
        } else if (run->parsed()) {
            doc = mdode::scenario::load_json_file(run_file);
        }

        mdode::scenario::RunOptions opt;
        opt.out_dir = out_dir;
        opt.svg = format == "csv+svg";
        if (*seed_opt) opt.seed = seed;
        const auto out = mdode::scenario::run_scenario(doc, opt);
        for (const auto& f : out.files) std::cout << "wrote " << f.string() << '\n';
        std::cout << out.summary << '\n';
    } catch (const mdode::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
