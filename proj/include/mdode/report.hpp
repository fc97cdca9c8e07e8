#pragma once

// CSV tables (normative output) and minimal SVG line plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mdode/core.hpp"

namespace mdode::report {

/// Fixed-format number rendering so identical runs give byte-identical files.
/// NaN renders as an empty cell.
inline std::string num(double v) {
    if (std::isnan(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    void add_numbers(const Vec& row) {
        std::vector<std::string> r;
        r.reserve(row.size());
        for (double v : row) r.push_back(num(v));
        rows.push_back(std::move(r));
    }

    std::string to_csv() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw Error("failed writing " + path.string());
}

inline void write_csv(const std::filesystem::path& path, const Table& t) { write_text(path, t.to_csv()); }

struct Series {
    std::string label;
    Vec x;
    Vec y;  // NaN breaks the polyline
    std::string color = "black";
    double width = 1.0;
};

struct PlotSpec {
    std::string title;
    std::string xlabel = "t";
    std::string ylabel = "y";
    double xmin = std::numeric_limits<double>::quiet_NaN();
    double xmax = std::numeric_limits<double>::quiet_NaN();
    double ymin = std::numeric_limits<double>::quiet_NaN();
    double ymax = std::numeric_limits<double>::quiet_NaN();
    int width = 640;
    int height = 420;
};

inline std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series) {
    double x0 = spec.xmin, x1 = spec.xmax, y0 = spec.ymin, y1 = spec.ymax;
    auto widen = [](double& lo, double& hi, const Vec& v, bool fixed_lo, bool fixed_hi) {
        for (double a : v) {
            if (!std::isfinite(a)) continue;
            if (!fixed_lo) lo = std::isnan(lo) ? a : std::min(lo, a);
            if (!fixed_hi) hi = std::isnan(hi) ? a : std::max(hi, a);
        }
    };
    const bool fx0 = !std::isnan(x0), fx1 = !std::isnan(x1), fy0 = !std::isnan(y0), fy1 = !std::isnan(y1);
    for (const auto& s : series) {
        widen(x0, x1, s.x, fx0, fx1);
        widen(y0, y1, s.y, fy0, fy1);
    }
    if (std::isnan(x0) || std::isnan(x1)) x0 = 0, x1 = 1;
    if (std::isnan(y0) || std::isnan(y1)) y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double L = 60, R = 20, Tp = 30, B = 45;
    const double W = spec.width - L - R, H = spec.height - Tp - B;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * W; };
    auto py = [&](double y) { return Tp + (1.0 - (y - y0) / (y1 - y0)) * H; };
    char buf[256];
    std::string s;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"12\">\n",
                  spec.width, spec.height);
    s += buf;
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#444\"/>\n",
                  L, Tp, W, H);
    s += buf;
    s += "<defs><clipPath id=\"plot\"><rect x=\"" + num(L) + "\" y=\"" + num(Tp) + "\" width=\"" + num(W) +
         "\" height=\"" + num(H) + "\"/></clipPath></defs>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(xv),
                      Tp + H + 16, xv);
        s += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n", L - 6,
                      py(yv) + 4, yv);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", L + W / 2, spec.height - 8.0);
    s += buf + spec.xlabel + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"14\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">",
                  Tp + H / 2, Tp + H / 2);
    s += buf + spec.ylabel + "</text>\n";
    if (!spec.title.empty()) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"18\" text-anchor=\"middle\">", L + W / 2);
        s += buf + spec.title + "</text>\n";
    }
    s += "<g clip-path=\"url(#plot)\" fill=\"none\">\n";
    for (const auto& se : series) {
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) {
                std::snprintf(buf, sizeof buf, "<polyline stroke=\"%s\" stroke-width=\"%.2f\" points=\"",
                              se.color.c_str(), se.width);
                s += buf + pts + "\"/>\n";
            }
            pts.clear();
        };
        for (std::size_t i = 0; i < se.x.size() && i < se.y.size(); ++i) {
            if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) {
                flush();
                continue;
            }
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(se.x[i]), py(std::clamp(se.y[i], y0 - (y1 - y0), y1 + (y1 - y0))));
            pts += buf;
        }
        flush();
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace mdode::report
