#include "qimaps/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qimaps/error.hpp"

namespace qimaps {

Json to_json(const VectorN& v) {
    Json a = Json::array();
    for (double c : v.coords()) a.push_back(c);
    return a;
}

Json to_json(const PairWitness& w) {
    Json j;
    j["x"] = to_json(w.x);
    j["y"] = to_json(w.y);
    j["ratio"] = w.ratio;
    return j;
}

Json to_json(const Report& r) {
    Json j;
    j["scenario"] = r.scenario;
    j["pass"] = r.pass;
    j["claimed"] = r.claimed;
    j["observed"] = r.observed;
    j["worst_witness"] = r.worst_witness ? to_json(*r.worst_witness) : Json(nullptr);
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    j["wall_time_ms"] = r.wall_time_ms;
    j["tool_version"] = r.tool_version;
    j["details"] = r.details;
    return j;
}

std::string report_line(const Report& r, bool include_wall_time) {
    Json j = to_json(r);
    if (!include_wall_time) j.erase("wall_time_ms");
    return j.dump();
}

Json to_json(const EstimateRecord& e) {
    Json j;
    j["op"] = e.op;
    j["map"] = e.map;
    j["seed"] = e.seed;
    j["n_pairs"] = e.n_pairs;
    j["lambda_lower"] = e.lambda_lower;
    j["worst_pair"] = e.worst_pair ? to_json(*e.worst_pair) : Json(nullptr);
    j["elapsed_ms"] = e.elapsed_ms;
    return j;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void open_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 10)
        << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(kHeight / 2) << ")\">" << escape(y_label) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
        << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
}

struct Axis {
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const {
        if (hi == lo) return 0.5 * (px_lo + px_hi);
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

}  // namespace

void write_log_plot_svg(std::ostream& out, const std::vector<double>& ks, const std::vector<double>& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label) {
    if (ks.size() != values.size()) throw Error(Errc::invalid_argument, "plot: ks and values differ in length");
    open_svg(out, title, x_label, y_label + " (log10)");
    if (ks.empty()) {
        out << "</svg>\n";
        return;
    }
    std::vector<double> logs;
    for (double v : values) logs.push_back(v > 0.0 ? std::log10(v) : std::nan(""));
    double ylo = INFINITY, yhi = -INFINITY;
    for (double l : logs)
        if (std::isfinite(l)) ylo = std::min(ylo, l), yhi = std::max(yhi, l);
    if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
    ylo = std::floor(ylo);
    yhi = std::ceil(yhi);
    if (yhi == ylo) yhi = ylo + 1.0;
    const auto [kmin, kmax] = std::minmax_element(ks.begin(), ks.end());
    const Axis ax{*kmin, *kmax, kLeft, kWidth - kRight};
    const Axis ay{ylo, yhi, kHeight - kBottom, kTop};
    const int ticks = static_cast<int>(yhi - ylo);
    const int stride = std::max(1, ticks / 8);
    for (int t = 0; t <= ticks; t += stride) {
        const double y = ay(ylo + t);
        out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
            << "\" stroke=\"black\"/><text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\">1e" << static_cast<int>(ylo) + t << "</text>\n";
    }
    for (double k : {*kmin, *kmax}) {
        out << "<text x=\"" << num(ax(k)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
            << label(k) << "</text>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double y = std::isfinite(logs[i]) ? ay(logs[i]) : kHeight - kBottom;
        out << num(ax(ks[i])) << ',' << num(y) << (i + 1 < ks.size() ? " " : "");
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double y = std::isfinite(logs[i]) ? ay(logs[i]) : kHeight - kBottom;
        out << "<circle cx=\"" << num(ax(ks[i])) << "\" cy=\"" << num(y) << "\" r=\"2.5\" fill=\"#1f5fa8\"/>\n";
    }
    out << "</svg>\n";
}

void write_histogram_svg(std::ostream& out, const std::vector<double>& values, int bins, const std::string& title,
                         const std::string& x_label) {
    if (bins < 1) throw Error(Errc::invalid_argument, "histogram: bins must be positive");
    open_svg(out, title, x_label, "count");
    if (values.empty()) {
        out << "</svg>\n";
        return;
    }
    const auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
    const double lo = *vmin;
    const double hi = *vmax > lo ? *vmax : lo + 1.0;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        const auto b = static_cast<std::size_t>(std::clamp((v - lo) / (hi - lo) * bins, 0.0, bins - 1.0));
        ++counts[b];
    }
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    const Axis ax{lo, hi, kLeft, kWidth - kRight};
    const Axis ay{0.0, static_cast<double>(top), kHeight - kBottom, kTop};
    for (int b = 0; b < bins; ++b) {
        const double x0 = ax(lo + (hi - lo) * b / bins);
        const double x1 = ax(lo + (hi - lo) * (b + 1) / bins);
        const double y = ay(static_cast<double>(counts[static_cast<std::size_t>(b)]));
        out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.0, x1 - x0 - 1.0))
            << "\" height=\"" << num(kHeight - kBottom - y) << "\" fill=\"#6a9fd4\"/>\n";
    }
    out << "<text x=\"" << kLeft << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
        << label(lo) << "</text>\n";
    out << "<text x=\"" << kWidth - kRight << "\" y=\"" << num(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\">" << label(hi) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(kTop + 4) << "\" text-anchor=\"end\">" << top
        << "</text>\n";
    out << "</svg>\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    f << text;
    if (!f) throw Error(Errc::io_error, "write failed: " + path);
}

}  // namespace qimaps
