#pragma once

// Scenario reports (JSON) and plot emission (SVG).

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qimaps/core.hpp"
#include "qimaps/estimators.hpp"

namespace qimaps {

inline constexpr const char* kToolVersion = "qimaps 0.1.0";

using Json = nlohmann::ordered_json;

struct Report {
    std::string scenario;
    bool pass = false;
    double claimed = 0.0;
    double observed = 0.0;
    std::optional<PairWitness> worst_witness;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;
    std::string tool_version = kToolVersion;
    /// Scenario parameters and secondary measurements. Must not contain timings.
    Json details = Json::object();
};

Json to_json(const VectorN& v);
Json to_json(const PairWitness& w);
Json to_json(const Report& r);

/// One line of compact JSON. Fields appear in a fixed order; with
/// include_wall_time = false the wall_time_ms field is omitted, which makes the
/// text a pure function of (config, seed).
std::string report_line(const Report& r, bool include_wall_time = true);

/// JSON record of an estimator call.
struct EstimateRecord {
    std::string op;
    std::string map;
    std::uint64_t seed = 0;
    std::size_t n_pairs = 0;
    double lambda_lower = 1.0;
    std::optional<PairWitness> worst_pair;
    double elapsed_ms = 0.0;
};

Json to_json(const EstimateRecord& e);

/// Line plot of positive values against k with a log10 y axis. Non-positive
/// values are drawn on the bottom edge.
void write_log_plot_svg(std::ostream& out, const std::vector<double>& ks, const std::vector<double>& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label);

/// Histogram with `bins` equal-width bins over [min, max] of the values.
void write_histogram_svg(std::ostream& out, const std::vector<double>& values, int bins, const std::string& title,
                         const std::string& x_label);

/// Writes text to a file; throws io_error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qimaps
