#pragma once

// Verification scenarios: each binds a construction to the estimators and
// produces a Report whose pass flag is decided by fixed tolerances.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qimaps/report.hpp"

namespace qimaps {

/// Name of the environment variable that overrides the default seed.
inline constexpr const char* kSeedEnv = "QIMAPS_SEED";
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Seed used when a configuration does not set one: QIMAPS_SEED if set (decimal
/// or 0x-prefixed hex), else kDefaultSeed. Throws invalid_argument for a
/// malformed value.
std::uint64_t default_seed();

/// Flat key = value configuration. Lines are `key = value`; `#` starts a
/// comment; keys are [a-z0-9_]+; repeated keys are an error. Every key must be
/// consumed by the scenario that reads it, so misspelled keys are reported.
class Config {
public:
    static Config parse(std::istream& in);
    static Config parse_string(const std::string& text);
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    /// Comma-separated reals.
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

    /// Keys never read by a getter.
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    const std::string* find(const std::string& key) const;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

struct ScenarioResult {
    Report report;
    /// SVG plot (drift against k, or a histogram of pair ratios).
    std::optional<std::string> svg;
};

std::vector<std::string> scenario_names();

/// Runs a scenario. Throws invalid_argument for an unknown scenario or an
/// unused configuration key; constructor errors propagate.
ScenarioResult run_scenario(const std::string& name, const Config& config);

/// The default suite: scenario names with their configurations, covering every
/// quantitative bound the constructions carry.
std::vector<std::pair<std::string, Config>> default_suite();

}  // namespace qimaps
