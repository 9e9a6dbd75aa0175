#include "qimaps/cli.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qimaps/error.hpp"
#include "qimaps/map_text.hpp"
#include "qimaps/report.hpp"
#include "qimaps/scenarios.hpp"

namespace qimaps {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void append_line(const std::string& path, const std::string& line) {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    if (!f) throw Error(Errc::io_error, "cannot open " + path + " for appending");
    f << line << '\n';
}

/// `ball:R`, `annulus:a:b` or `box:lo:hi`.
Region parse_region(const std::string& text, int dim) {
    std::vector<double> nums;
    std::string kind;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        if (kind.empty()) {
            kind = item;
            continue;
        }
        try {
            std::size_t used = 0;
            nums.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, "bad region number '" + item + "'");
        }
    }
    if (kind == "ball" && nums.size() == 1) return Region::ball(dim, nums[0]);
    if (kind == "annulus" && nums.size() == 2) return Region::ball(dim, nums[1], nums[0]);
    if (kind == "box" && nums.size() == 2) return Region::box(dim, nums[0], nums[1]);
    throw Error(Errc::invalid_argument, "region must be ball:R, annulus:a:b or box:lo:hi");
}

Exec parse_exec(const std::string& s) {
    if (s == "parallel") return Exec::parallel;
    if (s == "serial") return Exec::serial;
    throw Error(Errc::invalid_argument, "exec must be serial or parallel");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, "bad number '" + item + "'");
        }
    }
    return out;
}

/// Trailing `--key value` / `--key=value` arguments become configuration entries.
void apply_overrides(Config& config, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string arg = extras[i];
        if (arg.rfind("--", 0) != 0) throw Error(Errc::invalid_argument, "unexpected argument '" + arg + "'");
        arg.erase(0, 2);
        std::string value;
        if (const auto eq = arg.find('='); eq != std::string::npos) {
            value = arg.substr(eq + 1);
            arg.erase(eq);
        } else {
            if (i + 1 >= extras.size()) throw Error(Errc::invalid_argument, "missing value for --" + arg);
            value = extras[++i];
        }
        for (char& ch : arg)
            if (ch == '-') ch = '_';
        config.set(arg, value);
    }
}

struct VerifyArgs {
    std::string scenario;
    std::string config;
    std::string out;
    std::string svg;
    bool no_wall_time = false;
};

int do_verify(const VerifyArgs& a, const std::vector<std::string>& extras, std::ostream& out) {
    auto emit = [&](const ScenarioResult& r) {
        const std::string line = report_line(r.report, !a.no_wall_time);
        out << line << '\n';
        if (!a.out.empty()) append_line(a.out, line);
    };
    if (a.scenario == "suite") {
        if (!a.config.empty() || !extras.empty()) throw Error(Errc::invalid_argument, "suite takes no configuration");
        bool all = true;
        for (const auto& [name, config] : default_suite()) {
            const ScenarioResult r = run_scenario(name, config);
            emit(r);
            all = all && r.report.pass;
        }
        return all ? kExitPass : kExitFail;
    }
    Config config = a.config.empty() ? Config() : Config::from_file(a.config);
    apply_overrides(config, extras);
    const ScenarioResult r = run_scenario(a.scenario, config);
    emit(r);
    if (!a.svg.empty()) {
        if (!r.svg) throw Error(Errc::invalid_argument, "scenario " + a.scenario + " produces no plot");
        write_text_file(a.svg, *r.svg);
    }
    return r.report.pass ? kExitPass : kExitFail;
}

struct EstimateArgs {
    std::string map;
    std::string region = "ball:10";
    std::size_t pairs = 100000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string exec = "parallel";
    double claim = 0.0;
    std::string svg;
};

int do_estimate(const EstimateArgs& a, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const MapExpr m = parse_map(read_file(a.map));
    SamplerConfig s;
    s.seed = a.seed_set ? a.seed : default_seed();
    s.region = parse_region(a.region, m.dim());
    s.n_pairs = a.pairs;
    s.exec = parse_exec(a.exec);
    EstimateRecord rec;
    rec.map = to_text(m);
    rec.seed = s.seed;
    rec.n_pairs = s.n_pairs;
    int code = kExitPass;
    if (a.claim > 0.0) {
        rec.op = "falsify_bilip_bound";
        const auto w = falsify_bilip_bound(m, a.claim, s);
        rec.worst_pair = w;
        rec.lambda_lower = w ? std::max(w->ratio, 1.0 / w->ratio) : 1.0;
        if (w) code = kExitFail;
        if (!w) rec.lambda_lower = bilip_lower_bound(m, s).lambda_lower;
    } else {
        rec.op = "bilip_lower_bound";
        const BilipEstimate e = bilip_lower_bound(m, s);
        rec.lambda_lower = e.lambda_lower;
        rec.worst_pair = e.worst;
    }
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    Json j = to_json(rec);
    if (a.claim > 0.0) j["claim"] = a.claim;
    j["region"] = s.region.describe();
    out << j.dump() << '\n';
    if (!a.svg.empty()) {
        std::vector<double> ratios;
        for (std::size_t i = 0; i < std::min<std::size_t>(s.n_pairs, 20000); ++i) {
            const PointPair p = sample_pair(m, s, rec.op, i);
            const double d = distance(p.x, p.y);
            if (d >= 1e-12) ratios.push_back(distance(m.eval(p.x), m.eval(p.y)) / d);
        }
        std::ostringstream svg;
        write_histogram_svg(svg, ratios, 40, "pair ratios", "|f(x) - f(y)| / |x - y|");
        write_text_file(a.svg, svg.str());
    }
    return code;
}

struct DriftArgs {
    std::string map;
    std::string witnesses;
    int k = 40;
    std::string x0;
    double threshold = 1e6;
    std::string svg;
};

int do_drift(const DriftArgs& a, std::ostream& out) {
    MapExpr m = MapExpr::identity(2);
    if (!a.map.empty()) {
        m = parse_map(read_file(a.map));
    } else if (a.witnesses == "psi") {
        m = disk_replication(make_twist_disk_map(AngleProfile::smoothstep(1.0), 0, 1, 2));
    } else if (a.witnesses == "spiral") {
        m = spiral_map(SpiralProfile::constant(rotation_matrix(0, 1, 2.0, 2)));
    } else {
        m = radial_extension(make_latitude_sphere_map(0.5, VectorN{0.0, 1.0}));
    }
    const int n = m.dim();
    VectorN x0(n);
    if (!a.x0.empty()) {
        const std::vector<double> v = parse_list(a.x0);
        if (static_cast<int>(v.size()) != n) throw Error(Errc::invalid_argument, "--x0 needs one value per coordinate");
        x0 = VectorN::from(v);
    } else {
        x0[0] = 0.3125;
        if (n > 1) x0[1] = 0.1875;
    }
    std::vector<VectorN> w;
    if (a.witnesses == "psi") {
        const auto* p = std::get_if<MapExpr::Psi>(&m.node().v);
        if (!p) throw Error(Errc::invalid_argument, "psi witnesses need a psi(...) map");
        w = psi_drift_witnesses(p->g, x0, a.k);
    } else if (a.witnesses == "spiral") {
        const auto* p = std::get_if<MapExpr::Spiral>(&m.node().v);
        if (!p) throw Error(Errc::invalid_argument, "spiral witnesses need a spiral(...) map");
        w = spiral_drift_witnesses(p->profile, a.k);
    } else if (a.witnesses == "ray") {
        w = ray_witnesses(x0, a.k);
    } else {
        throw Error(Errc::invalid_argument, "--witnesses must be psi, spiral or ray");
    }
    const DriftReport d = drift_profile(m, w, a.threshold);
    Json j;
    j["op"] = "drift_profile";
    j["map"] = to_text(m);
    j["witnesses"] = a.witnesses;
    j["k"] = a.k;
    j["threshold"] = a.threshold;
    j["verdict"] = d.verdict == DriftVerdict::exceeds ? "exceeds" : "bounded";
    Json drifts = Json::array();
    for (double v : d.drifts) drifts.push_back(v);
    j["drifts"] = drifts;
    out << j.dump() << '\n';
    if (!a.svg.empty()) {
        std::vector<double> ks;
        for (int k = 1; k <= a.k; ++k) ks.push_back(k);
        std::ostringstream svg;
        write_log_plot_svg(svg, ks, d.drifts, "drift against k (" + a.witnesses + " witnesses)", "k",
                           "|f(x_k) - x_k|");
        write_text_file(a.svg, svg.str());
    }
    return kExitPass;
}

int do_pl_norm(const std::string& path, std::ostream& out) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open " + path);
    const PLMap m = read_plmap_csv(f);
    const PLNorm nrm = pl_differential_norm(m);
    const PLValidation v = pl_validate(m);
    Json j;
    j["op"] = "pl_differential_norm";
    j["n"] = m.dim();
    j["resolution"] = m.triangulation().resolution();
    j["norm"] = nrm.norm;
    j["argmax_simplex"] = nrm.argmax_simplex;
    j["valid"] = v.ok;
    j["negative_simplices"] = v.negative_simplices.size();
    j["degenerate_simplices"] = v.degenerate_simplices.size();
    j["boundary_violations"] = v.boundary_violations.size();
    j["bilip_constant"] = v.negative_simplices.empty() && v.degenerate_simplices.empty()
                              ? Json(pl_bilip_constant(m))
                              : Json(nullptr);
    out << j.dump() << '\n';
    return v.ok ? kExitPass : kExitFail;
}

struct GeodesicArgs {
    std::string cloud;
    std::size_t pairs = 20;
    double eps = 0.05;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int do_geodesic(const GeodesicArgs& a, std::ostream& out) {
    std::ifstream f(a.cloud);
    if (!f) throw Error(Errc::io_error, "cannot open " + a.cloud);
    const EpsGraph g(read_cloud_csv(f), a.eps);
    const std::uint64_t seed = a.seed_set ? a.seed : default_seed();
    const MetricRatio m = metric_equivalence_ratio(g, a.pairs, seed);
    Json j;
    j["op"] = "metric_equivalence_ratio";
    j["points"] = g.size();
    j["eps"] = a.eps;
    j["edges"] = g.edge_count();
    j["seed"] = seed;
    j["n_sources"] = m.n_sources;
    j["n_pairs"] = m.n_pairs;
    j["ratio"] = m.ratio;
    j["worst_pair"] = {{"i", m.i}, {"j", m.j}, {"geodesic", m.geodesic}, {"chord", m.chord}};
    j["chord_violations"] = m.chord_violations;
    out << j.dump() << '\n';
    return m.chord_violations == 0 ? kExitPass : kExitFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certification of bi-Lipschitz constructions on R^n", "qimaps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Run a verification scenario ('suite' runs the default suite)");
    std::string names;
    for (const auto& s : scenario_names()) names += " " + s;
    verify->add_option("scenario", va.scenario, "Scenario name, one of:" + names + ", or suite")->required();
    verify->add_option("--config", va.config, "key = value configuration file");
    verify->add_option("--out", va.out, "Append the JSON report line to this file");
    verify->add_option("--svg", va.svg, "Write the scenario plot to this file");
    verify->add_flag("--no-wall-time", va.no_wall_time, "Omit wall_time_ms from the report");
    verify->allow_extras();
    verify->footer("Any further --key value pairs override configuration keys (for example --c 1 --n 2 --seed 7).");

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Sampled bi-Lipschitz lower bound of a map");
    estimate->add_option("--map", ea.map, "File holding the canonical text of the map")->required();
    estimate->add_option("--region", ea.region, "ball:R, annulus:a:b or box:lo:hi");
    estimate->add_option("--pairs", ea.pairs, "Number of sampled pairs")->check(CLI::PositiveNumber);
    auto* est_seed = estimate->add_option("--seed", ea.seed, "Seed");
    estimate->add_option("--exec", ea.exec, "serial or parallel");
    estimate->add_option("--claim", ea.claim, "Try to refute this claimed constant instead");
    estimate->add_option("--svg", ea.svg, "Write a histogram of pair ratios");

    DriftArgs da;
    auto* drift = app.add_subcommand("drift", "Drift of a map along a witness sequence");
    drift->add_option("--map", da.map, "File holding the canonical text of the map");
    drift->add_option("--witnesses", da.witnesses, "psi, spiral or ray")->required();
    drift->add_option("-K,--k", da.k, "Number of witnesses")->check(CLI::Range(1, 500));
    drift->add_option("--x0", da.x0, "Base point, comma separated");
    drift->add_option("--threshold", da.threshold, "Drift threshold of the verdict");
    drift->add_option("--svg", da.svg, "Write drift against k on a log scale");

    std::string plmap;
    auto* pl = app.add_subcommand("pl-norm", "Differential norm of a PL map");
    pl->add_option("--plmap", plmap, "PL map CSV")->required();

    GeodesicArgs ga;
    auto* geo = app.add_subcommand("geodesic", "Length-metric to chord ratio on a point cloud");
    geo->add_option("--cloud", ga.cloud, "Point cloud CSV")->required();
    geo->add_option("--pairs", ga.pairs, "Number of source points")->check(CLI::PositiveNumber);
    geo->add_option("--eps", ga.eps, "Neighbourhood graph radius");
    auto* geo_seed = geo->add_option("--seed", ga.seed, "Seed");

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (verify->parsed()) return do_verify(va, verify->remaining(), out);
        if (estimate->parsed()) {
            ea.seed_set = est_seed->count() > 0;
            return do_estimate(ea, out);
        }
        if (drift->parsed()) return do_drift(da, out);
        if (pl->parsed()) return do_pl_norm(plmap, out);
        if (geo->parsed()) {
            ga.seed_set = geo_seed->count() > 0;
            return do_geodesic(ga, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (verify->parsed() && (e.code() == Errc::invalid_argument || e.code() == Errc::parse_error)) {
            err << '\n' << verify->help();
        }
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace qimaps
