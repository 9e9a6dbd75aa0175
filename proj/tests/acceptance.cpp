// Acceptance run: one PASS/FAIL line per criterion. Each criterion runs its
// scenarios with the default configurations and checks the report fields
// against tolerances and wall-time budgets fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qimaps/scenarios.hpp"

using namespace qimaps;

namespace {

constexpr double kClaimSlack = 1e-6;

struct Case {
    std::string name;
    std::string config;
};

struct Run {
    Case c;
    Report report;
    double seconds = 0.0;
};

std::vector<Run> g_runs;

Run run(const Case& c) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult r = run_scenario(c.name, Config::parse_string(c.config));
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Run out{c, std::move(r.report), s};
    g_runs.push_back(out);
    return out;
}

// Collects failed checks of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void budget(const Run& r, double seconds) {
        std::ostringstream s;
        s << r.c.name << " [" << flat(r.c.config) << "] took " << r.seconds << " s, budget " << seconds << " s";
        expect(r.seconds < seconds, s.str());
    }
    bool ok() const { return failures_.empty(); }
    std::string summary() const {
        std::string out;
        for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
        return out;
    }
    static std::string flat(std::string s) {
        for (char& ch : s)
            if (ch == '\n') ch = ' ';
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    }

private:
    std::vector<std::string> failures_;
};

std::string label(const Run& r) { return r.c.name + " [" + Checks::flat(r.c.config) + "]"; }

double num(const Json& j, const char* key) { return j.contains(key) && j[key].is_number() ? j[key].get<double>() : NAN; }

void within_claim(Checks& k, const Run& r) {
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(r.report.observed <= r.report.claimed * (1.0 + kClaimSlack), label(r) + " observed above claim");
}

// 1. Radial extension: 1 + lambda on S^1 and S^2; orthogonal maps give 1.
Checks radial() {
    Checks k;
    for (const char* n : {"2", "3"}) {
        for (const char* beta : {"0.25", "0.5", "0.75"}) {
            const Run r = run({"radial", std::string("n = ") + n + "\nbeta = " + beta + "\npairs = 1000000\n"});
            within_claim(k, r);
            k.expect(r.report.n_samples >= 1'000'000, label(r) + " used fewer than 1e6 pairs");
            k.expect(num(r.report.details, "equal_radius_max_deviation") <= 1e-9, label(r) + " equal-radius deviation");
            k.budget(r, 10.0);
        }
        const Run o = run({"radial", std::string("n = ") + n + "\nphi = orthogonal\npairs = 1000000\n"});
        within_claim(k, o);
        k.expect(std::abs(o.report.observed - 1.0) <= 1e-9, label(o) + " observed not 1 +- 1e-9");
        k.budget(o, 10.0);
    }
    return k;
}

// 2. Psi keeps the constant of g, including pairs in different disks.
Checks psi() {
    Checks k;
    for (const char* n : {"2", "3"}) {
        for (const char* disk : {"twist", "pl_twist"}) {
            const Run r = run({"psi", std::string("n = ") + n + "\ndisk = " + disk + "\npairs = 1000000\n"});
            within_claim(k, r);
            k.expect(r.report.n_samples >= 1'000'000, label(r) + " used fewer than 1e6 pairs");
            k.expect(num(r.report.details, "cross_disk_pairs") > 0, label(r) + " no cross-disk pairs");
            k.budget(r, 15.0);
        }
    }
    return k;
}

// 3. Psi drift equals 2^k |g(x0) - x0| for k = 1..40.
Checks psi_drift() {
    Checks k;
    const Run r = run({"psi_drift", "k = 40\nthreshold = 1e6\n"});
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(r.report.observed <= 1e-12, label(r) + " relative error above 1e-12");
    k.expect(r.report.n_samples == 40, label(r) + " expected 40 witnesses");
    k.expect(r.report.details.value("verdict", "") == "exceeds", label(r) + " verdict not exceeds");
    k.budget(r, 1.0);
    return k;
}

// 4. Homomorphism, restriction to the unit disk, commuting disjoint supports.
Checks homomorphism() {
    Checks k;
    const Run r = run({"homomorphism", "kind = psi\npoints = 10000\n"});
    const Json& d = r.report.details;
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(num(d, "composition_max_residual") <= 1e-9, label(r) + " composition residual");
    k.expect(num(d, "restriction_points") >= 1000, label(r) + " fewer than 1e3 restriction points");
    k.expect(num(d, "restriction_max_residual") == 0.0, label(r) + " restriction not exact");
    k.expect(num(d, "commute_points") >= 10000 && num(d, "commute_mismatches") == 0, label(r) + " commuting");
    k.budget(r, 5.0);
    return k;
}

// 5. Product of quasi-isometries in the L1 product metric.
Checks product() {
    Checks k;
    const Run r = run({"product", "pairs = 100000\n"});
    const Json& d = r.report.details;
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(r.report.n_samples >= 100'000, label(r) + " used fewer than 1e5 pairs");
    k.expect(d.value("metric", "") == "l1", label(r) + " metric not l1");
    k.expect(num(d, "qi_violations") == 0, label(r) + " QI violations");
    k.expect(num(d, "drift_identity_max_residual") <= 1e-12, label(r) + " drift identity residual");
    k.expect(d.value("density_ok", false), label(r) + " density bound");
    k.budget(r, 10.0);
    return k;
}

// 6. Spiral maps: n C + 1, equal-radius pairs are isometric.
Checks spiral() {
    Checks k;
    for (const char* n : {"2", "3"}) {
        for (const char* c : {"0.5", "1", "2"}) {
            const Run r = run({"spiral", std::string("n = ") + n + "\nc = " + c + "\npairs = 1000000\n"});
            within_claim(k, r);
            const double cv = std::stod(c);
            k.expect(r.report.claimed == std::stod(n) * cv + 1.0, label(r) + " claimed is not n C + 1");
            k.expect(r.report.n_samples >= 1'000'000, label(r) + " used fewer than 1e6 pairs");
            k.expect(num(r.report.details, "equal_radius_max_deviation") <= 1e-9, label(r) + " equal-radius ratio");
            k.budget(r, 15.0);
        }
    }
    return k;
}

// 7. Cutoff profiles stay bounded; constant rotations drift as 2 sin(theta/2) 2^k.
Checks spiral_kernel() {
    Checks k;
    const Run r = run({"spiral_kernel", ""});
    const Json& d = r.report.details;
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(r.report.observed <= 1e-9, label(r) + " constant drift off the closed form");
    k.expect(d.value("constant_verdict", "") == "exceeds", label(r) + " constant verdict");
    k.expect(d.value("cutoff_verdict", "") == "bounded", label(r) + " cutoff verdict");
    k.budget(r, 2.0);
    return k;
}

// 8. Exact PL norm against dense difference quotients.
Checks pl_norm() {
    Checks k;
    for (const char* n : {"2", "3"}) {
        const Run r = run({"pl_norm", std::string("n = ") + n + "\n"});
        const Json& d = r.report.details;
        k.expect(r.report.pass, label(r) + " failed");
        k.expect(r.report.observed <= 0.01, label(r) + " gap above 1%");
        k.expect(num(d, "resolution") <= 16, label(r) + " resolution above 16");
        k.expect(num(d, "identity_error") <= 1e-10, label(r) + " identity not exact");
        k.expect(num(d, "affine_max_error") <= 1e-10, label(r) + " affine not exact");
        k.budget(r, 20.0);
    }
    return k;
}

// 9. Length metric against chords on circle and sphere clouds.
Checks metric() {
    Checks k;
    const double half_pi = std::numbers::pi / 2.0;
    const struct {
        const char* cloud;
        double tolerance;
    } cases[] = {{"circle", 0.02}, {"sphere", 0.08}};
    for (const auto& c : cases) {
        const Run r = run({"metric", std::string("cloud = ") + c.cloud + "\npoints = 10000\n"});
        k.expect(r.report.pass, label(r) + " failed");
        k.expect(std::abs(r.report.observed - half_pi) <= c.tolerance * half_pi, label(r) + " ratio off pi/2");
        k.expect(num(r.report.details, "chord_violations") == 0, label(r) + " graph length below chord");
        k.budget(r, 30.0);
    }
    return k;
}

// 10. Spectral and Frobenius norm inequalities.
Checks matrix_norms() {
    Checks k;
    const Run r = run({"matrix_norms", "count = 1000\nn_max = 8\n"});
    k.expect(r.report.pass, label(r) + " failed");
    k.expect(r.report.n_samples >= 1000, label(r) + " fewer than 1e3 matrices");
    k.expect(num(r.report.details, "violations") == 0, label(r) + " violations");
    k.budget(r, 1.0);
    return k;
}

// 11. Every scenario above reruns to byte-identical JSON, wall time excluded.
Checks determinism() {
    Checks k;
    const std::vector<Run> first = g_runs;
    k.expect(!first.empty(), "no scenarios ran");
    for (const Run& r : first) {
        const ScenarioResult again = run_scenario(r.c.name, Config::parse_string(r.c.config));
        k.expect(report_line(r.report, false) == report_line(again.report, false), label(r) + " differs on rerun");
    }
    return k;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Checks()>>> criteria = {
        {"radial extension constant", radial},
        {"psi preserves the constant", psi},
        {"psi drift law", psi_drift},
        {"homomorphism and restriction", homomorphism},
        {"product quasi-isometry constants", product},
        {"spiral bound", spiral},
        {"spiral kernel trichotomy", spiral_kernel},
        {"PL differential norms", pl_norm},
        {"length metric equivalence", metric},
        {"matrix norm inequalities", matrix_norms},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Checks k;
        try {
            k = fn();
        } catch (const std::exception& e) {
            k.expect(false, std::string("error: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2d %s (%.2f s)%s%s\n", k.ok() ? "PASS" : "FAIL", index, name, s, k.ok() ? "" : ": ",
                    k.summary().c_str());
        std::fflush(stdout);
        if (!k.ok()) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
