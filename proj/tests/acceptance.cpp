// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include "golden_suite.hpp"
#include "joint_corpus.hpp"

#include "mb/bayes.hpp"
#include "mb/borel_kolmogorov.hpp"
#include "mb/conditional.hpp"
#include "mb/corpus.hpp"
#include "mb/distributions.hpp"
#include "mb/error.hpp"
#include "mb/model_dsl.hpp"
#include "mb/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace mb;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = MB_SOURCE_DIR;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

GridSpec grid_with(std::size_t nodes, double truncation = 30.0) {
    GridSpec g;
    g.nodes = nodes;
    g.truncation = truncation;
    return g;
}

std::vector<double> lattice(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * (i + 0.5) / n);
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- 1

Verdict conjugacy() {
    GridSpec g = grid_with(100000);
    double worst_sup = 0, worst_lm = 0;
    for (double y : {0.5, 1.0, 2.0, 5.0}) {
        PosteriorResult r = posterior(corpus::gamma_exponential(), Point{y}, g);
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
            double t = r.grid.node(i)[0];
            // (y+2)^3 / 2 theta^2 e^{-(2+y) theta}
            double exact = std::pow(y + 2, 3) / 2 * t * t * std::exp(-(2 + y) * t);
            worst_sup = std::max(worst_sup, std::abs(std::exp(r.log_density[i]) - exact));
        }
        worst_lm = std::max(worst_lm, std::abs(r.log_marginal_likelihood - std::log(8 / std::pow(y + 2, 3))));
    }
    return {worst_sup <= 1e-4 && worst_lm <= 1e-5,
            "sup error " + sci(worst_sup) + " (<= 1e-4), log-marginal error " + sci(worst_lm) + " (<= 1e-5)"};
}

// ---------------------------------------------------------------- 2

Verdict reparam_invariance() {
    struct Case {
        const char* name;
        BayesModel model;
        double y;
    };
    std::vector<Case> cases = {{"gamma-exponential", corpus::gamma_exponential(), 1.0},
                               {"gamma-gamma(9)", corpus::gamma_gamma(9.0), 1.0},
                               {"normal-normal", corpus::normal_normal(10, 1), 2.0}};
    GridSpec g = grid_with(4096);
    double sup = 0, shift = 0;
    int pairs = 0, map_mismatch = 0;
    for (const Case& c : cases) {
        Interval data = c.model.data_space.as_box().bounds.front();
        for (const Transform& t : transforms::registry()) {
            // Only transforms defined on the whole data space apply.
            if (data.lo < t.domain.lo || data.hi > t.domain.hi) continue;
            InvarianceReport r = posterior_invariance_report(c.model, t, c.y, g);
            sup = std::max(sup, r.posterior_supdiff);
            shift = std::max(shift, std::abs(r.log_marginal_shift + std::log(std::abs(t.jacobian_det(c.y)))));
            map_mismatch += r.map_index_x != r.map_index_y;
            ++pairs;
        }
    }
    return {sup <= 1e-6 && shift <= 1e-6 && map_mismatch == 0 && pairs >= 10,
            std::to_string(pairs) + " model/transform pairs, posterior sup diff " + sci(sup) +
                " (<= 1e-6), log-marginal shift error " + sci(shift) + " (<= 1e-6), MAP index mismatches " +
                std::to_string(map_mismatch)};
}

// ---------------------------------------------------------------- 3

Verdict wrong_jacobian() {
    ForwardModel fm = additive_normal([](double m) { return m; }, 1.0);
    Density prior = Density::from_log(BaseMeasure::lebesgue(-joints::kInf, joints::kInf),
                                      [](PointView m) { return dist::log_normal_pdf(m[0], 0, 10); });
    AcausalityReport r = acausality_demo(fm, prior, transforms::cube(), 2.0, grid_with(4096));
    double oracle = 2 * 100.0 / 101.0;
    double correct_err = std::abs(r.map_correct[0] - oracle);
    double steps = std::abs(r.map_wrong[0] - oracle) / r.grid_step;
    return {correct_err <= r.grid_step && steps > 10,
            "correct MAP " + sci(r.map_correct[0]) + " vs 1.9802 (within " + sci(correct_err / r.grid_step) +
                " steps), erroneous MAP " + sci(r.map_wrong[0]) + " (" + sci(steps) + " steps away)"};
}

// ---------------------------------------------------------------- 4

Verdict borel_kolmogorov() {
    ParadoxReport r = paradox_report(exponential_diagonal_problem(), grid_with(1024));
    double e_diff = std::abs(r.difference.mean - 0.5), e_ratio = std::abs(r.ratio.mean - 1.0);
    bool ok = e_diff <= 1e-3 && e_ratio <= 1e-3 && r.supdiff >= 0.1 && r.band.monotone && r.wedge.monotone;
    return {ok, "means " + sci(r.difference.mean) + " / " + sci(r.ratio.mean) + ", sup separation " +
                    sci(r.supdiff) + ", band " + (r.band.monotone ? "monotone" : "NOT monotone") + " to " +
                    sci(r.band.distances.back()) + ", wedge " + (r.wedge.monotone ? "monotone" : "NOT monotone") +
                    " to " + sci(r.wedge.distances.back())};
}

// ---------------------------------------------------------------- 5

Verdict conditional_laws() {
    using namespace joints;
    GridSpec g = grid_with(8192);
    double slice_err = 0;
    auto slice_mass = [&](const ConditionalDensity& c, double y) {
        return integrate(c.slice(Point{y}).eval_function(), c.space_x(), g);
    };
    for (const JointDensity& j : {waiting_times(), independent_exp(), correlated_exp()}) {
        auto c = condition_on_y(j, g);
        for (double y : lattice(0, 10, 64)) slice_err = std::max(slice_err, std::abs(slice_mass(c, y) - 1));
    }
    auto cp = condition_on_y(gamma_poisson(), g);
    for (int k = 0; k <= 60; ++k) slice_err = std::max(slice_err, std::abs(slice_mass(cp, k) - 1));
    auto ct = condition_on_y(discrete_table(), g);
    for (int k = 0; k <= 1; ++k) slice_err = std::max(slice_err, std::abs(slice_mass(ct, k) - 1));

    // Law of total probability against closed-form x marginals.
    double total_err = 0;
    auto reconstruct = [&](const JointDensity& j, const GridSpec& gs, const std::vector<double>& xs,
                           const std::function<double(double)>& px) {
        auto c = condition_on_y(j, gs);
        Density my = marginalize_y(j, gs);
        for (double x : xs) total_err = std::max(total_err, std::abs(total_probability(c, my, Point{x}, gs) - px(x)));
    };
    // y cut at 200: the joint integrates over y to 4 t e^{-2t} (1 - e^{-200 t}).
    reconstruct(waiting_times(), grid_with(8192, 200), lattice(0.05, 8, 16),
                [](double t) { return 4 * t * std::exp(-2 * t) * (1 - std::exp(-200 * t)); });
    reconstruct(correlated_exp(), grid_with(4096), lattice(0, 8, 16),
                [](double x) { return (1 + x) * std::exp(-x) / 2; });
    reconstruct(independent_exp(), grid_with(4096), lattice(0, 8, 16), [](double x) { return std::exp(-x); });
    reconstruct(gamma_poisson(), g, lattice(0.05, 8, 16), [](double t) { return 4 * t * std::exp(-2 * t); });
    reconstruct(discrete_table(), GridSpec{}, {0, 1, 2},
                [](double x) { return kTable[int(x)][0] + kTable[int(x)][1]; });

    // Interval conditioning toward the slice CDF at (x, y) = (1, 1).
    GridSpec gi = grid_with(8192);
    gi.axis_nodes = {8192, 512};
    double worst_ratio = 0;
    struct Smooth {
        JointDensity j;
        double limit;
    };
    for (const Smooth& s : {Smooth{correlated_exp(), 1 - 1.5 / std::exp(1.0)},
                            Smooth{waiting_times(), 1 - 8.5 * std::exp(-3.0)}}) {
        double prev = -1;
        for (double delta : {0.4, 0.2, 0.1, 0.05}) {
            double err = std::abs(interval_condition_cdf(s.j, 1.0, 1.0, delta, gi) - s.limit);
            if (prev > 0) worst_ratio = std::max(worst_ratio, err / prev);
            prev = err;
        }
    }
    return {slice_err <= 1e-5 && total_err <= 1e-4 && worst_ratio <= 0.6,
            "slice mass error " + sci(slice_err) + " (<= 1e-5), total-probability error " + sci(total_err) +
                " (<= 1e-4), worst interval error ratio per halving " + sci(worst_ratio) + " (<= 0.6)"};
}

// ---------------------------------------------------------------- 6

Verdict version_equivalence() {
    using namespace joints;
    GridSpec g = grid_with(512);
    auto j = waiting_times();
    auto c = condition_on_y(j, g);
    Density my = marginalize_y(j, g);
    auto unit_exp = Density::from_log(BaseMeasure::lebesgue(0, kInf), [](PointView p) { return -p[0]; }, true);
    auto gamma39 = Density::from_log(
        BaseMeasure::lebesgue(0, kInf),
        [](PointView p) { return 3 * std::log(9.0) - std::lgamma(3.0) + 2 * std::log(p[0]) - 9 * p[0]; }, true);

    Grid y_nodes = make_grid(c.space_y(), g);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uy(0, 30);
    int sets = 0, passed = 0;
    for (int n = 1; n <= 8; ++n) {
        for (bool on_nodes : {false, true}) {
            auto t = c;
            for (int i = 0; i < n; ++i) {
                Point y0 = on_nodes ? y_nodes.node(std::size_t(i) * 53 % y_nodes.size()) : Point{uy(rng)};
                t = tweak_version(t, y0, i % 2 ? unit_exp : gamma39);
            }
            ++sets;
            passed += ae_equal(c, t, my, g, 1e-6);
        }
    }
    auto other = condition_on_y(correlated_exp(), g);
    double d = ae_distance(c, other, my, g);
    bool separated = !ae_equal(c, other, my, g, 1e-3);
    return {passed == sets && separated, std::to_string(passed) + "/" + std::to_string(sets) +
                                             " tweaked versions pass at 1e-6; a different joint is at distance " +
                                             sci(d) + " and fails at 1e-3"};
}

// ---------------------------------------------------------------- 7

Verdict dsl_integrity() {
    int files = 0, fixed_points = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "models")) {
        if (e.path().extension() != ".bmod") continue;
        ++files;
        dsl::ModelGraph g = dsl::parse(slurp(e.path()));
        std::string once = dsl::print_canonical(g);
        dsl::ModelGraph back = dsl::parse(once);
        fixed_points += dsl::same_structure(g, back) && dsl::print_canonical(back) == once;
    }

    dsl::CompiledModel cm = dsl::compile_joint(dsl::parse(slurp(kRoot / "models" / "fig2_acausality.bmod")));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ud(0.02, 0.4), uz(-4, 4), ul(-1, 1);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        double d = (i % 2 ? -1 : 1) * ud(rng), m = 0.5 + uz(rng) * std::abs(d), l = ul(rng);
        double q = (m - 0.5) * (m - 0.5) / (d * d) + l * l / 0.09 + d * d / 0.04;
        double want = std::exp(-0.5 * q) / std::abs(d) / (std::pow(2 * std::numbers::pi, 1.5) * 0.2 * 0.3);
        worst = std::max(worst, std::abs(cm.prior.eval(Point{d, m, l}) / want - 1));
    }

    int malformed = 0, positioned = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "tests" / "fixtures" / "malformed")) {
        ++malformed;
        try {
            dsl::parse(slurp(e.path()));
        } catch (const ParseError& pe) {
            positioned += pe.line() > 0 && pe.column() > 0;
        } catch (...) {
        }
    }
    return {files >= 4 && fixed_points == files && worst <= 1e-10 && positioned == malformed,
            std::to_string(fixed_points) + "/" + std::to_string(files) + " corpus files round-trip, prior relative error " +
                sci(worst) + " (<= 1e-10), " + std::to_string(positioned) + "/" + std::to_string(malformed) +
                " malformed fixtures give positioned errors"};
}

// ---------------------------------------------------------------- 8

struct Captured {
    int status;
    std::string out;
};

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Captured run_binary(const std::vector<std::string>& args, int workers) {
    std::string cmd = "cd " + shell_quote(kRoot.string()) + " && MB_THREADS=" + std::to_string(workers) + " " +
                      shell_quote(MB_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>/dev/null";
    Captured c{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return c;
    char buf[1 << 16];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) c.out.append(buf, n);
    int raw = pclose(pipe);
    c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return c;
}

Verdict determinism() {
    std::vector<GoldenCase> suite = kGoldenSuite;
    fs::path out = fs::temp_directory_path() / "mb_acceptance_report.json";
    suite.push_back({"demo-waiting-times-out", {"demo", "waiting-times", "--out", out.string()}, 0, nullptr});
    int invocations = 0, identical = 0;
    std::string first_bad;
    for (const GoldenCase& c : suite) {
        Captured ref = run_binary(c.args, 1);
        std::string ref_file = c.args.size() > 2 && c.args[c.args.size() - 2] == "--out" ? slurp(out) : "";
        bool same = ref.status == c.exit_status;
        for (int workers : {1, 2, 8}) {
            Captured again = run_binary(c.args, workers);
            same = same && again.status == ref.status && again.out == ref.out;
            if (!ref_file.empty()) same = same && slurp(out) == ref_file;
        }
        ++invocations;
        identical += same;
        if (!same && first_bad.empty()) first_bad = c.name;
    }
    return {identical == invocations, std::to_string(identical) + "/" + std::to_string(invocations) +
                                          " golden invocations byte-identical across repeated runs and 1, 2, 8 workers" +
                                          (first_bad.empty() ? "" : "; first mismatch: " + first_bad)};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {"Conjugacy reproduction", conjugacy},
        {"Data-reparametrization invariance", reparam_invariance},
        {"Wrong-Jacobian pathology", wrong_jacobian},
        {"Borel-Kolmogorov divergence", borel_kolmogorov},
        {"Conditional-density laws", conditional_laws},
        {"Version a.e.-equivalence", version_equivalence},
        {"DSL integrity", dsl_integrity},
        {"Determinism", determinism},
    };
    int failures = 0;
    int n = 0;
    for (const Criterion& c : criteria) {
        ++n;
        Verdict v{false, ""};
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("[%s] %d. %s: %s\n", v.pass ? "PASS" : "FAIL", n, c.name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
