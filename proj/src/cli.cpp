#include "mb/cli.hpp"

#include "mb/bayes.hpp"
#include "mb/borel_kolmogorov.hpp"
#include "mb/corpus.hpp"
#include "mb/distributions.hpp"
#include "mb/error.hpp"
#include "mb/model_dsl.hpp"
#include "mb/parallel.hpp"
#include "mb/reparam.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace mb::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Compact JSON with %.17g numbers and null for non-finite values.
class Json {
public:
    Json& begin_object() { return open('{'); }
    Json& end_object() { return close('}'); }
    Json& begin_array() { return open('['); }
    Json& end_array() { return close(']'); }

    Json& key(const std::string& k) {
        comma();
        quote(k);
        s_ += ':';
        after_key_ = true;
        return *this;
    }

    Json& num(double v) {
        comma();
        s_ += std::isfinite(v) ? fmt(v) : "null";
        return *this;
    }

    Json& integer(long long v) {
        comma();
        s_ += std::to_string(v);
        return *this;
    }

    Json& str(const std::string& v) {
        comma();
        quote(v);
        return *this;
    }

    Json& boolean(bool v) {
        comma();
        s_ += v ? "true" : "false";
        return *this;
    }

    Json& nums(const std::vector<double>& v) {
        begin_array();
        for (double x : v) num(x);
        return end_array();
    }

    Json& strs(const std::vector<std::string>& v) {
        begin_array();
        for (const auto& x : v) str(x);
        return end_array();
    }

    Json& field(const std::string& k, double v) { return key(k).num(v); }
    Json& field(const std::string& k, const std::string& v) { return key(k).str(v); }
    Json& field(const std::string& k, const char* v) { return key(k).str(v); }
    Json& field(const std::string& k, bool v) { return key(k).boolean(v); }
    Json& field_int(const std::string& k, long long v) { return key(k).integer(v); }

    std::string text() const { return s_ + "\n"; }

private:
    Json& open(char c) {
        comma();
        s_ += c;
        first_.push_back(true);
        return *this;
    }

    Json& close(char c) {
        first_.pop_back();
        s_ += c;
        return *this;
    }

    void comma() {
        if (after_key_) {
            after_key_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) s_ += ',';
            first_.back() = false;
        }
    }

    void quote(const std::string& v) {
        s_ += '"';
        for (char c : v) {
            switch (c) {
            case '"': s_ += "\\\""; break;
            case '\\': s_ += "\\\\"; break;
            case '\n': s_ += "\\n"; break;
            case '\t': s_ += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    s_ += buf;
                } else {
                    s_ += c;
                }
            }
        }
        s_ += '"';
    }

    std::string s_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

    void row(const std::vector<double>& v) {
        std::vector<std::string> cells;
        for (double x : v) cells.push_back(std::isnan(x) ? "nan" : std::isinf(x) ? (x < 0 ? "-inf" : "inf") : fmt(x));
        row_strings(cells);
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            s_ += (i ? "," : "") + cells[i];
        }
        s_ += '\n';
    }

    const std::string& text() const { return s_; }

private:
    std::string s_;
};

struct RunConfig {
    std::optional<std::size_t> grid;
    std::optional<double> truncate;
    std::optional<double> tolerance;
    std::string out_path;
    std::string format = "json";
};

struct Output {
    std::string json;
    std::string csv;
    std::string summary;
    int status = exit_code::ok;
};

// Failures that map straight to an exit status.
struct Exit {
    int status;
    std::string message;
};

GridSpec grid_spec(const RunConfig& cfg, std::size_t nodes, double truncation) {
    GridSpec g;
    g.nodes = cfg.grid.value_or(nodes);
    g.truncation = cfg.truncate.value_or(truncation);
    return g;
}

// ---------------------------------------------------------------- posterior artifacts

void posterior_json(Json& j, const std::vector<std::string>& params, const std::vector<std::string>& data_names,
                    const Point& y, const PosteriorResult& r) {
    j.key("params").strs(params);
    j.key("data").begin_object();
    for (std::size_t k = 0; k < data_names.size(); ++k) {
        j.field(data_names[k], y[k]);
    }
    j.end_object();
    j.key("grid").begin_array();
    Point p(r.grid.dim());
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        r.grid.node(i, p);
        j.nums(p);
    }
    j.end_array();
    j.key("log_density").nums(r.log_density);
    j.field("log_marginal_likelihood", r.log_marginal_likelihood);
    j.key("map").nums(r.map_point);
    j.key("map_refined").nums(r.map_refined);
}

std::string posterior_csv(const std::vector<std::string>& params, const PosteriorResult& r) {
    std::vector<std::string> header = params;
    header.push_back("log_density");
    Csv csv(header);
    Point p(r.grid.dim());
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        r.grid.node(i, p);
        std::vector<double> row(p.begin(), p.end());
        row.push_back(r.log_density[i]);
        csv.row(row);
    }
    return csv.text();
}

std::string join_point(const Point& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += (i ? ", " : "") + fmt(p[i]);
    }
    return s + "]";
}

// ---------------------------------------------------------------- demos

Output demo_waiting_times(const RunConfig& cfg, double y) {
    if (!(y > 0)) {
        throw Exit{exit_code::usage, "--y must be positive for waiting-times"};
    }
    GridSpec g = grid_spec(cfg, 4096, 30);
    PosteriorResult r = posterior(corpus::gamma_exponential(), Point{y}, g);
    double oracle = std::log(8.0) - 3 * std::log(y + 2);
    double sup_err = 0;
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        double t = r.grid.node(i)[0];
        double exact = std::exp(dist::log_gamma_pdf(t, 3, 2 + y));
        sup_err = std::max(sup_err, std::abs(std::exp(r.log_density[i]) - exact));
    }
    double tol = cfg.tolerance.value_or(1e-5);
    bool ok = std::abs(r.log_marginal_likelihood - oracle) <= tol;

    Json j;
    j.begin_object();
    posterior_json(j, {"theta"}, {"y"}, Point{y}, r);
    j.field("log_marginal_oracle", oracle);
    j.field("map_oracle", 2 / (2 + y));
    j.field("posterior_sup_error", sup_err);
    j.field("tolerance", tol);
    j.field("passed", ok);
    j.end_object();
    return {j.text(), posterior_csv({"theta"}, r),
            "waiting-times: log_marginal_likelihood = " + fmt(r.log_marginal_likelihood) + " (closed form " +
                fmt(oracle) + "), map = " + fmt(r.map_refined[0]),
            ok ? exit_code::ok : exit_code::failure};
}

Output demo_reparam(const RunConfig& cfg, double y) {
    if (!(y > 0)) {
        throw Exit{exit_code::usage, "--y must be positive for reparam"};
    }
    GridSpec g = grid_spec(cfg, 4096, 30);
    double tol = cfg.tolerance.value_or(1e-6);
    BayesModel m = corpus::gamma_exponential();
    Json j;
    j.begin_object();
    j.field("model", "gamma(2, 2) prior, exponential likelihood");
    j.field("y_obs", y);
    j.field("tolerance", tol);
    j.key("reports").begin_array();
    Csv csv({"transform", "x_obs", "posterior_supdiff", "map_index_y", "map_index_x", "log_marginal_shift",
             "expected_shift", "jacobian_at_obs"});
    bool all = true;
    std::string summary = "reparam:";
    for (const Transform& t : transforms::registry()) {
        InvarianceReport r = posterior_invariance_report(m, t, y, g);
        bool ok = r.posterior_supdiff <= tol && r.map_index_x == r.map_index_y &&
                  std::abs(r.log_marginal_shift - r.expected_shift) <= tol;
        all = all && ok;
        j.begin_object();
        j.field("transform", r.transform);
        j.field("x_obs", r.x_obs);
        j.field("posterior_supdiff", r.posterior_supdiff);
        j.field_int("map_index_y", (long long)r.map_index_y);
        j.field_int("map_index_x", (long long)r.map_index_x);
        j.key("map_y").nums(r.map_y);
        j.key("map_x").nums(r.map_x);
        j.field("log_marginal_y", r.log_marginal_y);
        j.field("log_marginal_x", r.log_marginal_x);
        j.field("log_marginal_shift", r.log_marginal_shift);
        j.field("expected_shift", r.expected_shift);
        j.field("jacobian_at_obs", r.jacobian_at_obs);
        j.field("invariant", ok);
        j.end_object();
        csv.row_strings({r.transform, fmt(r.x_obs), fmt(r.posterior_supdiff), std::to_string(r.map_index_y),
                         std::to_string(r.map_index_x), fmt(r.log_marginal_shift), fmt(r.expected_shift),
                         fmt(r.jacobian_at_obs)});
        summary += " " + r.transform + (ok ? " invariant" : " NOT invariant") + " (supdiff " +
                   fmt(r.posterior_supdiff) + ");";
    }
    j.end_array();
    j.field("passed", all);
    j.end_object();
    return {j.text(), csv.text(), summary, all ? exit_code::ok : exit_code::failure};
}

Density normal_prior_on(BaseMeasure space) {
    return Density::from_log(std::move(space), [](PointView m) { return dist::log_normal_pdf(m[0], 0, 10); });
}

ForwardModel identity_forward() { return additive_normal([](double m) { return m; }, 1.0, "m + Normal(0, 1)"); }

void acausality_json(Json& j, const AcausalityReport& r, bool with_grids) {
    j.field("transform", r.transform);
    j.field("label", r.label);
    j.field("y_obs", r.y_obs);
    j.field("x_obs", r.x_obs);
    j.key("map_correct").nums(r.map_correct);
    j.key("map_wrong").nums(r.map_wrong);
    j.field("map_difference", r.map_difference);
    j.field("grid_step", r.grid_step);
    j.field("map_difference_in_steps", r.map_difference / r.grid_step);
    j.field("posterior_supdiff", r.posterior_supdiff);
    j.field("log_marginal_shift", r.log_marginal_shift);
    j.field("jacobian_at_obs", r.jacobian_at_obs);
    if (with_grids) {
        std::vector<double> nodes;
        for (const Point& p : r.correct.nodes) nodes.push_back(p[0]);
        j.key("grid").nums(nodes);
        j.key("posterior_correct").nums(r.correct.density);
        j.key("posterior_wrong").nums(r.wrong.density);
    }
}

Output demo_wrong_jacobian(const RunConfig& cfg, double y) {
    GridSpec g = grid_spec(cfg, 4096, 30);
    Transform t = transforms::cube();
    AcausalityReport r = acausality_demo(identity_forward(), normal_prior_on(BaseMeasure::lebesgue(-kInf, kInf)), t,
                                         y, g);
    double shrinkage = y * 100.0 / 101.0;
    bool correct_ok = std::abs(r.map_correct[0] - shrinkage) <= r.grid_step;
    bool fired = r.map_difference > 10 * r.grid_step;

    Json j;
    j.begin_object();
    j.field("forward_model", "y = m + Normal(0, 1), m ~ Normal(0, 10)");
    acausality_json(j, r, true);
    j.field("shrinkage_oracle", shrinkage);
    j.field("correct_matches_oracle", correct_ok);
    j.field("pathology", fired);
    j.end_object();

    Csv csv({"m", "posterior_correct", "posterior_wrong"});
    for (std::size_t i = 0; i < r.correct.nodes.size(); ++i) {
        csv.row({r.correct.nodes[i][0], r.correct.density[i], r.wrong.density[i]});
    }
    std::string summary = "wrong-jacobian (" + std::string(kErroneousLabel) + "): map_correct = " +
                          fmt(r.map_correct[0]) + ", map_wrong = " + fmt(r.map_wrong[0]) + ", shift = " +
                          fmt(r.map_difference / r.grid_step) + " grid steps";
    return {j.text(), csv.text(), summary, fired && correct_ok ? exit_code::pathology : exit_code::failure};
}

Output demo_acausality(const RunConfig& cfg, double y) {
    GridSpec g = grid_spec(cfg, 4096, 30);
    Json j;
    j.begin_object();
    j.field("forward_model", "y = m + Normal(0, 1), m ~ Normal(0, 10)");
    j.field("y_obs", y);
    j.field("label", kErroneousLabel);
    j.key("reports").begin_array();
    Csv csv({"transform", "param_space", "map_correct", "map_wrong", "map_difference_in_steps", "posterior_supdiff",
             "log_marginal_shift", "jacobian_at_obs"});
    std::string summary = "acausality:";
    for (const Transform& t : transforms::registry()) {
        // log and reciprocal need g(m) = m inside (0, inf).
        bool positive = t.domain.lo == 0;
        if (positive && !(y > 0)) {
            throw Exit{exit_code::usage, "--y must be positive for the " + t.name + " transform"};
        }
        BaseMeasure space = positive ? BaseMeasure::lebesgue(0, kInf) : BaseMeasure::lebesgue(-kInf, kInf);
        AcausalityReport r = acausality_demo(identity_forward(), normal_prior_on(space), t, y, g);
        j.begin_object();
        j.field("param_space", positive ? "(0, inf)" : "(-inf, inf)");
        acausality_json(j, r, false);
        j.end_object();
        csv.row_strings({r.transform, positive ? "positive" : "real", fmt(r.map_correct[0]), fmt(r.map_wrong[0]),
                         fmt(r.map_difference / r.grid_step), fmt(r.posterior_supdiff), fmt(r.log_marginal_shift),
                         fmt(r.jacobian_at_obs)});
        summary += " " + r.transform + " shifts the erroneous MAP by " + fmt(r.map_difference / r.grid_step) +
                   " steps;";
    }
    j.end_array();
    j.end_object();
    return {j.text(), csv.text(), summary, exit_code::ok};
}

void diagonal_json(Json& j, const DiagonalDensity& d) {
    j.begin_object();
    j.field("mean", d.mean);
    j.key("grid").nums(d.grid);
    j.key("density").nums(d.values);
    j.end_object();
}

void family_json(Json& j, const FamilyConvergence& f) {
    j.begin_object();
    j.field("limit", to_string(f.limit));
    std::vector<double> eps, prob;
    for (const auto& s : f.steps) {
        eps.push_back(s.eps);
        prob.push_back(s.event_probability);
    }
    j.key("eps").nums(eps);
    j.key("event_probability").nums(prob);
    j.key("distances").nums(f.distances);
    j.field("monotone", f.monotone);
    j.end_object();
}

Output demo_borel_kolmogorov(const RunConfig& cfg) {
    GridSpec g = grid_spec(cfg, 1024, 30);
    ParadoxReport r = paradox_report(exponential_diagonal_problem(), g);
    Json j;
    j.begin_object();
    j.field("joint", "Exp(1) x Exp(1)");
    j.key("difference");
    diagonal_json(j, r.difference);
    j.key("ratio");
    diagonal_json(j, r.ratio);
    j.field("supdiff", r.supdiff);
    j.key("probes").nums(r.probes);
    j.key("band");
    family_json(j, r.band);
    j.key("wedge");
    family_json(j, r.wedge);
    j.field("verdict", r.verdict);
    j.end_object();

    Csv csv({"v", "difference", "ratio"});
    for (std::size_t i = 0; i < r.difference.grid.size(); ++i) {
        csv.row({r.difference.grid[i], r.difference.values[i], r.ratio.values[i]});
    }
    bool fired = r.supdiff >= 0.1 && r.band.monotone && r.wedge.monotone;
    return {j.text(), csv.text(),
            "borel-kolmogorov: " + r.verdict + "; supdiff = " + fmt(r.supdiff),
            fired ? exit_code::pathology : exit_code::failure};
}

Output demo_bayes_factor_sigma(const RunConfig& cfg, double y) {
    GridSpec g = grid_spec(cfg, 8192, 100);
    double tol = cfg.tolerance.value_or(1e-6);
    const double sigmas[2] = {1.0, 2.0};
    double lm[2], oracle[2];
    for (int k = 0; k < 2; ++k) {
        lm[k] = log_marginal_likelihood(corpus::fixed_sigma(sigmas[k]), Point{y}, g);
        oracle[k] = dist::log_normal_pdf(y, 0, std::sqrt(100 + sigmas[k] * sigmas[k]));
    }
    double lbf = lm[0] - lm[1];
    double lbf_oracle = oracle[0] - oracle[1];
    bool ok = std::abs(std::exp(lbf) - std::exp(lbf_oracle)) <= tol;

    Json j;
    j.begin_object();
    j.field("prior", "m ~ Normal(0, 10)");
    j.field("y_obs", y);
    j.key("models").begin_array();
    Csv csv({"sigma", "log_marginal_likelihood", "log_marginal_oracle"});
    for (int k = 0; k < 2; ++k) {
        j.begin_object();
        j.field("sigma", sigmas[k]);
        j.field("log_marginal_likelihood", lm[k]);
        j.field("log_marginal_oracle", oracle[k]);
        j.end_object();
        csv.row({sigmas[k], lm[k], oracle[k]});
    }
    j.end_array();
    j.field("log_bayes_factor", lbf);
    j.field("bayes_factor", std::exp(lbf));
    j.field("bayes_factor_oracle", std::exp(lbf_oracle));
    j.field("tolerance", tol);
    j.field("passed", ok);
    j.end_object();
    return {j.text(), csv.text(),
            "bayes-factor-sigma: B(sigma=1 : sigma=2) = " + fmt(std::exp(lbf)) + " (closed form " +
                fmt(std::exp(lbf_oracle)) + ")",
            ok ? exit_code::ok : exit_code::failure};
}

// ---------------------------------------------------------------- model files

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Exit{exit_code::no_input, "cannot read " + path};
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dsl::ModelGraph parse_file(const std::string& path) {
    std::string src = read_file(path);
    try {
        return dsl::parse(src);
    } catch (const ParseError& e) {
        throw Exit{exit_code::data_error, path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                                              ": " + e.what()};
    }
}

std::vector<std::pair<std::string, double>> parse_bindings(const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, double>> out;
    for (const std::string& b : raw) {
        auto eq = b.find('=');
        double v = 0;
        const char* first = eq == std::string::npos ? nullptr : b.data() + eq + 1;
        const char* last = b.data() + b.size();
        auto res = first ? std::from_chars(first, last, v) : std::from_chars_result{nullptr, std::errc::invalid_argument};
        if (eq == 0 || !first || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
            throw Exit{exit_code::data_error, "malformed binding '" + b + "', expected NAME=VALUE"};
        }
        out.emplace_back(b.substr(0, eq), v);
    }
    return out;
}

std::size_t auto_nodes(std::size_t continuous_axes) {
    switch (continuous_axes) {
    case 0:
    case 1: return 4096;
    case 2: return 256;
    case 3: return 64;
    default: return 32;
    }
}

Output cmd_run(const RunConfig& cfg, const std::string& path, const std::vector<std::string>& raw_bindings) {
    dsl::ModelGraph graph = parse_file(path);
    auto bindings = parse_bindings(raw_bindings);
    dsl::CompiledModel cm = dsl::compile_joint(graph);
    if (cm.data_names.empty()) {
        throw Error(ErrorKind::NoNodes, "the model declares no data nodes");
    }
    Point y = dsl::bind_data(cm, bindings);
    std::size_t axes = 0;
    for (const BaseMeasure& f : cm.param_space.factors()) {
        axes += f.kind() == MeasureKind::LebesgueBox ? f.dim() : 0;
    }
    GridSpec g = grid_spec(cfg, auto_nodes(axes), 30);
    PosteriorResult r = posterior(cm.model(), y, g);
    Json j;
    j.begin_object();
    posterior_json(j, cm.param_names, cm.data_names, y, r);
    j.end_object();
    return {j.text(), posterior_csv(cm.param_names, r),
            "run: log_marginal_likelihood = " + fmt(r.log_marginal_likelihood) + ", map = " + join_point(r.map_point),
            exit_code::ok};
}

void write_meta(const std::string& path, const std::vector<std::string>& args, const RunConfig& cfg) {
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    Json j;
    j.begin_object();
    j.key("command").strs(args);
    j.field("created", stamp);
    j.field_int("workers", max_workers());
    j.field("format", cfg.format);
    j.end_object();
    std::ofstream meta(path + ".meta.json", std::ios::binary);
    meta << j.text();
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--grid", cfg.grid, "quadrature nodes per continuous axis (>= 16)");
    sub->add_option("--truncate", cfg.truncate, "bound replacing infinite ends of an axis");
    sub->add_option("--tolerance", cfg.tolerance, "tolerance for the demo's own checks");
    sub->add_option("--out", cfg.out_path, "write the report here instead of standard output");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void validate(const RunConfig& cfg) {
    if (cfg.grid && *cfg.grid < 16) {
        throw Exit{exit_code::usage, "--grid must be at least 16"};
    }
    if (cfg.truncate && !(*cfg.truncate > 0 && std::isfinite(*cfg.truncate))) {
        throw Exit{exit_code::usage, "--truncate must be positive and finite"};
    }
    if (cfg.tolerance && !(*cfg.tolerance > 0)) {
        throw Exit{exit_code::usage, "--tolerance must be positive"};
    }
}

int status_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::Syntax:
    case ErrorKind::UnknownDistribution:
    case ErrorKind::UndefinedReference:
    case ErrorKind::DuplicateName:
    case ErrorKind::CycleDetected:
    case ErrorKind::InvalidReference:
    case ErrorKind::NoNodes:
    case ErrorKind::UnboundData:
    case ErrorKind::InvalidScale: return exit_code::data_error;
    default: return exit_code::failure;
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Densities, conditioning and Bayes' theorem on deterministic grids"};
    app.name("mb");
    app.require_subcommand(1);

    RunConfig cfg;
    std::string demo_name;
    double y = std::numeric_limits<double>::quiet_NaN();
    std::string model_path;
    std::vector<std::string> bindings;

    CLI::App* demo = app.add_subcommand("demo", "run a named demonstration");
    demo->add_option("name", demo_name,
                     "waiting-times | reparam | wrong-jacobian | borel-kolmogorov | acausality | bayes-factor-sigma")
        ->required();
    demo->add_option("--y", y, "observed value");
    add_common(demo, cfg);

    CLI::App* run = app.add_subcommand("run", "grid posterior of a model file");
    run->add_option("model", model_path, "model source (.bmod)")->required();
    run->add_option("--data", bindings, "NAME=VALUE, once per data node");
    add_common(run, cfg);

    CLI::App* check = app.add_subcommand("check", "parse, validate and print the canonical form");
    check->add_option("model", model_path, "model source (.bmod)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "mb: " << e.what() << "\n" << "run 'mb --help' for usage\n";
        return exit_code::usage;
    }

    try {
        validate(cfg);
        if (check->parsed()) {
            out << dsl::print_canonical(parse_file(model_path));
            return exit_code::ok;
        }
        Output o;
        if (run->parsed()) {
            o = cmd_run(cfg, model_path, bindings);
        } else {
            auto y_or = [&](double d) { return std::isnan(y) ? d : y; };
            if (demo_name == "waiting-times") {
                o = demo_waiting_times(cfg, y_or(1.0));
            } else if (demo_name == "reparam") {
                o = demo_reparam(cfg, y_or(1.0));
            } else if (demo_name == "wrong-jacobian") {
                o = demo_wrong_jacobian(cfg, y_or(2.0));
            } else if (demo_name == "borel-kolmogorov") {
                o = demo_borel_kolmogorov(cfg);
            } else if (demo_name == "acausality") {
                o = demo_acausality(cfg, y_or(2.0));
            } else if (demo_name == "bayes-factor-sigma") {
                o = demo_bayes_factor_sigma(cfg, y_or(3.0));
            } else {
                throw Exit{exit_code::usage, "unknown demo '" + demo_name + "'"};
            }
        }
        const std::string& payload = cfg.format == "csv" ? o.csv : o.json;
        if (cfg.out_path.empty()) {
            out << payload;
        } else {
            std::ofstream f(cfg.out_path, std::ios::binary);
            if (!(f << payload) || !f.flush()) {
                throw Exit{exit_code::cant_create, "cannot write " + cfg.out_path};
            }
            write_meta(cfg.out_path, args, cfg);
            out << o.summary << "\n";
        }
        return o.status;
    } catch (const Exit& e) {
        err << "mb: " << e.message << "\n";
        return e.status;
    } catch (const Error& e) {
        err << "mb: " << e.what() << "\n";
        return status_for(e.kind());
    } catch (const std::exception& e) {
        err << "mb: internal error: " << e.what() << "\n";
        return exit_code::failure;
    }
}

} // namespace mb::cli
