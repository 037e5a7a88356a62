#include "doctest.h"

#include "golden_suite.hpp"
#include "mb/cli.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using mb::cli::run_cli;
using nlohmann::json;
namespace fs = std::filesystem;
namespace ec = mb::cli::exit_code;

namespace {

const fs::path kRoot = MB_SOURCE_DIR;

struct Result {
    int status;
    std::string out;
    std::string err;
};

// Relative model paths are resolved against the source tree.
Result cli(std::vector<std::string> args) {
    for (auto& a : args) {
        if (a.rfind("models/", 0) == 0 || a.rfind("tests/", 0) == 0) {
            a = (kRoot / a).string();
        }
    }
    std::ostringstream out, err;
    int status = run_cli(args, out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "mb_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

double as_double(const json& v) { return v.is_null() ? -INFINITY : v.get<double>(); }

} // namespace

TEST_CASE("golden outputs") {
    for (const GoldenCase& c : kGoldenSuite) {
        CAPTURE(c.name);
        Result r = cli(c.args);
        CHECK(r.status == c.exit_status);
        if (c.golden) {
            CHECK(r.out == slurp(kRoot / "tests" / "golden" / c.golden));
        }
    }
}

TEST_CASE("demo waiting-times") {
    Result r = cli({"demo", "waiting-times", "--y", "1"});
    REQUIRE(r.status == ec::ok);
    json j = json::parse(r.out);
    CHECK(std::abs(j["log_marginal_likelihood"].get<double>() - std::log(8.0 / 27.0)) <= 1e-5);
    CHECK(std::abs(j["map_refined"][0].get<double>() - 2.0 / 3.0) <= 1e-4);
    CHECK(j["params"] == json::array({"theta"}));

    SUBCASE("the same artifact comes out of the model file") {
        Result m = cli({"run", "models/waiting_times.bmod", "--data", "y=1"});
        REQUIRE(m.status == ec::ok);
        json k = json::parse(m.out);
        CHECK(k["params"] == j["params"]);
        CHECK(k["data"] == j["data"]);
        CHECK(std::abs(k["log_marginal_likelihood"].get<double>() - j["log_marginal_likelihood"].get<double>()) <=
              1e-6);
        REQUIRE(k["grid"].size() == j["grid"].size());
        for (std::size_t i = 0; i < j["grid"].size(); ++i) {
            CHECK(k["grid"][i][0].get<double>() == j["grid"][i][0].get<double>());
            double a = as_double(j["log_density"][i]), b = as_double(k["log_density"][i]);
            CHECK(std::abs(std::exp(a) - std::exp(b)) <= 1e-6);
        }
        CHECK(std::abs(k["map"][0].get<double>() - j["map"][0].get<double>()) <= 1e-6);
    }
    SUBCASE("nonpositive observation is a usage error") {
        CHECK(cli({"demo", "waiting-times", "--y", "0"}).status == ec::usage);
    }
}

TEST_CASE("pathology demos exit 2") {
    SUBCASE("borel-kolmogorov") {
        Result r = cli({"demo", "borel-kolmogorov"});
        CHECK(r.status == ec::pathology);
        json j = json::parse(r.out);
        CHECK(j["supdiff"].get<double>() >= 0.1);
        CHECK(std::abs(j["difference"]["mean"].get<double>() - 0.5) <= 1e-3);
        CHECK(std::abs(j["ratio"]["mean"].get<double>() - 1.0) <= 1e-3);
        CHECK(j["difference"]["grid"].size() == j["difference"]["density"].size());
    }
    SUBCASE("wrong-jacobian") {
        Result r = cli({"demo", "wrong-jacobian"});
        CHECK(r.status == ec::pathology);
        json j = json::parse(r.out);
        CHECK(j["label"] == "erroneous-by-construction");
        double step = j["grid_step"].get<double>();
        CHECK(std::abs(j["map_correct"][0].get<double>() - 2 * 100.0 / 101.0) <= step);
        CHECK(j["map_difference"].get<double>() > 10 * step);
        CHECK(j["jacobian_at_obs"].get<double>() == 12.0);
        for (const char* key : {"posterior_supdiff", "log_marginal_shift"}) {
            CHECK(j.contains(key));
        }
    }
    SUBCASE("a grid too coarse to show the shift is a failure, not a pathology") {
        CHECK(cli({"demo", "wrong-jacobian", "--grid", "16", "--truncate", "3"}).status == ec::failure);
    }
}

TEST_CASE("other demos") {
    SUBCASE("reparam") {
        json j = json::parse(cli({"demo", "reparam"}).out);
        CHECK(j["reports"].size() == 4);
        for (const auto& r : j["reports"]) {
            CHECK(r["posterior_supdiff"].get<double>() <= 1e-6);
            CHECK(r["map_index_y"] == r["map_index_x"]);
            CHECK(std::abs(r["log_marginal_shift"].get<double>() - r["expected_shift"].get<double>()) <= 1e-6);
        }
    }
    SUBCASE("acausality lists every transform") {
        json j = json::parse(cli({"demo", "acausality"}).out);
        std::set<std::string> names;
        for (const auto& r : j["reports"]) {
            names.insert(r["transform"].get<std::string>());
            double steps = r["map_difference_in_steps"].get<double>();
            if (r["transform"] == "affine(2, 1)") {
                CHECK(steps == 0);
            } else {
                CHECK(steps > 10);
            }
        }
        CHECK(names == std::set<std::string>{"cube", "log", "reciprocal", "affine(2, 1)"});
    }
    SUBCASE("bayes-factor-sigma") {
        json j = json::parse(cli({"demo", "bayes-factor-sigma", "--y", "3"}).out);
        double oracle = std::exp(-4.5 / 101 - 0.5 * std::log(101.0) + 4.5 / 104 + 0.5 * std::log(104.0));
        CHECK(std::abs(j["bayes_factor"].get<double>() - oracle) <= 1e-6);
    }
}

TEST_CASE("run") {
    SUBCASE("hierarchical model gives a normalized three-dimensional posterior") {
        Result r = cli({"run", "models/fig2_acausality.bmod", "--data", "y=0.7"});
        REQUIRE(r.status == ec::ok);
        json j = json::parse(r.out);
        CHECK(j["params"] == json::array({"delta", "m", "lambda"}));
        REQUIRE(j["grid"].size() == 64u * 64u * 64u);
        // Midpoint cells of the three supports.
        double cell = (5.0 / 64) * (3.5 / 64) * (4.8 / 64);
        double mass = 0;
        for (const auto& v : j["log_density"]) {
            mass += std::exp(as_double(v)) * cell;
        }
        CHECK(std::abs(mass - 1) <= 1e-3);
        CHECK(j["map"].size() == 3);
    }
    SUBCASE("csv has a header and one row per node") {
        Result r = cli({"run", "models/fig1_left.bmod", "--data", "d1=1", "--data", "d2=2", "--grid", "32",
                        "--format", "csv"});
        REQUIRE(r.status == ec::ok);
        CHECK(r.out.rfind("v1,v2,log_density\n", 0) == 0);
        CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 32 * 32);
    }
    SUBCASE("missing binding names the node") {
        Result r = cli({"run", "models/fig1_right.bmod", "--data", "d1=1"});
        CHECK(r.status == ec::data_error);
        CHECK(r.err.find("'d2'") != std::string::npos);
    }
    SUBCASE("unknown and malformed bindings") {
        CHECK(cli({"run", "models/waiting_times.bmod", "--data", "y=1", "--data", "z=2"}).status == ec::data_error);
        CHECK(cli({"run", "models/waiting_times.bmod", "--data", "y"}).status == ec::data_error);
        CHECK(cli({"run", "models/waiting_times.bmod", "--data", "y=abc"}).status == ec::data_error);
    }
    SUBCASE("data impossible under the model") {
        Result r = cli({"run", "tests/fixtures/models/impossible.bmod", "--data", "k=2.5"});
        CHECK(r.status == ec::failure);
        CHECK(r.err.find("DataImpossibleUnderModel") != std::string::npos);
    }
    SUBCASE("invalid scale at a grid node") {
        Result r = cli({"run", "tests/fixtures/models/free_scale.bmod", "--data", "y=0.5"});
        CHECK(r.status == ec::data_error);
        CHECK(r.err.find("InvalidScale") != std::string::npos);
    }
    SUBCASE("parse errors carry the file position") {
        Result r = cli({"run", "tests/fixtures/malformed/undefined_reference.bmod", "--data", "y=1"});
        CHECK(r.status == ec::data_error);
        CHECK(r.err.find("undefined_reference.bmod:2:18") != std::string::npos);
    }
    SUBCASE("missing file") {
        CHECK(cli({"run", "models/no_such_model.bmod", "--data", "y=1"}).status == ec::no_input);
    }
}

TEST_CASE("check") {
    SUBCASE("cycle path is printed") {
        Result r = cli({"check", "tests/fixtures/malformed/cycle.bmod"});
        CHECK(r.status == ec::data_error);
        CHECK(r.err.find("a -> b -> c -> a") != std::string::npos);
    }
    SUBCASE("empty file") {
        Result r = cli({"check", "tests/fixtures/malformed/empty.bmod"});
        CHECK(r.status == ec::data_error);
        CHECK(r.err.find("no nodes") != std::string::npos);
    }
    SUBCASE("canonical output parses back to itself") {
        fs::path p = scratch("canonical.bmod");
        std::string once = cli({"check", "models/fig2_acausality.bmod"}).out;
        std::ofstream(p) << once;
        CHECK(cli({"check", p.string()}).out == once);
    }
}

TEST_CASE("usage errors") {
    CHECK(cli({}).status == ec::usage);
    CHECK(cli({"demo", "unknown"}).status == ec::usage);
    CHECK(cli({"demo"}).status == ec::usage);
    CHECK(cli({"frobnicate"}).status == ec::usage);
    CHECK(cli({"demo", "reparam", "--grid", "8"}).status == ec::usage);
    CHECK(cli({"demo", "reparam", "--grid", "many"}).status == ec::usage);
    CHECK(cli({"demo", "reparam", "--format", "xml"}).status == ec::usage);
    CHECK(cli({"demo", "reparam", "--tolerance", "0"}).status == ec::usage);
    CHECK(cli({"demo", "reparam", "--truncate", "-1"}).status == ec::usage);
    CHECK(cli({"run"}).status == ec::usage);
    Result help = cli({"--help"});
    CHECK(help.status == ec::ok);
    CHECK(help.out.find("demo") != std::string::npos);
}

TEST_CASE("--out writes the report and a metadata sidecar") {
    fs::path p = scratch("report.json");
    fs::remove(p);
    fs::remove(p.string() + ".meta.json");
    Result r = cli({"demo", "bayes-factor-sigma", "--out", p.string()});
    CHECK(r.status == ec::ok);
    CHECK(r.out.find("bayes-factor-sigma: ") == 0);
    CHECK(slurp(p) == slurp(kRoot / "tests" / "golden" / "demo_bayes_factor_sigma.json"));
    json meta = json::parse(slurp(p.string() + ".meta.json"));
    CHECK(meta.contains("created"));
    CHECK(meta["command"][0] == "demo");
    // Provenance stays out of the payload.
    CHECK(slurp(p).find("created") == std::string::npos);

    SUBCASE("unwritable destination") {
        Result bad = cli({"demo", "bayes-factor-sigma", "--out", "/nonexistent-dir/x/report.json"});
        CHECK(bad.status == ec::cant_create);
    }
}
