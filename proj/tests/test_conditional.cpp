#include "doctest.h"

#include "mb/conditional.hpp"
#include "mb/error.hpp"

#include "joint_corpus.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

using namespace mb;
using namespace joints;

namespace {

GridSpec grid_with(std::size_t nodes, double truncation = 30.0) {
    GridSpec g;
    g.nodes = nodes;
    g.truncation = truncation;
    return g;
}

std::vector<double> lattice(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        v.push_back(lo + (hi - lo) * (i + 0.5) / n);
    }
    return v;
}

double slice_mass(const ConditionalDensity& c, double y, const GridSpec& g) {
    Density s = c.slice(Point{y});
    return integrate(s.eval_function(), c.space_x(), g);
}

} // namespace

TEST_CASE("marginalize_y matches closed forms") {
    GridSpec g = grid_with(8192);
    SUBCASE("waiting times: 8/(y+2)^3") {
        Density m = marginalize_y(waiting_times(), g);
        CHECK(std::abs(m.eval(Point{0.0}) - 1.0) <= 1e-5);
        for (double y : {0.5, 1.0, 3.0}) {
            CHECK(std::abs(m.eval(Point{y}) - 8 / std::pow(y + 2, 3)) <= 1e-5);
        }
    }
    SUBCASE("independent") {
        Density m = marginalize_y(independent_exp(), g);
        CHECK(std::abs(m.eval(Point{1.0}) - std::exp(-1.0)) <= 1e-6);
    }
    SUBCASE("correlated: (1+y)e^-y/2") {
        Density m = marginalize_y(correlated_exp(), g);
        CHECK(std::abs(m.eval(Point{1.0}) - std::exp(-1.0)) <= 1e-5);
        CHECK(std::abs(m.eval(Point{2.5}) - 3.5 * std::exp(-2.5) / 2) <= 1e-5);
    }
    SUBCASE("gamma-poisson: negative binomial") {
        Density m = marginalize_y(gamma_poisson(), g);
        for (double k : {0.0, 1.0, 4.0, 10.0}) {
            CHECK(std::abs(m.eval(Point{k}) - gamma_poisson_marginal(k)) <= 1e-5);
        }
    }
    SUBCASE("repeated evaluation hits the cache and is bit-stable") {
        Density m = marginalize_y(waiting_times(), g);
        double a = m.log_eval(Point{0.7});
        double b = m.log_eval(Point{0.7});
        CHECK(a == b);
    }
}

TEST_CASE("marginalize_x integrates out y") {
    Density m = marginalize_x(discrete_table(), GridSpec{});
    CHECK(std::abs(m.eval(Point{0.0}) - 0.30) <= 1e-15);
    CHECK(std::abs(m.eval(Point{1.0}) - 0.35) <= 1e-15);
    CHECK(std::abs(m.eval(Point{2.0}) - 0.35) <= 1e-15);
}

TEST_CASE("condition_on_y slices") {
    GridSpec g = grid_with(8192);
    SUBCASE("waiting times at y=1 is (27/2) theta^2 e^(-3 theta)") {
        auto c = condition_on_y(waiting_times(), g);
        CHECK(std::abs(c.eval(Point{1.0}, Point{1.0}) - 13.5 * std::exp(-3.0)) <= 1e-5);
        for (double t : {0.1, 0.5, 2.0, 4.0}) {
            CHECK(std::abs(c.eval(Point{t}, Point{1.0}) - 13.5 * t * t * std::exp(-3 * t)) <= 1e-5);
        }
        CHECK(c.slice(Point{1.0}).normalized());
    }
    SUBCASE("independent slice is e^-x at any y") {
        auto c = condition_on_y(independent_exp(), g);
        for (double y : {0.0, 1.0, 7.5}) {
            for (double x : {0.0, 0.3, 2.0}) {
                CHECK(std::abs(c.eval(Point{x}, Point{y}) - std::exp(-x)) <= 1e-6);
            }
        }
    }
    SUBCASE("correlated slice at y=2 is (x+2)e^-x/3") {
        auto c = condition_on_y(correlated_exp(), g);
        CHECK(std::abs(c.eval(Point{0.0}, Point{2.0}) - 2.0 / 3.0) <= 1e-5);
        CHECK(std::abs(c.eval(Point{1.5}, Point{2.0}) - 3.5 * std::exp(-1.5) / 3) <= 1e-5);
    }
    SUBCASE("discrete Bayes on a table") {
        auto c = condition_on_y(discrete_table(), GridSpec{});
        double col = kTable[0][1] + kTable[1][1] + kTable[2][1];
        for (int x = 0; x < 3; ++x) {
            CHECK(std::abs(c.eval(Point{double(x)}, Point{1.0}) - kTable[x][1] / col) <= 1e-14);
        }
    }
}

TEST_CASE("condition_on_y falls back to the marginal of X on null y") {
    // X uniform on [0,1] independent of Y uniform on [0,1], declared over Y in [0,2].
    auto j = JointDensity::from_eval(BaseMeasure::lebesgue(0, 1), BaseMeasure::lebesgue(0, 2), [](PointView p) {
        return p[1] <= 1.0 ? 2.0 * p[0] : 0.0;
    });
    GridSpec g = grid_with(4096);
    auto c = condition_on_y(j, g);
    CHECK(std::abs(c.eval(Point{0.25}, Point{0.5}) - 0.5) <= 1e-6);
    // p_Y(1.5) = 0: the slice is p_X(x) = 2x.
    CHECK(std::abs(c.eval(Point{0.25}, Point{1.5}) - 0.5) <= 1e-6);
    CHECK(std::abs(c.eval(Point{0.75}, Point{1.5}) - 1.5) <= 1e-6);
    CHECK(std::abs(slice_mass(c, 1.5, g) - 1.0) <= 1e-6);
}

TEST_CASE("slices normalize on the probe lattice for every corpus joint") {
    GridSpec g = grid_with(8192);
    for (const char* name : {"waiting", "independent", "correlated"}) {
        CAPTURE(name);
        JointDensity j = std::string(name) == "waiting"       ? waiting_times()
                         : std::string(name) == "independent" ? independent_exp()
                                                              : correlated_exp();
        auto c = condition_on_y(j, g);
        for (double y : lattice(0.0, 10.0, 64)) {
            CAPTURE(y);
            CHECK(std::abs(slice_mass(c, y, g) - 1.0) <= 1e-5);
        }
    }
    auto c = condition_on_y(gamma_poisson(), g);
    for (int k = 0; k <= 60; ++k) {
        CAPTURE(k);
        CHECK(std::abs(slice_mass(c, k, g) - 1.0) <= 1e-5);
    }
    auto d = condition_on_y(discrete_table(), g);
    CHECK(std::abs(slice_mass(d, 0, g) - 1.0) <= 1e-14);
    CHECK(std::abs(slice_mass(d, 1, g) - 1.0) <= 1e-14);
}

TEST_CASE("law of total probability reconstructs p_X") {
    SUBCASE("waiting times, against the truncated Gamma(2,2) marginal") {
        // With y cut at B, the joint integrates over y to 4 t e^{-2t} (1 - e^{-B t}).
        GridSpec g = grid_with(8192, 200.0);
        auto j = waiting_times();
        auto c = condition_on_y(j, g);
        Density my = marginalize_y(j, g);
        for (double t : lattice(0.05, 8.0, 16)) {
            CAPTURE(t);
            double oracle = 4 * t * std::exp(-2 * t) * (1 - std::exp(-200.0 * t));
            CHECK(std::abs(total_probability(c, my, Point{t}, g) - oracle) <= 1e-4);
        }
    }
    SUBCASE("correlated: p_X(x) = (1+x)e^-x/2") {
        GridSpec g = grid_with(4096);
        auto j = correlated_exp();
        auto c = condition_on_y(j, g);
        Density my = marginalize_y(j, g);
        for (double x : lattice(0.0, 8.0, 16)) {
            CHECK(std::abs(total_probability(c, my, Point{x}, g) - (1 + x) * std::exp(-x) / 2) <= 1e-4);
        }
    }
    SUBCASE("continuous x counting: Gamma(2,2) prior is recovered") {
        GridSpec g = grid_with(8192);
        auto j = gamma_poisson();
        auto c = condition_on_y(j, g);
        Density my = marginalize_y(j, g);
        for (double t : lattice(0.05, 8.0, 16)) {
            CAPTURE(t);
            CHECK(std::abs(total_probability(c, my, Point{t}, g) - 4 * t * std::exp(-2 * t)) <= 1e-4);
        }
    }
    SUBCASE("discrete table") {
        auto j = discrete_table();
        auto c = condition_on_y(j, GridSpec{});
        Density my = marginalize_y(j, GridSpec{});
        CHECK(std::abs(total_probability(c, my, Point{1.0}, GridSpec{}) - 0.35) <= 1e-14);
    }
}

TEST_CASE("tweak_version") {
    GridSpec g = grid_with(4096);
    auto c = condition_on_y(waiting_times(), g);
    auto unit_exp = Density::from_log(BaseMeasure::lebesgue(0, kInf), [](PointView p) { return -p[0]; }, true);

    SUBCASE("replaces exactly one slice") {
        auto t = tweak_version(c, Point{42.0}, unit_exp);
        CHECK(t.eval(Point{0.5}, Point{42.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
        CHECK(t.eval(Point{0.5}, Point{1.0}) == c.eval(Point{0.5}, Point{1.0}));
        CHECK(t.eval(Point{0.5}, Point{42.000001}) == c.eval(Point{0.5}, Point{42.000001}));
        CHECK(t.tweaks().size() == 1);
    }
    SUBCASE("tweaking back with the original slice restores the family") {
        auto t = tweak_version(c, Point{42.0}, unit_exp);
        auto back = tweak_version(t, Point{42.0}, c.slice(Point{42.0}));
        CHECK(back.tweaks().size() == 1);
        for (double th : {0.1, 1.0, 3.0}) {
            CHECK(back.eval(Point{th}, Point{42.0}) == c.eval(Point{th}, Point{42.0}));
        }
    }
    SUBCASE("unnormalized replacement is rejected") {
        auto raw = Density::from_log(BaseMeasure::lebesgue(0, kInf), [](PointView p) { return -p[0]; });
        try {
            tweak_version(c, Point{42.0}, raw);
            FAIL("expected NotADensity");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotADensity);
        }
    }
}

TEST_CASE("ae_equal") {
    GridSpec g = grid_with(512);
    auto j = waiting_times();
    auto c = condition_on_y(j, g);
    Density my = marginalize_y(j, g);
    auto unit_exp = Density::from_log(BaseMeasure::lebesgue(0, kInf), [](PointView p) { return -p[0]; }, true);
    auto gamma39 = Density::from_log(
        BaseMeasure::lebesgue(0, kInf),
        [](PointView p) { return 3 * std::log(9.0) - std::lgamma(3.0) + 2 * std::log(p[0]) - 9 * p[0]; }, true);

    CHECK(ae_distance(c, c, my, g) == 0.0);
    CHECK(ae_equal(c, tweak_version(c, Point{42.0}, unit_exp), my, g, 1e-6));
    CHECK(ae_equal(c, tweak_version(c, Point{7.0}, gamma39), my, g, 1e-6));

    SUBCASE("eight tweaks placed on quadrature nodes do not matter") {
        Grid y_nodes = make_grid(c.space_y(), g);
        auto t = c;
        for (std::size_t i = 0; i < 8; ++i) {
            t = tweak_version(t, y_nodes.node(i * 37), i % 2 ? unit_exp : gamma39);
        }
        CHECK(t.tweaks().size() == 8);
        CHECK(ae_equal(c, t, my, g, 1e-6));
        CHECK(ae_distance(c, t, my, g) == 0.0);
    }
    SUBCASE("a different joint is detected") {
        auto other = condition_on_y(independent_exp(), g);
        CHECK_FALSE(ae_equal(c, other, my, g, 1e-3));
    }
    SUBCASE("tweaks on atoms of a counting Y are not negligible") {
        auto jp = gamma_poisson();
        auto cp = condition_on_y(jp, g);
        Density mp = marginalize_y(jp, g);
        CHECK(ae_equal(cp, cp, mp, g, 0.0));
        CHECK_FALSE(ae_equal(cp, tweak_version(cp, Point{1.0}, gamma39), mp, g, 1e-3));
    }
}

TEST_CASE("interval_condition_cdf") {
    GridSpec g = grid_with(8192);
    g.axis_nodes = {8192, 512};

    SUBCASE("correlated joint against the closed-form double ratio") {
        double a = 0.5, b = 1.5;
        double ey = std::exp(-a) - std::exp(-b);
        double yey = (a + 1) * std::exp(-a) - (b + 1) * std::exp(-b);
        double num = 0.5 * ((1 - 2 / std::exp(1.0)) * ey + (1 - 1 / std::exp(1.0)) * yey);
        double den = 0.5 * (ey + yey);
        CHECK(std::abs(interval_condition_cdf(correlated_exp(), 1.0, 1.0, 0.5, g) - num / den) <= 1e-5);
    }
    SUBCASE("independent joint ignores y") {
        for (double y : {0.5, 2.0}) {
            for (double x : {0.3, 1.0, 2.5}) {
                CHECK(std::abs(interval_condition_cdf(independent_exp(), x, y, 0.25, g) - (1 - std::exp(-x))) <=
                      1e-6);
            }
        }
    }
    SUBCASE("shrinking intervals converge to the slice CDF") {
        double limit = 1 - 1.5 / std::exp(1.0);
        auto c = condition_on_y(correlated_exp(), g);
        CHECK(std::abs(slice_cdf(c, 1.0, 1.0, g) - limit) <= 1e-6);
        double prev = kInf;
        for (double delta : {0.4, 0.2, 0.1, 0.05}) {
            double err = std::abs(interval_condition_cdf(correlated_exp(), 1.0, 1.0, delta, g) - limit);
            CAPTURE(delta);
            CHECK(err <= 0.6 * prev);
            prev = err;
        }
    }
    SUBCASE("null events") {
        try {
            interval_condition_cdf(independent_exp(), 1.0, -5.0, 0.5, g);
            FAIL("expected ZeroProbabilityEvent");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ZeroProbabilityEvent);
        }
        auto j = JointDensity::from_eval(BaseMeasure::lebesgue(0, 1), BaseMeasure::lebesgue(0, 2),
                                         [](PointView p) { return p[1] <= 1.0 ? 1.0 : 0.0; });
        try {
            interval_condition_cdf(j, 0.5, 1.7, 0.1, grid_with(64));
            FAIL("expected ZeroProbabilityEvent");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ZeroProbabilityEvent);
        }
    }
}
