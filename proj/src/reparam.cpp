#include "mb/reparam.hpp"

#include "mb/distributions.hpp"
#include "mb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Interval kLine{-kInf, kInf};
const Interval kHalfLine{0.0, kInf};

double sup_distance(const std::vector<double>& log_a, const std::vector<double>& log_b) {
    double sup = 0;
    for (std::size_t i = 0; i < log_a.size(); ++i) {
        sup = std::max(sup, std::abs(std::exp(log_a[i]) - std::exp(log_b[i])));
    }
    return sup;
}

double grid_step(const Grid& grid) {
    const AxisGroup& axis = grid.groups().front();
    return axis.size() > 1 ? axis.coords[1] - axis.coords[0] : 0.0;
}

const Interval& single_box_axis(const BaseMeasure& space) {
    if (space.kind() != MeasureKind::LebesgueBox || space.dim() != 1) {
        throw Error(ErrorKind::InvalidMeasure, "transforms act on one-dimensional Lebesgue spaces, got " +
                                                   space.describe());
    }
    return space.as_box().bounds.front();
}

Transform invert(const Transform& t) {
    ScalarMap jac = t.jacobian_det;
    ScalarMap inv = t.inverse;
    return Transform{"inverse " + t.name, t.inverse, t.forward, [jac, inv](double x) { return 1.0 / jac(inv(x)); },
                     t.image, t.domain};
}

PosteriorGrid tabulate(const PosteriorResult& r) {
    PosteriorGrid out;
    out.nodes.reserve(r.grid.size());
    out.density.reserve(r.grid.size());
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        out.nodes.push_back(r.grid.node(i));
        out.density.push_back(std::exp(r.log_density[i]));
    }
    return out;
}

} // namespace

namespace transforms {

Transform identity() {
    return {"identity", [](double y) { return y; }, [](double x) { return x; }, [](double) { return 1.0; }, kLine,
            kLine};
}

Transform cube() {
    return {"cube", [](double y) { return y * y * y; }, [](double x) { return std::cbrt(x); },
            [](double y) { return 3 * y * y; }, kLine, kLine};
}

Transform log() {
    return {"log", [](double y) { return std::log(y); }, [](double x) { return std::exp(x); },
            [](double y) { return 1 / y; }, kHalfLine, kLine};
}

Transform reciprocal() {
    return {"reciprocal", [](double y) { return 1 / y; }, [](double x) { return 1 / x; },
            [](double y) { return 1 / (y * y); }, kHalfLine, kHalfLine};
}

Transform affine(double a, double b) {
    if (a == 0 || !std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorKind::SingularTransform, "affine transform needs a finite nonzero slope");
    }
    char name[64];
    std::snprintf(name, sizeof name, "affine(%g, %g)", a, b);
    return {name, [a, b](double y) { return a * y + b; }, [a, b](double x) { return (x - b) / a; },
            [a](double) { return std::abs(a); }, kLine, kLine};
}

Transform by_name(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "cube") return cube();
    if (name == "log") return log();
    if (name == "reciprocal") return reciprocal();
    if (name == "affine") return affine(2, 1);
    throw Error(ErrorKind::DomainError, "unknown transform '" + name + "'");
}

std::vector<Transform> registry() { return {cube(), log(), reciprocal(), affine(2, 1)}; }

} // namespace transforms

BaseMeasure map_space(const BaseMeasure& space, const Transform& t) {
    const Interval& iv = single_box_axis(space);
    if (iv.lo < t.domain.lo || iv.hi > t.domain.hi) {
        throw Error(ErrorKind::DomainError, space.describe() + " is not inside the domain of " + t.name);
    }
    double a = t.forward(iv.lo), b = t.forward(iv.hi);
    return BaseMeasure::lebesgue(std::min(a, b), std::max(a, b));
}

LogLikelihood pushforward_likelihood(LogLikelihood f, const Transform& t) {
    return [f = std::move(f), t](PointView x, PointView theta) {
        if (!t.in_image(x[0])) {
            return -kInf;
        }
        double y = t.inverse(x[0]);
        double jac = t.jacobian_det(y);
        if (!(jac > 0)) {
            throw Error(ErrorKind::SingularTransform, t.name + " has zero Jacobian at y = " + std::to_string(y));
        }
        double yv[1] = {y};
        return f(yv, theta) - std::log(jac);
    };
}

BayesModel pushforward_model(const BayesModel& m, const Transform& t) {
    return BayesModel{m.prior, pushforward_likelihood(m.log_likelihood, t), map_space(m.data_space, t),
                      m.param_space};
}

InvarianceReport posterior_invariance_report(const BayesModel& m, const Transform& t, double y_obs,
                                             const GridSpec& g) {
    if (!t.in_domain(y_obs)) {
        throw Error(ErrorKind::DomainError, "observation is outside the domain of " + t.name);
    }
    double x_obs = t.forward(y_obs);
    PosteriorResult ry = posterior(m, Point{y_obs}, g);
    PosteriorResult rx = posterior(pushforward_model(m, t), Point{x_obs}, g);
    double jac = t.jacobian_det(y_obs);
    return InvarianceReport{t.name,
                            y_obs,
                            x_obs,
                            sup_distance(ry.log_density, rx.log_density),
                            ry.map_index,
                            rx.map_index,
                            ry.map_point,
                            rx.map_point,
                            ry.log_marginal_likelihood,
                            rx.log_marginal_likelihood,
                            rx.log_marginal_likelihood - ry.log_marginal_likelihood,
                            -std::log(jac),
                            jac};
}

ForwardModel additive_normal(ScalarMap g, double noise_sd, std::string name) {
    return ForwardModel{std::move(name), std::move(g),
                        [noise_sd](double r) { return dist::log_normal_pdf(r, 0.0, noise_sd); }};
}

LogLikelihood forward_likelihood(const ForwardModel& fm) {
    return [fm](PointView y, PointView m) { return fm.log_h(y[0], m[0]); };
}

LogLikelihood wrong_jacobian_likelihood(const ForwardModel& fm, const Transform& t, ErroneousByConstruction) {
    return [fm, t](PointView x, PointView m) {
        double predicted = fm.g(m[0]);
        if (!t.in_domain(predicted)) {
            throw Error(ErrorKind::DomainError, "forward-model prediction " + std::to_string(predicted) +
                                                    " is outside the domain of " + t.name);
        }
        if (!t.in_image(x[0])) {
            return -kInf;
        }
        // h(g(m); inv(x)) / |J(g(m))|
        return fm.log_noise(predicted - t.inverse(x[0])) - std::log(t.jacobian_det(predicted));
    };
}

AcausalityReport acausality_demo(const ForwardModel& fm, const Density& prior, const Transform& t, double y_obs,
                                 const GridSpec& g) {
    if (!t.in_domain(y_obs)) {
        throw Error(ErrorKind::DomainError, "observation is outside the domain of " + t.name);
    }
    double x_obs = t.forward(y_obs);
    BaseMeasure x_space = BaseMeasure::lebesgue({t.image});
    BayesModel correct{prior, pushforward_likelihood(forward_likelihood(fm), t), x_space, prior.space()};
    BayesModel wrong{prior, wrong_jacobian_likelihood(fm, t, ErroneousByConstruction{}), x_space, prior.space()};
    PosteriorResult rc = posterior(correct, Point{x_obs}, g);
    PosteriorResult rw = posterior(wrong, Point{x_obs}, g);

    AcausalityReport report;
    report.transform = t.name;
    report.y_obs = y_obs;
    report.x_obs = x_obs;
    report.map_correct = rc.map_point;
    report.map_wrong = rw.map_point;
    report.map_index_correct = rc.map_index;
    report.map_index_wrong = rw.map_index;
    report.map_difference = std::abs(rw.map_point[0] - rc.map_point[0]);
    report.grid_step = grid_step(rc.grid);
    report.posterior_supdiff = sup_distance(rc.log_density, rw.log_density);
    report.log_marginal_shift = rw.log_marginal_likelihood - rc.log_marginal_likelihood;
    report.jacobian_at_obs = t.jacobian_det(y_obs);
    report.correct = tabulate(rc);
    report.wrong = tabulate(rw);
    return report;
}

ParamReparamReport param_reparam_check(const BayesModel& m, const Transform& psi, double y_obs,
                                       const GridSpec& g_theta, const GridSpec& g_eta,
                                       std::optional<Density> eta_prior, double tol) {
    BaseMeasure eta_space = map_space(m.param_space, invert(psi));
    PointFunction log_prior = m.prior.log_function();
    auto log_k = [psi](double eta) {
        double k = psi.jacobian_det(eta);
        if (!(k > 0)) {
            throw Error(ErrorKind::SingularTransform, psi.name + " has zero Jacobian at eta = " + std::to_string(eta));
        }
        return std::log(k);
    };
    Density induced = Density::from_log(eta_space, [log_prior, psi, log_k](PointView eta) {
        if (!psi.in_domain(eta[0])) {
            return -kInf;
        }
        double theta[1] = {psi.forward(eta[0])};
        return log_prior(theta) + log_k(eta[0]);
    });

    ParamReparamReport report{psi.name, 0.0, 0.0, true, true};
    if (eta_prior) {
        Density a = normalize(induced, g_eta).density;
        Density b = normalize(*eta_prior, g_eta).density;
        Grid eta_grid = make_grid(eta_space, g_eta);
        for (std::size_t i = 0; i < eta_grid.size(); ++i) {
            Point eta = eta_grid.node(i);
            report.prior_supdiff = std::max(report.prior_supdiff, std::abs(a.eval(eta) - b.eval(eta)));
        }
        report.priors_equivalent = report.prior_supdiff <= tol;
    }

    LogLikelihood log_lik = m.log_likelihood;
    BayesModel eta_model{eta_prior ? *eta_prior : induced,
                         [log_lik, psi](PointView y, PointView eta) {
                             double theta[1] = {psi.forward(eta[0])};
                             return log_lik(y, theta);
                         },
                         m.data_space, eta_space};
    PosteriorResult direct = posterior(m, Point{y_obs}, g_theta);
    PosteriorResult via_eta = posterior(eta_model, Point{y_obs}, g_eta);
    for (std::size_t i = 0; i < direct.grid.size(); ++i) {
        double theta = direct.grid.node(i)[0];
        double pushed = 0.0;
        if (psi.in_image(theta)) {
            double eta = psi.inverse(theta);
            pushed = std::exp(via_eta.posterior.log_eval(Point{eta}) - log_k(eta));
        }
        report.posterior_supdiff =
            std::max(report.posterior_supdiff, std::abs(pushed - std::exp(direct.log_density[i])));
    }
    report.posteriors_equivalent = report.posterior_supdiff <= tol;
    return report;
}

} // namespace mb
