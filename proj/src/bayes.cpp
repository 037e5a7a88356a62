#include "mb/bayes.hpp"

#include "mb/distributions.hpp"
#include "mb/error.hpp"
#include "mb/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mb {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

PointFunction unnormalized_log_posterior(const BayesModel& m, PointView y_obs) {
    PointFunction log_prior = m.prior.log_function();
    LogLikelihood log_lik = m.log_likelihood;
    Point y(y_obs.begin(), y_obs.end());
    return [log_prior, log_lik, y](PointView theta) {
        double lp = log_prior(theta);
        if (lp == kNegInf) {
            return kNegInf;
        }
        return lp + log_lik(y, theta);
    };
}

std::string describe_point(PointView p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) {
            s += ", ";
        }
        s += std::to_string(p[i]);
    }
    return s + ")";
}

struct GridEvaluation {
    Grid grid;
    std::vector<double> values;
    std::size_t peak_index;
    double log_z;
};

GridEvaluation evaluate_posterior(const PointFunction& log_post, const BaseMeasure& space, const GridSpec& g) {
    Grid grid = make_grid(space, g);
    if (grid.size() == 0) {
        throw Error(ErrorKind::EmptyMeasure, "parameter space has no nodes");
    }
    std::vector<double> values = evaluate_on_grid(log_post, grid);
    std::size_t peak_index = 0;
    double peak = kNegInf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (std::isnan(v) || v == -kNegInf) {
            throw Error(ErrorKind::ImproperPosterior,
                        "unnormalized posterior is not finite at theta = " + describe_point(grid.node(i)));
        }
        if (v > peak) {
            peak = v;
            peak_index = i;
        }
    }
    if (peak == kNegInf) {
        throw Error(ErrorKind::DataImpossibleUnderModel, "the observed data has zero density under every parameter");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total.add(grid.weight(i) * std::exp(values[i] - peak));
    }
    double log_z = peak + std::log(total.value());
    if (!std::isfinite(log_z)) {
        throw Error(ErrorKind::ImproperPosterior, "marginal likelihood is not finite");
    }
    return {std::move(grid), std::move(values), peak_index, log_z};
}

Point refine_map(const PointFunction& log_post, const Grid& grid, std::size_t map_index) {
    Point x = grid.node(map_index);
    double current = log_post(x);
    for (std::size_t k = 0; k < grid.groups().size(); ++k) {
        const AxisGroup& group = grid.groups()[k];
        if (!group.continuous || group.dim != 1 || group.size() < 2) {
            continue;
        }
        double step = group.coords[1] - group.coords[0];
        double centre = x[group.offset];
        double lo = std::max(centre - step, group.coords.front());
        double hi = std::min(centre + step, group.coords.back());
        Point probe = x;
        auto along = [&](double t) {
            probe[group.offset] = t;
            return log_post(probe);
        };
        ScalarMaximum best = golden_section_max(along, lo, hi, step * 1e-6);
        if (best.value > current) {
            x[group.offset] = best.x;
            current = best.value;
        }
    }
    return x;
}

} // namespace

double BayesModel::likelihood(PointView y, PointView theta) const { return std::exp(log_likelihood(y, theta)); }

JointDensity joint_density(const BayesModel& m) {
    PointFunction log_prior = m.prior.log_function();
    LogLikelihood log_lik = m.log_likelihood;
    std::size_t d = m.param_space.dim();
    return JointDensity::from_log(m.param_space, m.data_space, [log_prior, log_lik, d](PointView p) {
        PointView theta = p.first(d);
        double lp = log_prior(theta);
        if (lp == kNegInf) {
            return kNegInf;
        }
        return lp + log_lik(p.subspan(d), theta);
    });
}

PosteriorResult posterior(const BayesModel& m, PointView y_obs, const GridSpec& g) {
    PointFunction log_post = unnormalized_log_posterior(m, y_obs);
    GridEvaluation ev = evaluate_posterior(log_post, m.param_space, g);
    double log_z = ev.log_z;
    for (double& v : ev.values) {
        v -= log_z;
    }
    Point map_point = ev.grid.node(ev.peak_index);
    Point map_refined = refine_map(log_post, ev.grid, ev.peak_index);
    Density post = Density::from_log(
        m.param_space, [log_post, log_z](PointView theta) { return log_post(theta) - log_z; }, true);
    return PosteriorResult{std::move(post), log_z,  std::move(map_point), ev.peak_index, std::move(map_refined),
                           g,               std::move(ev.grid), std::move(ev.values)};
}

double log_marginal_likelihood(const BayesModel& m, PointView y_obs, const GridSpec& g) {
    return evaluate_posterior(unnormalized_log_posterior(m, y_obs), m.param_space, g).log_z;
}

std::pair<double, double> posterior_conjugate_gamma_exp(double shape, double rate, double y_obs) {
    if (!(shape > 0) || !(rate > 0) || !(y_obs > 0)) {
        throw Error(ErrorKind::DomainError, "shape, rate and observation must all be positive");
    }
    return {shape + 1, rate + y_obs};
}

double bayes_factor(const BayesModel& m1, const BayesModel& m2, PointView y_obs, const GridSpec& g) {
    return std::exp(log_marginal_likelihood(m1, y_obs, g) - log_marginal_likelihood(m2, y_obs, g));
}

double gamma_exp_log_marginal(double shape, double rate, double y_obs, const GridSpec& g) {
    return log_integrate(
        [shape, rate, y_obs](PointView p) {
            double t = p[0];
            double lp = dist::log_gamma_pdf(t, shape, rate);
            return lp == kNegInf ? kNegInf : lp + dist::log_exponential_pdf(y_obs, t);
        },
        BaseMeasure::lebesgue(0, std::numeric_limits<double>::infinity()), g);
}

EmpiricalBayesResult empirical_bayes_rate(double shape, double y_obs, const RateSearch& search, const GridSpec& g) {
    if (!(shape > 0) || !(y_obs > 0) || !(search.lo > 0) || search.hi < search.lo) {
        throw Error(ErrorKind::DomainError, "empirical Bayes needs shape > 0, y > 0 and 0 < lo <= hi");
    }
    auto objective = [&](double b) { return gamma_exp_log_marginal(shape, b, y_obs, g); };
    if (search.hi - search.lo <= 1e-12 * std::max(1.0, search.lo) || search.steps < 2) {
        return {search.lo, objective(search.lo), true};
    }
    std::size_t n = search.steps;
    auto rate_at = [&](std::size_t i) {
        return i + 1 == n ? search.hi : search.lo + (search.hi - search.lo) * double(i) / double(n - 1);
    };
    std::size_t best = 0;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        double v = objective(rate_at(i));
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    bool boundary = best == 0 || best + 1 == n;
    double lo = rate_at(best == 0 ? 0 : best - 1);
    double hi = rate_at(std::min(best + 1, n - 1));
    ScalarMaximum refined = golden_section_max(objective, lo, hi, 1e-6);
    if (refined.value < best_value) {
        return {rate_at(best), best_value, boundary};
    }
    return {refined.x, refined.value, boundary};
}

EmpiricalBayesResult empirical_bayes_rate(double shape, double y_obs, const RateSearch& search) {
    GridSpec g;
    g.nodes = 20000;
    return empirical_bayes_rate(shape, y_obs, search, g);
}

} // namespace mb
