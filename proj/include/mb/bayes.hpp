#pragma once

#include "mb/conditional.hpp"
#include "mb/measure.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace mb {

/// log f(y | theta).
using LogLikelihood = std::function<double(PointView y, PointView theta)>;

struct BayesModel {
    Density prior;  // over param_space
    LogLikelihood log_likelihood;
    BaseMeasure data_space;
    BaseMeasure param_space;

    double likelihood(PointView y, PointView theta) const;
};

/// pi(theta) f(y | theta) over param_space x data_space, theta first.
JointDensity joint_density(const BayesModel& m);

struct PosteriorResult {
    Density posterior;
    double log_marginal_likelihood;
    /// Grid argmax; ties go to the lowest flat index.
    Point map_point;
    std::size_t map_index;
    /// map_point after one golden-section pass within one grid step on every
    /// continuous one-dimensional axis.
    Point map_refined;
    GridSpec grid_spec;
    Grid grid;
    /// Normalized log posterior at every grid node, in flat order.
    std::vector<double> log_density;
};

/// Throws DataImpossibleUnderModel when the unnormalized posterior vanishes on
/// every node and ImproperPosterior when it is not finite.
PosteriorResult posterior(const BayesModel& m, PointView y_obs, const GridSpec& g);

double log_marginal_likelihood(const BayesModel& m, PointView y_obs, const GridSpec& g);

/// Gamma(shape, rate) prior with an Exp(theta) observation y: posterior is
/// Gamma(shape + 1, rate + y). All arguments must be positive.
std::pair<double, double> posterior_conjugate_gamma_exp(double shape, double rate, double y_obs);

/// p(y | m1) / p(y | m2).
double bayes_factor(const BayesModel& m1, const BayesModel& m2, PointView y_obs, const GridSpec& g);

struct RateSearch {
    double lo;
    double hi;
    std::size_t steps = 200;
};

struct EmpiricalBayesResult {
    double rate;
    double log_marginal;
    bool boundary_maximum;
};

/// Rate b maximizing the marginal likelihood of y under theta ~ Gamma(shape, b),
/// y | theta ~ Exp(theta). Grid search over `search`, then golden section to 1e-6.
EmpiricalBayesResult empirical_bayes_rate(double shape, double y_obs, const RateSearch& search, const GridSpec& g);
/// Same, with a 20000-node theta grid.
EmpiricalBayesResult empirical_bayes_rate(double shape, double y_obs, const RateSearch& search);

/// Log marginal likelihood of that model at rate b, by quadrature over theta.
double gamma_exp_log_marginal(double shape, double rate, double y_obs, const GridSpec& g);

} // namespace mb
