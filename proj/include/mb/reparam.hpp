#pragma once

#include "mb/bayes.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mb {

using ScalarMap = std::function<double(double)>;

/// Scalar bijection phi from `domain` onto `image` with |d phi / dy|.
struct Transform {
    std::string name;
    ScalarMap forward;
    ScalarMap inverse;
    ScalarMap jacobian_det;
    Interval domain;
    Interval image;
    /// Endpoints are excluded; the registry transforms are bijections of the
    /// open intervals.
    bool in_domain(double y) const { return y > domain.lo && y < domain.hi; }
    bool in_image(double x) const { return x > image.lo && x < image.hi; }
};

namespace transforms {
Transform identity();
Transform cube();
Transform log();
Transform reciprocal();
Transform affine(double a, double b);
/// "identity", "cube", "log", "reciprocal", or "affine"; the last maps to
/// affine(2, 1). Throws DomainError for anything else.
Transform by_name(const std::string& name);
/// cube, log, reciprocal, affine(2, 1).
std::vector<Transform> registry();
} // namespace transforms

/// Image of a one-dimensional Lebesgue box under t.
BaseMeasure map_space(const BaseMeasure& space, const Transform& t);

/// (x, theta) -> f(inv(x) | theta) / |J(inv(x))|. Zero outside the image of t.
/// Throws SingularTransform where |J| vanishes.
LogLikelihood pushforward_likelihood(LogLikelihood f, const Transform& t);

/// Same model, observed through x = t(y).
BayesModel pushforward_model(const BayesModel& m, const Transform& t);

struct InvarianceReport {
    std::string transform;
    double y_obs;
    double x_obs;
    double posterior_supdiff;
    std::size_t map_index_y;
    std::size_t map_index_x;
    Point map_y;
    Point map_x;
    double log_marginal_y;
    double log_marginal_x;
    /// log_marginal_x - log_marginal_y.
    double log_marginal_shift;
    /// -log |J(y_obs)|.
    double expected_shift;
    double jacobian_at_obs;
};

InvarianceReport posterior_invariance_report(const BayesModel& m, const Transform& t, double y_obs,
                                             const GridSpec& g);

/// Data y = g(m) + eps with a noise density symmetric in the residual.
struct ForwardModel {
    std::string name;
    ScalarMap g;
    /// log density of the residual y - g(m).
    ScalarMap log_noise;

    /// log h(y; g(m)).
    double log_h(double y, double m) const { return log_noise(y - g(m)); }
};

ForwardModel additive_normal(ScalarMap g, double noise_sd, std::string name = "additive-normal");

/// y | m ~ h(y; g(m)) over the real line.
LogLikelihood forward_likelihood(const ForwardModel& fm);

/// Marker that must be passed to construct the erroneous likelihood.
struct ErroneousByConstruction {
    explicit ErroneousByConstruction() = default;
};

inline constexpr const char* kErroneousLabel = "erroneous-by-construction";

/// (x, m) -> h(g(m); inv(x)) / |J(g(m))|: the Jacobian evaluated at the
/// forward-model prediction instead of the observation. This is not a
/// density in x. Throws DomainError when g(m) is outside the domain of t.
LogLikelihood wrong_jacobian_likelihood(const ForwardModel& fm, const Transform& t, ErroneousByConstruction);

struct PosteriorGrid {
    std::vector<Point> nodes;
    std::vector<double> density;
};

struct AcausalityReport {
    std::string transform;
    std::string label = kErroneousLabel;
    double y_obs;
    double x_obs;
    Point map_correct;
    Point map_wrong;
    std::size_t map_index_correct;
    std::size_t map_index_wrong;
    double map_difference;
    double grid_step;
    double posterior_supdiff;
    /// log evidence of the wrong construction minus that of the correct one.
    double log_marginal_shift;
    double jacobian_at_obs;
    PosteriorGrid correct;
    PosteriorGrid wrong;
};

/// Posteriors over m from the correct pushforward and from the wrong-Jacobian
/// likelihood, both observed at x = t(y_obs). The prior's space is the
/// parameter space.
AcausalityReport acausality_demo(const ForwardModel& fm, const Density& prior, const Transform& t, double y_obs,
                                 const GridSpec& g);

struct ParamReparamReport {
    std::string transform;
    /// sup over the theta grid of |pushed-forward eta posterior - theta posterior|.
    double posterior_supdiff;
    /// sup over the eta grid of |eta prior - induced prior pi(psi(eta)) |K(eta)||,
    /// both normalized.
    double prior_supdiff;
    bool priors_equivalent;
    bool posteriors_equivalent;
};

/// psi maps eta onto theta (forward) with |K(eta)| = psi.jacobian_det(eta).
/// The eta prior defaults to the induced prior pi(psi(eta)) |K(eta)|.
/// Densities count as equivalent when their sup distance is at most tol.
ParamReparamReport param_reparam_check(const BayesModel& m, const Transform& psi, double y_obs,
                                       const GridSpec& g_theta, const GridSpec& g_eta,
                                       std::optional<Density> eta_prior = std::nullopt, double tol = 1e-4);

} // namespace mb
