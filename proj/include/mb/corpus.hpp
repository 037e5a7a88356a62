#pragma once

// Reference models shared by the demos, the tests and the acceptance suite.

#include "mb/bayes.hpp"

namespace mb::corpus {

/// theta ~ Gamma(shape, rate) on (0, inf), y | theta ~ Exp(theta).
/// The default is the waiting-times example, Gamma(2, 2).
BayesModel gamma_exponential(double shape = 2.0, double rate = 2.0);

/// y | theta ~ Gamma(k, theta) with the same Gamma(2, 2) prior. With k = 9
/// the pushforward under every registry transform vanishes smoothly at the
/// ends of its image, so midpoint quadrature can check its normalization.
BayesModel gamma_gamma(double k = 9.0);

/// Degenerate model with theta fixed: y ~ Exp(theta). The parameter space is
/// a single counting point that the likelihood ignores.
BayesModel fixed_exponential(double theta);

/// m ~ Normal(0, prior_sd), y | m ~ Normal(m, noise_sd).
BayesModel normal_normal(double prior_sd, double noise_sd);

/// normal_normal with the noise scale fixed at sigma. Marginally
/// y ~ Normal(0, sqrt(prior_sd^2 + sigma^2)).
inline BayesModel fixed_sigma(double sigma, double prior_sd = 10.0) { return normal_normal(prior_sd, sigma); }

} // namespace mb::corpus
