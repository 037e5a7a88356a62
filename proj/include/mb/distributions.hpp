#pragma once

// Log densities of the standard families, normalized against Lebesgue or
// counting measure. Arguments are not validated here; callers check scales.

namespace mb::dist {

double log_normal_pdf(double x, double mean, double sd);
double log_gamma_pdf(double x, double shape, double rate);
double log_exponential_pdf(double x, double rate);
double log_uniform_pdf(double x, double lo, double hi);
/// Zero mass (log -inf) for anything that is not a nonnegative integer.
double log_poisson_pmf(double k, double rate);

} // namespace mb::dist
