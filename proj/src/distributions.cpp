#include "mb/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mb::dist {
namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
} // namespace

double log_normal_pdf(double x, double mean, double sd) {
    double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_gamma_pdf(double x, double shape, double rate) {
    if (x < 0.0) {
        return kNegInf;
    }
    if (x == 0.0) {
        if (shape < 1.0) {
            return kPosInf;
        }
        return shape == 1.0 ? std::log(rate) : kNegInf;
    }
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_exponential_pdf(double x, double rate) {
    if (x < 0.0) {
        return kNegInf;
    }
    return std::log(rate) - rate * x;
}

double log_uniform_pdf(double x, double lo, double hi) {
    if (x < lo || x > hi) {
        return kNegInf;
    }
    return -std::log(hi - lo);
}

double log_poisson_pmf(double k, double rate) {
    if (k < 0.0 || std::floor(k) != k) {
        return kNegInf;
    }
    if (rate == 0.0) {
        return k == 0.0 ? 0.0 : kNegInf;
    }
    return k * std::log(rate) - rate - std::lgamma(k + 1.0);
}

} // namespace mb::dist
