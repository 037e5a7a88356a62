#include "mb/corpus.hpp"

#include "mb/distributions.hpp"

#include <cmath>
#include <limits>

namespace mb::corpus {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BayesModel gamma_exponential(double shape, double rate) {
    auto half_line = BaseMeasure::lebesgue(0, kInf);
    return BayesModel{
        Density::from_log(half_line, [shape, rate](PointView t) { return dist::log_gamma_pdf(t[0], shape, rate); },
                          true),
        [](PointView y, PointView t) { return dist::log_exponential_pdf(y[0], t[0]); },
        half_line,
        half_line,
    };
}

BayesModel gamma_gamma(double k) {
    auto half_line = BaseMeasure::lebesgue(0, kInf);
    return BayesModel{
        Density::from_log(half_line, [](PointView t) { return dist::log_gamma_pdf(t[0], 2.0, 2.0); }, true),
        [k](PointView y, PointView t) { return dist::log_gamma_pdf(y[0], k, t[0]); },
        half_line,
        half_line,
    };
}

BayesModel fixed_exponential(double theta) {
    auto single = BaseMeasure::counting({{0}});
    return BayesModel{
        Density::from_log(single, [](PointView) { return 0.0; }, true),
        [theta](PointView y, PointView) { return dist::log_exponential_pdf(y[0], theta); },
        BaseMeasure::lebesgue(0, kInf),
        single,
    };
}

BayesModel normal_normal(double prior_sd, double noise_sd) {
    auto line = BaseMeasure::lebesgue(-kInf, kInf);
    return BayesModel{
        Density::from_log(line, [prior_sd](PointView m) { return dist::log_normal_pdf(m[0], 0.0, prior_sd); }, true),
        [noise_sd](PointView y, PointView m) { return dist::log_normal_pdf(y[0], m[0], noise_sd); },
        line,
        line,
    };
}

} // namespace mb::corpus
