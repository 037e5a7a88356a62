#include "mb/optimize.hpp"

#include <cmath>

namespace mb {

ScalarMaximum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    ScalarMaximum best{lo, f(lo)};
    auto consider = [&](double x, double v) {
        if (v > best.value || std::isnan(best.value)) {
            best = {x, v};
        }
    };
    consider(hi, f(hi));

    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best;
}

} // namespace mb
