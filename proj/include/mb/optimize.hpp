#pragma once

#include <functional>

namespace mb {

struct ScalarMaximum {
    double x;
    double value;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Stops once the bracket is narrower than tol. The returned point is the
/// best one evaluated, which is never worse than either bracket end.
ScalarMaximum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol);

} // namespace mb
