#pragma once

#include "mb/measure.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace mb {

/// Joint density of (X, Y) against product_measure(space_x, space_y).
/// Points are laid out as the x coordinates followed by the y coordinates.
struct JointDensity {
    BaseMeasure space_x;
    BaseMeasure space_y;
    Density density;

    static JointDensity from_log(BaseMeasure space_x, BaseMeasure space_y, PointFunction log_joint);
    static JointDensity from_eval(BaseMeasure space_x, BaseMeasure space_y, PointFunction joint);
};

/// Concatenates x and y into one joint point.
Point join_point(PointView x, PointView y);

/// y -> integral of the joint over x. Values are computed on demand and
/// cached per y; the cache is safe for concurrent use.
Density marginalize_y(const JointDensity& j, const GridSpec& g);

/// x -> integral of the joint over y, cached per x.
Density marginalize_x(const JointDensity& j, const GridSpec& g);

/// A family of densities over X indexed by y, with a fallback density used
/// where the marginal of Y is zero or infinite, and an optional finite set of
/// points y0 where the slice has been replaced outright.
class ConditionalDensity {
public:
    /// Returns the log density of the slice at y as a function of x.
    using SliceFactory = std::function<PointFunction(PointView y)>;

    ConditionalDensity(BaseMeasure space_x, BaseMeasure space_y, SliceFactory family, Density fallback);

    const BaseMeasure& space_x() const noexcept { return space_x_; }
    const BaseMeasure& space_y() const noexcept { return space_y_; }
    const Density& fallback() const noexcept { return fallback_; }
    const std::vector<std::pair<Point, Density>>& tweaks() const noexcept { return tweaks_; }

    double log_eval(PointView x, PointView y) const;
    double eval(PointView x, PointView y) const;

    /// Log slice at y, honouring tweaks.
    PointFunction log_slice(PointView y) const;
    /// Slice at y as a normalized density over space_x.
    Density slice(PointView y) const;

    /// Log slice at y where tweaks on null points of space_y are ignored.
    /// This is the slice that matters when integrating against the law of Y.
    PointFunction distributional_log_slice(PointView y) const;

    ConditionalDensity with_tweak(Point y0, Density replacement) const;

private:
    BaseMeasure space_x_;
    BaseMeasure space_y_;
    SliceFactory family_;
    Density fallback_;
    std::vector<std::pair<Point, Density>> tweaks_;
};

/// p(x | y) = p(x, y) / p_Y(y) where 0 < p_Y(y) < inf, otherwise the
/// marginal of X.
ConditionalDensity condition_on_y(const JointDensity& j, const GridSpec& g);

/// Copy of c whose slice at exactly y0 is `replacement`.
/// Throws NotADensity unless the replacement is flagged normalized.
ConditionalDensity tweak_version(const ConditionalDensity& c, Point y0, Density replacement);

/// Integral over y of min(1, sup_x |a(x|y) - b(x|y)|) weighted by marginal_y.
/// The sup is probed on the x nodes of g; tweaks on null points are ignored.
double ae_distance(const ConditionalDensity& a, const ConditionalDensity& b, const Density& marginal_y,
                   const GridSpec& g);

bool ae_equal(const ConditionalDensity& a, const ConditionalDensity& b, const Density& marginal_y,
              const GridSpec& g, double tol);

/// P(X <= x | Y in [y - delta, y + delta]) for one-dimensional continuous X
/// and Y. Throws ZeroProbabilityEvent if the conditioning event is null.
double interval_condition_cdf(const JointDensity& j, double x, double y, double delta, const GridSpec& g);

/// Integral of the slice at y up to x (the conditional CDF).
double slice_cdf(const ConditionalDensity& c, double x, double y, const GridSpec& g);

/// Integral over y of c(x | y) * marginal_y(y): recovers p_X(x).
double total_probability(const ConditionalDensity& c, const Density& marginal_y, PointView x,
                         const GridSpec& g);

} // namespace mb
