#include "mb/conditional.hpp"

#include "mb/error.hpp"
#include "mb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>

namespace mb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class LogValueCache {
public:
    template <typename Compute>
    double get(PointView key, Compute&& compute) {
        Point k(key.begin(), key.end());
        {
            std::shared_lock lock(mutex_);
            auto it = values_.find(k);
            if (it != values_.end()) {
                return it->second;
            }
        }
        double value = compute();
        std::unique_lock lock(mutex_);
        values_.emplace(std::move(k), value);
        return value;
    }

private:
    std::shared_mutex mutex_;
    std::map<Point, double> values_;
};

// Joint log density with one block of coordinates held fixed.
PointFunction fix_y(const PointFunction& log_joint, Point y) {
    return [log_joint, y = std::move(y)](PointView x) { return log_joint(join_point(x, y)); };
}

PointFunction fix_x(const PointFunction& log_joint, Point x) {
    return [log_joint, x = std::move(x)](PointView y) { return log_joint(join_point(x, y)); };
}

const Interval& single_axis(const BaseMeasure& m, const char* what) {
    if (m.kind() != MeasureKind::LebesgueBox || m.dim() != 1) {
        throw Error(ErrorKind::InvalidMeasure, std::string(what) + " must be a one-dimensional Lebesgue box");
    }
    return m.as_box().bounds.front();
}

} // namespace

Point join_point(PointView x, PointView y) {
    Point p;
    p.reserve(x.size() + y.size());
    p.insert(p.end(), x.begin(), x.end());
    p.insert(p.end(), y.begin(), y.end());
    return p;
}

JointDensity JointDensity::from_log(BaseMeasure space_x, BaseMeasure space_y, PointFunction log_joint) {
    auto space = product_measure(space_x, space_y);
    return {std::move(space_x), std::move(space_y), Density::from_log(std::move(space), std::move(log_joint))};
}

JointDensity JointDensity::from_eval(BaseMeasure space_x, BaseMeasure space_y, PointFunction joint) {
    auto space = product_measure(space_x, space_y);
    return {std::move(space_x), std::move(space_y), Density::from_eval(std::move(space), std::move(joint))};
}

Density marginalize_y(const JointDensity& j, const GridSpec& g) {
    auto cache = std::make_shared<LogValueCache>();
    PointFunction log_joint = j.density.log_function();
    BaseMeasure space_x = j.space_x;
    return Density::from_log(j.space_y, [cache, log_joint, space_x, g](PointView y) {
        return cache->get(y, [&] { return log_integrate(fix_y(log_joint, Point(y.begin(), y.end())), space_x, g); });
    });
}

Density marginalize_x(const JointDensity& j, const GridSpec& g) {
    auto cache = std::make_shared<LogValueCache>();
    PointFunction log_joint = j.density.log_function();
    BaseMeasure space_y = j.space_y;
    return Density::from_log(j.space_x, [cache, log_joint, space_y, g](PointView x) {
        return cache->get(x, [&] { return log_integrate(fix_x(log_joint, Point(x.begin(), x.end())), space_y, g); });
    });
}

// --- ConditionalDensity ------------------------------------------------------

ConditionalDensity::ConditionalDensity(BaseMeasure space_x, BaseMeasure space_y, SliceFactory family,
                                       Density fallback)
    : space_x_(std::move(space_x)), space_y_(std::move(space_y)), family_(std::move(family)),
      fallback_(std::move(fallback)) {}

PointFunction ConditionalDensity::log_slice(PointView y) const {
    for (const auto& [point, replacement] : tweaks_) {
        if (std::equal(point.begin(), point.end(), y.begin(), y.end())) {
            return replacement.log_function();
        }
    }
    return family_(y);
}

PointFunction ConditionalDensity::distributional_log_slice(PointView y) const {
    for (const auto& [point, replacement] : tweaks_) {
        if (std::equal(point.begin(), point.end(), y.begin(), y.end()) && space_y_.point_mass(point) > 0.0) {
            return replacement.log_function();
        }
    }
    return family_(y);
}

double ConditionalDensity::log_eval(PointView x, PointView y) const { return log_slice(y)(x); }

double ConditionalDensity::eval(PointView x, PointView y) const { return std::exp(log_eval(x, y)); }

Density ConditionalDensity::slice(PointView y) const { return Density::from_log(space_x_, log_slice(y), true); }

ConditionalDensity ConditionalDensity::with_tweak(Point y0, Density replacement) const {
    ConditionalDensity out = *this;
    for (auto& [point, existing] : out.tweaks_) {
        if (point == y0) {
            existing = std::move(replacement);
            return out;
        }
    }
    out.tweaks_.emplace_back(std::move(y0), std::move(replacement));
    return out;
}

ConditionalDensity condition_on_y(const JointDensity& j, const GridSpec& g) {
    Density marginal_y = marginalize_y(j, g);
    Density fallback = marginalize_x(j, g);
    PointFunction log_joint = j.density.log_function();
    PointFunction fallback_log = fallback.log_function();

    auto family = [marginal_y, log_joint, fallback_log](PointView y) -> PointFunction {
        double log_m;
        try {
            log_m = marginal_y.log_eval(y);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonFiniteIntegrand) {
                throw;
            }
            log_m = kInf;
        }
        if (!std::isfinite(log_m)) {
            return fallback_log;
        }
        return [log_joint, y = Point(y.begin(), y.end()), log_m](PointView x) {
            return log_joint(join_point(x, y)) - log_m;
        };
    };
    return ConditionalDensity(j.space_x, j.space_y, std::move(family), std::move(fallback));
}

ConditionalDensity tweak_version(const ConditionalDensity& c, Point y0, Density replacement) {
    if (!replacement.normalized()) {
        throw Error(ErrorKind::NotADensity, "replacement slice must be a normalized density");
    }
    if (replacement.space().dim() != c.space_x().dim() || y0.size() != c.space_y().dim()) {
        throw Error(ErrorKind::NotADensity, "replacement slice lives on the wrong space");
    }
    return c.with_tweak(std::move(y0), std::move(replacement));
}

double ae_distance(const ConditionalDensity& a, const ConditionalDensity& b, const Density& marginal_y,
                   const GridSpec& g) {
    Grid y_grid = make_grid(a.space_y(), g);
    Grid x_grid = make_grid(a.space_x(), g);
    std::vector<double> terms(y_grid.size());
    parallel_for(y_grid.size(), x_grid.size(), [&](std::size_t i) {
        Point y = y_grid.node(i);
        double mass = marginal_y.eval(y);
        if (mass == 0.0) {
            terms[i] = 0.0;
            return;
        }
        PointFunction la = a.distributional_log_slice(y);
        PointFunction lb = b.distributional_log_slice(y);
        Point x(x_grid.dim());
        double sup = 0.0;
        for (std::size_t k = 0; k < x_grid.size() && sup < 1.0; ++k) {
            x_grid.node(k, x);
            double diff = std::abs(std::exp(la(x)) - std::exp(lb(x)));
            sup = std::isnan(diff) ? 1.0 : std::max(sup, diff);
        }
        terms[i] = y_grid.weight(i) * std::min(1.0, sup) * mass;
    });
    CompensatedSum total;
    for (double t : terms) {
        total.add(t);
    }
    return total.value();
}

bool ae_equal(const ConditionalDensity& a, const ConditionalDensity& b, const Density& marginal_y,
              const GridSpec& g, double tol) {
    return ae_distance(a, b, marginal_y, g) <= tol;
}

double interval_condition_cdf(const JointDensity& j, double x, double y, double delta, const GridSpec& g) {
    if (!(delta > 0.0)) {
        throw Error(ErrorKind::DomainError, "interval half-width must be positive");
    }
    Interval x_axis = truncate(single_axis(j.space_x, "X space"), g.truncation);
    Interval y_axis = truncate(single_axis(j.space_y, "Y space"), g.truncation);
    double y_lo = std::max(y - delta, y_axis.lo);
    double y_hi = std::min(y + delta, y_axis.hi);
    if (!(y_lo < y_hi)) {
        throw Error(ErrorKind::ZeroProbabilityEvent, "conditioning interval misses the support of Y");
    }
    const PointFunction& joint = j.density.eval_function();
    double denominator =
        integrate(joint, BaseMeasure::lebesgue({x_axis, Interval{y_lo, y_hi}}), g);
    if (!(denominator > 0.0)) {
        throw Error(ErrorKind::ZeroProbabilityEvent, "conditioning event has probability zero");
    }
    double x_hi = std::min(x, x_axis.hi);
    if (!(x_axis.lo < x_hi)) {
        return 0.0;
    }
    double numerator = integrate(joint, BaseMeasure::lebesgue({Interval{x_axis.lo, x_hi}, Interval{y_lo, y_hi}}), g);
    return numerator / denominator;
}

double slice_cdf(const ConditionalDensity& c, double x, double y, const GridSpec& g) {
    Interval x_axis = truncate(single_axis(c.space_x(), "X space"), g.truncation);
    double x_hi = std::min(x, x_axis.hi);
    if (!(x_axis.lo < x_hi)) {
        return 0.0;
    }
    Point yp{y};
    PointFunction log_s = c.log_slice(yp);
    return integrate([&](PointView p) { return std::exp(log_s(p)); }, BaseMeasure::lebesgue(x_axis.lo, x_hi), g);
}

double total_probability(const ConditionalDensity& c, const Density& marginal_y, PointView x,
                         const GridSpec& g) {
    Point xp(x.begin(), x.end());
    return integrate(
        [&](PointView y) {
            double m = marginal_y.eval(y);
            return m == 0.0 ? 0.0 : std::exp(c.distributional_log_slice(y)(xp)) * m;
        },
        c.space_y(), g);
}

} // namespace mb
