#include "mb/borel_kolmogorov.hpp"

#include "mb/distributions.hpp"
#include "mb/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DiagonalDensity tabulate(Density d, const GridSpec& g) {
    Grid grid = make_grid(d.space(), g);
    DiagonalDensity out{std::move(d), {}, {}, 0.0};
    CompensatedSum mean;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = grid.node(i)[0];
        double f = out.density.eval(Point{v});
        out.grid.push_back(v);
        out.values.push_back(f);
        mean.add(grid.weight(i) * v * f);
    }
    out.mean = mean.value();
    return out;
}

// v2-interval of the event section at v1 = v, clipped to [0, top].
Interval event_section(EventFamily family, double eps, double v, double top) {
    if (family == EventFamily::Band) {
        return {std::max(0.0, v - eps), std::min(top, v + eps)};
    }
    return {v / (1 + eps), std::min(top, v / (1 - eps))};
}

// Points in (0, top) where an end of the event section hits the edge of the
// quadrant, leaving a kink in the section mass.
std::vector<double> section_kinks(EventFamily family, double eps, double top) {
    std::vector<double> cuts = family == EventFamily::Band ? std::vector<double>{eps, top - eps}
                                                           : std::vector<double>{top * (1 - eps)};
    std::vector<double> out{0.0};
    for (double c : cuts) {
        if (c > out.back() && c < top) {
            out.push_back(c);
        }
    }
    out.push_back(top);
    return out;
}

void check_grid(const GridSpec& g) {
    bool coarse = g.nodes < 16;
    for (std::size_t n : g.axis_nodes) {
        coarse = coarse || n < 16;
    }
    if (coarse) {
        throw Error(ErrorKind::GridTooCoarse, "the paradox report needs at least 16 nodes per axis");
    }
}

FamilyConvergence converge(const DiagonalConditioningProblem& p, EventFamily family, Conditioner limit,
                           const DiagonalDensity& target, const std::vector<double>& eps_seq,
                           const std::vector<double>& probes, const GridSpec& g) {
    FamilyConvergence fc{family, limit, nested_event_limit(p, family, eps_seq, g), {}, true};
    for (const auto& step : fc.steps) {
        double d = sup_distance(step.conditional.density, target.density, probes);
        if (!fc.distances.empty() && !(d < fc.distances.back())) {
            fc.monotone = false;
        }
        fc.distances.push_back(d);
    }
    return fc;
}

} // namespace

const char* to_string(Conditioner c) { return c == Conditioner::Difference ? "difference" : "ratio"; }
const char* to_string(EventFamily f) { return f == EventFamily::Band ? "band" : "wedge"; }

DiagonalConditioningProblem exponential_diagonal_problem() {
    auto quadrant_axis = BaseMeasure::lebesgue(0, kInf);
    return {JointDensity::from_log(quadrant_axis, quadrant_axis, [](PointView p) {
        return p[0] < 0 || p[1] < 0 ? -kInf : -p[0] - p[1];
    })};
}

DiagonalConditioningProblem narrow_gaussian_problem(double width) {
    if (!(width > 0)) {
        throw Error(ErrorKind::InvalidScale, "width must be positive");
    }
    auto quadrant_axis = BaseMeasure::lebesgue(0, kInf);
    return {JointDensity::from_log(quadrant_axis, quadrant_axis, [width](PointView p) {
        if (p[0] < 0 || p[1] < 0) {
            return -kInf;
        }
        return dist::log_normal_pdf(p[0], 1.0, width) + dist::log_normal_pdf(p[1], 1.0, width);
    })};
}

DiagonalConditioningProblem reflected(const DiagonalConditioningProblem& p) {
    PointFunction lj = p.joint.density.log_function();
    return {JointDensity::from_log(p.joint.space_y, p.joint.space_x, [lj](PointView q) {
        double swapped[2] = {q[1], q[0]};
        return lj(swapped);
    })};
}

DiagonalDensity condition_via_variable(const DiagonalConditioningProblem& p, Conditioner which, const GridSpec& g) {
    PointFunction lj = p.joint.density.log_function();
    const BaseMeasure& v_space = p.joint.space_x;
    JointDensity changed = which == Conditioner::Difference
        ? JointDensity::from_log(v_space, BaseMeasure::lebesgue(-kInf, kInf),
                                 [lj](PointView q) {
                                     double v1v2[2] = {q[0], q[0] - q[1]};
                                     return lj(v1v2);
                                 })
        : JointDensity::from_log(v_space, BaseMeasure::lebesgue(0, kInf), [lj](PointView q) {
              double v = q[0], w = q[1];
              if (!(w > 0)) {
                  return -kInf;
              }
              double v1v2[2] = {v, v / w};
              // |d(v1, v2) / d(v, w)| = v / w^2
              return lj(v1v2) + std::log(v) - 2 * std::log(w);
          });
    ConditionalDensity c = condition_on_y(changed, g);
    double level = which == Conditioner::Difference ? 0.0 : 1.0;
    return tabulate(c.slice(Point{level}), g);
}

std::vector<NestedEventStep> nested_event_limit(const DiagonalConditioningProblem& p, EventFamily family,
                                                const std::vector<double>& eps_seq, const GridSpec& g) {
    for (std::size_t i = 0; i < eps_seq.size(); ++i) {
        if (!(eps_seq[i] > 0 && eps_seq[i] < 1) || (i > 0 && !(eps_seq[i] < eps_seq[i - 1]))) {
            throw Error(ErrorKind::DomainError, "eps sequence must be strictly decreasing inside (0, 1)");
        }
    }
    const PointFunction& joint = p.joint.density.eval_function();
    double top = truncate(p.joint.space_y.as_box().bounds.front(), g.truncation).hi;
    std::vector<NestedEventStep> out;
    for (double eps : eps_seq) {
        // Unnormalized section mass: integral of the joint over the event at v1 = v.
        auto section = [joint, family, eps, top, g](PointView v) {
            Interval iv = event_section(family, eps, v[0], top);
            if (!(iv.lo < iv.hi)) {
                return 0.0;
            }
            double v1 = v[0];
            return integrate(
                [&](PointView v2) {
                    double q[2] = {v1, v2[0]};
                    return joint(q);
                },
                BaseMeasure::lebesgue(iv.lo, iv.hi), g);
        };
        std::vector<double> pieces = section_kinks(family, eps, top);
        double prob = 0;
        for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
            prob += integrate(section, BaseMeasure::lebesgue(pieces[k], pieces[k + 1]), g);
        }
        if (!(prob > 0)) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "%s event with eps = %g has probability zero", to_string(family), eps);
            throw Error(ErrorKind::ZeroProbabilityEvent, msg);
        }
        Density d = Density::from_eval(
            p.joint.space_x, [section, prob](PointView v) { return section(v) / prob; }, true);
        out.push_back({eps, prob, tabulate(std::move(d), g)});
    }
    return out;
}

std::vector<double> probe_lattice(double lo, double hi, std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(lo + (hi - lo) * (double(i) + 0.5) / double(n));
    }
    return v;
}

double sup_distance(const Density& a, const Density& b, const std::vector<double>& probes) {
    double sup = 0;
    for (double v : probes) {
        Point p{v};
        sup = std::max(sup, std::abs(a.eval(p) - b.eval(p)));
    }
    return sup;
}

ParadoxReport paradox_report(const DiagonalConditioningProblem& p, const GridSpec& g,
                             const std::vector<double>& eps_seq) {
    check_grid(g);
    double top = truncate(p.joint.space_x.as_box().bounds.front(), g.truncation).hi;
    std::vector<double> probes = probe_lattice(0.0, top);
    DiagonalDensity diff = condition_via_variable(p, Conditioner::Difference, g);
    DiagonalDensity ratio = condition_via_variable(p, Conditioner::Ratio, g);
    double supdiff = sup_distance(diff.density, ratio.density, probes);
    FamilyConvergence band = converge(p, EventFamily::Band, Conditioner::Difference, diff, eps_seq, probes, g);
    FamilyConvergence wedge = converge(p, EventFamily::Wedge, Conditioner::Ratio, ratio, eps_seq, probes, g);

    char verdict[256];
    std::snprintf(verdict, sizeof verdict,
                  "the event {v1 = v2} alone determines no conditional density: through v1 - v2 the mean is %.6f, "
                  "through v1 / v2 it is %.6f",
                  diff.mean, ratio.mean);
    return ParadoxReport{std::move(diff), std::move(ratio), supdiff, std::move(band), std::move(wedge),
                         std::move(probes), verdict};
}

} // namespace mb
