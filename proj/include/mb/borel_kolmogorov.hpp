#pragma once

#include "mb/conditional.hpp"

#include <string>
#include <vector>

namespace mb {

/// A joint density of (v1, v2) on the closed positive quadrant and the
/// zero-probability event {v1 = v2}. The event is the level set Z = 0 of
/// Z = v1 - v2 and also the level set W = 1 of W = v1 / v2.
struct DiagonalConditioningProblem {
    JointDensity joint;  // x = v1, y = v2
};

/// Independent Exp(1) x Exp(1).
DiagonalConditioningProblem exponential_diagonal_problem();

/// Independent Normal(1, width) x Normal(1, width), restricted to the quadrant.
DiagonalConditioningProblem narrow_gaussian_problem(double width);

/// The same joint with v1 and v2 exchanged.
DiagonalConditioningProblem reflected(const DiagonalConditioningProblem& p);

enum class Conditioner { Difference, Ratio };
enum class EventFamily { Band, Wedge };

const char* to_string(Conditioner c);
const char* to_string(EventFamily f);

/// A density of the diagonal coordinate v = v1 tabulated on the grid it was
/// built with.
struct DiagonalDensity {
    Density density;
    std::vector<double> grid;
    std::vector<double> values;
    double mean;
};

/// Changes variables to (v, z = v1 - v2) or (v, w = v1 / v2), conditions on
/// the new coordinate with condition_on_y and returns the slice at z = 0 or w = 1.
DiagonalDensity condition_via_variable(const DiagonalConditioningProblem& p, Conditioner which, const GridSpec& g);

struct NestedEventStep {
    double eps;
    double event_probability;
    DiagonalDensity conditional;
};

/// Density of v1 given the positive-probability event
/// band: |v1 - v2| < eps, or wedge: |v1 / v2 - 1| < eps.
/// eps_seq must be strictly decreasing with 0 < eps < 1.
/// Throws ZeroProbabilityEvent if an event is null under the truncated joint.
std::vector<NestedEventStep> nested_event_limit(const DiagonalConditioningProblem& p, EventFamily family,
                                                const std::vector<double>& eps_seq, const GridSpec& g);

inline const std::vector<double> kDefaultEpsilons = {0.2, 0.1, 0.05, 0.025};

/// n midpoints of [lo, hi].
std::vector<double> probe_lattice(double lo, double hi, std::size_t n = 64);

double sup_distance(const Density& a, const Density& b, const std::vector<double>& probes);

struct FamilyConvergence {
    EventFamily family;
    Conditioner limit;
    std::vector<NestedEventStep> steps;
    /// Sup distance on the probe lattice to the matching conditional, per eps.
    std::vector<double> distances;
    bool monotone;
};

struct ParadoxReport {
    DiagonalDensity difference;
    DiagonalDensity ratio;
    /// Sup distance between the two conditionals on the probe lattice.
    double supdiff;
    FamilyConvergence band;
    FamilyConvergence wedge;
    std::vector<double> probes;
    std::string verdict;
};

/// Throws GridTooCoarse for fewer than 16 nodes per axis.
ParadoxReport paradox_report(const DiagonalConditioningProblem& p, const GridSpec& g,
                             const std::vector<double>& eps_seq = kDefaultEpsilons);

} // namespace mb
