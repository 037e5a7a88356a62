#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mb {

using Point = std::vector<double>;
using PointView = std::span<const double>;

/// Scalar function of a point. Used both for plain evaluators (densities,
/// integrands) and for their logarithms.
using PointFunction = std::function<double(PointView)>;

struct Interval {
    double lo;
    double hi;

    bool operator==(const Interval&) const = default;
};

class BaseMeasure;

/// Lebesgue measure on an axis-aligned box. Infinite ends are allowed and are
/// cut at the grid's truncation bound during integration.
struct LebesgueBox {
    std::vector<Interval> bounds;
};

/// Counting measure on a finite set of integer tuples.
struct CountingSet {
    std::size_t dim = 1;
    std::vector<std::vector<long>> points;
};

/// Sum of weighted Dirac atoms and Lebesgue measure on a box (spike and slab).
struct PointMassMixture {
    std::vector<Point> atoms;
    std::vector<double> atom_weights;
    LebesgueBox continuous;
};

struct ProductMeasure {
    std::vector<BaseMeasure> factors;
};

enum class MeasureKind { LebesgueBox, CountingSet, PointMassMixture, Product };

class BaseMeasure {
public:
    static BaseMeasure lebesgue(std::vector<Interval> bounds);
    static BaseMeasure lebesgue(double lo, double hi);
    static BaseMeasure counting(std::vector<std::vector<long>> points);
    /// One-dimensional counting measure on {lo, lo + 1, ..., hi}.
    static BaseMeasure counting_range(long lo, long hi);
    static BaseMeasure mixture(std::vector<Point> atoms, LebesgueBox continuous,
                               std::vector<double> atom_weights = {});

    MeasureKind kind() const noexcept;
    std::size_t dim() const noexcept;

    const LebesgueBox& as_box() const { return std::get<LebesgueBox>(repr_); }
    const CountingSet& as_counting() const { return std::get<CountingSet>(repr_); }
    const PointMassMixture& as_mixture() const { return std::get<PointMassMixture>(repr_); }
    const ProductMeasure& as_product() const { return std::get<ProductMeasure>(repr_); }

    /// Factor list; a non-product measure is its own single factor.
    std::vector<BaseMeasure> factors() const;

    /// Measure of the singleton {p}.
    double point_mass(PointView p) const;

    std::string describe() const;

private:
    using Repr = std::variant<LebesgueBox, CountingSet, PointMassMixture, ProductMeasure>;
    explicit BaseMeasure(Repr repr) : repr_(std::move(repr)) {}

    friend BaseMeasure product_measure(const BaseMeasure& a, const BaseMeasure& b);
    friend BaseMeasure product_measure(std::vector<BaseMeasure> factors);

    Repr repr_;
};

/// Product of two measures; nested products are flattened into one ordered
/// factor list.
BaseMeasure product_measure(const BaseMeasure& a, const BaseMeasure& b);
BaseMeasure product_measure(std::vector<BaseMeasure> factors);

enum class QuadratureRule { Midpoint, Trapezoid };

struct GridSpec {
    std::size_t nodes = 2048;
    /// Optional per-continuous-axis override of `nodes`, in axis order.
    std::vector<std::size_t> axis_nodes;
    QuadratureRule rule = QuadratureRule::Midpoint;
    /// Infinite ends are replaced by -truncation / +truncation.
    double truncation = 30.0;
    /// Tail mass the caller accepts beyond the truncation bound.
    double tail_tolerance = 1e-9;

    void validate() const;
    std::size_t nodes_for_axis(std::size_t axis) const;
};

/// Quadrature nodes for one independent block of coordinates. A Lebesgue
/// axis is a 1-D block; a counting set or a mixture is one block of its
/// full dimension.
struct AxisGroup {
    std::size_t dim = 1;
    bool continuous = false;
    /// Index of the first coordinate of this block in the full point.
    std::size_t offset = 0;
    std::vector<double> coords;  // size() * dim values, node-major
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    PointView node(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

/// Tensor-product grid over a measure. Flat node indices are lexicographic
/// with the first group outermost.
class Grid {
public:
    Grid(std::vector<AxisGroup> groups, std::size_t dim);

    const std::vector<AxisGroup>& groups() const noexcept { return groups_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return size_; }

    void node(std::size_t flat, std::span<double> out) const;
    Point node(std::size_t flat) const;
    double weight(std::size_t flat) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;

private:
    std::vector<AxisGroup> groups_;
    std::size_t dim_;
    std::size_t size_;
};

Grid make_grid(const BaseMeasure& m, const GridSpec& g);

/// Replaces infinite ends of an interval by the truncation bound.
Interval truncate(const Interval& iv, double truncation);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Quadrature approximation of the integral of f against m. Counting blocks
/// are summed exactly; continuous axes use the rule in g. The result is an
/// iterated sum in axis-major order and does not depend on the worker count.
double integrate(const PointFunction& f, const BaseMeasure& m, const GridSpec& g);

/// Same as integrate, with the iteration order given explicitly as a
/// permutation of the grid's groups (outermost first).
double integrate_ordered(const PointFunction& f, const Grid& grid,
                         const std::vector<std::size_t>& order);

/// log of the integral of exp(log_f), computed with a max shift so that
/// very small or very large integrands do not under/overflow.
/// Returns -inf when every node has zero density.
double log_integrate(const PointFunction& log_f, const BaseMeasure& m, const GridSpec& g);

/// Evaluates f at every node of the grid, in flat index order.
std::vector<double> evaluate_on_grid(const PointFunction& f, const Grid& grid);

/// (dx then dy, dy then dx) iterated integrals of f over a x b.
std::pair<double, double> tonelli_check(const PointFunction& f, const BaseMeasure& a,
                                        const BaseMeasure& b, const GridSpec& g);

/// A nonnegative evaluator paired with the measure it is a density against.
class Density {
public:
    static Density from_log(BaseMeasure space, PointFunction log_eval, bool normalized = false);
    static Density from_eval(BaseMeasure space, PointFunction eval, bool normalized = false);

    double eval(PointView p) const { return eval_(p); }
    double log_eval(PointView p) const { return log_eval_(p); }

    const PointFunction& eval_function() const noexcept { return eval_; }
    const PointFunction& log_function() const noexcept { return log_eval_; }

    const BaseMeasure& space() const noexcept { return space_; }
    bool normalized() const noexcept { return normalized_; }

private:
    Density(BaseMeasure space, PointFunction eval, PointFunction log_eval, bool normalized);

    BaseMeasure space_;
    PointFunction eval_;
    PointFunction log_eval_;
    bool normalized_;
};

struct NormalizedDensity {
    Density density;
    double log_constant;
};

NormalizedDensity normalize(const Density& d, const GridSpec& g);

} // namespace mb
