#include "mb/measure.hpp"

#include "mb/error.hpp"
#include "mb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace mb {
namespace {

void check_interval(const Interval& iv) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo < iv.hi)) {
        std::ostringstream msg;
        msg << "interval bounds must satisfy lo < hi, got [" << iv.lo << ", " << iv.hi << "]";
        throw Error(ErrorKind::InvalidMeasure, msg.str());
    }
}

void check_box(const LebesgueBox& box) {
    if (box.bounds.empty()) {
        throw Error(ErrorKind::InvalidMeasure, "Lebesgue box needs at least one axis");
    }
    for (const auto& iv : box.bounds) {
        check_interval(iv);
    }
}

std::string format_point(PointView p) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < p.size(); ++i) {
        out << (i ? ", " : "") << p[i];
    }
    out << ')';
    return out.str();
}

// 1-D nodes and weights for one truncated axis.
void axis_rule(const Interval& iv, std::size_t n, QuadratureRule rule, std::vector<double>& nodes,
               std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    double width = iv.hi - iv.lo;
    if (rule == QuadratureRule::Midpoint) {
        double h = width / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            nodes[i] = iv.lo + (static_cast<double>(i) + 0.5) * h;
            weights[i] = h;
        }
    } else {
        double h = width / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            nodes[i] = (i + 1 == n) ? iv.hi : iv.lo + static_cast<double>(i) * h;
            weights[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
        }
    }
}

// Tensor-product grid of a box, written as one block of dimension box.dim.
void box_block(const LebesgueBox& box, const GridSpec& g, std::size_t& axis_counter,
               std::vector<double>& coords, std::vector<double>& weights) {
    std::size_t d = box.bounds.size();
    std::vector<std::vector<double>> axis_nodes(d), axis_weights(d);
    for (std::size_t a = 0; a < d; ++a) {
        axis_rule(truncate(box.bounds[a], g.truncation), g.nodes_for_axis(axis_counter++), g.rule,
                  axis_nodes[a], axis_weights[a]);
    }
    std::size_t total = 1;
    for (const auto& n : axis_nodes) {
        total *= n.size();
    }
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t k = 0; k < total; ++k) {
        double w = 1.0;
        for (std::size_t a = 0; a < d; ++a) {
            coords.push_back(axis_nodes[a][idx[a]]);
            w *= axis_weights[a][idx[a]];
        }
        weights.push_back(w);
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] < axis_nodes[a].size()) {
                break;
            }
            idx[a] = 0;
        }
    }
}

void append_groups(const BaseMeasure& m, const GridSpec& g, std::size_t& axis_counter,
                   std::size_t& offset, std::vector<AxisGroup>& out) {
    switch (m.kind()) {
    case MeasureKind::LebesgueBox:
        for (const auto& iv : m.as_box().bounds) {
            AxisGroup group;
            group.dim = 1;
            group.continuous = true;
            group.offset = offset++;
            axis_rule(truncate(iv, g.truncation), g.nodes_for_axis(axis_counter++), g.rule,
                      group.coords, group.weights);
            out.push_back(std::move(group));
        }
        break;
    case MeasureKind::CountingSet: {
        const auto& cs = m.as_counting();
        AxisGroup group;
        group.dim = cs.dim;
        group.offset = offset;
        for (const auto& p : cs.points) {
            for (long v : p) {
                group.coords.push_back(static_cast<double>(v));
            }
            group.weights.push_back(1.0);
        }
        offset += cs.dim;
        out.push_back(std::move(group));
        break;
    }
    case MeasureKind::PointMassMixture: {
        const auto& mix = m.as_mixture();
        AxisGroup group;
        group.dim = mix.continuous.bounds.size();
        group.offset = offset;
        for (std::size_t a = 0; a < mix.atoms.size(); ++a) {
            group.coords.insert(group.coords.end(), mix.atoms[a].begin(), mix.atoms[a].end());
            group.weights.push_back(mix.atom_weights[a]);
        }
        box_block(mix.continuous, g, axis_counter, group.coords, group.weights);
        offset += group.dim;
        out.push_back(std::move(group));
        break;
    }
    case MeasureKind::Product:
        for (const auto& f : m.as_product().factors) {
            append_groups(f, g, axis_counter, offset, out);
        }
        break;
    }
}

double nested_sum(const PointFunction& f, const Grid& grid, const std::vector<std::size_t>& order,
                  std::size_t level, std::vector<double>& buffer) {
    const AxisGroup& group = grid.groups()[order[level]];
    bool leaf = level + 1 == order.size();
    CompensatedSum acc;
    for (std::size_t i = 0; i < group.size(); ++i) {
        PointView node = group.node(i);
        std::copy(node.begin(), node.end(), buffer.begin() + static_cast<std::ptrdiff_t>(group.offset));
        double value;
        if (leaf) {
            value = f(buffer);
            if (!std::isfinite(value)) {
                throw Error(ErrorKind::NonFiniteIntegrand,
                            "integrand is " + std::to_string(value) + " at " + format_point(buffer));
            }
        } else {
            value = nested_sum(f, grid, order, level + 1, buffer);
        }
        acc.add(group.weights[i] * value);
    }
    return acc.value();
}

} // namespace

// --- BaseMeasure -----------------------------------------------------------

BaseMeasure BaseMeasure::lebesgue(std::vector<Interval> bounds) {
    LebesgueBox box{std::move(bounds)};
    check_box(box);
    return BaseMeasure(std::move(box));
}

BaseMeasure BaseMeasure::lebesgue(double lo, double hi) { return lebesgue({Interval{lo, hi}}); }

BaseMeasure BaseMeasure::counting(std::vector<std::vector<long>> points) {
    CountingSet cs;
    cs.dim = points.empty() ? 1 : points.front().size();
    if (cs.dim == 0) {
        throw Error(ErrorKind::InvalidMeasure, "counting set points need at least one coordinate");
    }
    std::set<std::vector<long>> seen;
    for (const auto& p : points) {
        if (p.size() != cs.dim) {
            throw Error(ErrorKind::InvalidMeasure, "counting set points have mixed dimensions");
        }
        if (!seen.insert(p).second) {
            throw Error(ErrorKind::InvalidMeasure, "counting set points must be distinct");
        }
    }
    cs.points = std::move(points);
    return BaseMeasure(std::move(cs));
}

BaseMeasure BaseMeasure::counting_range(long lo, long hi) {
    std::vector<std::vector<long>> points;
    for (long k = lo; k <= hi; ++k) {
        points.push_back({k});
    }
    return counting(std::move(points));
}

BaseMeasure BaseMeasure::mixture(std::vector<Point> atoms, LebesgueBox continuous,
                                 std::vector<double> atom_weights) {
    check_box(continuous);
    std::size_t d = continuous.bounds.size();
    if (atom_weights.empty()) {
        atom_weights.assign(atoms.size(), 1.0);
    }
    if (atom_weights.size() != atoms.size()) {
        throw Error(ErrorKind::InvalidMeasure, "one weight per atom is required");
    }
    std::set<Point> seen;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        if (atoms[a].size() != d) {
            throw Error(ErrorKind::InvalidMeasure, "atom dimension differs from the continuous part");
        }
        if (!(atom_weights[a] > 0.0) || !std::isfinite(atom_weights[a])) {
            throw Error(ErrorKind::InvalidMeasure, "atom weights must be positive and finite");
        }
        if (!seen.insert(atoms[a]).second) {
            throw Error(ErrorKind::InvalidMeasure, "atoms must be distinct");
        }
    }
    return BaseMeasure(PointMassMixture{std::move(atoms), std::move(atom_weights), std::move(continuous)});
}

MeasureKind BaseMeasure::kind() const noexcept { return static_cast<MeasureKind>(repr_.index()); }

std::size_t BaseMeasure::dim() const noexcept {
    switch (kind()) {
    case MeasureKind::LebesgueBox: return as_box().bounds.size();
    case MeasureKind::CountingSet: return as_counting().dim;
    case MeasureKind::PointMassMixture: return as_mixture().continuous.bounds.size();
    case MeasureKind::Product: {
        std::size_t d = 0;
        for (const auto& f : as_product().factors) {
            d += f.dim();
        }
        return d;
    }
    }
    return 0;
}

std::vector<BaseMeasure> BaseMeasure::factors() const {
    if (kind() == MeasureKind::Product) {
        return as_product().factors;
    }
    return {*this};
}

double BaseMeasure::point_mass(PointView p) const {
    switch (kind()) {
    case MeasureKind::LebesgueBox: return 0.0;
    case MeasureKind::CountingSet:
        for (const auto& q : as_counting().points) {
            if (std::equal(q.begin(), q.end(), p.begin(), p.end(),
                           [](long a, double b) { return static_cast<double>(a) == b; })) {
                return 1.0;
            }
        }
        return 0.0;
    case MeasureKind::PointMassMixture: {
        const auto& mix = as_mixture();
        for (std::size_t a = 0; a < mix.atoms.size(); ++a) {
            if (std::equal(mix.atoms[a].begin(), mix.atoms[a].end(), p.begin(), p.end())) {
                return mix.atom_weights[a];
            }
        }
        return 0.0;
    }
    case MeasureKind::Product: {
        double mass = 1.0;
        std::size_t offset = 0;
        for (const auto& f : as_product().factors) {
            mass *= f.point_mass(p.subspan(offset, f.dim()));
            offset += f.dim();
        }
        return mass;
    }
    }
    return 0.0;
}

std::string BaseMeasure::describe() const {
    std::ostringstream out;
    switch (kind()) {
    case MeasureKind::LebesgueBox:
        out << "Lebesgue";
        for (const auto& iv : as_box().bounds) {
            out << '[' << iv.lo << ", " << iv.hi << ']';
        }
        break;
    case MeasureKind::CountingSet:
        out << "Counting{" << as_counting().points.size() << " points, dim " << as_counting().dim << '}';
        break;
    case MeasureKind::PointMassMixture:
        out << "Mixture{" << as_mixture().atoms.size() << " atoms + "
            << BaseMeasure(as_mixture().continuous).describe() << '}';
        break;
    case MeasureKind::Product: {
        const auto& fs = as_product().factors;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            out << (i ? " x " : "") << fs[i].describe();
        }
        break;
    }
    }
    return out.str();
}

BaseMeasure product_measure(std::vector<BaseMeasure> factors) {
    if (factors.empty()) {
        throw Error(ErrorKind::InvalidMeasure, "product needs at least one factor");
    }
    ProductMeasure prod;
    for (auto& f : factors) {
        if (f.kind() == MeasureKind::Product) {
            const auto& inner = f.as_product().factors;
            prod.factors.insert(prod.factors.end(), inner.begin(), inner.end());
        } else {
            prod.factors.push_back(std::move(f));
        }
    }
    return BaseMeasure(std::move(prod));
}

BaseMeasure product_measure(const BaseMeasure& a, const BaseMeasure& b) {
    return product_measure(std::vector<BaseMeasure>{a, b});
}

// --- GridSpec / Grid ---------------------------------------------------------

void GridSpec::validate() const {
    auto check_count = [this](std::size_t n) {
        if (n < 1 || (rule == QuadratureRule::Trapezoid && n < 2)) {
            throw Error(ErrorKind::InvalidGrid, "node count " + std::to_string(n) +
                                                    " is too small for the quadrature rule");
        }
    };
    check_count(nodes);
    for (std::size_t n : axis_nodes) {
        check_count(n);
    }
    if (!std::isfinite(truncation) || !(truncation > 0.0)) {
        throw Error(ErrorKind::InvalidGrid, "truncation bound must be finite and positive");
    }
    if (!(tail_tolerance >= 0.0)) {
        throw Error(ErrorKind::InvalidGrid, "tail tolerance must be nonnegative");
    }
}

std::size_t GridSpec::nodes_for_axis(std::size_t axis) const {
    return axis < axis_nodes.size() ? axis_nodes[axis] : nodes;
}

Interval truncate(const Interval& iv, double truncation) {
    Interval out = iv;
    if (std::isinf(out.lo)) {
        out.lo = out.lo < 0 ? -truncation : truncation;
    }
    if (std::isinf(out.hi)) {
        out.hi = out.hi < 0 ? -truncation : truncation;
    }
    if (!(out.lo < out.hi)) {
        std::ostringstream msg;
        msg << "interval [" << iv.lo << ", " << iv.hi << "] is empty after truncation at " << truncation;
        throw Error(ErrorKind::InvalidGrid, msg.str());
    }
    return out;
}

Grid::Grid(std::vector<AxisGroup> groups, std::size_t dim)
    : groups_(std::move(groups)), dim_(dim), size_(1) {
    for (const auto& g : groups_) {
        size_ *= g.size();
    }
}

void Grid::node(std::size_t flat, std::span<double> out) const {
    for (std::size_t k = groups_.size(); k-- > 0;) {
        const AxisGroup& group = groups_[k];
        std::size_t i = flat % group.size();
        flat /= group.size();
        PointView p = group.node(i);
        std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(group.offset));
    }
}

Point Grid::node(std::size_t flat) const {
    Point p(dim_);
    node(flat, p);
    return p;
}

double Grid::weight(std::size_t flat) const {
    double w = 1.0;
    for (std::size_t k = groups_.size(); k-- > 0;) {
        const AxisGroup& group = groups_[k];
        w *= group.weights[flat % group.size()];
        flat /= group.size();
    }
    return w;
}

std::vector<std::size_t> Grid::multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(groups_.size());
    for (std::size_t k = groups_.size(); k-- > 0;) {
        idx[k] = flat % groups_[k].size();
        flat /= groups_[k].size();
    }
    return idx;
}

Grid make_grid(const BaseMeasure& m, const GridSpec& g) {
    g.validate();
    std::vector<AxisGroup> groups;
    std::size_t axis_counter = 0;
    std::size_t offset = 0;
    append_groups(m, g, axis_counter, offset, groups);
    return Grid(std::move(groups), offset);
}

// --- Summation and integration ----------------------------------------------

void CompensatedSum::add(double x) noexcept {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double integrate_ordered(const PointFunction& f, const Grid& grid, const std::vector<std::size_t>& order) {
    for (const auto& group : grid.groups()) {
        if (group.size() == 0) {
            throw Error(ErrorKind::EmptyMeasure, "cannot integrate over an empty counting set");
        }
    }
    const AxisGroup& outer = grid.groups()[order.front()];
    std::size_t inner_size = grid.size() / outer.size();
    std::vector<double> rows(outer.size());
    parallel_for(outer.size(), inner_size, [&](std::size_t i) {
        std::vector<double> buffer(grid.dim());
        PointView node = outer.node(i);
        std::copy(node.begin(), node.end(), buffer.begin() + static_cast<std::ptrdiff_t>(outer.offset));
        double value;
        if (order.size() == 1) {
            value = f(buffer);
            if (!std::isfinite(value)) {
                throw Error(ErrorKind::NonFiniteIntegrand,
                            "integrand is " + std::to_string(value) + " at " + format_point(buffer));
            }
        } else {
            value = nested_sum(f, grid, order, 1, buffer);
        }
        rows[i] = outer.weights[i] * value;
    });
    CompensatedSum total;
    for (double r : rows) {
        total.add(r);
    }
    return total.value();
}

double integrate(const PointFunction& f, const BaseMeasure& m, const GridSpec& g) {
    Grid grid = make_grid(m, g);
    std::vector<std::size_t> order(grid.groups().size());
    std::iota(order.begin(), order.end(), 0);
    return integrate_ordered(f, grid, order);
}

std::vector<double> evaluate_on_grid(const PointFunction& f, const Grid& grid) {
    std::vector<double> values(grid.size());
    if (grid.size() == 0) {
        return values;
    }
    const std::size_t outer = grid.groups().front().size();
    const std::size_t inner = grid.size() / outer;
    parallel_for(outer, inner, [&](std::size_t i) {
        std::vector<double> buffer(grid.dim());
        for (std::size_t j = 0; j < inner; ++j) {
            std::size_t flat = i * inner + j;
            grid.node(flat, buffer);
            values[flat] = f(buffer);
        }
    });
    return values;
}

double log_integrate(const PointFunction& log_f, const BaseMeasure& m, const GridSpec& g) {
    Grid grid = make_grid(m, g);
    if (grid.size() == 0) {
        throw Error(ErrorKind::EmptyMeasure, "cannot integrate over an empty counting set");
    }
    std::vector<double> values = evaluate_on_grid(log_f, grid);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorKind::NonFiniteIntegrand,
                        "log integrand is " + std::to_string(v) + " at " + format_point(grid.node(i)));
        }
        peak = std::max(peak, v);
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
        return peak;
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total.add(grid.weight(i) * std::exp(values[i] - peak));
    }
    return peak + std::log(total.value());
}

std::pair<double, double> tonelli_check(const PointFunction& f, const BaseMeasure& a,
                                        const BaseMeasure& b, const GridSpec& g) {
    Grid grid = make_grid(product_measure(a, b), g);
    // Groups belonging to `a` come first in the flattened grid.
    Grid grid_a = make_grid(a, g);
    std::size_t na = grid_a.groups().size();
    std::size_t total = grid.groups().size();
    std::vector<std::size_t> x_inner, y_inner;
    for (std::size_t k = na; k < total; ++k) {
        x_inner.push_back(k);
    }
    for (std::size_t k = 0; k < na; ++k) {
        x_inner.push_back(k);
        y_inner.push_back(k);
    }
    for (std::size_t k = na; k < total; ++k) {
        y_inner.push_back(k);
    }
    return {integrate_ordered(f, grid, x_inner), integrate_ordered(f, grid, y_inner)};
}

// --- Density -----------------------------------------------------------------

Density::Density(BaseMeasure space, PointFunction eval, PointFunction log_eval, bool normalized)
    : space_(std::move(space)), eval_(std::move(eval)), log_eval_(std::move(log_eval)),
      normalized_(normalized) {}

Density Density::from_log(BaseMeasure space, PointFunction log_eval, bool normalized) {
    PointFunction eval = [log_eval](PointView p) { return std::exp(log_eval(p)); };
    return Density(std::move(space), std::move(eval), std::move(log_eval), normalized);
}

Density Density::from_eval(BaseMeasure space, PointFunction eval, bool normalized) {
    PointFunction log_eval = [eval](PointView p) { return std::log(eval(p)); };
    return Density(std::move(space), std::move(eval), std::move(log_eval), normalized);
}

NormalizedDensity normalize(const Density& d, const GridSpec& g) {
    double log_z;
    try {
        log_z = log_integrate(d.log_function(), d.space(), g);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NonFiniteIntegrand) {
            throw Error(ErrorKind::DivergentMass, e.what());
        }
        throw;
    }
    if (log_z == -std::numeric_limits<double>::infinity()) {
        throw Error(ErrorKind::ZeroMass, "density integrates to zero over " + d.space().describe());
    }
    if (!std::isfinite(log_z)) {
        throw Error(ErrorKind::DivergentMass, "density integral is not finite over " + d.space().describe());
    }
    PointFunction log_f = d.log_function();
    Density out = Density::from_log(
        d.space(), [log_f, log_z](PointView p) { return log_f(p) - log_z; }, true);
    return {std::move(out), log_z};
}

} // namespace mb
