#pragma once

#include "mb/bayes.hpp"
#include "mb/measure.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// A line-oriented language for small hierarchical models:
//
//   # comment
//   const NAME = expr
//   param NAME ~ family(expr, ...) [in [lo, hi]]
//   data  NAME ~ family(expr, ...) [in [lo, hi]]
//
// Families: normal(mean, sd), gamma(shape, rate), exponential(rate),
// uniform(lo, hi), poisson(rate). Names may be referenced before they are
// declared; the reference graph must be acyclic.

namespace mb::dsl {

enum class ExprKind { Number, Ref, Neg, Add, Sub, Mul, Div, Pow, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    double value = 0;   // Number
    std::string name;   // Ref
    ExprPtr lhs;        // operand of Neg / Abs, left operand otherwise
    ExprPtr rhs;
    int line = 0;
    int column = 0;
};

/// Structural equality; source positions are ignored.
bool same_structure(const Expr& a, const Expr& b);

/// Names referenced by e, in first-occurrence order.
std::vector<std::string> references(const Expr& e);

enum class Family { Normal, Gamma, Exponential, Uniform, Poisson };

const char* to_string(Family f);
std::size_t arity(Family f);

enum class NodeKind { Const, Param, Data };

const char* to_string(NodeKind k);

struct Node {
    std::string name;
    NodeKind kind;
    Family family = Family::Normal;  // Param / Data
    std::vector<ExprPtr> args;       // Param / Data
    ExprPtr value;                   // Const
    /// `in [lo, hi]` clause: restricts the node's support (no renormalization).
    std::optional<std::pair<ExprPtr, ExprPtr>> bounds;
    int line = 0;
    int column = 0;  // of the name
};

struct ModelGraph {
    std::vector<Node> nodes;

    std::optional<std::size_t> find(std::string_view name) const;
    std::vector<std::string> names(NodeKind kind) const;
    /// (parent, child) for every reference, in declaration order of the child.
    std::vector<std::pair<std::string, std::string>> edges() const;
    /// Node indices with every node after the nodes it references.
    std::vector<std::size_t> topological_order() const;
};

/// Structural equality of graphs: same nodes in the same order.
bool same_structure(const ModelGraph& a, const ModelGraph& b);

/// Throws ParseError (Syntax, UnknownDistribution, UndefinedReference,
/// DuplicateName, CycleDetected, InvalidReference, NoNodes) with a position.
ModelGraph parse(std::string_view text);

/// One line per node, declaration order, single spaces, lowercase families,
/// numbers in shortest round-trip form.
std::string print_canonical(const ModelGraph& g);
std::string print_expr(const Expr& e);

struct CompiledModel {
    std::vector<std::string> param_names;
    std::vector<std::string> data_names;
    BaseMeasure param_space;
    /// A single dummy atom {0} when there are no data nodes.
    BaseMeasure data_space;
    /// Product of the param-node densities. Not normalized over bounded
    /// supports.
    Density prior;
    /// Sum of the data-node log densities; y in data_names order, theta in
    /// param_names order.
    LogLikelihood log_likelihood;

    BayesModel model() const { return {prior, log_likelihood, data_space, param_space}; }
};

/// Throws NoNodes without param nodes, and InvalidScale (naming the node) when a scale argument is not
/// positive. Arguments that only involve constants are checked here; the
/// others at evaluation time.
CompiledModel compile_joint(const ModelGraph& g);

/// Orders name=value bindings to match data_names. Throws UnboundData naming
/// the first missing or unknown node, or a node bound twice.
Point bind_data(const CompiledModel& m, const std::vector<std::pair<std::string, double>>& bindings);

} // namespace mb::dsl
