#include "mb/model_dsl.hpp"

#include "mb/distributions.hpp"
#include "mb/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace mb::dsl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- lexing

enum class Tok { Name, Number, Symbol, End };

struct Token {
    Tok type;
    std::string text;
    double number = 0;
    int line;
    int column;
};

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void syntax(int line, int column, const std::string& msg) {
    throw ParseError(ErrorKind::Syntax, line, column, msg);
}

// Columns count code points, not bytes.
std::vector<Token> lex_line(std::string_view s, int line) {
    std::vector<Token> out;
    std::size_t i = 0;
    int column = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
                ++column;
            }
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            advance(1);
            continue;
        }
        if (c == '#') {
            break;
        }
        int start_col = column;
        if (is_name_start(c)) {
            std::size_t j = i;
            while (j < s.size() && is_name_char(s[j])) {
                ++j;
            }
            out.push_back({Tok::Name, std::string(s.substr(i, j - i)), 0, line, start_col});
            advance(j - i);
            continue;
        }
        if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
            std::size_t j = i;
            while (j < s.size() && is_digit(s[j])) {
                ++j;
            }
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && is_digit(s[j])) {
                    ++j;
                }
            }
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) {
                    ++k;
                }
                if (k < s.size() && is_digit(s[k])) {
                    while (k < s.size() && is_digit(s[k])) {
                        ++k;
                    }
                    j = k;
                } else {
                    syntax(line, start_col, "malformed exponent in number");
                }
            }
            if (j < s.size() && is_name_start(s[j])) {
                syntax(line, start_col, "malformed number");
            }
            double v = 0;
            auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + j, v);
            if (ec != std::errc() || ptr != s.data() + j || !std::isfinite(v)) {
                syntax(line, start_col, "number out of range");
            }
            Token t{Tok::Number, std::string(s.substr(i, j - i)), v, line, start_col};
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (std::string_view("~=(),[]+-*/^").find(c) != std::string_view::npos) {
            out.push_back({Tok::Symbol, std::string(1, c), 0, line, start_col});
            advance(1);
            continue;
        }
        syntax(line, start_col, "unexpected character");
    }
    out.push_back({Tok::End, "", 0, line, column});
    return out;
}

// ---------------------------------------------------------------- parsing

const std::set<std::string, std::less<>> kReserved = {"const", "param", "data", "in", "abs"};

std::optional<Family> family_from_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "normal") return Family::Normal;
    if (name == "gamma") return Family::Gamma;
    if (name == "exponential") return Family::Exponential;
    if (name == "uniform") return Family::Uniform;
    if (name == "poisson") return Family::Poisson;
    return std::nullopt;
}

class LineParser {
public:
    explicit LineParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_symbol(char c) const { return peek().type == Tok::Symbol && peek().text[0] == c; }

    const Token& expect_symbol(char c, const char* what) {
        if (!at_symbol(c)) {
            fail(std::string("expected ") + what);
        }
        return take();
    }

    const Token& expect_name(const char* what) {
        if (peek().type != Tok::Name) {
            fail(std::string("expected ") + what);
        }
        return take();
    }

    void expect_end() {
        if (peek().type != Tok::End) {
            fail("unexpected '" + peek().text + "' after statement");
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string got = peek().type == Tok::End ? "end of line" : "'" + peek().text + "'";
        syntax(peek().line, peek().column, msg + ", found " + got);
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        while (at_symbol('+') || at_symbol('-')) {
            const Token& op = take();
            lhs = binary(op.text[0] == '+' ? ExprKind::Add : ExprKind::Sub, lhs, term(), op);
        }
        return lhs;
    }

private:
    static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b, const Token& at) {
        return std::make_shared<Expr>(Expr{k, 0, "", std::move(a), std::move(b), at.line, at.column});
    }

    ExprPtr term() {
        ExprPtr lhs = unary();
        while (at_symbol('*') || at_symbol('/')) {
            const Token& op = take();
            lhs = binary(op.text[0] == '*' ? ExprKind::Mul : ExprKind::Div, lhs, unary(), op);
        }
        return lhs;
    }

    ExprPtr unary() {
        if (at_symbol('-')) {
            const Token& op = take();
            return binary(ExprKind::Neg, unary(), nullptr, op);
        }
        ExprPtr base = primary();
        if (at_symbol('^')) {
            const Token& op = take();
            return binary(ExprKind::Pow, base, unary(), op);
        }
        return base;
    }

    ExprPtr primary() {
        const Token& t = peek();
        if (t.type == Tok::Number) {
            take();
            return std::make_shared<Expr>(Expr{ExprKind::Number, t.number, "", nullptr, nullptr, t.line, t.column});
        }
        if (t.type == Tok::Name) {
            take();
            if (t.text == "abs") {
                expect_symbol('(', "'(' after abs");
                ExprPtr inner = expr();
                expect_symbol(')', "')'");
                return binary(ExprKind::Abs, inner, nullptr, t);
            }
            if (kReserved.count(t.text)) {
                syntax(t.line, t.column, "'" + t.text + "' is a keyword");
            }
            return std::make_shared<Expr>(Expr{ExprKind::Ref, 0, t.text, nullptr, nullptr, t.line, t.column});
        }
        if (at_symbol('(')) {
            take();
            ExprPtr inner = expr();
            expect_symbol(')', "')'");
            return inner;
        }
        fail("expected a number, a name or '('");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

Node parse_statement(LineParser& p) {
    const Token& kw = p.expect_name("const, param or data");
    Node n;
    if (kw.text == "const") {
        n.kind = NodeKind::Const;
    } else if (kw.text == "param") {
        n.kind = NodeKind::Param;
    } else if (kw.text == "data") {
        n.kind = NodeKind::Data;
    } else {
        syntax(kw.line, kw.column, "expected const, param or data, found '" + kw.text + "'");
    }
    const Token& name = p.expect_name("a node name");
    if (kReserved.count(name.text)) {
        syntax(name.line, name.column, "'" + name.text + "' is a keyword");
    }
    n.name = name.text;
    n.line = name.line;
    n.column = name.column;

    if (n.kind == NodeKind::Const) {
        p.expect_symbol('=', "'='");
        n.value = p.expr();
        p.expect_end();
        return n;
    }

    p.expect_symbol('~', "'~'");
    const Token& fam = p.expect_name("a distribution family");
    auto family = family_from_name(fam.text);
    if (!family) {
        throw ParseError(ErrorKind::UnknownDistribution, fam.line, fam.column,
                         "unknown distribution '" + fam.text + "'");
    }
    n.family = *family;
    p.expect_symbol('(', "'('");
    if (!p.at_symbol(')')) {
        n.args.push_back(p.expr());
        while (p.at_symbol(',')) {
            p.take();
            n.args.push_back(p.expr());
        }
    }
    p.expect_symbol(')', "',' or ')'");
    if (n.args.size() != arity(n.family)) {
        syntax(fam.line, fam.column,
               std::string(to_string(n.family)) + " takes " + std::to_string(arity(n.family)) + " argument" +
                   (arity(n.family) == 1 ? "" : "s") + ", got " + std::to_string(n.args.size()));
    }
    if (p.peek().type == Tok::Name && p.peek().text == "in") {
        p.take();
        p.expect_symbol('[', "'['");
        ExprPtr lo = p.expr();
        p.expect_symbol(',', "','");
        ExprPtr hi = p.expr();
        p.expect_symbol(']', "']'");
        n.bounds = std::make_pair(lo, hi);
    }
    p.expect_end();
    return n;
}

void collect_refs(const Expr& e, std::vector<const Expr*>& out) {
    if (e.kind == ExprKind::Ref) {
        out.push_back(&e);
    }
    if (e.lhs) collect_refs(*e.lhs, out);
    if (e.rhs) collect_refs(*e.rhs, out);
}

// Every Ref in the node, with the role it plays.
struct RefSite {
    const Expr* ref;
    bool in_bounds;
};

std::vector<RefSite> node_refs(const Node& n) {
    std::vector<const Expr*> refs;
    std::vector<RefSite> out;
    if (n.value) collect_refs(*n.value, refs);
    for (const auto& a : n.args) collect_refs(*a, refs);
    for (const Expr* r : refs) out.push_back({r, false});
    if (n.bounds) {
        refs.clear();
        collect_refs(*n.bounds->first, refs);
        collect_refs(*n.bounds->second, refs);
        for (const Expr* r : refs) out.push_back({r, true});
    }
    return out;
}

void validate(const ModelGraph& g) {
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        auto [it, fresh] = index.emplace(n.name, i);
        if (!fresh) {
            throw ParseError(ErrorKind::DuplicateName, n.line, n.column,
                             "'" + n.name + "' is already declared on line " +
                                 std::to_string(g.nodes[it->second].line));
        }
    }
    for (const Node& n : g.nodes) {
        for (const RefSite& s : node_refs(n)) {
            if (!index.count(s.ref->name)) {
                throw ParseError(ErrorKind::UndefinedReference, s.ref->line, s.ref->column,
                                 "'" + s.ref->name + "' is not declared");
            }
        }
    }

    // Cycles, by depth-first search in declaration order.
    std::vector<int> state(g.nodes.size(), 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> stack;
    auto dfs = [&](auto&& self, std::size_t i) -> void {
        state[i] = 1;
        stack.push_back(i);
        for (const RefSite& s : node_refs(g.nodes[i])) {
            std::size_t j = index.at(s.ref->name);
            if (state[j] == 1) {
                auto first = std::find(stack.begin(), stack.end(), j);
                std::vector<std::string> path;
                for (auto it = first; it != stack.end(); ++it) {
                    path.push_back(g.nodes[*it].name);
                }
                path.push_back(g.nodes[j].name);
                std::string text;
                for (std::size_t k = 0; k < path.size(); ++k) {
                    text += (k ? " -> " : "") + path[k];
                }
                const Node& at = g.nodes[j];
                throw ParseError(ErrorKind::CycleDetected, at.line, at.column, "cycle " + text, path);
            }
            if (state[j] == 0) {
                self(self, j);
            }
        }
        stack.pop_back();
        state[i] = 2;
    };
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (state[i] == 0) {
            dfs(dfs, i);
        }
    }

    for (const Node& n : g.nodes) {
        for (const RefSite& s : node_refs(n)) {
            const Node& target = g.nodes[index.at(s.ref->name)];
            std::string why;
            if ((n.kind == NodeKind::Const || s.in_bounds) && target.kind != NodeKind::Const) {
                why = n.kind == NodeKind::Const ? "a const may only reference consts"
                                                : "support bounds may only reference consts";
            } else if (n.kind != NodeKind::Const && target.kind == NodeKind::Data) {
                why = "data node '" + target.name + "' cannot be a parent";
            }
            if (!why.empty()) {
                throw ParseError(ErrorKind::InvalidReference, s.ref->line, s.ref->column,
                                 "'" + n.name + "' references '" + target.name + "': " + why);
            }
        }
    }
}

// ---------------------------------------------------------------- printing

int precedence(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
    }
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void print_into(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print_into(e, out);
    if (wrap) out += ')';
}

void print_into(const Expr& e, std::string& out) {
    int p = precedence(e);
    switch (e.kind) {
    case ExprKind::Number: out += format_number(e.value); return;
    case ExprKind::Ref: out += e.name; return;
    case ExprKind::Abs:
        out += "abs(";
        print_into(*e.lhs, out);
        out += ')';
        return;
    case ExprKind::Neg:
        out += '-';
        print_wrapped(*e.lhs, precedence(*e.lhs) < p, out);
        return;
    case ExprKind::Pow:
        print_wrapped(*e.lhs, precedence(*e.lhs) <= p, out);
        out += " ^ ";
        print_wrapped(*e.rhs, precedence(*e.rhs) < p, out);
        return;
    default: {
        const char* op = e.kind == ExprKind::Add ? " + " : e.kind == ExprKind::Sub ? " - "
                       : e.kind == ExprKind::Mul ? " * " : " / ";
        print_wrapped(*e.lhs, precedence(*e.lhs) < p, out);
        out += op;
        print_wrapped(*e.rhs, precedence(*e.rhs) <= p, out);
    }
    }
}

// ---------------------------------------------------------------- compiling

// Flattened expression tree; operands are indices into the owning pool.
struct Op {
    ExprKind kind;
    double value;
    int slot;
    int a;
    int b;
};

struct Program {
    std::vector<Op> ops;

    int add(const Expr& e, const std::map<std::string, int, std::less<>>& slots) {
        int a = e.lhs ? add(*e.lhs, slots) : -1;
        int b = e.rhs ? add(*e.rhs, slots) : -1;
        int slot = e.kind == ExprKind::Ref ? slots.at(e.name) : -1;
        ops.push_back({e.kind, e.value, slot, a, b});
        return int(ops.size()) - 1;
    }

    double eval(int i, const double* env) const {
        const Op& o = ops[std::size_t(i)];
        switch (o.kind) {
        case ExprKind::Number: return o.value;
        case ExprKind::Ref: return env[o.slot];
        case ExprKind::Neg: return -eval(o.a, env);
        case ExprKind::Abs: return std::abs(eval(o.a, env));
        case ExprKind::Add: return eval(o.a, env) + eval(o.b, env);
        case ExprKind::Sub: return eval(o.a, env) - eval(o.b, env);
        case ExprKind::Mul: return eval(o.a, env) * eval(o.b, env);
        case ExprKind::Div: return eval(o.a, env) / eval(o.b, env);
        case ExprKind::Pow: return std::pow(eval(o.a, env), eval(o.b, env));
        }
        return 0;
    }
};

struct RandomNode {
    std::string name;
    Family family;
    int slot;
    std::vector<int> args;
    double lo = -kInf;
    double hi = kInf;
};

[[noreturn]] void invalid_scale(const std::string& node, const char* what, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " = %.17g", v);
    throw Error(ErrorKind::InvalidScale, "node '" + node + "': " + what + buf + " is not positive");
}

// Throws InvalidScale for arguments outside the family's parameter space.
void check_args(const std::string& node, Family f, const double* a) {
    switch (f) {
    case Family::Normal:
        if (!(a[1] > 0)) invalid_scale(node, "sd", a[1]);
        break;
    case Family::Gamma:
        if (!(a[0] > 0)) invalid_scale(node, "shape", a[0]);
        if (!(a[1] > 0)) invalid_scale(node, "rate", a[1]);
        break;
    case Family::Exponential:
    case Family::Poisson:
        if (!(a[0] > 0)) invalid_scale(node, "rate", a[0]);
        break;
    case Family::Uniform:
        if (!(a[1] - a[0] > 0)) invalid_scale(node, "width hi - lo", a[1] - a[0]);
        break;
    }
}

double family_log_pdf(Family f, double x, const double* a) {
    switch (f) {
    case Family::Normal: return dist::log_normal_pdf(x, a[0], a[1]);
    case Family::Gamma: return dist::log_gamma_pdf(x, a[0], a[1]);
    case Family::Exponential: return dist::log_exponential_pdf(x, a[0]);
    case Family::Uniform: return dist::log_uniform_pdf(x, a[0], a[1]);
    case Family::Poisson: return dist::log_poisson_pmf(x, a[0]);
    }
    return -kInf;
}

constexpr long kPoissonSupportMax = 100;

struct Compiled {
    Program prog;
    std::vector<double> env0;  // consts filled in, other slots zero
    std::vector<RandomNode> params;  // topological order
    std::vector<RandomNode> data;
    std::vector<int> param_slots;  // in declaration order
    std::vector<int> data_slots;

    double log_sum(const std::vector<RandomNode>& nodes, double* env) const {
        double total = 0;
        double a[2];
        for (const RandomNode& n : nodes) {
            double x = env[n.slot];
            if (x < n.lo || x > n.hi) {
                return -kInf;
            }
            for (std::size_t k = 0; k < n.args.size(); ++k) {
                a[k] = prog.eval(n.args[k], env);
            }
            check_args(n.name, n.family, a);
            total += family_log_pdf(n.family, x, a);
        }
        return total;
    }
};

template <typename F>
double with_env(const Compiled& c, F&& f) {
    double local[64];
    std::vector<double> heap;
    double* env = local;
    if (c.env0.size() > 64) {
        heap = c.env0;
        env = heap.data();
    } else {
        std::copy(c.env0.begin(), c.env0.end(), local);
    }
    return f(env);
}

bool const_only(const Node& n, const ModelGraph& g) {
    for (const RefSite& s : node_refs(n)) {
        if (!s.in_bounds && g.nodes[*g.find(s.ref->name)].kind != NodeKind::Const) {
            return false;
        }
    }
    return true;
}

BaseMeasure support(const Node& n, const RandomNode& r, const ModelGraph& g, const Compiled& c) {
    if (n.family == Family::Poisson) {
        long lo = n.bounds ? long(std::ceil(std::max(r.lo, 0.0))) : 0;
        long hi = n.bounds ? long(std::floor(std::min(r.hi, double(kPoissonSupportMax)))) : kPoissonSupportMax;
        if (hi < lo) {
            throw Error(ErrorKind::InvalidMeasure, "node '" + n.name + "': bounds contain no integer");
        }
        return BaseMeasure::counting_range(lo, hi);
    }
    if (n.bounds) {
        return BaseMeasure::lebesgue(r.lo, r.hi);
    }
    double a[2];
    bool fixed = const_only(n, g);
    if (fixed) {
        for (std::size_t k = 0; k < r.args.size(); ++k) {
            a[k] = c.prog.eval(r.args[k], c.env0.data());
        }
    }
    switch (n.family) {
    case Family::Normal:
        return fixed ? BaseMeasure::lebesgue(a[0] - 8 * a[1], a[0] + 8 * a[1]) : BaseMeasure::lebesgue(-kInf, kInf);
    case Family::Gamma:
    case Family::Exponential: return BaseMeasure::lebesgue(0, kInf);
    case Family::Uniform: return fixed ? BaseMeasure::lebesgue(a[0], a[1]) : BaseMeasure::lebesgue(-kInf, kInf);
    case Family::Poisson: break;
    }
    return BaseMeasure::lebesgue(-kInf, kInf);
}

BaseMeasure block(std::vector<BaseMeasure> parts) {
    if (parts.empty()) {
        return BaseMeasure::counting_range(0, 0);
    }
    return parts.size() == 1 ? parts.front() : product_measure(std::move(parts));
}

} // namespace

// ---------------------------------------------------------------- public API

bool same_structure(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || bool(a.lhs) != bool(b.lhs) || bool(a.rhs) != bool(b.rhs)) {
        return false;
    }
    if (a.kind == ExprKind::Number && a.value != b.value) return false;
    if (a.kind == ExprKind::Ref && a.name != b.name) return false;
    if (a.lhs && !same_structure(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !same_structure(*a.rhs, *b.rhs)) return false;
    return true;
}

std::vector<std::string> references(const Expr& e) {
    std::vector<const Expr*> refs;
    collect_refs(e, refs);
    std::vector<std::string> out;
    for (const Expr* r : refs) {
        if (std::find(out.begin(), out.end(), r->name) == out.end()) {
            out.push_back(r->name);
        }
    }
    return out;
}

const char* to_string(Family f) {
    switch (f) {
    case Family::Normal: return "normal";
    case Family::Gamma: return "gamma";
    case Family::Exponential: return "exponential";
    case Family::Uniform: return "uniform";
    case Family::Poisson: return "poisson";
    }
    return "?";
}

std::size_t arity(Family f) { return f == Family::Exponential || f == Family::Poisson ? 1 : 2; }

const char* to_string(NodeKind k) {
    return k == NodeKind::Const ? "const" : k == NodeKind::Param ? "param" : "data";
}

std::optional<std::size_t> ModelGraph::find(std::string_view name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> ModelGraph::names(NodeKind kind) const {
    std::vector<std::string> out;
    for (const Node& n : nodes) {
        if (n.kind == kind) out.push_back(n.name);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> ModelGraph::edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Node& n : nodes) {
        for (const RefSite& s : node_refs(n)) {
            std::pair<std::string, std::string> e{s.ref->name, n.name};
            if (std::find(out.begin(), out.end(), e) == out.end()) {
                out.push_back(std::move(e));
            }
        }
    }
    return out;
}

std::vector<std::size_t> ModelGraph::topological_order() const {
    std::vector<std::size_t> order;
    std::vector<bool> placed(nodes.size(), false);
    while (order.size() < nodes.size()) {
        bool progressed = false;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (placed[i]) continue;
            bool ready = true;
            for (const RefSite& s : node_refs(nodes[i])) {
                auto j = find(s.ref->name);
                if (j && !placed[*j]) ready = false;
            }
            if (ready) {
                placed[i] = true;
                order.push_back(i);
                progressed = true;
                break;
            }
        }
        if (!progressed) {
            throw Error(ErrorKind::CycleDetected, "graph has a cycle");
        }
    }
    return order;
}

bool same_structure(const ModelGraph& a, const ModelGraph& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    auto same = [](const ExprPtr& x, const ExprPtr& y) {
        return bool(x) == bool(y) && (!x || same_structure(*x, *y));
    };
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const Node& x = a.nodes[i];
        const Node& y = b.nodes[i];
        if (x.name != y.name || x.kind != y.kind || !same(x.value, y.value) || x.args.size() != y.args.size() ||
            bool(x.bounds) != bool(y.bounds)) {
            return false;
        }
        if (x.kind != NodeKind::Const && x.family != y.family) return false;
        for (std::size_t k = 0; k < x.args.size(); ++k) {
            if (!same(x.args[k], y.args[k])) return false;
        }
        if (x.bounds && (!same(x.bounds->first, y.bounds->first) || !same(x.bounds->second, y.bounds->second))) {
            return false;
        }
    }
    return true;
}

ModelGraph parse(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    ModelGraph g;
    int line = 0;
    while (!text.empty() || line == 0) {
        ++line;
        std::size_t nl = text.find('\n');
        std::string_view row = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        LineParser p(lex_line(row, line));
        if (p.peek().type == Tok::End) {
            continue;
        }
        g.nodes.push_back(parse_statement(p));
    }
    if (g.nodes.empty()) {
        throw ParseError(ErrorKind::NoNodes, 1, 1, "no nodes declared");
    }
    validate(g);
    return g;
}

std::string print_expr(const Expr& e) {
    std::string out;
    print_into(e, out);
    return out;
}

std::string print_canonical(const ModelGraph& g) {
    std::string out;
    for (const Node& n : g.nodes) {
        out += to_string(n.kind);
        out += ' ';
        out += n.name;
        if (n.kind == NodeKind::Const) {
            out += " = " + print_expr(*n.value);
        } else {
            out += " ~ ";
            out += to_string(n.family);
            out += '(';
            for (std::size_t k = 0; k < n.args.size(); ++k) {
                out += (k ? ", " : "") + print_expr(*n.args[k]);
            }
            out += ')';
            if (n.bounds) {
                out += " in [" + print_expr(*n.bounds->first) + ", " + print_expr(*n.bounds->second) + "]";
            }
        }
        out += '\n';
    }
    return out;
}

CompiledModel compile_joint(const ModelGraph& g) {
    auto c = std::make_shared<Compiled>();
    std::map<std::string, int, std::less<>> slots;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        slots[g.nodes[i].name] = int(i);
    }
    c->env0.assign(g.nodes.size(), 0.0);
    std::vector<std::size_t> order = g.topological_order();
    for (std::size_t i : order) {
        const Node& n = g.nodes[i];
        if (n.kind == NodeKind::Const) {
            int root = c->prog.add(*n.value, slots);
            double v = c->prog.eval(root, c->env0.data());
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::DomainError, "const '" + n.name + "' is not finite");
            }
            c->env0[i] = v;
        }
    }

    CompiledModel out{{}, {}, BaseMeasure::lebesgue(0, 1), BaseMeasure::lebesgue(0, 1),
                      Density::from_eval(BaseMeasure::lebesgue(0, 1), [](PointView) { return 1.0; }), {}};
    std::map<std::size_t, BaseMeasure> supports;
    for (std::size_t i : order) {
        const Node& n = g.nodes[i];
        if (n.kind == NodeKind::Const) {
            continue;
        }
        RandomNode r{n.name, n.family, int(i), {}, -kInf, kInf};
        for (const auto& a : n.args) {
            r.args.push_back(c->prog.add(*a, slots));
        }
        if (n.bounds) {
            r.lo = c->prog.eval(c->prog.add(*n.bounds->first, slots), c->env0.data());
            r.hi = c->prog.eval(c->prog.add(*n.bounds->second, slots), c->env0.data());
            if (!(r.lo < r.hi)) {
                throw Error(ErrorKind::InvalidMeasure, "node '" + n.name + "': bounds need lo < hi");
            }
        }
        if (const_only(n, g)) {
            double a[2];
            for (std::size_t k = 0; k < r.args.size(); ++k) {
                a[k] = c->prog.eval(r.args[k], c->env0.data());
            }
            check_args(n.name, n.family, a);
        }
        supports.emplace(i, support(n, r, g, *c));
        (n.kind == NodeKind::Param ? c->params : c->data).push_back(std::move(r));
    }

    if (c->params.empty()) {
        throw Error(ErrorKind::NoNodes, "the model declares no param nodes");
    }
    std::vector<BaseMeasure> param_parts, data_parts;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        if (n.kind == NodeKind::Param) {
            out.param_names.push_back(n.name);
            c->param_slots.push_back(int(i));
            param_parts.push_back(supports.at(i));
        } else if (n.kind == NodeKind::Data) {
            out.data_names.push_back(n.name);
            c->data_slots.push_back(int(i));
            data_parts.push_back(supports.at(i));
        }
    }
    out.param_space = block(param_parts);
    out.data_space = block(data_parts);

    out.prior = Density::from_log(out.param_space, [c](PointView theta) {
        return with_env(*c, [&](double* env) {
            for (std::size_t k = 0; k < c->param_slots.size(); ++k) {
                env[c->param_slots[k]] = theta[k];
            }
            return c->log_sum(c->params, env);
        });
    });
    out.log_likelihood = [c](PointView y, PointView theta) {
        return with_env(*c, [&](double* env) {
            for (std::size_t k = 0; k < c->param_slots.size(); ++k) {
                env[c->param_slots[k]] = theta[k];
            }
            for (std::size_t k = 0; k < c->data_slots.size(); ++k) {
                env[c->data_slots[k]] = y[k];
            }
            return c->log_sum(c->data, env);
        });
    };
    return out;
}

Point bind_data(const CompiledModel& m, const std::vector<std::pair<std::string, double>>& bindings) {
    Point y(m.data_names.size(), 0.0);
    std::vector<bool> bound(m.data_names.size(), false);
    for (const auto& [name, value] : bindings) {
        auto it = std::find(m.data_names.begin(), m.data_names.end(), name);
        if (it == m.data_names.end()) {
            throw Error(ErrorKind::UnboundData, "'" + name + "' is not a data node");
        }
        std::size_t k = std::size_t(it - m.data_names.begin());
        if (bound[k]) {
            throw Error(ErrorKind::UnboundData, "data node '" + name + "' is bound twice");
        }
        bound[k] = true;
        y[k] = value;
    }
    for (std::size_t k = 0; k < bound.size(); ++k) {
        if (!bound[k]) {
            throw Error(ErrorKind::UnboundData, "data node '" + m.data_names[k] + "' has no value");
        }
    }
    return y;
}

} // namespace mb::dsl
