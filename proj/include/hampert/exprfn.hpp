#pragma once

// Scalar functions of u for configuration files: parser, evaluator, symbolic
// differentiator, and an exact equality test.
//
// Grammar (EBNF, also in docs/expression-grammar.md):
//
//   expr    ::= term { ("+" | "-") term }
//   term    ::= unary { ("*" | "/") unary }
//   unary   ::= ("-" | "+") unary | power
//   power   ::= primary [ "^" integer ]
//   primary ::= number | variable | function "(" expr ")" | "(" expr ")"
//   variable ::= "u" | "x"            (one variable; "x" reads better in
//                                      initial-data expressions)
//   function ::= "exp" | "log" | "sin" | "cos" | "tanh" | "sqrt"
//   number  ::= digits [ "." digits ]
//
// Precedence: ^  >  unary -  >  * /  >  + -.  Left associative.  Whitespace
// is ignored.  "1/240" folds to the exact rational 1/240; decimals are exact
// (0.5 -> 1/2).  Pow exponents are literal integers, possibly negative.

#include "hampert/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hampert::exprfn {

enum class Kind { Lit, Var, Add, Sub, Mul, Div, Pow, Neg, Fun };
enum class Fn { Exp, Log, Sin, Cos, Tanh, Sqrt };

inline const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Exp: return "exp";
        case Fn::Log: return "log";
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tanh: return "tanh";
        case Fn::Sqrt: return "sqrt";
    }
    return "?";
}

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    Rat lit;       // Kind::Lit
    int ipow = 0;  // Kind::Pow
    Fn fn = Fn::Exp;
    Expr a, b;
};

inline Expr make(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

inline Expr lit(const Rat& r) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Lit;
    n->lit = r;
    return n;
}
inline Expr lit(long long v) { return lit(Rat(v)); }
inline Expr var_u() { return make(Kind::Var); }

inline bool is_lit(const Expr& e, const Rat& v) { return e->kind == Kind::Lit && e->lit == v; }

// Smart constructors: constant folding plus 0/1 absorption.
inline Expr add(const Expr& a, const Expr& b) {
    if (a->kind == Kind::Lit && b->kind == Kind::Lit) return lit(a->lit + b->lit);
    if (is_lit(a, Rat(0))) return b;
    if (is_lit(b, Rat(0))) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Add;
    n->a = a;
    n->b = b;
    return n;
}
inline Expr sub(const Expr& a, const Expr& b) {
    if (a->kind == Kind::Lit && b->kind == Kind::Lit) return lit(a->lit - b->lit);
    if (is_lit(b, Rat(0))) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sub;
    n->a = a;
    n->b = b;
    return n;
}
inline Expr mul(const Expr& a, const Expr& b) {
    if (a->kind == Kind::Lit && b->kind == Kind::Lit) return lit(a->lit * b->lit);
    if (is_lit(a, Rat(0)) || is_lit(b, Rat(0))) return lit(0);
    if (is_lit(a, Rat(1))) return b;
    if (is_lit(b, Rat(1))) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Mul;
    n->a = a;
    n->b = b;
    return n;
}
inline Expr div(const Expr& a, const Expr& b) {
    if (a->kind == Kind::Lit && b->kind == Kind::Lit && b->lit != 0) return lit(a->lit / b->lit);
    if (is_lit(a, Rat(0))) return lit(0);
    if (is_lit(b, Rat(1))) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Div;
    n->a = a;
    n->b = b;
    return n;
}
inline Expr neg(const Expr& a) {
    if (a->kind == Kind::Lit) return lit(-a->lit);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Neg;
    n->a = a;
    return n;
}
inline Expr pow(const Expr& a, int e) {
    if (e == 0) return lit(1);
    if (e == 1) return a;
    if (a->kind == Kind::Lit) {
        Rat r(1);
        Rat base = a->lit;
        int n = e < 0 ? -e : e;
        for (int i = 0; i < n; ++i) r *= base;
        if (e < 0) {
            if (r == 0) throw std::domain_error("pow: zero to negative power");
            r = Rat(1) / r;
        }
        return lit(r);
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->a = a;
    n->ipow = e;
    return n;
}
inline Expr fun(Fn f, const Expr& a) {
    if (a->kind == Kind::Lit && a->lit == 0) {
        switch (f) {
            case Fn::Exp: return lit(1);
            case Fn::Sin: return lit(0);
            case Fn::Cos: return lit(1);
            case Fn::Tanh: return lit(0);
            case Fn::Sqrt: return lit(0);
            case Fn::Log: break;  // log 0: leave as node; eval reports domain error
        }
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Fun;
    n->fn = f;
    n->a = a;
    return n;
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseError : std::runtime_error {
    std::size_t offset;
    std::string expected;
    ParseError(std::size_t off, const std::string& exp)
        : std::runtime_error("syntax error at offset " + std::to_string(off) + ": expected " + exp),
          offset(off),
          expected(exp) {}
};

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError(pos_, "end of input or operator");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (eat('+'))
                e = add(e, term());
            else if (eat('-'))
                e = sub(e, term());
            else
                return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (eat('*'))
                e = mul(e, unary());
            else if (eat('/'))
                e = div(e, unary());
            else
                return e;
        }
    }

    Expr unary() {
        if (eat('-')) return neg(unary());
        if (eat('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (eat('^')) return pow(base, integer());
        return base;
    }

    int integer() {
        skip_ws();
        std::size_t start = pos_;
        bool negative = false;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            negative = s_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            throw ParseError(pos_, "integer exponent");
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 1000) throw ParseError(start, "exponent magnitude <= 1000");
            ++pos_;
        }
        return static_cast<int>(negative ? -v : v);
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError(pos_, "number, 'u', function, or '('");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!eat(')')) throw ParseError(pos_, "')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            std::string name;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
                name += s_[pos_++];
            if (name == "u" || name == "x") return var_u();  // one variable, two spellings
            static const std::map<std::string, Fn> fns = {
                {"exp", Fn::Exp}, {"log", Fn::Log},   {"sin", Fn::Sin},
                {"cos", Fn::Cos}, {"tanh", Fn::Tanh}, {"sqrt", Fn::Sqrt}};
            auto it = fns.find(name);
            if (it == fns.end()) throw ParseError(start, "'u' or one of exp,log,sin,cos,tanh,sqrt");
            if (!eat('(')) throw ParseError(pos_, "'(' after function name");
            Expr arg = expr();
            if (!eat(')')) throw ParseError(pos_, "')'");
            return fun(it->second, arg);
        }
        throw ParseError(pos_, "number, 'u', function, or '('");
    }

    Expr number() {
        BigInt ip = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            ip = ip * 10 + (s_[pos_] - '0');
            ++pos_;
        }
        Rat r(ip);
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                throw ParseError(pos_, "digits after decimal point");
            BigInt frac = 0, scale = 1;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                frac = frac * 10 + (s_[pos_] - '0');
                scale *= 10;
                ++pos_;
            }
            r += Rat(frac, scale);
        }
        return lit(r);
    }
};

}  // namespace detail

inline Expr parse(const std::string& text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

struct EvalError : std::runtime_error {
    std::string path;
    EvalError(const std::string& what, const std::string& p)
        : std::runtime_error(what + " at node " + p), path(p) {}
};

namespace detail {
inline double eval_rec(const Expr& e, double u, std::string& path) {
    struct PathGuard {
        std::string& p;
        std::size_t n;
        PathGuard(std::string& path, const char* seg) : p(path), n(path.size()) { p += seg; }
        ~PathGuard() { p.resize(n); }
    };
    switch (e->kind) {
        case Kind::Lit: return static_cast<double>(e->lit);
        case Kind::Var: return u;
        case Kind::Add: {
            PathGuard g(path, "/add");
            return eval_rec(e->a, u, path) + eval_rec(e->b, u, path);
        }
        case Kind::Sub: {
            PathGuard g(path, "/sub");
            return eval_rec(e->a, u, path) - eval_rec(e->b, u, path);
        }
        case Kind::Mul: {
            PathGuard g(path, "/mul");
            return eval_rec(e->a, u, path) * eval_rec(e->b, u, path);
        }
        case Kind::Div: {
            PathGuard g(path, "/div");
            double den = eval_rec(e->b, u, path);
            if (den == 0.0) throw EvalError("division by zero", path);
            return eval_rec(e->a, u, path) / den;
        }
        case Kind::Neg: {
            PathGuard g(path, "/neg");
            return -eval_rec(e->a, u, path);
        }
        case Kind::Pow: {
            PathGuard g(path, "/pow");
            double base = eval_rec(e->a, u, path);
            if (base == 0.0 && e->ipow < 0) throw EvalError("zero to negative power", path);
            return std::pow(base, e->ipow);
        }
        case Kind::Fun: {
            PathGuard g(path, "/");
            path += fn_name(e->fn);
            double x = eval_rec(e->a, u, path);
            switch (e->fn) {
                case Fn::Exp: return std::exp(x);
                case Fn::Log:
                    if (x <= 0.0) throw EvalError("log of non-positive argument", path);
                    return std::log(x);
                case Fn::Sin: return std::sin(x);
                case Fn::Cos: return std::cos(x);
                case Fn::Tanh: return std::tanh(x);
                case Fn::Sqrt:
                    if (x < 0.0) throw EvalError("sqrt of negative argument", path);
                    return std::sqrt(x);
            }
        }
    }
    throw std::logic_error("eval: bad node");
}
}  // namespace detail

inline double eval(const Expr& e, double u) {
    std::string path;
    return detail::eval_rec(e, u, path);
}

// ---------------------------------------------------------------------------
// Differentiation (exact, with light simplification via smart constructors)

inline Expr derivative(const Expr& e) {
    switch (e->kind) {
        case Kind::Lit: return lit(0);
        case Kind::Var: return lit(1);
        case Kind::Add: return add(derivative(e->a), derivative(e->b));
        case Kind::Sub: return sub(derivative(e->a), derivative(e->b));
        case Kind::Mul: return add(mul(derivative(e->a), e->b), mul(e->a, derivative(e->b)));
        case Kind::Div:
            return div(sub(mul(derivative(e->a), e->b), mul(e->a, derivative(e->b))),
                       pow(e->b, 2));
        case Kind::Neg: return neg(derivative(e->a));
        case Kind::Pow:
            return mul(mul(lit(e->ipow), pow(e->a, e->ipow - 1)), derivative(e->a));
        case Kind::Fun: {
            Expr da = derivative(e->a);
            switch (e->fn) {
                case Fn::Exp: return mul(fun(Fn::Exp, e->a), da);
                case Fn::Log: return div(da, e->a);
                case Fn::Sin: return mul(fun(Fn::Cos, e->a), da);
                case Fn::Cos: return neg(mul(fun(Fn::Sin, e->a), da));
                case Fn::Tanh: return mul(sub(lit(1), pow(fun(Fn::Tanh, e->a), 2)), da);
                case Fn::Sqrt: return div(da, mul(lit(2), fun(Fn::Sqrt, e->a)));
            }
        }
    }
    throw std::logic_error("derivative: bad node");
}

inline Expr derivative(const Expr& e, int order) {
    Expr d = e;
    for (int i = 0; i < order; ++i) d = derivative(d);
    return d;
}

// ---------------------------------------------------------------------------
// Rendering (round-trips through parse)

namespace detail {
// Precedence levels: 0 add/sub, 1 mul/div, 2 unary minus, 3 pow, 4 atom.
inline int prec(const Expr& e) {
    switch (e->kind) {
        case Kind::Add:
        case Kind::Sub: return 0;
        case Kind::Mul:
        case Kind::Div: return 1;
        case Kind::Neg: return 2;
        case Kind::Pow: return 3;
        default: return 4;
    }
}

inline std::string render_rec(const Expr& e, int parent_prec) {
    std::string s;
    switch (e->kind) {
        case Kind::Lit:
            s = rat_str(e->lit);
            if (e->lit < 0 || denominator(e->lit) != 1) s = "(" + s + ")";
            return s;
        case Kind::Var: return "u";
        case Kind::Add: s = render_rec(e->a, 0) + " + " + render_rec(e->b, 1); break;
        case Kind::Sub: s = render_rec(e->a, 0) + " - " + render_rec(e->b, 1); break;
        case Kind::Mul: s = render_rec(e->a, 1) + "*" + render_rec(e->b, 2); break;
        case Kind::Div: s = render_rec(e->a, 1) + "/" + render_rec(e->b, 2); break;
        case Kind::Neg: s = "-" + render_rec(e->a, 2); break;
        case Kind::Pow: s = render_rec(e->a, 4) + "^" + std::to_string(e->ipow); break;
        case Kind::Fun: return std::string(fn_name(e->fn)) + "(" + render_rec(e->a, 0) + ")";
    }
    if (prec(e) < parent_prec) s = "(" + s + ")";
    return s;
}
}  // namespace detail

inline std::string render(const Expr& e) { return detail::render_rec(e, 0); }

inline bool equal_tree(const Expr& a, const Expr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Lit: return a->lit == b->lit;
        case Kind::Var: return true;
        case Kind::Neg: return equal_tree(a->a, b->a);
        case Kind::Pow: return a->ipow == b->ipow && equal_tree(a->a, b->a);
        case Kind::Fun: return a->fn == b->fn && equal_tree(a->a, b->a);
        default: return equal_tree(a->a, b->a) && equal_tree(a->b, b->b);
    }
}

// ---------------------------------------------------------------------------
// Exact equality via a rational normal form over transcendental atoms.
//
// Expressions are normalized to num/den pairs of polynomials in "atoms":
// atom 0 is u, and each distinct (function, normalized argument) pair gets
// its own atom.  Two expressions are equal as formal rational functions iff
// the cross-multiplied difference vanishes.  Sound for the config sublanguage
// (no algebraic identities between distinct atoms are assumed).

namespace nf {

using Mono = std::vector<std::pair<int, int>>;  // sorted (atom, exponent)
using Poly = std::map<Mono, Rat>;

inline void add_term(Poly& p, const Mono& m, const Rat& c) {
    if (c == 0) return;
    auto [it, fresh] = p.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

inline Poly add(const Poly& a, const Poly& b) {
    Poly out = a;
    for (const auto& [m, c] : b) add_term(out, m, c);
    return out;
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Mono m;
            std::size_t i = 0, j = 0;
            while (i < ma.size() && j < mb.size()) {
                if (ma[i].first < mb[j].first)
                    m.push_back(ma[i++]);
                else if (mb[j].first < ma[i].first)
                    m.push_back(mb[j++]);
                else {
                    int e = ma[i].second + mb[j].second;
                    if (e != 0) m.emplace_back(ma[i].first, e);
                    ++i, ++j;
                }
            }
            for (; i < ma.size(); ++i) m.push_back(ma[i]);
            for (; j < mb.size(); ++j) m.push_back(mb[j]);
            add_term(out, m, ca * cb);
        }
    return out;
}

inline Poly pow(const Poly& a, int e) {
    Poly out{{Mono{}, Rat(1)}};
    for (int i = 0; i < e; ++i) out = mul(out, a);
    return out;
}

inline Poly constant(const Rat& r) {
    Poly p;
    add_term(p, Mono{}, r);
    return p;
}

inline std::string key(const Poly& p) {
    std::string s;
    for (const auto& [m, c] : p) {
        s += rat_str(c) + "[";
        for (const auto& [a, e] : m) s += std::to_string(a) + ":" + std::to_string(e) + ",";
        s += "]";
    }
    return s;
}

struct RationalForm {
    Poly num, den;
};

class Normalizer {
public:
    RationalForm normalize(const Expr& e) {
        switch (e->kind) {
            case Kind::Lit: return {constant(e->lit), constant(Rat(1))};
            case Kind::Var: return {{{Mono{{0, 1}}, Rat(1)}}, constant(Rat(1))};
            case Kind::Add: {
                auto a = normalize(e->a), b = normalize(e->b);
                return {add(mul(a.num, b.den), mul(b.num, a.den)), mul(a.den, b.den)};
            }
            case Kind::Sub: {
                auto a = normalize(e->a), b = normalize(e->b);
                return {add(mul(a.num, b.den), mul(mul(b.num, a.den), constant(Rat(-1)))),
                        mul(a.den, b.den)};
            }
            case Kind::Mul: {
                auto a = normalize(e->a), b = normalize(e->b);
                return {mul(a.num, b.num), mul(a.den, b.den)};
            }
            case Kind::Div: {
                auto a = normalize(e->a), b = normalize(e->b);
                return {mul(a.num, b.den), mul(a.den, b.num)};
            }
            case Kind::Neg: {
                auto a = normalize(e->a);
                return {mul(a.num, constant(Rat(-1))), a.den};
            }
            case Kind::Pow: {
                auto a = normalize(e->a);
                int n = e->ipow;
                if (n >= 0) return {pow(a.num, n), pow(a.den, n)};
                return {pow(a.den, -n), pow(a.num, -n)};
            }
            case Kind::Fun: {
                auto a = normalize(e->a);
                std::string k = std::string(fn_name(e->fn)) + "|" + key(a.num) + "|" + key(a.den);
                auto [it, fresh] = atoms_.emplace(k, next_atom_);
                if (fresh) ++next_atom_;
                return {{{Mono{{it->second, 1}}, Rat(1)}}, constant(Rat(1))};
            }
        }
        throw std::logic_error("normalize: bad node");
    }

private:
    std::map<std::string, int> atoms_;
    int next_atom_ = 1;
};

}  // namespace nf

// Exact structural equality as formal rational functions of u and the
// transcendental atoms appearing in either expression.
inline bool equal(const Expr& a, const Expr& b) {
    nf::Normalizer norm;
    auto fa = norm.normalize(a);
    auto fb = norm.normalize(b);
    nf::Poly lhs = nf::mul(fa.num, fb.den);
    nf::Poly rhs = nf::mul(fb.num, fa.den);
    return nf::key(lhs) == nf::key(rhs);
}

}  // namespace hampert::exprfn
