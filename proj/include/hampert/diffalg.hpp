#pragma once

// Exact differential-polynomial algebra on the jet space of one dependent
// variable u(x).
//
// A term is (rational) * (monomial).  Monomial factors come in three kinds:
//   - coefficient generators S^(j): the j-th u-derivative of a registered
//     function symbol S = S(u), plus the distinguished generator u itself
//     (order-0 derivative of the symbol "u").  Integer exponents, possibly
//     negative (the ring carries formal inverses such as 1/q').
//   - jet variables u_x, u_xx, ..., graded by deg u^(n) = n.  u_x may carry
//     negative exponents; u^(n) with n >= 2 may not.
//   - ell = log(u_x), with deg ell = 0 and D_x ell = u_xx / u_x.
//
// Everything is immutable after construction and safe to share across
// threads.

#include "hampert/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hampert::diffalg {

// ---------------------------------------------------------------------------
// Symbols

class SymbolTable {
public:
    static SymbolTable& instance() {
        static SymbolTable tab;
        return tab;
    }

    // Registers (or looks up) a function symbol.  `constant` marks symbols
    // whose u-derivative is zero (pure parameters like t, c0).
    std::uint32_t intern(const std::string& name, bool constant = false) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = ids_.find(name);
        if (it != ids_.end()) {
            // Plain use of a registered constant is a lookup; promoting an
            // already-used plain symbol to a constant is a genuine conflict.
            if (constant && !entries_[it->second].constant)
                throw std::logic_error("symbol '" + name + "' already registered as non-constant");
            return it->second;
        }
        std::uint32_t id = static_cast<std::uint32_t>(entries_.size());
        entries_.push_back({name, constant});
        ids_.emplace(name, id);
        return id;
    }

    const std::string& name(std::uint32_t id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.at(id).name;
    }

    bool is_constant(std::uint32_t id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.at(id).constant;
    }

private:
    SymbolTable() { intern("u"); }  // id 0 is always u itself
    struct Entry {
        std::string name;
        bool constant;
    };
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

inline std::uint32_t sym(const std::string& name) { return SymbolTable::instance().intern(name); }
inline std::uint32_t const_sym(const std::string& name) { return SymbolTable::instance().intern(name, true); }

// ---------------------------------------------------------------------------
// Variable ids inside a monomial
//
//   [0x00000000, 0x80000000): coefficient generator, (symbol << 8) | deriv order
//   0x80000000 + n:           jet variable u^(n), n >= 1
//   0xFFFFFFFF:               ell = log(u_x)
//
// The numeric order (coefficients first, then jets, ell last) is also the
// canonical factor order inside a monomial.

using VarId = std::uint32_t;

constexpr VarId kJetBase = 0x80000000u;
constexpr VarId kLogVar = 0xFFFFFFFFu;
constexpr std::uint32_t kMaxDerivOrder = 0xFF;

inline VarId coef_var(std::uint32_t symbol, std::uint32_t order) {
    if (order > kMaxDerivOrder) throw std::logic_error("derivative order too large");
    return (symbol << 8) | order;
}
inline VarId jet_var(std::uint32_t n) { return kJetBase + n; }
inline bool is_coef_var(VarId v) { return v < kJetBase; }
inline bool is_jet_var(VarId v) { return v >= kJetBase && v != kLogVar; }
inline std::uint32_t coef_symbol(VarId v) { return v >> 8; }
inline std::uint32_t coef_order(VarId v) { return v & 0xFF; }
inline std::uint32_t jet_order(VarId v) { return v - kJetBase; }

// Sorted (VarId, exponent) pairs, exponents nonzero.
using Mono = std::vector<std::pair<VarId, std::int32_t>>;

struct MonoHash {
    std::size_t operator()(const Mono& m) const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& [v, e] : m) {
            h ^= v;
            h *= 1099511628211ull;
            h ^= static_cast<std::uint32_t>(e);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

inline Mono mono_mul(const Mono& a, const Mono& b) {
    Mono out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            out.push_back(a[i++]);
        } else if (b[j].first < a[i].first) {
            out.push_back(b[j++]);
        } else {
            std::int32_t e = a[i].second + b[j].second;
            if (e != 0) out.emplace_back(a[i].first, e);
            ++i;
            ++j;
        }
    }
    for (; i < a.size(); ++i) out.push_back(a[i]);
    for (; j < b.size(); ++j) out.push_back(b[j]);
    return out;
}

// a / (v^1), assuming v present; then multiply by v^(e-1) is done by caller.
inline Mono mono_with_exp(const Mono& m, std::size_t idx, std::int32_t new_exp) {
    Mono out = m;
    if (new_exp == 0)
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(idx));
    else
        out[idx].second = new_exp;
    return out;
}

inline int mono_jet_degree(const Mono& m) {
    long deg = 0;
    for (const auto& [v, e] : m)
        if (is_jet_var(v)) deg += static_cast<long>(jet_order(v)) * e;
    return static_cast<int>(deg);
}

inline int mono_max_jet_order(const Mono& m) {
    int mx = 0;
    for (const auto& [v, e] : m) {
        if (is_jet_var(v)) mx = std::max(mx, static_cast<int>(jet_order(v)));
        if (v == kLogVar) mx = std::max(mx, 1);  // ell depends on u_x
    }
    return mx;
}

// ---------------------------------------------------------------------------
// DiffPoly

class DiffPoly {
public:
    using Terms = std::unordered_map<Mono, Rat, MonoHash>;

    DiffPoly() = default;

    static DiffPoly zero() { return DiffPoly(); }
    static DiffPoly constant(const Rat& r) {
        DiffPoly p;
        p.add_term(Mono{}, r);
        return p;
    }
    static DiffPoly one() { return constant(Rat(1)); }
    // u itself (the order-0 generator, not a jet variable)
    static DiffPoly u() { return var(coef_var(0, 0)); }
    static DiffPoly symbol(const std::string& name, std::uint32_t order = 0) {
        return var(coef_var(sym(name), order));
    }
    static DiffPoly jet(std::uint32_t n, std::int32_t exp = 1) {
        if (n < 1) throw std::logic_error("jet order must be >= 1");
        if (n >= 2 && exp < 0) throw std::logic_error("negative power of u^(n), n>=2");
        return var(jet_var(n), exp);
    }
    static DiffPoly log_ux() { return var(kLogVar); }
    static DiffPoly var(VarId v, std::int32_t exp = 1) {
        DiffPoly p;
        if (exp != 0) p.add_term(Mono{{v, exp}}, Rat(1));
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const Terms& terms() const { return terms_; }

    void add_term(const Mono& m, const Rat& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    friend DiffPoly operator+(const DiffPoly& a, const DiffPoly& b) {
        DiffPoly out = a;
        for (const auto& [m, c] : b.terms_) out.add_term(m, c);
        return out;
    }
    friend DiffPoly operator-(const DiffPoly& a, const DiffPoly& b) {
        DiffPoly out = a;
        for (const auto& [m, c] : b.terms_) out.add_term(m, -c);
        return out;
    }
    friend DiffPoly operator-(const DiffPoly& a) { return a * Rat(-1); }
    friend DiffPoly operator*(const DiffPoly& a, const Rat& s) {
        DiffPoly out;
        if (s == 0) return out;
        out.terms_.reserve(a.terms_.size());
        for (const auto& [m, c] : a.terms_) out.terms_.emplace(m, c * s);
        return out;
    }
    friend DiffPoly operator*(const Rat& s, const DiffPoly& a) { return a * s; }
    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
        DiffPoly out;
        out.terms_.reserve(a.terms_.size() * b.terms_.size() / 2 + 4);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) out.add_term(mono_mul(ma, mb), ca * cb);
        return out;
    }
    friend bool operator==(const DiffPoly& a, const DiffPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (const auto& [m, c] : a.terms_) {
            auto it = b.terms_.find(m);
            if (it == b.terms_.end() || it->second != c) return false;
        }
        return true;
    }
    friend bool operator!=(const DiffPoly& a, const DiffPoly& b) { return !(a == b); }

    DiffPoly pow(int e) const {
        if (e < 0) throw std::logic_error("DiffPoly::pow: negative exponent");
        DiffPoly acc = one();
        for (int i = 0; i < e; ++i) acc = acc * (*this);
        return acc;
    }

    // Jet degree of a homogeneous polynomial; throws if mixed.
    int degree() const {
        if (terms_.empty()) return 0;
        bool first = true;
        int deg = 0;
        for (const auto& [m, c] : terms_) {
            int d = mono_jet_degree(m);
            if (first) {
                deg = d;
                first = false;
            } else if (d != deg) {
                throw std::logic_error("degree(): polynomial is not jet-homogeneous");
            }
        }
        return deg;
    }

    bool is_homogeneous(int deg) const {
        for (const auto& [m, c] : terms_)
            if (mono_jet_degree(m) != deg) return false;
        return true;
    }

    int max_jet_order() const {
        int mx = 0;
        for (const auto& [m, c] : terms_) mx = std::max(mx, mono_max_jet_order(m));
        return mx;
    }

    bool coefficient_only() const {
        for (const auto& [m, c] : terms_)
            for (const auto& [v, e] : m)
                if (!is_coef_var(v)) return false;
        return true;
    }

    // Canonically sorted copy of the terms, for rendering and witness
    // extraction: lexicographic in (generator kind, name, derivative order),
    // then jet variables by order, independent of symbol registration order.
    std::vector<std::pair<Mono, Rat>> sorted_terms() const;

private:
    Terms terms_;
};

namespace detail {

// Registration-independent ordering key for one variable.
struct VarKey {
    int kind;  // 0 coefficient, 1 jet, 2 log
    std::string name;
    std::uint32_t order;
    friend bool operator<(const VarKey& a, const VarKey& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.name != b.name) return a.name < b.name;
        return a.order < b.order;
    }
};

inline VarKey var_key(VarId v) {
    if (v == kLogVar) return {2, "", 0};
    if (is_jet_var(v)) return {1, "", jet_order(v)};
    std::uint32_t s = coef_symbol(v);
    return {0, s == 0 ? "" : SymbolTable::instance().name(s), coef_order(v)};
}

using MonoKey = std::vector<std::pair<VarKey, std::int32_t>>;

inline MonoKey mono_key(const Mono& m) {
    MonoKey k;
    k.reserve(m.size());
    for (const auto& [v, e] : m) k.emplace_back(var_key(v), e);
    std::sort(k.begin(), k.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return k;
}

}  // namespace detail

inline std::vector<std::pair<Mono, Rat>> DiffPoly::sorted_terms() const {
    std::vector<std::pair<Mono, Rat>> out(terms_.begin(), terms_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return detail::mono_key(a.first) < detail::mono_key(b.first);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Derivations

namespace detail {

// Generic single-factor derivation: expand d(m) = sum_i e_i * m/v_i * d(v_i),
// where dvar(v) returns d(v_i) as a DiffPoly (may be zero).
template <class DVar>
DiffPoly derive(const DiffPoly& p, DVar&& dvar) {
    DiffPoly out;
    for (const auto& [m, c] : p.terms()) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto [v, e] = m[i];
            DiffPoly dv = dvar(v);
            if (dv.is_zero()) continue;
            Mono rest = mono_with_exp(m, i, e - 1);
            Rat coef = c * Rat(e);
            for (const auto& [mv, cv] : dv.terms()) out.add_term(mono_mul(rest, mv), coef * cv);
        }
    }
    return out;
}

}  // namespace detail

// d/du: S^(j) -> S^(j+1) (constants -> 0), u -> 1, jet variables and ell are
// independent of u.
inline DiffPoly du(const DiffPoly& p) {
    auto& tab = SymbolTable::instance();
    return detail::derive(p, [&tab](VarId v) -> DiffPoly {
        if (!is_coef_var(v)) return DiffPoly::zero();
        std::uint32_t s = coef_symbol(v);
        if (s == 0) return DiffPoly::one();  // u itself
        if (tab.is_constant(s)) return DiffPoly::zero();
        return DiffPoly::var(coef_var(s, coef_order(v) + 1));
    });
}

// Total x-derivative.
inline DiffPoly total_derivative(const DiffPoly& p) {
    auto& tab = SymbolTable::instance();
    return detail::derive(p, [&tab](VarId v) -> DiffPoly {
        if (v == kLogVar) return DiffPoly::jet(2) * DiffPoly::jet(1, -1);
        if (is_jet_var(v)) return DiffPoly::var(jet_var(jet_order(v) + 1));
        std::uint32_t s = coef_symbol(v);
        if (s == 0) return DiffPoly::jet(1);
        if (tab.is_constant(s)) return DiffPoly::zero();
        return DiffPoly::var(coef_var(s, coef_order(v) + 1)) * DiffPoly::jet(1);
    });
}

inline DiffPoly dxn(const DiffPoly& p, int n) {
    DiffPoly out = p;
    for (int i = 0; i < n; ++i) out = total_derivative(out);
    return out;
}

// Jet partial d/du^(n).  For n = 1 this includes the chain rule through
// ell = log(u_x).  n = 0 means d/du (see du above).
inline DiffPoly partial_jet(const DiffPoly& p, int n) {
    if (n == 0) return du(p);
    const VarId target = jet_var(static_cast<std::uint32_t>(n));
    return detail::derive(p, [n, target](VarId v) -> DiffPoly {
        if (v == target) return DiffPoly::one();
        if (n == 1 && v == kLogVar) return DiffPoly::jet(1, -1);
        return DiffPoly::zero();
    });
}

// Euler-Lagrange operator: sum_k (-1)^k D_x^k (d p / d u^(k)).
inline DiffPoly euler_operator(const DiffPoly& p) {
    int top = p.max_jet_order();
    DiffPoly out;
    for (int k = 0; k <= top; ++k) {
        DiffPoly term = dxn(partial_jet(p, k), k);
        out = (k % 2 == 0) ? out + term : out - term;
    }
    return out;
}

// Equality test modulo Im D_x + constants.
inline bool is_null_lagrangian(const DiffPoly& p) { return euler_operator(p).is_zero(); }

// Prolonged evolutionary action with characteristic P:
//   v_P(h) = sum_{n>=0} (d h / d u^(n)) * D_x^n(P).
// A derivation in h; commutes with D_x.
inline DiffPoly evolutionary_apply(const DiffPoly& P, const DiffPoly& h) {
    int top = h.max_jet_order();
    DiffPoly out;
    DiffPoly dnp = P;
    for (int n = 0; n <= top; ++n) {
        DiffPoly ph = partial_jet(h, n);
        if (!ph.is_zero()) out = out + ph * dnp;
        if (n < top) dnp = total_derivative(dnp);
    }
    return out;
}

// Substitutes every occurrence of S^(j) by the j-th u-derivative of `value`
// (a coefficient-only polynomial).  Negative powers of S are rejected.
inline DiffPoly substitute_symbol(const DiffPoly& p, std::uint32_t symbol, const DiffPoly& value) {
    if (!value.coefficient_only())
        throw std::logic_error("substitute_symbol: replacement must be coefficient-only");
    // Precompute derivatives of value up to the max order present.
    int top = -1;
    for (const auto& [m, c] : p.terms())
        for (const auto& [v, e] : m)
            if (is_coef_var(v) && coef_symbol(v) == symbol)
                top = std::max(top, static_cast<int>(coef_order(v)));
    if (top < 0) return p;
    std::vector<DiffPoly> dv(static_cast<std::size_t>(top) + 1);
    dv[0] = value;
    for (int j = 1; j <= top; ++j) dv[static_cast<std::size_t>(j)] = du(dv[static_cast<std::size_t>(j - 1)]);

    DiffPoly out;
    for (const auto& [m, c] : p.terms()) {
        DiffPoly term = DiffPoly::constant(c);
        Mono rest;
        for (const auto& [v, e] : m) {
            if (is_coef_var(v) && coef_symbol(v) == symbol) {
                if (e < 0) throw std::logic_error("substitute_symbol: negative power of substituted symbol");
                term = term * dv[coef_order(v)].pow(e);
            } else {
                rest.emplace_back(v, e);
            }
        }
        for (const auto& [mt, ct] : term.terms()) out.add_term(mono_mul(mt, rest), ct);
    }
    return out;
}

// Renames S^(j) -> T^(j + shift) for every derivative order j (j + shift must
// stay >= 0).  Used to identify e.g. phi' with a when phi was a placeholder
// for an antiderivative.
inline DiffPoly shift_symbol(const DiffPoly& p, std::uint32_t from, std::uint32_t to, int shift) {
    DiffPoly out;
    for (const auto& [m, c] : p.terms()) {
        Mono nm;
        nm.reserve(m.size());
        for (const auto& [v, e] : m) {
            if (is_coef_var(v) && coef_symbol(v) == from) {
                int order = static_cast<int>(coef_order(v)) + shift;
                if (order < 0) throw std::logic_error("shift_symbol: negative derivative order");
                nm.emplace_back(coef_var(to, static_cast<std::uint32_t>(order)), e);
            } else {
                nm.emplace_back(v, e);
            }
        }
        std::sort(nm.begin(), nm.end());
        // merge equal ids (possible if to-symbol already present)
        Mono merged;
        for (const auto& f : nm) {
            if (!merged.empty() && merged.back().first == f.first)
                merged.back().second += f.second;
            else
                merged.push_back(f);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const auto& f) { return f.second == 0; }),
                     merged.end());
        out.add_term(merged, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering (documented ASCII grammar, used by the golden-file tests)
//
//   poly     := "0" | term (" + " term | " - " term)*
//   term     := [rat "*"] factor ("*" factor)*     (rat omitted when +-1)
//   rat      := int | "(" int "/" int ")"
//   factor   := name ["^" int]                      (int may be negative)
//   name     := symbol "'"{k}  |  "u"  |  "u" "x"{n}  |  "log(ux)"
//
// The dependent variable prints as `vars` ("u" by default; the
// quasitriviality map is conventionally printed in "v").

struct RenderOptions {
    std::string var = "u";
};

inline std::string render_var(VarId v, const RenderOptions& opt) {
    if (v == kLogVar) return "log(" + opt.var + "x)";
    if (is_jet_var(v)) {
        std::string s = opt.var;
        for (std::uint32_t i = 0; i < jet_order(v); ++i) s += "x";
        return s;
    }
    std::uint32_t s = coef_symbol(v);
    std::string name = (s == 0) ? opt.var : SymbolTable::instance().name(s);
    name += std::string(coef_order(v), '\'');
    return name;
}

inline std::string render(const DiffPoly& p, const RenderOptions& opt = {}) {
    if (p.is_zero()) return "0";
    auto terms = p.sorted_terms();
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms) {
        Rat a = c;
        bool neg = a < 0;
        if (neg) a = -a;
        if (first) {
            if (neg) out += "-";
            first = false;
        } else {
            out += neg ? " - " : " + ";
        }
        std::string mag;
        if (denominator(a) != 1)
            mag = "(" + rat_str(a) + ")";
        else if (numerator(a) != 1 || m.empty())
            mag = rat_str(a);
        Mono factors = m;
        std::sort(factors.begin(), factors.end(), [](const auto& a, const auto& b) {
            return detail::var_key(a.first) < detail::var_key(b.first);
        });
        std::string mono;
        for (const auto& [v, e] : factors) {
            if (!mono.empty()) mono += "*";
            mono += render_var(v, opt);
            if (e != 1) mono += "^" + std::to_string(e);
        }
        if (!mag.empty() && !mono.empty())
            out += mag + "*" + mono;
        else
            out += mag + mono;
    }
    return out;
}

// ---------------------------------------------------------------------------
// EpsSeries: sum_k eps^k * (DiffPoly), truncated at max_order (inclusive).

class EpsSeries {
public:
    explicit EpsSeries(int max_order = 4) : max_order_(max_order) {}

    static EpsSeries from(const DiffPoly& p, int order, int max_order) {
        EpsSeries s(max_order);
        s.set(order, p);
        return s;
    }

    int max_order() const { return max_order_; }
    const std::map<int, DiffPoly>& components() const { return comp_; }

    DiffPoly at(int k) const {
        auto it = comp_.find(k);
        return it == comp_.end() ? DiffPoly::zero() : it->second;
    }

    void set(int k, const DiffPoly& p) {
        if (k < 0) throw std::logic_error("EpsSeries: negative order");
        if (k > max_order_) return;  // beyond truncation
        if (p.is_zero())
            comp_.erase(k);
        else
            comp_[k] = p;
    }

    void add(int k, const DiffPoly& p) { set(k, at(k) + p); }

    bool is_zero() const { return comp_.empty(); }

    EpsSeries truncated(int new_max) const {
        EpsSeries out(new_max);
        for (const auto& [k, p] : comp_)
            if (k <= new_max) out.comp_[k] = p;
        return out;
    }

    // Multiplies by eps^shift.
    EpsSeries eps_shifted(int shift) const {
        EpsSeries out(max_order_);
        for (const auto& [k, p] : comp_) out.set(k + shift, p);
        return out;
    }

    friend EpsSeries operator+(const EpsSeries& a, const EpsSeries& b) {
        EpsSeries out(std::min(a.max_order_, b.max_order_));
        for (const auto& [k, p] : a.comp_)
            if (k <= out.max_order_) out.add(k, p);
        for (const auto& [k, p] : b.comp_)
            if (k <= out.max_order_) out.add(k, p);
        return out;
    }
    friend EpsSeries operator-(const EpsSeries& a, const EpsSeries& b) { return a + (b * Rat(-1)); }
    friend EpsSeries operator*(const EpsSeries& a, const Rat& s) {
        EpsSeries out(a.max_order_);
        if (s == 0) return out;
        for (const auto& [k, p] : a.comp_) out.comp_[k] = p * s;
        return out;
    }
    friend EpsSeries operator*(const EpsSeries& a, const EpsSeries& b) {
        EpsSeries out(std::min(a.max_order_, b.max_order_));
        for (const auto& [ka, pa] : a.comp_)
            for (const auto& [kb, pb] : b.comp_)
                if (ka + kb <= out.max_order_) out.add(ka + kb, pa * pb);
        return out;
    }
    friend bool operator==(const EpsSeries& a, const EpsSeries& b) {
        int top = std::min(a.max_order_, b.max_order_);
        for (int k = 0; k <= top; ++k)
            if (a.at(k) != b.at(k)) return false;
        return true;
    }

    EpsSeries map(const std::function<DiffPoly(const DiffPoly&)>& f) const {
        EpsSeries out(max_order_);
        for (const auto& [k, p] : comp_) out.set(k, f(p));
        return out;
    }

private:
    int max_order_;
    std::map<int, DiffPoly> comp_;
};

inline EpsSeries total_derivative(const EpsSeries& s) {
    return s.map([](const DiffPoly& p) { return total_derivative(p); });
}

// delta H / delta u, per eps component.
inline EpsSeries variational_derivative(const EpsSeries& h) {
    return h.map([](const DiffPoly& p) { return euler_operator(p); });
}

inline std::string render(const EpsSeries& s, const RenderOptions& opt = {}) {
    std::string out;
    for (const auto& [k, p] : s.components()) {
        out += "eps^" + std::to_string(k) + ": " + render(p, opt) + "\n";
    }
    if (out.empty()) out = "0\n";
    return out;
}

// ---------------------------------------------------------------------------
// PoissonOperator: sum_k eps^k sum_j A_{k,j} o D_x^j, the local operator of a
// bracket {u(x), u(y)} = sum A_{k,j} delta^(j)(x-y).

class PoissonOperator {
public:
    struct Entry {
        int eps_order;
        int deriv_order;
        DiffPoly coef;
    };

    PoissonOperator() = default;

    void add(int eps_order, int deriv_order, const DiffPoly& coef) {
        if (coef.is_zero()) return;
        entries_.push_back({eps_order, deriv_order, coef});
    }

    const std::vector<Entry>& entries() const { return entries_; }

    static PoissonOperator dx() {
        PoissonOperator op;
        op.add(0, 1, DiffPoly::one());
        return op;
    }

    // L(psi) with psi an EpsSeries.
    EpsSeries apply(const EpsSeries& psi, int max_order) const {
        EpsSeries out(max_order);
        for (const auto& e : entries_) {
            for (const auto& [k, p] : psi.components()) {
                int order = e.eps_order + k;
                if (order > max_order) continue;
                out.add(order, e.coef * dxn(p, e.deriv_order));
            }
        }
        return out;
    }

private:
    std::vector<Entry> entries_;
};

// Density of the Poisson bracket {H1, H2} with operator L:
//   (delta H1/delta u) * L(delta H2/delta u).
// Commutativity of the Hamiltonians is euler_operator(result) == 0.
inline EpsSeries bracket_density(const EpsSeries& h1, const EpsSeries& h2,
                                 const PoissonOperator& L, int max_order) {
    if (h1.max_order() < max_order || h2.max_order() < max_order)
        throw std::logic_error("bracket_density: truncation orders too small");
    EpsSeries e1 = variational_derivative(h1).truncated(max_order);
    EpsSeries e2 = variational_derivative(h2).truncated(max_order);
    return (e1 * L.apply(e2, max_order)).truncated(max_order);
}

// ---------------------------------------------------------------------------
// Lie transform.
//
// lie_transform(K, h) applies the inverse canonical flow of the Hamiltonian
// K = int k dx to h (equivalently, the forward flow generated by -K):
//
//   result = sum_n (eps^n / n!) (-v_P)^n (h),   P = D_x(E(k)),
//
// where v_P is the prolonged evolutionary derivation and each application
// carries one explicit power of the series parameter eps.  Applied to the
// coordinate u it yields the point map u - eps{u,K} + eps^2/2 {{u,K},K} - ...;
// applied to a Hamiltonian density it transforms the functional modulo total
// derivatives.

inline EpsSeries coordinate(int max_order) {
    return EpsSeries::from(DiffPoly::u(), 0, max_order);
}

namespace detail {

// v_P(h) with both P and h eps-graded.
inline EpsSeries evolutionary_apply_series(const EpsSeries& P, const EpsSeries& h, int max_order) {
    EpsSeries out(max_order);
    for (const auto& [kp, pp] : P.components())
        for (const auto& [kh, ph] : h.components())
            if (kp + kh <= max_order) out.add(kp + kh, evolutionary_apply(pp, ph));
    return out;
}

}  // namespace detail

inline EpsSeries lie_transform(const EpsSeries& K, const EpsSeries& target, int max_order) {
    for (const auto& [k, p] : K.components())
        if (k < 1 && !p.is_zero())
            throw std::logic_error("lie_transform: generator must have eps-order >= 1");
    EpsSeries P = total_derivative(variational_derivative(K)).truncated(max_order);
    EpsSeries result = target.truncated(max_order);
    EpsSeries term = result;
    // Each bracket application adds at least eps^2 (one explicit eps, one from K).
    for (int n = 1; 2 * n <= max_order; ++n) {
        term = detail::evolutionary_apply_series(P, term, max_order);
        term = term.eps_shifted(1) * Rat(-1, n);
        if (term.is_zero()) break;
        result = result + term;
    }
    return result.truncated(max_order);
}

}  // namespace hampert::diffalg
