#pragma once

// Exact polynomial ring for the isomonodromy compatibility checks of the
// fourth-order ODE's Lax pair.  Variables: the U-jets U, U', U'', ... (ids
// 0..), their T-derivatives UT^(k) = d_T d_X^k U (ids 100..), and the
// indeterminates X, T, z.  Deliberately independent of the jet algebra in
// diffalg: the two engines share no code paths.

#include "hampert/mutation.hpp"
#include "hampert/rational.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

namespace hampert::lax {

constexpr int kU = 0;     // U^(n) = kU + n
constexpr int kUT = 100;  // d_T U^(n) = kUT + n
constexpr int kX = 200;
constexpr int kT = 201;
constexpr int kZ = 202;

using Mono = std::vector<std::pair<int, int>>;  // sorted (var, exp>0)

class Poly {
public:
    using Terms = std::map<Mono, Rat>;

    Poly() = default;
    static Poly constant(const Rat& r) {
        Poly p;
        p.add_term({}, r);
        return p;
    }
    static Poly var(int v, int e = 1) {
        Poly p;
        p.add_term({{v, e}}, Rat(1));
        return p;
    }

    bool is_zero() const { return t_.empty(); }
    const Terms& terms() const { return t_; }

    void add_term(const Mono& m, const Rat& c) {
        if (c == 0) return;
        auto [it, fresh] = t_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) t_.erase(it);
        }
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        Poly out = a;
        for (const auto& [m, c] : b.t_) out.add_term(m, c);
        return out;
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        Poly out = a;
        for (const auto& [m, c] : b.t_) out.add_term(m, -c);
        return out;
    }
    friend Poly operator*(const Poly& a, const Rat& s) {
        Poly out;
        if (s == 0) return out;
        for (const auto& [m, c] : a.t_) out.t_.emplace(m, c * s);
        return out;
    }
    friend Poly operator*(const Rat& s, const Poly& a) { return a * s; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly out;
        for (const auto& [ma, ca] : a.t_)
            for (const auto& [mb, cb] : b.t_) {
                Mono m;
                std::size_t i = 0, j = 0;
                while (i < ma.size() && j < mb.size()) {
                    if (ma[i].first < mb[j].first)
                        m.push_back(ma[i++]);
                    else if (mb[j].first < ma[i].first)
                        m.push_back(mb[j++]);
                    else {
                        m.emplace_back(ma[i].first, ma[i].second + mb[j].second);
                        ++i, ++j;
                    }
                }
                for (; i < ma.size(); ++i) m.push_back(ma[i]);
                for (; j < mb.size(); ++j) m.push_back(mb[j]);
                out.add_term(m, ca * cb);
            }
        return out;
    }
    friend bool operator==(const Poly& a, const Poly& b) { return a.t_ == b.t_; }

    int max_z_power() const {
        int mx = 0;
        for (const auto& [m, c] : t_)
            for (const auto& [v, e] : m)
                if (v == kZ) mx = std::max(mx, e);
        return mx;
    }

    Poly z_coefficient(int power) const {
        Poly out;
        for (const auto& [m, c] : t_) {
            int zp = 0;
            Mono rest;
            for (const auto& [v, e] : m) {
                if (v == kZ)
                    zp = e;
                else
                    rest.emplace_back(v, e);
            }
            if (zp == power) out.add_term(rest, c);
        }
        return out;
    }

private:
    Terms t_;
};

namespace detail {
// Single-variable-replacement derivation: d(v) given by dvar.
template <class DVar>
Poly derive(const Poly& p, DVar&& dvar) {
    Poly out;
    for (const auto& [m, c] : p.terms()) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto [v, e] = m[i];
            Poly dv = dvar(v);
            if (dv.is_zero()) continue;
            Mono rest = m;
            if (e == 1)
                rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
            else
                rest[i].second = e - 1;
            Poly factor;
            factor.add_term(rest, c * Rat(e));
            out = out + factor * dv;
        }
    }
    return out;
}
}  // namespace detail

// d/dX along solutions: U^(n) -> U^(n+1), UT^(n) -> UT^(n+1), X -> 1.
inline Poly dX(const Poly& p) {
    return detail::derive(p, [](int v) {
        if (v >= kUT && v < kX) return Poly::var(v + 1);
        if (v >= kU && v < kUT) return Poly::var(v + 1);
        if (v == kX) return Poly::constant(Rat(1));
        return Poly();
    });
}

// d/dT along solutions: U^(n) -> UT^(n), T -> 1.  (No second T-derivatives
// are ever needed: the matrices contain no UT variables.)
inline Poly dT(const Poly& p) {
    return detail::derive(p, [](int v) {
        if (v >= kU && v < kUT) return Poly::var(kUT + (v - kU));
        if (v == kT) return Poly::constant(Rat(1));
        return Poly();
    });
}

// Formal d/dz.
inline Poly dz(const Poly& p) {
    return detail::derive(p, [](int v) { return v == kZ ? Poly::constant(Rat(1)) : Poly(); });
}

// Substitutes var -> value (any nonnegative power).
inline Poly substitute(const Poly& p, int var, const Poly& value) {
    Poly out;
    for (const auto& [m, c] : p.terms()) {
        Poly term = Poly::constant(c);
        Mono rest;
        int power = 0;
        for (const auto& [v, e] : m) {
            if (v == var)
                power = e;
            else
                rest.emplace_back(v, e);
        }
        Poly base;
        base.add_term(rest, Rat(1));
        term = term * base;
        for (int i = 0; i < power; ++i) term = term * value;
        out = out + term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matrices and the pair

struct Mat2 {
    Poly a, b, c, d;  // [[a, b], [c, d]]

    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
                x.c * y.b + x.d * y.d};
    }
    Mat2 map(const auto& f) const { return {f(a), f(b), f(c), f(d)}; }
    bool is_zero() const { return a.is_zero() && b.is_zero() && c.is_zero() && d.is_zero(); }
};

inline Mat2 commutator(const Mat2& x, const Mat2& y) { return x * y - y * x; }

namespace detail {
inline Poly U(int n = 0) { return Poly::var(kU + n); }
inline Poly Z(int e = 1) { return Poly::var(kZ, e); }
inline Rat R(Mutator* m, const std::string& site, long long n, long long d = 1) {
    return mutation_detail::mut(m, site, n, d);
}
}  // namespace detail

// The z-equation matrix (polynomial in z, with X explicit).
inline Mat2 build_W(Mutator* mu = nullptr) {
    using namespace detail;
    const std::string s = "lax.W";
    Poly diag = R(mu, s, 12) * U() * U(1) + R(mu, s, 8) * Z() * U(1) + U(3);
    Poly w12 = R(mu, s, 2) * (R(mu, s, 16) * Z(2) + R(mu, s, 8) * Z() * U() +
                              R(mu, s, 6) * U() * U() + U(2) - R(mu, s, 60) * Poly::var(kT));
    Poly w21e = R(mu, s, 32) * Z(3) - R(mu, s, 16) * Z(2) * U() -
                R(mu, s, 2) * Z() * (R(mu, s, 2) * U() * U() + U(2) +
                                     R(mu, s, 60) * Poly::var(kT)) +
                R(mu, s, 8) * U() * U() * U() + R(mu, s, 2) * U(2) * U() - U(1) * U(1) +
                R(mu, s, 120) * Poly::var(kX);
    Rat pref = R(mu, s, -1, 120);
    return {pref * diag, pref * w12, pref * R(mu, s, 2) * w21e, pref * Rat(-1) * diag};
}

// The X-equation matrix.
inline Mat2 build_Umat() {
    using namespace detail;
    return {Poly(), Poly::constant(Rat(-1)), Rat(2) * U() - Rat(2) * Z(), Poly()};
}

// The T-equation matrix.
inline Mat2 build_V(Mutator* mu = nullptr) {
    using namespace detail;
    const std::string s = "lax.V";
    Rat pref = R(mu, s, 1, 6);
    Poly v21 = R(mu, s, 8) * Z(2) - R(mu, s, 4) * Z() * U() - R(mu, s, 4) * U() * U() - U(2);
    return {pref * U(1), pref * (R(mu, s, 2) * U() + R(mu, s, 4) * Z()), pref * v21,
            pref * Rat(-1) * U(1)};
}

// Right-hand side of the fourth-order ODE solved for X:
//   X = T U - [U^3/6 + (U'^2 + 2 U U'')/24 + U''''/240]
inline Poly main_ode_rhs() {
    using namespace detail;
    return Poly::var(kT) * U() -
           (Rat(1, 6) * U() * U() * U() + Rat(1, 24) * (U(1) * U(1) + Rat(2) * U() * U(2)) +
            Rat(1, 240) * U(4));
}

// The same ODE solved for the top jet:
//   U'''' = 240 (T U - X) - 40 U^3 - 10 (U'^2 + 2 U U'')
inline Poly u4_solved() {
    using namespace detail;
    return Rat(240) * (Poly::var(kT) * U() - Poly::var(kX)) - Rat(40) * U() * U() * U() -
           Rat(10) * (U(1) * U(1) + Rat(2) * U() * U(2));
}

// d_T U = -(U U' + U'''/12), the KdV flow of the parameter.
inline Poly kdv_ut() {
    using namespace detail;
    return Rat(-1) * (U() * U(1) + Rat(1, 12) * U(3));
}

// Reduction onto the solution manifold of the ODE: optionally substitutes
// every d_T U^(k) by the KdV flow, then eliminates U^(k) for k >= 4 using
// the ODE and its X-derivatives (each solved for its top jet).  X and T stay
// free; the manifold coordinates are U, U', U'', U''', X, T.
inline Poly reduce(const Poly& p, bool use_kdv) {
    Poly out = p;
    if (use_kdv) {
        int top = -1;
        for (const auto& [m, c] : out.terms())
            for (const auto& [v, e] : m)
                if (v >= kUT && v < kX) top = std::max(top, v - kUT);
        if (top >= 0) {
            std::vector<Poly> rhs{kdv_ut()};
            for (int k = 1; k <= top; ++k) rhs.push_back(dX(rhs.back()));
            for (int k = top; k >= 0; --k) out = substitute(out, kUT + k, rhs[k]);
        }
    }
    int top = 0;
    for (const auto& [m, c] : out.terms())
        for (const auto& [v, e] : m)
            if (v >= kU && v < kUT) top = std::max(top, v - kU);
    if (top >= 4) {
        std::vector<Poly> expr(static_cast<std::size_t>(top) + 1);
        expr[4] = u4_solved();
        for (int k = 5; k <= top; ++k)
            expr[static_cast<std::size_t>(k)] =
                substitute(dX(expr[static_cast<std::size_t>(k - 1)]), kU + 4, expr[4]);
        for (int k = top; k >= 4; --k)
            out = substitute(out, kU + k, expr[static_cast<std::size_t>(k)]);
    }
    return out;
}

}  // namespace hampert::lax
