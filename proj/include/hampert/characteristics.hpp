#pragma once

// Unperturbed solutions by characteristics, x = a(v) t + b(v): pointwise
// solves, gradient-catastrophe location, the genericity constant, and the
// cubic scaling limit.

#include "hampert/exprfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hampert::chars {

struct NoBracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotMonotone : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Degenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WrongSign : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MultipleRoots : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CharacteristicData {
    exprfn::Expr a, b;
    double v_lo = -10.0, v_hi = 10.0;  // root-search bracket

    // derivative trees, prepared once
    std::vector<exprfn::Expr> da, db;  // index j = j-th derivative, 0..order

    static CharacteristicData make(const exprfn::Expr& a, const exprfn::Expr& b,
                                   double v_lo = -10.0, double v_hi = 10.0, int orders = 7) {
        CharacteristicData d;
        d.a = a;
        d.b = b;
        d.v_lo = v_lo;
        d.v_hi = v_hi;
        d.da.push_back(a);
        d.db.push_back(b);
        for (int j = 1; j <= orders; ++j) {
            d.da.push_back(exprfn::derivative(d.da.back()));
            d.db.push_back(exprfn::derivative(d.db.back()));
        }
        return d;
    }

    double g(double v, double t, int order = 0) const {
        return exprfn::eval(da.at(order), v) * t + exprfn::eval(db.at(order), v);
    }
};

struct SolveOptions {
    double rel_tol = 1e-12;
    int max_iter = 100;
    int monotone_samples = 33;
};

// Solves a(v) t + b(v) = x on the bracket.  Newton with bisection fallback;
// the characteristic map must be strictly monotone on the bracket at time t.
inline double solve_v(const CharacteristicData& d, double x, double t,
                      const SolveOptions& opt = {}) {
    double lo = d.v_lo, hi = d.v_hi;
    double glo = d.g(lo, t) - x, ghi = d.g(hi, t) - x;
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0) == (ghi > 0))
        throw NoBracket("solve_v: no sign change on [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    int sign = 0;
    for (int i = 0; i < opt.monotone_samples; ++i) {
        double v = lo + (hi - lo) * i / (opt.monotone_samples - 1);
        double gp = d.g(v, t, 1);
        if (gp == 0.0) continue;
        int s = gp > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign)
            throw NotMonotone("solve_v: characteristic map not monotone at t = " +
                              std::to_string(t));
    }
    double v = 0.5 * (lo + hi);
    const double tol = opt.rel_tol * (1.0 + std::abs(x));
    for (int it = 0; it < opt.max_iter; ++it) {
        double f = d.g(v, t) - x;
        if (std::abs(f) <= tol) return v;
        if ((f > 0) == (glo > 0))
            lo = v;
        else
            hi = v;
        double fp = d.g(v, t, 1);
        double step = (fp != 0.0) ? v - f / fp : lo - 1;  // force bisection if flat
        v = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
    }
    throw NoConvergence("solve_v: tolerance not reached");
}

struct CatastrophePoint {
    double x0, t0, v0;
    double kappa;
    double a0, a0p;
};

struct CatastropheOptions {
    double residual_tol = 1e-10;
    double kappa_tol = 1e-8;
    int scan_points = 257;
    int max_iter = 200;
};

// First catastrophe data: solves a'(v) t + b'(v) = 0, a''(v) t + b''(v) = 0
// by a 2-variable Newton seeded from a grid scan (t eliminated through
// t = -b'/a'), then validates kappa != 0 and kappa a0' > 0.
inline CatastrophePoint find_catastrophe(const CharacteristicData& d,
                                         const CatastropheOptions& opt = {}) {
    auto F2_of_v = [&](double v) {
        double ap = exprfn::eval(d.da[1], v);
        if (ap == 0.0) return std::nan("");
        double t = -exprfn::eval(d.db[1], v) / ap;
        return exprfn::eval(d.da[2], v) * t + exprfn::eval(d.db[2], v);
    };
    double seed_v = std::nan(""), prev_v = std::nan(""), prev_f = std::nan("");
    for (int i = 0; i < opt.scan_points; ++i) {
        double v = d.v_lo + (d.v_hi - d.v_lo) * i / (opt.scan_points - 1);
        double f = F2_of_v(v);
        if (std::isnan(f)) {
            prev_v = std::nan("");
            continue;
        }
        if (!std::isnan(prev_f) && ((f >= 0) != (prev_f >= 0))) {
            seed_v = 0.5 * (prev_v + v);
            break;
        }
        prev_v = v;
        prev_f = f;
    }
    if (std::isnan(seed_v)) throw NoConvergence("find_catastrophe: no seed in bracket");

    double v = seed_v;
    double ap = exprfn::eval(d.da[1], v);
    if (ap == 0.0) throw NoConvergence("find_catastrophe: a' vanishes at seed");
    double t = -exprfn::eval(d.db[1], v) / ap;
    // Iterated to step stagnation, not just small residuals: a degenerate
    // root (kappa -> 0) converges only linearly and must be pushed to
    // machine precision for the kappa test to see it.
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        double f1 = d.g(v, t, 1);
        double f2 = d.g(v, t, 2);
        // J = [[d f1/dv, d f1/dt], [d f2/dv, d f2/dt]]
        double j11 = d.g(v, t, 2), j12 = exprfn::eval(d.da[1], v);
        double j21 = d.g(v, t, 3), j22 = exprfn::eval(d.da[2], v);
        double det = j11 * j22 - j12 * j21;
        if (det == 0.0) {
            if (std::abs(f1) <= opt.residual_tol && std::abs(f2) <= opt.residual_tol) {
                converged = true;
                break;
            }
            throw NoConvergence("find_catastrophe: singular Newton system");
        }
        double dv = (f1 * j22 - f2 * j12) / det;
        double dt = (j11 * f2 - j21 * f1) / det;
        v -= dv;
        t -= dt;
        if (std::abs(f1) <= opt.residual_tol && std::abs(f2) <= opt.residual_tol &&
            std::abs(dv) + std::abs(dt) <= 1e-13 * (1.0 + std::abs(v) + std::abs(t))) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoConvergence("find_catastrophe: Newton stalled");

    CatastrophePoint cp;
    cp.v0 = v;
    cp.t0 = t;
    cp.x0 = d.g(v, t);
    cp.kappa = -d.g(v, t, 3);
    cp.a0 = exprfn::eval(d.da[0], v);
    cp.a0p = exprfn::eval(d.da[1], v);
    if (std::abs(cp.kappa) <= opt.kappa_tol)
        throw Degenerate("find_catastrophe: kappa = 0 (genericity fails)");
    if (cp.kappa * cp.a0p <= 0.0)
        throw WrongSign("find_catastrophe: kappa a0' <= 0");
    return cp;
}

// Unique real root of  xbar = a0' vbar tbar - kappa vbar^3 / 6  in the
// single-root regime (Cardano, continuous in xbar), polished by Newton.
inline double cubic_limit(double xbar, double tbar, double a0p, double kappa) {
    if (kappa * a0p <= 0.0) throw WrongSign("cubic_limit: kappa a0' <= 0");
    // v^3 + P v + Q = 0
    double P = -6.0 * a0p * tbar / kappa;
    double Q = 6.0 * xbar / kappa;
    double D = 0.25 * Q * Q + P * P * P / 27.0;
    if (D < 0.0)
        throw MultipleRoots("cubic_limit: three real roots (inside the fold, tbar > 0)");
    double s = std::sqrt(D);
    double v = std::cbrt(-0.5 * Q + s) + std::cbrt(-0.5 * Q - s);
    for (int it = 0; it < 3; ++it) {  // polish
        double f = v * v * v + P * v + Q;
        double fp = 3 * v * v + P;
        if (fp != 0.0) v -= f / fp;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Jets of the characteristic solution: derivatives d^m v / dx^m obtained by
// inverting the Taylor series of x = g(v) around the solve point (exact up to
// round-off; no finite differencing).

// Input: g^(1..n) at v; output: v^(1..n) with respect to x.
inline std::vector<double> inverse_jet(const std::vector<double>& g_derivs) {
    const std::size_t n = g_derivs.size();
    if (n == 0 || g_derivs[0] == 0.0)
        throw NotMonotone("inverse_jet: vanishing first derivative");
    // s_k = g^(k)/k!, W(y) = sum c_m y^m with sum_k s_k W^k = y.
    std::vector<double> s(n + 1, 0.0);
    double fact = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        fact *= static_cast<double>(k);
        s[k] = g_derivs[k - 1] / fact;
    }
    std::vector<double> c(n + 1, 0.0);
    c[1] = 1.0 / s[1];
    // Wpow[k] = coefficients of W(y)^k, built incrementally per order.
    for (std::size_t m = 2; m <= n; ++m) {
        // coefficient of y^m in sum_{k=2..m} s_k W^k, using c_1..c_{m-1}
        std::vector<double> Wk(n + 1, 0.0);  // W^1 truncated to degree m-1
        for (std::size_t i = 1; i < m; ++i) Wk[i] = c[i];
        std::vector<double> acc(n + 1, 0.0);
        std::vector<double> cur = Wk;  // W^k
        for (std::size_t k = 2; k <= m; ++k) {
            // cur <- cur * W (truncate at degree m)
            std::vector<double> next(n + 1, 0.0);
            for (std::size_t i = 1; i <= m; ++i)
                for (std::size_t j = 1; i + j <= m; ++j) next[i + j] += cur[i] * Wk[j];
            cur = next;
            acc[m] += s[k] * cur[m];
        }
        c[m] = -acc[m] / s[1];
    }
    std::vector<double> out(n, 0.0);
    fact = 1.0;
    for (std::size_t m = 1; m <= n; ++m) {
        fact *= static_cast<double>(m);
        out[m - 1] = fact * c[m];
    }
    return out;
}

struct CharacteristicJets {
    double v;
    std::vector<double> dv;  // dv[m-1] = d^m v / dx^m
};

inline CharacteristicJets characteristic_jets(const CharacteristicData& d, double x, double t,
                                              int order, const SolveOptions& opt = {}) {
    CharacteristicJets out;
    out.v = solve_v(d, x, t, opt);
    std::vector<double> g;
    for (int k = 1; k <= order; ++k) g.push_back(d.g(out.v, t, k));
    out.dv = inverse_jet(g);
    return out;
}

}  // namespace hampert::chars
