#pragma once

// The universal critical profile: scaling frame from the catastrophe data,
// comparison of direct simulations against the special solution U(X;T), and
// the scaling-exponent fits.
//
//   u ~ v0 + (eps^2 c0 / kappa^2)^{1/7}
//            U( (x - a0 (t-t0) - x0) / (kappa c0^3 eps^6)^{1/7} ;
//               a0' (t-t0) / (kappa^3 c0^2 eps^4)^{1/7} )  + O(eps^{4/7})

#include "hampert/characteristics.hpp"
#include "hampert/models.hpp"
#include "hampert/numeval.hpp"
#include "hampert/p2.hpp"
#include "hampert/pde.hpp"
#include "hampert/rational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hampert::uni {

struct OutOfTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WindowNotCovered : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegionTooCloseToCatastrophe : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConstantC : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Frame

struct CriticalFrame {
    double x0, t0, v0;
    double a0, a0p, kappa;
    double c0;
};

// Frame constants always come from the catastrophe solve, never hand-entered:
// this keeps the sign convention of kappa consistent.
inline CriticalFrame make_frame(const chars::CharacteristicData& data, const exprfn::Expr& c) {
    chars::CatastrophePoint cp = chars::find_catastrophe(data);
    CriticalFrame f;
    f.x0 = cp.x0;
    f.t0 = cp.t0;
    f.v0 = cp.v0;
    f.a0 = cp.a0;
    f.a0p = cp.a0p;
    f.kappa = cp.kappa;
    f.c0 = exprfn::eval(c, cp.v0);
    if (f.c0 == 0.0) throw chars::Degenerate("make_frame: c(v0) = 0, solution not generic");
    return f;
}

// signed seventh root
inline double root7(double x) { return std::copysign(std::pow(std::abs(x), 1.0 / 7.0), x); }

struct ScaleFactors {
    double amp;     // (eps^2 c0 / kappa^2)^{1/7}
    double xscale;  // (kappa c0^3 eps^6)^{1/7}
    double tscale;  // (kappa^3 c0^2 eps^4)^{1/7}
};

inline ScaleFactors scales(const CriticalFrame& f, double eps) {
    ScaleFactors s;
    s.amp = root7(eps * eps * f.c0 / (f.kappa * f.kappa));
    s.xscale = root7(f.kappa * std::pow(f.c0, 3) * std::pow(eps, 6));
    s.tscale = root7(std::pow(f.kappa, 3) * f.c0 * f.c0 * std::pow(eps, 4));
    return s;
}

// ---------------------------------------------------------------------------
// Exact bookkeeping of the scaling exponents as (e_eps, e_c0, e_kappa)
// triples of rationals; the four consistency identities are what the
// rescaling argument needs.

struct ScaleExponents {
    Rat eps, c0, kappa;
    friend bool operator==(const ScaleExponents& a, const ScaleExponents& b) {
        return a.eps == b.eps && a.c0 == b.c0 && a.kappa == b.kappa;
    }
    ScaleExponents operator+(const ScaleExponents& o) const {
        return {eps + o.eps, c0 + o.c0, kappa + o.kappa};
    }
    ScaleExponents operator*(int n) const { return {eps * n, c0 * n, kappa * n}; }
};

inline ScaleExponents amplitude_exponents() { return {rat(2, 7), rat(1, 7), rat(-2, 7)}; }
inline ScaleExponents xscale_exponents() { return {rat(6, 7), rat(3, 7), rat(1, 7)}; }
inline ScaleExponents tscale_exponents() { return {rat(4, 7), rat(2, 7), rat(3, 7)}; }

inline bool scaling_exponents_consistent() {
    ScaleExponents amp = amplitude_exponents();
    ScaleExponents xs = xscale_exponents();
    ScaleExponents ts = tscale_exponents();
    ScaleExponents kappa{rat(0), rat(0), rat(1)};
    ScaleExponents eps2c0{rat(2), rat(1), rat(0)};
    ScaleExponents eps4c02{rat(4), rat(2), rat(0)};
    bool ok = true;
    ok = ok && (amp + ts == xs);                    // X = (amp) (T-scale) balance
    ok = ok && (kappa + amp * 3 == xs);             // cubic term
    ok = ok && (kappa + eps2c0 + amp * 2 == xs * 3);  // eps^2 jet terms
    ok = ok && (kappa + eps4c02 + amp == xs * 5);   // eps^4 jet term
    return ok;
}

// ---------------------------------------------------------------------------
// Interpolation table over the special solution

class P2Table {
public:
    explicit P2Table(std::vector<p2::P2Solution> sols) : sols_(std::move(sols)) {
        if (sols_.size() < 4) throw std::invalid_argument("P2Table: need >= 4 T-slices");
        for (std::size_t i = 1; i < sols_.size(); ++i) {
            if (sols_[i].X != sols_[0].X) throw p2::GridMismatch("P2Table: mixed grids");
            if (!(sols_[i].T > sols_[i - 1].T))
                throw std::invalid_argument("P2Table: T not ascending");
        }
        dT_ = sols_[1].T - sols_[0].T;
        for (std::size_t i = 1; i + 1 < sols_.size(); ++i)
            if (std::abs(sols_[i + 1].T - sols_[i].T - dT_) > 1e-9 * std::abs(dT_))
                throw std::invalid_argument("P2Table: T spacing not uniform");
    }

    double Tmin() const { return sols_.front().T; }
    double Tmax() const { return sols_.back().T; }
    double Xmax() const { return sols_[0].X.back(); }
    const std::vector<p2::P2Solution>& slices() const { return sols_; }

    // Bicubic: 4-point Lagrange in X and in T (exact on the nodes).
    double operator()(double X, double T) const {
        const double tol = 1e-9;
        if (T < Tmin() - tol || T > Tmax() + tol)
            throw OutOfTable("P2Table: T outside the table");
        const auto& Xs = sols_[0].X;
        if (X < Xs.front() - tol || X > Xs.back() + tol)
            throw OutOfTable("P2Table: X outside the table");

        int iT = static_cast<int>(std::floor((T - Tmin()) / dT_));
        iT = std::clamp(iT, 0, static_cast<int>(sols_.size()) - 2);
        int jT = std::clamp(iT - 1, 0, static_cast<int>(sols_.size()) - 4);

        double h = sols_[0].h();
        int iX = static_cast<int>(std::floor((X - Xs.front()) / h));
        iX = std::clamp(iX, 0, static_cast<int>(Xs.size()) - 2);
        int jX = std::clamp(iX - 1, 0, static_cast<int>(Xs.size()) - 4);

        double uT[4];
        for (int a = 0; a < 4; ++a) {
            const auto& U = sols_[static_cast<std::size_t>(jT + a)].U;
            double w[4];
            lagrange4((X - Xs[static_cast<std::size_t>(jX)]) / h, w);
            double s = 0;
            for (int b = 0; b < 4; ++b) s += w[b] * U[static_cast<std::size_t>(jX + b)];
            uT[a] = s;
        }
        double w[4];
        lagrange4((T - sols_[static_cast<std::size_t>(jT)].T) / dT_, w);
        double out = 0;
        for (int a = 0; a < 4; ++a) out += w[a] * uT[a];
        return out;
    }

private:
    // weights of cubic Lagrange interpolation on nodes {0,1,2,3} at s
    static void lagrange4(double s, double w[4]) {
        w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
        w[1] = s * (s - 2) * (s - 3) / 2.0;
        w[2] = -s * (s - 1) * (s - 3) / 2.0;
        w[3] = s * (s - 1) * (s - 2) / 6.0;
    }

    std::vector<p2::P2Solution> sols_;
    double dT_;
};

inline double universal_profile(double x, double t, const CriticalFrame& f, double eps,
                                const P2Table& table) {
    ScaleFactors s = scales(f, eps);
    double X = (x - f.a0 * (t - f.t0) - f.x0) / s.xscale;
    double T = f.a0p * (t - f.t0) / s.tscale;
    return f.v0 + s.amp * table(X, T);
}

// ---------------------------------------------------------------------------
// Comparison of a simulation against the profile over a scaled window

struct Window {
    double Xmax = 2.0;
    double Tmin = -1.0;
    double Tmax = 0.0;
};

struct CompareResult {
    double sup = 0;            // sup |u_sim - profile| over the window
    double sup_over_amp = 0;   // same, normalized by the eps^{2/7} amplitude
    int points = 0;
};

inline CompareResult compare(const pde::Trajectory& traj, const CriticalFrame& f, double eps,
                             const P2Table& table, const Window& win = {}) {
    ScaleFactors s = scales(f, eps);
    CompareResult out;
    const double ttol = 1e-9;
    for (std::size_t it = 0; it < traj.times.size(); ++it) {
        double T = f.a0p * (traj.times[it] - f.t0) / s.tscale;
        if (T < win.Tmin - ttol || T > win.Tmax + ttol) continue;
        for (std::size_t i = 0; i < traj.x.size(); ++i) {
            double X = (traj.x[i] - f.a0 * (traj.times[it] - f.t0) - f.x0) / s.xscale;
            if (std::abs(X) > win.Xmax) continue;
            double prof = f.v0 + s.amp * table(X, T);
            out.sup = std::max(out.sup, std::abs(traj.u[it][i] - prof));
            ++out.points;
        }
    }
    if (out.points == 0) throw WindowNotCovered("compare: no samples inside the scaled window");
    out.sup_over_amp = out.sup / std::abs(s.amp);
    return out;
}

// ---------------------------------------------------------------------------
// Scaling-exponent fit: least squares of log(residual) on log(eps)

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double stderr_slope = 0;
};

inline FitResult fit_exponent(const std::vector<double>& eps,
                              const std::vector<double>& residuals) {
    if (eps.size() != residuals.size() || eps.size() < 3)
        throw InsufficientData("fit_exponent: need >= 3 (eps, residual) pairs");
    const std::size_t n = eps.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log(eps[i]), y = std::log(residuals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::log(residuals[i]) - (fit.intercept + fit.slope * std::log(eps[i]));
        ss += r * r;
    }
    if (n > 2) fit.stderr_slope = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
    return fit;
}

// ---------------------------------------------------------------------------
// Quasitriviality comparison: evaluates the order-eps^4 substitution on the
// characteristic solution (jets by exact series inversion) and measures
// sup |u_sim - u_quasi| over a strictly pre-catastrophe region.

struct Region {
    double t_lo, t_hi;
    double x_lo, x_hi;
    double min_gprime = 0.2;  // |d(a t + b)/dv| threshold away from breaking
};

inline double quasitriviality_residual(const pde::Trajectory& traj,
                                       const chars::CharacteristicData& data,
                                       const exprfn::Expr& c, const exprfn::Expr& p, double eps,
                                       const Region& region) {
    diffalg::EpsSeries map = models::build_quasitriviality_map(
        diffalg::DiffPoly::symbol("c"), diffalg::DiffPoly::symbol("p"), 4);
    std::vector<exprfn::Expr> dc{c}, dp{p};
    for (int j = 1; j <= 6; ++j) {
        dc.push_back(exprfn::derivative(dc.back()));
        dp.push_back(exprfn::derivative(dp.back()));
    }
    std::uint32_t c_id = diffalg::sym("c"), p_id = diffalg::sym("p");

    double sup = 0;
    int points = 0;
    for (std::size_t it = 0; it < traj.times.size(); ++it) {
        double t = traj.times[it];
        if (t < region.t_lo - 1e-12 || t > region.t_hi + 1e-12) continue;
        for (std::size_t i = 0; i < traj.x.size(); ++i) {
            double x = traj.x[i];
            if (x < region.x_lo || x > region.x_hi) continue;
            auto jets = chars::characteristic_jets(data, x, t, 6);
            if (std::abs(data.g(jets.v, t, 1)) < region.min_gprime)
                throw RegionTooCloseToCatastrophe(
                    "quasitriviality_residual: v_x too large inside the region");
            numeval::Bindings b;
            b.u = jets.v;
            b.jets = jets.dv;
            b.symbol = [&](std::uint32_t s, std::uint32_t j) {
                if (s == c_id) return exprfn::eval(dc.at(j), jets.v);
                if (s == p_id) return exprfn::eval(dp.at(j), jets.v);
                throw std::logic_error("unexpected symbol in quasitriviality map");
            };
            double uq = numeval::eval(map, b, eps);
            sup = std::max(sup, std::abs(traj.u[it][i] - uq));
            ++points;
        }
    }
    if (points == 0) throw WindowNotCovered("quasitriviality_residual: empty region");
    return sup;
}

// ---------------------------------------------------------------------------
// String-equation residual on a simulated constant-coefficient solution:
// max over the window of |x - S(u, u_x, ..., u_xxxx; t)| with spectral
// derivatives of the snapshot.

inline double string_residual(const pde::Trajectory& traj, const exprfn::Expr& a,
                              const exprfn::Expr& b, const exprfn::Expr& c,
                              const exprfn::Expr& p, double eps, double t, double x_lo,
                              double x_hi) {
    if (!pde::detail::is_constant(c) || !pde::detail::is_constant(p))
        throw NonConstantC("string_residual: c(u) and p(u) must be constants");
    double c0 = static_cast<double>(c->lit);
    double p0 = static_cast<double>(p->lit);

    diffalg::const_sym("c0");
    diffalg::const_sym("p0");
    diffalg::EpsSeries S = models::build_string_density(
        diffalg::DiffPoly::symbol("c0"), diffalg::DiffPoly::symbol("p0"), "a", "b", 4);

    std::vector<exprfn::Expr> da{a}, db{b};
    for (int j = 1; j <= 6; ++j) {
        da.push_back(exprfn::derivative(da.back()));
        db.push_back(exprfn::derivative(db.back()));
    }
    std::uint32_t a_id = diffalg::sym("a"), b_id = diffalg::sym("b");
    std::uint32_t c0_id = diffalg::sym("c0"), p0_id = diffalg::sym("p0");
    std::uint32_t t_id = diffalg::sym("t");

    const std::vector<double>& u = traj.at_time(t);
    pde::Spectral fft(static_cast<int>(u.size()), traj.x.back() - traj.x.front() +
                                                      (traj.x[1] - traj.x[0]));
    std::vector<std::complex<double>> uh;
    fft.forward(u, uh);
    std::vector<std::vector<double>> jets;
    for (int m = 1; m <= 4; ++m) jets.push_back(fft.derivative(uh, m, true));

    double worst = 0;
    for (std::size_t i = 0; i < traj.x.size(); ++i) {
        if (traj.x[i] < x_lo || traj.x[i] > x_hi) continue;
        numeval::Bindings bind;
        bind.u = u[i];
        bind.jets = {jets[0][i], jets[1][i], jets[2][i], jets[3][i]};
        bind.symbol = [&](std::uint32_t s, std::uint32_t j) -> double {
            if (s == a_id) return exprfn::eval(da.at(j), u[i]);
            if (s == b_id) return exprfn::eval(db.at(j), u[i]);
            if (s == c0_id) return c0;
            if (s == p0_id) return p0;
            if (s == t_id) return t;
            throw std::logic_error("unexpected symbol in string density");
        };
        worst = std::max(worst, std::abs(traj.x[i] - numeval::eval(S, bind, eps)));
    }
    return worst;
}

}  // namespace hampert::uni
