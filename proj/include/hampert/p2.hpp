#pragma once

// Numerical construction of the smooth solution U(X; T) of the fourth-order
// ODE  X = T U - [U^3/6 + (U'^2 + 2 U U'')/24 + U''''/240]  (the second
// member of the Painleve-I hierarchy), with asymptotic boundary data and
// continuation in T.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hampert::p2 {

struct NotInAsymptoticRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NewtonDiverged : std::runtime_error {
    double last_good_T;
    NewtonDiverged(const std::string& what, double lastT = std::nan(""))
        : std::runtime_error(what), last_good_T(lastT) {}
};
struct BlowUpDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionTooCoarse : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Asymptotic expansion.  In scale-free variables (valid for every T provided
// the cubic root is far from the fold):
//
//   y solves X = T y - y^3/6     (unique real root in the admissible regime)
//   U ~ y + (3y^2 + 2T) / (3 (y^2 - 2T)^4)
//         - y (189 y^4 + 972 T y^2 + 436 T^2) / (9 (y^2 - 2T)^9)
//
// For T < 0 this is the classical (-T)^(1/2)-scaled three-term expansion in
// w = y/(-T)^(1/2); the rational form above avoids fractional powers and is
// usable for |X| large at any T.

inline double leading_root(double X, double T) {
    // y^3 + P y + Q = 0 with P = -6T, Q = 6X
    double P = -6.0 * T, Q = 6.0 * X;
    double D = 0.25 * Q * Q + P * P * P / 27.0;
    if (D < 0.0)
        throw NotInAsymptoticRegime("leading cubic is inside the fold (T > 0, |X| small)");
    double s = std::sqrt(D);
    double y = std::cbrt(-0.5 * Q + s) + std::cbrt(-0.5 * Q - s);
    for (int it = 0; it < 4; ++it) {
        double f = y * y * y + P * y + Q;
        double fp = 3 * y * y + P;
        if (fp != 0.0) y -= f / fp;
    }
    return y;
}

inline double asymptotic_U(double X, double T, int terms = 3) {
    if (terms < 1 || terms > 3) throw std::invalid_argument("asymptotic_U: terms in 1..3");
    double y = leading_root(X, T);
    double U = y;
    double d = y * y - 2.0 * T;
    double corr1 = (3.0 * y * y + 2.0 * T) / (3.0 * d * d * d * d);
    double scale = std::abs(y) + std::sqrt(std::max(-T, 0.0));
    if (std::abs(corr1) > 0.10 * scale)
        throw NotInAsymptoticRegime("first correction exceeds 10% of the leading term");
    if (terms >= 2) U += corr1;
    if (terms >= 3) {
        double d9 = std::pow(d, 9);
        U -= y * (189.0 * std::pow(y, 4) + 972.0 * T * y * y + 436.0 * T * T) / (9.0 * d9);
    }
    return U;
}

// ---------------------------------------------------------------------------

struct P2Solution {
    double T = 0;
    std::vector<double> X;  // N+1 uniform points on [-L, L]
    std::vector<double> U;
    double residual_norm = 0;
    int boundary_terms = 3;

    double L() const { return X.empty() ? 0 : X.back(); }
    double h() const { return X.size() > 1 ? X[1] - X[0] : 0; }
};

struct SolveOptions {
    double newton_tol = 1e-10;
    int max_newton = 40;
    int boundary_terms = 3;
    const std::vector<double>* guess = nullptr;  // defaults to the asymptotics
};

namespace detail {

// Residual of the discretized ODE (4th-order central stencils, three ghost
// values per side from the asymptotic expansion).  The Newton iterate lives
// in long double: the D4 stencil scales corrections by h^-4, and at N = 2048
// the converged corrections fall below double representability of U.
struct Discretization {
    double T, L, h;
    int N;  // intervals; N+1 unknowns
    std::vector<double> x;
    std::vector<long double> ghost_left, ghost_right;  // [x<-L): g[0] farthest

    Discretization(double T_, double L_, int N_, int bterms) : T(T_), L(L_), N(N_) {
        h = 2.0 * L / N;
        x.resize(static_cast<std::size_t>(N) + 1);
        for (int i = 0; i <= N; ++i) x[static_cast<std::size_t>(i)] = -L + i * h;
        for (int k = 3; k >= 1; --k) ghost_left.push_back(asymptotic_U(-L - k * h, T, bterms));
        for (int k = 1; k <= 3; ++k) ghost_right.push_back(asymptotic_U(L + k * h, T, bterms));
    }

    long double at(const std::vector<long double>& U, int i) const {
        if (i < 0) return ghost_left[static_cast<std::size_t>(i + 3)];
        if (i > N) return ghost_right[static_cast<std::size_t>(i - N - 1)];
        return U[static_cast<std::size_t>(i)];
    }

    // F_i = T U_i - [U^3/6 + (U'^2 + 2 U U'')/24 + U''''/240] - x_i
    // Stencil sums accumulate in long double: the D4 stencil amplifies
    // cancellation noise by 1/h^4, which would floor the residual near 1e-9
    // in plain double at N = 2048.
    void residual(const std::vector<long double>& U, std::vector<long double>& F) const {
        F.resize(U.size());
        for (int i = 0; i <= N; ++i) {
            long double um3 = at(U, i - 3), um2 = at(U, i - 2), um1 = at(U, i - 1);
            long double u0 = at(U, i), up1 = at(U, i + 1), up2 = at(U, i + 2), up3 = at(U, i + 3);
            long double hh = h;
            long double d1 = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * hh);
            long double d2 = (-um2 + 16 * um1 - 30 * u0 + 16 * up1 - up2) / (12 * hh * hh);
            long double d4 = (-um3 + 12 * um2 - 39 * um1 + 56 * u0 - 39 * up1 + 12 * up2 - up3) /
                             (6 * hh * hh * hh * hh);
            F[static_cast<std::size_t>(i)] =
                static_cast<long double>(T) * u0 -
                (u0 * u0 * u0 / 6.0L + (d1 * d1 + 2 * u0 * d2) / 24.0L + d4 / 240.0L) -
                static_cast<long double>(x[static_cast<std::size_t>(i)]);
        }
    }

    Eigen::SparseMatrix<double> jacobian(const std::vector<long double>& U) const {
        const int n = N + 1;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * 7);
        const double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
        const double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
        const double c4[7] = {-1.0 / 6, 12.0 / 6, -39.0 / 6, 56.0 / 6, -39.0 / 6, 12.0 / 6,
                              -1.0 / 6};
        for (int i = 0; i <= N; ++i) {
            double um2 = static_cast<double>(at(U, i - 2)), um1 = static_cast<double>(at(U, i - 1));
            double u0 = static_cast<double>(at(U, i));
            double up1 = static_cast<double>(at(U, i + 1)), up2 = static_cast<double>(at(U, i + 2));
            double d1 = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * h);
            double d2 = (-um2 + 16 * um1 - 30 * u0 + 16 * up1 - up2) / (12 * h * h);
            for (int o = -3; o <= 3; ++o) {
                int j = i + o;
                if (j < 0 || j > N) continue;
                double val = 0.0;
                if (o == 0) val += T - u0 * u0 / 2.0 - d2 / 12.0;
                if (o >= -2 && o <= 2) {
                    double dd1 = c1[o + 2] / h;
                    double dd2 = c2[o + 2] / (h * h);
                    val -= (2 * d1 * dd1 + 2 * u0 * dd2) / 24.0;
                }
                val -= c4[o + 3] / (h * h * h * h) / 240.0;
                trip.emplace_back(i, j, val);
            }
        }
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline long double max_abs(const std::vector<long double>& v) {
    long double m = 0;
    for (long double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

inline P2Solution solve_bvp(double T, double L, int N, const SolveOptions& opt = {}) {
    if (N < 512) throw std::invalid_argument("solve_bvp: N >= 512 required");
    detail::Discretization disc(T, L, N, opt.boundary_terms);
    std::vector<long double> U;
    if (opt.guess) {
        if (opt.guess->size() != disc.x.size())
            throw GridMismatch("solve_bvp: guess size does not match grid");
        U.assign(opt.guess->begin(), opt.guess->end());
    } else {
        U.resize(disc.x.size());
        for (std::size_t i = 0; i < disc.x.size(); ++i)
            U[i] = asymptotic_U(disc.x[i], T, opt.boundary_terms);
    }

    const long double guard = 10.0 * (std::sqrt(std::abs(T)) + std::cbrt(6.0 * L));
    std::vector<long double> F, Utrial;
    disc.residual(U, F);
    long double fnorm = detail::max_abs(F);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it < opt.max_newton; ++it) {
        if (fnorm <= opt.newton_tol) break;
        Eigen::SparseMatrix<double> J = disc.jacobian(U);
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw NewtonDiverged("solve_bvp: singular Jacobian at T = " + std::to_string(T));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(F.size()));
        for (std::size_t i = 0; i < F.size(); ++i)
            rhs[static_cast<Eigen::Index>(i)] = -static_cast<double>(F[i]);
        Eigen::VectorXd delta = lu.solve(rhs);
        double step = 1.0;
        bool accepted = false;
        for (int back = 0; back < 12 && !accepted; ++back) {
            Utrial = U;
            for (std::size_t i = 0; i < U.size(); ++i)
                Utrial[i] += step * delta[static_cast<Eigen::Index>(i)];
            if (detail::max_abs(Utrial) > guard)
                throw BlowUpDetected("solve_bvp: iterate exceeded the blow-up guard");
            disc.residual(Utrial, F);
            long double fnew = detail::max_abs(F);
            if (fnew < fnorm) {
                U = Utrial;
                fnorm = fnew;
                accepted = true;
            }
            step *= 0.5;
        }
        if (!accepted || (it + 1 == opt.max_newton && fnorm > opt.newton_tol))
            throw NewtonDiverged("solve_bvp: no convergence at T = " + std::to_string(T) +
                                 " (try continuation)");
    }

    P2Solution sol;
    sol.T = T;
    sol.X = disc.x;
    sol.U.assign(U.begin(), U.end());
    sol.residual_norm = static_cast<double>(fnorm);
    sol.boundary_terms = opt.boundary_terms;
    return sol;
}

// Estimated points per oscillation for T > 0 (linearized top-order balance).
inline double points_per_oscillation(double T, double umax, double h) {
    double k = std::pow(240.0 * (std::abs(T) + 0.5 * umax * umax) + 1.0, 0.25);
    return (2.0 * M_PI / k) / h;
}

inline std::vector<P2Solution> continuation_in_T(const std::vector<double>& Ts, double L, int N,
                                                 const SolveOptions& opt = {}) {
    if (Ts.empty()) return {};
    if (Ts.front() > -8.0)
        throw std::invalid_argument("continuation_in_T: first T must be <= -8 (asymptotic seed)");
    for (std::size_t i = 1; i < Ts.size(); ++i)
        if (Ts[i] <= Ts[i - 1]) throw std::invalid_argument("continuation_in_T: T list not ascending");

    std::vector<P2Solution> out;
    double last_good = Ts.front();
    for (double T : Ts) {
        SolveOptions o = opt;
        if (!out.empty()) o.guess = &out.back().U;
        if (T > 0.0 && !out.empty()) {
            double ppw = points_per_oscillation(T, detail::max_abs(out.back().U), 2 * L / N);
            if (ppw < 8.0)
                throw ResolutionTooCoarse("continuation_in_T: " + std::to_string(ppw) +
                                          " points per oscillation at T = " + std::to_string(T));
        }
        try {
            out.push_back(solve_bvp(T, L, N, o));
        } catch (const NewtonDiverged& e) {
            throw NewtonDiverged(std::string(e.what()) + " [last good T = " +
                                     std::to_string(last_good) + "]",
                                 last_good);
        }
        last_good = T;
    }
    return out;
}

// ---------------------------------------------------------------------------
// KdV cross-check: U_T + U U' + U'''/12 on three solutions at T - dT, T,
// T + dT sharing one grid.  Centered difference in T, 4th-order stencils in
// X, interior points only.

struct KdvResidual {
    double value = 0;
    bool degenerate = false;  // the three solutions coincide (dT -> 0 misuse)
};

inline KdvResidual kdv_residual(const P2Solution& minus, const P2Solution& center,
                                const P2Solution& plus, double dT) {
    if (minus.X != center.X || plus.X != center.X)
        throw GridMismatch("kdv_residual: solutions on different grids");
    KdvResidual out;
    out.degenerate = (minus.U == plus.U);
    const auto& U = center.U;
    const double h = center.h();
    const int N = static_cast<int>(U.size()) - 1;
    double worst = 0;
    for (int i = 3; i <= N - 3; ++i) {
        auto u = [&](int j) { return U[static_cast<std::size_t>(j)]; };
        double ut = (plus.U[static_cast<std::size_t>(i)] - minus.U[static_cast<std::size_t>(i)]) /
                    (2.0 * dT);
        double d1 = (u(i - 2) - 8 * u(i - 1) + 8 * u(i + 1) - u(i + 2)) / (12 * h);
        double d3 = (u(i - 3) - 8 * u(i - 2) + 13 * u(i - 1) - 13 * u(i + 1) + 8 * u(i + 2) -
                     u(i + 3)) /
                    (8 * h * h * h);
        worst = std::max(worst, std::abs(ut + u(i) * d1 + d3 / 12.0));
    }
    out.value = worst;
    return out;
}

}  // namespace hampert::p2
