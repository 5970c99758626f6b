#pragma once

// Pseudo-spectral solver for the perturbed flow
//
//   u_t + d_x[ u^2/2 + eps^2/24 (2 c(u) u_xx + c'(u) u_x^2)
//              + eps^4 (2 p u_xxxx + 4 p' u_x u_xxx + 3 p' u_xx^2
//                       + 2 p'' u_x^2 u_xx) ] = 0
//
// periodic in x, with 2/3-rule dealiasing.  Constant c (and p): integrating
// factor RK4, the dispersive part handled exactly; variable c: classical RK4
// under the stiffness bound dt <= C (Lx/N)^3 / (eps^2 max|c|).  The flux form
// conserves the mean to round-off (the k = 0 mode of d_x is exactly zero).

#include "hampert/characteristics.hpp"
#include "hampert/exprfn.hpp"
#include "hampert/models.hpp"
#include "hampert/numeval.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hampert::pde {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Instability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// FFT workspace (FFTW, real transforms).  Plan creation is serialized: FFTW
// planning is not thread-safe while execution is.

class Spectral {
public:
    Spectral(int N, double Lx) : N_(N), Lx_(Lx) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(N));
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(N / 2 + 1));
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(N, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(N, spec_, real_, FFTW_ESTIMATE);
    }
    ~Spectral() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    int modes() const { return N_ / 2 + 1; }
    double k(int j) const { return 2.0 * M_PI * j / Lx_; }
    int dealias_cut() const { return N_ / 3; }  // keep j <= N/3

    void forward(const std::vector<double>& u, std::vector<std::complex<double>>& uh) {
        std::copy(u.begin(), u.end(), real_);
        fftw_execute(fwd_);
        uh.resize(static_cast<std::size_t>(modes()));
        for (int j = 0; j < modes(); ++j)
            uh[static_cast<std::size_t>(j)] = {spec_[j][0], spec_[j][1]};
    }

    void inverse(const std::vector<std::complex<double>>& uh, std::vector<double>& u) {
        for (int j = 0; j < modes(); ++j) {
            spec_[j][0] = uh[static_cast<std::size_t>(j)].real();
            spec_[j][1] = uh[static_cast<std::size_t>(j)].imag();
        }
        fftw_execute(bwd_);
        u.resize(static_cast<std::size_t>(N_));
        const double inv = 1.0 / N_;
        for (int i = 0; i < N_; ++i) u[static_cast<std::size_t>(i)] = real_[i] * inv;
    }

    // m-th spectral derivative, dealiased.
    std::vector<double> derivative(const std::vector<std::complex<double>>& uh, int m,
                                   bool dealias) {
        std::vector<std::complex<double>> dh(uh.size());
        const int cut = dealias_cut();
        for (int j = 0; j < modes(); ++j) {
            if (dealias && j > cut) {
                dh[static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            std::complex<double> ik(0.0, k(j));
            std::complex<double> f = 1.0;
            for (int q = 0; q < m; ++q) f *= ik;
            dh[static_cast<std::size_t>(j)] = uh[static_cast<std::size_t>(j)] * f;
        }
        std::vector<double> out;
        inverse(dh, out);
        return out;
    }

private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }
    int N_;
    double Lx_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

// ---------------------------------------------------------------------------

struct SimConfig {
    double eps = 0.05;
    exprfn::Expr c, p;        // functions of u; p only matters with eps4 terms
    bool include_eps4 = false;
    double Lx = 24.0;
    double x_left = -12.0;
    int N = 1024;             // Fourier modes, power of two, >= 256
    double dt = 1e-3;
    double t_end = 1.0;
    std::vector<double> snapshot_times;  // always includes t = 0 and t_end

    enum class Init { Expression, Characteristics, Quasitriviality, Values };
    Init init = Init::Expression;
    exprfn::Expr init_expr;                 // Init::Expression (function of x)
    chars::CharacteristicData char_data;    // Characteristics / Quasitriviality
    double window = 8.0, blend_width = 2.0;
    std::vector<double> init_values;        // Init::Values

    bool dealias = true;
    double cfl_safety = 0.5;
};

struct Trajectory {
    std::vector<double> x;
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    struct Monitors {
        std::vector<double> mean, momentum, hamiltonian;
    } monitors;

    const std::vector<double>& at_time(double t, double tol = 1e-9) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol) return u[i];
        throw std::out_of_range("Trajectory: no snapshot at t = " + std::to_string(t));
    }
};

// C-infinity step: 0 for s <= 0, 1 for s >= 1.
inline double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = std::exp(-1.0 / s);
    double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

namespace detail {

inline bool is_constant(const exprfn::Expr& e) { return e->kind == exprfn::Kind::Lit; }

struct Grid {
    std::vector<double> x;
    double dx;
};

inline Grid make_grid(const SimConfig& cfg) {
    Grid g;
    g.dx = cfg.Lx / cfg.N;
    g.x.resize(static_cast<std::size_t>(cfg.N));
    for (int i = 0; i < cfg.N; ++i) g.x[static_cast<std::size_t>(i)] = cfg.x_left + i * g.dx;
    return g;
}

}  // namespace detail

// Initial data u(x, 0) = b^{-1}(x) on the window, blended to zero outside so
// the profile is periodic; the blend regions are exactly constant beyond
// window + blend_width.
inline std::vector<double> initial_from_characteristics(const chars::CharacteristicData& data,
                                                        double window, double blend_width,
                                                        double Lx, double x_left, int N) {
    detail::Grid g = detail::make_grid({.Lx = Lx, .x_left = x_left, .N = N});
    std::vector<double> u(g.x.size(), 0.0);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double mask = 1.0 - smooth_step((std::abs(g.x[i]) - window) / blend_width);
        if (mask == 0.0) continue;
        u[i] = mask * chars::solve_v(data, g.x[i], 0.0);
    }
    return u;
}

// Initial data with the quasitriviality correction: u(x,0) = [v + eps^2 K2(v)
// + eps^4 K4(v)](x, 0), blended like above.  Used when comparing a simulation
// against the order-eps^4 substitution: starting from bare v would leave an
// O(eps^2) mismatch at t = 0.
inline std::vector<double> initial_from_quasitriviality(const chars::CharacteristicData& data,
                                                        const exprfn::Expr& c,
                                                        const exprfn::Expr& p, double eps,
                                                        double window, double blend_width,
                                                        double Lx, double x_left, int N) {
    detail::Grid g = detail::make_grid({.Lx = Lx, .x_left = x_left, .N = N});
    diffalg::EpsSeries map =
        models::build_quasitriviality_map(diffalg::DiffPoly::symbol("c"),
                                          diffalg::DiffPoly::symbol("p"), 4);
    std::vector<exprfn::Expr> dc{c}, dp{p};
    for (int j = 1; j <= 6; ++j) {
        dc.push_back(exprfn::derivative(dc.back()));
        dp.push_back(exprfn::derivative(dp.back()));
    }
    std::uint32_t c_id = diffalg::sym("c"), p_id = diffalg::sym("p");
    std::vector<double> u(g.x.size(), 0.0);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double mask = 1.0 - smooth_step((std::abs(g.x[i]) - window) / blend_width);
        if (mask == 0.0) continue;
        auto jets = chars::characteristic_jets(data, g.x[i], 0.0, 6);
        numeval::Bindings b;
        b.u = jets.v;
        b.jets = jets.dv;
        b.symbol = [&](std::uint32_t s, std::uint32_t j) {
            if (s == c_id) return exprfn::eval(dc.at(j), jets.v);
            if (s == p_id) return exprfn::eval(dp.at(j), jets.v);
            throw std::logic_error("unexpected symbol in quasitriviality map");
        };
        u[i] = mask * numeval::eval(map, b, eps);
    }
    return u;
}

namespace detail {

class Integrator {
public:
    Integrator(const SimConfig& cfg)
        : cfg_(cfg), fft_(cfg.N, cfg.Lx) {
        const_c_ = is_constant(cfg.c) && (!cfg.include_eps4 || is_constant(cfg.p));
        if (const_c_) {
            c0_ = static_cast<double>(cfg.c->lit);
            p0_ = (cfg.include_eps4 && cfg.p) ? static_cast<double>(cfg.p->lit) : 0.0;
        } else {
            dc_ = {cfg.c, exprfn::derivative(cfg.c)};
            exprfn::Expr pp = cfg.p ? cfg.p : exprfn::lit(0);
            dp_ = {pp, exprfn::derivative(pp)};
            dp_.push_back(exprfn::derivative(dp_[1]));
        }
    }

    bool constant_coefficients() const { return const_c_; }

    // Physical-space right-hand side -d_x(flux), variable coefficients.
    std::vector<double> rhs(const std::vector<double>& u) {
        std::vector<std::complex<double>> uh;
        fft_.forward(u, uh);
        std::vector<double> ux = fft_.derivative(uh, 1, cfg_.dealias);
        std::vector<double> uxx = fft_.derivative(uh, 2, cfg_.dealias);
        std::vector<double> uxxx, uxxxx;
        if (cfg_.include_eps4) {
            uxxx = fft_.derivative(uh, 3, cfg_.dealias);
            uxxxx = fft_.derivative(uh, 4, cfg_.dealias);
        }
        const double e2 = cfg_.eps * cfg_.eps;
        const double e4 = e2 * e2;
        std::vector<double> flux(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            double cu = exprfn::eval(dc_[0], u[i]);
            double cpu = exprfn::eval(dc_[1], u[i]);
            double f = 0.5 * u[i] * u[i] +
                       e2 / 24.0 * (2.0 * cu * uxx[i] + cpu * ux[i] * ux[i]);
            if (cfg_.include_eps4) {
                double pu = exprfn::eval(dp_[0], u[i]);
                double ppu = exprfn::eval(dp_[1], u[i]);
                double pppu = exprfn::eval(dp_[2], u[i]);
                f += e4 * (2.0 * pu * uxxxx[i] + 4.0 * ppu * ux[i] * uxxx[i] +
                           3.0 * ppu * uxx[i] * uxx[i] + 2.0 * pppu * ux[i] * ux[i] * uxx[i]);
            }
            flux[i] = f;
        }
        std::vector<std::complex<double>> fh;
        fft_.forward(flux, fh);
        std::vector<double> out = fft_.derivative(fh, 1, cfg_.dealias);
        for (double& v : out) v = -v;
        return out;
    }

    // One classical RK4 step (variable coefficients).
    void step_rk4(std::vector<double>& u, double dt) {
        std::vector<double> k1 = rhs(u);
        std::vector<double> tmp(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
        std::vector<double> k2 = rhs(tmp);
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
        std::vector<double> k3 = rhs(tmp);
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + dt * k3[i];
        std::vector<double> k4 = rhs(tmp);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }

    // Dealiased spectrum of -d_x(u^2/2).
    void nonlinear(const std::vector<std::complex<double>>& uh,
                   std::vector<std::complex<double>>& out) {
        std::vector<double> u;
        {
            std::vector<std::complex<double>> uc = uh;
            if (cfg_.dealias)
                for (int j = fft_.dealias_cut() + 1; j < fft_.modes(); ++j)
                    uc[static_cast<std::size_t>(j)] = 0.0;
            fft_.inverse(uc, u);
        }
        std::vector<double> f(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) f[i] = 0.5 * u[i] * u[i];
        fft_.forward(f, out);
        const int cut = fft_.dealias_cut();
        for (int j = 0; j < fft_.modes(); ++j) {
            if (cfg_.dealias && j > cut) {
                out[static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            out[static_cast<std::size_t>(j)] *= std::complex<double>(0.0, -fft_.k(j));
        }
    }

    // One integrating-factor RK4 step (constant coefficients): the linear
    // dispersive part  -(eps^2 c0/12) u_xxx - 2 eps^4 p0 u_xxxxx  is exact.
    void step_ifrk4(std::vector<std::complex<double>>& uh, double dt) {
        const int M = fft_.modes();
        if (ehalf_dt_ != dt) {
            ehalf_.resize(static_cast<std::size_t>(M));
            efull_.resize(static_cast<std::size_t>(M));
            const double e2 = cfg_.eps * cfg_.eps, e4 = e2 * e2;
            for (int j = 0; j < M; ++j) {
                double k = fft_.k(j);
                // L = i (e2 c0/12) k^3 - i 2 e4 p0 k^5
                double L = e2 * c0_ / 12.0 * k * k * k - 2.0 * e4 * p0_ * std::pow(k, 5);
                ehalf_[static_cast<std::size_t>(j)] =
                    std::exp(std::complex<double>(0.0, L * dt / 2.0));
                efull_[static_cast<std::size_t>(j)] = ehalf_[static_cast<std::size_t>(j)] *
                                                      ehalf_[static_cast<std::size_t>(j)];
            }
            ehalf_dt_ = dt;
        }
        const std::size_t n = uh.size();
        std::vector<std::complex<double>> k1(n), k2(n), k3(n), k4(n), tmp(n);
        nonlinear(uh, k1);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = ehalf_[j] * (uh[j] + 0.5 * dt * k1[j]);
        nonlinear(tmp, k2);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = ehalf_[j] * uh[j] + 0.5 * dt * k2[j];
        nonlinear(tmp, k3);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = efull_[j] * uh[j] + dt * ehalf_[j] * k3[j];
        nonlinear(tmp, k4);
        for (std::size_t j = 0; j < n; ++j)
            uh[j] = efull_[j] * uh[j] +
                    dt / 6.0 * (efull_[j] * k1[j] + 2.0 * ehalf_[j] * (k2[j] + k3[j]) + k4[j]);
    }

    Spectral& fft() { return fft_; }
    double c_at(double u) const {
        return const_c_ ? c0_ : exprfn::eval(dc_[0], u);
    }
    double p_at(double u) const {
        if (const_c_) return p0_;
        return exprfn::eval(dp_[0], u);
    }
    double max_abs_c(const std::vector<double>& u) const {
        if (const_c_) return std::abs(c0_);
        double m = 0;
        for (double v : u) m = std::max(m, std::abs(exprfn::eval(dc_[0], v)));
        return m;
    }

private:
    SimConfig cfg_;
    Spectral fft_;
    bool const_c_ = false;
    double c0_ = 0, p0_ = 0;
    std::vector<exprfn::Expr> dc_, dp_;
    std::vector<std::complex<double>> ehalf_, efull_;
    double ehalf_dt_ = -1.0;
};

}  // namespace detail

inline Trajectory simulate(const SimConfig& cfg) {
    if (cfg.N < 256 || (cfg.N & (cfg.N - 1)) != 0)
        throw ConfigInvalid("simulate: N must be a power of two >= 256");
    if (!(cfg.eps > 0)) throw ConfigInvalid("simulate: eps must be positive");
    if (!(cfg.dt > 0) || !(cfg.t_end >= 0)) throw ConfigInvalid("simulate: bad time stepping");
    if (!cfg.c) throw ConfigInvalid("simulate: missing c(u)");

    detail::Grid grid = detail::make_grid(cfg);
    std::vector<double> u;
    switch (cfg.init) {
        case SimConfig::Init::Expression:
            if (!cfg.init_expr) throw ConfigInvalid("simulate: missing init expression");
            u.resize(grid.x.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                u[i] = exprfn::eval(cfg.init_expr, grid.x[i]);
            break;
        case SimConfig::Init::Characteristics:
            u = initial_from_characteristics(cfg.char_data, cfg.window, cfg.blend_width, cfg.Lx,
                                             cfg.x_left, cfg.N);
            break;
        case SimConfig::Init::Quasitriviality:
            u = initial_from_quasitriviality(cfg.char_data, cfg.c,
                                             cfg.p ? cfg.p : exprfn::lit(0), cfg.eps, cfg.window,
                                             cfg.blend_width, cfg.Lx, cfg.x_left, cfg.N);
            break;
        case SimConfig::Init::Values:
            if (cfg.init_values.size() != grid.x.size())
                throw ConfigInvalid("simulate: init_values size mismatch");
            u = cfg.init_values;
            break;
    }

    detail::Integrator integ(cfg);

    // time-step admissibility
    double umax0 = 0;
    for (double v : u) umax0 = std::max(umax0, std::abs(v));
    if (integ.constant_coefficients()) {
        double kmax = integ.fft().k(cfg.dealias ? integ.fft().dealias_cut()
                                                : integ.fft().modes() - 1);
        double adv = 2.8 / std::max(kmax * umax0, 1e-12);
        if (cfg.dt > adv)
            throw ConfigInvalid("simulate: dt exceeds the advective bound " +
                                std::to_string(adv));
    } else {
        double bound = cfg.cfl_safety * std::pow(grid.dx, 3) /
                       std::max(cfg.eps * cfg.eps * integ.max_abs_c(u), 1e-300);
        if (cfg.dt > bound)
            throw ConfigInvalid("simulate: dt exceeds the stiffness bound " +
                                std::to_string(bound) + " for variable c");
    }

    std::vector<double> snap_times = cfg.snapshot_times;
    snap_times.push_back(0.0);
    snap_times.push_back(cfg.t_end);
    std::sort(snap_times.begin(), snap_times.end());
    snap_times.erase(std::unique(snap_times.begin(), snap_times.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                     snap_times.end());

    Trajectory traj;
    traj.x = grid.x;

    const double e2 = cfg.eps * cfg.eps;
    auto record = [&](double t, const std::vector<double>& field) {
        traj.times.push_back(t);
        traj.u.push_back(field);
        std::vector<std::complex<double>> fh;
        detail::Integrator* ig = &integ;
        ig->fft().forward(field, fh);
        std::vector<double> fx = ig->fft().derivative(fh, 1, cfg.dealias);
        std::vector<double> fxx = ig->fft().derivative(fh, 2, cfg.dealias);
        double mean = 0, mom = 0, ham = 0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            mean += field[i];
            mom += 0.5 * field[i] * field[i];
            double hterm = field[i] * field[i] * field[i] / 6.0 -
                           e2 / 24.0 * ig->c_at(field[i]) * fx[i] * fx[i];
            if (cfg.include_eps4) hterm += e2 * e2 * ig->p_at(field[i]) * fxx[i] * fxx[i];
            ham += hterm;
        }
        traj.monitors.mean.push_back(mean * grid.dx);
        traj.monitors.momentum.push_back(mom * grid.dx);
        traj.monitors.hamiltonian.push_back(ham * grid.dx);
    };

    const double blow_limit = 1e6 * (1.0 + umax0);
    auto check_stable = [&](const std::vector<double>& field, double t) {
        for (double v : field)
            if (!std::isfinite(v) || std::abs(v) > blow_limit)
                throw Instability("simulate: instability at t = " + std::to_string(t) +
                                  " (reduce dt)");
    };

    std::vector<std::complex<double>> uh;
    const bool spectral_state = integ.constant_coefficients();
    if (spectral_state) integ.fft().forward(u, uh);

    double t = 0.0;
    std::size_t next_snap = 0;
    long step_count = 0;
    auto current_field = [&]() {
        if (spectral_state) {
            std::vector<double> tmp;
            integ.fft().inverse(uh, tmp);
            return tmp;
        }
        return u;
    };
    while (true) {
        while (next_snap < snap_times.size() && std::abs(snap_times[next_snap] - t) < 1e-12) {
            std::vector<double> field = current_field();
            check_stable(field, t);
            record(snap_times[next_snap], field);
            ++next_snap;
        }
        if (next_snap >= snap_times.size()) break;
        double target = snap_times[next_snap];
        double dt = std::min(cfg.dt, target - t);
        if (spectral_state)
            integ.step_ifrk4(uh, dt);
        else
            integ.step_rk4(u, dt);
        t += dt;
        if (std::abs(t - target) < 1e-12) t = target;
        if (++step_count % 64 == 0) check_stable(current_field(), t);
    }
    return traj;
}

// Relative drift of the conserved monitors over the run.
struct DriftReport {
    double mean = 0, momentum = 0, hamiltonian = 0;
};

inline DriftReport monitor_invariants(const Trajectory& traj) {
    DriftReport d;
    if (traj.monitors.mean.empty()) return d;
    auto rel = [](const std::vector<double>& v) {
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        return (hi - lo) / std::max(1.0, std::abs(v[0]));
    };
    d.mean = rel(traj.monitors.mean);
    d.momentum = rel(traj.monitors.momentum);
    d.hamiltonian = rel(traj.monitors.hamiltonian);
    return d;
}

}  // namespace hampert::pde
