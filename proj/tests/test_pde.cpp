#include "hampert/pde.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hampert;
using namespace hampert::pde;
using hampert::exprfn::parse;

namespace {

// Soliton of u_t + u u_x + eps^2 u_xxx = 0 (c = 12, p = 0):
// u = 3 A sech^2( sqrt(A)/(2 eps) (x - x0 - A t) ).
std::vector<double> soliton(double A, double eps, double x0, double t,
                            const std::vector<double>& x, double Lx) {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double arg = x[i] - x0 - A * t;
        arg -= Lx * std::round(arg / Lx);  // periodic image
        double s = 1.0 / std::cosh(std::sqrt(A) / (2.0 * eps) * arg);
        u[i] = 3.0 * A * s * s;
    }
    return u;
}

SimConfig soliton_config(double A, double eps, int N, double dt) {
    SimConfig cfg;
    cfg.eps = eps;
    cfg.c = parse("12");
    cfg.p = parse("0");
    cfg.Lx = 20.0;
    cfg.x_left = -10.0;
    cfg.N = N;
    cfg.dt = dt;
    cfg.t_end = 20.0 / A;  // one transit
    cfg.init = SimConfig::Init::Values;
    return cfg;
}

}  // namespace

TEST_CASE("zero initial data stays zero") {
    SimConfig cfg;
    cfg.eps = 0.1;
    cfg.c = parse("1");
    cfg.N = 256;
    cfg.Lx = 10.0;
    cfg.x_left = -5.0;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    cfg.init = SimConfig::Init::Expression;
    cfg.init_expr = parse("0");
    Trajectory traj = simulate(cfg);
    for (double v : traj.u.back()) REQUIRE(v == 0.0);
    DriftReport d = monitor_invariants(traj);
    REQUIRE(d.mean == 0.0);
    REQUIRE(d.momentum == 0.0);
}

TEST_CASE("KdV soliton travels with tiny shape error") {
    const double A = 1.0, eps = 0.2;
    SimConfig cfg = soliton_config(A, eps, 1024, 5e-4);
    cfg.init_values = soliton(A, eps, 0.0, 0.0, detail::make_grid(cfg).x, cfg.Lx);
    Trajectory traj = simulate(cfg);
    const auto& uT = traj.u.back();
    std::vector<double> exact =
        soliton(A, eps, 0.0, cfg.t_end, traj.x, cfg.Lx);  // = initial profile again
    double err = 0;
    for (std::size_t i = 0; i < uT.size(); ++i) err = std::max(err, std::abs(uT[i] - exact[i]));
    INFO("shape error after one transit: " << err);
    REQUIRE(err <= 1e-6);

    SECTION("mean is conserved to round-off, momentum to integration error") {
        DriftReport d = monitor_invariants(traj);
        REQUIRE(d.mean <= 1e-12);
        REQUIRE(d.momentum <= 1e-8);
    }
}

TEST_CASE("characteristic initial data") {
    auto data = chars::CharacteristicData::make(parse("u"), parse("-u - u^3"), -6.0, 6.0);
    SECTION("interior values, exact constants outside") {
        std::vector<double> u =
            initial_from_characteristics(data, 8.0, 2.0, 32.0, -16.0, 512);
        detail::Grid g = detail::make_grid({.Lx = 32.0, .x_left = -16.0, .N = 512});
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (std::abs(g.x[i]) <= 8.0) {
                double v = chars::solve_v(data, g.x[i], 0.0);
                REQUIRE(u[i] == Catch::Approx(v).margin(1e-12));
            }
            if (std::abs(g.x[i]) >= 10.0) REQUIRE(u[i] == 0.0);
        }
        // u(0) = 0, u(-2) = 1
        std::size_t i0 = 256, im2 = 256 - 32;
        REQUIRE(g.x[i0] == 0.0);
        REQUIRE(u[i0] == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(g.x[im2] == -2.0);
        REQUIRE(u[im2] == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("non-monotone b is rejected") {
        auto bad = chars::CharacteristicData::make(parse("u"), parse("u^2"), -2.0, 2.0);
        REQUIRE_THROWS_AS(initial_from_characteristics(bad, 1.0, 0.5, 8.0, -4.0, 256),
                          chars::NoBracket);
    }
}

TEST_CASE("pre-catastrophe solution stays close to characteristics, O(eps^2)") {
    auto data = chars::CharacteristicData::make(parse("u"), parse("-u - u^3"), -6.0, 6.0);
    double sups[2];
    int idx = 0;
    for (double eps : {0.1, 0.05}) {
        SimConfig cfg;
        cfg.eps = eps;
        cfg.c = parse("1");
        cfg.N = 1024;
        cfg.Lx = 32.0;
        cfg.x_left = -16.0;
        cfg.dt = 2e-3;
        cfg.t_end = 0.5;  // t0 = 1
        cfg.init = SimConfig::Init::Characteristics;
        cfg.char_data = data;
        cfg.window = 8.0;
        cfg.blend_width = 2.0;
        Trajectory traj = simulate(cfg);
        double sup = 0;
        for (std::size_t i = 0; i < traj.x.size(); ++i) {
            if (std::abs(traj.x[i]) > 4.0) continue;
            double v = chars::solve_v(data, traj.x[i], 0.5);
            sup = std::max(sup, std::abs(traj.u.back()[i] - v));
        }
        sups[idx++] = sup;
    }
    INFO("sup(0.1) = " << sups[0] << " sup(0.05) = " << sups[1]);
    // leading correction is O(eps^2): halving eps shrinks the gap ~4x
    REQUIRE(sups[1] < sups[0] / 2.5);
    REQUIRE(sups[0] < 0.05);
}

TEST_CASE("constant-c path agrees with the variable-c integrator") {
    // same equation integrated as "constant" (IF-RK4) and as "variable"
    // (classical RK4 with a u-independent c expression)
    auto grid_cfg = [](bool pretend_variable) {
        SimConfig cfg;
        cfg.eps = 0.1;
        cfg.c = pretend_variable ? parse("2 + 0*u") : parse("2");
        cfg.N = 512;
        cfg.Lx = 20.0;
        cfg.x_left = -10.0;
        cfg.dt = 2e-5;  // under the stiffness bound for the variable path
        cfg.t_end = 0.05;
        cfg.init = SimConfig::Init::Expression;
        cfg.init_expr = parse("sin(0.3141592653589793*x)");  // one period on Lx = 20
        return cfg;
    };
    // NB: 0*u folds away, so force the variable path with a tanh(0*u) term
    SimConfig fixed = grid_cfg(false);
    SimConfig variable = grid_cfg(false);
    variable.c = parse("2 + u - u");  // same value, non-literal tree
    REQUIRE_FALSE(detail::is_constant(variable.c));
    Trajectory a = simulate(fixed);
    Trajectory b = simulate(variable);
    double diff = 0;
    for (std::size_t i = 0; i < a.u.back().size(); ++i)
        diff = std::max(diff, std::abs(a.u.back()[i] - b.u.back()[i]));
    INFO("integrator cross-difference: " << diff);
    REQUIRE(diff < 1e-9);
}

TEST_CASE("spectral and temporal convergence") {
    auto run = [](int N, double dt) {
        SimConfig cfg;
        cfg.eps = 0.25;  // wide soliton: fully resolved already at N = 512
        cfg.c = parse("12");
        cfg.N = N;
        cfg.Lx = 20.0;
        cfg.x_left = -10.0;
        cfg.dt = dt;
        cfg.t_end = 0.25;
        cfg.init = SimConfig::Init::Values;
        cfg.init_values = soliton(1.0, 0.25, 0.0, 0.0, detail::make_grid(cfg).x, cfg.Lx);
        return simulate(cfg);
    };
    SECTION("doubling N changes the solution below 1e-8") {
        Trajectory c = run(512, 2.5e-4);
        Trajectory f = run(1024, 2.5e-4);
        double diff = 0;
        for (std::size_t i = 0; i < c.u.back().size(); ++i)
            diff = std::max(diff, std::abs(c.u.back()[i] - f.u.back()[2 * i]));
        REQUIRE(diff < 1e-8);
    }
    SECTION("halving dt improves by about 2^4") {
        Trajectory ref = run(512, 0.5e-4);
        Trajectory c = run(512, 4e-4);
        Trajectory m = run(512, 2e-4);
        double ec = 0, em = 0;
        for (std::size_t i = 0; i < ref.u.back().size(); ++i) {
            ec = std::max(ec, std::abs(c.u.back()[i] - ref.u.back()[i]));
            em = std::max(em, std::abs(m.u.back()[i] - ref.u.back()[i]));
        }
        double ratio = ec / em;
        INFO("ec=" << ec << " em=" << em << " ratio=" << ratio);
        REQUIRE(ratio > 8.0);
        REQUIRE(ratio < 36.0);
    }
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.c = parse("1");
    cfg.N = 100;  // not a power of two
    REQUIRE_THROWS_AS(simulate(cfg), ConfigInvalid);
    cfg.N = 256;
    cfg.eps = 0.1;
    cfg.init = SimConfig::Init::Expression;
    cfg.init_expr = parse("sin(x)");
    cfg.Lx = 2 * M_PI * 4;
    cfg.x_left = 0.0;
    cfg.c = parse("1 + u - u");  // variable path
    cfg.dt = 1.0;                            // grossly over the stiffness bound
    REQUIRE_THROWS_AS(simulate(cfg), ConfigInvalid);
}
