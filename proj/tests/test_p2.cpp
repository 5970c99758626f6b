#include "hampert/p2.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hampert::p2;

TEST_CASE("asymptotic expansion values") {
    SECTION("T = -10, X = 0: w = 0, U = -1/24000") {
        double u = asymptotic_U(0.0, -10.0, 3);
        REQUIRE(u == Catch::Approx(-1.0 / 24000.0).epsilon(1e-9));
        REQUIRE(asymptotic_U(0.0, -10.0, 1) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("T = -4, X = 80/3: w = -2 evaluation") {
        // U = 2[-2 + 4^{-7/2} * 10/3888 - 4^{-7} * (-2)(189*16 - 972*4 + 436)/(9*6^9)]
        double w = -2.0, mT = 4.0;
        double c1 = (3 * w * w - 2) / (3 * std::pow(w * w + 2, 4));
        double c2 = w * (189 * std::pow(w, 4) - 972 * w * w + 436) / (9 * std::pow(w * w + 2, 9));
        double expect = std::sqrt(mT) * (w + std::pow(mT, -3.5) * c1 - std::pow(mT, -7.0) * c2);
        REQUIRE(asymptotic_U(80.0 / 3.0, -4.0, 3) == Catch::Approx(expect).epsilon(1e-12));
        REQUIRE(expect == Catch::Approx(-4.0 + 4.019e-5).epsilon(1e-3));
    }
    SECTION("T = -1, X = 0: leading correction is -1/24") {
        REQUIRE(asymptotic_U(0.0, -1.0, 2) == Catch::Approx(-1.0 / 24.0).epsilon(1e-12));
    }
    SECTION("out of regime near the fold") {
        REQUIRE_THROWS_AS(asymptotic_U(0.05, 1.0, 3), NotInAsymptoticRegime);
    }
}

TEST_CASE("BVP solve at T = -10") {
    P2Solution sol = solve_bvp(-10.0, 12.0, 1024);
    REQUIRE(sol.residual_norm <= 1e-10);
    SECTION("matches the three-term expansion to 1e-6 on |X| <= 5") {
        double worst = 0;
        for (std::size_t i = 0; i < sol.X.size(); ++i) {
            if (std::abs(sol.X[i]) > 5.0) continue;
            worst = std::max(worst, std::abs(sol.U[i] - asymptotic_U(sol.X[i], -10.0, 3)));
        }
        REQUIRE(worst <= 1e-6);
    }
    SECTION("slope at the origin is near 1/(T - U^2/2)") {
        std::size_t mid = sol.X.size() / 2;
        double h = sol.h();
        double d1 = (sol.U[mid - 2] - 8 * sol.U[mid - 1] + 8 * sol.U[mid + 1] - sol.U[mid + 2]) /
                    (12 * h);
        double expect = 1.0 / (-10.0 - sol.U[mid] * sol.U[mid] / 2);
        REQUIRE(d1 < 0.0);
        REQUIRE(d1 == Catch::Approx(expect).epsilon(0.01));
    }
    SECTION("strictly decreasing in X") {
        for (std::size_t i = 1; i < sol.U.size(); ++i) REQUIRE(sol.U[i] < sol.U[i - 1]);
    }
}

TEST_CASE("grid convergence is fourth order") {
    // T = -1 on a tight domain: the truncation error dominates both the
    // Newton tolerance and the boundary contamination on |X| <= 3.
    P2Solution c = solve_bvp(-1.0, 6.0, 512);
    P2Solution m = solve_bvp(-1.0, 6.0, 1024);
    P2Solution f = solve_bvp(-1.0, 6.0, 2048);
    double e_c = 0, e_m = 0;
    for (std::size_t i = 0; i < c.X.size(); ++i) {
        if (std::abs(c.X[i]) > 3.0) continue;
        e_c = std::max(e_c, std::abs(c.U[i] - f.U[4 * i]));
        e_m = std::max(e_m, std::abs(m.U[2 * i] - f.U[4 * i]));
    }
    double ratio = e_c / e_m;  // ideal 256/15 ~ 17
    INFO("e_c=" << e_c << " e_m=" << e_m << " ratio=" << ratio);
    REQUIRE(ratio > 8.5);
    REQUIRE(ratio < 34.0);
}

TEST_CASE("boundary insensitivity") {
    P2Solution a = solve_bvp(-3.0, 12.0, 1536);
    P2Solution b = solve_bvp(-3.0, 15.0, 1920);  // same h, L * 1.25
    double worst = 0;
    // compare on |X| <= 6 (common points: offset 192 in b)
    for (std::size_t i = 0; i < a.X.size(); ++i) {
        if (std::abs(a.X[i]) > 6.0) continue;
        worst = std::max(worst, std::abs(a.U[i] - b.U[i + 192]));
    }
    REQUIRE(worst < 1e-6);
}

TEST_CASE("continuation in T") {
    SECTION("precondition: seed must be deep in the asymptotic region") {
        REQUIRE_THROWS_AS(continuation_in_T({2.0, 3.0}, 12.0, 1024), std::invalid_argument);
    }
    SECTION("reaches T = 0 with small residuals") {
        std::vector<double> Ts;
        for (double T = -10.0; T <= -2.0 + 1e-9; T += 2.0) Ts.push_back(T);
        for (double T = -1.5; T <= 0.0 + 1e-9; T += 0.5) Ts.push_back(T);
        auto sols = continuation_in_T(Ts, 12.0, 1024);
        REQUIRE(sols.size() == Ts.size());
        for (const auto& s : sols) REQUIRE(s.residual_norm <= 1e-8);
        // single-entry list behaves like solve_bvp
        auto single = continuation_in_T({-10.0}, 12.0, 1024);
        REQUIRE(single.size() == 1);
        double diff = 0;
        P2Solution direct = solve_bvp(-10.0, 12.0, 1024);
        for (std::size_t i = 0; i < direct.U.size(); ++i)
            diff = std::max(diff, std::abs(single[0].U[i] - direct.U[i]));
        REQUIRE(diff == 0.0);
    }
}

TEST_CASE("KdV residual in T") {
    const double T = -10.0, dT = 1e-3;
    P2Solution c = solve_bvp(T, 12.0, 2048);
    SolveOptions o;
    o.guess = &c.U;
    P2Solution m = solve_bvp(T - dT, 12.0, 2048, o);
    P2Solution p = solve_bvp(T + dT, 12.0, 2048, o);
    KdvResidual r = kdv_residual(m, c, p, dT);
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(r.value <= 1e-4);
    SECTION("degenerate triple is flagged") {
        KdvResidual rd = kdv_residual(c, c, c, dT);
        REQUIRE(rd.degenerate);
    }
    SECTION("grid mismatch is an error") {
        P2Solution other = solve_bvp(T, 12.0, 1024);
        REQUIRE_THROWS_AS(kdv_residual(other, c, p, dT), GridMismatch);
    }
}
