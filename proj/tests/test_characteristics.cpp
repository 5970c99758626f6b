#include "hampert/characteristics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hampert::chars;
using hampert::exprfn::parse;

namespace {
CharacteristicData cubic_fixture() {
    return CharacteristicData::make(parse("u"), parse("-u - u^3"), -6.0, 6.0);
}
}  // namespace

TEST_CASE("solve_v on the cubic fixture") {
    CharacteristicData d = cubic_fixture();
    REQUIRE(solve_v(d, 0.0, 0.0) == Catch::Approx(0.0).margin(1e-12));
    // -2 = -v - v^3  =>  v = 1;   -10 => v = 2
    REQUIRE(solve_v(d, -2.0, 0.0) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(solve_v(d, -10.0, 0.0) == Catch::Approx(2.0).epsilon(1e-12));

    SECTION("substitute back: relative residual <= 1e-12 on random points") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> px(-8.0, 8.0), pt(0.0, 0.9);
        for (int i = 0; i < 100; ++i) {
            double x = px(rng), t = pt(rng);
            double v = solve_v(d, x, t);
            REQUIRE(std::abs(d.g(v, t) - x) <= 1e-12 * (1.0 + std::abs(x)));
        }
    }
    SECTION("error paths") {
        REQUIRE_THROWS_AS(solve_v(d, 1e9, 0.0), NoBracket);
        // past the catastrophe (t0 = 1) the map folds
        REQUIRE_THROWS_AS(solve_v(d, 0.001, 1.5), NotMonotone);
    }
}

TEST_CASE("catastrophe point of the cubic fixture") {
    CharacteristicData d = cubic_fixture();
    CatastrophePoint cp = find_catastrophe(d);
    REQUIRE(cp.x0 == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(cp.t0 == Catch::Approx(1.0).epsilon(1e-10));
    REQUIRE(cp.v0 == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(cp.kappa == Catch::Approx(6.0).epsilon(1e-10));
    REQUIRE(cp.a0p == Catch::Approx(1.0).epsilon(1e-12));
    SECTION("residuals of the defining equations") {
        REQUIRE(std::abs(d.g(cp.v0, cp.t0) - cp.x0) <= 1e-10);
        REQUIRE(std::abs(d.g(cp.v0, cp.t0, 1)) <= 1e-10);
        REQUIRE(std::abs(d.g(cp.v0, cp.t0, 2)) <= 1e-10);
    }
}

TEST_CASE("catastrophe with shifted b") {
    CharacteristicData d = CharacteristicData::make(parse("u"), parse("-2*u - u^3"), -6.0, 6.0);
    CatastrophePoint cp = find_catastrophe(d);
    REQUIRE(cp.x0 == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(cp.t0 == Catch::Approx(2.0).epsilon(1e-10));
    REQUIRE(cp.kappa == Catch::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("degenerate family is rejected") {
    CharacteristicData d = CharacteristicData::make(parse("u"), parse("-u"), -2.0, 2.0);
    REQUIRE_THROWS_AS(find_catastrophe(d), NoConvergence);  // a''t+b'' = 0 identically: no seed
    // quintic profile: the inflection at v = 0 has a vanishing third derivative
    CharacteristicData d4 = CharacteristicData::make(parse("u"), parse("-u - u^5"), -3.0, 3.0);
    REQUIRE_THROWS_AS(find_catastrophe(d4), Degenerate);
}

TEST_CASE("cubic limit") {
    REQUIRE(cubic_limit(0.0, -1.0, 1.0, 6.0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(cubic_limit(-2.0, -1.0, 1.0, 6.0) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(cubic_limit(-10.0, -1.0, 1.0, 6.0) == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE_THROWS_AS(cubic_limit(0.0, 0.5, 1.0, 6.0), MultipleRoots);
    REQUIRE_THROWS_AS(cubic_limit(0.0, -1.0, -1.0, 6.0), WrongSign);

    SECTION("agrees with the rescaled characteristic solution, O(lambda^(1/3))") {
        // the quartic term breaks the symmetry so the lambda^(1/3) error term
        // is genuinely present
        CharacteristicData d =
            CharacteristicData::make(parse("u"), parse("-u - u^3 + u^4/10"), -3.0, 3.0);
        CatastrophePoint cp = find_catastrophe(d);
        double xbar = -0.7, tbar = -0.8;
        double vbar = cubic_limit(xbar, tbar, cp.a0p, cp.kappa);
        double err_prev = 0;
        int idx = 0;
        for (double lambda : {1e-2, 1e-3}) {
            double x = cp.x0 + lambda * xbar + cp.a0 * std::pow(lambda, 2.0 / 3.0) * tbar;
            double t = cp.t0 + std::pow(lambda, 2.0 / 3.0) * tbar;
            double v = solve_v(d, x, t);
            double err = std::abs((v - cp.v0) / std::cbrt(lambda) - vbar);
            if (idx == 0) {
                err_prev = err;
            } else {
                // error contracts like lambda^(1/3): ratio ~ 10^(1/3) ~ 2.15
                double ratio = err_prev / err;
                REQUIRE(ratio > 1.4);
                REQUIRE(ratio < 3.4);
            }
            ++idx;
        }
    }
}

TEST_CASE("series inversion for characteristic jets") {
    SECTION("log inverse: x = e^v - 1") {
        std::vector<double> g = {1, 1, 1, 1, 1, 1};  // g^(k)(0) = 1
        auto dv = inverse_jet(g);
        std::vector<double> expect = {1, -1, 2, -6, 24, -120};
        for (std::size_t i = 0; i < expect.size(); ++i)
            REQUIRE(dv[i] == Catch::Approx(expect[i]).epsilon(1e-12));
    }
    SECTION("against analytic derivatives of v = b^{-1}") {
        CharacteristicData d = cubic_fixture();
        // v(x) solves -v - v^3 = x at t = 0; check v' and v'' analytically
        double x = -2.0;
        auto jets = characteristic_jets(d, x, 0.0, 6);
        double v = jets.v;
        double gp = -1 - 3 * v * v;
        double gpp = -6 * v;
        REQUIRE(jets.dv[0] == Catch::Approx(1.0 / gp).epsilon(1e-12));
        REQUIRE(jets.dv[1] == Catch::Approx(-gpp / (gp * gp * gp)).epsilon(1e-12));
        SECTION("sixth derivative matches central differences of solve_v") {
            double h = 2e-2;
            auto vat = [&](double xx) { return solve_v(d, xx, 0.0); };
            double d6 = (vat(x - 3 * h) - 6 * vat(x - 2 * h) + 15 * vat(x - h) - 20 * vat(x) +
                         15 * vat(x + h) - 6 * vat(x + 2 * h) + vat(x + 3 * h)) /
                        std::pow(h, 6);
            REQUIRE(jets.dv[5] == Catch::Approx(d6).epsilon(2e-3));
        }
    }
}
