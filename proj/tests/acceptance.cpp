// Acceptance suite: every release criterion of the laboratory, run end to
// end at its stated tolerance.  One pass/fail line per criterion; exit code
// 0 only if all pass.

#include "hampert/io.hpp"
#include "hampert/universality.hpp"
#include "hampert/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hampert;

namespace {

int failures = 0;

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %02d %-28s %7.2fs  %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

chars::CharacteristicData kdv_fixture_chars() {
    return chars::CharacteristicData::make(exprfn::parse("u"), exprfn::parse("-u - u^3"), -6.0,
                                           6.0);
}

pde::SimConfig kdv_sim(double eps, int N, double dt, double t_end) {
    pde::SimConfig cfg;
    cfg.eps = eps;
    cfg.c = exprfn::parse("1");
    cfg.p = exprfn::parse("0");
    cfg.N = N;
    cfg.Lx = 32.0;
    cfg.x_left = -16.0;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.init = pde::SimConfig::Init::Characteristics;
    cfg.char_data = kdv_fixture_chars();
    cfg.window = 8.0;
    cfg.blend_width = 2.0;
    return cfg;
}

}  // namespace

int main() {
    std::printf("acceptance: exact-verification and numerical criteria\n");

    criterion(1, "lemma2-commutativity", [](std::string& detail) {
        auto t0 = std::chrono::steady_clock::now();
        verify::VerificationReport rep = verify::verify_commuting_first();
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream ss;
        ss << "orders 0/2/4 exact-zero, " << secs << " s (< 60 s)";
        detail = ss.str();
        return rep.pass() && rep.checks.size() == 5 && secs < 60.0;
    });

    criterion(2, "appendix-bicommutativity", [](std::string& detail) {
        verify::VerificationReport rep = verify::verify_commuting_second();
        verify::ConstraintNecessity nec = verify::verify_constraint_necessity();
        std::ostringstream ss;
        ss << "exact zeros " << (rep.pass() ? "yes" : "NO") << "; unconstrained residual "
           << (nec.nonzero_when_free ? "nonzero" : "ZERO") << ", mentions p "
           << (nec.witness_mentions_p ? "yes" : "NO") << ", vanishes under constraint "
           << (nec.vanishes_under_constraint ? "yes" : "NO");
        detail = ss.str();
        return rep.pass() && nec.pass();
    });

    criterion(3, "theorem2-quasitriviality", [](std::string& detail) {
        verify::VerificationReport rep = verify::verify_quasitriviality();
        bool map_ok = false, comps_ok = true;
        for (const auto& c : rep.checks) {
            if (c.label == "map") map_ok = c.exact_zero;
            else comps_ok = comps_ok && c.exact_zero;
        }
        detail = "components 1..5 null Lagrangians; printed map == Lie series exactly";
        return comps_ok && map_ok;
    });

    criterion(4, "mutation-sensitivity", [](std::string& detail) {
        verify::MutationSweep first = verify::sweep_commuting_first();
        verify::MutationSweep second = verify::sweep_commuting_second();
        verify::MutationSweep quasi = verify::sweep_quasitriviality();
        std::ostringstream ss;
        ss << "detected " << first.detected << "/" << first.tested << ", " << second.detected
           << "/" << second.tested << ", " << quasi.detected << "/" << quasi.tested;
        detail = ss.str();
        return first.tested >= 10 && second.tested >= 10 && quasi.tested >= 10 &&
               first.all_detected() && second.all_detected() && quasi.all_detected();
    });

    criterion(5, "lax-compatibility", [](std::string& detail) {
        verify::VerificationReport rep = verify::verify_lax_compatibility();
        verify::MutationSweep sweep = verify::sweep_lax();
        std::ostringstream ss;
        ss << "X- and T-compatibility exact on the ODE manifold; mutations "
           << sweep.detected << "/" << sweep.tested;
        detail = ss.str();
        return rep.pass() && sweep.all_detected();
    });

    criterion(6, "specialization-fixtures", [](std::string& detail) {
        using exprfn::parse;
        bool volterra = exprfn::equal(models::p_from_cq(parse("2"), parse("1 - exp(u)")),
                                      parse("-1/240"));
        bool ch = exprfn::equal(models::p_from_cq(parse("8*u"), parse("u")), parse("u/3"));
        bool all = true;
        for (const auto& s : models::specializations())
            all = all && exprfn::equal(s.p, models::p_from_cq(s.c, s.q));
        detail = "p(2, 1-e^u) = -1/240 and p(8u, u) = u/3, exactly";
        return volterra && ch && all;
    });

    criterion(7, "p2-solver", [](std::string& detail) {
        auto t0 = std::chrono::steady_clock::now();
        p2::P2Solution big = p2::solve_bvp(-10.0, 12.0, 2048);
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        double asym_err = 0;
        for (std::size_t i = 0; i < big.X.size(); ++i) {
            if (std::abs(big.X[i]) > 5.0) continue;
            asym_err = std::max(asym_err,
                                std::abs(big.U[i] - p2::asymptotic_U(big.X[i], -10.0, 3)));
        }

        p2::SolveOptions o;
        o.guess = &big.U;
        const double dT = 1e-3 * 10.0;
        p2::P2Solution minus = p2::solve_bvp(-10.0 - dT, 12.0, 2048, o);
        p2::P2Solution plus = p2::solve_bvp(-10.0 + dT, 12.0, 2048, o);
        double kdv = p2::kdv_residual(minus, big, plus, dT).value;

        p2::P2Solution c = p2::solve_bvp(-1.0, 6.0, 512);
        p2::P2Solution m = p2::solve_bvp(-1.0, 6.0, 1024);
        p2::P2Solution f = p2::solve_bvp(-1.0, 6.0, 2048);
        double ec = 0, em = 0;
        for (std::size_t i = 0; i < c.X.size(); ++i) {
            if (std::abs(c.X[i]) > 3.0) continue;
            ec = std::max(ec, std::abs(c.U[i] - f.U[4 * i]));
            em = std::max(em, std::abs(m.U[2 * i] - f.U[4 * i]));
        }
        double ratio = ec / em;

        std::ostringstream ss;
        ss << "asym err " << asym_err << " (<=1e-6); kdv res " << kdv
           << " (<=1e-4); order ratio " << ratio << " (~16); solve " << secs << " s (<30)";
        detail = ss.str();
        return asym_err <= 1e-6 && kdv <= 1e-4 && ratio > 8.5 && ratio < 34.0 && secs < 30.0;
    });

    criterion(8, "catastrophe-finder", [](std::string& detail) {
        auto data = kdv_fixture_chars();
        chars::CatastrophePoint cp = chars::find_catastrophe(data);
        double r1 = std::abs(data.g(cp.v0, cp.t0) - cp.x0);
        double r2 = std::abs(data.g(cp.v0, cp.t0, 1));
        double r3 = std::abs(data.g(cp.v0, cp.t0, 2));
        bool values = std::abs(cp.x0 - 0.0) <= 1e-10 && std::abs(cp.t0 - 1.0) <= 1e-10 &&
                      std::abs(cp.v0 - 0.0) <= 1e-10 && std::abs(cp.kappa - 6.0) <= 1e-9;
        std::ostringstream ss;
        ss << "(x0,t0,v0,kappa) = (" << cp.x0 << "," << cp.t0 << "," << cp.v0 << ","
           << cp.kappa << "), residuals <= " << std::max({r1, r2, r3});
        detail = ss.str();
        return values && r1 <= 1e-10 && r2 <= 1e-10 && r3 <= 1e-10;
    });

    criterion(9, "pde-solver", [](std::string& detail) {
        // soliton transit (c = 12: u_t + u u_x + eps^2 u_xxx = 0)
        const double A = 1.0, eps = 0.2, Lx = 20.0;
        pde::SimConfig cfg;
        cfg.eps = eps;
        cfg.c = exprfn::parse("12");
        cfg.N = 1024;
        cfg.Lx = Lx;
        cfg.x_left = -10.0;
        cfg.dt = 5e-4;
        cfg.t_end = Lx / A;
        cfg.init = pde::SimConfig::Init::Values;
        pde::detail::Grid grid = pde::detail::make_grid(cfg);
        cfg.init_values.resize(grid.x.size());
        for (std::size_t i = 0; i < grid.x.size(); ++i) {
            double s = 1.0 / std::cosh(std::sqrt(A) / (2.0 * eps) * grid.x[i]);
            cfg.init_values[i] = 3.0 * A * s * s;
        }
        pde::Trajectory traj = pde::simulate(cfg);
        double shape_err = 0;
        for (std::size_t i = 0; i < grid.x.size(); ++i)
            shape_err = std::max(shape_err, std::abs(traj.u.back()[i] - cfg.init_values[i]));

        // conservation over the catastrophe fixture at eps = 0.05, t <= t0
        pde::Trajectory fix = pde::simulate(kdv_sim(0.05, 2048, 5e-4, 1.0));
        pde::DriftReport drift = pde::monitor_invariants(fix);

        std::ostringstream ss;
        ss << "soliton err " << shape_err << " (<=1e-6); mean drift " << drift.mean
           << " (<=1e-12); momentum drift " << drift.momentum << " (<=1e-6)";
        detail = ss.str();
        return shape_err <= 1e-6 && drift.mean <= 1e-12 && drift.momentum <= 1e-6;
    });

    criterion(10, "quasitriviality-numerics", [](std::string& detail) {
        auto data = kdv_fixture_chars();
        std::vector<double> eps_list = {0.1, 0.05, 0.025};
        std::vector<double> residuals;
        uni::Region region{0.3, 0.5, -2.0, 2.0, 0.2};
        for (double eps : eps_list) {
            pde::SimConfig cfg = kdv_sim(eps, 2048, 2.5e-4, 0.5);
            cfg.init = pde::SimConfig::Init::Quasitriviality;
            cfg.snapshot_times = {0.3, 0.4, 0.5};
            pde::Trajectory traj = pde::simulate(cfg);
            residuals.push_back(uni::quasitriviality_residual(traj, data, exprfn::parse("1"),
                                                              exprfn::parse("0"), eps, region));
        }
        uni::FitResult fit = uni::fit_exponent(eps_list, residuals);
        std::ostringstream ss;
        ss << "sup residuals " << residuals[0] << ", " << residuals[1] << ", " << residuals[2]
           << "; slope " << fit.slope << " (>= 5, theoretical 6)";
        detail = ss.str();
        return fit.slope >= 5.0;
    });

    criterion(11, "universality-scaling", [](std::string& detail) {
        auto t0 = std::chrono::steady_clock::now();
        auto data = kdv_fixture_chars();
        uni::CriticalFrame frame = uni::make_frame(data, exprfn::parse("1"));

        std::vector<double> Ts;
        for (double T = -10.0; T < -1.3 - 1e-9; T += 0.4) Ts.push_back(T);
        for (long i = 0; i <= 52; ++i) Ts.push_back(-1.3 + 0.025 * static_cast<double>(i));
        auto sols = p2::continuation_in_T(Ts, 12.0, 2048);
        uni::P2Table table(std::vector<p2::P2Solution>(sols.end() - 53, sols.end()));
        double U00 = table(0.0, 0.0);

        std::vector<double> eps_list = {0.08, 0.04, 0.02};
        std::vector<double> slice_Ts = {-1.0, -0.75, -0.5, -0.25, 0.0};
        std::vector<double> residuals;
        bool amp_ok = true;
        std::ostringstream amps;
        for (double eps : eps_list) {
            pde::SimConfig cfg = kdv_sim(eps, 4096, 4e-4, 1.0);
            uni::ScaleFactors s = uni::scales(frame, eps);
            cfg.snapshot_times.clear();
            for (double T : slice_Ts)
                cfg.snapshot_times.push_back(frame.t0 + T * s.tscale / frame.a0p);
            pde::Trajectory traj = pde::simulate(cfg);
            uni::CompareResult r = uni::compare(traj, frame, eps, table);
            residuals.push_back(r.sup);
            // amplitude at the critical point
            std::size_t best = 0;
            for (std::size_t i = 0; i < traj.x.size(); ++i)
                if (std::abs(traj.x[i] - frame.x0) < std::abs(traj.x[best] - frame.x0)) best = i;
            double amp_obs = (traj.at_time(frame.t0)[best] - frame.v0) / U00;
            double rel = std::abs(amp_obs / s.amp - 1.0);
            amps << " " << rel;
            amp_ok = amp_ok && rel <= 0.10;
        }
        uni::FitResult fit = uni::fit_exponent(eps_list, residuals);
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream ss;
        ss << "slope " << fit.slope << " in [0.42, 0.72] (target 0.571); amp rel err" << amps.str()
           << " (<=0.1); " << secs << " s (< 1800)";
        detail = ss.str();
        return fit.slope >= 0.42 && fit.slope <= 0.72 && amp_ok && secs < 1800.0;
    });

    criterion(12, "string-equation-scaling", [](std::string& detail) {
        auto data = kdv_fixture_chars();
        std::vector<double> eps_list = {0.1, 0.05};
        std::vector<double> residuals;
        for (double eps : eps_list) {
            pde::SimConfig cfg = kdv_sim(eps, 2048, 2.5e-4, 0.5);
            cfg.init = pde::SimConfig::Init::Quasitriviality;
            cfg.snapshot_times = {0.5};
            pde::Trajectory traj = pde::simulate(cfg);
            residuals.push_back(uni::string_residual(traj, exprfn::parse("u"),
                                                     exprfn::parse("-u - u^3"), exprfn::parse("1"),
                                                     exprfn::parse("0"), eps, 0.5, -2.0, 2.0));
        }
        double ratio = residuals[0] / residuals[1];
        std::ostringstream ss;
        ss << "residuals " << residuals[0] << ", " << residuals[1] << "; ratio " << ratio
           << " in [16, 64] (target 32)";
        detail = ss.str();
        return ratio >= 16.0 && ratio <= 64.0;
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                failures);
    return failures == 0 ? 0 : 1;
}
