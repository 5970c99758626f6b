// hampert: two engines over Hamiltonian perturbations of u_t + a(u) u_x = 0.
//
//   - exact symbolic verification of the commutativity, quasitriviality,
//     bihamiltonian, and Lax-pair identities through order eps^4, and
//   - numerical study of the critical behaviour near gradient catastrophe
//     against the special fourth-order-ODE profile U(X;T).
//
// Exit codes: 0 all checks passed; 1 a verification or acceptance check
// failed; 2 configuration error; 3 numerical failure.

#include "hampert/io.hpp"
#include "hampert/universality.hpp"
#include "hampert/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using namespace hampert;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file, std::ios::binary);
    out << j.dump(2) << "\n";
}

// "1e-6", "0.25", "3", or "p/q" as an exact rational.
Rat rat_from_decimal(const std::string& text) {
    if (text.find('/') != std::string::npos) return rat_parse(text);
    std::string s = text;
    bool neg = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        neg = s[0] == '-';
        s = s.substr(1);
    }
    long long exp10 = 0;
    auto e = s.find_first_of("eE");
    if (e != std::string::npos) {
        exp10 = std::stoll(s.substr(e + 1));
        s = s.substr(0, e);
    }
    auto dot = s.find('.');
    std::string digits = s;
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<long long>(s.size() - dot - 1);
    }
    if (digits.empty()) throw io::ConfigError("bad numeric literal: " + text);
    Rat v{BigInt(digits)};
    for (long long i = 0; i < std::llabs(exp10); ++i) {
        if (exp10 > 0)
            v *= 10;
        else
            v /= 10;
    }
    return neg ? -v : v;
}

// --mutate SITE:VALUE:DELTA, e.g.  h_f:1/480:+1e-6
struct MutateSpec {
    std::string site;
    Rat value;
    Rat factor;
};

MutateSpec parse_mutate(const std::string& arg) {
    auto p1 = arg.find(':');
    auto p2 = arg.rfind(':');
    if (p1 == std::string::npos || p2 == p1)
        throw io::ConfigError("--mutate expects SITE:VALUE:DELTA");
    static const std::map<std::string, std::string> sites = {
        {"h_f", "hf.f"}, {"h_g", "hf.g"},   {"L2", "L2"},       {"cons", "cons"},
        {"K", "K"},      {"quasi", "quasi"}, {"s", "s"},         {"W", "lax.W"},
        {"V", "lax.V"},  {"riem2", "riem2"}, {"string", "string"}};
    auto it = sites.find(arg.substr(0, p1));
    if (it == sites.end()) throw io::ConfigError("--mutate: unknown site " + arg.substr(0, p1));
    MutateSpec spec;
    spec.site = it->second;
    spec.value = rat_from_decimal(arg.substr(p1 + 1, p2 - p1 - 1));
    spec.factor = Rat(1) + rat_from_decimal(arg.substr(p2 + 1));
    return spec;
}

chars::CharacteristicData chars_from_config(const io::Config& cfg,
                                            const std::string& section = "characteristics") {
    return chars::CharacteristicData::make(
        exprfn::parse(cfg.get(section, "a")), exprfn::parse(cfg.get(section, "b")),
        cfg.get_double(section, "v_lo", -10.0), cfg.get_double(section, "v_hi", 10.0));
}

pde::SimConfig sim_from_config(const io::Config& cfg, double eps_override = -1.0) {
    pde::SimConfig sim;
    sim.eps = eps_override > 0 ? eps_override : cfg.get_double("simulate", "eps");
    sim.c = exprfn::parse(cfg.get("simulate", "c"));
    sim.p = exprfn::parse(cfg.get("simulate", "p", "0"));
    sim.include_eps4 = cfg.get_bool("simulate", "include_eps4", false);
    sim.Lx = cfg.get_double("simulate", "Lx", 24.0);
    sim.x_left = cfg.get_double("simulate", "x_left", -sim.Lx / 2);
    sim.N = cfg.get_int("simulate", "N", 1024);
    sim.dt = cfg.get_double("simulate", "dt", 1e-3);
    sim.t_end = cfg.get_double("simulate", "t_end", 1.0);
    if (cfg.has("simulate", "snapshots")) sim.snapshot_times = cfg.get_list("simulate", "snapshots");
    std::string init = cfg.get("simulate", "init", "expression");
    if (init == "expression") {
        sim.init = pde::SimConfig::Init::Expression;
        sim.init_expr = exprfn::parse(cfg.get("simulate", "init_expr"));
    } else if (init == "characteristics" || init == "from-characteristics") {
        sim.init = pde::SimConfig::Init::Characteristics;
        sim.char_data = chars_from_config(cfg);
    } else if (init == "quasitriviality") {
        sim.init = pde::SimConfig::Init::Quasitriviality;
        sim.char_data = chars_from_config(cfg);
    } else {
        throw io::ConfigError("[simulate] init: unknown mode " + init);
    }
    sim.window = cfg.get_double("simulate", "window", 8.0);
    sim.blend_width = cfg.get_double("simulate", "blend_width", 2.0);
    sim.dealias = cfg.get_bool("simulate", "dealias", true);
    sim.cfl_safety = cfg.get_double("simulate", "cfl_safety", 0.5);
    return sim;
}

void write_trajectory(const fs::path& dir, const pde::Trajectory& traj, io::RunManifest& man) {
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        fs::path f = dir / ("snapshot_" + std::to_string(i) + ".csv");
        io::write_csv(f, {"x", "u"}, {traj.x, traj.u[i]});
        man.add_output(f);
    }
    fs::path mon = dir / "monitors.csv";
    io::write_csv(mon, {"t", "mean", "momentum", "hamiltonian"},
                  {traj.times, traj.monitors.mean, traj.monitors.momentum,
                   traj.monitors.hamiltonian});
    man.add_output(mon);
}

// Runs one job per eps with at most HAMPERT_THREADS in flight.
template <class Job>
auto run_sweep(const std::vector<double>& eps_list, Job&& job) {
    using Result = std::invoke_result_t<Job, double>;
    std::vector<Result> results(eps_list.size());
    unsigned cap = io::max_threads();
    for (std::size_t base = 0; base < eps_list.size(); base += cap) {
        std::vector<std::future<Result>> running;
        for (std::size_t i = base; i < std::min(base + cap, eps_list.size()); ++i)
            running.push_back(std::async(std::launch::async, job, eps_list[i]));
        for (std::size_t i = 0; i < running.size(); ++i) results[base + i] = running[i].get();
    }
    return results;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& which, const std::vector<std::string>& mutate_args,
               const std::string& s_choice_name, const std::string& out_dir) {
    std::vector<MutateSpec> specs;
    for (const auto& a : mutate_args) specs.push_back(parse_mutate(a));
    std::vector<std::unique_ptr<ScaleValueMutator>> owned;
    auto mut_for = [&](const std::string& site) -> Mutator* {
        for (const auto& s : specs)
            if (s.site == site) {
                owned.push_back(std::make_unique<ScaleValueMutator>(s.site, s.value, s.factor));
                return owned.back().get();
            }
        return nullptr;
    };

    verify::VerificationReport rep;
    if (which == "commuting-first") {
        verify::CommutingOptions opt;
        if (s_choice_name == "zero")
            opt.s_choice = models::SChoice::Zero;
        else if (s_choice_name == "theorem2")
            opt.s_choice = models::SChoice::Theorem2;
        opt.mut_f = mut_for("hf.f");
        opt.mut_g = mut_for("hf.g");
        rep = verify::verify_commuting_first(opt);
    } else if (which == "commuting-second") {
        verify::SecondBracketOptions opt;
        opt.mut_f = mut_for("hf.f");
        opt.mut_g = mut_for("hf.g");
        opt.mut_bracket = mut_for("L2");
        opt.mut_constraint = mut_for("cons");
        rep = verify::verify_commuting_second(opt);
        auto necessity = verify::verify_constraint_necessity();
        rep.checks.push_back({"constraint-necessity", necessity.pass(),
                              necessity.pass() ? "" : necessity.witness, 0, 0.0});
    } else if (which == "quasitriviality") {
        verify::QuasitrivialityOptions opt;
        opt.mut_K = mut_for("K");
        opt.mut_hf = mut_for("hf.f");
        opt.mut_map = mut_for("quasi");
        rep = verify::verify_quasitriviality(opt);
    } else if (which == "lax") {
        verify::LaxOptions opt;
        opt.mut_W = mut_for("lax.W");
        opt.mut_V = mut_for("lax.V");
        rep = verify::verify_lax_compatibility(opt);
    } else {
        throw io::ConfigError("verify: unknown theorem " + which);
    }

    if (!specs.empty()) {
        bool hit = false;
        for (const auto& m : owned)
            if (m->hit) hit = true;
        if (!hit) throw io::ConfigError("--mutate: no coefficient matched the given value");
    }

    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("verify " + which, nullptr);
    write_json(dir / "report.json", rep.to_json());
    man.add_output(dir / "report.json");
    man.set_pass(rep.pass());
    man.write(dir);
    std::cout << rep.to_json().dump(2) << "\n";
    return rep.pass() ? kExitPass : kExitCheckFailed;
}

int cmd_catastrophe(const std::string& a, const std::string& b, double vlo, double vhi,
                    const std::string& out_dir) {
    auto data = chars::CharacteristicData::make(exprfn::parse(a), exprfn::parse(b), vlo, vhi);
    chars::CatastrophePoint cp = chars::find_catastrophe(data);
    json j{{"x0", cp.x0},       {"t0", cp.t0}, {"v0", cp.v0},
           {"kappa", cp.kappa}, {"a0", cp.a0}, {"a0p", cp.a0p}};
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("catastrophe", nullptr);
    write_json(dir / "catastrophe.json", j);
    man.add_output(dir / "catastrophe.json");
    man.set_pass(true);
    man.write(dir);
    std::cout << j.dump(2) << "\n";
    return kExitPass;
}

int cmd_p2_solve(double T, double L, int N, const std::string& out_dir) {
    p2::P2Solution sol = T <= -8.0 ? p2::solve_bvp(T, L, N) : [&] {
        std::vector<double> Ts;
        for (double t = -10.0; t < T - 1e-9; t += 0.5) Ts.push_back(t);
        Ts.push_back(T);
        return p2::continuation_in_T(Ts, L, N).back();
    }();
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("p2 solve", nullptr);
    io::write_csv(dir / "p2_solution.csv", {"X", "U"}, {sol.X, sol.U});
    man.add_output(dir / "p2_solution.csv");
    json meta{{"T", sol.T},
              {"L", L},
              {"N", N},
              {"residual", sol.residual_norm},
              {"boundary_terms", sol.boundary_terms}};
    write_json(dir / "p2_solution.json", meta);
    man.add_output(dir / "p2_solution.json");
    man.set_pass(true);
    man.write(dir);
    std::cout << meta.dump(2) << "\n";
    return kExitPass;
}

int cmd_p2_table(double Tmin, double Tmax, double dT, double L, int N,
                 const std::string& out_dir) {
    std::vector<double> Ts;
    for (double t = -10.0; t < Tmin - 1e-9; t += 0.4) Ts.push_back(t);
    long steps = std::lround((Tmax - Tmin) / dT);
    for (long i = 0; i <= steps; ++i) Ts.push_back(Tmin + static_cast<double>(i) * dT);
    auto sols = p2::continuation_in_T(Ts, L, N);
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("p2 table", nullptr);
    json meta;
    meta["L"] = L;
    meta["N"] = N;
    meta["slices"] = json::array();
    int idx = 0;
    for (const auto& s : sols) {
        if (s.T < Tmin - 1e-9) continue;
        fs::path f = dir / ("p2_T" + std::to_string(idx) + ".csv");
        io::write_csv(f, {"X", "U"}, {s.X, s.U});
        man.add_output(f);
        meta["slices"].push_back(
            {{"T", s.T}, {"file", f.filename().string()}, {"residual", s.residual_norm}});
        ++idx;
    }
    write_json(dir / "p2_table.json", meta);
    man.add_output(dir / "p2_table.json");
    man.set_pass(true);
    man.write(dir);
    std::cout << "wrote " << idx << " slices to " << dir << "\n";
    return kExitPass;
}

int cmd_p2_kdv_check(double T, double delta, double L, int N, const std::string& out_dir) {
    if (delta <= 0) delta = 1e-3 * std::max(1.0, std::abs(T));
    p2::P2Solution c = p2::solve_bvp(T, L, N);
    p2::SolveOptions o;
    o.guess = &c.U;
    p2::P2Solution m = p2::solve_bvp(T - delta, L, N, o);
    p2::P2Solution p = p2::solve_bvp(T + delta, L, N, o);
    p2::KdvResidual r = p2::kdv_residual(m, c, p, delta);
    json j{{"T", T}, {"delta", delta}, {"residual", r.value}, {"degenerate", r.degenerate}};
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("p2 kdv-check", nullptr);
    write_json(dir / "kdv_check.json", j);
    man.add_output(dir / "kdv_check.json");
    man.set_pass(true);
    man.write(dir);
    std::cout << j.dump(2) << "\n";
    return kExitPass;
}

int cmd_simulate(const io::Config& cfg, const std::string& out_dir) {
    pde::SimConfig sim = sim_from_config(cfg);
    pde::Trajectory traj = pde::simulate(sim);
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("simulate", &cfg);
    write_trajectory(dir, traj, man);
    pde::DriftReport drift = pde::monitor_invariants(traj);
    man.add_note("drift", json{{"mean", drift.mean},
                               {"momentum", drift.momentum},
                               {"hamiltonian", drift.hamiltonian}});
    man.set_pass(true);
    man.write(dir);
    std::cout << "wrote " << traj.times.size() << " snapshots to " << dir << "\n";
    return kExitPass;
}

int cmd_universality_compare(const io::Config& cfg, const std::string& out_dir) {
    auto data = chars_from_config(cfg);
    uni::CriticalFrame frame = uni::make_frame(data, exprfn::parse(cfg.get("simulate", "c")));

    double tab_Tmin = cfg.get_double("universality", "table_Tmin", -1.3);
    double tab_dT = cfg.get_double("universality", "table_dT", 0.025);
    double tab_L = cfg.get_double("universality", "table_L", 12.0);
    int tab_N = cfg.get_int("universality", "table_N", 2048);
    uni::Window window;
    window.Xmax = cfg.get_double("universality", "window_X", 2.0);
    window.Tmin = cfg.get_double("universality", "window_Tmin", -1.0);
    window.Tmax = cfg.get_double("universality", "window_Tmax", 0.0);

    std::vector<double> Ts;
    for (double t = -10.0; t < tab_Tmin - 1e-9; t += 0.4) Ts.push_back(t);
    long steps = std::lround((0.0 - tab_Tmin) / tab_dT);
    for (long i = 0; i <= steps; ++i) Ts.push_back(tab_Tmin + static_cast<double>(i) * tab_dT);
    auto sols = p2::continuation_in_T(Ts, tab_L, tab_N);
    std::size_t kept = static_cast<std::size_t>(steps) + 1;
    uni::P2Table table(
        std::vector<p2::P2Solution>(sols.end() - static_cast<long>(kept), sols.end()));

    std::vector<double> eps_list = cfg.get_list("universality", "eps_list");
    std::vector<double> slice_Ts = cfg.has("universality", "slices")
                                       ? cfg.get_list("universality", "slices")
                                       : std::vector<double>{-1.0, -0.75, -0.5, -0.25, 0.0};

    auto one = [&](double eps) {
        pde::SimConfig sim = sim_from_config(cfg, eps);
        uni::ScaleFactors s = uni::scales(frame, eps);
        sim.snapshot_times.clear();
        for (double T : slice_Ts)
            sim.snapshot_times.push_back(frame.t0 + T * s.tscale / frame.a0p);
        sim.t_end = frame.t0;
        pde::Trajectory traj = pde::simulate(sim);
        uni::CompareResult r = uni::compare(traj, frame, eps, table, window);
        double u_center = 0;
        {
            std::size_t best = 0;
            for (std::size_t i = 0; i < traj.x.size(); ++i)
                if (std::abs(traj.x[i] - frame.x0) < std::abs(traj.x[best] - frame.x0)) best = i;
            u_center = traj.at_time(frame.t0)[best];
        }
        return std::tuple<uni::CompareResult, double>(r, u_center);
    };
    auto results = run_sweep(eps_list, one);

    double U00 = table(0.0, 0.0);
    json per_eps = json::array();
    std::vector<double> residuals;
    bool amp_ok = true;
    double amp_tol = cfg.get_double("universality", "amp_tol", 0.10);
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const auto& [r, u_center] = results[i];
        uni::ScaleFactors s = uni::scales(frame, eps_list[i]);
        double amp_obs = (u_center - frame.v0) / U00;
        double amp_rel = std::abs(amp_obs / s.amp - 1.0);
        amp_ok = amp_ok && amp_rel <= amp_tol;
        residuals.push_back(r.sup);
        per_eps.push_back({{"eps", eps_list[i]},
                           {"sup_residual", r.sup},
                           {"sup_over_amp", r.sup_over_amp},
                           {"points", r.points},
                           {"amplitude_predicted", s.amp},
                           {"amplitude_observed", amp_obs},
                           {"amplitude_rel_err", amp_rel}});
    }
    uni::FitResult fit = uni::fit_exponent(eps_list, residuals);
    double lo = cfg.get_double("universality", "slope_min", 0.42);
    double hi = cfg.get_double("universality", "slope_max", 0.72);
    bool slope_ok = fit.slope >= lo && fit.slope <= hi;

    json out{{"frame",
              {{"x0", frame.x0},
               {"t0", frame.t0},
               {"v0", frame.v0},
               {"a0", frame.a0},
               {"a0p", frame.a0p},
               {"kappa", frame.kappa},
               {"c0", frame.c0}}},
             {"U00", U00},
             {"per_eps", per_eps},
             {"slope", fit.slope},
             {"slope_stderr", fit.stderr_slope},
             {"slope_band", {lo, hi}},
             {"target", 4.0 / 7.0},
             {"pass", slope_ok && amp_ok}};
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("universality compare", &cfg);
    write_json(dir / "compare.json", out);
    man.add_output(dir / "compare.json");
    std::vector<double> log_eps, log_res;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        log_eps.push_back(std::log(eps_list[i]));
        log_res.push_back(std::log(residuals[i]));
    }
    io::write_csv(dir / "scaling.csv", {"log_eps", "log_residual"}, {log_eps, log_res});
    man.add_output(dir / "scaling.csv");
    man.set_pass(slope_ok && amp_ok);
    man.write(dir);
    std::cout << out.dump(2) << "\n";
    return (slope_ok && amp_ok) ? kExitPass : kExitCheckFailed;
}

int cmd_universality_quasi(const io::Config& cfg, const std::string& out_dir) {
    auto data = chars_from_config(cfg);
    std::vector<double> eps_list = cfg.get_list("universality", "eps_list");
    uni::Region region{cfg.get_double("universality", "region_t_lo", 0.2),
                       cfg.get_double("universality", "region_t_hi", 0.5),
                       cfg.get_double("universality", "region_x_lo", -2.0),
                       cfg.get_double("universality", "region_x_hi", 2.0),
                       cfg.get_double("universality", "min_gprime", 0.2)};
    exprfn::Expr c = exprfn::parse(cfg.get("simulate", "c"));
    exprfn::Expr p = exprfn::parse(cfg.get("simulate", "p", "0"));

    auto one = [&](double eps) {
        pde::SimConfig sim = sim_from_config(cfg, eps);
        sim.init = pde::SimConfig::Init::Quasitriviality;
        sim.char_data = data;
        if (sim.snapshot_times.empty())
            sim.snapshot_times = {region.t_lo, 0.5 * (region.t_lo + region.t_hi), region.t_hi};
        sim.t_end = std::max(sim.t_end, region.t_hi);
        pde::Trajectory traj = pde::simulate(sim);
        return uni::quasitriviality_residual(traj, data, c, p, eps, region);
    };
    auto residuals = run_sweep(eps_list, one);

    uni::FitResult fit = uni::fit_exponent(eps_list, residuals);
    double min_slope = cfg.get_double("universality", "min_slope", 5.0);
    bool ok = fit.slope >= min_slope;
    json out{{"eps_list", eps_list},
             {"residuals", residuals},
             {"slope", fit.slope},
             {"min_slope", min_slope},
             {"pass", ok}};
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("universality quasi", &cfg);
    write_json(dir / "quasi.json", out);
    man.add_output(dir / "quasi.json");
    man.set_pass(ok);
    man.write(dir);
    std::cout << out.dump(2) << "\n";
    return ok ? kExitPass : kExitCheckFailed;
}

int cmd_universality_string(const io::Config& cfg, const std::string& out_dir) {
    auto data = chars_from_config(cfg);
    exprfn::Expr a = exprfn::parse(cfg.get("characteristics", "a"));
    exprfn::Expr b = exprfn::parse(cfg.get("characteristics", "b"));
    exprfn::Expr c = exprfn::parse(cfg.get("simulate", "c"));
    exprfn::Expr p = exprfn::parse(cfg.get("simulate", "p", "0"));
    std::vector<double> eps_list = cfg.get_list("universality", "eps_list");
    double t = cfg.get_double("universality", "string_t", 0.5);
    double x_lo = cfg.get_double("universality", "region_x_lo", -2.0);
    double x_hi = cfg.get_double("universality", "region_x_hi", 2.0);

    auto one = [&](double eps) {
        pde::SimConfig sim = sim_from_config(cfg, eps);
        sim.init = pde::SimConfig::Init::Quasitriviality;
        sim.char_data = data;
        sim.snapshot_times = {t};
        sim.t_end = std::max(sim.t_end, t);
        pde::Trajectory traj = pde::simulate(sim);
        return uni::string_residual(traj, a, b, c, p, eps, t, x_lo, x_hi);
    };
    auto residuals = run_sweep(eps_list, one);
    json out{{"eps_list", eps_list}, {"residuals", residuals}};
    bool ok = true;
    if (eps_list.size() >= 2) {
        double ratio = residuals[0] / residuals[1];
        double lo = cfg.get_double("universality", "ratio_min", 16.0);
        double hi = cfg.get_double("universality", "ratio_max", 64.0);
        ok = ratio >= lo && ratio <= hi;
        out["ratio"] = ratio;
        out["ratio_band"] = {lo, hi};
    }
    out["pass"] = ok;
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("universality string", &cfg);
    write_json(dir / "string.json", out);
    man.add_output(dir / "string.json");
    man.set_pass(ok);
    man.write(dir);
    std::cout << out.dump(2) << "\n";
    return ok ? kExitPass : kExitCheckFailed;
}

int cmd_universality_fit(const std::string& csv_file, const std::string& out_dir) {
    std::string text = io::file_contents(csv_file);
    std::istringstream in(text);
    std::string line;
    std::vector<double> eps, res;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw io::ConfigError("fit: expected two CSV columns");
        eps.push_back(std::stod(line.substr(0, comma)));
        res.push_back(std::stod(line.substr(comma + 1)));
    }
    uni::FitResult fit = uni::fit_exponent(eps, res);
    json out{{"slope", fit.slope},
             {"intercept", fit.intercept},
             {"stderr", fit.stderr_slope},
             {"n", eps.size()}};
    fs::path dir = ensure_out_dir(out_dir);
    write_json(dir / "fit.json", out);
    std::cout << out.dump(2) << "\n";
    return kExitPass;
}

int cmd_specializations(const std::string& out_dir) {
    json out = json::array();
    bool all_ok = true;
    for (const auto& s : models::specializations()) {
        bool ok = exprfn::equal(s.p, models::p_from_cq(s.c, s.q));
        all_ok = all_ok && ok;
        out.push_back({{"name", s.name},
                       {"c", exprfn::render(s.c)},
                       {"p", exprfn::render(s.p)},
                       {"q", exprfn::render(s.q)},
                       {"s", exprfn::render(s.s)},
                       {"note", s.note},
                       {"constraint_check", ok}});
    }
    fs::path dir = ensure_out_dir(out_dir);
    io::RunManifest man("specializations", nullptr);
    write_json(dir / "specializations.json", out);
    man.add_output(dir / "specializations.json");
    man.set_pass(all_ok);
    man.write(dir);
    std::cout << out.dump(2) << "\n";
    return all_ok ? kExitPass : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hampert: exact and numerical laboratory for Hamiltonian perturbations of "
                 "u_t + a(u) u_x = 0"};
    app.require_subcommand(1);
    std::string out_dir = "hampert-out";
    auto add_out = [&out_dir](CLI::App* sub) {
        sub->add_option("--out", out_dir, "output directory for run artifacts");
    };

    auto* verify_cmd = app.add_subcommand("verify", "exact symbolic theorem checks");
    std::string theorem;
    verify_cmd
        ->add_option("theorem", theorem,
                     "commuting-first | commuting-second | quasitriviality | lax")
        ->required();
    std::vector<std::string> mutate_args;
    verify_cmd->add_option("--mutate", mutate_args, "SITE:VALUE:DELTA coefficient perturbation");
    std::string s_choice = "free";
    verify_cmd->add_option("--s-choice", s_choice, "free | zero | theorem2");

    auto* cat_cmd = app.add_subcommand("catastrophe", "gradient catastrophe of x = a(v)t + b(v)");
    std::string a_expr, b_expr;
    double vlo = -10.0, vhi = 10.0;
    cat_cmd->add_option("--a", a_expr)->required();
    cat_cmd->add_option("--b", b_expr)->required();
    cat_cmd->add_option("--vlo", vlo);
    cat_cmd->add_option("--vhi", vhi);

    auto* p2_cmd = app.add_subcommand("p2", "the special fourth-order ODE solution U(X;T)");
    p2_cmd->require_subcommand(1);
    double T = -10.0, L = 12.0, Tmin = -1.3, Tmax = 0.0, dT = 0.025, delta = 0.0;
    int N = 2048;
    auto* p2_solve = p2_cmd->add_subcommand("solve");
    p2_solve->add_option("--T", T)->required();
    p2_solve->add_option("--L", L);
    p2_solve->add_option("--N", N);
    auto* p2_table = p2_cmd->add_subcommand("table");
    p2_table->add_option("--Tmin", Tmin);
    p2_table->add_option("--Tmax", Tmax);
    p2_table->add_option("--dT", dT);
    p2_table->add_option("--L", L);
    p2_table->add_option("--N", N);
    auto* p2_kdv = p2_cmd->add_subcommand("kdv-check");
    p2_kdv->add_option("--T", T)->required();
    p2_kdv->add_option("--delta", delta);
    p2_kdv->add_option("--L", L);
    p2_kdv->add_option("--N", N);

    auto* sim_cmd = app.add_subcommand("simulate", "pseudo-spectral run of the perturbed flow");
    std::string config_file;
    sim_cmd->add_option("--config", config_file, "flat key = value configuration")->required();

    auto* uni_cmd = app.add_subcommand("universality", "critical-behaviour studies");
    uni_cmd->require_subcommand(1);
    std::string uni_config, fit_csv;
    auto* uni_compare = uni_cmd->add_subcommand("compare");
    uni_compare->add_option("--config", uni_config)->required();
    auto* uni_fit = uni_cmd->add_subcommand("fit");
    uni_fit->add_option("--data", fit_csv, "CSV with eps,residual columns")->required();
    auto* uni_quasi = uni_cmd->add_subcommand("quasi");
    uni_quasi->add_option("--config", uni_config)->required();
    auto* uni_string = uni_cmd->add_subcommand("string");
    uni_string->add_option("--config", uni_config)->required();

    auto* spec_cmd =
        app.add_subcommand("specializations", "parameter fixtures and the constraint cross-check");

    for (CLI::App* sub : {verify_cmd, cat_cmd, p2_solve, p2_table, p2_kdv, sim_cmd, uni_compare,
                          uni_fit, uni_quasi, uni_string, spec_cmd})
        add_out(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify_cmd->parsed()) return cmd_verify(theorem, mutate_args, s_choice, out_dir);
        if (cat_cmd->parsed()) return cmd_catastrophe(a_expr, b_expr, vlo, vhi, out_dir);
        if (p2_cmd->parsed()) {
            if (p2_solve->parsed()) return cmd_p2_solve(T, L, N, out_dir);
            if (p2_table->parsed()) return cmd_p2_table(Tmin, Tmax, dT, L, N, out_dir);
            if (p2_kdv->parsed()) return cmd_p2_kdv_check(T, delta, L, N, out_dir);
        }
        if (sim_cmd->parsed()) return cmd_simulate(io::Config::from_file(config_file), out_dir);
        if (uni_cmd->parsed()) {
            if (uni_fit->parsed()) return cmd_universality_fit(fit_csv, out_dir);
            io::Config cfg = io::Config::from_file(uni_config);
            if (uni_compare->parsed()) return cmd_universality_compare(cfg, out_dir);
            if (uni_quasi->parsed()) return cmd_universality_quasi(cfg, out_dir);
            if (uni_string->parsed()) return cmd_universality_string(cfg, out_dir);
        }
        if (spec_cmd->parsed()) return cmd_specializations(out_dir);
    } catch (const io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const exprfn::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
