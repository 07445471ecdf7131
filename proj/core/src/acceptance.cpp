#include "shiftwave/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "shiftwave/commands.hpp"
#include "shiftwave/config.hpp"
#include "shiftwave/csv.hpp"
#include "shiftwave/simulate.hpp"
#include "shiftwave/wave.hpp"

namespace shiftwave {

namespace {

struct Checker {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (detail.tellp() > 0) detail << "; ";
        if (!ok) {
            detail << "FAILED ";
            pass = false;
        }
        detail << what;
    }
    void note(const std::string& what) {
        if (detail.tellp() > 0) detail << "; ";
        detail << what;
    }
};

std::string g12(double v) { return fmt_g12(v); }

// Brute-force lambda-grid oracle for the dispersion speed: step 1e-4 on
// (0, 20], trapezoid quadrature on the kernel's native nodes, evaluated
// with a multiplicative exp recurrence. Independent of linear_speed's
// golden-section path.
double scan_min_speed(const Kernel& k, double d, double rate, double* lambda_at) {
    const std::vector<double>& y = k.nodes();
    const std::vector<double>& J = k.values();
    const std::size_t n = y.size();
    std::vector<double> coef(n), t(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w;
        if (i == 0) w = 0.5 * (y[1] - y[0]);
        else if (i == n - 1) w = 0.5 * (y[n - 1] - y[n - 2]);
        else w = 0.5 * (y[i + 1] - y[i - 1]);
        coef[i] = w * J[i];
    }
    const double dl = 1e-4;
    const int N = 200000;  // lambda in (0, 20]
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = std::exp(dl * y[i]);
        t[i] = r[i];
    }
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = dl;
    for (int step = 1; step <= N; ++step) {
        double M = 0.0;
        for (std::size_t i = 0; i < n; ++i) M += coef[i] * t[i];
        const double lambda = dl * static_cast<double>(step);
        const double c = (d * (M - 1.0) + rate) / lambda;
        if (c < best) {
            best = c;
            best_lambda = lambda;
        }
        for (std::size_t i = 0; i < n; ++i) t[i] *= r[i];
    }
    if (lambda_at) *lambda_at = best_lambda;
    return best;
}

// ternary-search refinement of the speed-objective argmin, independent of
// the golden-section implementation path
double refine_argmin(const ValidatedModel& m, double lo, double hi) {
    auto c = [&](double lam) {
        return linear_speed_objective(m.params.d2, *m.kernel_predator,
                                      m.params.r2 * (m.params.b - 1.0), lam);
    };
    for (int i = 0; i < 300 && (hi - lo) > 1e-13; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (c(m1) < c(m2)) hi = m2;
        else lo = m1;
    }
    return 0.5 * (lo + hi);
}

ScenarioConfig acfg(const std::string& dir, const std::string& name,
                    const std::vector<std::string>& ov) {
    return load_config(dir + "/" + name, ov);
}

double window_field_sup(const RunResult& rr, double T, bool want_u, bool want_v) {
    double sup = 0.0;
    auto scan = [&](const std::vector<double>& u, const std::vector<double>& v) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            double val = 0.0;
            if (want_u) val += u[j];
            if (want_v) val += v[j];
            sup = std::max(sup, val);
        }
    };
    for (const Snapshot& s : rr.snapshots) {
        if (s.t >= 0.8 * T - 1e-9) scan(s.u, s.v);
    }
    scan(rr.final_field.u, rr.final_field.v);
    return sup;
}

// max over the listed frames of a per-sample functional, final 20% window
double window_probe_max(const ProbeSeries& ps, const std::vector<double>& frames,
                        double (*f)(double u, double v, const CoexistenceState&),
                        const CoexistenceState& cs) {
    const double t_cut = 0.8 * ps.times.back();
    double worst = 0.0;
    for (double want : frames) {
        std::size_t ci = ps.frames.size();
        for (std::size_t c = 0; c < ps.frames.size(); ++c) {
            if (std::abs(ps.frames[c] - want) < 1e-9) ci = c;
        }
        if (ci == ps.frames.size()) throw NumericalError("acceptance: probe frame missing");
        for (std::size_t k = 0; k < ps.times.size(); ++k) {
            if (ps.times[k] < t_cut) continue;
            worst = std::max(worst, f(ps.u[ci][k], ps.v[ci][k], cs));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

CriterionResult c1_dispersion(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{1, "dispersion oracle equivalence", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c1_dispersion.cfg", ov);
    const double tol = 1e-6 * cfg.accept_tol_scale;

    const Kernel uni = *cfg.kernel_prey;        // uniform on [-1,1]
    const Kernel rc = *cfg.kernel_predator;     // raised cosine on [-1,1]

    const LinearSpeedResult su = linear_speed(cfg.model.d1, uni, cfg.model.r1);
    const double su_scan = scan_min_speed(uni, cfg.model.d1, cfg.model.r1, nullptr);
    ck.require(std::abs(su.speed - su_scan) <= tol,
               "uniform |golden-scan|=" + g12(std::abs(su.speed - su_scan)) + " <= " + g12(tol));

    const LinearSpeedResult sr = linear_speed(cfg.model.d1, rc, cfg.model.r1);
    const double sr_scan = scan_min_speed(rc, cfg.model.d1, cfg.model.r1, nullptr);
    ck.require(std::abs(sr.speed - sr_scan) <= tol,
               "raised-cosine |golden-scan|=" + g12(std::abs(sr.speed - sr_scan)) + " <= " +
                   g12(tol));

    ck.require(local_speed(1.0, 1.0) == 2.0, "local_speed(1,1) == 2 exactly");
    ck.note("uniform speed " + g12(su.speed) + " at lambda " + g12(su.lambda_argmin));

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c2_delta(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{2, "Delta root structure", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c2_delta.cfg", ov);
    const ValidatedModel m = cfg.validated();
    const double tol = 1e-6 * cfg.accept_tol_scale;

    const DeltaRoots roots = delta_roots(cfg.model.s, m);
    ck.require(roots.regime == DeltaRoots::Regime::TwoRoots, "two-root regime at s=1.2");
    if (roots.regime == DeltaRoots::Regime::TwoRoots) {
        ck.require(roots.lambda1 < roots.lambda2, "lambda1 < lambda2");
        const double eps = 1e-4 * roots.lambda1;
        const double dm = dispersion_delta(roots.lambda1 - eps, cfg.model.s, m);
        const double dmid =
            dispersion_delta(0.5 * (roots.lambda1 + roots.lambda2), cfg.model.s, m);
        const double dp = dispersion_delta(roots.lambda2 + eps, cfg.model.s, m);
        ck.require(dm > 0.0 && dmid < 0.0 && dp > 0.0,
                   "sign pattern +/-/+ (" + g12(dm) + ", " + g12(dmid) + ", " + g12(dp) + ")");
    }

    const LinearSpeedResult pred =
        linear_speed(m.params.d2, *m.kernel_predator, m.params.r2 * (m.params.b - 1.0));
    const double s_near = pred.speed * (1.0 + 2e-9);
    const DeltaRoots dbl = delta_roots(s_near, m);
    ck.require(dbl.regime == DeltaRoots::Regime::DoubleRoot,
               "double-root regime within 1e-8 of s_*");
    const double refined =
        refine_argmin(m, pred.lambda_argmin * 0.99, pred.lambda_argmin * 1.01);
    ck.require(std::abs(dbl.lambda_star - refined) <= tol,
               "|lambda_star - refined argmin| = " + g12(std::abs(dbl.lambda_star - refined)) +
                   " <= " + g12(tol));

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c3_front(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{3, "front-type forced wave", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c3_front.cfg", ov);
    const ValidatedModel m = cfg.validated();
    const double s = cfg.model.s;

    FrontSolveOptions opt;
    opt.steady_tol = 1e-11;
    const Sandwich sw = build_sandwich_front(m, s, cfg.grid, opt);
    const SupersubReport rep = check_supersub(sw, m, s, 1e-7);
    ck.require(rep.pass, "sandwich inequalities verify (worst slack " +
                             g12(*std::min_element(rep.worst_slack.begin(),
                                                   rep.worst_slack.end())) +
                             ")");

    const WaveSolution sol = solve_wave_monotone(sw, m, s, 1e-7, cfg.maxiter);
    ck.require(sol.status == SolveStatus::Converged && sol.gap < 1e-6,
               "monotone gap " + g12(sol.gap) + " < 1e-6 in " + g12(sol.iterations) + " sweeps");
    ck.require(sol.residual < 1e-5, "residual_sup " + g12(sol.residual) + " < 1e-5");

    const CoexistenceState cs = coexistence_state(cfg.model.a, cfg.model.b);
    const double lphi = sol.pair.phi.front(), lpsi = sol.pair.psi.front();
    const double rphi = sol.pair.phi.back(), rpsi = sol.pair.psi.back();
    ck.require(std::abs(lphi - cs.u_star) <= 1e-2 && std::abs(lpsi - cs.v_star) <= 1e-2,
               "left edge (" + g12(lphi) + ", " + g12(lpsi) + ") within 1e-2 of (" +
                   g12(cs.u_star) + ", " + g12(cs.v_star) + ")");
    ck.require(std::abs(rphi) <= 1e-2 && std::abs(rpsi) <= 1e-2, "right edge below 1e-2");
    ck.require(sol.tail == TailTag::Front,
               std::string("tail tag ") + tail_tag_name(sol.tail));

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c4_mixed(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{4, "mixed-type dichotomy", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c4_mixed.cfg", ov);
    const ValidatedModel m = cfg.validated();

    const LinearSpeedResult pred =
        linear_speed(m.params.d2, *m.kernel_predator, m.params.r2 * (m.params.b - 1.0));
    const double s_star = pred.speed;
    ck.note("s_* = " + g12(s_star));

    // existence side: s = s_* + 0.2
    {
        const double s = s_star + 0.2;
        const Sandwich sw = build_sandwich_mixed(m, s, cfg.grid);
        const SupersubReport rep = check_supersub(sw, m, s, 1e-7);
        ck.require(rep.pass, "mixed sandwich verifies at s_*+0.2");

        WaveSolution sol = solve_wave_monotone(sw, m, s, 1e-6, cfg.maxiter);
        if (sol.status != SolveStatus::Converged) {
            ck.note("monotone gap stalled at " + g12(sol.gap) + "; polishing by relaxation");
            sol = solve_wave_relaxation(m, s, std::move(sol.pair), 0.0, 4000.0, 1e-9);
            ck.require(sol.status == SolveStatus::Converged, "relaxation polish converged");
        }
        const TailTag tail = classify_tails(sol.pair, m, 1e-2, 0.05);
        double max_psi = 0.0;
        for (double v : sol.pair.psi) max_psi = std::max(max_psi, v);
        ck.require(tail == TailTag::MixedFrontPulse,
                   std::string("tail tag ") + tail_tag_name(tail) + " == MixedFrontPulse");
        ck.require(max_psi > 1e-2, "interior max psi " + g12(max_psi) + " > 1e-2");
    }

    // nonexistence side: s = s_* - 0.2, relaxation from a seeded psi bump
    {
        const double s = s_star - 0.2;
        ProfilePair init;
        init.grid = cfg.grid;
        init.phi.resize(static_cast<std::size_t>(cfg.grid.n));
        init.psi.assign(static_cast<std::size_t>(cfg.grid.n), 0.0);
        for (int j = 0; j < cfg.grid.n; ++j) {
            const double z = cfg.grid.at(j);
            init.phi[static_cast<std::size_t>(j)] = 0.5 * (1.0 - std::tanh(z / 4.0));
            if (std::abs(z) <= 10.0) {
                const double cphase = std::cos(std::acos(-1.0) * z / 20.0);
                init.psi[static_cast<std::size_t>(j)] = 0.1 * cphase * cphase;
            }
        }
        const WaveSolution sol = solve_wave_relaxation(m, s, std::move(init), 0.0, 2000.0, 1e-13);
        double sup_psi = 0.0;
        for (double v : sol.pair.psi) sup_psi = std::max(sup_psi, v);
        ck.require(sup_psi < 1e-4,
                   "sup psi after T=2000 at s_*-0.2 is " + g12(sup_psi) + " < 1e-4");
    }

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c5_cross_method(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{5, "cross-method agreement", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c3_front.cfg", ov);
    const ValidatedModel m = cfg.validated();
    const double s = cfg.model.s;

    FrontSolveOptions opt;
    opt.steady_tol = 1e-11;
    const Sandwich sw = build_sandwich_front(m, s, cfg.grid, opt);
    const WaveSolution mono = solve_wave_monotone(sw, m, s, 1e-7, cfg.maxiter);
    ck.require(mono.status == SolveStatus::Converged, "monotone converged");

    ProfilePair init;
    init.grid = cfg.grid;
    init.phi.resize(sw.upper.phi.size());
    init.psi.resize(sw.upper.psi.size());
    for (std::size_t j = 0; j < init.phi.size(); ++j) {
        init.phi[j] = 0.5 * (sw.upper.phi[j] + sw.lower.phi[j]);
        init.psi[j] = 0.5 * (sw.upper.psi[j] + sw.lower.psi[j]);
    }
    const WaveSolution rel = solve_wave_relaxation(m, s, std::move(init), 0.0, 4000.0, 1e-9);
    ck.require(rel.status == SolveStatus::Converged, "relaxation converged");

    double dsup = 0.0;
    for (std::size_t j = 0; j < mono.pair.phi.size(); ++j) {
        dsup = std::max(dsup, std::abs(mono.pair.phi[j] - rel.pair.phi[j]));
        dsup = std::max(dsup, std::abs(mono.pair.psi[j] - rel.pair.psi[j]));
    }
    ck.require(dsup < 1e-3, "sup |monotone - relaxation| = " + g12(dsup) + " < 1e-3");

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c6_local_trichotomy(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{6, "local Cauchy trichotomy", false, "", 0.0};
    Checker ck;
    const ScenarioConfig base = acfg(dir, "c6_local.cfg", ov);

    auto run_at = [&](double s) {
        ScenarioConfig cfg = base;
        cfg.model.s = s;
        const ValidatedModel m = cfg.validated();
        Field init = make_initial(cfg.init_kind, cfg.init_center, cfg.init_width, cfg.init_amp_u,
                                  cfg.init_amp_v, cfg.grid, m);
        ProbeConfig pc{cfg.frames, cfg.probe_dt, cfg.snapshot_times};
        return run(m, std::move(init), cfg.T, pc, cfg.dt);
    };

    {
        const RunResult rr = run_at(2.5);
        const double sup_uv = window_field_sup(rr, base.T, true, true);
        ck.require(sup_uv < 1e-3, "s=2.5: final-window sup(u+v) = " + g12(sup_uv) + " < 1e-3");
    }
    {
        const RunResult rr = run_at(1.5);
        const double sup_v = window_field_sup(rr, base.T, false, true);
        ck.require(sup_v < 1e-3, "s=1.5: final-window sup v = " + g12(sup_v) + " < 1e-3");
        const CoexistenceState cs{0.0, 0.0};
        const double dev = window_probe_max(
            rr.probes, {1.65, 1.7, 1.75, 1.8, 1.85},
            [](double u, double, const CoexistenceState&) { return std::abs(u - 1.0); }, cs);
        ck.require(dev < 0.05, "s=1.5: max |u-1| in frames (1.6,1.9) = " + g12(dev) + " < 0.05");
    }
    {
        const RunResult rr = run_at(0.5);
        const CoexistenceState cs = coexistence_state(base.model.a, base.model.b);
        const double dev = window_probe_max(
            rr.probes, {0.65, 0.7, 0.75, 0.8, 0.85},
            [](double u, double v, const CoexistenceState& c) {
                return std::abs(u - c.u_star) + std::abs(v - c.v_star);
            },
            cs);
        ck.require(dev < 0.05, "s=0.5: max |u-u*|+|v-v*| in frames (0.6,0.9) = " + g12(dev) +
                                   " < 0.05 (target " + g12(cs.u_star) + ", " + g12(cs.v_star) +
                                   ")");
    }

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c7_invariants(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{7, "invariant region and monotonicity", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c7_invariants.cfg", ov);

    // (a) 10^3 random valid configurations, 10^3 steps each
    std::mt19937_64 rng(0x5eed2024ull);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    };
    bool bounds_ok = true;
    double worst_u = 0.0, worst_v = 0.0;
    const int n_configs = 1000, n_steps = 1000;
    for (int cfg_i = 0; cfg_i < n_configs && bounds_ok; ++cfg_i) {
        ModelParams p;
        p.d1 = uni(0.1, 1.5);
        p.d2 = uni(0.1, 1.5);
        p.r1 = uni(0.1, 1.5);
        p.r2 = uni(0.1, 1.5);
        p.a = uni(0.05, 0.9);
        p.b = uni(1.05, 3.0);
        p.s = uni(0.1, 1.5);
        p.mode = (cfg_i % 2 == 0) ? DispersalMode::Nonlocal : DispersalMode::Local;

        HabitatProfile hab = HabitatProfile::tanh_profile(uni(-2.0, -0.1), uni(0.2, 2.0));
        std::optional<Kernel> k1, k2;
        Grid1D grid = Grid1D::from_range(-15.0, 15.0, 0.3);
        if (p.mode == DispersalMode::Nonlocal) {
            const double tau = uni(0.5, 1.5);
            k1 = (cfg_i % 4 == 0) ? Kernel::uniform(tau, 65) : Kernel::raised_cosine(tau, 65);
            k2 = Kernel::raised_cosine(uni(0.5, 1.5), 65);
            const double tau_max = std::max(k1->tau(), k2->tau());
            grid = Grid1D::from_range(-8.0 * tau_max, 8.0 * tau_max, tau_max / 9.0);
        }
        const ValidatedModel m = validate_model(p, k1, k2, hab);
        Field f = make_initial(InitKind::Bump, uni(-4.0, 4.0), uni(2.0, 8.0), uni(0.0, 1.0),
                               uni(0.0, p.b - 1.0), grid, m);
        const double dt = dt_max(m, grid.h) * uni(0.5, 1.0);
        for (int step_i = 0; step_i < n_steps; ++step_i) {
            f = step(f, m, dt);
        }
        for (std::size_t j = 0; j < f.u.size(); ++j) {
            worst_u = std::max(worst_u, f.u[j] - 1.0);
            worst_v = std::max(worst_v, f.v[j] - (p.b - 1.0));
            if (f.u[j] < 0.0 || f.v[j] < 0.0 || f.u[j] > 1.0 + 1e-12 ||
                f.v[j] > p.b - 1.0 + 1e-12) {
                bounds_ok = false;
            }
        }
    }
    ck.require(bounds_ok, "1000 random configs x 1000 steps stay in the invariant box "
                          "(worst overshoot u " + g12(worst_u) + ", v " + g12(worst_v) + ")");

    // (b) monotone sweeps preserve ordering (checked at 10 eps inside the solver)
    {
        const ValidatedModel m = cfg.validated();
        FrontSolveOptions opt;
        opt.steady_tol = 1e-11;
        const Sandwich sw = build_sandwich_front(m, cfg.model.s, cfg.grid, opt);
        bool ordered = true;
        std::string msg = "monotone sweeps never violated ordering";
        try {
            const WaveSolution sol = solve_wave_monotone(sw, m, cfg.model.s, 1e-8, cfg.maxiter);
            if (sol.status != SolveStatus::Converged) {
                msg = "monotone did not converge (gap " + g12(sol.gap) + ")";
                ordered = false;
            }
        } catch (const NumericalError& e) {
            ordered = false;
            msg = e.what();
        }
        ck.require(ordered, msg);
    }

    // (c) P fixed-point identity on constants to 1e-12
    {
        ModelParams p;
        p.d1 = p.d2 = p.r1 = p.r2 = 1.0;
        p.a = 0.5;
        p.b = 2.0;
        p.s = 0.7;
        p.mode = DispersalMode::Nonlocal;
        const ValidatedModel m = validate_model(p, Kernel::raised_cosine(1.0, 101),
                                                Kernel::raised_cosine(1.0, 101),
                                                HabitatProfile::constant(1.0));
        const CoexistenceState cs = coexistence_state(p.a, p.b);
        const Grid1D grid = Grid1D::from_range(-30.0, 30.0, 0.125);
        const double beta = 1.1 * beta_floor(m);
        std::vector<double> phi(static_cast<std::size_t>(grid.n), cs.u_star);
        std::vector<double> psi(static_cast<std::size_t>(grid.n), cs.v_star);
        const std::vector<double> p1 = apply_P1(phi, psi, beta, p.s, m, grid);
        const std::vector<double> p2 = apply_P2(phi, psi, beta, p.s, m, grid);
        double dev = 0.0;
        for (std::size_t j = 0; j < p1.size(); ++j) {
            dev = std::max(dev, std::abs(p1[j] - cs.u_star));
            dev = std::max(dev, std::abs(p2[j] - cs.v_star));
        }
        ck.require(dev <= 1e-12, "P fixed-point identity on constants, dev " + g12(dev));
    }

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c8_envelopes(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{8, "exponential envelopes", false, "", 0.0};
    Checker ck;
    ScenarioConfig cfg = acfg(dir, "c8_envelopes.cfg", ov);
    cfg.snapshot_times.clear();
    for (double t = 0.0; t <= cfg.T + 1e-9; t += 2.0) cfg.snapshot_times.push_back(t);

    const ValidatedModel m = cfg.validated();
    Field init = make_initial(cfg.init_kind, cfg.init_center, cfg.init_width, cfg.init_amp_u,
                              cfg.init_amp_v, cfg.grid, m);
    const std::vector<double> u0 = init.u, v0 = init.v;

    ProbeConfig pc{cfg.frames, cfg.probe_dt, cfg.snapshot_times};
    const RunResult rr = run(m, std::move(init), cfg.T, pc, cfg.dt);

    const ModelParams& p = cfg.model;
    const double tau_off = 0.5;  // frame offset: check in the frame speed + tau_off
    const double s_star = local_speed(p.d1, p.r1);
    const double s_star_pred = local_speed(p.d2, p.r2 * (p.b - 1.0));

    // smaller positive roots of d lambda^2 - (speed + tau/2) lambda + rate = 0
    auto smaller_root = [](double d, double c, double rate) {
        const double disc = c * c - 4.0 * d * rate;
        return (c - std::sqrt(disc)) / (2.0 * d);
    };
    const double cu = s_star + 0.5 * tau_off;
    const double lam_u = smaller_root(p.d1, cu, p.r1);
    const double cv = s_star_pred + 0.5 * tau_off;
    const double lam_v = smaller_root(p.d2, cv, p.r2 * (p.b - 1.0));

    auto calibrate = [&](const std::vector<double>& w0, double lam) {
        double A = 0.0;
        for (int j = 0; j < cfg.grid.n; ++j) {
            const double x = cfg.grid.at(j);
            if (w0[static_cast<std::size_t>(j)] > 0.0) {
                A = std::max(A, w0[static_cast<std::size_t>(j)] * std::exp(lam * x));
            }
        }
        return 1.001 * std::max(A, 1e-6);
    };
    const double Au = calibrate(u0, lam_u);
    const double Av = calibrate(v0, lam_v);

    const EnvelopeResult eu = envelope_check(rr.snapshots, cfg.grid, true, lam_u, cu, Au);
    ck.require(eu.pass, "u under envelope A=" + g12(Au) + " lambda=" + g12(lam_u) +
                            " (worst margin " + g12(eu.worst_margin) + " at t=" +
                            g12(eu.worst_t) + ")");
    const EnvelopeResult ev = envelope_check(rr.snapshots, cfg.grid, false, lam_v, cv, Av);
    ck.require(ev.pass, "v under envelope A=" + g12(Av) + " lambda=" + g12(lam_v) +
                            " (worst margin " + g12(ev.worst_margin) + ")");

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

CriterionResult c9_richardson(const std::string& dir, const std::vector<std::string>& ov) {
    CriterionResult res{9, "first-order convergence", false, "", 0.0};
    Checker ck;
    const ScenarioConfig cfg = acfg(dir, "c9_richardson.cfg", ov);
    const ValidatedModel m = cfg.validated();

    // (a) dt refinement of the Cauchy step, T = 5
    {
        const double T = 5.0;
        auto final_at = [&](double dt) {
            Field init = make_initial(cfg.init_kind, cfg.init_center, cfg.init_width,
                                      cfg.init_amp_u, cfg.init_amp_v, cfg.grid, m);
            ProbeConfig pc;
            return run(m, std::move(init), T, pc, dt).final_field;
        };
        const double dt0 = T / 64.0;
        const Field fa = final_at(dt0), fb = final_at(dt0 / 2.0), fc = final_at(dt0 / 4.0);
        auto dsup = [](const Field& x, const Field& y) {
            double d = 0.0;
            for (std::size_t j = 0; j < x.u.size(); ++j) {
                d = std::max(d, std::abs(x.u[j] - y.u[j]));
                d = std::max(d, std::abs(x.v[j] - y.v[j]));
            }
            return d;
        };
        const double r = dsup(fa, fb) / dsup(fb, fc);
        ck.require(r > 1.6 && r < 2.4, "dt Richardson ratio " + g12(r) + " within 2 +/- 0.4");
    }

    // (b) h refinement of the converged front wave
    {
        auto wave_at = [&](double h) {
            const Grid1D grid = Grid1D::from_range(-60.0, 60.0, h);
            FrontSolveOptions opt;
            opt.steady_tol = 1e-11;
            const Sandwich sw = build_sandwich_front(m, cfg.model.s, grid, opt);
            return solve_wave_monotone(sw, m, cfg.model.s, 1e-9, 200000).pair;
        };
        const ProfilePair w1 = wave_at(0.125), w2 = wave_at(0.0625), w3 = wave_at(0.03125);
        auto dsup = [](const ProfilePair& coarse, const ProfilePair& fine, int stride) {
            double d = 0.0;
            for (int j = 0; j < coarse.grid.n; ++j) {
                const std::size_t cj = static_cast<std::size_t>(j);
                const std::size_t fj = static_cast<std::size_t>(j * stride);
                d = std::max(d, std::abs(coarse.phi[cj] - fine.phi[fj]));
                d = std::max(d, std::abs(coarse.psi[cj] - fine.psi[fj]));
            }
            return d;
        };
        const double r = dsup(w1, w2, 2) / dsup(w2, w3, 2);
        ck.require(r > 1.6 && r < 2.4, "wave h Richardson ratio " + g12(r) + " within 2 +/- 0.4");
    }

    res.pass = ck.pass;
    res.detail = ck.detail.str();
    return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::string& config_dir,
                                            const std::vector<std::string>& overrides,
                                            const std::vector<int>& only) {
    using Fn = CriterionResult (*)(const std::string&, const std::vector<std::string>&);
    const Fn fns[9] = {c1_dispersion, c2_delta, c3_front, c4_mixed, c5_cross_method,
                       c6_local_trichotomy, c7_invariants, c8_envelopes, c9_richardson};

    std::vector<CriterionResult> out;
    for (int id = 1; id <= 9; ++id) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = fns[id - 1](config_dir, overrides);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion " + std::to_string(id);
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace shiftwave
