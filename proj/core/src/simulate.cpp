#include "shiftwave/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "shiftwave/wave.hpp"  // DispersalOp for the nonlocal convolution

namespace shiftwave {

namespace {

double lambda1_bound(const ModelParams& p, double alpha_minus) {
    return std::abs(alpha_minus) + 2.0 + p.a * (p.b - 1.0);
}
double lambda2_bound(const ModelParams& p) { return 1.0 + p.b + (p.b - 1.0); }

// centered second difference with mirror edges (homogeneous flux)
void second_difference_mirror(const std::vector<double>& w, double h, std::vector<double>& out) {
    const int n = static_cast<int>(w.size());
    const double inv_h2 = 1.0 / (h * h);
    out.resize(w.size());
    for (int j = 0; j < n; ++j) {
        const double wl = w[static_cast<std::size_t>(j > 0 ? j - 1 : 1)];
        const double wr = w[static_cast<std::size_t>(j < n - 1 ? j + 1 : n - 2)];
        out[static_cast<std::size_t>(j)] = (wl - 2.0 * w[static_cast<std::size_t>(j)] + wr) * inv_h2;
    }
}

struct StepEngine {
    const ValidatedModel& m;
    Grid1D grid;
    std::vector<DispersalOp> conv;  // [prey, predator] in nonlocal mode
    mutable std::vector<double> du, dv;

    StepEngine(const ValidatedModel& model, const Grid1D& g) : m(model), grid(g) {
        if (m.nonlocal()) {
            conv.push_back(DispersalOp::convolution(*m.kernel_prey, g));
            conv.push_back(DispersalOp::convolution(*m.kernel_predator, g));
        }
    }

    void advance(const std::vector<double>& u, const std::vector<double>& v, double t, double dt,
                 std::vector<double>& nu, std::vector<double>& nv) const {
        const ModelParams& p = m.params;
        if (m.nonlocal()) {
            conv[0].apply(u, du);
            conv[1].apply(v, dv);
        } else {
            second_difference_mirror(u, grid.h, du);
            second_difference_mirror(v, grid.h, dv);
        }
        nu.resize(u.size());
        nv.resize(v.size());
        const double st = p.s * t;
        for (int j = 0; j < grid.n; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            const double alpha = m.habitat_at(grid.at(j) - st);
            const double uj = u[sj], vj = v[sj];
            nu[sj] = uj + dt * (p.d1 * du[sj] + p.r1 * uj * (alpha - uj - p.a * vj));
            nv[sj] = vj + dt * (p.d2 * dv[sj] + p.r2 * vj * (-1.0 + p.b * uj - vj));
        }
    }
};

}  // namespace

Field make_initial(InitKind kind, double center, double width, double amp_u, double amp_v,
                   const Grid1D& grid, const ValidatedModel& m) {
    if (!(width > 0.0)) throw ModelError("initial data width must be positive");
    if (amp_u < 0.0 || amp_u > 1.0) {
        throw ModelError("initial prey amplitude outside the class X_1 (need 0 <= amp_u <= 1)");
    }
    const double vcap = m.params.b - 1.0;
    if (amp_v < 0.0 || amp_v > vcap) {
        std::ostringstream os;
        os << "initial predator amplitude outside the class X_{b-1} (need 0 <= amp_v <= "
           << vcap << ")";
        throw ModelError(os.str());
    }

    Field f;
    f.grid = grid;
    f.t = 0.0;
    f.u.assign(static_cast<std::size_t>(grid.n), 0.0);
    f.v.assign(static_cast<std::size_t>(grid.n), 0.0);

    auto bump = [&](std::vector<double>& w, double c, double amp) {
        if (amp == 0.0) return;
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.at(j);
            if (std::abs(x - c) <= width / 2.0) {
                const double phase = std::numbers::pi * (x - c) / width;
                const double cv = std::cos(phase);
                w[static_cast<std::size_t>(j)] = amp * cv * cv;
            }
        }
    };
    auto front = [&](std::vector<double>& w, double amp) {
        if (amp == 0.0) return;
        const double scale = width / 4.0;
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.at(j);
            w[static_cast<std::size_t>(j)] = 0.5 * amp * (1.0 + std::tanh((x - center) / scale));
        }
    };

    switch (kind) {
        case InitKind::Bump:
            bump(f.u, center, amp_u);
            bump(f.v, center, amp_v);
            break;
        case InitKind::PairOfBumps:
            bump(f.u, center + width, amp_u);
            bump(f.v, center - width, amp_v);
            break;
        case InitKind::FrontLike:
            front(f.u, amp_u);
            front(f.v, amp_v);
            break;
    }
    return f;
}

double dt_max(const ValidatedModel& m, double h) {
    const ModelParams& p = m.params;
    const double alpha_minus = m.habitat.alpha_minus();
    const double l1 = 2.0 * p.d1 + p.r1 * lambda1_bound(p, alpha_minus);
    const double l2 = 2.0 * p.d2 + p.r2 * lambda2_bound(p);
    double dt = 0.9 / std::max(l1, l2);
    if (!m.nonlocal()) {
        dt = std::min(dt, 0.45 * h * h / std::max(p.d1, p.d2));
    }
    return dt;
}

Field step(const Field& state, const ValidatedModel& m, double dt) {
    const double cap = dt_max(m, state.grid.h);
    if (dt > cap * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt=" << dt << " violates the step-size contract dt_max=" << cap;
        throw ModelError(os.str());
    }
    StepEngine eng(m, state.grid);
    Field out;
    out.grid = state.grid;
    eng.advance(state.u, state.v, state.t, dt, out.u, out.v);
    out.t = state.t + dt;
    for (std::size_t j = 0; j < out.u.size(); ++j) {
        if (!std::isfinite(out.u[j]) || !std::isfinite(out.v[j])) {
            std::ostringstream os;
            os << "integration produced a non-finite value at t=" << out.t;
            throw NumericalError(os.str());
        }
    }
    return out;
}

namespace {

void sample_probes(const Field& f, const std::vector<double>& frames, ProbeSeries& series) {
    series.times.push_back(f.t);
    for (std::size_t c = 0; c < frames.size(); ++c) {
        const double pos = frames[c] * f.t;
        const Grid1D& g = f.grid;
        double frac = (pos - g.min) / g.h;
        int j0 = static_cast<int>(std::floor(frac));
        if (j0 < 0) j0 = 0;
        if (j0 > g.n - 2) j0 = g.n - 2;
        const double w = frac - static_cast<double>(j0);
        const std::size_t a = static_cast<std::size_t>(j0);
        series.u[c].push_back((1.0 - w) * f.u[a] + w * f.u[a + 1]);
        series.v[c].push_back((1.0 - w) * f.v[a] + w * f.v[a + 1]);
    }
}

}  // namespace

RunResult run(const ValidatedModel& m, Field init, double T, const ProbeConfig& probes,
              double dt) {
    const Grid1D g = init.grid;
    if (T < 0.0) throw ModelError("run: T must be nonnegative");

    // domain guard
    const double half_width = 0.5 * g.width();
    const double center = 0.5 * (g.min + g.max());
    double extent = 0.0;
    for (int j = 0; j < g.n; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        if (init.u[sj] > 0.0 || init.v[sj] > 0.0) {
            extent = std::max(extent, std::abs(g.at(j) - center));
        }
    }
    double tau = 0.0;
    if (m.nonlocal()) tau = std::max(m.kernel_prey->tau(), m.kernel_predator->tau());
    const SpeedReport rep = speed_report(m);
    const double s_hat = rep.s_hat.defined ? rep.s_hat.value : 0.0;
    const double reach = std::max(m.params.s, s_hat) * T + extent + 3.0 * tau;
    if (reach > half_width) {
        std::ostringstream os;
        os << "domain guard violated: max(s, s_hat)*T + support + 3*tau = " << reach
           << " exceeds the domain half-width " << half_width;
        throw ModelError(os.str());
    }
    for (double c : probes.frames) {
        const double pos = c * T;
        if (pos > g.max() || pos < g.min) {
            std::ostringstream os;
            os << "probe frame c=" << c << " leaves the grid by t=" << T;
            throw ModelError(os.str());
        }
    }

    if (dt <= 0.0) dt = dt_max(m, g.h);
    const long nsteps = T > 0.0 ? static_cast<long>(std::ceil(T / dt - 1e-12)) : 0;
    const long stride = std::max<long>(1, static_cast<long>(std::llround(probes.probe_dt / dt)));

    RunResult out;
    out.probes.frames = probes.frames;
    out.probes.u.resize(probes.frames.size());
    out.probes.v.resize(probes.frames.size());

    StepEngine eng(m, g);
    std::vector<double> u = std::move(init.u), v = std::move(init.v);
    std::vector<double> nu(u.size()), nv(v.size());
    double t = init.t;

    Field cur;
    cur.grid = g;

    std::size_t next_snap = 0;
    std::vector<double> snap_times = probes.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());

    auto record = [&](long step_idx) {
        cur.u = u;
        cur.v = v;
        cur.t = t;
        (void)step_idx;
        sample_probes(cur, probes.frames, out.probes);
    };
    auto snapshot_if_due = [&]() {
        while (next_snap < snap_times.size() && t >= snap_times[next_snap] - 0.5 * dt) {
            out.snapshots.push_back(Snapshot{t, u, v});
            ++next_snap;
        }
    };

    record(0);
    snapshot_if_due();
    for (long n = 1; n <= nsteps; ++n) {
        eng.advance(u, v, t, dt, nu, nv);
        u.swap(nu);
        v.swap(nv);
        t = init.t + static_cast<double>(n) * dt;
        if ((n & 255) == 0 || n == nsteps) {
            for (std::size_t j = 0; j < u.size(); ++j) {
                if (!std::isfinite(u[j]) || !std::isfinite(v[j])) {
                    std::ostringstream os;
                    os << "integration produced a non-finite value at t=" << t;
                    throw NumericalError(os.str());
                }
            }
        }
        if (n % stride == 0 || n == nsteps) record(n);
        snapshot_if_due();
    }

    out.final_field.grid = g;
    out.final_field.u = std::move(u);
    out.final_field.v = std::move(v);
    out.final_field.t = t;
    return out;
}

EnvelopeResult envelope_check(const std::vector<Snapshot>& history, const Grid1D& grid,
                              bool check_u, double lambda, double c_frame, double A) {
    EnvelopeResult res;
    res.worst_margin = std::numeric_limits<double>::infinity();
    for (const Snapshot& snap : history) {
        const std::vector<double>& w = check_u ? snap.u : snap.v;
        const double front = c_frame * snap.t;
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.at(j);
            if (x < front) continue;
            const double arg = -lambda * (x - front);
            const double env = arg < -700.0 ? 0.0 : A * std::exp(arg);
            const double margin = env - w[static_cast<std::size_t>(j)];
            if (margin < res.worst_margin) {
                res.worst_margin = margin;
                res.worst_t = snap.t;
                res.worst_x = x;
            }
        }
    }
    if (history.empty()) res.worst_margin = 0.0;
    res.pass = res.worst_margin >= 0.0;
    return res;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Extinct: return "Extinct";
        case Verdict::PreyOnlySaturated: return "PreyOnlySaturated";
        case Verdict::Coexistence: return "Coexistence";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

namespace {

struct BandStats {
    bool any = false;
    double u_max = 0.0, v_max = 0.0;
    double u_min = std::numeric_limits<double>::infinity();
    double v_min = std::numeric_limits<double>::infinity();
    double dev_one = 0.0;   // max |u - 1|
    double dev_star = 0.0;  // max |u - u*| + |v - v*|
    double u_avg = 0.0, v_avg = 0.0;
    int count = 0;
};

BandStats measure_band(const ProbeSeries& series, double c_lo, double c_hi,
                       const CoexistenceState& cs) {
    BandStats st;
    if (series.times.empty()) return st;
    const double t_last = series.times.back();
    const double t_window = 0.8 * t_last;
    for (std::size_t c = 0; c < series.frames.size(); ++c) {
        const double fc = series.frames[c];
        if (fc < c_lo - 1e-12 || fc > c_hi + 1e-12) continue;
        for (std::size_t k = 0; k < series.times.size(); ++k) {
            if (series.times[k] < t_window) continue;
            const double uu = series.u[c][k];
            const double vv = series.v[c][k];
            st.any = true;
            st.u_max = std::max(st.u_max, uu);
            st.v_max = std::max(st.v_max, vv);
            st.u_min = std::min(st.u_min, uu);
            st.v_min = std::min(st.v_min, vv);
            st.dev_one = std::max(st.dev_one, std::abs(uu - 1.0));
            st.dev_star =
                std::max(st.dev_star, std::abs(uu - cs.u_star) + std::abs(vv - cs.v_star));
            st.u_avg += uu;
            st.v_avg += vv;
            ++st.count;
        }
    }
    if (st.count > 0) {
        st.u_avg /= st.count;
        st.v_avg /= st.count;
    }
    return st;
}

}  // namespace

OutcomeReport classify_outcome(const ProbeSeries& series, const ValidatedModel& m,
                               const SpeedReport& speeds, const ClassifyThresholds& thr) {
    const ModelParams& p = m.params;
    OutcomeReport rep;
    rep.target = m.coexistence;
    rep.kappa_floor = 1.0 - p.a * (p.b - 1.0);
    const double eps = thr.band_eps;
    const double s = p.s;

    auto classify_band = [&](double c_lo, double c_hi, bool force_indeterminate,
                             const std::string& note) {
        BandVerdict bv;
        bv.c_lo = c_lo;
        bv.c_hi = c_hi;
        bv.note = note;
        const BandStats st = measure_band(series, c_lo, c_hi, m.coexistence);
        if (!st.any) {
            bv.verdict = Verdict::Indeterminate;
            bv.note += bv.note.empty() ? "no probe frames in band" : "; no probe frames in band";
            rep.bands.push_back(bv);
            return;
        }
        bv.u_level = st.u_avg;
        bv.v_level = st.v_avg;
        if (force_indeterminate) {
            bv.verdict = Verdict::Indeterminate;
            rep.bands.push_back(bv);
            return;
        }
        if (std::max(st.u_max, st.v_max) < thr.eps_ext) {
            bv.verdict = Verdict::Extinct;
        } else if (st.dev_one < thr.eps_sat && st.v_max < thr.eps_ext) {
            bv.verdict = Verdict::PreyOnlySaturated;
        } else if (!m.nonlocal() && st.dev_star < thr.eps_coex) {
            bv.verdict = Verdict::Coexistence;
        } else if (m.nonlocal() && rep.kappa_floor > 0.0 &&
                   st.u_min >= rep.kappa_floor * thr.kappa_margin && st.v_min >= thr.v_min) {
            bv.verdict = Verdict::Coexistence;
        } else {
            bv.verdict = Verdict::Indeterminate;
        }
        rep.bands.push_back(bv);
    };

    auto band_or_error = [&](double lo, double hi, bool force, const std::string& note) {
        const double c_lo = lo + eps, c_hi = hi - eps;
        if (c_lo >= c_hi) {
            std::ostringstream os;
            os << "band (" << lo << ", " << hi << ") collapses under band_eps=" << eps
               << "; shrink band_eps";
            throw ConfigError(os.str());
        }
        classify_band(c_lo, c_hi, force, note);
    };

    // persistence band between s and the relevant minimal speed
    if (m.nonlocal()) {
        if (speeds.s_underline.defined && s < speeds.s_underline.value) {
            band_or_error(s, speeds.s_underline.value, false, "persistence band (s, s_underline)");
        }
        // the open band (s_underline, s_hat): Indeterminate by contract
        if (speeds.s_underline.defined && speeds.s_hat.defined &&
            speeds.s_underline.value < speeds.s_hat.value &&
            std::max(s, speeds.s_underline.value) + eps < speeds.s_hat.value - eps) {
            classify_band(std::max(s, speeds.s_underline.value) + eps,
                          speeds.s_hat.value - eps, true,
                          "open band (s_underline, s_hat): Indeterminate by contract");
        }
    } else {
        if (speeds.s_hat.defined && s < speeds.s_hat.value) {
            band_or_error(s, speeds.s_hat.value, false, "coexistence band (s, s_hat)");
        }
    }

    // prey-only band between max(s, s_*) and s*
    if (speeds.s_star_prey.defined && speeds.s_star_pred.defined) {
        const double lo = std::max(s, speeds.s_star_pred.value);
        if (lo < speeds.s_star_prey.value && lo + eps < speeds.s_star_prey.value - eps) {
            classify_band(lo + eps, speeds.s_star_prey.value - eps, false,
                          "prey saturation band (max(s, s_pred), s_prey)");
        }
    }

    // ahead of the prey's maximal speed: expected extinct
    if (speeds.s_star_prey.defined) {
        const double lo = std::max(s, speeds.s_star_prey.value) + eps;
        double hi = lo;
        for (double c : series.frames) hi = std::max(hi, c);
        if (hi > lo) classify_band(lo, hi, false, "outer cone beyond s_prey");
    }

    return rep;
}

}  // namespace shiftwave
