#pragma once

#include <string>
#include <vector>

#include "shiftwave/dispersion.hpp"
#include "shiftwave/grid.hpp"
#include "shiftwave/model.hpp"

namespace shiftwave {

/// Sampled Cauchy state on an x-grid at time t.
struct Field {
    Grid1D grid;
    std::vector<double> u;
    std::vector<double> v;
    double t = 0.0;

    double x(int j) const { return grid.at(j); }
};

enum class InitKind { Bump, PairOfBumps, FrontLike };

/// Compactly supported cosine-squared bumps (support exactly
/// [center - width/2, center + width/2], peak = amplitude). PairOfBumps
/// offsets the prey bump to center + width and the predator bump to
/// center - width (predator trailing). FrontLike is a smoothed step rising
/// to the amplitude for x > center, for non-decaying scenarios.
/// Amplitudes must lie in the class bounds: 0 <= amp_u <= 1,
/// 0 <= amp_v <= b - 1.
Field make_initial(InitKind kind, double center, double width, double amp_u, double amp_v,
                   const Grid1D& grid, const ValidatedModel& m);

/// Largest stable explicit step:
///   nonlocal: dt (2 d_i + r_i Lambda_i) <= 0.9 for both species, with
///             Lambda_1 = |alpha(-inf)| + 2 + a(b-1), Lambda_2 = 1 + b + (b-1);
///   local:    additionally dt <= 0.45 h^2 / max(d1, d2).
double dt_max(const ValidatedModel& m, double h);

/// One explicit forward-Euler step. The nonlocal operator is a direct
/// quadrature convolution with constant extension beyond the grid; the local
/// operator uses centered second differences with mirror edges. The habitat
/// is evaluated at x - s t. Throws on dt above the bound before computing.
Field step(const Field& state, const ValidatedModel& m, double dt);

struct ProbeConfig {
    std::vector<double> frames;          // moving-frame speeds c
    double probe_dt = 1.0;               // sampling cadence
    std::vector<double> snapshot_times;  // full-field snapshots
};

/// u and v sampled at x = c t (linear interpolation) at a fixed cadence.
struct ProbeSeries {
    std::vector<double> frames;
    std::vector<double> times;
    // values[frame_index][time_index]
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> v;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct RunResult {
    Field final_field;
    ProbeSeries probes;
    std::vector<Snapshot> snapshots;
};

/// Advances with step(), recording probes at the cadence and snapshots at
/// the requested times. Asserts the domain guard
///   max(s, s_hat) T + initial support extent + 3 tau <= domain half-width
/// and that every probe position stays inside the grid. dt <= 0 picks
/// dt_max automatically.
RunResult run(const ValidatedModel& m, Field init, double T, const ProbeConfig& probes,
              double dt = 0.0);

struct EnvelopeResult {
    bool pass = false;
    double worst_margin = 0.0;  // min over samples of A e^{-lambda(x - c t)} - value
    double worst_t = 0.0;
    double worst_x = 0.0;
};

/// Verifies value(x, t) <= A e^{-lambda (x - c_frame t)} at all snapshot
/// nodes ahead of the frame (x >= c_frame t). Diagnostic only.
EnvelopeResult envelope_check(const std::vector<Snapshot>& history, const Grid1D& grid,
                              bool check_u, double lambda, double c_frame, double A);

enum class Verdict { Extinct, PreyOnlySaturated, Coexistence, Indeterminate };

const char* verdict_name(Verdict v);

struct ClassifyThresholds {
    double eps_ext = 1e-3;
    double eps_sat = 0.05;
    double eps_coex = 0.05;
    double band_eps = 0.1;       // frame offset from band edges
    double kappa_margin = 0.5;   // measured prey floor must exceed kappa * this
    double v_min = 1e-3;         // positive predator floor for the nonlocal test
};

struct BandVerdict {
    double c_lo = 0.0;
    double c_hi = 0.0;
    Verdict verdict = Verdict::Indeterminate;
    double u_level = 0.0;  // measured over the final window (min for floors, max for extinction)
    double v_level = 0.0;
    std::string note;
};

/// Per-band verdicts, measured on the final 20% time window of the probe
/// series. Band layout follows the regime split of the theorems; the
/// nonlocal gap (s_underline, s_hat) is reported as Indeterminate by
/// contract with measured levels attached.
struct OutcomeReport {
    std::vector<BandVerdict> bands;
    double kappa_floor = 0.0;  // 1 - a(b-1), the prey persistence floor
    CoexistenceState target{0.0, 0.0};
};

OutcomeReport classify_outcome(const ProbeSeries& series, const ValidatedModel& m,
                               const SpeedReport& speeds, const ClassifyThresholds& thr);

}  // namespace shiftwave
