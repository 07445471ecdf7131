#pragma once

#include <string>

#include "shiftwave/model.hpp"

namespace shiftwave {

/// A critical speed that may be undefined (its effective rate nonpositive).
struct SpeedValue {
    bool defined = false;
    double value = 0.0;
    double lambda_argmin = 0.0;  // 0 when undefined or when no argmin applies
    std::string reason;          // why undefined; empty otherwise
};

/// All critical speeds of the model.
///   s_star_prey  (s*)  : prey speed at alpha == 1, no predator
///   s_star_pred  (s_*) : predator speed on saturated prey
///   s_dstar_prey (s**) : prey speed under maximal predation, rate r1[1-a(b-1)]
///   s_dstar_pred (s_**): predator speed on minimal prey, rate r2(b-1)(1-ab)
///   s_underline        : min{s**, s_**}
///   s_hat              : min{s*, s_*}
struct SpeedReport {
    SpeedValue s_star_prey;
    SpeedValue s_star_pred;
    SpeedValue s_dstar_prey;
    SpeedValue s_dstar_pred;
    SpeedValue s_underline;
    SpeedValue s_hat;
};

struct LinearSpeedResult {
    double speed;
    double lambda_argmin;
};

/// inf over lambda > 0 of (d (M(lambda) - 1) + rate) / lambda, with the
/// minimizing lambda. Golden-section in log(lambda) after a 256-point
/// log-spaced pre-scan; falls back to a dense grid argmin if the pre-scan
/// looks non-unimodal. Throws UndefinedSpeedError for rate <= 0 and
/// NumericalError if the minimizer hits the overflow cap 700/tau.
LinearSpeedResult linear_speed(double d, const Kernel& kernel, double rate);

/// The objective c(lambda) itself; exposed for oracles and diagnostics.
double linear_speed_objective(double d, const Kernel& kernel, double rate, double lambda);

/// Local-diffusion closed form 2 sqrt(d rate).
double local_speed(double d, double rate);

/// Local-mode argmin sqrt(rate/d) of (d lambda^2 + rate)/lambda.
double local_speed_argmin(double d, double rate);

/// Dispatches to linear_speed or local_speed with the four effective rates;
/// speeds with nonpositive rates are marked undefined, never a hard failure.
SpeedReport speed_report(const ValidatedModel& model);

/// Delta(lambda, s) = d2 [M2(lambda) - 1] + r2 (b-1) - s lambda
/// (local mode: d2 lambda^2 in place of d2 [M2(lambda) - 1]). Requires b > 1.
double dispersion_delta(double lambda, double s, const ValidatedModel& model);

struct DeltaRoots {
    enum class Regime { TwoRoots, DoubleRoot, NoRoot };
    Regime regime = Regime::NoRoot;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda_star = 0.0;  // set in the double-root regime
};

/// Root structure of Delta(., s): two roots for s > s_*, a double root in
/// the band |s - s_*| <= 1e-8 s_*, none below. Bisection to 1e-10.
DeltaRoots delta_roots(double s, const ValidatedModel& model);

/// max{ d1 + r1 [-alpha(-inf) + 2 + a(b-1)], d2 + r2 (2b-1) }.
/// The fixed-point operators P1, P2 need beta strictly above this.
double beta_floor(const ValidatedModel& model);

}  // namespace shiftwave
