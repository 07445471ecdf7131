#pragma once

#include <array>
#include <optional>
#include <vector>

#include "shiftwave/dispersion.hpp"
#include "shiftwave/grid.hpp"
#include "shiftwave/model.hpp"

namespace shiftwave {

/// Discrete dispersal operator on a uniform grid: kernel convolution minus
/// identity (nonlocal) or the centered second difference (local), both with
/// constant extension of the field beyond the grid edges.
///
/// The convolution resamples the kernel onto the grid spacing and
/// renormalizes the weights to sum exactly to 1, so that constants are
/// annihilated to machine precision.
class DispersalOp {
  public:
    static DispersalOp convolution(const Kernel& kernel, const Grid1D& grid);
    static DispersalOp second_difference(const Grid1D& grid);
    /// Picks convolution or second difference from the model's mode.
    static DispersalOp for_species(const ValidatedModel& m, const Grid1D& grid, bool prey);

    void apply(const std::vector<double>& w, std::vector<double>& out) const;

    /// Action on exponentials e^{lambda z}: M_h(lambda) - 1 for the
    /// convolution, (e^{lambda h} - 2 + e^{-lambda h})/h^2 for the local
    /// operator. This is the symbol the sandwich construction must use for
    /// the discrete inequalities to verify.
    double symbol(double lambda) const;

    bool nonlocal() const { return !weights_.empty(); }
    double tau() const { return tau_; }
    const Grid1D& grid() const { return grid_; }

  private:
    Grid1D grid_;
    double tau_ = 0.0;
    std::vector<double> weights_;  // empty => local second difference
};

/// Symbol of the first-order upwind derivative on e^{lambda z}.
inline double upwind_symbol(double lambda, double h) {
    return (1.0 - std::exp(-lambda * h)) / h;
}

/// Sampled wave profile pair on a z-grid; flipped convention, favorable
/// habitat at z -> -infinity.
struct ProfilePair {
    Grid1D grid;
    std::vector<double> phi;
    std::vector<double> psi;
};

struct SandwichParams {
    enum class Type { Front, MixedSuper, MixedCritical };
    Type type = Type::Front;
    // front
    double gamma1 = 0.0, gamma2 = 0.0;
    // mixed, supercritical (s > s_*)
    double lambda1 = 0.0, lambda2 = 0.0, mu0 = 0.0, mu = 0.0, eta = 0.0, k = 0.0;
    // mixed, critical (s = s_*)
    double lambda_star = 0.0, lambda_tilde = 0.0, L = 0.0, q = 0.0, Q = 0.0;
    // stitch points and the grid-level critical speed used for the mixed cases
    double z1 = 0.0, z2 = 0.0, z3 = 0.0;
    double s_crit_grid = 0.0;
};

struct Sandwich {
    ProfilePair upper;
    ProfilePair lower;
    SandwichParams params;
    std::vector<double> stitch_points;  // the finite exceptional set E
};

struct ScalarWaveResult {
    std::vector<double> w;
    bool converged = false;
    double residual = 0.0;  // last successive sup-difference
    int steps = 0;
};

/// Time-marches w_t = d N[w] - s w_z + r w [g(z) - w] (upwind first
/// derivative) from the constant clamp max(g(z_min), 0) until the successive
/// sup-difference drops below steady_tol. kernel == nullptr selects the
/// local operator. dt <= 0 picks the stability bound automatically.
/// Non-convergence within T is a soft failure carrying the last profile.
ScalarWaveResult scalar_forced_wave(double d, const Kernel* kernel, double r, double s,
                                    const std::vector<double>& g, const Grid1D& grid,
                                    double dt, double T, double steady_tol);

struct FrontSolveOptions {
    double dt = 0.0;          // 0 => auto
    double T = 0.0;           // 0 => auto from domain width and s
    double steady_tol = 1e-10;
};

/// Upper pair (1, b-1); lower pair from the two scalar forced waves with
/// rate profiles alpha(-z) - a(b-1) and -1 + b phi_lower. Requires b > 1 and
/// ab < 1. Scalar-solver failure propagates as NumericalError.
Sandwich build_sandwich_front(const ValidatedModel& m, double s, const Grid1D& grid,
                              const FrontSolveOptions& opt = {});

/// Minimal speed of the grid-level predator dispersion relation (upwind
/// derivative symbol in place of s*lambda). The mixed sandwich switches to
/// its critical-case construction inside a 1e-8 relative band around this
/// speed; it exceeds the continuum s_* by O(h).
double predator_grid_critical_speed(const ValidatedModel& m, const Grid1D& grid,
                                    double* lambda_star = nullptr);

/// Mixed front-pulse sandwich. Requires b > 1 and s >= s_* (the predator's
/// speed on saturated prey). Constants are chosen by ladder-and-verify
/// against the discrete inequalities; the dispersion roots entering the
/// profiles are roots of the grid symbol (upwind derivative + resampled
/// kernel) so that the discrete inequalities verify exactly where the
/// continuum argument says they should.
Sandwich build_sandwich_mixed(const ValidatedModel& m, double s, const Grid1D& grid);

struct SupersubReport {
    // worst signed slack of (u1), (u2), (l1), (l2); >= 0 means satisfied
    std::array<double, 4> worst_slack{};
    std::array<double, 4> worst_z{};
    bool pass = false;
};

/// Evaluates the four discrete differential inequalities at every node at
/// distance > 2h from the stitch set; passes iff all slacks >= -slack_tol.
SupersubReport check_supersub(const Sandwich& sw, const ValidatedModel& m, double s,
                              double slack_tol);

/// beta-shifted fixed-point operators. Discretized as the exact inverse of
/// the upwind-discretized (s d/dz + beta): P fixed points are exactly the
/// steady states of the upwind relaxation scheme, constants are reproduced
/// exactly, and the recurrence is monotone for beta above beta_floor.
/// Left boundary closure is constant extension, contributing F(z_min)/beta.
std::vector<double> apply_P1(const std::vector<double>& phi, const std::vector<double>& psi,
                             double beta, double s, const ValidatedModel& m, const Grid1D& grid);
std::vector<double> apply_P2(const std::vector<double>& phi, const std::vector<double>& psi,
                             double beta, double s, const ValidatedModel& m, const Grid1D& grid);

enum class TailTag { Front, MixedFrontPulse, Pulse, Trivial, Other };

enum class WaveMethod { Monotone, Relaxation };
enum class SolveStatus { Converged, QuasiSolution, NotConverged };

struct WaveSolution {
    ProfilePair pair;
    double residual = 0.0;
    TailTag tail = TailTag::Other;
    int iterations = 0;
    WaveMethod method = WaveMethod::Monotone;
    SolveStatus status = SolveStatus::NotConverged;
    double gap = 0.0;  // remaining sup|upper - lower| (monotone) or last step change (relaxation)
};

/// Coupled quasi-monotone iteration shrinking a verified sandwich with
/// beta = 1.1 beta_floor. Ordering is re-checked each sweep; a persistent
/// gap at maxiter is reported as a quasi-solution, not an error.
WaveSolution solve_wave_monotone(const Sandwich& sw, const ValidatedModel& m, double s,
                                 double tol, int maxiter);

/// Time-marches the coupled moving-frame system with upwind advection until
/// steady. Blow-up (leaving the invariant box by more than 1e-6) is an
/// internal error; running out of time is a soft failure.
WaveSolution solve_wave_relaxation(const ValidatedModel& m, double s, ProfilePair init,
                                   double dt, double T, double steady_tol);

/// Sup over interior nodes of both discretized wave-equation residuals
/// (upwind derivative, same operators as the relaxation scheme).
double residual_sup(const ProfilePair& pair, const ValidatedModel& m, double s);

/// Nodewise max of the two equation residuals (0 at the first node).
std::vector<double> residual_profile(const ProfilePair& pair, const ValidatedModel& m, double s);

/// Residual of the unflipped xi-form (forward difference, habitat at +xi);
/// used to verify reflection consistency.
double residual_sup_xi_form(const ProfilePair& pair_hat, const ValidatedModel& m, double s);

/// Averages the outer edge_fraction of nodes at each end and matches
/// against the known tail patterns (favorable limit at z -> -infinity).
TailTag classify_tails(const ProfilePair& pair, const ValidatedModel& m, double tail_tol,
                       double edge_fraction);

const char* tail_tag_name(TailTag t);

}  // namespace shiftwave
