#include "shiftwave/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace shiftwave {

namespace {

constexpr double kExpArgMax = 700.0;
constexpr double kCriticalBand = 1e-8;  // relative band around the grid critical speed
constexpr double kLadderSlackTol = 1e-9;
constexpr int kMaxDoublings = 41;

double sample_alpha_minus_z(const ValidatedModel& m, const Grid1D& g, std::vector<double>& out) {
    out.resize(g.n);
    double amax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n; ++j) {
        out[j] = m.habitat_at(-g.at(j));
        amax = std::max(amax, out[j]);
    }
    return amax;
}

// reaction Lipschitz bounds used by the explicit marches (cf. the Cauchy
// step-size contract)
double lambda1_bound(const ModelParams& p, double alpha_minus) {
    return std::abs(alpha_minus) + 2.0 + p.a * (p.b - 1.0);
}
double lambda2_bound(const ModelParams& p) { return 1.0 + p.b + (p.b - 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// DispersalOp

DispersalOp DispersalOp::convolution(const Kernel& kernel, const Grid1D& grid) {
    DispersalOp op;
    op.grid_ = grid;
    op.tau_ = kernel.tau();
    const int K = static_cast<int>(std::ceil(kernel.tau() / grid.h - 1e-12));
    if (K < 8) {
        std::ostringstream os;
        os << "grid spacing h=" << grid.h << " too coarse for kernel support tau=" << kernel.tau()
           << ": need h <= tau/8 so the convolution resolves the kernel";
        throw ModelError(os.str());
    }
    op.weights_.resize(2 * K + 1);
    double sum = 0.0;
    for (int k = -K; k <= K; ++k) {
        const double w = grid.h * kernel.value(static_cast<double>(k) * grid.h);
        op.weights_[static_cast<std::size_t>(k + K)] = w;
        sum += w;
    }
    if (!(sum > 0.0)) throw ModelError("kernel resampling produced zero mass");
    for (double& w : op.weights_) w /= sum;
    return op;
}

DispersalOp DispersalOp::second_difference(const Grid1D& grid) {
    DispersalOp op;
    op.grid_ = grid;
    op.tau_ = 0.0;
    return op;
}

DispersalOp DispersalOp::for_species(const ValidatedModel& m, const Grid1D& grid, bool prey) {
    if (m.nonlocal()) {
        return convolution(prey ? *m.kernel_prey : *m.kernel_predator, grid);
    }
    return second_difference(grid);
}

void DispersalOp::apply(const std::vector<double>& w, std::vector<double>& out) const {
    const int n = grid_.n;
    out.resize(static_cast<std::size_t>(n));
    if (weights_.empty()) {
        const double inv_h2 = 1.0 / (grid_.h * grid_.h);
        for (int j = 0; j < n; ++j) {
            const double wl = w[static_cast<std::size_t>(std::max(0, j - 1))];
            const double wr = w[static_cast<std::size_t>(std::min(n - 1, j + 1))];
            out[static_cast<std::size_t>(j)] = (wl - 2.0 * w[static_cast<std::size_t>(j)] + wr) * inv_h2;
        }
        return;
    }
    const int K = (static_cast<int>(weights_.size()) - 1) / 2;
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = -K; k <= K; ++k) {
            int i = j - k;
            if (i < 0) i = 0;
            if (i >= n) i = n - 1;
            acc += weights_[static_cast<std::size_t>(k + K)] * w[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(j)] = acc - w[static_cast<std::size_t>(j)];
    }
}

double DispersalOp::symbol(double lambda) const {
    const double h = grid_.h;
    if (weights_.empty()) {
        if (std::abs(lambda) * h > kExpArgMax) throw NumericalError("dispersal symbol overflow");
        return (std::exp(lambda * h) - 2.0 + std::exp(-lambda * h)) / (h * h);
    }
    const int K = (static_cast<int>(weights_.size()) - 1) / 2;
    if (std::abs(lambda) * static_cast<double>(K) * h > kExpArgMax) {
        throw NumericalError("dispersal symbol overflow: |lambda| * tau > 700");
    }
    double acc = 0.0;
    for (int k = -K; k <= K; ++k) {
        acc += weights_[static_cast<std::size_t>(k + K)] * std::exp(lambda * static_cast<double>(k) * h);
    }
    return acc - 1.0;
}

// ---------------------------------------------------------------------------
// grid-level dispersion quantities (upwind symbol in place of s*lambda)

namespace {

struct GridDispersion {
    const DispersalOp& op;
    double d;
    double rate;

    double delta(double lambda, double s) const {
        return d * op.symbol(lambda) + rate - s * upwind_symbol(lambda, op.grid().h);
    }
    double objective(double lambda) const {
        return (d * op.symbol(lambda) + rate) / upwind_symbol(lambda, op.grid().h);
    }
};

// min over lambda > 0 of the grid speed objective
double grid_critical_speed(const GridDispersion& gd, double* lambda_out) {
    const double h = gd.op.grid().h;
    const double cap = gd.op.nonlocal() ? kExpArgMax / std::max(gd.op.tau(), h) : kExpArgMax / h;
    const double tlo = std::log(1e-6), thi = std::log(cap * 0.999);
    int imin = 0;
    const int np = 512;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> ts(np);
    for (int i = 0; i < np; ++i) {
        ts[i] = tlo + (thi - tlo) * static_cast<double>(i) / (np - 1);
        const double c = gd.objective(std::exp(ts[i]));
        if (c < best) {
            best = c;
            imin = i;
        }
    }
    if (imin == np - 1) throw NumericalError("grid critical speed: minimizer at the overflow cap");
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = ts[std::max(0, imin - 1)], b = ts[std::min(np - 1, imin + 1)];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = gd.objective(std::exp(x1)), f2 = gd.objective(std::exp(x2));
    for (int i = 0; i < 200 && (b - a) > 1e-14; ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = gd.objective(std::exp(x1));
        } else {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = gd.objective(std::exp(x2));
        }
    }
    const double lam = std::exp(0.5 * (a + b));
    if (lambda_out) *lambda_out = lam;
    return gd.objective(lam);
}

// two positive roots of the grid Delta for s above the grid critical speed
void grid_delta_roots(const GridDispersion& gd, double s, double lambda_argmin, double& l1,
                      double& l2) {
    auto f = [&](double lam) { return gd.delta(lam, s); };
    auto bisect = [&](double lo, double hi) {
        double flo = f(lo);
        for (int i = 0; i < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((flo > 0.0) == (fm > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    l1 = bisect(1e-9, lambda_argmin);
    double hi = lambda_argmin;
    const double cap = gd.op.nonlocal() ? kExpArgMax / std::max(gd.op.tau(), gd.op.grid().h)
                                        : kExpArgMax / gd.op.grid().h;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > cap) throw NumericalError("grid delta roots: failed to bracket the upper root");
    }
    l2 = bisect(lambda_argmin, hi);
}

}  // namespace

double predator_grid_critical_speed(const ValidatedModel& m, const Grid1D& grid,
                                    double* lambda_star) {
    const DispersalOp op = DispersalOp::for_species(m, grid, /*prey=*/false);
    const GridDispersion gd{op, m.params.d2, m.params.r2 * (m.params.b - 1.0)};
    return grid_critical_speed(gd, lambda_star);
}

// ---------------------------------------------------------------------------
// scalar forced wave by relaxation

ScalarWaveResult scalar_forced_wave(double d, const Kernel* kernel, double r, double s,
                                    const std::vector<double>& g, const Grid1D& grid, double dt,
                                    double T, double steady_tol) {
    if (static_cast<int>(g.size()) != grid.n) throw ModelError("scalar_forced_wave: g size mismatch");
    if (!(s > 0.0)) throw ModelError("scalar_forced_wave requires s > 0");
    const DispersalOp op =
        kernel ? DispersalOp::convolution(*kernel, grid) : DispersalOp::second_difference(grid);

    double gmax = -std::numeric_limits<double>::infinity();
    double gabs = 0.0;
    for (double v : g) {
        gmax = std::max(gmax, v);
        gabs = std::max(gabs, std::abs(v));
    }
    const double w0 = std::max(g.front(), 0.0);
    const double wcap = std::max(w0, std::max(gmax, 0.0));
    if (dt <= 0.0) {
        const double lip = r * (gabs + 2.0 * wcap) + 2.0 * d + s / grid.h;
        dt = 0.9 / lip;
    }
    const int max_steps = static_cast<int>(std::ceil(T / dt));

    std::vector<double> w(static_cast<std::size_t>(grid.n), w0);
    std::vector<double> nw(w.size()), disp(w.size());
    ScalarWaveResult res;
    for (int step = 0; step < max_steps; ++step) {
        op.apply(w, disp);
        double diff = 0.0;
        for (int j = 0; j < grid.n; ++j) {
            const double wj = w[static_cast<std::size_t>(j)];
            const double wl = w[static_cast<std::size_t>(std::max(0, j - 1))];
            const double upd =
                dt * (d * disp[static_cast<std::size_t>(j)] - s * (wj - wl) / grid.h +
                      r * wj * (g[static_cast<std::size_t>(j)] - wj));
            nw[static_cast<std::size_t>(j)] = wj + upd;
            diff = std::max(diff, std::abs(upd));
        }
        w.swap(nw);
        res.steps = step + 1;
        res.residual = diff;
        if (!std::isfinite(diff)) throw NumericalError("scalar_forced_wave: non-finite update");
        if (diff < steady_tol) {
            res.converged = true;
            break;
        }
    }
    res.w = std::move(w);
    return res;
}

// ---------------------------------------------------------------------------
// front sandwich

Sandwich build_sandwich_front(const ValidatedModel& m, double s, const Grid1D& grid,
                              const FrontSolveOptions& opt) {
    const ModelParams& p = m.params;
    if (!(p.b > 1.0) || !(p.a * p.b < 1.0)) {
        throw RegimeError("front-type sandwich requires b > 1 and ab < 1");
    }
    const double gamma1 = 1.0 - p.a * (p.b - 1.0);
    const double gamma2 = (p.b - 1.0) * (1.0 - p.a * p.b);

    const double T = opt.T > 0.0 ? opt.T : std::max(600.0, 3.0 * grid.width() / std::max(s, 0.05));

    std::vector<double> g1(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) {
        g1[static_cast<std::size_t>(j)] = m.habitat_at(-grid.at(j)) - p.a * (p.b - 1.0);
    }
    const Kernel* j1 = m.nonlocal() ? &*m.kernel_prey : nullptr;
    ScalarWaveResult lo_phi =
        scalar_forced_wave(p.d1, j1, p.r1, s, g1, grid, opt.dt, T, opt.steady_tol);
    if (!lo_phi.converged) {
        throw NumericalError("front sandwich: scalar prey wave did not reach steady state");
    }

    std::vector<double> g2(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) {
        g2[static_cast<std::size_t>(j)] = -1.0 + p.b * lo_phi.w[static_cast<std::size_t>(j)];
    }
    const Kernel* j2 = m.nonlocal() ? &*m.kernel_predator : nullptr;
    ScalarWaveResult lo_psi =
        scalar_forced_wave(p.d2, j2, p.r2, s, g2, grid, opt.dt, T, opt.steady_tol);
    if (!lo_psi.converged) {
        throw NumericalError("front sandwich: scalar predator wave did not reach steady state");
    }

    Sandwich sw;
    sw.upper.grid = grid;
    sw.upper.phi.assign(static_cast<std::size_t>(grid.n), 1.0);
    sw.upper.psi.assign(static_cast<std::size_t>(grid.n), p.b - 1.0);
    sw.lower.grid = grid;
    sw.lower.phi = std::move(lo_phi.w);
    sw.lower.psi = std::move(lo_psi.w);
    sw.params.type = SandwichParams::Type::Front;
    sw.params.gamma1 = gamma1;
    sw.params.gamma2 = gamma2;
    return sw;
}

// ---------------------------------------------------------------------------
// mixed sandwich

namespace {

Sandwich assemble_mixed_case1(const ValidatedModel& m, const Grid1D& grid, double lambda1,
                              double lambda2, double mu, double eta, double k) {
    const double b = m.params.b;
    const double z1 = std::log(b - 1.0) / lambda1;
    const double z2 = -std::log(eta) / mu;
    const double z3 = -std::log(k) / mu;

    Sandwich sw;
    sw.upper.grid = sw.lower.grid = grid;
    sw.upper.phi.assign(static_cast<std::size_t>(grid.n), 1.0);
    sw.upper.psi.resize(static_cast<std::size_t>(grid.n));
    sw.lower.phi.resize(static_cast<std::size_t>(grid.n));
    sw.lower.psi.resize(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) {
        const double z = grid.at(j);
        sw.upper.psi[static_cast<std::size_t>(j)] =
            z >= z1 ? (b - 1.0) : std::exp(lambda1 * z);
        sw.lower.phi[static_cast<std::size_t>(j)] =
            z >= z2 ? 0.0 : 1.0 - eta * std::exp(mu * z);
        sw.lower.psi[static_cast<std::size_t>(j)] =
            z >= z3 ? 0.0
                    : std::exp(lambda1 * z) * (1.0 - k * std::exp(mu * z));
    }
    sw.params.type = SandwichParams::Type::MixedSuper;
    sw.params.lambda1 = lambda1;
    sw.params.lambda2 = lambda2;
    sw.params.mu = mu;
    sw.params.eta = eta;
    sw.params.k = k;
    sw.params.z1 = z1;
    sw.params.z2 = z2;
    sw.params.z3 = z3;
    sw.stitch_points = {z1, z2, z3};
    return sw;
}

Sandwich assemble_mixed_case2(const ValidatedModel& m, const Grid1D& grid, double lambda_star,
                              double lambda_tilde, double mu, double eta, double L, double q,
                              double z1) {
    const double b = m.params.b;
    const double z2 = -std::log(eta) / mu;
    const double z3 = -(q / L) * (q / L);

    Sandwich sw;
    sw.upper.grid = sw.lower.grid = grid;
    sw.upper.phi.assign(static_cast<std::size_t>(grid.n), 1.0);
    sw.upper.psi.resize(static_cast<std::size_t>(grid.n));
    sw.lower.phi.resize(static_cast<std::size_t>(grid.n));
    sw.lower.psi.resize(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) {
        const double z = grid.at(j);
        sw.upper.psi[static_cast<std::size_t>(j)] =
            z >= z1 ? (b - 1.0) : -L * z * std::exp(lambda_star * z);
        sw.lower.phi[static_cast<std::size_t>(j)] =
            z >= z2 ? 0.0 : 1.0 - eta * std::exp(mu * z);
        sw.lower.psi[static_cast<std::size_t>(j)] =
            z >= z3 ? 0.0 : (-L * z - q * std::sqrt(-z)) * std::exp(lambda_star * z);
    }
    sw.params.type = SandwichParams::Type::MixedCritical;
    sw.params.lambda_star = lambda_star;
    sw.params.lambda_tilde = lambda_tilde;
    sw.params.mu = mu;
    sw.params.eta = eta;
    sw.params.L = L;
    sw.params.q = q;
    sw.params.z1 = z1;
    sw.params.z2 = z2;
    sw.params.z3 = z3;
    sw.stitch_points = {z1, z2, z3};
    return sw;
}

bool inequalities_hold(const Sandwich& sw, const ValidatedModel& m, double s,
                       const std::array<bool, 4>& which) {
    const SupersubReport rep = check_supersub(sw, m, s, kLadderSlackTol);
    for (int i = 0; i < 4; ++i) {
        if (which[static_cast<std::size_t>(i)] && rep.worst_slack[static_cast<std::size_t>(i)] < -kLadderSlackTol) {
            return false;
        }
    }
    return true;
}

}  // namespace

Sandwich build_sandwich_mixed(const ValidatedModel& m, double s, const Grid1D& grid) {
    const ModelParams& p = m.params;
    if (!(p.b > 1.0)) throw RegimeError("mixed-type sandwich requires b > 1");

    // public (continuum) regime gate
    double s_star_pred;
    if (m.nonlocal()) {
        s_star_pred = linear_speed(p.d2, *m.kernel_predator, p.r2 * (p.b - 1.0)).speed;
    } else {
        s_star_pred = local_speed(p.d2, p.r2 * (p.b - 1.0));
    }
    if (s < s_star_pred * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "mixed-type sandwich requires s >= s_* = " << s_star_pred
           << ": below this speed the wave system does not have any positive solution "
              "with the mixed front-pulse tails";
        throw RegimeError(os.str());
    }

    const double rho = m.habitat.tail_rho();
    const double C = m.habitat.tail_C();
    (void)C;  // the ladder verification subsumes the explicit eta >= C bound

    const DispersalOp n1 = DispersalOp::for_species(m, grid, /*prey=*/true);
    const DispersalOp n2 = DispersalOp::for_species(m, grid, /*prey=*/false);
    const GridDispersion gd2{n2, p.d2, p.r2 * (p.b - 1.0)};

    double lambda_star_h = 0.0;
    const double s_crit_h = grid_critical_speed(gd2, &lambda_star_h);

    const bool critical = std::abs(s - s_crit_h) <= kCriticalBand * s_crit_h;
    if (!critical && s < s_crit_h) {
        std::ostringstream os;
        os << "grid too coarse for a near-critical mixed wave: requested s=" << s
           << " lies between the continuum minimal speed " << s_star_pred
           << " and the grid-level critical speed " << s_crit_h << "; refine h";
        throw NumericalError(os.str());
    }

    auto A_of = [&](double mu) {
        return p.d1 * n1.symbol(mu) - s * upwind_symbol(mu, grid.h);
    };

    if (!critical) {
        // Case 1: s above the critical speed
        double lambda1 = 0.0, lambda2 = 0.0;
        grid_delta_roots(gd2, s, lambda_star_h, lambda1, lambda2);

        if (grid.width() < 40.0 * std::max(1.0 / rho, 1.0 / lambda1)) {
            throw ModelError("wave grid too narrow: width must exceed 40 times the slowest "
                             "tail scale of the mixed sandwich");
        }

        const double mu0 = std::min({lambda2 - lambda1, lambda1, rho});
        double mu = 0.0;
        bool found = false;
        for (int j = 1; j <= 60; ++j) {
            mu = mu0 / std::pow(2.0, j);
            if (A_of(mu) < 0.0) {
                found = true;
                break;
            }
        }
        if (!found) throw NumericalError("mixed sandwich: no mu with A(mu) < 0 found");

        const double z1 = std::log(p.b - 1.0) / lambda1;
        double eta = std::max(2.0, 2.0 * std::exp(-mu * z1));
        for (int i = 0; i < kMaxDoublings; ++i) {
            const double mdelta = gd2.delta(lambda1 + mu, s);
            if (!(mdelta < 0.0)) throw NumericalError("mixed sandwich: Delta(lambda1+mu) >= 0");
            const double k = std::max(eta, p.r2 * (p.b * eta + 1.0) / (-mdelta));
            Sandwich sw = assemble_mixed_case1(m, grid, lambda1, lambda2, mu, eta, k);
            sw.params.mu0 = mu0;
            sw.params.s_crit_grid = s_crit_h;
            if (inequalities_hold(sw, m, s, {true, true, true, true})) return sw;
            eta *= 2.0;
        }
        throw NumericalError("mixed sandwich: constant ladder exhausted without verifying "
                             "the discrete inequalities");
    }

    // Case 2: s at the (grid) critical speed; double root lambda_star_h
    const double lam = lambda_star_h;
    if (grid.width() < 40.0 * std::max(1.0 / rho, 1.0 / lam)) {
        throw ModelError("wave grid too narrow: width must exceed 40 times the slowest "
                         "tail scale of the mixed sandwich");
    }

    // L >= (b-1) lambda* e, then enlarge until the two crossings of
    // Psi(z) = -L z e^{lambda* z} at level b-1 are more than tau apart
    const double tau2 = n2.nonlocal() ? n2.tau() : grid.h;
    double L = (p.b - 1.0) * lam * std::exp(1.0) * 1.01;
    double z1 = 0.0;
    for (int i = 0;; ++i) {
        if (i >= kMaxDoublings) throw NumericalError("mixed sandwich: L ladder exhausted");
        auto psi_of = [&](double z) { return -L * z * std::exp(lam * z); };
        // left crossing below the maximum at -1/lam
        double lo = -1.0 / lam;
        while (psi_of(lo) > p.b - 1.0) lo *= 2.0;
        double hi = -1.0 / lam;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (psi_of(mid) < p.b - 1.0) lo = mid; else hi = mid;
        }
        z1 = 0.5 * (lo + hi);
        // right crossing
        double rlo = -1.0 / lam, rhi = -1e-12;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (rlo + rhi);
            if (psi_of(mid) >= p.b - 1.0) rlo = mid; else rhi = mid;
        }
        const double z1_hat = 0.5 * (rlo + rhi);
        if (z1_hat - z1 > tau2) break;
        L *= 2.0;
    }

    const double mu_cap = std::min(rho, lam / 2.0);
    double mu = 0.0;
    bool found = false;
    for (int j = 1; j <= 60; ++j) {
        mu = mu_cap / std::pow(2.0, j);
        if (A_of(mu) < 0.0) {
            found = true;
            break;
        }
    }
    if (!found) throw NumericalError("mixed sandwich: no mu with A(mu) < 0 found");
    const double lambda_tilde = lam - 0.5 * mu;

    double eta = std::max(2.0, std::exp(2.0 * mu / (lam - lambda_tilde)));
    for (int i = 0; i < kMaxDoublings; ++i) {
        const double z2 = -std::log(eta) / mu;
        const bool cond1 = z2 < -1.0 / (lam - lambda_tilde);
        const bool cond2 = -L * z2 * std::exp((lam - lambda_tilde) * z2) < eta;
        if (cond1 && cond2) break;
        eta *= 2.0;
        if (i + 1 == kMaxDoublings) throw NumericalError("mixed sandwich: eta ladder exhausted");
    }

    // Q = max_z 8 (-z+tau)^{3/2} I2(z) / (d2 sum_k a_k y_k^2 e^{-lambda* y_k})
    double denom = 0.0;
    {
        // discrete second moment weighted by e^{-lambda* y}
        const double h = grid.h;
        const DispersalOp& op = n2;
        if (op.nonlocal()) {
            // reconstruct the weight count from the symbol support
            const int K = static_cast<int>(std::ceil(op.tau() / h - 1e-12));
            for (int k = -K; k <= K; ++k) {
                const double y = static_cast<double>(k) * h;
                const double w = h * m.kernel_predator->value(y);
                denom += w * y * y * std::exp(-lam * y);
            }
            denom *= p.d2;
        } else {
            denom = p.d2 * h * h * std::exp(lam * h);  // second-difference analogue
        }
    }
    if (!(denom > 0.0)) throw NumericalError("mixed sandwich: degenerate moment denominator");

    auto I2_of = [&](double z) {
        return p.r2 * p.b * eta * eta * std::exp((mu + lambda_tilde - lam) * z) +
               p.r2 * eta * eta * std::exp((2.0 * lambda_tilde - lam) * z);
    };
    double Q = 0.0;
    const double zmax_scan = std::max(200.0, 80.0 / mu);
    for (double z = -zmax_scan; z <= 0.0; z += grid.h) {
        Q = std::max(Q, 8.0 * std::pow(-z + tau2, 1.5) * I2_of(z) / denom);
    }

    double q = std::max(Q, L * std::sqrt(std::log(eta) / mu)) * 1.01;
    for (int i = 0; i < kMaxDoublings; ++i) {
        Sandwich sw = assemble_mixed_case2(m, grid, lam, lambda_tilde, mu, eta, L, q, z1);
        sw.params.Q = Q;
        sw.params.s_crit_grid = s_crit_h;
        double max_lower_psi = 0.0;
        for (double v : sw.lower.psi) max_lower_psi = std::max(max_lower_psi, v);
        if (!(max_lower_psi > 0.0)) {
            throw NumericalError("mixed sandwich: lower predator pulse vanished on this grid "
                                 "(z3 left of the domain); widen the grid");
        }
        if (inequalities_hold(sw, m, s, {true, true, true, true})) return sw;
        q *= 2.0;
    }
    throw NumericalError("mixed sandwich: q ladder exhausted without verifying the "
                         "discrete inequalities");
}

// ---------------------------------------------------------------------------
// discrete inequality check

SupersubReport check_supersub(const Sandwich& sw, const ValidatedModel& m, double s,
                              double slack_tol) {
    const Grid1D& g = sw.upper.grid;
    const ModelParams& p = m.params;
    const DispersalOp n1 = DispersalOp::for_species(m, g, true);
    const DispersalOp n2 = DispersalOp::for_species(m, g, false);

    std::vector<double> am;
    sample_alpha_minus_z(m, g, am);

    std::vector<double> d_up_phi, d_up_psi, d_lo_phi, d_lo_psi;
    n1.apply(sw.upper.phi, d_up_phi);
    n2.apply(sw.upper.psi, d_up_psi);
    n1.apply(sw.lower.phi, d_lo_phi);
    n2.apply(sw.lower.psi, d_lo_psi);

    SupersubReport rep;
    for (auto& w : rep.worst_slack) w = std::numeric_limits<double>::infinity();

    auto near_stitch = [&](double z) {
        for (double e : sw.stitch_points) {
            if (std::abs(z - e) <= 2.0 * g.h) return true;
        }
        return false;
    };

    for (int j = 1; j < g.n; ++j) {
        const double z = g.at(j);
        if (near_stitch(z)) continue;
        const std::size_t sj = static_cast<std::size_t>(j);
        const std::size_t sl = static_cast<std::size_t>(j - 1);

        const double up_phi = sw.upper.phi[sj], up_psi = sw.upper.psi[sj];
        const double lo_phi = sw.lower.phi[sj], lo_psi = sw.lower.psi[sj];

        const double du_phi = (up_phi - sw.upper.phi[sl]) / g.h;
        const double du_psi = (up_psi - sw.upper.psi[sl]) / g.h;
        const double dl_phi = (lo_phi - sw.lower.phi[sl]) / g.h;
        const double dl_psi = (lo_psi - sw.lower.psi[sl]) / g.h;

        const double slack_u1 =
            s * du_phi - (p.d1 * d_up_phi[sj] +
                          p.r1 * up_phi * (am[sj] - up_phi - p.a * lo_psi));
        const double slack_u2 =
            s * du_psi - (p.d2 * d_up_psi[sj] +
                          p.r2 * up_psi * (-1.0 + p.b * up_phi - up_psi));
        const double slack_l1 =
            (p.d1 * d_lo_phi[sj] + p.r1 * lo_phi * (am[sj] - lo_phi - p.a * up_psi)) -
            s * dl_phi;
        const double slack_l2 =
            (p.d2 * d_lo_psi[sj] + p.r2 * lo_psi * (-1.0 + p.b * lo_phi - lo_psi)) -
            s * dl_psi;

        const std::array<double, 4> slacks{slack_u1, slack_u2, slack_l1, slack_l2};
        for (std::size_t i = 0; i < 4; ++i) {
            if (slacks[i] < rep.worst_slack[i]) {
                rep.worst_slack[i] = slacks[i];
                rep.worst_z[i] = z;
            }
        }
    }
    rep.pass = true;
    for (double w : rep.worst_slack) {
        if (!(w >= -slack_tol)) rep.pass = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// beta-shifted fixed-point operators

namespace {

struct PEngine {
    const ValidatedModel& m;
    Grid1D grid;
    double beta;
    double s;
    DispersalOp n1;
    DispersalOp n2;
    std::vector<double> am;  // alpha(-z)
    mutable std::vector<double> disp;

    PEngine(const ValidatedModel& model, const Grid1D& g, double beta_, double s_)
        : m(model),
          grid(g),
          beta(beta_),
          s(s_),
          n1(DispersalOp::for_species(model, g, true)),
          n2(DispersalOp::for_species(model, g, false)) {
        sample_alpha_minus_z(model, g, am);
        if (!(s > 0.0)) throw ModelError("P operators require s > 0");
    }

    // solves s D^- P + beta P = F exactly (left-to-right recurrence)
    void solve(const std::vector<double>& F, std::vector<double>& out) const {
        const double c = s / grid.h;
        const double denom = beta + c;
        out.resize(F.size());
        out[0] = F[0] / beta;
        for (std::size_t j = 1; j < F.size(); ++j) {
            out[j] = (c * out[j - 1] + F[j]) / denom;
        }
    }

    void P1(const std::vector<double>& phi, const std::vector<double>& psi,
            std::vector<double>& out) const {
        const ModelParams& p = m.params;
        n1.apply(phi, disp);
        std::vector<double> F(phi.size());
        for (std::size_t j = 0; j < phi.size(); ++j) {
            F[j] = beta * phi[j] + p.d1 * disp[j] +
                   p.r1 * phi[j] * (am[j] - phi[j] - p.a * psi[j]);
        }
        solve(F, out);
    }

    void P2(const std::vector<double>& phi, const std::vector<double>& psi,
            std::vector<double>& out) const {
        const ModelParams& p = m.params;
        n2.apply(psi, disp);
        std::vector<double> F(psi.size());
        for (std::size_t j = 0; j < psi.size(); ++j) {
            F[j] = beta * psi[j] + p.d2 * disp[j] +
                   p.r2 * psi[j] * (-1.0 + p.b * phi[j] - psi[j]);
        }
        solve(F, out);
    }
};

void require_in_box(const std::vector<double>& w, double lo, double hi, const char* what) {
    for (double v : w) {
        if (!(v >= lo - 1e-12) || !(v <= hi + 1e-12)) {
            std::ostringstream os;
            os << what << " outside the invariant box [" << lo << ", " << hi << "]";
            throw ModelError(os.str());
        }
    }
}

}  // namespace

std::vector<double> apply_P1(const std::vector<double>& phi, const std::vector<double>& psi,
                             double beta, double s, const ValidatedModel& m, const Grid1D& grid) {
    if (!(beta > beta_floor(m))) {
        throw ModelError("beta must exceed beta_floor(model): the P recurrence is only "
                         "monotone above the floor");
    }
    require_in_box(phi, 0.0, 1.0, "phi");
    require_in_box(psi, 0.0, m.params.b - 1.0, "psi");
    PEngine eng(m, grid, beta, s);
    std::vector<double> out;
    eng.P1(phi, psi, out);
    return out;
}

std::vector<double> apply_P2(const std::vector<double>& phi, const std::vector<double>& psi,
                             double beta, double s, const ValidatedModel& m, const Grid1D& grid) {
    if (!(beta > beta_floor(m))) {
        throw ModelError("beta must exceed beta_floor(model): the P recurrence is only "
                         "monotone above the floor");
    }
    require_in_box(phi, 0.0, 1.0, "phi");
    require_in_box(psi, 0.0, m.params.b - 1.0, "psi");
    PEngine eng(m, grid, beta, s);
    std::vector<double> out;
    eng.P2(phi, psi, out);
    return out;
}

// ---------------------------------------------------------------------------
// monotone solver

WaveSolution solve_wave_monotone(const Sandwich& sw, const ValidatedModel& m, double s,
                                 double tol, int maxiter) {
    const Grid1D& g = sw.upper.grid;
    const double beta = 1.1 * beta_floor(m);
    PEngine eng(m, g, beta, s);

    std::vector<double> up_phi = sw.upper.phi, up_psi = sw.upper.psi;
    std::vector<double> lo_phi = sw.lower.phi, lo_psi = sw.lower.psi;
    std::vector<double> tmp, psi_up_prev;

    const double order_tol = 10.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, m.params.b - 1.0);

    auto check_order = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                           const char* what) {
        for (std::size_t j = 0; j < lo.size(); ++j) {
            if (lo[j] > hi[j] + order_tol) {
                std::ostringstream os;
                os << "monotone iteration lost the sandwich ordering (" << what << " at z="
                   << g.at(static_cast<int>(j)) << "); beta too small or grid too coarse";
                throw NumericalError(os.str());
            }
        }
    };

    WaveSolution sol;
    sol.method = WaveMethod::Monotone;
    double gap = std::numeric_limits<double>::infinity();

    int it = 0;
    for (; it < maxiter; ++it) {
        psi_up_prev = up_psi;

        eng.P1(up_phi, lo_psi, tmp);
        up_phi.swap(tmp);
        eng.P2(up_phi, up_psi, tmp);
        up_psi.swap(tmp);
        eng.P1(lo_phi, psi_up_prev, tmp);
        lo_phi.swap(tmp);
        eng.P2(lo_phi, lo_psi, tmp);
        lo_psi.swap(tmp);

        check_order(lo_phi, up_phi, "phi");
        check_order(lo_psi, up_psi, "psi");

        gap = 0.0;
        for (std::size_t j = 0; j < up_phi.size(); ++j) {
            gap = std::max(gap, up_phi[j] - lo_phi[j]);
            gap = std::max(gap, up_psi[j] - lo_psi[j]);
        }
        if (gap < tol) {
            ++it;
            break;
        }
    }

    sol.iterations = it;
    sol.gap = gap;
    sol.status = gap < tol ? SolveStatus::Converged : SolveStatus::QuasiSolution;
    sol.pair.grid = g;
    sol.pair.phi.resize(up_phi.size());
    sol.pair.psi.resize(up_psi.size());
    for (std::size_t j = 0; j < up_phi.size(); ++j) {
        sol.pair.phi[j] = 0.5 * (up_phi[j] + lo_phi[j]);
        sol.pair.psi[j] = 0.5 * (up_psi[j] + lo_psi[j]);
    }
    sol.residual = residual_sup(sol.pair, m, s);
    sol.tail = classify_tails(sol.pair, m, 1e-2, 0.05);
    return sol;
}

// ---------------------------------------------------------------------------
// relaxation solver

WaveSolution solve_wave_relaxation(const ValidatedModel& m, double s, ProfilePair init,
                                   double dt, double T, double steady_tol) {
    const Grid1D g = init.grid;
    const ModelParams& p = m.params;
    const DispersalOp n1 = DispersalOp::for_species(m, g, true);
    const DispersalOp n2 = DispersalOp::for_species(m, g, false);

    std::vector<double> am;
    sample_alpha_minus_z(m, g, am);
    const double alpha_minus = m.habitat.alpha_minus();

    if (dt <= 0.0) {
        const double l1 = 2.0 * p.d1 + s / g.h + p.r1 * lambda1_bound(p, alpha_minus);
        const double l2 = 2.0 * p.d2 + s / g.h + p.r2 * lambda2_bound(p);
        dt = 0.9 / std::max(l1, l2);
    }
    const long max_steps = static_cast<long>(std::ceil(T / dt));

    std::vector<double>&phi = init.phi, &psi = init.psi;
    std::vector<double> nphi(phi.size()), npsi(psi.size()), d1v(phi.size()), d2v(psi.size());

    const double box_tol = 1e-6;
    WaveSolution sol;
    sol.method = WaveMethod::Relaxation;

    double diff = std::numeric_limits<double>::infinity();
    long step = 0;
    for (; step < max_steps; ++step) {
        n1.apply(phi, d1v);
        n2.apply(psi, d2v);
        diff = 0.0;
        for (int j = 0; j < g.n; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            const std::size_t sl = static_cast<std::size_t>(std::max(0, j - 1));
            const double ph = phi[sj], ps = psi[sj];
            const double du = dt * (p.d1 * d1v[sj] - s * (ph - phi[sl]) / g.h +
                                    p.r1 * ph * (am[sj] - ph - p.a * ps));
            const double dv = dt * (p.d2 * d2v[sj] - s * (ps - psi[sl]) / g.h +
                                    p.r2 * ps * (-1.0 + p.b * ph - ps));
            nphi[sj] = ph + du;
            npsi[sj] = ps + dv;
            diff = std::max(diff, std::max(std::abs(du), std::abs(dv)));
        }
        phi.swap(nphi);
        psi.swap(npsi);
        if (!std::isfinite(diff)) throw NumericalError("wave relaxation: non-finite update");
        if (diff < steady_tol) {
            ++step;
            break;
        }
        if ((step & 1023) == 0) {
            for (int j = 0; j < g.n; ++j) {
                const std::size_t sj = static_cast<std::size_t>(j);
                if (phi[sj] < -box_tol || phi[sj] > 1.0 + box_tol || psi[sj] < -box_tol ||
                    psi[sj] > p.b - 1.0 + box_tol) {
                    throw NumericalError("wave relaxation left the invariant box (blow-up guard)");
                }
            }
        }
    }

    sol.iterations = static_cast<int>(std::min<long>(step, std::numeric_limits<int>::max()));
    sol.gap = diff;
    sol.status = diff < steady_tol ? SolveStatus::Converged : SolveStatus::NotConverged;
    sol.pair = std::move(init);
    sol.residual = residual_sup(sol.pair, m, s);
    sol.tail = classify_tails(sol.pair, m, 1e-2, 0.05);
    return sol;
}

// ---------------------------------------------------------------------------
// residuals and tails

std::vector<double> residual_profile(const ProfilePair& pair, const ValidatedModel& m, double s) {
    const Grid1D& g = pair.grid;
    const ModelParams& p = m.params;
    const DispersalOp n1 = DispersalOp::for_species(m, g, true);
    const DispersalOp n2 = DispersalOp::for_species(m, g, false);
    std::vector<double> am, d1v, d2v;
    sample_alpha_minus_z(m, g, am);
    n1.apply(pair.phi, d1v);
    n2.apply(pair.psi, d2v);

    std::vector<double> res(static_cast<std::size_t>(g.n), 0.0);
    for (int j = 1; j < g.n; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        const std::size_t sl = static_cast<std::size_t>(j - 1);
        const double ph = pair.phi[sj], ps = pair.psi[sj];
        const double r1v = s * (ph - pair.phi[sl]) / g.h -
                           (p.d1 * d1v[sj] + p.r1 * ph * (am[sj] - ph - p.a * ps));
        const double r2v = s * (ps - pair.psi[sl]) / g.h -
                           (p.d2 * d2v[sj] + p.r2 * ps * (-1.0 + p.b * ph - ps));
        res[sj] = std::max(std::abs(r1v), std::abs(r2v));
    }
    return res;
}

double residual_sup(const ProfilePair& pair, const ValidatedModel& m, double s) {
    const std::vector<double> res = residual_profile(pair, m, s);
    double worst = 0.0;
    for (double r : res) worst = std::max(worst, r);
    return worst;
}

double residual_sup_xi_form(const ProfilePair& pair_hat, const ValidatedModel& m, double s) {
    const Grid1D& g = pair_hat.grid;
    const ModelParams& p = m.params;
    const DispersalOp n1 = DispersalOp::for_species(m, g, true);
    const DispersalOp n2 = DispersalOp::for_species(m, g, false);
    std::vector<double> d1v, d2v;
    n1.apply(pair_hat.phi, d1v);
    n2.apply(pair_hat.psi, d2v);

    double worst = 0.0;
    for (int j = 0; j + 1 < g.n; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        const std::size_t sr = static_cast<std::size_t>(j + 1);
        const double xi = g.at(j);
        const double ph = pair_hat.phi[sj], ps = pair_hat.psi[sj];
        const double alpha = m.habitat_at(xi);
        const double r1v = -s * (pair_hat.phi[sr] - ph) / g.h -
                           (p.d1 * d1v[sj] + p.r1 * ph * (alpha - ph - p.a * ps));
        const double r2v = -s * (pair_hat.psi[sr] - ps) / g.h -
                           (p.d2 * d2v[sj] + p.r2 * ps * (-1.0 + p.b * ph - ps));
        worst = std::max(worst, std::max(std::abs(r1v), std::abs(r2v)));
    }
    return worst;
}

TailTag classify_tails(const ProfilePair& pair, const ValidatedModel& m, double tail_tol,
                       double edge_fraction) {
    const int n = pair.grid.n;
    const int ne = std::max(1, static_cast<int>(edge_fraction * static_cast<double>(n)));
    auto avg = [&](const std::vector<double>& w, bool left) {
        double acc = 0.0;
        for (int i = 0; i < ne; ++i) {
            acc += w[static_cast<std::size_t>(left ? i : n - 1 - i)];
        }
        return acc / static_cast<double>(ne);
    };
    const double phi_l = avg(pair.phi, true), phi_r = avg(pair.phi, false);
    const double psi_l = avg(pair.psi, true), psi_r = avg(pair.psi, false);

    double all_max = 0.0, phi_max = 0.0;
    for (int j = 0; j < n; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        all_max = std::max(all_max, std::max(std::abs(pair.phi[sj]), std::abs(pair.psi[sj])));
        phi_max = std::max(phi_max, pair.phi[sj]);
    }
    if (all_max <= tail_tol) return TailTag::Trivial;

    const CoexistenceState cs = m.coexistence;
    const bool right_zero = std::abs(phi_r) <= tail_tol && std::abs(psi_r) <= tail_tol;
    if (right_zero && std::abs(phi_l - cs.u_star) <= tail_tol &&
        std::abs(psi_l - cs.v_star) <= tail_tol) {
        return TailTag::Front;
    }
    if (right_zero && std::abs(phi_l - 1.0) <= tail_tol && std::abs(psi_l) <= tail_tol) {
        return TailTag::MixedFrontPulse;
    }
    if (right_zero && std::abs(phi_l) <= tail_tol && std::abs(psi_l) <= tail_tol &&
        phi_max > tail_tol) {
        return TailTag::Pulse;
    }
    return TailTag::Other;
}

const char* tail_tag_name(TailTag t) {
    switch (t) {
        case TailTag::Front: return "Front";
        case TailTag::MixedFrontPulse: return "MixedFrontPulse";
        case TailTag::Pulse: return "Pulse";
        case TailTag::Trivial: return "Trivial";
        case TailTag::Other: return "Other";
    }
    return "Other";
}

}  // namespace shiftwave
