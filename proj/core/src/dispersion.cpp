#include "shiftwave/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace shiftwave {

namespace {

constexpr double kLambdaFloor = 1e-6;
constexpr double kExpArgMax = 700.0;
constexpr int kPrescanPoints = 256;
constexpr double kDoubleRootBand = 1e-8;  // relative in s

double predator_rate(const ModelParams& p) { return p.r2 * (p.b - 1.0); }

// golden-section minimization of f on [lo, hi] (in the given coordinates)
template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 200) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double linear_speed_objective(double d, const Kernel& kernel, double rate, double lambda) {
    return (d * (kernel.mgf(lambda) - 1.0) + rate) / lambda;
}

LinearSpeedResult linear_speed(double d, const Kernel& kernel, double rate) {
    if (!(rate > 0.0)) {
        std::ostringstream os;
        os << "spreading speed undefined: effective rate " << rate << " is nonpositive";
        throw UndefinedSpeedError(rate, os.str());
    }
    if (!(d > 0.0)) throw ModelError("diffusion coefficient must be positive");

    const double lambda_max = kExpArgMax / kernel.tau();
    const double log_lo = std::log(kLambdaFloor);
    const double log_hi = std::log(lambda_max);

    auto obj_log = [&](double t) { return linear_speed_objective(d, kernel, rate, std::exp(t)); };

    // coarse log-spaced pre-scan; guards the unimodality assumption
    std::vector<double> ts(kPrescanPoints), cs(kPrescanPoints);
    int imin = 0;
    for (int i = 0; i < kPrescanPoints; ++i) {
        ts[i] = log_lo + (log_hi - log_lo) * static_cast<double>(i) / (kPrescanPoints - 1);
        cs[i] = obj_log(ts[i]);
        if (cs[i] < cs[imin]) imin = i;
    }
    if (imin == kPrescanPoints - 1) {
        throw NumericalError("linear_speed: minimizer at the overflow cap 700/tau; "
                             "this cannot happen for a valid kernel and positive rate");
    }

    // unimodality check: a single descent/ascent switch along the scan
    int switches = 0;
    bool descending = true;
    for (int i = 1; i < kPrescanPoints; ++i) {
        const bool down = cs[i] < cs[i - 1];
        if (down != descending) {
            ++switches;
            descending = down;
        }
    }

    double t_star;
    if (switches <= 1) {
        const int lo = std::max(0, imin - 1);
        const int hi = std::min(kPrescanPoints - 1, imin + 1);
        t_star = golden_min(obj_log, ts[lo], ts[hi]);
    } else {
        // fall back to a dense grid argmin, then polish locally
        const int fine = 20001;
        int jmin = 0;
        double best = std::numeric_limits<double>::infinity();
        double tj = 0.0;
        for (int j = 0; j < fine; ++j) {
            tj = log_lo + (log_hi - log_lo) * static_cast<double>(j) / (fine - 1);
            const double c = obj_log(tj);
            if (c < best) {
                best = c;
                jmin = j;
            }
        }
        const double dt = (log_hi - log_lo) / (fine - 1);
        t_star = golden_min(obj_log, log_lo + dt * std::max(0, jmin - 1),
                            log_lo + dt * std::min(fine - 1, jmin + 1));
    }

    const double lambda_star = std::exp(t_star);
    return LinearSpeedResult{linear_speed_objective(d, kernel, rate, lambda_star), lambda_star};
}

double local_speed(double d, double rate) {
    if (!(rate > 0.0)) {
        std::ostringstream os;
        os << "spreading speed undefined: effective rate " << rate << " is nonpositive";
        throw UndefinedSpeedError(rate, os.str());
    }
    if (!(d > 0.0)) throw ModelError("diffusion coefficient must be positive");
    return 2.0 * std::sqrt(d * rate);
}

double local_speed_argmin(double d, double rate) { return std::sqrt(rate / d); }

namespace {

SpeedValue compute_speed(const ValidatedModel& m, double d, const std::optional<Kernel>& kernel,
                         double rate) {
    SpeedValue sv;
    try {
        if (m.nonlocal()) {
            const LinearSpeedResult r = linear_speed(d, *kernel, rate);
            sv.defined = true;
            sv.value = r.speed;
            sv.lambda_argmin = r.lambda_argmin;
        } else {
            sv.defined = true;
            sv.value = local_speed(d, rate);
            sv.lambda_argmin = local_speed_argmin(d, rate);
        }
    } catch (const UndefinedSpeedError& e) {
        sv.defined = false;
        sv.reason = "rate nonpositive";
        sv.value = 0.0;
        sv.lambda_argmin = 0.0;
    }
    return sv;
}

SpeedValue min_speed(const SpeedValue& x, const SpeedValue& y, const char* undef_reason) {
    SpeedValue sv;
    if (!x.defined || !y.defined) {
        sv.defined = false;
        sv.reason = undef_reason;
        return sv;
    }
    sv.defined = true;
    if (x.value <= y.value) {
        sv.value = x.value;
        sv.lambda_argmin = x.lambda_argmin;
    } else {
        sv.value = y.value;
        sv.lambda_argmin = y.lambda_argmin;
    }
    return sv;
}

}  // namespace

SpeedReport speed_report(const ValidatedModel& m) {
    const ModelParams& p = m.params;
    SpeedReport rep;
    rep.s_star_prey = compute_speed(m, p.d1, m.kernel_prey, p.r1);
    rep.s_star_pred = compute_speed(m, p.d2, m.kernel_predator, predator_rate(p));
    rep.s_dstar_prey = compute_speed(m, p.d1, m.kernel_prey, p.r1 * (1.0 - p.a * (p.b - 1.0)));
    rep.s_dstar_pred =
        compute_speed(m, p.d2, m.kernel_predator, p.r2 * (p.b - 1.0) * (1.0 - p.a * p.b));
    rep.s_underline = min_speed(rep.s_dstar_prey, rep.s_dstar_pred,
                                "component speed undefined (needs b > 1 and ab < 1)");
    rep.s_hat = min_speed(rep.s_star_prey, rep.s_star_pred, "component speed undefined");
    return rep;
}

double dispersion_delta(double lambda, double s, const ValidatedModel& m) {
    const ModelParams& p = m.params;
    if (!(p.b > 1.0)) throw RegimeError("dispersion_delta requires b > 1");
    if (!(lambda >= 0.0)) throw ModelError("dispersion_delta requires lambda >= 0");
    const double disp = m.nonlocal() ? p.d2 * (m.kernel_predator->mgf(lambda) - 1.0)
                                     : p.d2 * lambda * lambda;
    return disp + predator_rate(p) - s * lambda;
}

DeltaRoots delta_roots(double s, const ValidatedModel& m) {
    const ModelParams& p = m.params;
    if (!(p.b > 1.0)) throw RegimeError("delta_roots requires b > 1");

    double s_crit, lambda_argmin;
    if (m.nonlocal()) {
        const LinearSpeedResult r = linear_speed(p.d2, *m.kernel_predator, predator_rate(p));
        s_crit = r.speed;
        lambda_argmin = r.lambda_argmin;
    } else {
        s_crit = local_speed(p.d2, predator_rate(p));
        lambda_argmin = local_speed_argmin(p.d2, predator_rate(p));
    }

    DeltaRoots out;
    if (std::abs(s - s_crit) <= kDoubleRootBand * s_crit) {
        out.regime = DeltaRoots::Regime::DoubleRoot;
        out.lambda_star = lambda_argmin;
        out.lambda1 = out.lambda2 = lambda_argmin;
        return out;
    }
    if (s < s_crit) {
        out.regime = DeltaRoots::Regime::NoRoot;
        return out;
    }

    auto delta = [&](double lam) { return dispersion_delta(lam, s, m); };

    // Delta(0) = r2(b-1) > 0 and Delta(lambda_argmin) = lambda_argmin (s_crit - s) < 0
    auto bisect = [&](double lo, double hi) {
        double flo = delta(lo);
        for (int i = 0; i < 200 && (hi - lo) > 1e-10; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = delta(mid);
            if ((flo > 0.0) == (fm > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    out.regime = DeltaRoots::Regime::TwoRoots;
    out.lambda1 = bisect(1e-9, lambda_argmin);

    // bracket the upper root by doubling
    double hi = lambda_argmin;
    const double cap = m.nonlocal() ? kExpArgMax / m.kernel_predator->tau()
                                    : std::max(1e6, 16.0 * lambda_argmin);
    while (delta(hi) < 0.0) {
        hi *= 2.0;
        if (hi > cap) throw NumericalError("delta_roots: failed to bracket the upper root");
    }
    out.lambda2 = bisect(lambda_argmin, hi);
    return out;
}

double beta_floor(const ValidatedModel& m) {
    const ModelParams& p = m.params;
    const double alpha_minus = m.habitat.alpha_minus();
    const double b1 = p.d1 + p.r1 * (-alpha_minus + 2.0 + p.a * (p.b - 1.0));
    const double b2 = p.d2 + p.r2 * (2.0 * p.b - 1.0);
    return std::max(b1, b2);
}

}  // namespace shiftwave
