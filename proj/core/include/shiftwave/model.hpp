#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shiftwave/errors.hpp"

namespace shiftwave {

enum class DispersalMode { Nonlocal, Local };

/// The seven positive constants of the predator-prey system plus the
/// dispersal mode. d1,d2: diffusion; r1,r2: intrinsic rates; a: predation;
/// b: conversion; s: climate change speed.
struct ModelParams {
    double d1 = 1.0;
    double d2 = 1.0;
    double r1 = 1.0;
    double r2 = 1.0;
    double a = 0.5;
    double b = 2.0;
    double s = 1.0;
    DispersalMode mode = DispersalMode::Nonlocal;

    /// ab < 1: front-type waves and the depressed speeds s**, s_** exist.
    bool front_regime() const { return a * b < 1.0; }

    /// Throws ModelError on nonpositive parameters or b <= 1.
    void validate() const;
};

/// The unique constant coexistence state of the homogeneous system:
/// u* = (1+a)/(1+ab), v* = (b-1)/(1+ab). Requires b > 1.
struct CoexistenceState {
    double u_star;
    double v_star;
};

CoexistenceState coexistence_state(double a, double b);

/// Compactly supported, symmetric, normalized dispersal kernel sampled on
/// an equispaced grid over [-tau, tau]. Quadrature is composite trapezoid
/// on the native grid; for the built-in families this integrates the mass
/// to 1 up to roundoff.
class Kernel {
  public:
    enum class Family { RaisedCosine, Uniform, Table };

    static Kernel raised_cosine(double tau, int samples = 201);
    static Kernel uniform(double tau, int samples = 201);
    /// Table kernel: nodes must be symmetric about 0 and strictly increasing.
    /// Values are interpolated linearly between nodes and are 0 outside.
    static Kernel from_table(std::vector<double> nodes, std::vector<double> values);
    /// Two-column whitespace-separated text (y value), '#' comments.
    static Kernel from_file(const std::string& path);

    Family family() const { return family_; }
    double tau() const { return tau_; }
    int samples() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }

    /// Kernel value at arbitrary y (0 outside support). Built-in families
    /// evaluate their closed form; tables interpolate linearly.
    double value(double y) const;

    /// Trapezoid mass on the native grid; 1 within 1e-12 for a valid kernel.
    double quadrature_mass() const;

    /// M(lambda) = trapezoid of J(y) e^{lambda y} over [-tau, tau].
    /// Throws NumericalError when |lambda| * tau > 700 (overflow guard).
    double mgf(double lambda) const;

    /// Trapezoid of y^2 J(y); used by the narrow-kernel/local consistency check.
    double second_moment() const;

    /// (J1)/(J2): nonnegative, mass 1 within 1e-12, even within 1e-12.
    void validate() const;

  private:
    Kernel() = default;
    Family family_ = Family::Table;
    double tau_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> values_;
};

/// Nondecreasing climate profile alpha with alpha(-inf) < 0 < alpha(inf) = 1
/// for the canonical tanh family:
///     alpha(z) = 1 + (1 - alpha_minus)/2 * (tanh(gamma z) - 1),
/// which satisfies 1 - alpha(z) <= C e^{-rho z} for z >= 0 with
/// C = 1 - alpha_minus and rho = 2 gamma.
///
/// Table profiles interpolate linearly with constant extension and are only
/// required to be nondecreasing (this is how homogeneous alpha == 1 test
/// scenarios are expressed). Mixed-wave construction on a table profile
/// needs explicit approach constants C, rho.
class HabitatProfile {
  public:
    enum class Family { Tanh, Table };

    static HabitatProfile tanh_profile(double alpha_minus, double gamma);
    static HabitatProfile from_table(std::vector<double> z, std::vector<double> alpha);
    static HabitatProfile from_file(const std::string& path);
    /// Constant profile (a one-row table); handy for homogeneous scenarios.
    static HabitatProfile constant(double level);

    Family family() const { return family_; }
    double value(double z) const;
    /// Left limit: alpha_minus for tanh, first table value otherwise.
    double alpha_minus() const;
    /// Approach constants of the exponential tail bound.
    /// Throws ModelError for table profiles without user-set constants.
    double tail_C() const;
    double tail_rho() const;
    bool has_tail_constants() const;
    void set_tail_constants(double C, double rho);

    double gamma() const;  // tanh family steepness; throws for tables

    /// Nondecreasing (tables); alpha_minus < 0 and gamma > 0 (tanh).
    void validate() const;

  private:
    HabitatProfile() = default;
    Family family_ = Family::Tanh;
    double alpha_minus_ = -1.0;
    double gamma_ = 1.0;
    std::vector<double> z_;
    std::vector<double> a_;
    double C_ = 0.0;
    double rho_ = 0.0;
    bool has_tail_ = false;
};

/// Validated bundle consumed by every solver. Immutable after construction;
/// safe to share across concurrent readers.
struct ValidatedModel {
    ModelParams params;
    std::optional<Kernel> kernel_prey;      // J1; required in nonlocal mode
    std::optional<Kernel> kernel_predator;  // J2; required in nonlocal mode
    HabitatProfile habitat;
    CoexistenceState coexistence{0.0, 0.0};
    bool front_regime = false;
    std::vector<std::string> warnings;

    bool nonlocal() const { return params.mode == DispersalMode::Nonlocal; }
    double habitat_at(double z) const { return habitat.value(z); }
};

/// Re-checks every type invariant and derives the regime flags.
/// Kernels may be omitted in local mode only.
ValidatedModel validate_model(const ModelParams& params,
                              std::optional<Kernel> kernel_prey,
                              std::optional<Kernel> kernel_predator,
                              HabitatProfile habitat);

/// Reads a two-column (x value) whitespace-separated table with '#' comments.
void read_two_column_table(const std::string& path,
                           std::vector<double>& x,
                           std::vector<double>& y);

}  // namespace shiftwave
