#include "shiftwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace shiftwave {

namespace {
constexpr double kMassTol = 1e-12;
constexpr double kSymTol = 1e-12;
constexpr double kExpArgMax = 700.0;
}  // namespace

void ModelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ModelError(std::string("parameter ") + name + " must be strictly positive");
        }
    };
    positive(d1, "d1");
    positive(d2, "d2");
    positive(r1, "r1");
    positive(r2, "r2");
    positive(a, "a");
    positive(b, "b");
    positive(s, "s");
    if (!(b > 1.0)) {
        throw ModelError("b must exceed 1: the predator has negative intrinsic growth and "
                         "only persists on saturated prey when b > 1");
    }
}

CoexistenceState coexistence_state(double a, double b) {
    if (!(b > 1.0)) {
        throw ModelError("coexistence state undefined for b <= 1 (v* would be nonpositive)");
    }
    if (!(a > 0.0)) throw ModelError("coexistence state needs a > 0");
    const double denom = 1.0 + a * b;
    return CoexistenceState{(1.0 + a) / denom, (b - 1.0) / denom};
}

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::raised_cosine(double tau, int samples) {
    if (!(tau > 0.0)) throw ModelError("kernel support radius tau must be positive");
    if (samples < 9) throw ModelError("kernel needs at least 9 samples");
    Kernel k;
    k.family_ = Family::RaisedCosine;
    k.tau_ = tau;
    k.nodes_.resize(samples);
    k.values_.resize(samples);
    const double h = 2.0 * tau / static_cast<double>(samples - 1);
    for (int i = 0; i < samples; ++i) {
        const double y = -tau + h * static_cast<double>(i);
        k.nodes_[i] = y;
        k.values_[i] = (1.0 + std::cos(std::numbers::pi * y / tau)) / (2.0 * tau);
    }
    // support edges are exact zeros of the family
    k.values_.front() = 0.0;
    k.values_.back() = 0.0;
    return k;
}

Kernel Kernel::uniform(double tau, int samples) {
    if (!(tau > 0.0)) throw ModelError("kernel support radius tau must be positive");
    if (samples < 9) throw ModelError("kernel needs at least 9 samples");
    Kernel k;
    k.family_ = Family::Uniform;
    k.tau_ = tau;
    k.nodes_.resize(samples);
    k.values_.assign(samples, 1.0 / (2.0 * tau));
    const double h = 2.0 * tau / static_cast<double>(samples - 1);
    for (int i = 0; i < samples; ++i) k.nodes_[i] = -tau + h * static_cast<double>(i);
    return k;
}

Kernel Kernel::from_table(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() != values.size()) throw ModelError("kernel table: column size mismatch");
    if (nodes.size() < 9) throw ModelError("kernel table needs at least 9 rows");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw ModelError("kernel table nodes must be strictly increasing");
    }
    Kernel k;
    k.family_ = Family::Table;
    k.tau_ = std::max(std::abs(nodes.front()), std::abs(nodes.back()));
    k.nodes_ = std::move(nodes);
    k.values_ = std::move(values);
    return k;
}

Kernel Kernel::from_file(const std::string& path) {
    std::vector<double> y, v;
    read_two_column_table(path, y, v);
    return from_table(std::move(y), std::move(v));
}

double Kernel::value(double y) const {
    switch (family_) {
        case Family::RaisedCosine:
            if (std::abs(y) >= tau_) return 0.0;
            return (1.0 + std::cos(std::numbers::pi * y / tau_)) / (2.0 * tau_);
        case Family::Uniform:
            if (std::abs(y) > tau_) return 0.0;
            return 1.0 / (2.0 * tau_);
        case Family::Table: {
            if (y <= nodes_.front() || y >= nodes_.back()) {
                // exact endpoints still count as support
                if (y == nodes_.front()) return values_.front();
                if (y == nodes_.back()) return values_.back();
                return 0.0;
            }
            auto it = std::upper_bound(nodes_.begin(), nodes_.end(), y);
            const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
            const double t = (y - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
            return values_[i - 1] + t * (values_[i] - values_[i - 1]);
        }
    }
    return 0.0;
}

double Kernel::quadrature_mass() const {
    double m = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        m += 0.5 * (values_[i] + values_[i - 1]) * (nodes_[i] - nodes_[i - 1]);
    }
    return m;
}

double Kernel::mgf(double lambda) const {
    if (std::abs(lambda) * tau_ > kExpArgMax) {
        throw NumericalError("kernel_mgf overflow: |lambda| * tau > 700");
    }
    double m = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double fa = values_[i - 1] * std::exp(lambda * nodes_[i - 1]);
        const double fb = values_[i] * std::exp(lambda * nodes_[i]);
        m += 0.5 * (fa + fb) * (nodes_[i] - nodes_[i - 1]);
    }
    return m;
}

double Kernel::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double fa = values_[i - 1] * nodes_[i - 1] * nodes_[i - 1];
        const double fb = values_[i] * nodes_[i] * nodes_[i];
        m += 0.5 * (fa + fb) * (nodes_[i] - nodes_[i - 1]);
    }
    return m;
}

void Kernel::validate() const {
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError("kernel must be nonnegative (J1)");
    }
    const double mass = quadrature_mass();
    if (std::abs(mass - 1.0) > kMassTol) {
        std::ostringstream os;
        os << "kernel normalization error (J2): quadrature mass is " << mass << ", expected 1";
        throw ModelError(os.str());
    }
    // even symmetry at paired nodes
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        if (std::abs(nodes_[i] + nodes_[n - 1 - i]) > kSymTol * std::max(1.0, tau_) ||
            std::abs(values_[i] - values_[n - 1 - i]) > kSymTol) {
            throw ModelError("kernel symmetry error (J2): value(y) != value(-y)");
        }
    }
}

// ---------------------------------------------------------------------------
// HabitatProfile

HabitatProfile HabitatProfile::tanh_profile(double alpha_minus, double gamma) {
    if (!(alpha_minus < 0.0)) throw ModelError("habitat left limit alpha(-inf) must be negative");
    if (!(gamma > 0.0)) throw ModelError("habitat steepness gamma must be positive");
    HabitatProfile p;
    p.family_ = Family::Tanh;
    p.alpha_minus_ = alpha_minus;
    p.gamma_ = gamma;
    p.C_ = 1.0 - alpha_minus;
    p.rho_ = 2.0 * gamma;
    p.has_tail_ = true;
    return p;
}

HabitatProfile HabitatProfile::from_table(std::vector<double> z, std::vector<double> alpha) {
    if (z.size() != alpha.size()) throw ModelError("habitat table: column size mismatch");
    if (z.empty()) throw ModelError("habitat table is empty");
    for (std::size_t i = 1; i < z.size(); ++i) {
        if (!(z[i] > z[i - 1])) throw ModelError("habitat table nodes must be strictly increasing");
    }
    HabitatProfile p;
    p.family_ = Family::Table;
    p.z_ = std::move(z);
    p.a_ = std::move(alpha);
    p.validate();
    return p;
}

HabitatProfile HabitatProfile::from_file(const std::string& path) {
    std::vector<double> z, a;
    read_two_column_table(path, z, a);
    return from_table(std::move(z), std::move(a));
}

HabitatProfile HabitatProfile::constant(double level) {
    HabitatProfile p;
    p.family_ = Family::Table;
    p.z_ = {0.0, 1.0};
    p.a_ = {level, level};
    return p;
}

double HabitatProfile::value(double z) const {
    if (family_ == Family::Tanh) {
        return 1.0 + 0.5 * (1.0 - alpha_minus_) * (std::tanh(gamma_ * z) - 1.0);
    }
    if (z <= z_.front()) return a_.front();
    if (z >= z_.back()) return a_.back();
    auto it = std::upper_bound(z_.begin(), z_.end(), z);
    const std::size_t i = static_cast<std::size_t>(it - z_.begin());
    const double t = (z - z_[i - 1]) / (z_[i] - z_[i - 1]);
    return a_[i - 1] + t * (a_[i] - a_[i - 1]);
}

double HabitatProfile::alpha_minus() const {
    return family_ == Family::Tanh ? alpha_minus_ : a_.front();
}

bool HabitatProfile::has_tail_constants() const { return has_tail_; }

double HabitatProfile::tail_C() const {
    if (!has_tail_) {
        throw ModelError("habitat tail constants (C, rho) are not set; table profiles need "
                         "them for mixed-type wave construction");
    }
    return C_;
}

double HabitatProfile::tail_rho() const {
    if (!has_tail_) {
        throw ModelError("habitat tail constants (C, rho) are not set; table profiles need "
                         "them for mixed-type wave construction");
    }
    return rho_;
}

void HabitatProfile::set_tail_constants(double C, double rho) {
    if (!(C > 0.0) || !(rho > 0.0)) throw ModelError("habitat tail constants must be positive");
    C_ = C;
    rho_ = rho;
    has_tail_ = true;
}

double HabitatProfile::gamma() const {
    if (family_ != Family::Tanh) throw ModelError("gamma is only defined for the tanh family");
    return gamma_;
}

void HabitatProfile::validate() const {
    if (family_ == Family::Tanh) {
        if (!(alpha_minus_ < 0.0)) throw ModelError("habitat left limit alpha(-inf) must be negative");
        if (!(gamma_ > 0.0)) throw ModelError("habitat steepness gamma must be positive");
        return;
    }
    for (std::size_t i = 1; i < a_.size(); ++i) {
        if (a_[i] < a_[i - 1]) {
            std::ostringstream os;
            os << "habitat table must be nondecreasing (alpha1); violated between z=" << z_[i - 1]
               << " and z=" << z_[i];
            throw ModelError(os.str());
        }
    }
}

// ---------------------------------------------------------------------------

ValidatedModel validate_model(const ModelParams& params,
                              std::optional<Kernel> kernel_prey,
                              std::optional<Kernel> kernel_predator,
                              HabitatProfile habitat) {
    params.validate();
    habitat.validate();

    ValidatedModel m;
    m.params = params;
    m.habitat = std::move(habitat);
    m.coexistence = coexistence_state(params.a, params.b);
    m.front_regime = params.front_regime();

    if (params.mode == DispersalMode::Nonlocal) {
        if (!kernel_prey || !kernel_predator) {
            throw ModelError("nonlocal mode requires both dispersal kernels");
        }
        kernel_prey->validate();
        kernel_predator->validate();
        if (kernel_prey->family() == Kernel::Family::Uniform ||
            kernel_predator->family() == Kernel::Family::Uniform) {
            m.warnings.push_back("uniform kernel is test-only: it is discontinuous at the "
                                 "support edge and violates (J1) continuity");
        }
        m.kernel_prey = std::move(kernel_prey);
        m.kernel_predator = std::move(kernel_predator);
    } else {
        // kernels, if given, are carried along but unused by local operators
        if (kernel_prey) kernel_prey->validate();
        if (kernel_predator) kernel_predator->validate();
        m.kernel_prey = std::move(kernel_prey);
        m.kernel_predator = std::move(kernel_predator);
    }
    return m;
}

void read_two_column_table(const std::string& path, std::vector<double>& x, std::vector<double>& y) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table file: " + path);
    x.clear();
    y.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        double a, b;
        if (!(is >> a)) continue;  // blank or comment-only line
        if (!(is >> b)) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected two numeric columns";
            throw ConfigError(os.str());
        }
        double extra;
        if (is >> extra) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected exactly two columns";
            throw ConfigError(os.str());
        }
        x.push_back(a);
        y.push_back(b);
    }
    if (x.empty()) throw ConfigError("table file has no data rows: " + path);
}

}  // namespace shiftwave
