#pragma once

#include <optional>
#include <string>
#include <vector>

// Comparison-function kernels, time weight profiles, and coefficient bound
// collections. A kernel rho is nondecreasing with rho(0) = 0; the stability
// machinery additionally relies on the Osgood divergence of int dr/rho(r)
// near 0, which validate_osgood probes numerically.

namespace gstab {

enum class KernelFamily { Linear, LogLipschitz, Power, Custom };

std::string to_string(KernelFamily f);

/// Single-family kernel.
///  Linear:        rho(r) = L r
///  LogLipschitz:  rho(r) = L r log(e/r) on (0, 1], extended linearly with
///                 slope rho(1) = L for r > 1 (keeps rho nondecreasing)
///  Power:         rho(r) = L r^alpha, alpha > 1
///  Custom:        monotone piecewise-linear interpolation through samples,
///                 anchored at (0, 0), extended with the last segment slope
class OsgoodKernel {
public:
    static OsgoodKernel linear(double L);
    static OsgoodKernel log_lipschitz(double L);
    static OsgoodKernel power(double L, double alpha);
    static OsgoodKernel custom(std::vector<double> r_samples,
                               std::vector<double> rho_samples);

    KernelFamily family() const { return family_; }
    double L() const { return L_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& sample_r() const { return r_; }
    const std::vector<double>& sample_rho() const { return rho_; }

    double operator()(double r) const;

    /// Interior points where the definition changes branch (quadrature and
    /// the ODE route split integration there).
    std::vector<double> breakpoints() const;

    /// Concavity as reported to certificates: analytic for the built-in
    /// families (LogLipschitz on (0,1]), chord-slope spot check for Custom.
    bool concave_flag() const;

private:
    OsgoodKernel() = default;
    KernelFamily family_ = KernelFamily::Linear;
    double L_ = 1.0;
    double alpha_ = 2.0;
    std::vector<double> r_, rho_;   // Custom samples
    std::vector<double> slope_;     // Custom per-segment slopes
};

/// Sum kernel rho = rho1 + rho2 used by the transform machinery; rho2 is
/// optional. Closed forms are available only when the sum degenerates to a
/// single built-in family.
class CombinedKernel {
public:
    explicit CombinedKernel(OsgoodKernel rho1,
                            std::optional<OsgoodKernel> rho2 = std::nullopt);

    double operator()(double r) const;
    std::vector<double> breakpoints() const;

    const OsgoodKernel& part1() const { return rho1_; }
    const std::optional<OsgoodKernel>& part2() const { return rho2_; }

    /// The single family backing closed forms, if any.
    std::optional<KernelFamily> closed_form_family() const;
    double closed_form_L() const;
    double closed_form_alpha() const;

private:
    OsgoodKernel rho1_;
    std::optional<OsgoodKernel> rho2_;
};

/// Piecewise-constant nonnegative weight on [t, T]. Constant profiles are a
/// single segment. Integrals are exact (sums of value * length).
class WeightProfile {
public:
    static WeightProfile constant(double value);
    static WeightProfile piecewise(std::vector<double> breakpoints,
                                   std::vector<double> values);

    double operator()(double s) const;
    /// Exact integral over [a, b] (a <= b required).
    double integral(double a, double b) const;
    bool is_constant() const { return values_.size() == 1; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

    WeightProfile plus(const WeightProfile& other) const;
    WeightProfile scaled(double factor) const;

private:
    WeightProfile() = default;
    std::vector<double> breaks_;   // empty for constant profiles
    std::vector<double> values_;   // size 1 (constant) or breaks_.size() - 1
};

/// Structural bounds entering the constant collection: c_b, c_h, c_g scale
/// the increment conditions, beta_* the growth condition.
struct CoefficientBounds {
    double c_b = 0.0;
    double c_h = 0.0;
    double c_g = 0.0;
    double beta_b = 0.0;
    double beta_h = 0.0;
    double beta_g = 0.0;

    void validate() const;   // throws std::invalid_argument on negatives
};

struct OsgoodReport {
    bool osgood_holds = false;
    bool concave = false;
    std::vector<double> probe_y;       // 10^-k, k = 2..12
    std::vector<double> probe_theta;   // int_{y}^{1} dr/rho(r), negated
};

/// Probes the divergence of int_0 dr/rho(r). Built-in families are decided
/// analytically; Custom kernels are classified from the probe increments.
OsgoodReport validate_osgood(const CombinedKernel& kernel);

}  // namespace gstab
