#pragma once

#include <optional>
#include <vector>

#include "gstab/kernel.hpp"

// The integral transform Theta(y) = int_{y*}^{y} dr/rho(r), its inverse, and
// the stability modulus Psi(u) = Theta^{-1}(Theta(C1 u) + C0) built on top.
// Every quantity has a closed-form backend (when the kernel family admits
// one) and a numeric backend (adaptive quadrature plus bracketed inversion);
// the numeric backend is the arbiter wherever the two are compared.

namespace gstab {

struct ThetaInverse {
    double value = 0.0;
    bool underflow = false;   // z below the representable range, value 0
    bool overflow = false;    // z at or beyond sup Theta, value +infinity
};

class BihariTransform {
public:
    explicit BihariTransform(CombinedKernel kernel, double y_star = 1.0,
                             double quad_tol = 1e-10, double inv_tol = 1e-10);

    /// Dispatched evaluation: closed form when available, else numeric.
    double theta(double y) const;
    ThetaInverse theta_inverse(double z) const;

    /// Explicit backends.
    double theta_numeric(double y) const;
    std::optional<double> theta_closed(double y) const;
    ThetaInverse theta_inverse_numeric(double z) const;
    std::optional<ThetaInverse> theta_inverse_closed(double z) const;

    /// Finite supremum of Theta when the range is bounded above (power
    /// families); nullopt when Theta is onto the reals upward.
    std::optional<double> theta_sup() const;

    const CombinedKernel& kernel() const { return kernel_; }
    double y_star() const { return y_star_; }
    double quad_tol() const { return quad_tol_; }
    double inv_tol() const { return inv_tol_; }

private:
    double segment_integral(double lo, double hi) const;
    CombinedKernel kernel_;
    double y_star_;
    double quad_tol_;
    double inv_tol_;
};

struct PsiValue {
    double value = 0.0;
    bool underflow = false;
    bool overflow = false;    // finite-horizon blow-up of the envelope
};

/// Stability modulus for fixed constants C1 (structural) and C0 (integrated
/// constant collection). Nondecreasing, Psi(0) = 0, Psi(u) >= C1 u.
class StabilityModulus {
public:
    StabilityModulus(BihariTransform transform, double C1, double C0);

    PsiValue psi(double u) const;
    PsiValue psi_numeric(double u) const;
    std::optional<PsiValue> psi_closed(double u) const;

    /// omega(r) = sqrt(Psi(r^2)), the continuity modulus scale.
    double continuity_modulus(double r) const;

    const BihariTransform& transform() const { return transform_; }
    double C1() const { return C1_; }
    double C0() const { return C0_; }

private:
    BihariTransform transform_;
    double C1_;
    double C0_;
};

/// Alternative algebraic variants of the log-Lipschitz modulus, recorded in
/// reports for comparison against the numeric backend. Arguments are the
/// already-scaled y = C1*u and the shift c = L*C0.
double psi_loglip_principal_branch(double y, double c);    // e*(y/e)^(e^-c)
double psi_loglip_positive_exponent(double y, double c);   // e*(y/e)^(e^+c)
double psi_loglip_double_exponential(double y, double c);  // e*exp(-(e/y)^(e^c))

struct EnvelopeResult {
    double value = 0.0;           // primary (transform route)
    double transform_value = 0.0;
    double ode_value = 0.0;
    double rel_gap = 0.0;         // relative disagreement between routes
    bool blew_up = false;         // both routes report finite-horizon blow-up
    std::vector<double> epsilon_values;   // regularized values for a = 0
};

/// Envelope U' = beta(r) rho(U), U(t) = a, evaluated at s by two independent
/// routes (Theta inversion and adaptive ODE integration) that must agree to
/// route_tol relative; disagreement throws std::runtime_error. a = 0 uses an
/// epsilon-regularized transform over eps in {1e-4, 1e-6, 1e-8} with Aitken
/// extrapolation (the limit is 0 whenever the Osgood condition holds).
EnvelopeResult solve_envelope(double a, const WeightProfile& beta,
                              const CombinedKernel& kernel, double t, double s,
                              double y_star = 1.0, double route_tol = 1e-6);

/// Gamma(r) = [(T-t) c_b + C_QV c_h + C_BDG c_g] * (kappa(r) + K(r)) and the
/// integrated constant C0 = C1 * int_t^T Gamma. Prefix values C0(t, s) feed
/// time-resolved bounds.
struct GammaCollection {
    WeightProfile gamma = WeightProfile::constant(0.0);
    double scale = 0.0;
    double integral = 0.0;
    double C0 = 0.0;
    double C1 = 4.0;
    double C_BDG = 0.0;
    double C_QV = 0.0;
    double t = 0.0;
    double T = 0.0;

    double C0_at(double s) const;   // C1 * int_t^s Gamma, clamped to [t, T]
};

GammaCollection constant_collection(const CoefficientBounds& bounds,
                                    const WeightProfile& kappa,
                                    const WeightProfile& K, double t, double T,
                                    double C1, double C_BDG, double C_QV);

}  // namespace gstab
