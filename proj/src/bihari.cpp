#include "gstab/bihari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gstab/numerics.hpp"

namespace gstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Anchored antiderivative F of 1/rho with F(1) = 0 for the families whose
// transform has a closed form. Working through F makes the base point y*
// cancel exactly in compositions like Psi.
struct ClosedForm {
    KernelFamily family;
    double L;
    double alpha;

    double F(double y) const {
        switch (family) {
            case KernelFamily::Linear:
                return std::log(y) / L;
            case KernelFamily::LogLipschitz:
                return y <= 1.0 ? -std::log1p(-std::log(y)) / L
                                : std::log(y) / L;
            case KernelFamily::Power:
                return -std::pow(y, 1.0 - alpha) / (L * (alpha - 1.0));
            default:
                throw std::logic_error("closed form unavailable");
        }
    }

    ThetaInverse F_inv(double w) const {
        ThetaInverse out;
        switch (family) {
            case KernelFamily::Linear: {
                const double e = L * w;
                if (e > 709.0) {
                    out.value = kInf;
                    out.overflow = true;   // beyond floating range
                } else {
                    out.value = std::exp(e);
                    if (out.value == 0.0) out.underflow = true;
                }
                return out;
            }
            case KernelFamily::LogLipschitz: {
                const double e = L * w;
                if (e >= 0.0) {
                    if (e > 709.0) {
                        out.value = kInf;
                        out.overflow = true;
                    } else {
                        out.value = std::exp(e);
                    }
                } else {
                    const double q = std::exp(-e);   // log(e/y), > 1
                    out.value = std::exp(1.0 - q);
                    if (out.value == 0.0) out.underflow = true;
                }
                return out;
            }
            case KernelFamily::Power: {
                if (w >= 0.0) {
                    out.value = kInf;
                    out.overflow = true;   // z at or beyond sup Theta
                } else {
                    out.value = std::pow(-L * (alpha - 1.0) * w,
                                         -1.0 / (alpha - 1.0));
                    if (out.value == 0.0) out.underflow = true;
                }
                return out;
            }
            default:
                throw std::logic_error("closed form unavailable");
        }
    }
};

std::optional<ClosedForm> closed_form_of(const CombinedKernel& k) {
    const auto fam = k.closed_form_family();
    if (!fam) return std::nullopt;
    ClosedForm cf;
    cf.family = *fam;
    cf.L = k.closed_form_L();
    cf.alpha = k.closed_form_alpha();
    return cf;
}

// Integral of 1/(rho + eps) from max(y, floor) to y_star with the same
// singularity-aware layout as the exact transform; eps = 0 recovers it.
double reciprocal_integral(const CombinedKernel& kernel, double lo, double hi,
                           double cutoff, double eps, double rel_tol) {
    if (!(lo < hi)) return 0.0;
    auto direct = [&](double a, double b) {
        if (!(a < b)) return 0.0;
        double total = 0.0;
        std::vector<double> pts{a};
        for (double r : kernel.breakpoints())
            if (r > a && r < b) pts.push_back(r);
        pts.push_back(b);
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            total += integrate_value(
                [&](double r) { return 1.0 / (kernel(r) + eps); }, pts[i],
                pts[i + 1], rel_tol);
        return total;
    };
    double total = 0.0;
    const double mid = std::clamp(cutoff, lo, hi);
    if (lo < mid) {
        // r = e^{-v} keeps the 1/rho singularity integrable numerically
        double va = -std::log(mid), vb = -std::log(lo);
        std::vector<double> pts{va};
        for (double r : kernel.breakpoints())
            if (r > lo && r < mid) pts.push_back(-std::log(r));
        pts.push_back(vb);
        std::sort(pts.begin(), pts.end());
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            total += integrate_value(
                [&](double v) {
                    const double r = std::exp(-v);
                    return r / (kernel(r) + eps);
                },
                pts[i], pts[i + 1], rel_tol);
    }
    total += direct(mid, hi);
    return total;
}

}  // namespace

BihariTransform::BihariTransform(CombinedKernel kernel, double y_star,
                                 double quad_tol, double inv_tol)
    : kernel_(std::move(kernel)), y_star_(y_star), quad_tol_(quad_tol),
      inv_tol_(inv_tol) {
    if (!(y_star > 0.0) || !std::isfinite(y_star))
        throw std::invalid_argument("transform: y_star must be positive");
    if (!(quad_tol > 0.0) || !(inv_tol > 0.0))
        throw std::invalid_argument("transform: tolerances must be positive");
}

double BihariTransform::segment_integral(double lo, double hi) const {
    return reciprocal_integral(kernel_, lo, hi, y_star_ / 10.0, 0.0, quad_tol_);
}

double BihariTransform::theta_numeric(double y) const {
    if (!(y > 0.0))
        throw std::invalid_argument("theta: argument must be positive");
    if (y == y_star_) return 0.0;
    return y > y_star_ ? segment_integral(y_star_, y)
                       : -segment_integral(y, y_star_);
}

std::optional<double> BihariTransform::theta_closed(double y) const {
    const auto cf = closed_form_of(kernel_);
    if (!cf) return std::nullopt;
    if (!(y > 0.0))
        throw std::invalid_argument("theta: argument must be positive");
    return cf->F(y) - cf->F(y_star_);
}

double BihariTransform::theta(double y) const {
    const auto closed = theta_closed(y);
    return closed ? *closed : theta_numeric(y);
}

std::optional<double> BihariTransform::theta_sup() const {
    const auto cf = closed_form_of(kernel_);
    if (!cf || cf->family != KernelFamily::Power) return std::nullopt;
    return -cf->F(y_star_);
}

std::optional<ThetaInverse> BihariTransform::theta_inverse_closed(double z) const {
    const auto cf = closed_form_of(kernel_);
    if (!cf) return std::nullopt;
    return cf->F_inv(z + cf->F(y_star_));
}

ThetaInverse BihariTransform::theta_inverse_numeric(double z) const {
    ThetaInverse out;
    if (z == 0.0) {
        out.value = y_star_;
        return out;
    }
    const double w_star = std::log(y_star_);
    auto g = [&](double w) { return theta_numeric(std::exp(w)) - z; };

    double wlo = w_star, whi = w_star;
    double glo = -z, ghi = -z;
    double step = 0.5;
    if (z > 0.0) {
        double gprev = ghi;
        while (ghi < 0.0) {
            wlo = whi;
            glo = ghi;
            whi += step;
            step *= 2.0;
            if (whi > 709.0) {
                out.value = kInf;
                out.overflow = true;
                return out;
            }
            gprev = ghi;
            ghi = g(whi);
            // a stalled expansion means Theta saturates below z
            if (ghi < 0.0 && std::abs(ghi - gprev) <=
                                 1e-13 * (1.0 + std::abs(z)) && whi > 16.0) {
                out.value = kInf;
                out.overflow = true;
                return out;
            }
        }
    } else {
        double gprev = glo;
        while (glo > 0.0) {
            whi = wlo;
            ghi = glo;
            wlo -= step;
            step *= 2.0;
            if (wlo < -744.0) {
                out.value = 0.0;
                out.underflow = true;
                return out;
            }
            gprev = glo;
            glo = g(wlo);
            if (glo > 0.0 && std::abs(glo - gprev) <=
                                 1e-13 * (1.0 + std::abs(z)) && wlo < -16.0) {
                out.value = 0.0;   // Theta bounded below (non-Osgood kernel)
                out.underflow = true;
                return out;
            }
        }
    }
    const double w = brent(g, wlo, whi, inv_tol_, 300);
    out.value = std::exp(w);
    return out;
}

ThetaInverse BihariTransform::theta_inverse(double z) const {
    const auto closed = theta_inverse_closed(z);
    return closed ? *closed : theta_inverse_numeric(z);
}

StabilityModulus::StabilityModulus(BihariTransform transform, double C1, double C0)
    : transform_(std::move(transform)), C1_(C1), C0_(C0) {
    if (!(C1 > 0.0) || !std::isfinite(C1))
        throw std::invalid_argument("modulus: C1 must be positive");
    if (C0 < 0.0 || !std::isfinite(C0))
        throw std::invalid_argument("modulus: C0 must be finite and >= 0");
}

PsiValue StabilityModulus::psi_numeric(double u) const {
    if (u < 0.0) throw std::invalid_argument("psi: argument must be >= 0");
    PsiValue out;
    if (u == 0.0) return out;
    const double z = transform_.theta_numeric(C1_ * u) + C0_;
    const ThetaInverse inv = transform_.theta_inverse_numeric(z);
    out.value = inv.value;
    out.underflow = inv.underflow;
    out.overflow = inv.overflow;
    return out;
}

std::optional<PsiValue> StabilityModulus::psi_closed(double u) const {
    const auto cf = closed_form_of(transform_.kernel());
    if (!cf) return std::nullopt;
    if (u < 0.0) throw std::invalid_argument("psi: argument must be >= 0");
    PsiValue out;
    if (u == 0.0) return out;
    const ThetaInverse inv = cf->F_inv(cf->F(C1_ * u) + C0_);
    out.value = inv.value;
    out.underflow = inv.underflow;
    out.overflow = inv.overflow;
    return out;
}

PsiValue StabilityModulus::psi(double u) const {
    const auto closed = psi_closed(u);
    return closed ? *closed : psi_numeric(u);
}

double StabilityModulus::continuity_modulus(double r) const {
    if (r < 0.0)
        throw std::invalid_argument("continuity_modulus: argument must be >= 0");
    return std::sqrt(psi(r * r).value);
}

double psi_loglip_principal_branch(double y, double c) {
    const double e = std::exp(1.0);
    return e * std::pow(y / e, std::exp(-c));
}

double psi_loglip_positive_exponent(double y, double c) {
    const double e = std::exp(1.0);
    return e * std::pow(y / e, std::exp(c));
}

double psi_loglip_double_exponential(double y, double c) {
    const double e = std::exp(1.0);
    return e * std::exp(-std::pow(e / y, std::exp(c)));
}

namespace {

// Regularized transform bound for zero initial separation. Computes
// Theta_eps^{-1}(Theta_eps(0) + S) where Theta_eps uses 1/(rho + eps);
// the integrand is bounded, so a hard floor stands in for the endpoint 0.
double regularized_bound(const CombinedKernel& kernel, double y_star, double S,
                         double eps) {
    constexpr double kFloor = 1e-30;
    const double cutoff = y_star / 10.0;
    auto theta_eps = [&](double y) {
        const double lo = std::max(y, kFloor);
        if (lo >= y_star)
            return reciprocal_integral(kernel, y_star, lo, cutoff, eps, 1e-11);
        return -reciprocal_integral(kernel, lo, y_star, cutoff, eps, 1e-11);
    };
    const double z = theta_eps(0.0) + S;
    if (z >= 0.0) {
        // separation already at the base point scale or above
        double hi = y_star;
        while (theta_eps(hi) < z) {
            hi *= 2.0;
            if (hi > 1e12) return kInf;
        }
        return brent([&](double y) { return theta_eps(y) - z; }, y_star / 2.0,
                     hi, 0.0, 300);
    }
    return brent([&](double y) { return theta_eps(y) - z; }, kFloor, y_star,
                 0.0, 300);
}

}  // namespace

EnvelopeResult solve_envelope(double a, const WeightProfile& beta,
                              const CombinedKernel& kernel, double t, double s,
                              double y_star, double route_tol) {
    if (a < 0.0 || !std::isfinite(a))
        throw std::invalid_argument("envelope: initial value must be >= 0");
    if (!(s >= t))
        throw std::invalid_argument("envelope: horizon must satisfy s >= t");

    EnvelopeResult res;
    const double S = beta.integral(t, s);

    if (a == 0.0) {
        res.ode_value = 0.0;
        if (S == 0.0) return res;
        for (double eps : {1e-4, 1e-6, 1e-8})
            res.epsilon_values.push_back(
                regularized_bound(kernel, y_star, S, eps));
        const double x0 = res.epsilon_values[0];
        const double x1 = res.epsilon_values[1];
        const double x2 = res.epsilon_values[2];
        const double denom = x2 - 2.0 * x1 + x0;
        double limit = x2;
        if (denom != 0.0) limit = x2 - (x2 - x1) * (x2 - x1) / denom;
        limit = std::clamp(limit, 0.0, x2);
        res.value = res.transform_value = limit;
        res.rel_gap = std::abs(limit);
        return res;
    }

    // Transform route.
    BihariTransform tr(CombinedKernel(kernel), y_star);
    const double z = tr.theta(a) + S;
    const ThetaInverse inv = tr.theta_inverse(z);
    res.transform_value = inv.value;

    // ODE route, restarted at the weight breakpoints so each segment has a
    // constant beta.
    std::vector<double> pts{t};
    for (double b : beta.breakpoints())
        if (b > t && b < s) pts.push_back(b);
    pts.push_back(s);
    std::sort(pts.begin(), pts.end());
    double u = a;
    bool ode_blew = false;
    for (size_t i = 0; i + 1 < pts.size() && !ode_blew; ++i) {
        const double bval = beta(0.5 * (pts[i] + pts[i + 1]));
        const OdeResult r = integrate_ode(
            [&](double, double uu) { return bval * kernel(std::max(uu, 0.0)); },
            pts[i], pts[i + 1], u, 1e-11, a * 1e-13, 1e14);
        u = r.final_value;
        ode_blew = r.blew_up;
    }
    res.ode_value = ode_blew ? kInf : u;

    const bool huge_t = inv.overflow || res.transform_value > 1e12;
    const bool huge_o = ode_blew || res.ode_value > 1e12;
    if (huge_t && huge_o) {
        res.blew_up = true;
        res.value = res.transform_value;
        return res;
    }
    if (huge_t != huge_o)
        throw std::runtime_error(
            "envelope: transform and ODE routes disagree on blow-up");
    const double denom =
        std::max({std::abs(res.transform_value), std::abs(res.ode_value), 1e-300});
    res.rel_gap = std::abs(res.transform_value - res.ode_value) / denom;
    if (res.rel_gap > route_tol &&
        std::abs(res.transform_value - res.ode_value) > 1e-12)
        throw std::runtime_error("envelope: route disagreement exceeds tolerance");
    res.value = res.transform_value;
    return res;
}

double GammaCollection::C0_at(double s) const {
    const double clamped = std::clamp(s, t, T);
    return C1 * gamma.integral(t, clamped);
}

GammaCollection constant_collection(const CoefficientBounds& bounds,
                                    const WeightProfile& kappa,
                                    const WeightProfile& K, double t, double T,
                                    double C1, double C_BDG, double C_QV) {
    bounds.validate();
    if (!(T > t))
        throw std::invalid_argument("constant_collection: requires T > t");
    if (!(C1 > 0.0))
        throw std::invalid_argument("constant_collection: C1 must be positive");
    if (C_BDG < 0.0 || C_QV < 0.0)
        throw std::invalid_argument(
            "constant_collection: integral constants must be >= 0");
    GammaCollection out;
    out.scale = (T - t) * bounds.c_b + C_QV * bounds.c_h + C_BDG * bounds.c_g;
    out.gamma = kappa.plus(K).scaled(out.scale);
    out.integral = out.gamma.integral(t, T);
    out.C1 = C1;
    out.C0 = C1 * out.integral;
    out.C_BDG = C_BDG;
    out.C_QV = C_QV;
    out.t = t;
    out.T = T;
    return out;
}

}  // namespace gstab
