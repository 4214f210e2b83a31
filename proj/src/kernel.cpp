#include "gstab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gstab/numerics.hpp"

namespace gstab {

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::LogLipschitz: return "log_lipschitz";
        case KernelFamily::Power: return "power";
        case KernelFamily::Custom: return "custom";
    }
    return "unknown";
}

OsgoodKernel OsgoodKernel::linear(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel: L must be positive");
    OsgoodKernel k;
    k.family_ = KernelFamily::Linear;
    k.L_ = L;
    return k;
}

OsgoodKernel OsgoodKernel::log_lipschitz(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel: L must be positive");
    OsgoodKernel k;
    k.family_ = KernelFamily::LogLipschitz;
    k.L_ = L;
    return k;
}

OsgoodKernel OsgoodKernel::power(double L, double alpha) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel: L must be positive");
    if (!(alpha > 1.0))
        throw std::invalid_argument("kernel: power family requires alpha > 1");
    OsgoodKernel k;
    k.family_ = KernelFamily::Power;
    k.L_ = L;
    k.alpha_ = alpha;
    return k;
}

OsgoodKernel OsgoodKernel::custom(std::vector<double> r_samples,
                                  std::vector<double> rho_samples) {
    if (r_samples.size() != rho_samples.size())
        throw std::invalid_argument("kernel: sample arrays differ in length");
    if (r_samples.empty())
        throw std::invalid_argument("kernel: custom kernel needs samples");
    if (r_samples.front() != 0.0) {
        r_samples.insert(r_samples.begin(), 0.0);
        rho_samples.insert(rho_samples.begin(), 0.0);
    }
    if (rho_samples.front() != 0.0)
        throw std::invalid_argument("kernel: rho(0) must be 0");
    for (size_t i = 1; i < r_samples.size(); ++i) {
        if (!(r_samples[i] > r_samples[i - 1]))
            throw std::invalid_argument("kernel: sample abscissae must increase");
        if (rho_samples[i] < rho_samples[i - 1])
            throw std::invalid_argument("kernel: samples must be nondecreasing");
        if (!(rho_samples[i] > 0.0))
            throw std::invalid_argument(
                "kernel: rho must be positive away from 0 (vanishing segment)");
    }
    if (r_samples.size() < 2)
        throw std::invalid_argument("kernel: custom kernel needs a sample above 0");
    OsgoodKernel k;
    k.family_ = KernelFamily::Custom;
    k.r_ = std::move(r_samples);
    k.rho_ = std::move(rho_samples);
    k.slope_.resize(k.r_.size() - 1);
    for (size_t i = 0; i + 1 < k.r_.size(); ++i)
        k.slope_[i] = (k.rho_[i + 1] - k.rho_[i]) / (k.r_[i + 1] - k.r_[i]);
    return k;
}

double OsgoodKernel::operator()(double r) const {
    if (r < 0.0) throw std::invalid_argument("kernel: negative argument");
    if (r == 0.0) return 0.0;
    switch (family_) {
        case KernelFamily::Linear:
            return L_ * r;
        case KernelFamily::LogLipschitz:
            return r <= 1.0 ? L_ * r * std::log(std::exp(1.0) / r) : L_ * r;
        case KernelFamily::Power:
            return L_ * std::pow(r, alpha_);
        case KernelFamily::Custom: {
            if (r >= r_.back())
                return rho_.back() + slope_.back() * (r - r_.back());
            const auto it = std::upper_bound(r_.begin(), r_.end(), r);
            const size_t i = static_cast<size_t>(it - r_.begin()) - 1;
            return rho_[i] + slope_[i] * (r - r_[i]);
        }
    }
    return 0.0;
}

std::vector<double> OsgoodKernel::breakpoints() const {
    switch (family_) {
        case KernelFamily::LogLipschitz:
            return {1.0};
        case KernelFamily::Custom:
            return std::vector<double>(r_.begin() + 1, r_.end());
        default:
            return {};
    }
}

bool OsgoodKernel::concave_flag() const {
    switch (family_) {
        case KernelFamily::Linear:
            return true;
        case KernelFamily::LogLipschitz:
            return true;   // on (0, 1]; the linear cap is a reporting caveat
        case KernelFamily::Power:
            return false;
        case KernelFamily::Custom: {
            for (size_t i = 1; i < slope_.size(); ++i)
                if (slope_[i] > slope_[i - 1] * (1.0 + 1e-12)) return false;
            return true;
        }
    }
    return false;
}

CombinedKernel::CombinedKernel(OsgoodKernel rho1, std::optional<OsgoodKernel> rho2)
    : rho1_(std::move(rho1)), rho2_(std::move(rho2)) {}

double CombinedKernel::operator()(double r) const {
    double v = rho1_(r);
    if (rho2_) v += (*rho2_)(r);
    return v;
}

std::vector<double> CombinedKernel::breakpoints() const {
    std::vector<double> b = rho1_.breakpoints();
    if (rho2_) {
        const std::vector<double> b2 = rho2_->breakpoints();
        b.insert(b.end(), b2.begin(), b2.end());
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
    return b;
}

std::optional<KernelFamily> CombinedKernel::closed_form_family() const {
    if (rho2_) {
        // Two linear parts still admit the linear closed form.
        if (rho1_.family() == KernelFamily::Linear &&
            rho2_->family() == KernelFamily::Linear)
            return KernelFamily::Linear;
        return std::nullopt;
    }
    if (rho1_.family() == KernelFamily::Custom) return std::nullopt;
    return rho1_.family();
}

double CombinedKernel::closed_form_L() const {
    double L = rho1_.L();
    if (rho2_ && rho1_.family() == KernelFamily::Linear &&
        rho2_->family() == KernelFamily::Linear)
        L += rho2_->L();
    return L;
}

double CombinedKernel::closed_form_alpha() const { return rho1_.alpha(); }

WeightProfile WeightProfile::constant(double value) {
    if (value < 0.0 || !std::isfinite(value))
        throw std::invalid_argument("weight: constant must be finite and >= 0");
    WeightProfile w;
    w.values_ = {value};
    return w;
}

WeightProfile WeightProfile::piecewise(std::vector<double> breakpoints,
                                       std::vector<double> values) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
        throw std::invalid_argument("weight: need n+1 breakpoints for n values");
    for (size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument("weight: breakpoints must increase");
    for (double v : values)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("weight: values must be finite and >= 0");
    WeightProfile w;
    w.breaks_ = std::move(breakpoints);
    w.values_ = std::move(values);
    return w;
}

double WeightProfile::operator()(double s) const {
    if (is_constant()) return values_[0];
    if (s <= breaks_.front()) return values_.front();
    if (s >= breaks_.back()) return values_.back();
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
    return values_[static_cast<size_t>(it - breaks_.begin()) - 1];
}

double WeightProfile::integral(double a, double b) const {
    if (!(a <= b)) throw std::invalid_argument("weight: integral needs a <= b");
    if (is_constant()) return values_[0] * (b - a);
    double total = 0.0;
    for (size_t i = 0; i + 1 < breaks_.size(); ++i) {
        const double lo = std::max(a, breaks_[i]);
        const double hi = std::min(b, breaks_[i + 1]);
        if (hi > lo) total += values_[i] * (hi - lo);
    }
    // outside the declared span the profile continues with its edge values
    if (a < breaks_.front())
        total += values_.front() * (std::min(b, breaks_.front()) - a);
    if (b > breaks_.back())
        total += values_.back() * (b - std::max(a, breaks_.back()));
    return total;
}

WeightProfile WeightProfile::plus(const WeightProfile& other) const {
    if (is_constant() && other.is_constant())
        return constant(values_[0] + other.values_[0]);
    std::vector<double> breaks;
    auto add = [&breaks](const std::vector<double>& b) {
        breaks.insert(breaks.end(), b.begin(), b.end());
    };
    add(breaks_);
    add(other.breaks_);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (breaks.size() < 2) {
        // one side constant over an unknown span: fall back to the other grid
        return is_constant()
                   ? piecewise(other.breaks_, [&] {
                         std::vector<double> v = other.values_;
                         for (double& x : v) x += values_[0];
                         return v;
                     }())
                   : piecewise(breaks_, [&] {
                         std::vector<double> v = values_;
                         for (double& x : v) x += other.values_[0];
                         return v;
                     }());
    }
    std::vector<double> vals(breaks.size() - 1);
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
        vals[i] = (*this)(mid) + other(mid);
    }
    return piecewise(std::move(breaks), std::move(vals));
}

WeightProfile WeightProfile::scaled(double factor) const {
    if (factor < 0.0) throw std::invalid_argument("weight: negative scale");
    WeightProfile w = *this;
    for (double& v : w.values_) v *= factor;
    return w;
}

void CoefficientBounds::validate() const {
    const double vals[] = {c_b, c_h, c_g, beta_b, beta_h, beta_g};
    const char* names[] = {"c_b", "c_h", "c_g", "beta_b", "beta_h", "beta_g"};
    for (int i = 0; i < 6; ++i)
        if (vals[i] < 0.0 || !std::isfinite(vals[i]))
            throw std::invalid_argument(std::string("bounds: ") + names[i] +
                                        " must be finite and >= 0");
}

OsgoodReport validate_osgood(const CombinedKernel& kernel) {
    OsgoodReport rep;
    rep.concave = kernel.part1().concave_flag() &&
                  (!kernel.part2() || kernel.part2()->concave_flag());
    for (int k = 2; k <= 12; ++k) {
        const double y = std::pow(10.0, -k);
        // int_y^1 dr/rho via the log substitution r = e^{-v}
        const double value = integrate_value(
            [&kernel](double v) {
                const double r = std::exp(-v);
                return r / kernel(r);
            },
            0.0, -std::log(y), 1e-10);
        rep.probe_y.push_back(y);
        rep.probe_theta.push_back(-value);
    }
    const bool builtin1 = kernel.part1().family() != KernelFamily::Custom;
    const bool builtin2 = !kernel.part2() ||
                          kernel.part2()->family() != KernelFamily::Custom;
    if (builtin1 && builtin2) {
        rep.osgood_holds = true;   // all built-in families diverge at 0
        return rep;
    }
    // Divergence heuristic: per-decade increments of |Theta| must not fade.
    double first_inc = 0.0, last_inc = 0.0;
    for (size_t i = 1; i < rep.probe_theta.size(); ++i) {
        const double inc =
            std::abs(rep.probe_theta[i] - rep.probe_theta[i - 1]);
        if (i == 1) first_inc = inc;
        last_inc = inc;
    }
    rep.osgood_holds = last_inc > 1e-3 * first_inc;
    return rep;
}

}  // namespace gstab
