#include "gstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gstab/numerics.hpp"

namespace gstab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Certified: return "Certified";
        case Verdict::ViolatedBeyondTolerance: return "ViolatedBeyondTolerance";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Certified: return 0;
        case Verdict::ViolatedBeyondTolerance: return 2;
        case Verdict::Inconclusive: return 3;
    }
    return 3;
}

CertificateResult certify(const PairedRun& run,
                          const BihariTransform& transform,
                          const GammaCollection& constants,
                          double tolerance_k) {
    if (tolerance_k < 0.0)
        throw std::invalid_argument("certify: tolerance_k must be >= 0");
    if (run.times.empty())
        throw std::invalid_argument("certify: run has no grid times");
    const double tol = 1e-9 * std::max(1.0, constants.T - constants.t);
    if (std::abs(run.times.front() - constants.t) > tol ||
        std::abs(run.times.back() - constants.T) > tol)
        throw std::invalid_argument(
            "certify: run grid does not match the constant collection horizon");
    CertificateResult out;
    out.tolerance_k = tolerance_k;
    out.gap = run.gap;
    out.points.resize(run.times.size());

    const double u0 = run.gap.value;
    double z0 = 0.0;
    const bool zero_gap = u0 <= 0.0;
    if (!zero_gap) z0 = transform.theta(constants.C1 * u0);

    bool exceeded = false, nonfinite = false;
    out.worst_margin = kInf;
    for (size_t j = 0; j < run.times.size(); ++j) {
        CertificatePoint& p = out.points[j];
        p.s = run.times[j];
        p.u = run.u[j];
        p.pointwise = run.pointwise[j];
        p.std_error = run.u_stderr[j];
        if (zero_gap) {
            p.bound = 0.0;
        } else {
            const ThetaInverse inv =
                transform.theta_inverse(z0 + constants.C0_at(p.s));
            p.bound = inv.overflow ? kInf : inv.value;
        }
        const double allowance = p.bound + tolerance_k * p.std_error;
        p.margin = allowance - p.u;
        if (!std::isfinite(p.bound)) {
            nonfinite = true;
            continue;
        }
        if (p.u > allowance) exceeded = true;
        if (p.margin < out.worst_margin) {
            out.worst_margin = p.margin;
            out.worst_index = j;
        }
    }
    out.verdict = exceeded ? Verdict::ViolatedBeyondTolerance
                           : (nonfinite ? Verdict::Inconclusive
                                        : Verdict::Certified);
    return out;
}

namespace {

// sup over window starts and arguments of Psi_window(u)/u for one width
AmplificationPoint window_sup(const BihariTransform& transform,
                              const GammaCollection& constants, double delta,
                              const std::vector<double>& zu,
                              const std::vector<double>& u_grid,
                              int tau_samples) {
    AmplificationPoint pt;
    pt.delta = delta;
    const double span = constants.T - constants.t;
    if (delta <= 0.0 || delta > span * (1.0 + 1e-12))
        throw std::invalid_argument(
            "amplification: window width outside (0, T - t]");
    const double tau_hi = constants.T - delta;
    const int nt = tau_hi - constants.t <= 1e-15 * span
                       ? 1
                       : std::max(1, tau_samples);
    for (int it = 0; it < nt; ++it) {
        const double tau =
            nt == 1 ? constants.t
                    : constants.t + (tau_hi - constants.t) * it / (nt - 1);
        const double c =
            constants.C1 *
            constants.gamma.integral(tau, std::min(tau + delta, constants.T));
        for (size_t i = 0; i < u_grid.size(); ++i) {
            const ThetaInverse inv = transform.theta_inverse(zu[i] + c);
            const double ratio =
                inv.overflow ? kInf : inv.value / u_grid[i];
            if (ratio > pt.Lambda) {
                pt.Lambda = ratio;
                pt.worst_u = u_grid[i];
                pt.worst_tau = tau;
            }
            if (inv.overflow) {
                pt.finite = false;
                return pt;
            }
        }
    }
    return pt;
}

}  // namespace

AmplificationProfile amplification(const BihariTransform& transform,
                                   const GammaCollection& constants,
                                   const AmplificationOptions& opts) {
    if (opts.deltas.empty() || opts.u_grid.empty())
        throw std::invalid_argument("amplification: empty grids");
    for (double u : opts.u_grid)
        if (!(u > 0.0))
            throw std::invalid_argument(
                "amplification: arguments must be positive");
    std::vector<double> zu(opts.u_grid.size());
    for (size_t i = 0; i < zu.size(); ++i)
        zu[i] = transform.theta(constants.C1 * opts.u_grid[i]);

    AmplificationProfile prof;
    prof.points.reserve(opts.deltas.size());
    for (double d : opts.deltas) {
        prof.points.push_back(window_sup(transform, constants, d, zu,
                                         opts.u_grid, opts.tau_samples));
        const AmplificationPoint& pt = prof.points.back();
        if (pt.finite && pt.Lambda < 1.0)
            prof.horizon = prof.horizon ? std::min(*prof.horizon, pt.delta)
                                        : pt.delta;
    }
    return prof;
}

std::optional<double> contraction_horizon(const BihariTransform& transform,
                                          const GammaCollection& constants,
                                          const AmplificationOptions& opts) {
    return amplification(transform, constants, opts).horizon;
}

PartitionPropagation propagate_partition(const BihariTransform& transform,
                                         const GammaCollection& constants,
                                         const std::vector<double>& partition,
                                         double gap,
                                         const std::vector<double>& u_grid,
                                         int tau_samples) {
    if (partition.size() < 2)
        throw std::invalid_argument("partition: need at least two knots");
    for (size_t i = 1; i < partition.size(); ++i)
        if (!(partition[i] > partition[i - 1]))
            throw std::invalid_argument("partition: knots must increase");
    if (partition.front() < constants.t - 1e-12 ||
        partition.back() > constants.T + 1e-12)
        throw std::invalid_argument("partition: knots outside [t, T]");
    if (!(gap >= 0.0))
        throw std::invalid_argument("partition: gap must be >= 0");
    std::vector<double> zu(u_grid.size());
    for (size_t i = 0; i < zu.size(); ++i) {
        if (!(u_grid[i] > 0.0))
            throw std::invalid_argument(
                "partition: arguments must be positive");
        zu[i] = transform.theta(constants.C1 * u_grid[i]);
    }

    PartitionPropagation out;
    out.partition = partition;
    out.product = 1.0;
    out.contracting = true;
    double delta_max = 0.0;
    for (size_t k = 0; k + 1 < partition.size(); ++k) {
        const double lo = partition[k], hi = partition[k + 1];
        delta_max = std::max(delta_max, hi - lo);
        double lam = 0.0;
        bool fin = true;
        const double c = constants.C1 * constants.gamma.integral(lo, hi);
        for (size_t i = 0; i < u_grid.size(); ++i) {
            const ThetaInverse inv = transform.theta_inverse(zu[i] + c);
            if (inv.overflow) {
                fin = false;
                lam = kInf;
                break;
            }
            lam = std::max(lam, inv.value / u_grid[i]);
        }
        out.lambdas.push_back(lam);
        out.finite = out.finite && fin;
        out.contracting = out.contracting && fin && lam < 1.0;
        out.product *= lam;
    }
    out.bound = out.product * gap;

    AmplificationOptions uopts;
    uopts.deltas = {delta_max};
    uopts.u_grid = u_grid;
    uopts.tau_samples = tau_samples;
    const AmplificationProfile uni =
        amplification(transform, constants, uopts);
    out.uniform_lambda = uni.points.front().Lambda;
    out.finite = out.finite && uni.points.front().finite;
    const double n_intervals = static_cast<double>(partition.size() - 1);
    out.uniform_bound = std::pow(out.uniform_lambda, n_intervals) * gap;
    out.sqrt_bound = std::sqrt(out.bound);
    out.sqrt_uniform_bound = std::sqrt(out.uniform_bound);
    return out;
}

SigmaTable integrated_map(const CombinedKernel& kernel, int table_points,
                          double table_max) {
    if (table_points < 1 || !(table_max > 0.0))
        throw std::invalid_argument("integrated_map: bad resolution");
    SigmaTable table;
    const size_t nt = static_cast<size_t>(table_points) + 1;
    table.x.resize(nt);
    table.v.resize(nt);
    table.x[0] = 0.0;
    table.v[0] = 0.0;
    const auto integrand = [&](double z) {
        return std::sqrt(kernel(z * z)) / z;
    };
    for (size_t i = 1; i < nt; ++i) {
        table.x[i] = table_max * static_cast<double>(i) / table_points;
        table.v[i] = table.v[i - 1] +
                     integrate_value(integrand, table.x[i - 1], table.x[i],
                                     1e-10, 1e-14);
    }
    return table;
}

SaturatingFamily saturating_family(const CombinedKernel& kernel,
                                   const WeightProfile& kappa,
                                   const WeightProfile& K,
                                   const SaturatingOptions& opts) {
    if (!(opts.T > opts.t))
        throw std::invalid_argument("saturating_family: need T > t");
    if (!(opts.u0 > 0.0) || !(opts.c_b > 0.0))
        throw std::invalid_argument(
            "saturating_family: u0 and c_b must be positive");
    if (opts.curve_points < 1 || opts.table_points < 1 ||
        !(opts.table_max > 0.0))
        throw std::invalid_argument("saturating_family: bad resolution");

    SaturatingFamily fam;
    const WeightProfile beta =
        kappa.plus(K).scaled(opts.c_b / (2.0 * (opts.T - opts.t)));

    fam.times.resize(static_cast<size_t>(opts.curve_points) + 1);
    fam.deviation.resize(fam.times.size());
    fam.predicted.resize(fam.times.size());
    for (int i = 0; i <= opts.curve_points; ++i) {
        const double s =
            opts.t + (opts.T - opts.t) * i / opts.curve_points;
        fam.times[static_cast<size_t>(i)] = s;
        if (i == 0) {
            fam.deviation[0] = opts.u0;
            fam.predicted[0] = opts.u0;
            continue;
        }
        const EnvelopeResult r =
            solve_envelope(opts.u0, beta, kernel, opts.t, s);
        fam.deviation[static_cast<size_t>(i)] =
            r.blew_up ? std::numeric_limits<double>::infinity() : r.ode_value;
        fam.predicted[static_cast<size_t>(i)] =
            r.blew_up ? std::numeric_limits<double>::infinity()
                      : r.transform_value;
    }
    const double pT = fam.predicted.back();
    const double dT = fam.deviation.back();
    fam.endpoint_gap = std::isfinite(pT) && std::isfinite(dT)
                           ? std::abs(dT - pT) / std::max(std::abs(pT), 1e-300)
                           : 0.0;

    const SigmaTable table =
        integrated_map(kernel, opts.table_points, opts.table_max);
    fam.sigma_x = table.x;
    fam.sigma_v = table.v;

    // drift entry b(r, x) = sqrt(c_b / (4 (T - t))) sqrt(kappa(r) + K(r))
    // sigma(x), g = h = 0
    const WeightProfile sum = kappa.plus(K);
    WeightProfile root = sum.is_constant()
                             ? WeightProfile::constant(
                                   std::sqrt(sum.values().front()))
                             : [&] {
                                   std::vector<double> vals = sum.values();
                                   for (double& v : vals) v = std::sqrt(v);
                                   return WeightProfile::piecewise(
                                       sum.breakpoints(), std::move(vals));
                               }();
    fam.catalog.b.kind = CoefficientTerm::Kind::SigmaMap;
    fam.catalog.b.c = std::sqrt(opts.c_b / (4.0 * (opts.T - opts.t)));
    fam.catalog.b.sigma_x = fam.sigma_x;
    fam.catalog.b.sigma_v = fam.sigma_v;
    fam.catalog.b.time_factor = root;
    fam.catalog.h.kind = CoefficientTerm::Kind::Zero;
    fam.catalog.g.kind = CoefficientTerm::Kind::Zero;
    fam.catalog.mean_slot = MeanSlotMode::PointwiseState;
    return fam;
}

AsymptoticsProbe asymptotics_probe(const StabilityModulus& modulus,
                                   double u_lo, double u_hi, int points) {
    if (!(0.0 < u_lo && u_lo < u_hi) || points < 2)
        throw std::invalid_argument("asymptotics: need 0 < u_lo < u_hi");
    AsymptoticsProbe out;
    out.u.resize(static_cast<size_t>(points));
    out.ratio.resize(static_cast<size_t>(points));
    const double C1 = modulus.C1();
    for (int i = 0; i < points; ++i) {
        const double frac = static_cast<double>(i) / (points - 1);
        const double u = u_hi * std::pow(u_lo / u_hi, frac);
        const PsiValue p = modulus.psi(u);
        out.u[static_cast<size_t>(i)] = u;
        out.ratio[static_cast<size_t>(i)] =
            p.overflow ? kInf : p.value / (C1 * u);
    }
    out.limit_ratio = out.ratio.back();

    // LS fit of log(ratio - 1) against log u over the small-argument tail
    const size_t tail = std::max<size_t>(4, out.u.size() / 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = 0;
    for (size_t i = out.u.size() - std::min(tail, out.u.size());
         i < out.u.size(); ++i) {
        const double excess = out.ratio[i] - 1.0;
        if (!std::isfinite(out.ratio[i])) continue;
        if (excess <= 0.0) out.ratio_exceeds_one = false;
        const double x = std::log(out.u[i]);
        const double y = std::log(std::max(excess, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += y * x;
        ++n;
    }
    const double denom = n > 1 ? static_cast<double>(n) * sxx - sx * sx : 0.0;
    out.tail_slope =
        std::abs(denom) > 1e-30
            ? (static_cast<double>(n) * sxy - sx * sy) / denom
            : 0.0;
    return out;
}

}  // namespace gstab
