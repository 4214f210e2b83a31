#include "gstab/msde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace gstab {

namespace {

double interp_table(const std::vector<double>& xs, const std::vector<double>& vs,
                    double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) {
        // continue with the last slope
        const size_t n = xs.size();
        const double slope =
            (vs[n - 1] - vs[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return vs.back() + slope * (x - xs.back());
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const size_t i = static_cast<size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return vs[i] + w * (vs[i + 1] - vs[i]);
}

}  // namespace

double CoefficientTerm::spatial(double x, double m) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Scale:
            return c * x;
        case Kind::MeanGap:
            return c * (x - m + d);
        case Kind::SigmaMap: {
            const double ax = std::abs(x);
            const double v = interp_table(sigma_x, sigma_v, ax);
            return c * (x < 0.0 ? -v : v);
        }
    }
    return 0.0;
}

double CoefficientTerm::operator()(double s, double x, double m) const {
    if (kind == Kind::Zero) return 0.0;
    const double tf = time_factor ? (*time_factor)(s) : 1.0;
    return tf * spatial(x, m);
}

std::pair<double, double> sample_initial_pair(const InitialSpec& xi,
                                              const InitialSpec& eta,
                                              uint64_t seed, uint32_t scenario,
                                              uint32_t path) {
    auto draw = [&](const InitialSpec& spec, StreamTag tag) {
        switch (spec.kind) {
            case InitialSpec::Kind::Deterministic:
                return spec.value;
            case InitialSpec::Kind::Uniform:
                return spec.value +
                       (spec.value2 - spec.value) *
                           uniform_draw(seed, tag, scenario, path, 0);
            case InitialSpec::Kind::Normal:
                return spec.value +
                       spec.value2 * normal_draw(seed, tag, scenario, path, 0);
            case InitialSpec::Kind::OffsetOfXi:
                throw std::invalid_argument(
                    "initial: offset_of_xi is only valid for eta");
        }
        return 0.0;
    };
    const double x = draw(xi, StreamTag::InitialXi);
    double y;
    if (eta.kind == InitialSpec::Kind::OffsetOfXi)
        y = x + eta.value;
    else if (eta == xi)
        y = x;   // identical specs share the draw (comonotone coupling)
    else
        y = draw(eta, StreamTag::InitialEta);
    return {x, y};
}

InitialGap initial_gap(const InitialSpec& xi, const InitialSpec& eta,
                       const ScenarioFamily& family, size_t paths_per_scenario,
                       uint64_t seed) {
    InitialGap out;
    if (xi.kind == InitialSpec::Kind::Deterministic &&
        eta.kind == InitialSpec::Kind::Deterministic) {
        const double d = xi.value - eta.value;
        out.value = d * d;
        out.exact = true;
        return out;
    }
    if (eta.kind == InitialSpec::Kind::OffsetOfXi) {
        out.value = eta.value * eta.value;
        out.exact = true;
        return out;
    }
    if (eta == xi) {
        out.value = 0.0;
        out.exact = true;
        return out;
    }
    std::vector<std::vector<double>> samples(family.size());
    for (uint32_t sc = 0; sc < family.size(); ++sc) {
        samples[sc].reserve(paths_per_scenario);
        for (uint32_t p = 0; p < paths_per_scenario; ++p) {
            const auto [x, y] = sample_initial_pair(xi, eta, seed, sc, p);
            samples[sc].push_back((x - y) * (x - y));
        }
    }
    const SupEstimate est = sup_expectation(samples);
    out.value = est.estimate;
    out.std_error = est.std_errors[est.argmax];
    out.argmax_scenario = est.argmax;
    return out;
}

double euler_step(const Coefficients& c, double s, double x, double m,
                  double dt, double dB, double dQV, double blowup_guard) {
    const double next =
        x + c.b(s, x, m) * dt + c.h(s, x, m) * dQV + c.g(s, x, m) * dB;
    if (!std::isfinite(next) || std::abs(next) > blowup_guard)
        throw std::runtime_error("euler_step: state blow-up at s = " +
                                 std::to_string(s));
    return next;
}

PairedRun simulate_pair(const Coefficients& coeffs, const InitialSpec& xi,
                        const InitialSpec& eta, const GPathEnsemble& ensemble,
                        double blowup_guard) {
    const ScenarioFamily& family = ensemble.family;
    const size_t S = family.size();
    const size_t P = ensemble.paths_per_scenario;
    const int M = family.grid.steps;
    if (S == 0 || P == 0)
        throw std::invalid_argument("simulate: empty ensemble");
    const double dt = family.grid.dt();
    const bool noise = coeffs.uses_brownian();
    const bool ensemble_mean = coeffs.mean_slot == MeanSlotMode::EnsembleMean;

    PairedRun run;
    run.times = family.grid.times();
    const size_t n_times = static_cast<size_t>(M) + 1;
    run.u.assign(n_times, 0.0);
    run.u_stderr.assign(n_times, 0.0);
    run.u_argmax.assign(n_times, 0);
    run.pointwise.assign(n_times, 0.0);
    run.pointwise_stderr.assign(n_times, 0.0);
    run.scenario_final_mean.resize(S);
    run.family_size = S;
    run.paths_per_scenario = P;
    run.seed = ensemble.seed;

    // per-interval factors reused across paths of a scenario
    std::vector<double> sdt(static_cast<size_t>(M));
    std::vector<double> qv(static_cast<size_t>(M));
    std::vector<double> tf_b(static_cast<size_t>(M)), tf_h(static_cast<size_t>(M)),
        tf_g(static_cast<size_t>(M));
    const double sqrt_dt = std::sqrt(dt);

    std::vector<double> sum_sup(n_times), sumsq_sup(n_times), sum_pt(n_times),
        sumsq_pt(n_times);

    const size_t chunk_width = ensemble_mean ? P : std::min<size_t>(P, 64);
    std::vector<double> xs(chunk_width), ys(chunk_width), sups(chunk_width);
    std::vector<double> z_even(chunk_width), z_odd(chunk_width);
    std::vector<double> u_even(chunk_width), u_odd(chunk_width);

    // Scale and Zero terms reduce every spatial evaluation to a per-step
    // multiplier, so the lane loop can run without call dispatch. Zero terms
    // fold to an exact +0; the Scale fold regroups one multiply.
    const auto scale_or_zero = [](const CoefficientTerm& t) {
        return t.kind == CoefficientTerm::Kind::Zero ||
               t.kind == CoefficientTerm::Kind::Scale;
    };
    const bool folded = !ensemble_mean && scale_or_zero(coeffs.b) &&
                        scale_or_zero(coeffs.h) && scale_or_zero(coeffs.g);
    const double sb =
        coeffs.b.kind == CoefficientTerm::Kind::Scale ? coeffs.b.c : 0.0;
    const double sh =
        coeffs.h.kind == CoefficientTerm::Kind::Scale ? coeffs.h.c : 0.0;
    const double sg =
        coeffs.g.kind == CoefficientTerm::Kind::Scale ? coeffs.g.c : 0.0;

    for (uint32_t sc = 0; sc < S; ++sc) {
        const std::vector<double>& sig = family.controls[sc].sigma;
        for (int j = 0; j < M; ++j) {
            const size_t ju = static_cast<size_t>(j);
            sdt[ju] = sig[ju] * sqrt_dt;
            qv[ju] = sig[ju] * sig[ju] * dt;
            const double s = family.grid.time(j);
            tf_b[ju] = coeffs.b.time_factor ? (*coeffs.b.time_factor)(s) : 1.0;
            tf_h[ju] = coeffs.h.time_factor ? (*coeffs.h.time_factor)(s) : 1.0;
            tf_g[ju] = coeffs.g.time_factor ? (*coeffs.g.time_factor)(s) : 1.0;
        }
        std::fill(sum_sup.begin(), sum_sup.end(), 0.0);
        std::fill(sumsq_sup.begin(), sumsq_sup.end(), 0.0);
        std::fill(sum_pt.begin(), sum_pt.end(), 0.0);
        std::fill(sumsq_pt.begin(), sumsq_pt.end(), 0.0);

        for (size_t chunk = 0; chunk < P; chunk += chunk_width) {
            const size_t n = std::min(chunk_width, P - chunk);
            for (size_t i = 0; i < n; ++i) {
                const auto [x0, y0] = sample_initial_pair(
                    xi, eta, ensemble.seed, sc,
                    static_cast<uint32_t>(chunk + i));
                xs[i] = x0;
                ys[i] = y0;
                const double d = x0 - y0;
                sups[i] = d * d;
                sum_sup[0] += sups[i];
                sumsq_sup[0] += sups[i] * sups[i];
                sum_pt[0] += sups[i];
                sumsq_pt[0] += sups[i] * sups[i];
            }
            for (int j = 0; j < M; ++j) {
                const size_t ju = static_cast<size_t>(j);
                if (noise) {
                    if (j % 2 == 0) {
                        for (size_t i = 0; i < n; ++i) {
                            const UniformPair up = uniform_pair(
                                ensemble.seed, StreamTag::PathNoise, sc,
                                static_cast<uint32_t>(chunk + i),
                                static_cast<uint32_t>(j) / 2);
                            u_even[i] = up.u0;
                            u_odd[i] = up.u1;
                        }
                        rng_detail::normal_icdf_row(u_even.data(),
                                                    z_even.data(), n);
                        rng_detail::normal_icdf_row(u_odd.data(),
                                                    z_odd.data(), n);
                    }
                }
                double mean_x = 0.0, mean_y = 0.0;
                if (ensemble_mean) {
                    for (size_t i = 0; i < n; ++i) {
                        mean_x += xs[i];
                        mean_y += ys[i];
                    }
                    mean_x /= static_cast<double>(n);
                    mean_y /= static_cast<double>(n);
                }
                const double cb = tf_b[ju] * dt;
                const double ch = tf_h[ju] * qv[ju];
                const double cg = tf_g[ju] * sdt[ju];
                const double* zrow = (j % 2 == 0) ? z_even.data() : z_odd.data();
                double bad = -1.0;
                if (folded) {
                    const double fb = cb * sb;
                    const double fh = ch * sh;
                    const double fg = cg * sg;
                    for (size_t i = 0; i < n; ++i) {
                        const double dB = noise ? zrow[i] : 0.0;
                        const double xn =
                            xs[i] + fb * xs[i] + fh * xs[i] + fg * dB * xs[i];
                        const double yn =
                            ys[i] + fb * ys[i] + fh * ys[i] + fg * dB * ys[i];
                        xs[i] = xn;
                        ys[i] = yn;
                        const double d = xn - yn;
                        const double d2 = d * d;
                        if (d2 > sups[i]) sups[i] = d2;
                        if (!(std::abs(xn) <= blowup_guard) ||
                            !(std::abs(yn) <= blowup_guard))
                            bad = static_cast<double>(i);
                        sum_sup[ju + 1] += sups[i];
                        sumsq_sup[ju + 1] += sups[i] * sups[i];
                        sum_pt[ju + 1] += d2;
                        sumsq_pt[ju + 1] += d2 * d2;
                    }
                } else {
                    for (size_t i = 0; i < n; ++i) {
                        const double dB = noise ? zrow[i] : 0.0;
                        const double mx = ensemble_mean ? mean_x : xs[i];
                        const double my = ensemble_mean ? mean_y : ys[i];
                        const double xn =
                            xs[i] + cb * coeffs.b.spatial(xs[i], mx) +
                            ch * coeffs.h.spatial(xs[i], mx) +
                            cg * dB * coeffs.g.spatial(xs[i], mx);
                        const double yn =
                            ys[i] + cb * coeffs.b.spatial(ys[i], my) +
                            ch * coeffs.h.spatial(ys[i], my) +
                            cg * dB * coeffs.g.spatial(ys[i], my);
                        xs[i] = xn;
                        ys[i] = yn;
                        const double d = xn - yn;
                        const double d2 = d * d;
                        if (d2 > sups[i]) sups[i] = d2;
                        if (!(std::abs(xn) <= blowup_guard) ||
                            !(std::abs(yn) <= blowup_guard))
                            bad = static_cast<double>(i);
                        sum_sup[ju + 1] += sups[i];
                        sumsq_sup[ju + 1] += sups[i] * sups[i];
                        sum_pt[ju + 1] += d2;
                        sumsq_pt[ju + 1] += d2 * d2;
                    }
                }
                if (bad >= 0.0)
                    throw std::runtime_error(
                        "simulate: state blow-up in scenario " +
                        std::to_string(sc) + ", path " +
                        std::to_string(chunk + static_cast<size_t>(bad)) +
                        ", time " + std::to_string(family.grid.time(j + 1)));
            }
        }

        // fold scenario statistics into the running max (ties keep the
        // earliest scenario)
        const double np = static_cast<double>(P);
        for (size_t j = 0; j < n_times; ++j) {
            const double mean = sum_sup[j] / np;
            double se = 0.0, se_pt = 0.0;
            if (P > 1) {
                const double var =
                    std::max(0.0, (sumsq_sup[j] - np * mean * mean) / (np - 1.0));
                se = std::sqrt(var / np);
                const double mpt = sum_pt[j] / np;
                const double var_pt =
                    std::max(0.0, (sumsq_pt[j] - np * mpt * mpt) / (np - 1.0));
                se_pt = std::sqrt(var_pt / np);
            }
            if (sc == 0 || mean > run.u[j]) {
                run.u[j] = mean;
                run.u_argmax[j] = sc;
            }
            const double mean_pt = sum_pt[j] / np;
            if (sc == 0 || mean_pt > run.pointwise[j]) run.pointwise[j] = mean_pt;
            run.u_stderr[j] = std::max(run.u_stderr[j], se);
            run.pointwise_stderr[j] = std::max(run.pointwise_stderr[j], se_pt);
        }
        run.scenario_final_mean[sc] = sum_sup[n_times - 1] / np;
    }

    run.sensitivity.resize(S);
    double acc = 0.0;
    for (size_t sc = 0; sc < S; ++sc) {
        acc = sc == 0 ? run.scenario_final_mean[sc]
                      : std::max(acc, run.scenario_final_mean[sc]);
        run.sensitivity[sc] = acc;
    }

    run.gap = initial_gap(xi, eta, family, P, ensemble.seed);
    if (!run.gap.exact) {
        run.gap.value = run.u[0];
        run.gap.std_error = run.u_stderr[0];
    }
    return run;
}

ValidationReport validate_coefficients(const Coefficients& coeffs,
                                       const CoefficientBounds& bounds,
                                       const CombinedKernel& kernel,
                                       const WeightProfile& kappa,
                                       const WeightProfile& K,
                                       const TimeGrid& grid,
                                       const ValidationOptions& opts) {
    bounds.validate();
    grid.validate();
    ValidationReport rep;
    rep.samples = opts.samples;
    const OsgoodKernel& rho1 = kernel.part1();
    const OsgoodKernel& rho2 =
        kernel.part2() ? *kernel.part2() : kernel.part1();

    uint32_t idx = 0;
    auto u01 = [&]() {
        return uniform_draw(opts.seed, StreamTag::Validation, 0, 0, idx++);
    };
    auto log_offset = [&](double span) {
        // offsets log-spaced over [1e-6, span] with random sign
        const double e = -6.0 + u01() * (std::log10(span) + 6.0);
        return (u01() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, e);
    };

    struct Term {
        const CoefficientTerm* term;
        double c;
        const char* name;
    };
    const Term terms[3] = {{&coeffs.b, bounds.c_b, "b"},
                           {&coeffs.h, bounds.c_h, "h"},
                           {&coeffs.g, bounds.c_g, "g"}};

    char buf[512];
    for (size_t k = 0; k < opts.samples; ++k) {
        const double s = grid.t + (grid.T - grid.t) * u01();
        const double R = opts.state_range;
        const double x = R * (2.0 * u01() - 1.0);
        const double x2 = x + log_offset(2.0 * R);
        const double m = R * (2.0 * u01() - 1.0);
        const double m2 = m + log_offset(2.0 * R);
        const double dx2 = (x - x2) * (x - x2);
        const double dm2 = (m - m2) * (m - m2);
        const double envelope = kappa(s) * rho1(dx2) + K(s) * rho2(dm2);
        for (const Term& tm : terms) {
            const double diff = (*tm.term)(s, x, m) - (*tm.term)(s, x2, m2);
            const double lhs = diff * diff;
            const double rhs = tm.c * envelope;
            if (rhs > 0.0)
                rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
            if (lhs > rhs * (1.0 + opts.slack) + 1e-12) {
                std::snprintf(buf, sizeof buf,
                              "increment condition fails for %s: s=%.6g x=%.9g "
                              "x'=%.9g m=%.9g m'=%.9g lhs=%.9g rhs=%.9g",
                              tm.name, s, x, x2, m, m2, lhs, rhs);
                rep.ok = false;
                rep.violation = buf;
                return rep;
            }
        }

        // growth condition on large magnitudes
        const double gx = (u01() < 0.5 ? -1.0 : 1.0) *
                          std::pow(10.0, u01() * std::log10(opts.growth_max));
        const double gm = (u01() < 0.5 ? -1.0 : 1.0) *
                          std::pow(10.0, u01() * std::log10(opts.growth_max));
        const double vb = coeffs.b(s, gx, gm);
        const double vh = coeffs.h(s, gx, gm);
        const double vg = coeffs.g(s, gx, gm);
        const double lhs = vb * vb + vh * vh + vg * vg;
        const double rhs = bounds.beta_b + bounds.beta_h * gx * gx +
                           bounds.beta_g * (1.0 + gm * gm);
        if (lhs > rhs * (1.0 + opts.slack) + 1e-12) {
            std::snprintf(buf, sizeof buf,
                          "growth condition fails: s=%.6g x=%.9g m=%.9g "
                          "lhs=%.9g rhs=%.9g",
                          s, gx, gm, lhs, rhs);
            rep.ok = false;
            rep.violation = buf;
            return rep;
        }
    }
    return rep;
}

}  // namespace gstab
