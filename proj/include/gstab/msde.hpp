#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gstab/ambiguity.hpp"
#include "gstab/kernel.hpp"

// Mean-field dynamics under volatility ambiguity. A solution follows the
// explicit Euler recursion
//     X_{i+1} = X_i + b(s_i, X_i, m_i) dt + h(s_i, X_i, m_i) dQV_i
//                   + g(s_i, X_i, m_i) dB_i
// where the mean slot m_i is either the path state itself (PointwiseState)
// or the cross-path scenario mean (EnsembleMean). Two solutions started from
// xi and eta share every increment per (scenario, path), and the certified
// deviation curve is the scenario-max mean of the running sup |X - Y|^2.

namespace gstab {

enum class MeanSlotMode { PointwiseState, EnsembleMean };

/// One coefficient slot. Catalog forms:
///  Zero       0
///  Scale      c * x
///  MeanGap    c * (x - m + d)
///  SigmaMap   c * sign(x) * sigma(|x|) with sigma tabulated (the integrated
///             map of the saturating construction, shared by the
///             log-Lipschitz / power / saturating drift entries)
/// An optional piecewise-constant time factor multiplies the value.
struct CoefficientTerm {
    enum class Kind { Zero, Scale, MeanGap, SigmaMap };
    Kind kind = Kind::Zero;
    double c = 0.0;
    double d = 0.0;
    std::vector<double> sigma_x, sigma_v;   // SigmaMap interpolation table
    std::optional<WeightProfile> time_factor;

    double operator()(double s, double x, double m) const;
    double spatial(double x, double m) const;
    bool is_zero() const { return kind == Kind::Zero; }
};

struct Coefficients {
    CoefficientTerm b, h, g;
    MeanSlotMode mean_slot = MeanSlotMode::PointwiseState;

    bool uses_brownian() const { return !g.is_zero(); }
    bool uses_qv() const { return !h.is_zero(); }
};

struct InitialSpec {
    enum class Kind { Deterministic, Uniform, Normal, OffsetOfXi };
    Kind kind = Kind::Deterministic;
    double value = 0.0;            // Deterministic value / Uniform lo / mean / offset
    double value2 = 0.0;           // Uniform hi / standard deviation

    bool operator==(const InitialSpec&) const = default;
};

/// Draws the coupled pair (xi, eta) for one (scenario, path). Identical
/// specs reuse the same draw; OffsetOfXi shifts it; anything else samples an
/// independent stream.
std::pair<double, double> sample_initial_pair(const InitialSpec& xi,
                                              const InitialSpec& eta,
                                              uint64_t seed, uint32_t scenario,
                                              uint32_t path);

struct InitialGap {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = false;
    size_t argmax_scenario = 0;
};

/// Squared-gap sublinear expectation of the pair. Exact when the gap is
/// deterministic (deterministic pair, identical specs, or an offset);
/// otherwise a Monte Carlo estimate over the ensemble layout.
InitialGap initial_gap(const InitialSpec& xi, const InitialSpec& eta,
                       const ScenarioFamily& family, size_t paths_per_scenario,
                       uint64_t seed);

/// One Euler update; throws std::runtime_error when the result is non-finite
/// or exceeds the blow-up guard.
double euler_step(const Coefficients& c, double s, double x, double m,
                  double dt, double dB, double dQV,
                  double blowup_guard = 1e12);

struct PairedRun {
    std::vector<double> times;
    std::vector<double> u;                  // scenario-max mean running sup
    std::vector<double> u_stderr;           // max per-scenario stderr
    std::vector<uint32_t> u_argmax;
    std::vector<double> pointwise;          // scenario-max mean |X_s - Y_s|^2
    std::vector<double> pointwise_stderr;
    InitialGap gap;
    std::vector<double> scenario_final_mean;   // running-sup mean at T
    std::vector<double> sensitivity;           // prefix max of the above
    size_t family_size = 0;
    size_t paths_per_scenario = 0;
    uint64_t seed = 0;
};

/// Simulates the coupled pair over the full ensemble. Deviation statistics
/// are accumulated on the fly; trajectories are not stored.
PairedRun simulate_pair(const Coefficients& coeffs, const InitialSpec& xi,
                        const InitialSpec& eta, const GPathEnsemble& ensemble,
                        double blowup_guard = 1e12);

struct ValidationReport {
    bool ok = true;
    std::string violation;     // human-readable sample point on failure
    size_t samples = 0;
    double worst_ratio = 0.0;  // max lhs/rhs seen (<= 1 + slack when ok)
};

struct ValidationOptions {
    size_t samples = 256;
    double state_range = 10.0;     // increment condition sample box
    double growth_max = 1e6;       // growth condition magnitudes up to this
    double slack = 1e-9;
    uint64_t seed = 0;
};

/// Spot-checks the declared increment condition (squared increments of b, h,
/// g against c_* [kappa rho1(|dx|^2) + K rho2(|dm|^2)]) and the growth
/// condition (|b|^2 + |h|^2 + |g|^2 against beta_b + beta_h|x|^2 +
/// beta_g(1 + |m|^2)) on random samples. rho2 falls back to rho1 when the
/// kernel has a single part.
ValidationReport validate_coefficients(const Coefficients& coeffs,
                                       const CoefficientBounds& bounds,
                                       const CombinedKernel& kernel,
                                       const WeightProfile& kappa,
                                       const WeightProfile& K,
                                       const TimeGrid& grid,
                                       const ValidationOptions& opts = {});

}  // namespace gstab
