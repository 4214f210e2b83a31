#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gstab/rng.hpp"

// Volatility ambiguity as a finite family of scenario controls: each control
// fixes a piecewise-constant volatility on the simulation grid, Brownian
// increments are drawn per (scenario, path) from counter-based substreams,
// quadratic-variation increments are the deterministic sigma_i^2 * dt, and
// the sublinear expectation is the max of per-scenario empirical means.

namespace gstab {

struct AmbiguitySet {
    double sigma_low = 0.0;
    double sigma_high = 0.0;
    int dimension = 1;

    void validate() const;   // requires 0 < sigma_low <= sigma_high, dim 1
};

struct TimeGrid {
    double t = 0.0;
    double T = 1.0;
    int steps = 1;

    void validate() const;
    double dt() const { return (T - t) / steps; }
    double time(int i) const { return t + (T - t) * i / steps; }
    std::vector<double> times() const;
};

struct VolatilityControl {
    std::vector<double> sigma;   // one value per grid interval
    std::string label;
};

struct ScenarioStrategy {
    enum class Kind { Extremes, BangBang, LatinGrid, RandomizedControls };
    Kind kind = Kind::Extremes;
    int switches = 1;      // BangBang
    int levels = 3;        // LatinGrid
    int count = 8;         // RandomizedControls
    uint64_t seed = 0;     // RandomizedControls
};

struct ScenarioFamily {
    AmbiguitySet set;
    TimeGrid grid;
    std::vector<VolatilityControl> controls;

    size_t size() const { return controls.size(); }
};

/// Enumerates the controls for one strategy. Every family contains the two
/// constant extreme controls; exact duplicates are removed (the degenerate
/// set sigma_low = sigma_high collapses to a single control).
ScenarioFamily generate_scenarios(const AmbiguitySet& set,
                                  const ScenarioStrategy& strategy,
                                  const TimeGrid& grid);

/// Union of several families over the same set and grid, deduplicated,
/// preserving first-occurrence order.
ScenarioFamily combine_families(const std::vector<ScenarioFamily>& families);

/// Lazy view of the path ensemble: increments are recomputed on demand from
/// (seed, scenario, path, interval), never stored.
struct GPathEnsemble {
    ScenarioFamily family;
    size_t paths_per_scenario = 0;
    uint64_t seed = 0;

    double brownian_increment(uint32_t scenario, uint32_t path,
                              uint32_t interval) const;
    double qv_increment(uint32_t scenario, uint32_t interval) const;
};

GPathEnsemble sample_paths(const ScenarioFamily& family,
                           size_t paths_per_scenario, uint64_t seed);

struct SupEstimate {
    double estimate = 0.0;
    size_t argmax = 0;               // lowest index on ties
    std::vector<double> means;
    std::vector<double> std_errors;  // sample sd / sqrt(n), 0 for n = 1
};

/// Sublinear expectation estimate over per-scenario sample arrays.
SupEstimate sup_expectation(const std::vector<std::vector<double>>& samples);

/// Integral constants implied by the ambiguity bound: C_BDG = 4 sigma_high^2,
/// C_QV = sigma_high^4.
struct A4Defaults {
    double C_BDG = 0.0;
    double C_QV = 0.0;
};

A4Defaults defaults_for_A4(const AmbiguitySet& set);

}  // namespace gstab
