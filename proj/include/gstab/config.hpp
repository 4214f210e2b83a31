#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gstab/ambiguity.hpp"
#include "gstab/bihari.hpp"
#include "gstab/msde.hpp"

// Declarative experiment configuration (JSON). Every field has a default, so
// a config file only states what differs; the fully resolved parameter set is
// echoed into each report for auditing. Parse errors carry the offending
// field path and exit the CLI with status 1.

namespace gstab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModulusSection {
    double u_lo = 1e-6;
    double u_hi = 10.0;
    int points = 30;
};

struct BoundSection {
    double a = 1e-2;              // initial squared gap
    int curve_points = 64;
};

struct AmplificationSection {
    std::vector<double> deltas;   // empty: 16 widths spanning (0, T - t]
    double u_lo = 1e-8;
    double u_hi = 1e4;
    int u_points = 25;
    int tau_samples = 8;
};

struct PartitionSection {
    std::vector<double> knots;    // empty: uniform_intervals on [t, T]
    int uniform_intervals = 4;
};

struct SaturateSection {
    double u0 = 0.01;
    double c_b = 2.0;
    int curve_points = 64;
    int table_points = 128;
    double table_max = 4.0;
};

struct AsymptoticsSection {
    double u_lo = 1e-8;
    double u_hi = 0.1;
    int points = 8;
};

struct ValidationSection {
    bool skip = false;
    size_t samples = 256;
    double state_range = 10.0;
    double growth_max = 1e6;
    uint64_t seed = 0;
};

struct OutputSection {
    std::string dir = "out";
    std::string format = "csv";   // csv: CSV curves + JSON report; json: all-JSON
    bool export_ensemble = false;
};

struct ExperimentConfig {
    CombinedKernel kernel{OsgoodKernel::linear(1.0)};
    double y_star = 1.0;
    WeightProfile kappa = WeightProfile::constant(1.0);
    WeightProfile K = WeightProfile::constant(0.0);
    CoefficientBounds bounds{1.0, 0.0, 0.0, 1.0, 1.0, 1.0};
    double C1 = 4.0;
    std::optional<double> C_BDG;   // A4 defaults from ambiguity when unset
    std::optional<double> C_QV;
    AmbiguitySet ambiguity{1.0, 1.0, 1};
    TimeGrid grid{0.0, 1.0, 256};
    std::vector<ScenarioStrategy> strategies{ScenarioStrategy{}};
    InitialSpec xi;
    InitialSpec eta;
    size_t paths_per_scenario = 1000;
    uint64_t seed = 1;
    double tolerance_k = 3.0;
    Coefficients coefficients;
    ValidationSection validation;
    ModulusSection modulus;
    BoundSection bound;
    AmplificationSection amplification;
    PartitionSection partition;
    SaturateSection saturate;
    AsymptoticsSection asymptotics;
    OutputSection output;

    double resolved_C_BDG() const;
    double resolved_C_QV() const;
    GammaCollection constants() const;
    BihariTransform transform() const;
    StabilityModulus modulus_object() const;
    ScenarioFamily scenario_family() const;

    /// Fully resolved parameter set for the report audit trail (excludes the
    /// output section, which never influences results).
    nlohmann::ordered_json echo() const;
};

ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace gstab
