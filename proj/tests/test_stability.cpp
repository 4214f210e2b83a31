#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gstab/stability.hpp"

using namespace gstab;

namespace {

using Kind = CoefficientTerm::Kind;

CoefficientTerm scale_term(double c) {
    CoefficientTerm t;
    t.kind = Kind::Scale;
    t.c = c;
    return t;
}

InitialSpec det(double v) {
    InitialSpec s;
    s.kind = InitialSpec::Kind::Deterministic;
    s.value = v;
    return s;
}

PairedRun frozen_run(double xi, double eta, int steps,
                     const Coefficients& coeffs = {}) {
    const ScenarioFamily fam = generate_scenarios(
        AmbiguitySet{1.0, 1.0, 1}, ScenarioStrategy{}, TimeGrid{0.0, 1.0, steps});
    return simulate_pair(coeffs, det(xi), det(eta), sample_paths(fam, 2, 1));
}

GammaCollection drift_constants(const CombinedKernel&, double c_b, double C1,
                                double t = 0.0, double T = 1.0) {
    return constant_collection(
        CoefficientBounds{c_b, 0.0, 0.0, 0.0, 0.0, 0.0},
        WeightProfile::constant(1.0), WeightProfile::constant(0.0), t, T, C1,
        4.0, 1.0);
}

std::vector<double> default_u_grid() {
    std::vector<double> g(25);
    for (int i = 0; i < 25; ++i)
        g[size_t(i)] = 1e-8 * std::pow(1e12, double(i) / 24.0);
    return g;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("verdict names and exit codes") {
    CHECK(to_string(Verdict::Certified) == "Certified");
    CHECK(to_string(Verdict::ViolatedBeyondTolerance) ==
          "ViolatedBeyondTolerance");
    CHECK(to_string(Verdict::Inconclusive) == "Inconclusive");
    CHECK(exit_code(Verdict::Certified) == 0);
    CHECK(exit_code(Verdict::ViolatedBeyondTolerance) == 2);
    CHECK(exit_code(Verdict::Inconclusive) == 3);
}

TEST_CASE("equal initial data certifies against a zero bound") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const PairedRun run = frozen_run(0.5, 0.5, 16);
    const CertificateResult res =
        certify(run, BihariTransform(kernel), drift_constants(kernel, 1.0, 4.0));
    CHECK(res.verdict == Verdict::Certified);
    REQUIRE(res.points.size() == run.u.size());
    for (const CertificatePoint& p : res.points) {
        CHECK(p.u == 0.0);
        CHECK(p.bound == 0.0);
        CHECK(p.margin == 0.0);
    }
}

TEST_CASE("zero coefficients give the constant skeleton bound") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const PairedRun run = frozen_run(1.0, 0.0, 16);
    const GammaCollection constants = constant_collection(
        CoefficientBounds{}, WeightProfile::constant(1.0),
        WeightProfile::constant(0.0), 0.0, 1.0, 4.0, 4.0, 1.0);
    const CertificateResult res =
        certify(run, BihariTransform(kernel), constants);
    CHECK(res.verdict == Verdict::Certified);
    CHECK(res.tolerance_k == 3.0);
    for (const CertificatePoint& p : res.points) {
        CHECK(p.u == 1.0);
        CHECK(p.bound == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(p.margin == doctest::Approx(3.0).epsilon(1e-12));
    }
    CHECK(res.worst_margin == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("contractive drift certifies against the growing bound") {
    Coefficients c;
    c.b = scale_term(-1.0);
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const PairedRun run = frozen_run(1.0, 0.9, 128, c);
    const CertificateResult res =
        certify(run, BihariTransform(kernel), drift_constants(kernel, 1.0, 4.0));
    CHECK(res.verdict == Verdict::Certified);
    // running sup stays at the squared initial gap
    CHECK(res.points.front().u == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(res.points.back().u == doctest::Approx(0.01).epsilon(1e-12));
    // bound curve is the linear closed form 4 e^{4s} * 0.01, nondecreasing
    CHECK(res.points.back().bound ==
          doctest::Approx(0.04 * std::exp(4.0)).epsilon(1e-9));
    for (size_t i = 1; i < res.points.size(); ++i)
        CHECK(res.points[i].bound >= res.points[i - 1].bound);
}

TEST_CASE("an exceeded finite bound is a hard violation") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const PairedRun run = frozen_run(1.0, 0.0, 16);
    const GammaCollection constants = constant_collection(
        CoefficientBounds{}, WeightProfile::constant(1.0),
        WeightProfile::constant(0.0), 0.0, 1.0, 0.5, 4.0, 1.0);
    const CertificateResult res =
        certify(run, BihariTransform(kernel), constants);
    CHECK(res.verdict == Verdict::ViolatedBeyondTolerance);
    CHECK(res.worst_margin == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("a blown-up bound leaves the certificate inconclusive") {
    const CombinedKernel kernel(OsgoodKernel::power(1.0, 2.0));
    const PairedRun run = frozen_run(1.0, 0.0, 16);
    // C1 = 1, Gamma == 1: the bound 1/(1-s) blows up exactly at s = 1
    const CertificateResult res =
        certify(run, BihariTransform(kernel), drift_constants(kernel, 1.0, 1.0));
    CHECK(res.verdict == Verdict::Inconclusive);
    CHECK(std::isinf(res.points.back().bound));
    CHECK(res.points.front().bound == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("violation outranks a later blow-up") {
    const CombinedKernel kernel(OsgoodKernel::power(1.0, 2.0));
    const PairedRun run = frozen_run(1.0, 0.0, 16);
    // C1 = 0.5 makes the bound start at 0.5 < u(0) = 1 before blowing up
    const CertificateResult res =
        certify(run, BihariTransform(kernel), drift_constants(kernel, 4.0, 0.5));
    CHECK(res.verdict == Verdict::ViolatedBeyondTolerance);
}

TEST_CASE("certify rejects mismatched horizons") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const PairedRun run = frozen_run(1.0, 0.0, 8);
    CHECK_THROWS_AS(certify(run, BihariTransform(kernel),
                            drift_constants(kernel, 1.0, 4.0, 0.0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("amplification with a zero collection is the bare constant") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = constant_collection(
        CoefficientBounds{}, WeightProfile::constant(1.0),
        WeightProfile::constant(0.0), 0.0, 1.0, 4.0, 4.0, 1.0);
    AmplificationOptions opts;
    opts.deltas = {0.25, 0.5, 1.0};
    opts.u_grid = default_u_grid();
    const AmplificationProfile prof =
        amplification(BihariTransform(kernel), constants, opts);
    REQUIRE(prof.points.size() == 3);
    for (const AmplificationPoint& p : prof.points) {
        CHECK(p.finite);
        CHECK(p.Lambda == doctest::Approx(4.0).epsilon(1e-12));
    }
    CHECK_FALSE(prof.horizon.has_value());
}

TEST_CASE("amplification matches the linear closed form") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 4.0);
    AmplificationOptions opts;
    opts.deltas = {0.125, 0.25, 0.5, 0.75, 1.0};
    opts.u_grid = default_u_grid();
    const AmplificationProfile prof =
        amplification(BihariTransform(kernel), constants, opts);
    double prev = 0.0;
    for (const AmplificationPoint& p : prof.points) {
        CHECK(p.Lambda ==
              doctest::Approx(4.0 * std::exp(4.0 * p.delta)).epsilon(1e-9));
        CHECK(p.Lambda >= 4.0);
        CHECK(p.Lambda >= prev);
        prev = p.Lambda;
    }
    CHECK_FALSE(prof.horizon.has_value());
    CHECK_FALSE(contraction_horizon(BihariTransform(kernel), constants, opts)
                    .has_value());
}

TEST_CASE("a small structural constant opens a contraction horizon") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 0.5);
    AmplificationOptions opts;
    opts.deltas = {0.125, 0.25, 0.5, 1.0};
    opts.u_grid = default_u_grid();
    const AmplificationProfile prof =
        amplification(BihariTransform(kernel), constants, opts);
    for (const AmplificationPoint& p : prof.points)
        CHECK(p.Lambda ==
              doctest::Approx(0.5 * std::exp(0.5 * p.delta)).epsilon(1e-9));
    REQUIRE(prof.horizon.has_value());
    CHECK(*prof.horizon == 0.125);
}

TEST_CASE("amplification flags windows that blow up") {
    const CombinedKernel kernel(OsgoodKernel::power(1.0, 2.0));
    const GammaCollection constants = drift_constants(kernel, 4.0, 1.0);
    AmplificationOptions opts;
    opts.deltas = {1.0};
    opts.u_grid = {1e-4, 1.0};
    const AmplificationProfile prof =
        amplification(BihariTransform(kernel), constants, opts);
    CHECK_FALSE(prof.points[0].finite);
    CHECK(std::isinf(prof.points[0].Lambda));
    CHECK_FALSE(prof.horizon.has_value());
}

TEST_CASE("amplification input validation") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 4.0);
    AmplificationOptions opts;
    CHECK_THROWS_AS(amplification(BihariTransform(kernel), constants, opts),
                    std::invalid_argument);
    opts.deltas = {2.0};
    opts.u_grid = {1.0};
    CHECK_THROWS_AS(amplification(BihariTransform(kernel), constants, opts),
                    std::invalid_argument);
}

TEST_CASE("partition propagation: single interval reduces to the horizon") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 4.0);
    const PartitionPropagation p = propagate_partition(
        BihariTransform(kernel), constants, {0.0, 1.0}, 0.01,
        default_u_grid());
    REQUIRE(p.lambdas.size() == 1);
    CHECK(p.product == doctest::Approx(4.0 * std::exp(4.0)).epsilon(1e-9));
    CHECK(p.bound == doctest::Approx(0.04 * std::exp(4.0)).epsilon(1e-9));
    CHECK(p.sqrt_bound == doctest::Approx(std::sqrt(p.bound)));
}

TEST_CASE("partition propagation: zero collection multiplies bare constants") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = constant_collection(
        CoefficientBounds{}, WeightProfile::constant(1.0),
        WeightProfile::constant(0.0), 0.0, 1.0, 4.0, 4.0, 1.0);
    const PartitionPropagation p = propagate_partition(
        BihariTransform(kernel), constants, {0.0, 0.25, 0.5, 1.0}, 1.0,
        default_u_grid());
    CHECK(p.product == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("uniform four-interval partition matches the closed product") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 4.0);
    const PartitionPropagation p = propagate_partition(
        BihariTransform(kernel), constants, {0.0, 0.25, 0.5, 0.75, 1.0}, 1.0,
        default_u_grid());
    const double expected = std::pow(4.0, 4) * std::exp(4.0);
    CHECK(p.product == doctest::Approx(expected).epsilon(1e-9));
    CHECK(p.uniform_lambda ==
          doctest::Approx(4.0 * std::exp(1.0)).epsilon(1e-9));
    CHECK(p.uniform_bound == doctest::Approx(expected).epsilon(1e-9));
    CHECK_FALSE(p.contracting);
    CHECK(p.finite);

    // refining a partition only grows the product when the constant exceeds 1
    const PartitionPropagation coarse = propagate_partition(
        BihariTransform(kernel), constants, {0.0, 0.5, 1.0}, 1.0,
        default_u_grid());
    CHECK(coarse.product == doctest::Approx(16.0 * std::exp(4.0)).epsilon(1e-9));
    CHECK(p.product > coarse.product);
}

TEST_CASE("contracting partitions are recognized under a small constant") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 0.5);
    const PartitionPropagation p = propagate_partition(
        BihariTransform(kernel), constants, {0.0, 0.25, 0.5, 0.75, 1.0}, 1.0,
        default_u_grid());
    CHECK(p.contracting);
    CHECK(p.product < 1.0);
}

TEST_CASE("partition input validation") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const GammaCollection constants = drift_constants(kernel, 1.0, 4.0);
    const std::vector<double> grid = default_u_grid();
    CHECK_THROWS_AS(propagate_partition(BihariTransform(kernel), constants,
                                        {0.0}, 1.0, grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(propagate_partition(BihariTransform(kernel), constants,
                                        {0.0, 0.5, 0.25, 1.0}, 1.0, grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(propagate_partition(BihariTransform(kernel), constants,
                                        {0.0, 2.0}, 1.0, grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(propagate_partition(BihariTransform(kernel), constants,
                                        {0.0, 1.0}, -1.0, grid),
                    std::invalid_argument);
}

TEST_CASE("integrated map of a linear kernel is the scaled identity") {
    const CombinedKernel kernel(OsgoodKernel::linear(4.0));
    const SigmaTable table = integrated_map(kernel, 64, 2.0);
    REQUIRE(table.x.size() == 65);
    for (size_t i = 0; i < table.x.size(); ++i)
        CHECK(table.v[i] ==
              doctest::Approx(2.0 * table.x[i]).epsilon(1e-9));
}

TEST_CASE("saturating family follows the separable exponential") {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    for (double u0 : {1e-4, 1e-2, 1.0}) {
        SaturatingOptions opts;
        opts.u0 = u0;
        opts.c_b = 2.0;
        const SaturatingFamily fam = saturating_family(
            kernel, WeightProfile::constant(1.0), WeightProfile::constant(0.0),
            opts);
        CHECK(fam.deviation.front() == doctest::Approx(u0));
        CHECK(fam.deviation.back() ==
              doctest::Approx(u0 * std::exp(1.0)).epsilon(1e-6));
        CHECK(fam.predicted.back() ==
              doctest::Approx(u0 * std::exp(1.0)).epsilon(1e-6));
        CHECK(fam.endpoint_gap < 1e-4);
    }
}

TEST_CASE("saturating family hits the power closed form") {
    SaturatingOptions opts;
    opts.u0 = 0.01;
    opts.c_b = 4.0;   // shift c = 2 over the unit horizon
    const SaturatingFamily fam = saturating_family(
        CombinedKernel(OsgoodKernel::power(1.0, 2.0)),
        WeightProfile::constant(1.0), WeightProfile::constant(0.0), opts);
    CHECK(fam.deviation.back() ==
          doctest::Approx(1.0 / 98.0).epsilon(1e-5));
    CHECK(fam.predicted.back() ==
          doctest::Approx(1.0 / 98.0).epsilon(1e-5));
}

TEST_CASE("saturating family catalogs a drift entry on the integrated map") {
    SaturatingOptions opts;
    opts.c_b = 2.0;
    const SaturatingFamily fam = saturating_family(
        CombinedKernel(OsgoodKernel::linear(1.0)), WeightProfile::constant(1.0),
        WeightProfile::constant(0.0), opts);
    CHECK(fam.catalog.b.kind == Kind::SigmaMap);
    CHECK(fam.catalog.g.is_zero());
    CHECK(fam.catalog.h.is_zero());
    CHECK(fam.catalog.b.c ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // sigma for a linear kernel is sqrt(L) * u
    REQUIRE(fam.sigma_x.size() == fam.sigma_v.size());
    for (size_t i = 0; i < fam.sigma_x.size(); ++i)
        CHECK(fam.sigma_v[i] ==
              doctest::Approx(fam.sigma_x[i]).epsilon(1e-8));
}

TEST_CASE("saturating family rejects a degenerate start") {
    SaturatingOptions opts;
    opts.u0 = 0.0;
    CHECK_THROWS_AS(saturating_family(
                        CombinedKernel(OsgoodKernel::log_lipschitz(1.0)),
                        WeightProfile::constant(1.0),
                        WeightProfile::constant(0.0), opts),
                    std::invalid_argument);
    opts.u0 = 0.01;
    opts.c_b = 0.0;
    CHECK_THROWS_AS(saturating_family(
                        CombinedKernel(OsgoodKernel::log_lipschitz(1.0)),
                        WeightProfile::constant(1.0),
                        WeightProfile::constant(0.0), opts),
                    std::invalid_argument);
}

TEST_CASE("asymptotics: linear ratio is flat at the exponential factor") {
    const StabilityModulus mod(
        BihariTransform(CombinedKernel(OsgoodKernel::linear(1.0))), 4.0, 1.0);
    const AsymptoticsProbe probe = asymptotics_probe(mod, 1e-8, 0.1, 8);
    REQUIRE(probe.u.size() == 8);
    CHECK(probe.u.front() == doctest::Approx(0.1));
    CHECK(probe.u.back() == doctest::Approx(1e-8));
    for (double r : probe.ratio)
        CHECK(r == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    CHECK(probe.limit_ratio == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    CHECK(std::abs(probe.tail_slope) < 1e-6);
    CHECK(probe.ratio_exceeds_one);
}

TEST_CASE("asymptotics: power ratio follows the arbitrated closed form") {
    const StabilityModulus mod(
        BihariTransform(CombinedKernel(OsgoodKernel::power(1.0, 2.0))), 1.0,
        1.0);
    const AsymptoticsProbe probe = asymptotics_probe(mod, 1e-8, 0.1, 8);
    for (size_t i = 0; i < probe.u.size(); ++i)
        CHECK(probe.ratio[i] ==
              doctest::Approx(1.0 / (1.0 - probe.u[i])).epsilon(1e-6));
    CHECK(probe.limit_ratio == doctest::Approx(1.0).epsilon(1e-6));
    // ratio - 1 ~ u, so the log-log tail slope approaches alpha - 1 = 1
    CHECK(probe.tail_slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("asymptotics: log-lipschitz ratio diverges with a negative slope") {
    const StabilityModulus mod(
        BihariTransform(CombinedKernel(OsgoodKernel::log_lipschitz(1.0))), 1.0,
        1.0);
    const AsymptoticsProbe probe = asymptotics_probe(mod, 1e-8, 0.1, 8);
    for (size_t i = 1; i < probe.ratio.size(); ++i)
        CHECK(probe.ratio[i] > probe.ratio[i - 1]);
    CHECK(probe.tail_slope < -0.3);
    CHECK(probe.ratio_exceeds_one);

    CHECK_THROWS_AS(asymptotics_probe(mod, 0.1, 0.1, 8),
                    std::invalid_argument);
}

}  // TEST_SUITE
