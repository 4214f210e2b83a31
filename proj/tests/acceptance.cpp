// End-to-end acceptance gate. Each criterion prints one [PASS]/[FAIL] line
// with its wall time; failure details and recorded variant discrepancies
// follow as indented notes. Exit status 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gstab/ambiguity.hpp"
#include "gstab/bihari.hpp"
#include "gstab/config.hpp"
#include "gstab/kernel.hpp"
#include "gstab/msde.hpp"
#include "gstab/stability.hpp"

using namespace gstab;

namespace {

struct Criterion {
    int id = 0;
    std::string label;
    bool pass = true;
    double seconds = 0.0;
    std::vector<std::string> notes;

    void check(bool cond, const std::string& detail) {
        if (!cond) {
            pass = false;
            if (notes.size() < 12) notes.push_back("check failed: " + detail);
        }
    }
    void note(const std::string& text) { notes.push_back(text); }
};

double rel(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<size_t>(n));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<size_t>(i)] =
            std::exp(llo + (lhi - llo) * i / (n - 1));
    return g;
}

// ---------------------------------------------------------------------------
// criterion bodies

void c1_theta_round_trip(Criterion& c) {
    const std::vector<std::pair<std::string, CombinedKernel>> kernels = {
        {"linear", CombinedKernel(OsgoodKernel::linear(1.0))},
        {"log_lipschitz", CombinedKernel(OsgoodKernel::log_lipschitz(1.0))},
        {"power", CombinedKernel(OsgoodKernel::power(1.0, 2.0))},
    };
    for (const auto& [name, kernel] : kernels) {
        const BihariTransform tr(kernel);
        for (double y : log_grid(1e-6, 1e2, 50)) {
            const double z = tr.theta(y);
            const ThetaInverse back = tr.theta_inverse(z);
            c.check(!back.overflow && !back.underflow,
                    name + ": inverse flagged at y=" + fmt(y));
            const double err =
                std::abs(back.value - y) / std::max(y, tr.y_star());
            c.check(err <= 1e-8, name + ": round-trip error " + fmt(err) +
                                     " at y=" + fmt(y));
        }
    }
}

void c2_closed_form_agreement(Criterion& c) {
    const std::vector<double> us = log_grid(1e-6, 10.0, 30);

    // linear
    {
        const StabilityModulus m(
            BihariTransform(CombinedKernel(OsgoodKernel::linear(1.0))), 4.0,
            0.7);
        for (double u : us) {
            const auto closed = m.psi_closed(u);
            const PsiValue numeric = m.psi_numeric(u);
            c.check(closed.has_value(), "linear: no closed form");
            c.check(rel(closed->value, numeric.value) <= 1e-6,
                    "linear: closed/numeric gap at u=" + fmt(u));
        }
    }
    // power
    for (double alpha : {1.5, 2.0, 3.0}) {
        const StabilityModulus m(
            BihariTransform(CombinedKernel(OsgoodKernel::power(1.0, alpha))),
            1.0, 1e-3);
        for (double u : us) {
            const auto closed = m.psi_closed(u);
            const PsiValue numeric = m.psi_numeric(u);
            c.check(closed.has_value() && !closed->overflow &&
                        !numeric.overflow,
                    "power alpha=" + fmt(alpha) + ": overflow at u=" + fmt(u));
            c.check(rel(closed->value, numeric.value) <= 1e-6,
                    "power alpha=" + fmt(alpha) + ": closed/numeric gap " +
                        fmt(rel(closed->value, numeric.value)) +
                        " at u=" + fmt(u));
        }
    }
    // log-Lipschitz principal branch against the numeric backend, plus the
    // recorded discrepancies of the two alternative algebraic variants
    {
        const double L = 1.0, C1 = 1.0, C0 = 1.0;
        const StabilityModulus m(
            BihariTransform(CombinedKernel(OsgoodKernel::log_lipschitz(L))),
            C1, C0);
        double worst_pos = 0.0, worst_dexp = 0.0;
        for (double u : us) {
            const PsiValue numeric = m.psi_numeric(u);
            const auto closed = m.psi_closed(u);
            c.check(closed.has_value(), "loglip: no closed form");
            c.check(rel(closed->value, numeric.value) <= 1e-6,
                    "loglip: closed/numeric gap " +
                        fmt(rel(closed->value, numeric.value)) +
                        " at u=" + fmt(u));
            const double y = C1 * u, shift = L * C0;
            worst_pos = std::max(
                worst_pos,
                rel(psi_loglip_positive_exponent(y, shift), numeric.value));
            worst_dexp = std::max(
                worst_dexp,
                rel(psi_loglip_double_exponential(y, shift), numeric.value));
        }
        c.note("recorded variant discrepancy vs numeric: positive-exponent " +
               fmt(worst_pos) + ", double-exponential " + fmt(worst_dexp));

        // C0 = 0 must collapse the modulus to its linear skeleton
        const StabilityModulus m0(
            BihariTransform(CombinedKernel(OsgoodKernel::log_lipschitz(L))),
            C1, 0.0);
        for (double u : us)
            c.check(rel(m0.psi(u).value, C1 * u) <= 1e-9,
                    "loglip: C0=0 reduction off at u=" + fmt(u));
    }
}

void c3_gronwall_specialization(Criterion& c) {
    std::mt19937_64 gen(20260822u);
    std::uniform_real_distribution<double> uL(0.2, 3.0);
    std::uniform_real_distribution<double> ulog(std::log(1e-4), std::log(2.0));
    std::uniform_int_distribution<int> usegs(1, 4);
    std::uniform_real_distribution<double> uval(0.05, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double L = uL(gen);
        const double a = std::exp(ulog(gen));
        const int segs = usegs(gen);
        std::vector<double> breaks(static_cast<size_t>(segs) + 1);
        std::vector<double> vals(static_cast<size_t>(segs));
        for (int i = 0; i <= segs; ++i)
            breaks[static_cast<size_t>(i)] = double(i) / segs;
        for (int i = 0; i < segs; ++i) vals[static_cast<size_t>(i)] = uval(gen);
        const WeightProfile beta =
            segs == 1 ? WeightProfile::constant(vals[0])
                      : WeightProfile::piecewise(breaks, vals);
        const CombinedKernel kernel(OsgoodKernel::linear(L));
        const EnvelopeResult r = solve_envelope(a, beta, kernel, 0.0, 1.0);
        const double expected = a * std::exp(L * beta.integral(0.0, 1.0));
        c.check(rel(r.value, expected) <= 1e-8,
                "trial " + std::to_string(trial) + ": envelope " +
                    fmt(r.value) + " vs " + fmt(expected));
    }
}

void c4_dual_route_consistency(Criterion& c) {
    const std::vector<std::pair<std::string, CombinedKernel>> kernels = {
        {"linear", CombinedKernel(OsgoodKernel::linear(1.0))},
        {"log_lipschitz", CombinedKernel(OsgoodKernel::log_lipschitz(1.0))},
        {"power", CombinedKernel(OsgoodKernel::power(1.0, 2.0))},
    };
    std::mt19937_64 gen(4u);
    std::uniform_int_distribution<int> usegs(1, 3);
    std::uniform_real_distribution<double> uval(0.05, 0.4);
    for (const auto& [name, kernel] : kernels) {
        for (double a : {1e-4, 1e-2, 1.0}) {
            for (int trial = 0; trial < 10; ++trial) {
                const int segs = usegs(gen);
                std::vector<double> breaks(static_cast<size_t>(segs) + 1);
                std::vector<double> vals(static_cast<size_t>(segs));
                for (int i = 0; i <= segs; ++i)
                    breaks[static_cast<size_t>(i)] = double(i) / segs;
                for (int i = 0; i < segs; ++i)
                    vals[static_cast<size_t>(i)] = uval(gen);
                const WeightProfile beta =
                    segs == 1 ? WeightProfile::constant(vals[0])
                              : WeightProfile::piecewise(breaks, vals);
                const EnvelopeResult r =
                    solve_envelope(a, beta, kernel, 0.0, 1.0);
                c.check(r.rel_gap <= 1e-6,
                        name + " a=" + fmt(a) + " trial " +
                            std::to_string(trial) + ": route gap " +
                            fmt(r.rel_gap));
            }
        }
    }
}

void c5_saturation_equality(Criterion& c) {
    const WeightProfile one = WeightProfile::constant(1.0);
    const WeightProfile zero = WeightProfile::constant(0.0);
    for (double u0 : {1e-4, 1e-2, 1.0}) {
        SaturatingOptions opts;
        opts.u0 = u0;
        opts.c_b = 2.0;
        const SaturatingFamily fam = saturating_family(
            CombinedKernel(OsgoodKernel::linear(1.0)), one, zero, opts);
        const double expected = u0 * std::exp(1.0);
        c.check(rel(fam.deviation.back(), expected) <= 1e-4,
                "linear u0=" + fmt(u0) + ": endpoint " +
                    fmt(fam.deviation.back()) + " vs " + fmt(expected));
        c.check(rel(fam.predicted.back(), expected) <= 1e-4,
                "linear u0=" + fmt(u0) + ": transform-route endpoint " +
                    fmt(fam.predicted.back()));
    }
    {
        // comparison rate 2 corresponds to c_b = 4 through
        // beta = c_b / (2 (T - t))
        SaturatingOptions opts;
        opts.u0 = 1e-2;
        opts.c_b = 4.0;
        const SaturatingFamily fam = saturating_family(
            CombinedKernel(OsgoodKernel::power(1.0, 2.0)), one, zero, opts);
        const double expected = 1.0 / 98.0;
        c.check(rel(fam.deviation.back(), expected) <= 1e-4,
                "power: endpoint " + fmt(fam.deviation.back()) + " vs " +
                    fmt(expected));
    }
}

void c6_drift_certificate(Criterion& c) {
    ExperimentConfig cfg =
        parse_config_file("fixtures/certificate_drift.json");
    const ValidationReport vr =
        validate_coefficients(cfg.coefficients, cfg.bounds, cfg.kernel,
                              cfg.kappa, cfg.K, cfg.grid);
    c.check(vr.ok, "coefficient validation rejected the fixture: " +
                       vr.violation);
    const ScenarioFamily family = cfg.scenario_family();
    const BihariTransform transform = cfg.transform();
    const GammaCollection constants = cfg.constants();
    for (double eta : {0.9, 0.5}) {
        cfg.eta.value = eta;
        const double gap2 = (cfg.xi.value - eta) * (cfg.xi.value - eta);
        const double pointwise_expected = gap2 * std::exp(-2.0);
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            const GPathEnsemble ensemble =
                sample_paths(family, cfg.paths_per_scenario, seed);
            const PairedRun run =
                simulate_pair(cfg.coefficients, cfg.xi, cfg.eta, ensemble);
            const CertificateResult cert =
                certify(run, transform, constants, 3.0);
            const std::string tag =
                "eta=" + fmt(eta) + " seed=" + std::to_string(seed);
            c.check(cert.verdict == Verdict::Certified,
                    tag + ": verdict " + to_string(cert.verdict));
            c.check(rel(run.pointwise.back(), pointwise_expected) <= 0.02,
                    tag + ": endpoint deviation " + fmt(run.pointwise.back()) +
                        " vs " + fmt(pointwise_expected));
            c.check(rel(run.u.back(), gap2) <= 1e-12,
                    tag + ": running sup " + fmt(run.u.back()) +
                        " vs initial gap " + fmt(gap2));
        }
    }
}

void c7_diffusive_certificate(Criterion& c) {
    ExperimentConfig cfg =
        parse_config_file("fixtures/certificate_diffusion.json");
    const ValidationReport vr =
        validate_coefficients(cfg.coefficients, cfg.bounds, cfg.kernel,
                              cfg.kappa, cfg.K, cfg.grid);
    c.check(vr.ok, "coefficient validation rejected the fixture: " +
                       vr.violation);
    const ScenarioFamily family = cfg.scenario_family();
    const BihariTransform transform = cfg.transform();
    const GammaCollection constants = cfg.constants();
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const GPathEnsemble ensemble =
            sample_paths(family, cfg.paths_per_scenario, seed);
        const PairedRun run =
            simulate_pair(cfg.coefficients, cfg.xi, cfg.eta, ensemble);
        const CertificateResult cert = certify(run, transform, constants, 3.0);
        c.check(cert.verdict == Verdict::Certified,
                "seed " + std::to_string(seed) + ": verdict " +
                    to_string(cert.verdict));
    }
}

void c8_modulus_properties(Criterion& c) {
    struct Case {
        std::string name;
        CombinedKernel kernel;
        double C1, C0;
    };
    const std::vector<Case> cases = {
        {"linear", CombinedKernel(OsgoodKernel::linear(1.0)), 4.0, 0.5},
        {"log_lipschitz", CombinedKernel(OsgoodKernel::log_lipschitz(1.0)),
         4.0, 0.5},
        {"power", CombinedKernel(OsgoodKernel::power(1.0, 2.0)), 4.0, 1e-3},
    };
    for (const Case& k : cases) {
        const StabilityModulus m(BihariTransform(k.kernel), k.C1, k.C0);
        const PsiValue at0 = m.psi(0.0);
        c.check(at0.value == 0.0 && !at0.overflow,
                k.name + ": psi(0) = " + fmt(at0.value));
        double prev = 0.0;
        for (double u : log_grid(1e-8, 1e2, 40)) {
            const PsiValue p = m.psi(u);
            c.check(!p.overflow,
                    k.name + ": unexpected blow-up at u=" + fmt(u));
            c.check(p.value >= prev * (1.0 - 1e-12),
                    k.name + ": decreasing at u=" + fmt(u));
            c.check(p.value / u >= k.C1 * (1.0 - 1e-12),
                    k.name + ": psi(u)/u = " + fmt(p.value / u) +
                        " below C1 at u=" + fmt(u));
            prev = p.value;
        }
        // anchor invariance of the numeric route
        for (double u : log_grid(1e-4, 10.0, 20)) {
            const double ref =
                StabilityModulus(BihariTransform(k.kernel, 1.0, 1e-12, 1e-12),
                                 k.C1, k.C0)
                    .psi_numeric(u)
                    .value;
            for (double ystar : {0.5, 2.0}) {
                const double alt = StabilityModulus(
                                       BihariTransform(k.kernel, ystar, 1e-12,
                                                       1e-12),
                                       k.C1, k.C0)
                                       .psi_numeric(u)
                                       .value;
                c.check(rel(alt, ref) <= 1e-9,
                        k.name + ": anchor dependence " + fmt(rel(alt, ref)) +
                            " at u=" + fmt(u) + " y*=" + fmt(ystar));
            }
        }
    }
}

void c9_amplification_partition(Criterion& c) {
    const CombinedKernel kernel(OsgoodKernel::linear(1.0));
    const BihariTransform transform(kernel);
    CoefficientBounds bounds;
    bounds.c_b = 1.0;
    const WeightProfile one = WeightProfile::constant(1.0);
    const WeightProfile zero = WeightProfile::constant(0.0);
    const GammaCollection constants =
        constant_collection(bounds, one, zero, 0.0, 1.0, 4.0, 4.0, 1.0);
    c.check(rel(constants.C0, 4.0) <= 1e-12,
            "integrated constant " + fmt(constants.C0) + " vs 4");

    AmplificationOptions opts;
    for (int i = 1; i <= 16; ++i) opts.deltas.push_back(i / 16.0);
    opts.u_grid = log_grid(1e-8, 1e4, 25);
    opts.tau_samples = 8;

    const AmplificationProfile prof = amplification(transform, constants, opts);
    c.check(prof.points.size() == opts.deltas.size(), "profile size mismatch");
    for (const AmplificationPoint& p : prof.points) {
        const double expected = 4.0 * std::exp(4.0 * p.delta);
        c.check(p.finite, "window blow-up at delta=" + fmt(p.delta));
        c.check(rel(p.Lambda, expected) <= 1e-6,
                "Lambda(" + fmt(p.delta) + ") = " + fmt(p.Lambda) + " vs " +
                    fmt(expected));
    }
    c.check(!prof.horizon.has_value(),
            "contraction horizon reported despite C1 = 4");
    c.check(!contraction_horizon(transform, constants, opts).has_value(),
            "direct horizon query reported a value despite C1 = 4");

    const GammaCollection contracting =
        constant_collection(bounds, one, zero, 0.0, 1.0, 0.5, 4.0, 1.0);
    const auto horizon = contraction_horizon(transform, contracting, opts);
    c.check(horizon.has_value(), "no contraction horizon under C1 = 0.5");
    if (horizon)
        c.check(rel(*horizon, 1.0 / 16.0) <= 1e-12,
                "horizon " + fmt(*horizon) + " vs smallest grid delta");

    const PartitionPropagation part = propagate_partition(
        transform, constants, {0.0, 0.25, 0.5, 0.75, 1.0}, 0.01, opts.u_grid,
        opts.tau_samples);
    const double expected_product = std::pow(4.0, 4) * std::exp(4.0);
    c.check(rel(part.product, expected_product) <= 1e-6,
            "partition product " + fmt(part.product) + " vs " +
                fmt(expected_product));
}

void c10_asymptotics(Criterion& c) {
    const StabilityModulus m(
        BihariTransform(CombinedKernel(OsgoodKernel::power(1.0, 2.0))), 1.0,
        1.0);
    double worst_printed = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const double u = std::pow(10.0, -k);
        const double ratio = m.psi(u).value / u;
        const double expected = 1.0 / (1.0 - u);
        c.check(rel(ratio, expected) <= 1e-6,
                "ratio " + fmt(ratio) + " vs " + fmt(expected) +
                    " at u=1e-" + std::to_string(k));
        worst_printed = std::max(worst_printed, rel(ratio, 1.0 / (1.0 + u)));
    }
    c.note("recorded discrepancy vs the 1/(1+u) variant: " +
           fmt(worst_printed));
    const AsymptoticsProbe probe = asymptotics_probe(m, 1e-8, 1e-1, 15);
    c.check(std::abs(probe.limit_ratio - 1.0) <= 1e-3,
            "limit ratio " + fmt(probe.limit_ratio));
    c.check(probe.ratio_exceeds_one, "ratio dipped below 1");
}

std::string slurp(const std::filesystem::path& p, bool& ok) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) {
        ok = false;
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void c11_determinism(Criterion& c) {
    const char* cli = std::getenv("GSTAB_CLI");
    c.check(cli != nullptr, "GSTAB_CLI is not set");
    if (!cli) return;
    const std::filesystem::path root =
        std::filesystem::temp_directory_path() / "gstab_acceptance";
    std::filesystem::remove_all(root);

    struct Job {
        std::string name;
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Job> jobs = {
        {"stability_csv",
         "stability --config fixtures/linear_drift.json",
         {"stability.json", "certificate.csv", "deviation.csv"}},
        {"modulus_csv", "modulus --config fixtures/modulus_loglip.json",
         {"modulus.json", "modulus.csv"}},
        {"modulus_json",
         "modulus --config fixtures/modulus_loglip.json --format json",
         {"modulus.json"}},
    };
    for (const Job& job : jobs) {
        std::vector<std::filesystem::path> outs;
        for (int rep = 0; rep < 2; ++rep) {
            const std::filesystem::path dir =
                root / (job.name + "_" + std::to_string(rep));
            std::filesystem::create_directories(dir);
            const std::string cmd = "GSTAB_LOG=quiet '" + std::string(cli) +
                                    "' " + job.args + " --out '" +
                                    dir.string() + "' >/dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            c.check(rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0,
                    job.name + " run " + std::to_string(rep) +
                        ": nonzero exit");
            outs.push_back(dir);
        }
        for (const std::string& f : job.files) {
            bool ok0 = true, ok1 = true;
            const std::string a = slurp(outs[0] / f, ok0);
            const std::string b = slurp(outs[1] / f, ok1);
            c.check(ok0 && ok1, job.name + ": missing output " + f);
            c.check(ok0 && ok1 && a == b && !a.empty(),
                    job.name + ": " + f + " differs between runs");
        }
    }
}

}  // namespace

int main() {
    struct Entry {
        int id;
        std::string label;
        double budget;   // seconds, 0 = none
        std::function<void(Criterion&)> body;
    };
    const std::vector<Entry> entries = {
        {1, "theta round-trip across built-in kernels", 2.0,
         c1_theta_round_trip},
        {2, "closed forms agree with the numeric backend", 0.0,
         c2_closed_form_agreement},
        {3, "linear-kernel envelope reproduces the exponential bound", 0.0,
         c3_gronwall_specialization},
        {4, "transform and ODE envelope routes agree", 0.0,
         c4_dual_route_consistency},
        {5, "saturating family attains the envelope", 5.0,
         c5_saturation_equality},
        {6, "drift fixture certifies across seeds", 60.0,
         c6_drift_certificate},
        {7, "diffusive fixture certifies across seeds", 90.0,
         c7_diffusive_certificate},
        {8, "modulus properties on probe grids", 0.0, c8_modulus_properties},
        {9, "window amplification and partition propagation", 0.0,
         c9_amplification_partition},
        {10, "small-argument asymptotics", 0.0, c10_asymptotics},
        {11, "byte-identical reruns through the CLI", 0.0, c11_determinism},
    };

    int failed = 0;
    for (const Entry& e : entries) {
        Criterion c;
        c.id = e.id;
        c.label = e.label;
        const auto start = std::chrono::steady_clock::now();
        try {
            e.body(c);
        } catch (const std::exception& ex) {
            c.pass = false;
            c.note(std::string("exception: ") + ex.what());
        }
        c.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
        if (e.budget > 0.0 && c.seconds >= e.budget) {
            c.pass = false;
            c.note("runtime " + fmt(c.seconds) + "s exceeds the " +
                   fmt(e.budget) + "s budget");
        }
        if (!c.pass) ++failed;
        std::printf("[%s] criterion %d: %s (%.2fs)\n",
                    c.pass ? "PASS" : "FAIL", c.id, c.label.c_str(),
                    c.seconds);
        for (const std::string& n : c.notes)
            std::printf("       - %s\n", n.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n",
                entries.size() - static_cast<size_t>(failed), entries.size());
    return failed == 0 ? 0 : 1;
}
