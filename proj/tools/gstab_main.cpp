#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gstab/config.hpp"
#include "gstab/report.hpp"
#include "gstab/stability.hpp"

using nlohmann::ordered_json;

namespace {

using namespace gstab;

struct CommonArgs {
    std::string config;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = parse_config_file(args.config);
    if (args.seed) cfg.seed = *args.seed;
    if (args.out) cfg.output.dir = *args.out;
    if (args.format) cfg.output.format = *args.format;
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output.dir) / name).string();
}

// csv mode: write the CSV file; json mode: embed the table in the report
void emit_table(const ExperimentConfig& cfg, ordered_json& report,
                const std::string& name,
                const std::vector<std::string>& columns,
                const std::vector<std::vector<double>>& rows) {
    if (cfg.output.format == "json") {
        report[name] = table_json(columns, rows);
        return;
    }
    CsvBuilder csv(columns);
    for (const auto& r : rows) csv.row(r);
    write_file(out_path(cfg, name + ".csv"), csv.str());
}

void emit_report(const ExperimentConfig& cfg, const std::string& command,
                 const ordered_json& report) {
    write_file(out_path(cfg, command + ".json"), report.dump(2) + "\n");
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
        g[static_cast<size_t>(i)] =
            lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    return g;
}

ordered_json constants_json(const GammaCollection& c) {
    return ordered_json{{"C1", c.C1},     {"C0", c.C0},
                        {"C_BDG", c.C_BDG}, {"C_QV", c.C_QV},
                        {"scale", c.scale}, {"gamma_integral", c.integral}};
}

int cmd_modulus(const ExperimentConfig& cfg) {
    const StabilityModulus modulus = cfg.modulus_object();
    const std::vector<double> grid =
        log_grid(cfg.modulus.u_lo, cfg.modulus.u_hi, cfg.modulus.points);
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.size());
    for (double u : grid) {
        const PsiValue dispatched = modulus.psi(u);
        const PsiValue numeric = modulus.psi_numeric(u);
        const std::optional<PsiValue> closed = modulus.psi_closed(u);
        const double inf = std::numeric_limits<double>::infinity();
        const double vd = dispatched.overflow ? inf : dispatched.value;
        const double vn = numeric.overflow ? inf : numeric.value;
        const double vc =
            closed ? (closed->overflow ? inf : closed->value) : vn;
        const double rel =
            std::isfinite(vc) && std::isfinite(vn)
                ? std::abs(vc - vn) / std::max(std::abs(vn), 1e-300)
                : (std::isfinite(vc) == std::isfinite(vn) ? 0.0 : inf);
        rows.push_back({u, vd, vc, vn, rel});
    }
    ordered_json report = base_report("modulus", cfg.echo());
    report["constants"] = constants_json(cfg.constants());
    if (cfg.kernel.closed_form_family() == KernelFamily::LogLipschitz) {
        // algebraic variants recorded for comparison with the numeric arbiter
        const double L = cfg.kernel.closed_form_L();
        const double c = L * cfg.constants().C0;
        ordered_json variants = ordered_json::array();
        for (double u : grid) {
            const double y = cfg.C1 * u;
            variants.push_back(
                {{"u", u},
                 {"principal", psi_loglip_principal_branch(y, c)},
                 {"positive_exponent", psi_loglip_positive_exponent(y, c)},
                 {"double_exponential", psi_loglip_double_exponential(y, c)}});
        }
        report["log_lipschitz_variants"] = std::move(variants);
    }
    emit_table(cfg, report, "modulus",
               {"u", "psi", "closed_form", "numeric", "rel_diff"}, rows);
    emit_report(cfg, "modulus", report);
    return 0;
}

int cmd_bound(const ExperimentConfig& cfg) {
    const BihariTransform transform = cfg.transform();
    const GammaCollection constants = cfg.constants();
    const double a = cfg.bound.a;
    const double inf = std::numeric_limits<double>::infinity();
    const double z0 =
        a > 0.0 ? transform.theta(constants.C1 * a) : 0.0;
    std::vector<std::vector<double>> rows;
    bool any_blowup = false;
    for (int i = 0; i <= cfg.bound.curve_points; ++i) {
        const double s = cfg.grid.t + (cfg.grid.T - cfg.grid.t) * i /
                                          cfg.bound.curve_points;
        double bound = 0.0;
        if (a > 0.0) {
            const ThetaInverse inv =
                transform.theta_inverse(z0 + constants.C0_at(s));
            bound = inv.overflow ? inf : inv.value;
            any_blowup = any_blowup || inv.overflow;
        }
        rows.push_back({s, bound});
    }
    ordered_json report = base_report("bound", cfg.echo());
    report["constants"] = constants_json(constants);
    report["a"] = a;
    report["final_bound"] = rows.back()[1];
    report["blow_up"] = any_blowup;
    if (a > 0.0 && !any_blowup) {
        // independent envelope route as a consistency check on the curve
        const EnvelopeResult env =
            solve_envelope(constants.C1 * a, constants.gamma.scaled(constants.C1),
                           cfg.kernel, cfg.grid.t, cfg.grid.T, cfg.y_star);
        report["envelope_check"] = {{"transform", env.transform_value},
                                    {"ode", env.ode_value},
                                    {"rel_gap", env.rel_gap}};
    }
    emit_table(cfg, report, "bound", {"s", "bound"}, rows);
    emit_report(cfg, "bound", report);
    return 0;
}

// validation + paired simulation shared by simulate and stability
PairedRun run_simulation(const ExperimentConfig& cfg, ordered_json& report) {
    if (!cfg.validation.skip) {
        ValidationOptions vopts;
        vopts.samples = cfg.validation.samples;
        vopts.state_range = cfg.validation.state_range;
        vopts.growth_max = cfg.validation.growth_max;
        vopts.seed = cfg.validation.seed;
        const ValidationReport vr =
            validate_coefficients(cfg.coefficients, cfg.bounds, cfg.kernel,
                                  cfg.kappa, cfg.K, cfg.grid, vopts);
        if (!vr.ok) throw ConfigError("validation: " + vr.violation);
        report["validation"] = {{"samples", vr.samples},
                                {"worst_ratio", vr.worst_ratio}};
    }
    const ScenarioFamily family = cfg.scenario_family();
    log_info("scenario family: " + std::to_string(family.size()) +
             " controls, " + std::to_string(cfg.paths_per_scenario) +
             " paths each");
    const GPathEnsemble ensemble =
        sample_paths(family, cfg.paths_per_scenario, cfg.seed);
    PairedRun run = simulate_pair(cfg.coefficients, cfg.xi, cfg.eta, ensemble);
    report["ensemble"] = {{"scenarios", run.family_size},
                          {"paths_per_scenario", run.paths_per_scenario},
                          {"seed", run.seed}};
    report["initial_gap"] = {{"value", run.gap.value},
                             {"std_error", run.gap.std_error},
                             {"exact", run.gap.exact}};
    return run;
}

std::vector<std::vector<double>> deviation_rows(const PairedRun& run) {
    std::vector<std::vector<double>> rows;
    rows.reserve(run.times.size());
    for (size_t j = 0; j < run.times.size(); ++j)
        rows.push_back({run.times[j], run.u[j], run.u_stderr[j],
                        static_cast<double>(run.u_argmax[j]), run.pointwise[j],
                        run.pointwise_stderr[j]});
    return rows;
}

void export_ensemble(const ExperimentConfig& cfg, ordered_json& report) {
    const ScenarioFamily family = cfg.scenario_family();
    const GPathEnsemble ensemble =
        sample_paths(family, cfg.paths_per_scenario, cfg.seed);
    std::vector<std::vector<double>> rows;
    for (uint32_t sc = 0; sc < family.size(); ++sc)
        for (uint32_t p = 0; p < ensemble.paths_per_scenario; ++p)
            for (int i = 0; i < family.grid.steps; ++i)
                rows.push_back({static_cast<double>(sc),
                                static_cast<double>(p),
                                static_cast<double>(i),
                                ensemble.brownian_increment(
                                    sc, p, static_cast<uint32_t>(i)),
                                ensemble.qv_increment(
                                    sc, static_cast<uint32_t>(i))});
    emit_table(cfg, report, "ensemble",
               {"scenario", "path", "time_index", "dB", "dQV"}, rows);
}

int cmd_simulate(const ExperimentConfig& cfg) {
    ordered_json report = base_report("simulate", cfg.echo());
    const PairedRun run = run_simulation(cfg, report);
    report["scenario_final_mean"] = run.scenario_final_mean;
    report["sensitivity"] = run.sensitivity;
    emit_table(cfg, report, "deviation",
               {"s", "u", "u_stderr", "u_argmax", "pointwise",
                "pointwise_stderr"},
               deviation_rows(run));
    if (cfg.output.export_ensemble) export_ensemble(cfg, report);
    emit_report(cfg, "simulate", report);
    return 0;
}

int cmd_stability(const ExperimentConfig& cfg) {
    ordered_json report = base_report("stability", cfg.echo());
    const PairedRun run = run_simulation(cfg, report);
    const BihariTransform transform = cfg.transform();
    const GammaCollection constants = cfg.constants();
    const CertificateResult cert =
        certify(run, transform, constants, cfg.tolerance_k);

    std::vector<std::vector<double>> rows;
    rows.reserve(cert.points.size());
    for (const CertificatePoint& p : cert.points)
        rows.push_back({p.s, p.u, p.pointwise, p.bound, p.margin,
                        p.std_error});
    emit_table(cfg, report, "certificate",
               {"s", "u", "pointwise", "bound", "margin", "stderr"}, rows);
    emit_table(cfg, report, "deviation",
               {"s", "u", "u_stderr", "u_argmax", "pointwise",
                "pointwise_stderr"},
               deviation_rows(run));

    report["constants"] = constants_json(constants);
    report["tolerance_k"] = cert.tolerance_k;
    report["verdict"] = to_string(cert.verdict);
    report["worst"] = {{"index", cert.worst_index},
                       {"s", cert.points[cert.worst_index].s},
                       {"margin", cert.worst_margin}};

    // partition propagation alongside the direct horizon bound
    std::vector<double> knots = cfg.partition.knots;
    if (knots.empty()) {
        const int n = cfg.partition.uniform_intervals;
        for (int i = 0; i <= n; ++i)
            knots.push_back(cfg.grid.t +
                            (cfg.grid.T - cfg.grid.t) * i / n);
    }
    const double global_T = cert.points.back().bound;
    double min_bound = global_T;
    if (cert.gap.value > 0.0) {
        const std::vector<double> u_grid =
            log_grid(cfg.amplification.u_lo, cfg.amplification.u_hi,
                     cfg.amplification.u_points);
        const PartitionPropagation prop = propagate_partition(
            transform, constants, knots, cert.gap.value, u_grid,
            cfg.amplification.tau_samples);
        report["partition"] = {
            {"knots", prop.partition},
            {"lambdas", prop.lambdas},
            {"product", prop.product},
            {"bound", prop.bound},
            {"uniform_lambda", prop.uniform_lambda},
            {"uniform_bound", prop.uniform_bound},
            {"sqrt_bound", prop.sqrt_bound},
            {"sqrt_uniform_bound", prop.sqrt_uniform_bound},
            {"contracting", prop.contracting}};
        min_bound = std::min(min_bound, prop.bound);
    }
    report["bound_at_T"] = {{"direct", global_T},
                            {"min_with_partition", min_bound},
                            {"u_T", run.u.back()}};

    emit_report(cfg, "stability", report);
    std::cout << "verdict: " << to_string(cert.verdict) << "\n";
    return exit_code(cert.verdict);
}

int cmd_contraction(const ExperimentConfig& cfg) {
    const GammaCollection constants = cfg.constants();
    AmplificationOptions opts;
    opts.deltas = cfg.amplification.deltas;
    if (opts.deltas.empty()) {
        const double span = cfg.grid.T - cfg.grid.t;
        for (int i = 1; i <= 16; ++i) opts.deltas.push_back(span * i / 16);
    }
    opts.u_grid = log_grid(cfg.amplification.u_lo, cfg.amplification.u_hi,
                           cfg.amplification.u_points);
    opts.tau_samples = cfg.amplification.tau_samples;
    const AmplificationProfile prof =
        amplification(cfg.transform(), constants, opts);

    std::vector<std::vector<double>> rows;
    double min_lambda = std::numeric_limits<double>::infinity();
    for (const AmplificationPoint& p : prof.points) {
        rows.push_back({p.delta, p.Lambda, p.worst_u, p.worst_tau,
                        p.finite ? 1.0 : 0.0});
        min_lambda = std::min(min_lambda, p.Lambda);
    }
    ordered_json report = base_report("contraction", cfg.echo());
    report["constants"] = constants_json(constants);
    report["grids"] = {{"deltas", opts.deltas},
                       {"u_grid", opts.u_grid},
                       {"tau_samples", opts.tau_samples}};
    if (prof.horizon)
        report["contraction_horizon"] = *prof.horizon;
    else
        report["contraction_horizon"] = nullptr;
    report["min_lambda"] = min_lambda;
    emit_table(cfg, report, "contraction",
               {"delta", "lambda", "worst_u", "worst_tau", "finite"}, rows);
    emit_report(cfg, "contraction", report);
    return 0;
}

int cmd_saturate(const ExperimentConfig& cfg) {
    SaturatingOptions opts;
    opts.u0 = cfg.saturate.u0;
    opts.c_b = cfg.saturate.c_b;
    opts.t = cfg.grid.t;
    opts.T = cfg.grid.T;
    opts.curve_points = cfg.saturate.curve_points;
    opts.table_points = cfg.saturate.table_points;
    opts.table_max = cfg.saturate.table_max;
    const SaturatingFamily fam =
        saturating_family(cfg.kernel, cfg.kappa, cfg.K, opts);

    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < fam.times.size(); ++i)
        rows.push_back({fam.times[i], fam.deviation[i], fam.predicted[i]});
    std::vector<std::vector<double>> map_rows;
    for (size_t i = 0; i < fam.sigma_x.size(); ++i)
        map_rows.push_back({fam.sigma_x[i], fam.sigma_v[i]});

    const WeightProfile beta = cfg.kappa.plus(cfg.K).scaled(
        opts.c_b / (2.0 * (opts.T - opts.t)));
    ordered_json report = base_report("saturate", cfg.echo());
    report["u0"] = opts.u0;
    report["c_b"] = opts.c_b;
    report["shift"] = beta.integral(opts.t, opts.T);
    report["endpoint"] = {{"deviation", fam.deviation.back()},
                          {"predicted", fam.predicted.back()},
                          {"rel_gap", fam.endpoint_gap}};
    report["drift"] = {{"c", fam.catalog.b.c},
                       {"table_points", fam.sigma_x.size() - 1},
                       {"table_max", fam.sigma_x.back()}};
    emit_table(cfg, report, "saturate", {"s", "deviation", "predicted"},
               rows);
    emit_table(cfg, report, "saturate_map", {"u", "sigma"}, map_rows);
    emit_report(cfg, "saturate", report);
    return 0;
}

int cmd_asymptotics(const ExperimentConfig& cfg) {
    const AsymptoticsProbe probe =
        asymptotics_probe(cfg.modulus_object(), cfg.asymptotics.u_lo,
                          cfg.asymptotics.u_hi, cfg.asymptotics.points);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < probe.u.size(); ++i)
        rows.push_back({probe.u[i], probe.ratio[i]});
    ordered_json report = base_report("asymptotics", cfg.echo());
    report["limit_ratio"] = probe.limit_ratio;
    report["tail_slope"] = probe.tail_slope;
    report["ratio_exceeds_one"] = probe.ratio_exceeds_one;
    emit_table(cfg, report, "asymptotics", {"u", "ratio"}, rows);
    emit_report(cfg, "asymptotics", report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability modulus toolkit for mean-field dynamics under "
                 "volatility ambiguity"};
    app.require_subcommand(1);

    CommonArgs args;
    const std::vector<std::pair<std::string,
                                std::function<int(const ExperimentConfig&)>>>
        commands = {{"modulus", cmd_modulus},
                    {"bound", cmd_bound},
                    {"simulate", cmd_simulate},
                    {"stability", cmd_stability},
                    {"contraction", cmd_contraction},
                    {"saturate", cmd_saturate},
                    {"asymptotics", cmd_asymptotics}};
    std::function<int(const ExperimentConfig&)> selected;
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "experiment config (JSON)")
            ->required();
        sub->add_option("--seed", args.seed, "override the config seed");
        sub->add_option("--out", args.out, "override the output directory");
        sub->add_option("--format", args.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&selected, fn = fn] { selected = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const ExperimentConfig cfg = load(args);
        return selected(cfg);
    } catch (const gstab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
