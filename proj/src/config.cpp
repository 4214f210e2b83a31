#include "gstab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gstab/stability.hpp"

namespace gstab {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) fail(path + "/" + item.key(), "unknown field");
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_num(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double get_num(const json& j, const std::string& path, const char* key,
               double dflt) {
    const json* v = find(j, key);
    return v ? as_num(*v, path + "/" + key) : dflt;
}

double require_num(const json& j, const std::string& path, const char* key) {
    const json* v = find(j, key);
    if (!v) fail(path, std::string("missing required field '") + key + "'");
    return as_num(*v, path + "/" + key);
}

int get_int(const json& j, const std::string& path, const char* key,
            int dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer())
        fail(path + "/" + key, "expected an integer");
    return v->get<int>();
}

uint64_t get_u64(const json& j, const std::string& path, const char* key,
                 uint64_t dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<int64_t>() < 0 && !v->is_number_unsigned()))
        fail(path + "/" + key, "expected a nonnegative integer");
    return v->get<uint64_t>();
}

bool get_bool(const json& j, const std::string& path, const char* key,
              bool dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(path + "/" + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_string()) fail(path + "/" + key, "expected a string");
    return v->get<std::string>();
}

// check_extra: the top-level kernel object carries second/y_star, which the
// caller has already vetted; nested kernels only allow the family fields.
OsgoodKernel parse_kernel_one(const json& j, const std::string& path,
                              bool check_extra = true) {
    if (!j.is_object()) fail(path, "expected an object");
    if (check_extra) check_keys(j, path, {"family", "L", "alpha", "samples"});
    const std::string fam = get_str(j, path, "family", "linear");
    try {
        if (fam == "linear")
            return OsgoodKernel::linear(get_num(j, path, "L", 1.0));
        if (fam == "log_lipschitz")
            return OsgoodKernel::log_lipschitz(get_num(j, path, "L", 1.0));
        if (fam == "power")
            return OsgoodKernel::power(get_num(j, path, "L", 1.0),
                                       get_num(j, path, "alpha", 2.0));
        if (fam == "custom") {
            const json* s = find(j, "samples");
            if (!s || !s->is_array())
                fail(path + "/samples",
                     "custom kernels need an array of [r, rho] pairs");
            std::vector<double> rs, rhos;
            for (const auto& pair : *s) {
                if (!pair.is_array() || pair.size() != 2)
                    fail(path + "/samples", "entries must be [r, rho] pairs");
                rs.push_back(as_num(pair[0], path + "/samples"));
                rhos.push_back(as_num(pair[1], path + "/samples"));
            }
            return OsgoodKernel::custom(std::move(rs), std::move(rhos));
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + "/family",
         "unknown kernel family '" + fam +
             "' (expected linear, log_lipschitz, power, custom)");
}

WeightProfile parse_weight(const json& j, const std::string& path) {
    try {
        if (j.is_number()) return WeightProfile::constant(j.get<double>());
        if (!j.is_object())
            fail(path, "expected a number or {constant} / "
                       "{breakpoints, values}");
        check_keys(j, path, {"constant", "breakpoints", "values"});
        if (find(j, "constant"))
            return WeightProfile::constant(require_num(j, path, "constant"));
        const json* b = find(j, "breakpoints");
        const json* v = find(j, "values");
        if (!b || !v || !b->is_array() || !v->is_array())
            fail(path, "piecewise weights need breakpoints and values arrays");
        std::vector<double> breaks, vals;
        for (const auto& x : *b)
            breaks.push_back(as_num(x, path + "/breakpoints"));
        for (const auto& x : *v)
            vals.push_back(as_num(x, path + "/values"));
        return WeightProfile::piecewise(std::move(breaks), std::move(vals));
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

InitialSpec parse_initial(const json& j, const std::string& path,
                          bool is_eta) {
    InitialSpec spec;
    if (j.is_number()) {
        spec.kind = InitialSpec::Kind::Deterministic;
        spec.value = j.get<double>();
        return spec;
    }
    if (!j.is_object()) fail(path, "expected a number or an object");
    check_keys(j, path,
               {"kind", "value", "lo", "hi", "mean", "sd", "offset"});
    const std::string kind = get_str(j, path, "kind", "deterministic");
    if (kind == "deterministic") {
        spec.kind = InitialSpec::Kind::Deterministic;
        spec.value = get_num(j, path, "value", 0.0);
    } else if (kind == "uniform") {
        spec.kind = InitialSpec::Kind::Uniform;
        spec.value = require_num(j, path, "lo");
        spec.value2 = require_num(j, path, "hi");
        if (!(spec.value2 >= spec.value))
            fail(path, "uniform initial needs hi >= lo");
    } else if (kind == "normal") {
        spec.kind = InitialSpec::Kind::Normal;
        spec.value = require_num(j, path, "mean");
        spec.value2 = require_num(j, path, "sd");
        if (!(spec.value2 >= 0.0)) fail(path, "normal initial needs sd >= 0");
    } else if (kind == "offset_of_xi") {
        if (!is_eta)
            fail(path + "/kind", "offset_of_xi is only valid for eta");
        spec.kind = InitialSpec::Kind::OffsetOfXi;
        spec.value = require_num(j, path, "offset");
    } else {
        fail(path + "/kind",
             "unknown initial kind '" + kind +
                 "' (expected deterministic, uniform, normal, offset_of_xi)");
    }
    return spec;
}

ScenarioStrategy parse_strategy(const json& j, const std::string& path) {
    ScenarioStrategy s;
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path, {"strategy", "switches", "levels", "count", "seed"});
    const std::string name = get_str(j, path, "strategy", "extremes");
    if (name == "extremes") {
        s.kind = ScenarioStrategy::Kind::Extremes;
    } else if (name == "bang_bang") {
        s.kind = ScenarioStrategy::Kind::BangBang;
        s.switches = get_int(j, path, "switches", 1);
        if (s.switches < 0) fail(path + "/switches", "must be >= 0");
    } else if (name == "latin_grid") {
        s.kind = ScenarioStrategy::Kind::LatinGrid;
        s.levels = get_int(j, path, "levels", 3);
        if (s.levels < 1) fail(path + "/levels", "must be >= 1");
    } else if (name == "randomized") {
        s.kind = ScenarioStrategy::Kind::RandomizedControls;
        s.count = get_int(j, path, "count", 8);
        if (s.count < 0) fail(path + "/count", "must be >= 0");
        s.seed = get_u64(j, path, "seed", 0);
    } else {
        fail(path + "/strategy",
             "unknown strategy '" + name +
                 "' (expected extremes, bang_bang, latin_grid, randomized)");
    }
    return s;
}

CoefficientTerm scale_term(double c) {
    CoefficientTerm t;
    t.kind = CoefficientTerm::Kind::Scale;
    t.c = c;
    return t;
}

CoefficientTerm map_term(double scale, SigmaTable table) {
    CoefficientTerm t;
    t.kind = CoefficientTerm::Kind::SigmaMap;
    t.c = scale;
    t.sigma_x = std::move(table.x);
    t.sigma_v = std::move(table.v);
    return t;
}

Coefficients parse_coefficients(const json& j, const std::string& path,
                                const ExperimentConfig& cfg) {
    Coefficients out;
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path,
               {"catalog", "rate", "gamma", "qv_rate", "L", "alpha", "scale",
                "mean_slot", "table_points", "table_max"});
    const std::string slot = get_str(j, path, "mean_slot", "pointwise_state");
    if (slot == "pointwise_state")
        out.mean_slot = MeanSlotMode::PointwiseState;
    else if (slot == "ensemble_mean")
        out.mean_slot = MeanSlotMode::EnsembleMean;
    else
        fail(path + "/mean_slot",
             "expected pointwise_state or ensemble_mean");

    const std::string name = get_str(j, path, "catalog", "zero");
    const int table_points = get_int(j, path, "table_points", 128);
    const double table_max = get_num(j, path, "table_max", 4.0);
    const auto build = [&]() {
        if (name == "zero") return;
        if (name == "linear_drift") {
            out.b = scale_term(require_num(j, path, "rate"));
            const double gamma = get_num(j, path, "gamma", 0.0);
            const double qv = get_num(j, path, "qv_rate", 0.0);
            if (gamma != 0.0) out.g = scale_term(gamma);
            if (qv != 0.0) out.h = scale_term(qv);
            return;
        }
        if (name == "pure_diffusion") {
            out.g = scale_term(require_num(j, path, "gamma"));
            return;
        }
        if (name == "h_only") {
            out.h = scale_term(require_num(j, path, "rate"));
            return;
        }
        if (name == "log_lipschitz_drift" || name == "power_drift") {
            const double L = get_num(j, path, "L", 1.0);
            OsgoodKernel k =
                name == "power_drift"
                    ? OsgoodKernel::power(L, get_num(j, path, "alpha", 2.0))
                    : OsgoodKernel::log_lipschitz(L);
            out.b = map_term(get_num(j, path, "scale", 1.0),
                             integrated_map(CombinedKernel(std::move(k)),
                                            table_points, table_max));
            return;
        }
        if (name == "saturating_drift") {
            SaturatingOptions opts;
            opts.c_b = cfg.bounds.c_b;
            opts.t = cfg.grid.t;
            opts.T = cfg.grid.T;
            opts.table_points = table_points;
            opts.table_max = table_max;
            opts.curve_points = 1;   // only the map and factors matter here
            const SaturatingFamily fam =
                saturating_family(cfg.kernel, cfg.kappa, cfg.K, opts);
            out.b = fam.catalog.b;
            return;
        }
        fail(path + "/catalog",
             "unknown catalog entry '" + name +
                 "' (expected zero, linear_drift, pure_diffusion, h_only, "
                 "log_lipschitz_drift, power_drift, saturating_drift)");
    };
    try {
        build();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return out;
}

json echo_kernel_one(const OsgoodKernel& k) {
    json j;
    j["family"] = to_string(k.family());
    if (k.family() == KernelFamily::Custom) {
        json samples = json::array();
        for (size_t i = 0; i < k.sample_r().size(); ++i)
            samples.push_back({k.sample_r()[i], k.sample_rho()[i]});
        j["samples"] = std::move(samples);
    } else {
        j["L"] = k.L();
        if (k.family() == KernelFamily::Power) j["alpha"] = k.alpha();
    }
    return j;
}

json echo_weight(const WeightProfile& w) {
    if (w.is_constant()) return json{{"constant", w.values().front()}};
    return json{{"breakpoints", w.breakpoints()}, {"values", w.values()}};
}

json echo_initial(const InitialSpec& s) {
    switch (s.kind) {
        case InitialSpec::Kind::Deterministic:
            return json{{"kind", "deterministic"}, {"value", s.value}};
        case InitialSpec::Kind::Uniform:
            return json{{"kind", "uniform"}, {"lo", s.value},
                        {"hi", s.value2}};
        case InitialSpec::Kind::Normal:
            return json{{"kind", "normal"}, {"mean", s.value},
                        {"sd", s.value2}};
        case InitialSpec::Kind::OffsetOfXi:
            return json{{"kind", "offset_of_xi"}, {"offset", s.value}};
    }
    return json();
}

json echo_term(const CoefficientTerm& t) {
    json j;
    switch (t.kind) {
        case CoefficientTerm::Kind::Zero:
            j["kind"] = "zero";
            return j;
        case CoefficientTerm::Kind::Scale:
            j["kind"] = "scale";
            break;
        case CoefficientTerm::Kind::MeanGap:
            j["kind"] = "mean_gap";
            j["offset"] = t.d;
            break;
        case CoefficientTerm::Kind::SigmaMap:
            j["kind"] = "sigma_map";
            j["table_points"] = t.sigma_x.empty() ? 0 : t.sigma_x.size() - 1;
            j["table_max"] = t.sigma_x.empty() ? 0.0 : t.sigma_x.back();
            break;
    }
    j["c"] = t.c;
    if (t.time_factor) j["time_factor"] = echo_weight(*t.time_factor);
    return j;
}

}  // namespace

double ExperimentConfig::resolved_C_BDG() const {
    return C_BDG ? *C_BDG : defaults_for_A4(ambiguity).C_BDG;
}

double ExperimentConfig::resolved_C_QV() const {
    return C_QV ? *C_QV : defaults_for_A4(ambiguity).C_QV;
}

GammaCollection ExperimentConfig::constants() const {
    return constant_collection(bounds, kappa, K, grid.t, grid.T, C1,
                               resolved_C_BDG(), resolved_C_QV());
}

BihariTransform ExperimentConfig::transform() const {
    return BihariTransform(kernel, y_star);
}

StabilityModulus ExperimentConfig::modulus_object() const {
    return StabilityModulus(transform(), C1, constants().C0);
}

ScenarioFamily ExperimentConfig::scenario_family() const {
    std::vector<ScenarioFamily> families;
    families.reserve(strategies.size());
    for (const ScenarioStrategy& s : strategies)
        families.push_back(generate_scenarios(ambiguity, s, grid));
    return combine_families(families);
}

nlohmann::ordered_json ExperimentConfig::echo() const {
    json j;
    json kj = echo_kernel_one(kernel.part1());
    if (kernel.part2()) kj["second"] = echo_kernel_one(*kernel.part2());
    kj["y_star"] = y_star;
    j["kernel"] = std::move(kj);
    j["weights"] = {{"kappa", echo_weight(kappa)}, {"K", echo_weight(K)}};
    j["bounds"] = {{"c_b", bounds.c_b},     {"c_h", bounds.c_h},
                   {"c_g", bounds.c_g},     {"beta_b", bounds.beta_b},
                   {"beta_h", bounds.beta_h}, {"beta_g", bounds.beta_g}};
    j["constants"] = {{"C1", C1},
                      {"C_BDG", resolved_C_BDG()},
                      {"C_QV", resolved_C_QV()},
                      {"C0", constants().C0}};
    j["ambiguity"] = {{"sigma_low", ambiguity.sigma_low},
                      {"sigma_high", ambiguity.sigma_high}};
    j["grid"] = {{"t", grid.t}, {"T", grid.T}, {"steps", grid.steps}};
    json sj = json::array();
    for (const ScenarioStrategy& s : strategies) {
        switch (s.kind) {
            case ScenarioStrategy::Kind::Extremes:
                sj.push_back({{"strategy", "extremes"}});
                break;
            case ScenarioStrategy::Kind::BangBang:
                sj.push_back(
                    {{"strategy", "bang_bang"}, {"switches", s.switches}});
                break;
            case ScenarioStrategy::Kind::LatinGrid:
                sj.push_back(
                    {{"strategy", "latin_grid"}, {"levels", s.levels}});
                break;
            case ScenarioStrategy::Kind::RandomizedControls:
                sj.push_back({{"strategy", "randomized"},
                              {"count", s.count},
                              {"seed", s.seed}});
                break;
        }
    }
    j["scenarios"] = std::move(sj);
    j["initial"] = {{"xi", echo_initial(xi)}, {"eta", echo_initial(eta)}};
    j["paths_per_scenario"] = paths_per_scenario;
    j["seed"] = seed;
    j["tolerance_k"] = tolerance_k;
    std::string slot = coefficients.mean_slot == MeanSlotMode::EnsembleMean
                           ? "ensemble_mean"
                           : "pointwise_state";
    j["coefficients"] = {{"b", echo_term(coefficients.b)},
                         {"h", echo_term(coefficients.h)},
                         {"g", echo_term(coefficients.g)},
                         {"mean_slot", slot}};
    j["validation"] = {{"skip", validation.skip},
                       {"samples", validation.samples},
                       {"state_range", validation.state_range},
                       {"growth_max", validation.growth_max},
                       {"seed", validation.seed}};
    return j;
}

ExperimentConfig parse_config(const nlohmann::ordered_json& j) {
    if (!j.is_object()) fail("/", "expected a JSON object");
    check_keys(j, "",
               {"kernel", "weights", "bounds", "constants", "ambiguity",
                "grid", "scenarios", "initial", "paths_per_scenario", "seed",
                "tolerance_k", "coefficients", "validation", "modulus",
                "bound", "amplification", "partition", "saturate",
                "asymptotics", "output"});
    ExperimentConfig cfg;

    if (const json* k = find(j, "kernel")) {
        if (!k->is_object()) fail("/kernel", "expected an object");
        check_keys(*k, "/kernel",
                   {"family", "L", "alpha", "samples", "second", "y_star"});
        OsgoodKernel first = parse_kernel_one(*k, "/kernel", false);
        std::optional<OsgoodKernel> second;
        if (const json* s = find(*k, "second"))
            second = parse_kernel_one(*s, "/kernel/second");
        cfg.kernel = CombinedKernel(std::move(first), std::move(second));
        cfg.y_star = get_num(*k, "/kernel", "y_star", 1.0);
        if (!(cfg.y_star > 0.0)) fail("/kernel/y_star", "must be > 0");
    }

    if (const json* w = find(j, "weights")) {
        if (!w->is_object()) fail("/weights", "expected an object");
        check_keys(*w, "/weights", {"kappa", "K"});
        if (const json* kp = find(*w, "kappa"))
            cfg.kappa = parse_weight(*kp, "/weights/kappa");
        if (const json* kk = find(*w, "K"))
            cfg.K = parse_weight(*kk, "/weights/K");
    }

    if (const json* b = find(j, "bounds")) {
        if (!b->is_object()) fail("/bounds", "expected an object");
        check_keys(*b, "/bounds",
                   {"c_b", "c_h", "c_g", "beta_b", "beta_h", "beta_g"});
        cfg.bounds.c_b = get_num(*b, "/bounds", "c_b", 1.0);
        cfg.bounds.c_h = get_num(*b, "/bounds", "c_h", 0.0);
        cfg.bounds.c_g = get_num(*b, "/bounds", "c_g", 0.0);
        cfg.bounds.beta_b = get_num(*b, "/bounds", "beta_b", 1.0);
        cfg.bounds.beta_h = get_num(*b, "/bounds", "beta_h", 1.0);
        cfg.bounds.beta_g = get_num(*b, "/bounds", "beta_g", 1.0);
        try {
            cfg.bounds.validate();
        } catch (const std::invalid_argument& e) {
            fail("/bounds", e.what());
        }
    }

    if (const json* c = find(j, "constants")) {
        if (!c->is_object()) fail("/constants", "expected an object");
        check_keys(*c, "/constants", {"C1", "C_BDG", "C_QV"});
        cfg.C1 = get_num(*c, "/constants", "C1", 4.0);
        if (!(cfg.C1 > 0.0)) fail("/constants/C1", "must be > 0");
        if (find(*c, "C_BDG")) {
            cfg.C_BDG = require_num(*c, "/constants", "C_BDG");
            if (!(*cfg.C_BDG >= 0.0)) fail("/constants/C_BDG", "must be >= 0");
        }
        if (find(*c, "C_QV")) {
            cfg.C_QV = require_num(*c, "/constants", "C_QV");
            if (!(*cfg.C_QV >= 0.0)) fail("/constants/C_QV", "must be >= 0");
        }
    }

    if (const json* a = find(j, "ambiguity")) {
        if (!a->is_object()) fail("/ambiguity", "expected an object");
        check_keys(*a, "/ambiguity", {"sigma_low", "sigma_high"});
        cfg.ambiguity.sigma_low = require_num(*a, "/ambiguity", "sigma_low");
        cfg.ambiguity.sigma_high = require_num(*a, "/ambiguity", "sigma_high");
    }
    try {
        cfg.ambiguity.validate();
    } catch (const std::invalid_argument& e) {
        fail("/ambiguity", e.what());
    }

    if (const json* g = find(j, "grid")) {
        if (!g->is_object()) fail("/grid", "expected an object");
        check_keys(*g, "/grid", {"t", "T", "steps"});
        cfg.grid.t = get_num(*g, "/grid", "t", 0.0);
        cfg.grid.T = get_num(*g, "/grid", "T", 1.0);
        cfg.grid.steps = get_int(*g, "/grid", "steps", 256);
    }
    try {
        cfg.grid.validate();
    } catch (const std::invalid_argument& e) {
        fail("/grid", e.what());
    }

    if (const json* s = find(j, "scenarios")) {
        if (!s->is_array() || s->empty())
            fail("/scenarios", "expected a nonempty array");
        cfg.strategies.clear();
        for (size_t i = 0; i < s->size(); ++i)
            cfg.strategies.push_back(parse_strategy(
                (*s)[i], "/scenarios/" + std::to_string(i)));
    }

    if (const json* ini = find(j, "initial")) {
        if (!ini->is_object()) fail("/initial", "expected an object");
        check_keys(*ini, "/initial", {"xi", "eta"});
        if (const json* x = find(*ini, "xi"))
            cfg.xi = parse_initial(*x, "/initial/xi", false);
        if (const json* e = find(*ini, "eta"))
            cfg.eta = parse_initial(*e, "/initial/eta", true);
    }

    if (const json* p = find(j, "paths_per_scenario")) {
        if (!p->is_number_integer() || p->get<int64_t>() < 1)
            fail("/paths_per_scenario", "expected a positive integer");
        cfg.paths_per_scenario = p->get<uint64_t>();
    }
    cfg.seed = get_u64(j, "", "seed", 1);
    cfg.tolerance_k = get_num(j, "", "tolerance_k", 3.0);
    if (!(cfg.tolerance_k >= 0.0)) fail("/tolerance_k", "must be >= 0");

    if (const json* co = find(j, "coefficients"))
        cfg.coefficients = parse_coefficients(*co, "/coefficients", cfg);

    if (const json* v = find(j, "validation")) {
        if (!v->is_object()) fail("/validation", "expected an object");
        check_keys(*v, "/validation",
                   {"skip", "samples", "state_range", "growth_max", "seed"});
        cfg.validation.skip = get_bool(*v, "/validation", "skip", false);
        const int n = get_int(*v, "/validation", "samples", 256);
        if (n < 1) fail("/validation/samples", "must be >= 1");
        cfg.validation.samples = static_cast<size_t>(n);
        cfg.validation.state_range =
            get_num(*v, "/validation", "state_range", 10.0);
        cfg.validation.growth_max =
            get_num(*v, "/validation", "growth_max", 1e6);
        cfg.validation.seed = get_u64(*v, "/validation", "seed", 0);
    }

    if (const json* m = find(j, "modulus")) {
        if (!m->is_object()) fail("/modulus", "expected an object");
        check_keys(*m, "/modulus", {"u_lo", "u_hi", "points"});
        cfg.modulus.u_lo = get_num(*m, "/modulus", "u_lo", 1e-6);
        cfg.modulus.u_hi = get_num(*m, "/modulus", "u_hi", 10.0);
        cfg.modulus.points = get_int(*m, "/modulus", "points", 30);
        if (!(0.0 < cfg.modulus.u_lo && cfg.modulus.u_lo < cfg.modulus.u_hi))
            fail("/modulus", "need 0 < u_lo < u_hi");
        if (cfg.modulus.points < 2) fail("/modulus/points", "must be >= 2");
    }

    if (const json* b = find(j, "bound")) {
        if (!b->is_object()) fail("/bound", "expected an object");
        check_keys(*b, "/bound", {"a", "curve_points"});
        cfg.bound.a = get_num(*b, "/bound", "a", 1e-2);
        cfg.bound.curve_points = get_int(*b, "/bound", "curve_points", 64);
        if (!(cfg.bound.a >= 0.0)) fail("/bound/a", "must be >= 0");
        if (cfg.bound.curve_points < 1)
            fail("/bound/curve_points", "must be >= 1");
    }

    if (const json* a = find(j, "amplification")) {
        if (!a->is_object()) fail("/amplification", "expected an object");
        check_keys(*a, "/amplification",
                   {"deltas", "u_lo", "u_hi", "u_points", "tau_samples"});
        if (const json* d = find(*a, "deltas")) {
            if (!d->is_array())
                fail("/amplification/deltas", "expected an array");
            for (const auto& x : *d)
                cfg.amplification.deltas.push_back(
                    as_num(x, "/amplification/deltas"));
        }
        cfg.amplification.u_lo = get_num(*a, "/amplification", "u_lo", 1e-8);
        cfg.amplification.u_hi = get_num(*a, "/amplification", "u_hi", 1e4);
        cfg.amplification.u_points =
            get_int(*a, "/amplification", "u_points", 25);
        cfg.amplification.tau_samples =
            get_int(*a, "/amplification", "tau_samples", 8);
        if (cfg.amplification.u_points < 2)
            fail("/amplification/u_points", "must be >= 2");
        if (cfg.amplification.tau_samples < 1)
            fail("/amplification/tau_samples", "must be >= 1");
    }

    if (const json* p = find(j, "partition")) {
        if (!p->is_object()) fail("/partition", "expected an object");
        check_keys(*p, "/partition", {"knots", "uniform_intervals"});
        if (const json* k = find(*p, "knots")) {
            if (!k->is_array()) fail("/partition/knots", "expected an array");
            for (const auto& x : *k)
                cfg.partition.knots.push_back(as_num(x, "/partition/knots"));
        }
        cfg.partition.uniform_intervals =
            get_int(*p, "/partition", "uniform_intervals", 4);
        if (cfg.partition.uniform_intervals < 1)
            fail("/partition/uniform_intervals", "must be >= 1");
    }

    if (const json* s = find(j, "saturate")) {
        if (!s->is_object()) fail("/saturate", "expected an object");
        check_keys(*s, "/saturate",
                   {"u0", "c_b", "curve_points", "table_points", "table_max"});
        cfg.saturate.u0 = get_num(*s, "/saturate", "u0", 0.01);
        cfg.saturate.c_b = get_num(*s, "/saturate", "c_b", 2.0);
        cfg.saturate.curve_points =
            get_int(*s, "/saturate", "curve_points", 64);
        cfg.saturate.table_points =
            get_int(*s, "/saturate", "table_points", 128);
        cfg.saturate.table_max = get_num(*s, "/saturate", "table_max", 4.0);
    }

    if (const json* a = find(j, "asymptotics")) {
        if (!a->is_object()) fail("/asymptotics", "expected an object");
        check_keys(*a, "/asymptotics", {"u_lo", "u_hi", "points"});
        cfg.asymptotics.u_lo = get_num(*a, "/asymptotics", "u_lo", 1e-8);
        cfg.asymptotics.u_hi = get_num(*a, "/asymptotics", "u_hi", 0.1);
        cfg.asymptotics.points = get_int(*a, "/asymptotics", "points", 8);
        if (!(0.0 < cfg.asymptotics.u_lo &&
              cfg.asymptotics.u_lo < cfg.asymptotics.u_hi))
            fail("/asymptotics", "need 0 < u_lo < u_hi");
        if (cfg.asymptotics.points < 2)
            fail("/asymptotics/points", "must be >= 2");
    }

    if (const json* o = find(j, "output")) {
        if (!o->is_object()) fail("/output", "expected an object");
        check_keys(*o, "/output", {"dir", "format", "export_ensemble"});
        cfg.output.dir = get_str(*o, "/output", "dir", "out");
        cfg.output.format = get_str(*o, "/output", "format", "csv");
        if (cfg.output.format != "csv" && cfg.output.format != "json")
            fail("/output/format", "expected csv or json");
        cfg.output.export_ensemble =
            get_bool(*o, "/output", "export_ensemble", false);
    }

    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace gstab
