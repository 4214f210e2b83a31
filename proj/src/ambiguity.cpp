#include "gstab/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace gstab {

void AmbiguitySet::validate() const {
    if (!(sigma_low > 0.0) || !(sigma_high >= sigma_low))
        throw std::invalid_argument(
            "ambiguity: requires 0 < sigma_low <= sigma_high");
    if (dimension != 1)
        throw std::invalid_argument("ambiguity: only dimension 1 is supported");
}

void TimeGrid::validate() const {
    if (!(T > t)) throw std::invalid_argument("grid: requires T > t");
    if (steps < 1) throw std::invalid_argument("grid: needs at least one step");
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(static_cast<size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) out[static_cast<size_t>(i)] = time(i);
    return out;
}

namespace {

void append_unique(std::vector<VolatilityControl>& out,
                   std::set<std::vector<double>>& seen, VolatilityControl c) {
    if (seen.insert(c.sigma).second) out.push_back(std::move(c));
}

constexpr size_t kFamilyCap = 200000;

}  // namespace

ScenarioFamily generate_scenarios(const AmbiguitySet& set,
                                  const ScenarioStrategy& strategy,
                                  const TimeGrid& grid) {
    set.validate();
    grid.validate();
    const size_t m = static_cast<size_t>(grid.steps);
    ScenarioFamily fam;
    fam.set = set;
    fam.grid = grid;
    std::set<std::vector<double>> seen;

    auto constant = [&](double level, const std::string& label) {
        VolatilityControl c;
        c.sigma.assign(m, level);
        c.label = label;
        append_unique(fam.controls, seen, std::move(c));
    };
    constant(set.sigma_low, "const_low");
    constant(set.sigma_high, "const_high");

    switch (strategy.kind) {
        case ScenarioStrategy::Kind::Extremes:
            break;
        case ScenarioStrategy::Kind::BangBang: {
            const int k = strategy.switches;
            if (k < 0)
                throw std::invalid_argument("scenarios: switches must be >= 0");
            // switch positions are the interior grid indices 1..m-1; each
            // choice of k positions and an initial level gives one control
            std::vector<size_t> pos(static_cast<size_t>(k));
            auto emit = [&](const std::vector<size_t>& switches) {
                for (int start = 0; start < 2; ++start) {
                    VolatilityControl c;
                    c.sigma.resize(m);
                    double level = start == 0 ? set.sigma_low : set.sigma_high;
                    size_t next = 0;
                    for (size_t i = 0; i < m; ++i) {
                        while (next < switches.size() && switches[next] == i) {
                            level = (level == set.sigma_low) ? set.sigma_high
                                                             : set.sigma_low;
                            ++next;
                        }
                        c.sigma[i] = level;
                    }
                    c.label = "bang_bang";
                    append_unique(fam.controls, seen, std::move(c));
                    if (fam.controls.size() > kFamilyCap)
                        throw std::invalid_argument(
                            "scenarios: family exceeds the size cap");
                }
            };
            if (k == 0) {
                emit({});
            } else {
                // lexicographic k-combinations of {1, ..., m-1}
                if (m >= 2 && static_cast<size_t>(k) <= m - 1) {
                    for (size_t i = 0; i < static_cast<size_t>(k); ++i)
                        pos[i] = i + 1;
                    while (true) {
                        emit(pos);
                        int i = k - 1;
                        while (i >= 0 &&
                               pos[static_cast<size_t>(i)] ==
                                   m - 1 - static_cast<size_t>(k - 1 - i))
                            --i;
                        if (i < 0) break;
                        ++pos[static_cast<size_t>(i)];
                        for (size_t j = static_cast<size_t>(i) + 1;
                             j < static_cast<size_t>(k); ++j)
                            pos[j] = pos[j - 1] + 1;
                    }
                }
            }
            break;
        }
        case ScenarioStrategy::Kind::LatinGrid: {
            const int levels = strategy.levels;
            if (levels < 1)
                throw std::invalid_argument("scenarios: levels must be >= 1");
            for (int i = 0; i < levels; ++i) {
                const double frac =
                    levels == 1 ? 0.5
                                : static_cast<double>(i) / (levels - 1);
                constant(set.sigma_low + frac * (set.sigma_high - set.sigma_low),
                         "level_" + std::to_string(i));
            }
            break;
        }
        case ScenarioStrategy::Kind::RandomizedControls: {
            if (strategy.count < 0)
                throw std::invalid_argument("scenarios: count must be >= 0");
            for (int j = 0; j < strategy.count; ++j) {
                VolatilityControl c;
                c.sigma.resize(m);
                for (size_t i = 0; i < m; ++i) {
                    const double u = uniform_draw(
                        strategy.seed, StreamTag::Controls,
                        static_cast<uint32_t>(j), 0, static_cast<uint32_t>(i));
                    c.sigma[i] =
                        set.sigma_low + (set.sigma_high - set.sigma_low) * u;
                }
                c.label = "random_" + std::to_string(j);
                append_unique(fam.controls, seen, std::move(c));
            }
            break;
        }
    }
    return fam;
}

ScenarioFamily combine_families(const std::vector<ScenarioFamily>& families) {
    if (families.empty())
        throw std::invalid_argument("scenarios: nothing to combine");
    ScenarioFamily out;
    out.set = families.front().set;
    out.grid = families.front().grid;
    std::set<std::vector<double>> seen;
    for (const ScenarioFamily& f : families) {
        if (f.grid.steps != out.grid.steps || f.grid.t != out.grid.t ||
            f.grid.T != out.grid.T)
            throw std::invalid_argument("scenarios: families use different grids");
        for (const VolatilityControl& c : f.controls)
            append_unique(out.controls, seen, c);
    }
    return out;
}

double GPathEnsemble::brownian_increment(uint32_t scenario, uint32_t path,
                                         uint32_t interval) const {
    const double sig = family.controls[scenario].sigma[interval];
    const double z = normal_draw(seed, StreamTag::PathNoise, scenario, path,
                                 interval);
    return sig * std::sqrt(family.grid.dt()) * z;
}

double GPathEnsemble::qv_increment(uint32_t scenario, uint32_t interval) const {
    const double sig = family.controls[scenario].sigma[interval];
    return sig * sig * family.grid.dt();
}

GPathEnsemble sample_paths(const ScenarioFamily& family,
                           size_t paths_per_scenario, uint64_t seed) {
    if (family.controls.empty())
        throw std::invalid_argument("ensemble: empty scenario family");
    if (paths_per_scenario == 0)
        throw std::invalid_argument("ensemble: needs at least one path");
    GPathEnsemble e;
    e.family = family;
    e.paths_per_scenario = paths_per_scenario;
    e.seed = seed;
    return e;
}

SupEstimate sup_expectation(const std::vector<std::vector<double>>& samples) {
    if (samples.empty())
        throw std::invalid_argument("sup_expectation: empty scenario list");
    SupEstimate out;
    out.means.reserve(samples.size());
    out.std_errors.reserve(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        const std::vector<double>& s = samples[i];
        if (s.empty())
            throw std::invalid_argument(
                "sup_expectation: scenario " + std::to_string(i) +
                " has no samples");
        double sum = 0.0;
        for (double v : s) sum += v;
        const double mean = sum / static_cast<double>(s.size());
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        const double se =
            s.size() > 1
                ? std::sqrt(var / (static_cast<double>(s.size()) - 1.0) /
                            static_cast<double>(s.size()))
                : 0.0;
        out.means.push_back(mean);
        out.std_errors.push_back(se);
        if (i == 0 || mean > out.estimate) {
            out.estimate = mean;
            out.argmax = i;
        }
    }
    return out;
}

A4Defaults defaults_for_A4(const AmbiguitySet& set) {
    set.validate();
    A4Defaults d;
    d.C_BDG = 4.0 * set.sigma_high * set.sigma_high;
    d.C_QV = std::pow(set.sigma_high, 4);
    return d;
}

}  // namespace gstab
