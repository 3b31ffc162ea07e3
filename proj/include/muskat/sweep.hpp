#pragma once

// Parameter sweeps: a base configuration is copied once per case, with one
// or more parameters overridden. Several varied parameters are zipped, so
// `tau = {1e-2, 1e-3}` with `m = {51, 101}` gives two cases, not four.

#include <muskat/config.hpp>
#include <muskat/errors.hpp>
#include <muskat/io.hpp>
#include <muskat/simulator.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <string>
#include <vector>

namespace muskat {

enum class SweepParam { tau, epsilon, m };

inline const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::tau: return "tau";
        case SweepParam::epsilon: return "epsilon";
        case SweepParam::m: return "m";
    }
    return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
    if (s == "tau") return SweepParam::tau;
    if (s == "epsilon") return SweepParam::epsilon;
    if (s == "m") return SweepParam::m;
    throw ConfigError("vary", "unknown sweep parameter '" + s + "' (tau, epsilon, m)");
}

struct SweepAxis {
    SweepParam param;
    std::vector<double> values;
};

struct SweepCase {
    std::size_t index = 0;
    std::map<std::string, double> values;
    RunConfig config;
};

struct SweepCaseResult {
    SweepCase spec;
    RunStatus status = RunStatus::completed;
    std::string message;
    std::map<int, double> worst_step_increase;
    double max_mass_drift = 0.0;  // relative, over both components
    int max_picard_iters = 0;
    double wall_time_s = 0.0;
};

inline RunConfig apply_override(RunConfig cfg, SweepParam p, double v) {
    switch (p) {
        case SweepParam::tau:
            if (!(v > 0.0)) throw ConfigError("step.tau", "sweep value must be positive");
            cfg.step.tau = v;
            break;
        case SweepParam::epsilon:
            if (!(v > 0.0)) throw ConfigError("step.epsilon", "sweep value must be positive");
            cfg.step.epsilon = v;
            break;
        case SweepParam::m:
            if (v != std::floor(v) || v < 2) throw ConfigError("grid.m", "sweep value must be an integer >= 2");
            cfg.grid.m = static_cast<long>(v);
            break;
    }
    return cfg;
}

/// Expands the zipped axes into cases; every axis must have the same length.
/// Each case writes to <output_dir>/case_<k>.
inline std::vector<SweepCase> make_sweep_cases(const RunConfig& base, const std::vector<SweepAxis>& axes) {
    if (axes.empty()) throw ConfigError("vary", "at least one parameter must be varied");
    const std::size_t count = axes.front().values.size();
    if (count == 0) throw ConfigError("values", "empty value list");
    for (const auto& a : axes) {
        if (a.values.size() != count) throw ConfigError("values", "every --vary needs the same number of values");
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (axes[i].param == axes[j].param) {
                throw ConfigError("vary", std::string("parameter '") + to_string(axes[i].param) + "' varied twice");
            }
        }
    }
    if (std::holds_alternative<ic::File>(base.ic)) {
        for (const auto& a : axes) {
            if (a.param == SweepParam::m) throw ConfigError("ic.file", "cannot vary m with a file initial condition");
        }
    }
    std::vector<SweepCase> cases;
    for (std::size_t k = 0; k < count; ++k) {
        SweepCase c;
        c.index = k;
        c.config = base;
        for (const auto& a : axes) {
            c.config = apply_override(c.config, a.param, a.values[k]);
            c.values[to_string(a.param)] = a.values[k];
        }
        c.config.output_dir = (std::filesystem::path(base.output_dir) / ("case_" + std::to_string(k))).string();
        cases.push_back(std::move(c));
    }
    return cases;
}

inline SweepCaseResult run_sweep_case(const SweepCase& c, bool write_files) {
    const auto start = std::chrono::steady_clock::now();
    SweepCaseResult r;
    r.spec = c;
    const SimulationResult sim = run_simulation(c.config);
    r.status = sim.status;
    r.message = sim.message;
    r.worst_step_increase = sim.worst_step_increase;
    r.max_picard_iters = sim.max_picard_iters;
    const auto& first = sim.records.front();
    for (const auto& rec : sim.records) {
        r.max_mass_drift = std::max({r.max_mass_drift, std::abs(rec.mass_f - first.mass_f) / (first.mass_f + 1.0),
                                     std::abs(rec.mass_g - first.mass_g) / (first.mass_g + 1.0)});
    }
    if (write_files) write_outputs(sim, c.config);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Runs all cases concurrently; results come back in case order.
inline std::vector<SweepCaseResult> run_sweep(const std::vector<SweepCase>& cases, bool write_files = true) {
    std::vector<std::future<SweepCaseResult>> jobs;
    jobs.reserve(cases.size());
    for (const auto& c : cases) {
        jobs.push_back(std::async(std::launch::async, [&c, write_files] { return run_sweep_case(c, write_files); }));
    }
    std::vector<SweepCaseResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

inline nlohmann::json sweep_summary_json(const std::vector<SweepCaseResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json worst = nlohmann::json::object();
        for (const auto& [n, v] : r.worst_step_increase) worst["phi_" + std::to_string(n)] = v;
        arr.push_back({{"case", r.spec.index},
                       {"values", r.spec.values},
                       {"output_dir", r.spec.config.output_dir},
                       {"status", to_string(r.status)},
                       {"message", r.message},
                       {"worst_step_increase", worst},
                       {"max_mass_drift", r.max_mass_drift},
                       {"max_picard_iters", r.max_picard_iters},
                       {"wall_time_s", r.wall_time_s}});
    }
    return {{"cases", arr}};
}

/// One row per case: varied values, status, then worst_phi_<n> columns.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCaseResult>& results) {
    if (results.empty()) return;
    const auto& first = results.front();
    out << "case";
    for (const auto& [k, v] : first.spec.values) out << ',' << k;
    out << ",status,max_mass_drift,max_picard_iters";
    for (const auto& [n, v] : first.worst_step_increase) out << ",worst_phi_" << n;
    out << '\n';
    for (const auto& r : results) {
        out << r.spec.index;
        for (const auto& [k, v] : r.spec.values) out << ',' << csv::format_double(v);
        out << ',' << to_string(r.status) << ',' << csv::format_double(r.max_mass_drift) << ',' << r.max_picard_iters;
        for (const auto& [n, v] : r.worst_step_increase) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

}  // namespace muskat
