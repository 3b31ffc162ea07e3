#pragma once

// Time loop: u_0 = u^in, u_{l+1} = one regularized implicit Euler step from u_l.

#include <muskat/config.hpp>
#include <muskat/grid.hpp>
#include <muskat/liapunov.hpp>
#include <muskat/stepper.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace muskat {

struct DiagnosticsRecord {
    double t = 0.0;
    double mass_f = 0.0;
    double mass_g = 0.0;
    double linf_f = 0.0;
    double linf_g = 0.0;
    double linf_sum = 0.0;
    std::map<int, double> phi;  // order -> int Phi_n(u)
    double entropy = 0.0;       // int Phi_1(u)
    double dissipation = 0.0;   // |f_x|^2 + R |(f+g)_x|^2, integrated
    double energy = 0.0;        // int (1/2)[f^2 + R (f+g)^2]
    int picard_iters = 0;

    friend bool operator==(const DiagnosticsRecord&, const DiagnosticsRecord&) = default;
};

enum class RunStatus { completed, aborted_at_step };

inline const char* to_string(RunStatus s) { return s == RunStatus::completed ? "completed" : "aborted-at-step"; }

struct SimulationResult {
    std::vector<DiagnosticsRecord> records;
    State final_state;
    std::vector<std::pair<double, State>> snapshots;
    RunStatus status = RunStatus::completed;
    long steps_taken = 0;
    long failed_step = -1;  // index of the step that failed, when aborted
    std::string message;
    /// Worst relative per-step increase max(0, (s_{l+1} - s_l) / s_l) of each
    /// int Phi_n series over every step (not only recorded ones).
    std::map<int, double> worst_step_increase;
    int max_picard_iters = 0;
};

inline double integrate_phi(const Grid& grid, const State& s, const LiapunovPoly& poly) {
    NodalField v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = phi_eval(poly, {s.f[i], s.g[i]});
    return integrate_nodal(grid, v);
}

/// Diagnostic integrals of one state, with the lumped (trapezoidal) quadrature.
inline DiagnosticsRecord make_record(const State& state, double t, const Grid& grid, const PhysParams& p,
                                     const std::vector<int>& phi_orders, const StepStats& stats) {
    const std::size_t m = grid.size();
    if (state.f.size() != m || state.g.size() != m) throw DomainError("make_record: state does not match grid");
    DiagnosticsRecord r;
    r.t = t;
    r.mass_f = integrate_nodal(grid, state.f);
    r.mass_g = integrate_nodal(grid, state.g);
    r.linf_f = linf_norm(state.f);
    r.linf_g = linf_norm(state.g);
    NodalField sum(m), energy(m), entropy(m);
    for (std::size_t i = 0; i < m; ++i) {
        sum[i] = state.f[i] + state.g[i];
        const ScalarDensities d = scalar_functionals(p, {state.f[i], state.g[i]});
        energy[i] = d.energy;
        entropy[i] = d.entropy;
    }
    r.linf_sum = linf_norm(sum);
    for (int n : phi_orders) r.phi[n] = integrate_phi(grid, state, liapunov(n, p));
    r.entropy = integrate_nodal(grid, entropy);
    r.energy = integrate_nodal(grid, energy);
    r.dissipation = gradient_sq_norm(grid, state.f) + p.R() * gradient_sq_norm(grid, sum);
    r.picard_iters = stats.iterations;
    return r;
}

inline DiagnosticsRecord make_record(const State& state, double t, const RunConfig& cfg, const StepStats& stats) {
    return make_record(state, t, cfg.make_grid(), cfg.phys, cfg.phi_orders, stats);
}

inline void validate(const RunConfig& cfg) {
    cfg.step.validate();
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("run.t_end", "must be positive");
    if (cfg.record_every < 1) throw ConfigError("run.record_every", "must be >= 1");
    if (cfg.snapshots_every < 0) throw ConfigError("output.snapshots_every", "must be >= 0");
    if (cfg.phi_orders.empty()) throw ConfigError("run.phi_orders", "must be non-empty");
    for (int n : cfg.phi_orders) {
        if (n < 2 || n > kMaxOrder) throw ConfigError("run.phi_orders", "orders must lie in [2, 64]");
    }
}

/// Step schedule for [0, t_end]: full steps of tau, then one shortened step for
/// any remainder larger than a rounding-level fraction of tau.
struct Schedule {
    long full_steps = 0;
    double last_tau = 0.0;  // 0 when t_end is a multiple of tau

    long total() const { return full_steps + (last_tau > 0.0 ? 1 : 0); }
};

inline Schedule make_schedule(double t_end, double tau) {
    const double ratio = t_end / tau;
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * nearest) return {static_cast<long>(nearest), 0.0};
    const long full = static_cast<long>(std::floor(ratio));
    return {full, t_end - static_cast<double>(full) * tau};
}

inline SimulationResult run_simulation(const RunConfig& cfg, State initial) {
    validate(cfg);
    const Grid grid = cfg.make_grid();
    if (initial.f.size() != grid.size() || initial.g.size() != grid.size()) {
        throw ConfigError("ic", "initial state does not match the grid");
    }
    const Schedule sched = make_schedule(cfg.t_end, cfg.step.tau);
    const long total = sched.total();

    SimulationResult res;
    for (int n : cfg.phi_orders) res.worst_step_increase[n] = 0.0;
    std::map<int, LiapunovPoly> polys;
    std::map<int, double> last_phi;
    for (int n : cfg.phi_orders) {
        polys.emplace(n, liapunov(n, cfg.phys));
        last_phi[n] = integrate_phi(grid, initial, polys.at(n));
    }

    res.records.push_back(make_record(initial, 0.0, grid, cfg.phys, cfg.phi_orders, StepStats{}));
    if (cfg.snapshots_every > 0) res.snapshots.emplace_back(0.0, initial);

    State u = std::move(initial);
    StepConfig step_cfg = cfg.step;
    for (long l = 0; l < total; ++l) {
        const bool last = l + 1 == total;
        step_cfg.tau = (last && sched.last_tau > 0.0) ? sched.last_tau : cfg.step.tau;
        const double t = last ? cfg.t_end : static_cast<double>(l + 1) * cfg.step.tau;
        StepResult step;
        try {
            step = picard_step(u, grid, cfg.phys, step_cfg);
        } catch (const StepError& e) {
            res.status = RunStatus::aborted_at_step;
            res.failed_step = l;
            res.message = e.what();
            break;
        } catch (const PositivityError& e) {
            res.status = RunStatus::aborted_at_step;
            res.failed_step = l;
            res.message = e.what();
            break;
        }
        u = std::move(step.state);
        res.steps_taken = l + 1;
        res.max_picard_iters = std::max(res.max_picard_iters, step.stats.iterations);

        for (int n : cfg.phi_orders) {
            const double now = integrate_phi(grid, u, polys.at(n));
            const double before = last_phi[n];
            if (now > before) {
                const double rel = before > 0.0 ? (now - before) / before : std::numeric_limits<double>::infinity();
                res.worst_step_increase[n] = std::max(res.worst_step_increase[n], rel);
            }
            last_phi[n] = now;
        }

        if ((l + 1) % cfg.record_every == 0 || last) {
            res.records.push_back(make_record(u, t, grid, cfg.phys, cfg.phi_orders, step.stats));
        }
        if (cfg.snapshots_every > 0 && ((l + 1) % cfg.snapshots_every == 0 || last)) res.snapshots.emplace_back(t, u);
    }
    res.final_state = std::move(u);
    return res;
}

inline SimulationResult run_simulation(const RunConfig& cfg) {
    validate(cfg);
    return run_simulation(cfg, build_initial_condition(cfg.ic, cfg.make_grid()));
}

}  // namespace muskat
