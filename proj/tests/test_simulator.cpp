#include <muskat/csv.hpp>
#include <muskat/simulator.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace muskat;

#ifndef MUSKAT_TEST_DATA
#define MUSKAT_TEST_DATA "tests/data"
#endif

namespace {

RunConfig base_config() {
    RunConfig cfg;
    cfg.grid = {0.0, 1.0, 101};
    cfg.phys = PhysParams(1.0, 1.0);
    cfg.step.tau = 1e-2;
    cfg.t_end = 0.1;
    cfg.ic = ic::Constant{1.0, 2.0};
    return cfg;
}

}  // namespace

TEST(MakeRecord, UnitState) {
    const Grid g = build_grid(0.0, 1.0, 11);
    const PhysParams p(1.0, 3.0);
    const auto r = make_record(State::constant(11, 1.0, 1.0), 0.5, g, p, {2, 3}, StepStats{});
    EXPECT_EQ(r.t, 0.5);
    EXPECT_DOUBLE_EQ(r.mass_f, 1.0);
    EXPECT_DOUBLE_EQ(r.mass_g, 1.0);
    EXPECT_EQ(r.entropy, 0.0);
    EXPECT_EQ(r.dissipation, 0.0);
    EXPECT_EQ(r.linf_sum, 2.0);
    EXPECT_EQ(r.phi.size(), 2u);
}

TEST(MakeRecord, ZeroState) {
    const Grid g = build_grid(-1.0, 2.0, 31);
    const PhysParams p(0.5, 4.0);
    const auto r = make_record(State::constant(31, 0.0, 0.0), 0.0, g, p, {2, 5, 8}, StepStats{});
    for (const auto& [n, v] : r.phi) EXPECT_EQ(v, 0.0);
    EXPECT_NEAR(r.entropy, (1.0 + 0.25) * 3.0, 1e-14);
}

TEST(MakeRecord, EnergyIsScaledPhiTwo) {
    const Grid g = build_grid(0.0, 1.0, 101);
    for (double R : {0.1, 1.0, 10.0}) {
        const PhysParams p(R, 2.0);
        const State s = build_initial_condition(ic::Bump{0.3, 0.2, 2.0, 0.7}, g);
        const auto r = make_record(s, 0.0, g, p, {2}, StepStats{});
        EXPECT_NEAR(r.energy, 0.5 * R * r.phi.at(2), 1e-12 * r.energy);
    }
}

TEST(Schedule, ShortLastStep) {
    const Schedule exact = make_schedule(1.0, 1e-3);
    EXPECT_EQ(exact.full_steps, 1000);
    EXPECT_EQ(exact.last_tau, 0.0);
    const Schedule rem = make_schedule(0.25, 0.1);
    EXPECT_EQ(rem.full_steps, 2);
    EXPECT_NEAR(rem.last_tau, 0.05, 1e-15);
    EXPECT_EQ(rem.total(), 3);
    const Schedule tiny = make_schedule(0.05, 0.1);
    EXPECT_EQ(tiny.full_steps, 0);
    EXPECT_EQ(tiny.total(), 1);
}

TEST(RunSimulation, ConstantIsSteady) {
    const RunConfig cfg = base_config();
    const auto res = run_simulation(cfg);
    ASSERT_EQ(res.status, RunStatus::completed);
    EXPECT_EQ(res.steps_taken, 10);
    ASSERT_EQ(res.records.size(), 11u);
    for (std::size_t i = 0; i < res.final_state.size(); ++i) {
        EXPECT_NEAR(res.final_state.f[i], 1.0, 1e-10);
        EXPECT_NEAR(res.final_state.g[i], 2.0, 1e-10);
    }
    const auto& r0 = res.records.front();
    for (const auto& r : res.records) {
        EXPECT_NEAR(r.mass_f, r0.mass_f, 1e-10 * r0.mass_f);
        EXPECT_NEAR(r.mass_g, r0.mass_g, 1e-10 * r0.mass_g);
        EXPECT_NEAR(r.entropy, r0.entropy, 1e-10 * r0.entropy);
        EXPECT_NEAR(r.energy, r0.energy, 1e-10 * r0.energy);
        EXPECT_NEAR(r.dissipation, 0.0, 1e-20);
        for (const auto& [n, v] : r.phi) EXPECT_NEAR(v, r0.phi.at(n), 1e-10 * v);
    }
    for (std::size_t k = 1; k < res.records.size(); ++k) EXPECT_GT(res.records[k].t, res.records[k - 1].t);
    EXPECT_DOUBLE_EQ(res.records.back().t, 0.1);
}

TEST(RunSimulation, ZeroComponentPreserved) {
    RunConfig cfg = base_config();
    cfg.ic = ic::Bump{0.5, 0.3, 1.0, 0.0};
    cfg.step.tau = 1e-3;
    const auto res = run_simulation(cfg);
    ASSERT_EQ(res.status, RunStatus::completed);
    for (const auto& r : res.records) {
        EXPECT_EQ(r.mass_g, 0.0);
        EXPECT_EQ(r.linf_g, 0.0);
        EXPECT_NEAR(r.mass_f, res.records.front().mass_f, 1e-12);
    }
    EXPECT_EQ(linf_norm(res.final_state.g), 0.0);
}

TEST(RunSimulation, RecordCadenceAndSnapshots) {
    RunConfig cfg = base_config();
    cfg.ic = ic::Bump{};
    cfg.step.tau = 0.01;
    cfg.t_end = 0.095;
    cfg.record_every = 3;
    cfg.snapshots_every = 4;
    const auto res = run_simulation(cfg);
    ASSERT_EQ(res.status, RunStatus::completed);
    EXPECT_EQ(res.steps_taken, 10);
    // t = 0, steps 3, 6, 9, and the final (shortened) step.
    ASSERT_EQ(res.records.size(), 5u);
    EXPECT_NEAR(res.records[1].t, 0.03, 1e-15);
    EXPECT_DOUBLE_EQ(res.records.back().t, 0.095);
    ASSERT_EQ(res.snapshots.size(), 4u);  // t = 0, steps 4, 8, final
    EXPECT_EQ(res.snapshots.front().second, build_initial_condition(cfg.ic, cfg.make_grid()));
    EXPECT_EQ(res.snapshots.back().second, res.final_state);
}

TEST(RunSimulation, GoldenPhiTwoSeries) {
    RunConfig cfg;
    cfg.grid = {0.0, 1.0, 201};
    cfg.phys = PhysParams(1.0, 1.0);
    cfg.step.tau = 1e-3;
    cfg.t_end = 1.0;
    cfg.record_every = 50;
    cfg.phi_orders = {2};
    cfg.ic = ic::Bump{};
    const auto res = run_simulation(cfg);
    ASSERT_EQ(res.status, RunStatus::completed);
    const csv::Table golden = csv::read_file(std::string(MUSKAT_TEST_DATA) + "/golden_phi2_bump.csv");
    ASSERT_EQ(golden.rows.size(), res.records.size());
    for (std::size_t k = 0; k < golden.rows.size(); ++k) {
        EXPECT_NEAR(res.records[k].t, golden.rows[k][0], 1e-12);
        EXPECT_NEAR(res.records[k].phi.at(2), golden.rows[k][1], 1e-9 * golden.rows[k][1]);
        if (k > 0) {
            EXPECT_LE(res.records[k].phi.at(2), res.records[k - 1].phi.at(2) * (1 + 1e-8));
        }
    }
    // Hand values: int 5 b^2 with b = cos^2(pi (x - 1/2)) is 15/8, and the
    // mass-preserving constant limit (1/2, 1/2) has Phi_2 = 5/4.
    EXPECT_NEAR(res.records.front().phi.at(2), 15.0 / 8.0, 1e-12);
    EXPECT_NEAR(res.records.back().phi.at(2), 5.0 / 4.0, 1e-8);
    EXPECT_EQ(res.worst_step_increase.at(2), 0.0);
}

TEST(RunSimulation, StiffRunAbortsWithStepIndex) {
    RunConfig cfg = base_config();
    cfg.grid.m = 81;
    cfg.phys = PhysParams(5.0, 2.0);
    cfg.step.tau = 2e-3;
    cfg.t_end = 0.01;
    cfg.ic = ic::Bump{0.4, 0.4, 1.5, 0.8};
    const auto res = run_simulation(cfg);
    EXPECT_EQ(res.status, RunStatus::aborted_at_step);
    EXPECT_EQ(res.failed_step, 0);
    EXPECT_EQ(res.steps_taken, 0);
    EXPECT_FALSE(res.message.empty());
    EXPECT_EQ(res.records.size(), 1u);
    EXPECT_STREQ(to_string(res.status), "aborted-at-step");
}

TEST(RunSimulation, ValidationNamesKeys) {
    auto expect_key = [](RunConfig cfg, const std::string& key) {
        try {
            run_simulation(cfg);
            FAIL() << "expected ConfigError for " << key;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key);
        }
    };
    RunConfig c = base_config();
    c.t_end = -1.0;
    expect_key(c, "run.t_end");
    c = base_config();
    c.record_every = 0;
    expect_key(c, "run.record_every");
    c = base_config();
    c.phi_orders = {1};
    expect_key(c, "run.phi_orders");
    c = base_config();
    c.phi_orders = {};
    expect_key(c, "run.phi_orders");
    c = base_config();
    EXPECT_THROW(run_simulation(c, State::constant(5, 1.0, 1.0)), ConfigError);
    c.step.tau = 0.0;
    EXPECT_THROW(run_simulation(c), DomainError);
}
