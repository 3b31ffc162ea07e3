#include <muskat/config.hpp>
#include <muskat/grid.hpp>
#include <muskat/liapunov.hpp>
#include <muskat/stepper.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace muskat;

namespace {

State bump_state(const Grid& g, double hf = 1.0, double hg = 1.0) {
    return build_initial_condition(ic::Bump{0.5, 0.5, hf, hg}, g);
}

double integral(const Grid& g, const State& s, int n, const PhysParams& p) {
    NodalField v(s.size());
    const auto poly = liapunov(n, p);
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = phi_eval(poly, {s.f[i], s.g[i]});
    return integrate_nodal(g, v);
}

BlockTridiagMatrix random_block_system(std::size_t m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BlockTridiagMatrix A(m);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        A.lower[i] = {u(rng), u(rng), u(rng), u(rng)};
        A.upper[i] = {u(rng), u(rng), u(rng), u(rng)};
    }
    for (std::size_t i = 0; i < m; ++i) {
        const Matrix2 r{u(rng), u(rng), u(rng), u(rng)};
        // Strong block diagonal dominance keeps every pivot well conditioned.
        A.diag[i] = r + 6.0 * Matrix2::identity();
    }
    return A;
}

}  // namespace

TEST(LogarithmicMean, Properties) {
    EXPECT_DOUBLE_EQ(logarithmic_mean(2.0, 2.0), 2.0);
    EXPECT_EQ(logarithmic_mean(3.0, 0.0), 0.0);
    EXPECT_EQ(logarithmic_mean(0.0, 0.0), 0.0);
    EXPECT_NEAR(logarithmic_mean(1.0, std::exp(1.0)), std::exp(1.0) - 1.0, 1e-15);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-6, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = i % 2 ? a * (1 + 1e-6) : u(rng);
        const double L = logarithmic_mean(a, b);
        EXPECT_DOUBLE_EQ(L, logarithmic_mean(b, a));
        EXPECT_GE(L, std::sqrt(a * b) * (1 - 1e-14));
        EXPECT_LE(L, 0.5 * (a + b) * (1 + 1e-14));
    }
}

TEST(StepConfig, Validation) {
    StepConfig c;
    EXPECT_NO_THROW(c.validate());
    for (auto mutate : {+[](StepConfig& s) { s.tau = 0.0; }, +[](StepConfig& s) { s.epsilon = -1.0; },
                        +[](StepConfig& s) { s.picard_tol = 0.0; }, +[](StepConfig& s) { s.max_iter = 0; },
                        +[](StepConfig& s) { s.damping = 1.5; }, +[](StepConfig& s) { s.clip_tol = -1.0; }}) {
        StepConfig bad;
        mutate(bad);
        EXPECT_THROW(bad.validate(), DomainError);
    }
}

TEST(FrozenSystem, ZeroIterateIsDecoupledEpsilonLaplacian) {
    const Grid g = build_grid(0.0, 1.0, 9);
    const PhysParams p(1.5, 0.7);
    StepConfig cfg;
    cfg.epsilon = 1e-3;
    const State zero = State::constant(9, 0.0, 0.0);
    const FrozenSystem sys = frozen_system_assemble(g, p, cfg, zero, zero);
    const auto lap = assemble_weighted_stiffness(g, std::vector<double>(9, 1.0));
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_DOUBLE_EQ(sys.stiffness.diag[i].m11, 1e-3 * lap.diag[i]);
        EXPECT_DOUBLE_EQ(sys.stiffness.diag[i].m22, 1e-3 * lap.diag[i]);
        EXPECT_EQ(sys.stiffness.diag[i].m12, 0.0);
        EXPECT_EQ(sys.stiffness.diag[i].m21, 0.0);
        if (i + 1 < 9) {
            EXPECT_DOUBLE_EQ(sys.stiffness.upper[i].m11, 1e-3 * lap.upper[i]);
            EXPECT_EQ(sys.stiffness.upper[i].m12, 0.0);
            EXPECT_EQ(sys.stiffness.lower[i].m21, 0.0);
        }
    }
}

TEST(FrozenSystem, ConstantsAreSteady) {
    const Grid g = build_grid(0.0, 1.0, 21);
    const PhysParams p(1.0, 2.0);
    const State c = State::constant(21, 0.7, 1.3);
    const FrozenSystem sys = frozen_system_assemble(g, p, StepConfig{}, c, c);
    const State sol = solve_block_tridiagonal(sys);
    for (std::size_t i = 0; i < 21; ++i) {
        EXPECT_NEAR(sol.f[i], 0.7, 1e-14);
        EXPECT_NEAR(sol.g[i], 1.3, 1e-14);
    }
}

TEST(FrozenSystem, RowBlockSumsVanish) {
    const Grid g = build_grid(0.0, 1.0, 41);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.2, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        State s = State::constant(41, 0.0, 0.0);
        for (std::size_t i = 0; i < 41; ++i) {
            s.f[i] = u(rng);
            s.g[i] = u(rng);
        }
        StepConfig cfg;
        cfg.mobility_mean = trial % 2 ? MobilityMean::logarithmic : MobilityMean::arithmetic;
        const FrozenSystem sys = frozen_system_assemble(g, PhysParams(0.5, 3.0), cfg, s, s);
        for (std::size_t i = 0; i < 41; ++i) {
            const Matrix2 r = sys.stiffness.row_block_sum(i);
            EXPECT_LE(r.max_abs(), 1e-12 * (sys.stiffness.diag[i].max_abs() + 1.0));
        }
    }
}

TEST(FrozenSystem, SizeMismatch) {
    const Grid g = build_grid(0.0, 1.0, 5);
    const State s = State::constant(4, 1.0, 1.0);
    EXPECT_THROW(frozen_system_assemble(g, PhysParams(1, 1), StepConfig{}, s, s), DomainError);
}

TEST(BlockSolve, IdentityReturnsRhs) {
    BlockTridiagMatrix A(7);
    for (auto& d : A.diag) d = Matrix2::identity();
    std::vector<Vec2> rhs(7);
    for (std::size_t i = 0; i < 7; ++i) rhs[i] = {1.0 * i, -2.0 * i};
    EXPECT_EQ(solve_block_tridiagonal(A, rhs), rhs);
}

TEST(BlockSolve, DecoupledLaplacianConstantRhs) {
    const Grid g = build_grid(0.0, 1.0, 15);
    StepConfig cfg;
    cfg.epsilon = 0.1;
    cfg.tau = 0.5;
    const State zero = State::constant(15, 0.0, 0.0);
    FrozenSystem sys = frozen_system_assemble(g, PhysParams(1, 1), cfg, zero, zero);
    const auto M = assemble_mass(g);
    for (std::size_t i = 0; i < 15; ++i) sys.rhs[i] = {2.0 * M.diag[i], 5.0 * M.diag[i]};
    const State sol = solve_block_tridiagonal(sys);
    for (std::size_t i = 0; i < 15; ++i) {
        EXPECT_NEAR(sol.f[i], 2.0, 1e-13);
        EXPECT_NEAR(sol.g[i], 5.0, 1e-13);
    }
}

TEST(BlockSolve, RandomResidual) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    for (std::size_t m : {1u, 2u, 3u, 10u, 200u}) {
        const auto A = random_block_system(m, rng);
        std::vector<Vec2> rhs(m);
        for (auto& r : rhs) r = {nd(rng), nd(rng)};
        const auto x = solve_block_tridiagonal(A, rhs);
        EXPECT_LE(residual_inf(A, x, rhs), 1e-12);
    }
}

TEST(BlockSolve, FrozenSystemsHaveSmallResidual) {
    const Grid g = build_grid(0.0, 1.0, 101);
    const State s = bump_state(g, 2.0, 0.5);
    for (double R : {0.1, 1.0, 10.0}) {
        for (double mu : {0.1, 1.0, 10.0}) {
            const FrozenSystem sys = frozen_system_assemble(g, PhysParams(R, mu), StepConfig{}, s, s);
            const auto A = sys.matrix();
            const auto x = solve_block_tridiagonal(A, sys.rhs);
            EXPECT_LE(residual_inf(A, x, sys.rhs), 1e-13);
        }
    }
}

TEST(BlockSolve, SingularPivotReportsNode) {
    BlockTridiagMatrix A(4);
    for (auto& d : A.diag) d = Matrix2::identity();
    A.diag[2] = {1.0, 2.0, 2.0, 4.0};
    std::vector<Vec2> rhs(4, Vec2{1.0, 1.0});
    try {
        solve_block_tridiagonal(A, rhs);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.node(), 2u);
    }
    EXPECT_THROW(solve_block_tridiagonal(A, std::vector<Vec2>(3)), DomainError);
}

TEST(PicardStep, ConstantIsFixedInOneIteration) {
    const Grid g = build_grid(0.0, 1.0, 51);
    const State c = State::constant(51, 1.0, 2.0);
    const StepResult r = picard_step(c, g, PhysParams(1.0, 1.0), StepConfig{});
    EXPECT_EQ(r.stats.iterations, 1);
    for (std::size_t i = 0; i < 51; ++i) {
        EXPECT_NEAR(r.state.f[i], 1.0, 1e-14);
        EXPECT_NEAR(r.state.g[i], 2.0, 1e-14);
    }
}

TEST(PicardStep, ZeroComponentStaysZero) {
    const Grid g = build_grid(0.0, 1.0, 101);
    State s = bump_state(g, 1.0, 0.0);
    const PhysParams p(1.0, 2.0);
    const double mass0 = integrate_nodal(g, s.f);
    for (int step = 0; step < 20; ++step) {
        s = picard_step(s, g, p, StepConfig{}).state;
        EXPECT_EQ(linf_norm(s.g), 0.0);
    }
    EXPECT_NEAR(integrate_nodal(g, s.f), mass0, 1e-12);
}

TEST(PicardStep, BumpConvergesWithinBudget) {
    const Grid g = build_grid(0.0, 1.0, 101);
    State s = bump_state(g);
    const PhysParams p(1.0, 1.0);
    StepConfig cfg;
    cfg.tau = 1e-3;
    int worst = 0;
    for (int step = 0; step < 50; ++step) {
        const StepResult r = picard_step(s, g, p, cfg);
        worst = std::max(worst, r.stats.iterations);
        s = r.state;
    }
    EXPECT_LE(worst, 30);
}

TEST(PicardStep, StepInvariants) {
    const Grid g = build_grid(0.0, 1.0, 81);
    for (double R : {0.1, 1.0, 5.0}) {
        for (double mu : {0.5, 2.0}) {
            const PhysParams p(R, mu);
            StepConfig cfg;
            cfg.tau = 5e-4;
            State s = build_initial_condition(ic::Bump{0.4, 0.4, 1.5, 0.8}, g);
            for (int step = 0; step < 25; ++step) {
                const StepResult r = picard_step(s, g, p, cfg);
                const State& u = r.state;
                for (const auto& [a, b] : {std::pair{&s.f, &u.f}, std::pair{&s.g, &u.g}}) {
                    const double m0 = integrate_nodal(g, *a);
                    EXPECT_LE(std::abs(integrate_nodal(g, *b) - m0), 1e-10 * (m0 + 1.0));
                }
                for (double v : u.f) ASSERT_GE(v, 0.0);
                for (double v : u.g) ASSERT_GE(v, 0.0);
                for (int n = 2; n <= 8; ++n) {
                    const double before = integral(g, s, n, p);
                    EXPECT_LE(integral(g, u, n, p), before * (1.0 + 1e-8)) << "n=" << n << " step " << step;
                }
                // Discrete entropy estimate.
                const LiapunovPoly ent = LiapunovPoly::entropy(p);
                auto ent_int = [&](const State& st) {
                    NodalField v(st.size());
                    for (std::size_t i = 0; i < st.size(); ++i) v[i] = phi_eval(ent, {st.f[i], st.g[i]});
                    return integrate_nodal(g, v);
                };
                NodalField sum(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) sum[i] = u.f[i] + u.g[i];
                const double diss = gradient_sq_norm(g, u.f) + R * gradient_sq_norm(g, sum);
                const double e_prev = ent_int(s);
                EXPECT_LE(ent_int(u) + cfg.tau * diss, e_prev + 1e-6 * (1.0 + e_prev));
                // Symmetrized coercivity at the converged state.
                EXPECT_GE(min_symmetrized_coercivity(u, p, cfg.epsilon),
                          cfg.epsilon * R / (1.0 + 2.0 * R) * (1.0 - 1e-9));
                s = u;
            }
        }
    }
}

TEST(PicardStep, StiffStepFailsThenSmallerTauSucceeds) {
    // Large tau R mu / h^2 makes the frozen-coefficient iteration contract
    // slowly even at minimum damping; a shorter step is the remedy.
    const Grid g = build_grid(0.0, 1.0, 81);
    const State s = build_initial_condition(ic::Bump{0.4, 0.4, 1.5, 0.8}, g);
    const PhysParams p(5.0, 2.0);
    StepConfig cfg;
    cfg.tau = 2e-3;
    EXPECT_THROW(picard_step(s, g, p, cfg), StepError);
    cfg.tau = 5e-4;
    const StepResult r = picard_step(s, g, p, cfg);
    EXPECT_LE(r.stats.iterations, cfg.max_iter);
    EXPECT_LT(r.stats.final_damping, 1.0);
}

TEST(PicardStep, RejectsNegativePrevious) {
    const Grid g = build_grid(0.0, 1.0, 5);
    State s = State::constant(5, 1.0, 1.0);
    s.g[3] = -0.1;
    EXPECT_THROW(picard_step(s, g, PhysParams(1, 1), StepConfig{}), DomainError);
}

TEST(PicardStep, IterationBudgetExhausted) {
    const Grid g = build_grid(0.0, 1.0, 51);
    StepConfig cfg;
    cfg.max_iter = 2;
    cfg.tau = 1e-2;
    try {
        picard_step(bump_state(g), g, PhysParams(1, 1), cfg);
        FAIL() << "expected StepError";
    } catch (const StepError& e) {
        EXPECT_EQ(e.iterations(), 2);
        EXPECT_GT(e.residual(), cfg.picard_tol);
    }
}

TEST(PicardStep, DisjointSupportsReportPositivityFailure) {
    // Separate supports make the discrete solution dip below zero where the
    // fronts meet; the step reports the node instead of returning it.
    const Grid g = build_grid(0.0, 1.0, 101);
    const State s = build_initial_condition(ic::TwoBumps{}, g);
    StepConfig cfg;
    cfg.tau = 1e-3;
    State u = s;
    bool raised = false;
    for (int step = 0; step < 100 && !raised; ++step) {
        try {
            u = picard_step(u, g, PhysParams(1.0, 1.0), cfg).state;
        } catch (const PositivityError& e) {
            raised = true;
            EXPECT_LT(e.value(), 0.0);
            EXPECT_LT(e.node(), 101u);
        }
    }
    EXPECT_TRUE(raised);
}
