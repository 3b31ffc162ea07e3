#pragma once

// One implicit Euler step of the epsilon-regularized scheme
//
//   Mass (u - prev) + tau K(u) u = 0,
//
// where K(u) is the P1 stiffness weighted by the four entries of
// M_eps(u) = eps I + M(u_+). The nonlinear system is solved by freezing the
// mobility at the current iterate and solving the resulting linear 2x2-block
// tridiagonal system directly.

#include <muskat/errors.hpp>
#include <muskat/grid.hpp>
#include <muskat/liapunov.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace muskat {

/// Nodal heights of the heavier (f) and lighter (g) fluid.
struct State {
    NodalField f;
    NodalField g;

    std::size_t size() const noexcept { return f.size(); }

    static State constant(std::size_t m, double cf, double cg) { return {NodalField(m, cf), NodalField(m, cg)}; }

    friend bool operator==(const State&, const State&) = default;
};

inline double linf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double linf_norm(const State& s) { return std::max(linf_norm(s.f), linf_norm(s.g)); }

/// How the nodal mobility state is carried onto an element.
enum class MobilityMean {
    arithmetic,   // (a + b) / 2
    logarithmic,  // (a - b) / (ln a - ln b), zero when either node is zero
};

inline const char* to_string(MobilityMean m) { return m == MobilityMean::arithmetic ? "arithmetic" : "logarithmic"; }

/// Logarithmic mean of two non-negative numbers; L(a, a) = a and L(a, 0) = 0.
inline double logarithmic_mean(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    const double x = (a - b) / (a + b);
    const double mid = 0.5 * (a + b);
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return mid * (1.0 - x2 * (1.0 / 3.0 + x2 * (4.0 / 45.0)));
    }
    return mid * x / std::atanh(x);
}

inline double element_mean(MobilityMean kind, double a, double b) {
    return kind == MobilityMean::arithmetic ? 0.5 * (a + b) : logarithmic_mean(a, b);
}

struct StepConfig {
    double tau = 1e-3;
    double epsilon = 1e-8;
    double picard_tol = 1e-10;
    int max_iter = 200;
    double damping = 1.0;
    /// Entries in [-clip_tol * |prev|_inf, 0) are set to zero after convergence.
    double clip_tol = 1e-12;
    MobilityMean mobility_mean = MobilityMean::arithmetic;

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("StepConfig: tau must be positive");
        if (!(epsilon > 0.0)) throw DomainError("StepConfig: epsilon must be positive");
        if (!(picard_tol > 0.0)) throw DomainError("StepConfig: picard_tol must be positive");
        if (max_iter < 1) throw DomainError("StepConfig: max_iter must be >= 1");
        if (!(damping > 0.0) || damping > 1.0) throw DomainError("StepConfig: damping must lie in (0, 1]");
        if (!(clip_tol >= 0.0)) throw DomainError("StepConfig: clip_tol must be non-negative");
    }

    friend bool operator==(const StepConfig&, const StepConfig&) = default;
};

struct StepStats {
    int iterations = 0;
    double final_residual = 0.0;
    int clipped_nodes = 0;
    int linear_solves = 0;
    double final_damping = 1.0;
};

/// Block tridiagonal matrix with 2x2 blocks acting on interleaved (f_i, g_i).
/// lower[i] = A(i+1, i), diag[i] = A(i, i), upper[i] = A(i, i+1).
struct BlockTridiagMatrix {
    std::vector<Matrix2> lower;
    std::vector<Matrix2> diag;
    std::vector<Matrix2> upper;

    explicit BlockTridiagMatrix(std::size_t m) : lower(m > 0 ? m - 1 : 0), diag(m), upper(m > 0 ? m - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<Vec2> apply(std::span<const Vec2> x) const {
        const std::size_t m = size();
        if (x.size() != m) throw DomainError("BlockTridiagMatrix::apply: length mismatch");
        std::vector<Vec2> y(m);
        for (std::size_t i = 0; i < m; ++i) {
            Vec2 s = diag[i] * x[i];
            if (i > 0) {
                const Vec2 t = lower[i - 1] * x[i - 1];
                s.x1 += t.x1;
                s.x2 += t.x2;
            }
            if (i + 1 < m) {
                const Vec2 t = upper[i] * x[i + 1];
                s.x1 += t.x1;
                s.x2 += t.x2;
            }
            y[i] = s;
        }
        return y;
    }

    /// Sum of the blocks in block row i.
    Matrix2 row_block_sum(std::size_t i) const {
        Matrix2 s = diag[i];
        if (i > 0) s = s + lower[i - 1];
        if (i + 1 < size()) s = s + upper[i];
        return s;
    }
};

/// Linear system frozen at one Picard iterate: (Mass + tau K) u = Mass prev.
struct FrozenSystem {
    TridiagMatrix mass;
    BlockTridiagMatrix stiffness;
    double tau;
    std::vector<Vec2> rhs;

    BlockTridiagMatrix matrix() const {
        const std::size_t m = stiffness.size();
        BlockTridiagMatrix A(m);
        for (std::size_t i = 0; i < m; ++i) {
            A.diag[i] = mass.diag[i] * Matrix2::identity() + tau * stiffness.diag[i];
            if (i + 1 < m) {
                A.lower[i] = tau * stiffness.lower[i];
                A.upper[i] = tau * stiffness.upper[i];
            }
        }
        return A;
    }
};

inline std::vector<Vec2> interleave(const State& s) {
    std::vector<Vec2> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = {s.f[i], s.g[i]};
    return out;
}

inline State deinterleave(std::span<const Vec2> v) {
    State s{NodalField(v.size()), NodalField(v.size())};
    for (std::size_t i = 0; i < v.size(); ++i) {
        s.f[i] = v[i].x1;
        s.g[i] = v[i].x2;
    }
    return s;
}

inline FrozenSystem frozen_system_assemble(const Grid& grid, const PhysParams& p, const StepConfig& cfg,
                                           const State& iterate, const State& prev) {
    cfg.validate();
    const std::size_t m = grid.size();
    if (iterate.f.size() != m || iterate.g.size() != m || prev.f.size() != m || prev.g.size() != m) {
        throw DomainError("frozen_system_assemble: state size does not match grid (" + std::to_string(m) + " nodes)");
    }

    // M_eps evaluated at one element state per element, built from the nodal
    // positive parts. The same state feeds all four entries.
    std::vector<double> w11(m - 1), w12(m - 1), w21(m - 1), w22(m - 1);
    for (std::size_t e = 0; e + 1 < m; ++e) {
        const Vec2 state{element_mean(cfg.mobility_mean, positive_part(iterate.f[e]), positive_part(iterate.f[e + 1])),
                         element_mean(cfg.mobility_mean, positive_part(iterate.g[e]), positive_part(iterate.g[e + 1]))};
        const Matrix2 me = mobility_reg(p, cfg.epsilon, state);
        w11[e] = me.m11;
        w12[e] = me.m12;
        w21[e] = me.m21;
        w22[e] = me.m22;
    }
    const TridiagMatrix k11 = assemble_element_stiffness(grid, w11);
    const TridiagMatrix k12 = assemble_element_stiffness(grid, w12);
    const TridiagMatrix k21 = assemble_element_stiffness(grid, w21);
    const TridiagMatrix k22 = assemble_element_stiffness(grid, w22);

    FrozenSystem sys{assemble_mass(grid), BlockTridiagMatrix(m), cfg.tau, std::vector<Vec2>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        sys.stiffness.diag[i] = {k11.diag[i], k12.diag[i], k21.diag[i], k22.diag[i]};
        if (i + 1 < m) {
            sys.stiffness.lower[i] = {k11.lower[i], k12.lower[i], k21.lower[i], k22.lower[i]};
            sys.stiffness.upper[i] = {k11.upper[i], k12.upper[i], k21.upper[i], k22.upper[i]};
        }
        sys.rhs[i] = {sys.mass.diag[i] * prev.f[i], sys.mass.diag[i] * prev.g[i]};
    }
    return sys;
}

namespace detail {

inline Matrix2 inverse_checked(const Matrix2& a, std::size_t node) {
    const double d = a.det();
    const double scale = a.max_abs();
    if (!std::isfinite(d) || scale == 0.0 || std::abs(d) <= 1e-14 * scale * scale) {
        throw SolverError(node, "solve_block_tridiagonal: singular pivot block");
    }
    const double inv = 1.0 / d;
    return {a.m22 * inv, -a.m12 * inv, -a.m21 * inv, a.m11 * inv};
}

inline Vec2 sub(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }

inline double min_entry(std::span<const Vec2> u) {
    double lo = std::numeric_limits<double>::infinity();
    for (const Vec2& v : u) lo = std::min({lo, v.x1, v.x2});
    return lo;
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

/// Block Thomas algorithm (block LU without pivoting across blocks).
inline std::vector<Vec2> solve_block_tridiagonal(const BlockTridiagMatrix& A, std::span<const Vec2> rhs) {
    const std::size_t m = A.size();
    if (rhs.size() != m) throw DomainError("solve_block_tridiagonal: rhs length mismatch");
    if (m == 0) return {};

    std::vector<Matrix2> pivot_inv(m);
    std::vector<Vec2> y(rhs.begin(), rhs.end());
    pivot_inv[0] = detail::inverse_checked(A.diag[0], 0);
    for (std::size_t i = 1; i < m; ++i) {
        const Matrix2 l = A.lower[i - 1] * pivot_inv[i - 1];
        const Matrix2 piv = A.diag[i] + (-1.0) * (l * A.upper[i - 1]);
        pivot_inv[i] = detail::inverse_checked(piv, i);
        y[i] = detail::sub(y[i], l * y[i - 1]);
    }

    std::vector<Vec2> x(m);
    x[m - 1] = pivot_inv[m - 1] * y[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) x[i] = pivot_inv[i] * detail::sub(y[i], A.upper[i] * x[i + 1]);
    return x;
}

inline State solve_block_tridiagonal(const FrozenSystem& sys) {
    return deinterleave(solve_block_tridiagonal(sys.matrix(), sys.rhs));
}

/// |A x - rhs|_inf
inline double residual_inf(const BlockTridiagMatrix& A, std::span<const Vec2> x, std::span<const Vec2> rhs) {
    const auto Ax = A.apply(x);
    double r = 0.0;
    for (std::size_t i = 0; i < Ax.size(); ++i) {
        r = std::max({r, std::abs(Ax[i].x1 - rhs[i].x1), std::abs(Ax[i].x2 - rhs[i].x2)});
    }
    return r;
}

struct StepResult {
    State state;
    StepStats stats;
};

inline constexpr double kMinDamping = 1.0 / 16.0;

/// Picard iteration u^{k+1} = d * solve(frozen at u^k) + (1 - d) u^k from u^0 = prev,
/// stopped when |u^{k+1} - u^k|_inf <= picard_tol |u^{k+1}|_inf. The damping d is
/// halved on every residual increase; an increase at d = 1/16 aborts the step.
inline StepResult picard_step(const State& prev, const Grid& grid, const PhysParams& p, const StepConfig& cfg) {
    cfg.validate();
    const std::size_t m = grid.size();
    if (prev.f.size() != m || prev.g.size() != m) throw DomainError("picard_step: state size does not match grid");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(prev.f[i] >= 0.0) || !(prev.g[i] >= 0.0)) {
            throw DomainError("picard_step: previous state negative or NaN at node " + std::to_string(i));
        }
    }

    const double clip_threshold = cfg.clip_tol * linf_norm(prev);
    StepStats stats;
    double damping = cfg.damping;
    double last_residual = std::numeric_limits<double>::infinity();
    std::vector<Vec2> u = interleave(prev);
    bool converged = false;

    for (int it = 1; it <= cfg.max_iter; ++it) {
        const FrozenSystem sys = frozen_system_assemble(grid, p, cfg, deinterleave(u), prev);
        const std::vector<Vec2> sol = solve_block_tridiagonal(sys.matrix(), sys.rhs);
        ++stats.linear_solves;

        double change = 0.0, size = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2 next{damping * sol[i].x1 + (1.0 - damping) * u[i].x1,
                            damping * sol[i].x2 + (1.0 - damping) * u[i].x2};
            change = std::max({change, std::abs(next.x1 - u[i].x1), std::abs(next.x2 - u[i].x2)});
            size = std::max({size, std::abs(next.x1), std::abs(next.x2)});
            u[i] = next;
        }
        const double residual = size > 0.0 ? change / size : change;
        if (!std::isfinite(residual)) throw StepError(residual, it, "picard_step: iterate became non-finite");
        stats.iterations = it;
        stats.final_residual = residual;

        if (residual <= cfg.picard_tol) {
            // The fixed point is non-negative; entries below the clipping
            // threshold mean the iterate has not settled onto it yet.
            if (detail::min_entry(u) >= -clip_threshold || it == cfg.max_iter) {
                converged = true;
                break;
            }
            last_residual = std::numeric_limits<double>::infinity();
            continue;
        }
        if (residual > last_residual) {
            if (damping <= kMinDamping) {
                throw StepError(residual, it, "picard_step: residual increased at minimum damping");
            }
            damping = std::max(0.5 * damping, kMinDamping);
        }
        last_residual = residual;
    }
    stats.final_damping = damping;
    if (!converged) {
        throw StepError(stats.final_residual, stats.iterations,
                        "picard_step: no convergence in " + std::to_string(cfg.max_iter) + " iterations (residual " +
                            detail::sci(stats.final_residual) + ")");
    }

    State out = deinterleave(u);
    const double threshold = clip_threshold;
    auto clip = [&](NodalField& v, const char* name) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] >= 0.0) continue;
            if (v[i] < -threshold) {
                throw PositivityError(i, v[i],
                                      std::string("picard_step: ") + name + " = " + detail::sci(v[i]) +
                                          " below clipping threshold at node " + std::to_string(i));
            }
            v[i] = 0.0;
            ++stats.clipped_nodes;
        }
    };
    clip(out.f, "f");
    clip(out.g, "g");
    return {std::move(out), stats};
}

/// Smallest value of <S M_eps(u_i) xi, xi> / |xi|^2 over all nodes, i.e. the
/// minimum eigenvalue of the symmetric part of S M_eps. Bounded below by
/// eps R / (1 + 2R).
inline double min_symmetrized_coercivity(const State& s, const PhysParams& p, double eps) {
    const Matrix2 S = s_matrix(p);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        lo = std::min(lo, sym_eigenvalues(S * mobility_reg(p, eps, {s.f[i], s.g[i]})).first);
    }
    return lo;
}

}  // namespace muskat
