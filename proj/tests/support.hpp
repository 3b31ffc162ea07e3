#pragma once

#include <muskat/liapunov.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace muskat::testing {

/// Uniform points in [lo, hi]^2 from a fixed seed.
inline std::vector<Vec2> cone_points(std::size_t count, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Vec2> pts(count);
    for (auto& p : pts) p = {u(rng), u(rng)};
    return pts;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double norm(Vec2 v) { return std::hypot(v.x1, v.x2); }

inline double frob(const Matrix2& a) { return std::sqrt(a.m11 * a.m11 + a.m12 * a.m12 + a.m21 * a.m21 + a.m22 * a.m22); }

inline Matrix2 diff(const Matrix2& a, const Matrix2& b) { return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22}; }

/// Central-difference gradient of phi_eval.
inline Vec2 fd_grad(const LiapunovPoly& poly, Vec2 X) {
    const double h = 1e-6 * std::max({1.0, std::abs(X.x1), std::abs(X.x2)});
    const double d1 = (phi_eval(poly, {X.x1 + h, X.x2}) - phi_eval(poly, {X.x1 - h, X.x2})) / (2 * h);
    const double d2 = (phi_eval(poly, {X.x1, X.x2 + h}) - phi_eval(poly, {X.x1, X.x2 - h})) / (2 * h);
    return {d1, d2};
}

/// Central-difference Jacobian of phi_grad.
inline Matrix2 fd_hessian(const LiapunovPoly& poly, Vec2 X) {
    const double h = 1e-6 * std::max({1.0, std::abs(X.x1), std::abs(X.x2)});
    const Vec2 p1 = phi_grad(poly, {X.x1 + h, X.x2}), m1 = phi_grad(poly, {X.x1 - h, X.x2});
    const Vec2 p2 = phi_grad(poly, {X.x1, X.x2 + h}), m2 = phi_grad(poly, {X.x1, X.x2 - h});
    return {(p1.x1 - m1.x1) / (2 * h), (p2.x1 - m2.x1) / (2 * h), (p1.x2 - m1.x2) / (2 * h),
            (p2.x2 - m2.x2) / (2 * h)};
}

inline const std::vector<double>& param_values() {
    static const std::vector<double> v{0.1, 1.0, 10.0};
    return v;
}

}  // namespace muskat::testing
