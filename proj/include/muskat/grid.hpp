#pragma once

// Uniform 1D P1 discretization with lumped mass and homogeneous Neumann
// boundaries, plus the quadratures used by the diagnostics.

#include <muskat/errors.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace muskat {

using NodalField = std::vector<double>;

class Grid {
  public:
    Grid(double a, double b, std::size_t m) : a_(a), b_(b), m_(m) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw DomainError("Grid: require a < b");
        if (m < 2) throw DomainError("Grid: require at least 2 nodes, got " + std::to_string(m));
        h_ = (b - a) / static_cast<double>(m - 1);
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t size() const noexcept { return m_; }
    double h() const noexcept { return h_; }
    double length() const noexcept { return b_ - a_; }
    double node(std::size_t i) const { return i + 1 == m_ ? b_ : a_ + static_cast<double>(i) * h_; }

    std::vector<double> nodes() const {
        std::vector<double> x(m_);
        for (std::size_t i = 0; i < m_; ++i) x[i] = node(i);
        return x;
    }

  private:
    double a_;
    double b_;
    std::size_t m_;
    double h_ = 0.0;
};

inline Grid build_grid(double a, double b, long m) {
    if (m < 2) throw DomainError("build_grid: require m >= 2, got " + std::to_string(m));
    return Grid(a, b, static_cast<std::size_t>(m));
}

/// Tridiagonal matrix: lower[i] = A(i+1, i), diag[i] = A(i, i), upper[i] = A(i, i+1).
struct TridiagMatrix {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit TridiagMatrix(std::size_t m) : lower(m > 0 ? m - 1 : 0), diag(m), upper(m > 0 ? m - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }

    double row_sum(std::size_t i) const {
        double s = diag[i];
        if (i > 0) s += lower[i - 1];
        if (i + 1 < size()) s += upper[i];
        return s;
    }

    NodalField apply(std::span<const double> v) const {
        const std::size_t m = size();
        if (v.size() != m) throw DomainError("TridiagMatrix::apply: length mismatch");
        NodalField out(m);
        for (std::size_t i = 0; i < m; ++i) {
            double s = diag[i] * v[i];
            if (i > 0) s += lower[i - 1] * v[i - 1];
            if (i + 1 < m) s += upper[i] * v[i + 1];
            out[i] = s;
        }
        return out;
    }

    /// v^T A v
    double quadratic_form(std::span<const double> v) const {
        const auto Av = apply(v);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * Av[i];
        return s;
    }
};

namespace detail {

inline void check_length(const Grid& g, std::size_t n, const char* who) {
    if (n != g.size()) {
        throw DomainError(std::string(who) + ": field has " + std::to_string(n) + " entries, grid has " +
                          std::to_string(g.size()));
    }
}

}  // namespace detail

/// Lumped P1 mass: diag(h/2, h, ..., h, h/2).
inline TridiagMatrix assemble_mass(const Grid& g) {
    TridiagMatrix M(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) M.diag[i] = g.h();
    M.diag.front() = 0.5 * g.h();
    M.diag.back() = 0.5 * g.h();
    return M;
}

/// Stiffness of int w phi_i' phi_j' with one weight per element (m - 1 entries).
inline TridiagMatrix assemble_element_stiffness(const Grid& g, std::span<const double> w_elem) {
    if (w_elem.size() + 1 != g.size()) {
        throw DomainError("assemble_element_stiffness: expected " + std::to_string(g.size() - 1) +
                          " element weights, got " + std::to_string(w_elem.size()));
    }
    TridiagMatrix K(g.size());
    const double inv_h = 1.0 / g.h();
    for (std::size_t e = 0; e < w_elem.size(); ++e) {
        const double k = w_elem[e] * inv_h;
        K.diag[e] += k;
        K.diag[e + 1] += k;
        K.upper[e] -= k;
        K.lower[e] -= k;
    }
    return K;
}

/// Stiffness of int w phi_i' phi_j' with w constant per element, equal to the
/// average of its two nodal values.
inline TridiagMatrix assemble_weighted_stiffness(const Grid& g, std::span<const double> w) {
    detail::check_length(g, w.size(), "assemble_weighted_stiffness");
    std::vector<double> w_elem(g.size() - 1);
    for (std::size_t e = 0; e < w_elem.size(); ++e) w_elem[e] = 0.5 * (w[e] + w[e + 1]);
    return assemble_element_stiffness(g, w_elem);
}

/// Trapezoidal rule, identical to summing against the lumped mass.
inline double integrate_nodal(const Grid& g, std::span<const double> v) {
    detail::check_length(g, v.size(), "integrate_nodal");
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) interior += v[i];
    return g.h() * (interior + 0.5 * (v.front() + v.back()));
}

/// int |v'|^2 for the piecewise-linear interpolant of v.
inline double gradient_sq_norm(const Grid& g, std::span<const double> v) {
    detail::check_length(g, v.size(), "gradient_sq_norm");
    double s = 0.0;
    for (std::size_t e = 0; e + 1 < v.size(); ++e) {
        const double d = v[e + 1] - v[e];
        s += d * d;
    }
    return s / g.h();
}

}  // namespace muskat
