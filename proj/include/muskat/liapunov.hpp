#pragma once

// Polynomial Liapunov family for the thin-film Muskat system, the mobility
// matrices, and the symmetrizer. Everything here is a pure function of its
// arguments.

#include <muskat/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace muskat {

inline constexpr int kMaxOrder = 64;

/// Density ratio R and viscosity ratio mu, both strictly positive.
class PhysParams {
  public:
    PhysParams(double R, double mu) : R_(R), mu_(mu) {
        if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("PhysParams: R must be positive, got " + std::to_string(R));
        if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("PhysParams: mu must be positive, got " + std::to_string(mu));
    }

    double R() const noexcept { return R_; }
    double mu() const noexcept { return mu_; }
    /// R * max{1, mu}, the quantity governing the L-infinity bound for f alone.
    double r_max() const noexcept { return R_ * std::max(1.0, mu_); }

    friend bool operator==(const PhysParams&, const PhysParams&) = default;

  private:
    double R_;
    double mu_;
};

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }

struct Matrix2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m21 = 0.0;
    double m22 = 0.0;

    static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const { return m11 * m22 - m12 * m21; }
    double trace() const { return m11 + m22; }
    double max_abs() const { return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)}); }
    Matrix2 transpose() const { return {m11, m21, m12, m22}; }

    Vec2 operator*(Vec2 v) const { return {m11 * v.x1 + m12 * v.x2, m21 * v.x1 + m22 * v.x2}; }

    friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
    friend Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
        return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
    }
    friend Matrix2 operator*(double s, const Matrix2& a) { return {s * a.m11, s * a.m12, s * a.m21, s * a.m22}; }

    /// <A xi, xi>
    double quadratic_form(Vec2 xi) const { return dot((*this) * xi, xi); }

    friend bool operator==(const Matrix2&, const Matrix2&) = default;
};

/// Eigenvalues of the symmetric part of `a`, ascending.
inline std::pair<double, double> sym_eigenvalues(const Matrix2& a) {
    const double off = 0.5 * (a.m12 + a.m21);
    const double mean = 0.5 * (a.m11 + a.m22);
    const double half_diff = 0.5 * (a.m11 - a.m22);
    const double rad = std::hypot(half_diff, off);
    return {mean - rad, mean + rad};
}

inline double positive_part(double r) { return r > 0.0 ? r : 0.0; }

/// L(r) = r ln r - r + 1 on [0, inf), with L(0) = 1.
inline double entropy_L(double r) {
    if (r < 0.0) throw DomainError("entropy_L: negative argument " + std::to_string(r));
    if (r == 0.0) return 1.0;
    return r * std::log(r) - r + 1.0;
}

/// alpha_{k,n} = R (k + mu (n - k - 1)).
inline double alpha(int k, int n, const PhysParams& p) {
    if (n < 2) throw DomainError("alpha: order must be >= 2, got " + std::to_string(n));
    if (k < 0 || k > n - 1) {
        throw DomainError("alpha: index k=" + std::to_string(k) + " outside [0, " + std::to_string(n - 1) + "]");
    }
    return p.R() * (k + p.mu() * (n - k - 1));
}

/// Member of the Liapunov family. Order 1 is the (non-polynomial) entropy and
/// carries no coefficients; orders >= 2 hold a_{0,n}, ..., a_{n,n}.
class LiapunovPoly {
  public:
    static LiapunovPoly entropy(const PhysParams& p) { return LiapunovPoly(1, p, {}); }

    LiapunovPoly(int n, const PhysParams& p, std::vector<double> coeffs)
        : n_(n), params_(p), coeffs_(std::move(coeffs)) {
        if (n < 1) throw DomainError("LiapunovPoly: order must be >= 1");
        if (n >= 2 && coeffs_.size() != static_cast<std::size_t>(n + 1)) {
            throw DomainError("LiapunovPoly: expected " + std::to_string(n + 1) + " coefficients");
        }
    }

    int order() const noexcept { return n_; }
    bool is_entropy() const noexcept { return n_ == 1; }
    const PhysParams& params() const noexcept { return params_; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    double coeff(int j) const { return coeffs_.at(static_cast<std::size_t>(j)); }

  private:
    int n_;
    PhysParams params_;
    std::vector<double> coeffs_;
};

namespace detail {

inline void check_order(int n, const char* who) {
    if (n < 2) throw DomainError(std::string(who) + ": order must be >= 2, got " + std::to_string(n));
    if (n > kMaxOrder) {
        throw OverflowError(std::string(who) + ": order " + std::to_string(n) + " exceeds supported maximum " +
                            std::to_string(kMaxOrder));
    }
}

inline void check_finite_coeffs(const std::vector<double>& c, int n, const char* who) {
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!std::isfinite(c[j]) || c[j] <= 0.0) {
            throw OverflowError(std::string(who) + ": coefficient a_{" + std::to_string(j) + "," + std::to_string(n) +
                                "} left double range");
        }
    }
}

/// Exact binomial coefficient; C(64, 32) still fits in 64 bits.
inline std::uint64_t binomial(int n, int j) {
    j = std::min(j, n - j);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= j; ++i) acc = acc * static_cast<unsigned>(n - j + i) / static_cast<unsigned>(i);
    return static_cast<std::uint64_t>(acc);
}

inline void check_poly(const LiapunovPoly& poly, const char* who) {
    if (poly.is_entropy()) throw DomainError(std::string(who) + ": requires a polynomial member (order >= 2)");
}

}  // namespace detail

/// Coefficients from the closed product formula
///   a_{j,n} = C(n,j) prod_{k<j} (k + alpha_{k,n}) / alpha_{k,n}.
inline LiapunovPoly build_coeffs(int n, const PhysParams& p) {
    detail::check_order(n, "build_coeffs");
    std::vector<double> c(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j) {
        double prod = 1.0;
        for (int k = 0; k < j; ++k) {
            const double a = alpha(k, n, p);
            prod *= (k + a) / a;
        }
        c[static_cast<std::size_t>(j)] = static_cast<double>(detail::binomial(n, j)) * prod;
    }
    detail::check_finite_coeffs(c, n, "build_coeffs");
    return LiapunovPoly(n, p, std::move(c));
}

/// Coefficients from a_{0,n} = 1 and
///   a_{j+1,n} = (n-j)(j + alpha_{j,n}) / ((j+1) alpha_{j,n}) a_{j,n}.
inline LiapunovPoly build_coeffs_recursive(int n, const PhysParams& p) {
    detail::check_order(n, "build_coeffs_recursive");
    std::vector<double> c(static_cast<std::size_t>(n + 1));
    c[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        const double a = alpha(j, n, p);
        c[static_cast<std::size_t>(j + 1)] = (n - j) * (j + a) / ((j + 1) * a) * c[static_cast<std::size_t>(j)];
    }
    detail::check_finite_coeffs(c, n, "build_coeffs_recursive");
    return LiapunovPoly(n, p, std::move(c));
}

/// Order-n member of the family: entropy for n = 1, recursion-built polynomial otherwise.
inline LiapunovPoly liapunov(int n, const PhysParams& p) {
    return n == 1 ? LiapunovPoly::entropy(p) : build_coeffs_recursive(n, p);
}

namespace detail {

inline std::vector<double> powers(double x, int n) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0) + 1));
    out[0] = 1.0;
    for (int i = 1; i <= n; ++i) out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i - 1)] * x;
    return out;
}

}  // namespace detail

inline double phi_eval(const LiapunovPoly& poly, Vec2 X) {
    if (poly.is_entropy()) {
        if (X.x1 < 0.0 || X.x2 < 0.0) throw DomainError("phi_eval: entropy requires a point in [0,inf)^2");
        return entropy_L(X.x1) + entropy_L(X.x2) / poly.params().mu();
    }
    const int n = poly.order();
    const auto p1 = detail::powers(X.x1, n);
    const auto p2 = detail::powers(X.x2, n);
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
        sum += poly.coeff(j) * p1[static_cast<std::size_t>(j)] * p2[static_cast<std::size_t>(n - j)];
    }
    return sum;
}

inline Vec2 phi_grad(const LiapunovPoly& poly, Vec2 X) {
    detail::check_poly(poly, "phi_grad");
    const int n = poly.order();
    const auto p1 = detail::powers(X.x1, n);
    const auto p2 = detail::powers(X.x2, n);
    Vec2 g;
    for (int j = 0; j <= n - 1; ++j) {
        const double mono = p1[static_cast<std::size_t>(j)] * p2[static_cast<std::size_t>(n - j - 1)];
        g.x1 += (j + 1) * poly.coeff(j + 1) * mono;
        g.x2 += (n - j) * poly.coeff(j) * mono;
    }
    return g;
}

inline Matrix2 phi_hessian(const LiapunovPoly& poly, Vec2 X) {
    detail::check_poly(poly, "phi_hessian");
    const int n = poly.order();
    const auto p1 = detail::powers(X.x1, n);
    const auto p2 = detail::powers(X.x2, n);
    double d11 = 0.0, d12 = 0.0, d22 = 0.0;
    for (int j = 0; j <= n - 2; ++j) {
        const double mono = p1[static_cast<std::size_t>(j)] * p2[static_cast<std::size_t>(n - j - 2)];
        d11 += (j + 1) * (j + 2) * poly.coeff(j + 2) * mono;
        d12 += (j + 1) * (n - j - 1) * poly.coeff(j + 1) * mono;
        d22 += (n - j) * (n - j - 1) * poly.coeff(j) * mono;
    }
    return {d11, d12, d12, d22};
}

/// M(X) = [[(1+R) X1, R X1], [mu R X2, mu R X2]].
inline Matrix2 mobility(const PhysParams& p, Vec2 X) {
    const double R = p.R();
    const double muR = p.mu() * R;
    return {(1.0 + R) * X.x1, R * X.x1, muR * X.x2, muR * X.x2};
}

/// M_eps(X) = eps I + M((X1)_+, (X2)_+).
inline Matrix2 mobility_reg(const PhysParams& p, double eps, Vec2 X) {
    if (!(eps > 0.0)) throw DomainError("mobility_reg: eps must be positive");
    return eps * Matrix2::identity() + mobility(p, {positive_part(X.x1), positive_part(X.x2)});
}

/// Constant symmetrizer S = [[1+R, R], [R, R]] (Hessian of R Phi_2 / 2).
inline Matrix2 s_matrix(const PhysParams& p) {
    const double R = p.R();
    return {1.0 + R, R, R, R};
}

/// Coercivity constant of S: <S xi, xi> >= R/(1+2R) |xi|^2.
inline double s_coercivity(const PhysParams& p) { return p.R() / (1.0 + 2.0 * p.R()); }

inline Matrix2 sm_product(const PhysParams& p, Vec2 X) { return s_matrix(p) * mobility(p, X); }

/// S_n(X) = D^2 Phi_n(X) M(X).
inline Matrix2 hessian_mobility_product(const LiapunovPoly& poly, const PhysParams& p, Vec2 X) {
    return phi_hessian(poly, X) * mobility(p, X);
}

/// nu_n = exp{(n-1)[(1+r) ln(1+1/r) - 1]} - 1 with r = R max{1, mu}.
inline double nu_lower(int n, const PhysParams& p) {
    if (n < 2) throw DomainError("nu_lower: order must be >= 2");
    const double r = p.r_max();
    return std::expm1((n - 1) * ((1.0 + r) * std::log1p(1.0 / r) - 1.0));
}

struct BoundCheck {
    double lower = 0.0;  // nu_n X1^n + (X1+X2)^n
    double value = 0.0;  // Phi_n(X)
    double upper = 0.0;  // ((1+R) X1 + R X2)^n / R^n
    bool lower_holds = false;
    bool upper_holds = false;
    bool all_hold = false;
};

/// Sandwich nu_n X1^n + (X1+X2)^n <= Phi_n(X) <= ((1+R)X1 + R X2)^n / R^n on the
/// closed positive cone, each side with relative slack 1e-10.
inline BoundCheck check_bounds(const LiapunovPoly& poly, const PhysParams& p, Vec2 X) {
    detail::check_poly(poly, "check_bounds");
    if (X.x1 < 0.0 || X.x2 < 0.0) throw DomainError("check_bounds: point must lie in [0,inf)^2");
    constexpr double slack = 1e-10;
    const int n = poly.order();
    BoundCheck out;
    out.lower = nu_lower(n, p) * std::pow(X.x1, n) + std::pow(X.x1 + X.x2, n);
    out.value = phi_eval(poly, X);
    out.upper = std::pow(((1.0 + p.R()) * X.x1 + p.R() * X.x2) / p.R(), n);
    out.lower_holds = out.lower <= out.value * (1.0 + slack);
    out.upper_holds = out.value <= out.upper * (1.0 + slack);
    out.all_hold = out.lower_holds && out.upper_holds;
    return out;
}

struct ScalarDensities {
    double energy = 0.0;   // (1/2)[X1^2 + R (X1+X2)^2]
    double entropy = 0.0;  // L(X1) + L(X2)/mu
};

inline ScalarDensities scalar_functionals(const PhysParams& p, Vec2 X) {
    if (X.x1 < 0.0 || X.x2 < 0.0) throw DomainError("scalar_functionals: point must lie in [0,inf)^2");
    const double s = X.x1 + X.x2;
    return {0.5 * (X.x1 * X.x1 + p.R() * s * s), entropy_L(X.x1) + entropy_L(X.x2) / p.mu()};
}

}  // namespace muskat
