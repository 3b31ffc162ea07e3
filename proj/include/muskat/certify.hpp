#pragma once

// Exact rational certification of the algebraic identities behind the
// Liapunov family: coefficient recursion, the A_{j,k} closed form and its
// antisymmetry, symmetry of S_n = D^2 Phi_n M, and the determinant lower bound.
// Rationals are GMP mpq_class values, always canonical.

#include <muskat/errors.hpp>

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace muskat::certify {

using Rational = mpq_class;

inline Rational make_rational(const std::string& text) {
    Rational q;
    if (q.set_str(text, 10) != 0) throw DomainError("not a rational number: '" + text + "'");
    if (q.get_den() == 0) throw DomainError("zero denominator in '" + text + "'");
    q.canonicalize();
    return q;
}

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw DomainError("zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

class RatParams {
  public:
    RatParams(Rational R, Rational mu) : R_(std::move(R)), mu_(std::move(mu)) {
        R_.canonicalize();
        mu_.canonicalize();
        if (sgn(R_) <= 0) throw DomainError("RatParams: R must be positive");
        if (sgn(mu_) <= 0) throw DomainError("RatParams: mu must be positive");
    }

    const Rational& R() const noexcept { return R_; }
    const Rational& mu() const noexcept { return mu_; }

  private:
    Rational R_;
    Rational mu_;
};

/// Sparse bivariate polynomial sum c_{ij} X1^i X2^j. Zero coefficients are never
/// stored; the ordered map gives a deterministic iteration order.
class BivarPoly {
  public:
    using Exponent = std::pair<int, int>;
    using Terms = std::map<Exponent, Rational>;

    BivarPoly() = default;

    static BivarPoly monomial(const Rational& c, int i, int j) {
        BivarPoly p;
        p.add_term(c, i, j);
        return p;
    }

    void add_term(const Rational& c, int i, int j) {
        if (i < 0 || j < 0) throw DomainError("BivarPoly: negative exponent");
        if (sgn(c) == 0) return;
        auto [it, inserted] = terms_.try_emplace({i, j}, c);
        if (!inserted) {
            it->second += c;
            if (sgn(it->second) == 0) terms_.erase(it);
        }
    }

    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    Rational coeff(int i, int j) const {
        auto it = terms_.find({i, j});
        return it == terms_.end() ? Rational(0) : it->second;
    }

    /// True when every stored exponent pair sums to `degree`.
    bool is_homogeneous(int degree) const {
        for (const auto& [e, c] : terms_) {
            if (e.first + e.second != degree) return false;
        }
        return true;
    }

    int total_degree() const {
        int d = -1;
        for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
        return d;
    }

    Rational evaluate(const Rational& x1, const Rational& x2) const {
        Rational sum = 0;
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (int k = 0; k < e.first; ++k) t *= x1;
            for (int k = 0; k < e.second; ++k) t *= x2;
            sum += t;
        }
        return sum;
    }

    friend BivarPoly operator+(const BivarPoly& a, const BivarPoly& b) {
        BivarPoly out = a;
        for (const auto& [e, c] : b.terms_) out.add_term(c, e.first, e.second);
        return out;
    }

    friend BivarPoly operator-(const BivarPoly& a, const BivarPoly& b) {
        BivarPoly out = a;
        for (const auto& [e, c] : b.terms_) out.add_term(-c, e.first, e.second);
        return out;
    }

    friend BivarPoly operator*(const BivarPoly& a, const BivarPoly& b) {
        BivarPoly out;
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                out.add_term(ca * cb, ea.first + eb.first, ea.second + eb.second);
            }
        }
        return out;
    }

    friend bool operator==(const BivarPoly& a, const BivarPoly& b) { return a.terms_ == b.terms_; }

  private:
    Terms terms_;
};

/// Row-major 2x2 matrix of polynomials: {11, 12, 21, 22}.
using PolyMatrix2 = std::array<BivarPoly, 4>;

inline Rational rat_alpha(int k, int n, const RatParams& rp) {
    if (k < 0 || k > n - 1) throw DomainError("rat_alpha: index out of range");
    return rp.R() * (Rational(k) + rp.mu() * Rational(n - k - 1));
}

namespace detail {

inline void check_order(int n, const char* who) {
    if (n < 2) throw DomainError(std::string(who) + ": order must be >= 2, got " + std::to_string(n));
}

inline Rational binomial(int n, int j) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(j));
    return Rational(b);
}

}  // namespace detail

/// Exact a_{j,n} via the recursion from a_{0,n} = 1.
inline std::vector<Rational> rat_coeffs(int n, const RatParams& rp) {
    detail::check_order(n, "rat_coeffs");
    std::vector<Rational> a(static_cast<std::size_t>(n + 1));
    a[0] = 1;
    for (int j = 0; j < n; ++j) {
        const Rational al = rat_alpha(j, n, rp);
        a[static_cast<std::size_t>(j + 1)] = Rational(n - j) * (Rational(j) + al) / (Rational(j + 1) * al) * a[static_cast<std::size_t>(j)];
    }
    return a;
}

/// Exact a_{j,n} via the binomial-times-product formula.
inline std::vector<Rational> rat_coeffs_product(int n, const RatParams& rp) {
    detail::check_order(n, "rat_coeffs_product");
    std::vector<Rational> a(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j) {
        Rational prod = 1;
        for (int k = 0; k < j; ++k) {
            const Rational al = rat_alpha(k, n, rp);
            prod *= (Rational(k) + al) / al;
        }
        a[static_cast<std::size_t>(j)] = detail::binomial(n, j) * prod;
    }
    return a;
}

struct AjkValues {
    Rational definition;   // (j+2)(n-k) a_{j+2} a_k - (n-j-1)(k+1) a_{j+1} a_{k+1}
    Rational closed_form;  // mu R (n-1) (n-j-1)(n-k)(j+1-k) a_{j+1} a_k / (alpha_{j+1} alpha_k)

    bool agree() const { return definition == closed_form; }
};

inline AjkValues a_jk(int j, int k, int n, const RatParams& rp, const std::vector<Rational>& a) {
    if (j < 0 || k < 0 || j > n - 2 || k > n - 2) {
        throw DomainError("a_jk: indices (" + std::to_string(j) + "," + std::to_string(k) + ") outside [0," +
                          std::to_string(n - 2) + "]");
    }
    auto at = [&](int i) -> const Rational& { return a.at(static_cast<std::size_t>(i)); };
    AjkValues v;
    v.definition = Rational((j + 2) * (n - k)) * at(j + 2) * at(k) - Rational((n - j - 1) * (k + 1)) * at(j + 1) * at(k + 1);
    v.closed_form = rp.mu() * rp.R() * Rational((n - 1) * (n - j - 1) * (n - k) * (j + 1 - k)) * at(j + 1) * at(k) /
                    (rat_alpha(j + 1, n, rp) * rat_alpha(k, n, rp));
    return v;
}

inline AjkValues a_jk(int j, int k, int n, const RatParams& rp) {
    detail::check_order(n, "a_jk");
    return a_jk(j, k, n, rp, rat_coeffs(n, rp));
}

/// Definition and closed form of A_{j,k} agree for every 0 <= j,k <= n-2.
inline bool verify_a_identity(int n, const RatParams& rp) {
    detail::check_order(n, "verify_a_identity");
    const auto a = rat_coeffs(n, rp);
    for (int j = 0; j <= n - 2; ++j) {
        for (int k = 0; k <= n - 2; ++k) {
            if (!a_jk(j, k, n, rp, a).agree()) return false;
        }
    }
    return true;
}

/// A_{k-1,j+1} = -A_{j,k} for 0 <= j <= n-3, 1 <= k <= n-2, using the definition.
inline bool verify_antisymmetry(int n, const RatParams& rp) {
    if (n < 3) throw DomainError("verify_antisymmetry: order must be >= 3");
    const auto a = rat_coeffs(n, rp);
    for (int j = 0; j <= n - 3; ++j) {
        for (int k = 1; k <= n - 2; ++k) {
            if (a_jk(k - 1, j + 1, n, rp, a).definition != -a_jk(j, k, n, rp, a).definition) return false;
        }
    }
    return true;
}

/// Exact Hessian entries {d11, d12, d12, d22} of Phi_n.
inline PolyMatrix2 hessian_polys(int n, const RatParams& rp) {
    detail::check_order(n, "hessian_polys");
    const auto a = rat_coeffs(n, rp);
    auto at = [&](int i) -> const Rational& { return a.at(static_cast<std::size_t>(i)); };
    BivarPoly d11, d12, d22;
    for (int j = 0; j <= n - 2; ++j) {
        d11.add_term(Rational((j + 1) * (j + 2)) * at(j + 2), j, n - j - 2);
        d12.add_term(Rational((j + 1) * (n - j - 1)) * at(j + 1), j, n - j - 2);
        d22.add_term(Rational((n - j) * (n - j - 1)) * at(j), j, n - j - 2);
    }
    return {d11, d12, d12, d22};
}

inline PolyMatrix2 mobility_polys(const RatParams& rp) {
    const Rational muR = rp.mu() * rp.R();
    return {BivarPoly::monomial(1 + rp.R(), 1, 0), BivarPoly::monomial(rp.R(), 1, 0), BivarPoly::monomial(muR, 0, 1),
            BivarPoly::monomial(muR, 0, 1)};
}

inline PolyMatrix2 multiply(const PolyMatrix2& A, const PolyMatrix2& B) {
    return {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3], A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3]};
}

/// Exact expansion of S_n(X) = D^2 Phi_n(X) M(X).
inline PolyMatrix2 expand_sn(int n, const RatParams& rp) {
    return multiply(hessian_polys(n, rp), mobility_polys(rp));
}

/// The off-diagonal entries of S_n coincide coefficient by coefficient.
inline bool verify_symmetry(int n, const RatParams& rp) {
    const auto s = expand_sn(n, rp);
    return s[1] == s[2];
}

/// det(D^2 Phi_n) as an exact polynomial.
inline BivarPoly hessian_det_poly(int n, const RatParams& rp) {
    const auto h = hessian_polys(n, rp);
    return h[0] * h[3] - h[1] * h[2];
}

/// Lower bound polynomial for det(D^2 Phi_n) on the closed cone:
///   (n-1) A_{n-2,n-2} X1^{2n-4} + (n-1) A_{0,0} X2^{2n-4}.
/// For n = 2 both monomials are the constant 1 and det(D^2 Phi_2) = A_{0,0}
/// exactly, so the single term A_{0,0} is used.
inline BivarPoly det_lower_bound_poly(int n, const RatParams& rp) {
    detail::check_order(n, "det_lower_bound_poly");
    const auto a = rat_coeffs(n, rp);
    if (n == 2) return BivarPoly::monomial(a_jk(0, 0, 2, rp, a).definition, 0, 0);
    BivarPoly b;
    b.add_term(Rational(n - 1) * a_jk(n - 2, n - 2, n, rp, a).definition, 2 * n - 4, 0);
    b.add_term(Rational(n - 1) * a_jk(0, 0, n, rp, a).definition, 0, 2 * n - 4);
    return b;
}

using RationalPoint = std::pair<Rational, Rational>;

inline bool verify_det_lower_bound(int n, const RatParams& rp, const std::vector<RationalPoint>& samples) {
    for (const auto& [x1, x2] : samples) {
        if (sgn(x1) < 0 || sgn(x2) < 0) throw DomainError("verify_det_lower_bound: sample outside [0,inf)^2");
    }
    const BivarPoly det = hessian_det_poly(n, rp);
    const BivarPoly bound = det_lower_bound_poly(n, rp);
    for (const auto& [x1, x2] : samples) {
        if (det.evaluate(x1, x2) < bound.evaluate(x1, x2)) return false;
    }
    return true;
}

/// Deterministic rational lattice points in [0, extent]^2 with spacing 1/denominator.
/// The origin and the two axis points (extent, 0), (0, extent) always come first.
inline std::vector<RationalPoint> lattice_samples(std::size_t count, long extent, long denominator,
                                                  std::uint64_t seed) {
    std::vector<RationalPoint> pts;
    pts.reserve(count);
    const std::array<RationalPoint, 3> fixed{RationalPoint{0, 0}, RationalPoint{extent, 0}, RationalPoint{0, extent}};
    for (const auto& p : fixed) {
        if (pts.size() < count) pts.push_back(p);
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> pick(0, extent * denominator);
    while (pts.size() < count) pts.emplace_back(make_rational(pick(rng), denominator), make_rational(pick(rng), denominator));
    return pts;
}

}  // namespace muskat::certify
