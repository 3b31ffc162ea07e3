#pragma once

// Post-hoc audits of diagnostics records against the continuous-level
// estimates. Tolerances are relative-plus-absolute: a bound B is treated as
// B (1 + tol) + tol unless stated otherwise.

#include <muskat/errors.hpp>
#include <muskat/liapunov.hpp>
#include <muskat/simulator.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace muskat {

enum class AuditStatus { pass, fail, not_applicable };

inline const char* to_string(AuditStatus s) {
    switch (s) {
        case AuditStatus::pass: return "pass";
        case AuditStatus::fail: return "fail";
        case AuditStatus::not_applicable: return "not-applicable";
    }
    return "?";
}

struct AuditReport {
    std::string check;
    AuditStatus status = AuditStatus::pass;
    double worst_violation = 0.0;  // largest amount by which a bound was exceeded (<= 0 when none was)
    long location = -1;            // record index of the worst violation
    double tolerance = 0.0;
    std::string note;

    bool passed() const { return status != AuditStatus::fail; }
};

struct AuditTolerances {
    double monotone = 1e-8;
    double entropy = 1e-6;
    double linf = 1e-6;
    double mass = 1e-9;
};

namespace detail {

/// Tracks the worst (largest) violation and where it happened.
struct Worst {
    double value = -std::numeric_limits<double>::infinity();
    long at = -1;

    void update(double v, long i) {
        if (v > value) {
            value = v;
            at = i;
        }
    }
};

inline AuditReport finish(std::string check, const Worst& w, double tol, bool failed) {
    AuditReport r;
    r.check = std::move(check);
    r.status = failed ? AuditStatus::fail : AuditStatus::pass;
    r.worst_violation = w.at < 0 ? 0.0 : w.value;
    r.location = w.at;
    r.tolerance = tol;
    return r;
}

}  // namespace detail

/// Fails iff some s[k+1] > s[k] (1 + tol) + tol. The reported violation is the
/// worst raw increase s[k+1] - s[k].
inline AuditReport audit_monotone(std::span<const double> series, double rel_tol, std::string check = "monotone") {
    if (series.empty()) throw DomainError("audit_monotone: empty series");
    if (!(rel_tol >= 0.0)) throw DomainError("audit_monotone: tolerance must be non-negative");
    detail::Worst w;
    bool failed = false;
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
        const double inc = series[k + 1] - series[k];
        w.update(inc, static_cast<long>(k + 1));
        if (series[k + 1] > series[k] * (1.0 + rel_tol) + rel_tol) failed = true;
    }
    return detail::finish(std::move(check), w, rel_tol, failed);
}

/// Cumulative entropy estimate:
///   entropy(t_k) + sum_{j <= k} (t_j - t_{j-1}) dissipation_j <= entropy(0) (1 + tol) + tol.
/// The weights are the record spacings, which equal tau when every step is
/// recorded. Records spaced wider than tau cannot be checked this way and the
/// audit reports not-applicable.
inline AuditReport audit_entropy_dissipation(std::span<const DiagnosticsRecord> records, double tau, double rel_tol) {
    if (records.empty()) throw DomainError("audit_entropy_dissipation: no records");
    if (!(tau > 0.0)) throw DomainError("audit_entropy_dissipation: tau must be positive");
    for (std::size_t k = 1; k < records.size(); ++k) {
        const double dt = records[k].t - records[k - 1].t;
        if (dt > tau * (1.0 + 1e-9)) {
            AuditReport r;
            r.check = "entropy_dissipation";
            r.status = AuditStatus::not_applicable;
            r.tolerance = rel_tol;
            r.note = "records are not written every step (record_every > 1)";
            return r;
        }
    }
    const double e0 = records.front().entropy;
    const double bound = e0 * (1.0 + rel_tol) + rel_tol;
    detail::Worst w;
    double cum = 0.0;
    bool failed = false;
    for (std::size_t k = 1; k < records.size(); ++k) {
        cum += (records[k].t - records[k - 1].t) * records[k].dissipation;
        const double lhs = records[k].entropy + cum;
        w.update(lhs - e0, static_cast<long>(k));
        if (lhs > bound) failed = true;
    }
    return detail::finish("entropy_dissipation", w, rel_tol, failed);
}

/// |f + g|_inf <= (1+R)/R |f_in + g_in|_inf (1 + tol).
inline AuditReport audit_linf_bound(std::span<const DiagnosticsRecord> records, const PhysParams& p,
                                    double initial_linf_sum, double rel_tol = 1e-6) {
    const double bound = (1.0 + p.R()) / p.R() * initial_linf_sum;
    detail::Worst w;
    bool failed = false;
    for (std::size_t k = 0; k < records.size(); ++k) {
        w.update(records[k].linf_sum - bound, static_cast<long>(k));
        if (records[k].linf_sum > bound * (1.0 + rel_tol)) failed = true;
    }
    AuditReport r = detail::finish("linf_bound", w, rel_tol, failed);
    r.note = "bound " + std::to_string(bound);
    return r;
}

/// Threshold 1/(2e) on R max{1, mu} below which |f|_inf is controlled alone.
inline constexpr double kCorollaryThreshold = 1.0 / (2.0 * std::numbers::e);

inline double corollary_bound(const PhysParams& p, double initial_linf_f, double initial_linf_g) {
    return (1.0 + std::numbers::e * std::max(1.0, p.mu())) * initial_linf_f + initial_linf_g;
}

/// |f|_inf <= (1 + e max{1, mu}) |f_in|_inf + |g_in|_inf (1 + tol), applicable
/// only when R max{1, mu} <= 1/(2e).
inline AuditReport audit_corollary_bound(std::span<const DiagnosticsRecord> records, const PhysParams& p,
                                         double initial_linf_f, double initial_linf_g, double rel_tol = 1e-6) {
    if (p.r_max() > kCorollaryThreshold) {
        AuditReport r;
        r.check = "corollary_bound";
        r.status = AuditStatus::not_applicable;
        r.tolerance = rel_tol;
        r.note = "R max{1,mu} = " + std::to_string(p.r_max()) + " exceeds 1/(2e)";
        return r;
    }
    const double bound = corollary_bound(p, initial_linf_f, initial_linf_g);
    detail::Worst w;
    bool failed = false;
    for (std::size_t k = 0; k < records.size(); ++k) {
        w.update(records[k].linf_f - bound, static_cast<long>(k));
        if (records[k].linf_f > bound * (1.0 + rel_tol)) failed = true;
    }
    AuditReport r = detail::finish("corollary_bound", w, rel_tol, failed);
    r.note = "bound " + std::to_string(bound);
    return r;
}

/// |mass(t) - mass(0)| <= tol (mass(0) + 1) for both components. The reported
/// violation is the worst relative drift |mass(t) - mass(0)| / (mass(0) + 1).
inline AuditReport audit_mass(std::span<const DiagnosticsRecord> records, double rel_tol) {
    if (records.empty()) throw DomainError("audit_mass: no records");
    const double f0 = records.front().mass_f;
    const double g0 = records.front().mass_g;
    detail::Worst w;
    bool failed = false;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const double df = std::abs(records[k].mass_f - f0) / (std::abs(f0) + 1.0);
        const double dg = std::abs(records[k].mass_g - g0) / (std::abs(g0) + 1.0);
        w.update(std::max(df, dg), static_cast<long>(k));
        if (df > rel_tol || dg > rel_tol) failed = true;
    }
    return detail::finish("mass", w, rel_tol, failed);
}

/// Full audit set over one run: mass, every phi series, entropy, L-inf, corollary.
inline std::vector<AuditReport> audit_all(std::span<const DiagnosticsRecord> records, const PhysParams& p, double tau,
                                          const AuditTolerances& tol = {}) {
    if (records.empty()) throw DomainError("audit_all: no records");
    std::vector<AuditReport> out;
    out.push_back(audit_mass(records, tol.mass));
    for (const auto& [n, v] : records.front().phi) {
        std::vector<double> series;
        series.reserve(records.size());
        for (const auto& r : records) {
            auto it = r.phi.find(n);
            if (it == r.phi.end()) throw DomainError("audit_all: record lacks phi_" + std::to_string(n));
            series.push_back(it->second);
        }
        out.push_back(audit_monotone(series, tol.monotone, "monotone_phi_" + std::to_string(n)));
    }
    out.push_back(audit_entropy_dissipation(records, tau, tol.entropy));
    out.push_back(audit_linf_bound(records, p, records.front().linf_sum, tol.linf));
    out.push_back(audit_corollary_bound(records, p, records.front().linf_f, records.front().linf_g, tol.linf));
    return out;
}

inline bool all_passed(std::span<const AuditReport> reports) {
    return std::all_of(reports.begin(), reports.end(), [](const AuditReport& r) { return r.passed(); });
}

}  // namespace muskat
