#pragma once

#include <muskat/certify.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <future>
#include <string>
#include <vector>

namespace muskat::certify {

enum class CheckResult { pass, fail, not_applicable };

inline const char* to_string(CheckResult c) {
    switch (c) {
        case CheckResult::pass: return "pass";
        case CheckResult::fail: return "fail";
        case CheckResult::not_applicable: return "not-applicable";
    }
    return "?";
}

inline CheckResult from_bool(bool ok) { return ok ? CheckResult::pass : CheckResult::fail; }

struct CellReport {
    int n = 0;
    std::string R;
    std::string mu;
    CheckResult symmetry = CheckResult::fail;
    CheckResult antisymmetry = CheckResult::fail;
    CheckResult a_identity = CheckResult::fail;
    CheckResult det_bound = CheckResult::fail;
    double wall_time_s = 0.0;

    bool passed() const {
        for (CheckResult c : {symmetry, antisymmetry, a_identity, det_bound}) {
            if (c == CheckResult::fail) return false;
        }
        return true;
    }
};

struct CertifyOptions {
    int n_max = 8;
    std::size_t det_samples = 50;
    long sample_extent = 10;
    long sample_denominator = 7;
    std::uint64_t seed = 0;
};

/// Runs every check for one (n, R, mu) cell. Antisymmetry needs n >= 3.
inline CellReport certify_cell(int n, const RatParams& rp, const CertifyOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    CellReport c;
    c.n = n;
    c.R = to_string(rp.R());
    c.mu = to_string(rp.mu());
    c.symmetry = from_bool(verify_symmetry(n, rp));
    c.antisymmetry = n >= 3 ? from_bool(verify_antisymmetry(n, rp)) : CheckResult::not_applicable;
    c.a_identity = from_bool(verify_a_identity(n, rp));
    if (opt.det_samples == 0) {
        c.det_bound = CheckResult::not_applicable;
    } else {
        const auto pts = lattice_samples(opt.det_samples, opt.sample_extent, opt.sample_denominator,
                                         opt.seed + static_cast<std::uint64_t>(n));
        c.det_bound = from_bool(verify_det_lower_bound(n, rp, pts));
    }
    c.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return c;
}

/// Cells n = 2..n_max for one parameter pair, evaluated concurrently.
inline std::vector<CellReport> certify_range(const RatParams& rp, const CertifyOptions& opt) {
    if (opt.n_max < 2) throw DomainError("certify_range: n_max must be >= 2");
    std::vector<std::future<CellReport>> jobs;
    for (int n = 2; n <= opt.n_max; ++n) {
        jobs.push_back(std::async(std::launch::async, [n, rp, opt] { return certify_cell(n, rp, opt); }));
    }
    std::vector<CellReport> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

inline nlohmann::json report_json(const std::vector<CellReport>& cells, const CertifyOptions& opt) {
    nlohmann::json j;
    j["det_samples"] = opt.det_samples;
    j["seed"] = opt.seed;
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const auto& c : cells) {
        all = all && c.passed();
        arr.push_back({{"n", c.n},
                       {"R", c.R},
                       {"mu", c.mu},
                       {"symmetry", to_string(c.symmetry)},
                       {"antisymmetry", to_string(c.antisymmetry)},
                       {"a_identity", to_string(c.a_identity)},
                       {"det_bound", to_string(c.det_bound)},
                       {"wall_time_s", c.wall_time_s}});
    }
    j["cells"] = arr;
    j["all_passed"] = all;
    return j;
}

}  // namespace muskat::certify
