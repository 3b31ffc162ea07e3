// Command-line front end.
//
//   muskat simulate --config run.json [--output-dir DIR]
//   muskat certify  --n-max 8 --R 1/10 --mu 1 [--det-samples 50] [--seed 0]
//   muskat sweep    --config run.json --vary tau --values 1e-2,1e-3 [--vary m --values 51,101]
//   muskat audit    DIR/diagnostics.csv [--manifest FILE | --R r --mu m --tau t] [--tol-* v]
//
// Exit codes: 0 success, 1 audit/step/certification failure, 2 usage, config or I/O error.

#include <muskat/certify_report.hpp>
#include <muskat/diagnostics.hpp>
#include <muskat/io.hpp>
#include <muskat/simulator.hpp>
#include <muskat/sweep.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

using nlohmann::json;

struct SimulateArgs {
    std::string config;
    std::string output_dir;
};

struct CertifyArgs {
    int n_max = 8;
    std::string R;
    std::string mu;
    std::size_t det_samples = 50;
    std::uint64_t seed = 0;
    std::string out;
};

struct SweepArgs {
    std::string config;
    std::vector<std::string> vary;
    std::vector<std::string> values;
    bool no_files = false;
};

struct AuditArgs {
    std::string csv;
    std::string manifest;
    std::optional<double> R;
    std::optional<double> mu;
    std::optional<double> tau;
    muskat::AuditTolerances tol;
    std::string out;
};

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw muskat::IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

int run_simulate(const SimulateArgs& a) {
    muskat::RunConfig cfg = muskat::load_config(a.config);
    if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
    const muskat::SimulationResult res = muskat::run_simulation(cfg);
    muskat::write_outputs(res, cfg);
    std::cout << "status: " << muskat::to_string(res.status) << " after " << res.steps_taken << " steps\n";
    for (const auto& [n, v] : res.worst_step_increase) {
        std::cout << "worst per-step increase phi_" << n << ": " << v << '\n';
    }
    std::cout << "output: " << cfg.output_dir << '\n';
    if (res.status != muskat::RunStatus::completed) {
        std::cerr << "step " << res.failed_step << " failed: " << res.message << '\n';
        return kFailed;
    }
    return kOk;
}

int run_certify(const CertifyArgs& a) {
    namespace cert = muskat::certify;
    const cert::RatParams rp(cert::make_rational(a.R), cert::make_rational(a.mu));
    cert::CertifyOptions opt;
    opt.n_max = a.n_max;
    opt.det_samples = a.det_samples;
    opt.seed = a.seed;
    const auto cells = cert::certify_range(rp, opt);
    const json report = cert::report_json(cells, opt);
    emit(report, a.out);
    return report.at("all_passed").get<bool>() ? kOk : kFailed;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!muskat::csv::parse_double(item, v)) throw muskat::ConfigError("values", "not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int run_sweep(const SweepArgs& a) {
    if (a.vary.size() != a.values.size()) {
        throw muskat::ConfigError("vary", "each --vary needs exactly one --values list");
    }
    const muskat::RunConfig base = muskat::load_config(a.config);
    std::vector<muskat::SweepAxis> axes;
    for (std::size_t i = 0; i < a.vary.size(); ++i) {
        axes.push_back({muskat::parse_sweep_param(a.vary[i]), parse_values(a.values[i])});
    }
    const auto cases = muskat::make_sweep_cases(base, axes);
    const auto results = muskat::run_sweep(cases, !a.no_files);

    muskat::write_sweep_csv(std::cout, results);
    if (!a.no_files) {
        std::filesystem::create_directories(base.output_dir);
        const auto dir = std::filesystem::path(base.output_dir);
        std::ofstream csv(dir / "sweep_summary.csv");
        muskat::write_sweep_csv(csv, results);
        std::ofstream js(dir / "sweep_summary.json");
        js << muskat::sweep_summary_json(results).dump(2) << '\n';
        if (!csv || !js) throw muskat::IoError("cannot write sweep summary in '" + base.output_dir + "'");
    }
    for (const auto& r : results) {
        if (r.status != muskat::RunStatus::completed) return kFailed;
    }
    return kOk;
}

json report_to_json(const muskat::AuditReport& r) {
    json j{{"check", r.check},
           {"status", muskat::to_string(r.status)},
           {"worst_violation", r.worst_violation},
           {"location", r.location},
           {"tolerance", r.tolerance}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

int run_audit(const AuditArgs& a) {
    const auto records = muskat::read_diagnostics_csv(a.csv);
    if (records.empty()) throw muskat::DataError(a.csv + ": no data rows");

    std::optional<double> R = a.R, mu = a.mu, tau = a.tau;
    std::string manifest = a.manifest;
    if (manifest.empty()) {
        const auto guess = std::filesystem::path(a.csv).parent_path() / "manifest.json";
        if (std::filesystem::exists(guess)) manifest = guess.string();
    }
    if (!manifest.empty() && (!R || !mu || !tau)) {
        std::ifstream in(manifest);
        if (!in) throw muskat::IoError("cannot open '" + manifest + "' for reading");
        json m;
        try {
            m = json::parse(in);
        } catch (const json::parse_error& e) {
            throw muskat::DataError(manifest + ": " + e.what());
        }
        const muskat::RunConfig cfg = muskat::parse_config(m.at("config").dump());
        if (!R) R = cfg.phys.R();
        if (!mu) mu = cfg.phys.mu();
        if (!tau) tau = cfg.step.tau;
    }
    if (!R || !mu || !tau) throw muskat::ConfigError("audit", "need a manifest or all of --R, --mu, --tau");

    const auto reports = muskat::audit_all(records, muskat::PhysParams(*R, *mu), *tau, a.tol);
    json j;
    j["source"] = a.csv;
    j["records"] = records.size();
    j["checks"] = json::array();
    for (const auto& r : reports) j["checks"].push_back(report_to_json(r));
    const bool ok = muskat::all_passed(reports);
    j["all_passed"] = ok;
    emit(j, a.out);
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin-film Muskat system: simulation, certification and audits"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one simulation and write its outputs");
    simulate->add_option("--config", sim.config, "Configuration JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--output-dir", sim.output_dir, "Override output.dir");

    CertifyArgs cer;
    auto* certify = app.add_subcommand("certify", "Exact rational certification of the Liapunov family");
    certify->add_option("--n-max", cer.n_max, "Largest order n")->required()->check(CLI::Range(2, 64));
    certify->add_option("--R", cer.R, "R as p/q")->required();
    certify->add_option("--mu", cer.mu, "mu as p/q")->required();
    certify->add_option("--det-samples", cer.det_samples, "Sample points for the determinant bound")
        ->capture_default_str();
    certify->add_option("--seed", cer.seed, "Sampling seed")->capture_default_str();
    certify->add_option("--out", cer.out, "Write the JSON report here instead of stdout");

    SweepArgs swp;
    auto* sweep = app.add_subcommand("sweep", "Run a configuration across parameter values");
    sweep->add_option("--config", swp.config, "Base configuration JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--vary", swp.vary, "tau, epsilon or m (repeatable; lists are zipped)")
        ->required()
        ->allow_extra_args(false);
    sweep->add_option("--values", swp.values, "Comma-separated values for the matching --vary")
        ->required()
        ->allow_extra_args(false);
    sweep->add_flag("--no-files", swp.no_files, "Only print the summary");

    AuditArgs aud;
    auto* audit = app.add_subcommand("audit", "Audit a diagnostics CSV");
    audit->add_option("csv", aud.csv, "diagnostics.csv")->required();
    audit->add_option("--manifest", aud.manifest, "manifest.json (default: next to the CSV)");
    audit->add_option("--R", aud.R, "R (overrides the manifest)");
    audit->add_option("--mu", aud.mu, "mu (overrides the manifest)");
    audit->add_option("--tau", aud.tau, "Time step (overrides the manifest)");
    audit->add_option("--tol-monotone", aud.tol.monotone, "Monotonicity tolerance")->capture_default_str();
    audit->add_option("--tol-entropy", aud.tol.entropy, "Entropy tolerance")->capture_default_str();
    audit->add_option("--tol-linf", aud.tol.linf, "L-inf bound tolerance")->capture_default_str();
    audit->add_option("--tol-mass", aud.tol.mass, "Mass tolerance")->capture_default_str();
    audit->add_option("--out", aud.out, "Write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*certify) return run_certify(cer);
        if (*sweep) return run_sweep(swp);
        if (*audit) return run_audit(aud);
    } catch (const muskat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const muskat::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kUsage;
    } catch (const muskat::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kUsage;
    } catch (const muskat::DomainError& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
