#pragma once

// Run configuration documents, output files and their read-back.
//
// A configuration is a JSON document whose keys are either nested objects or
// flat dotted names; both spell the same key set:
//
//   domain.a  domain.b  grid.m  phys.R  phys.mu
//   step.tau  step.epsilon  step.picard_tol  step.max_iter  step.damping
//   step.clip_tol  step.mobility_mean
//   run.t_end  run.record_every  run.phi_orders
//   ic.preset (+ preset parameters) | ic.file
//   output.dir  output.snapshots_every

#include <muskat/config.hpp>
#include <muskat/csv.hpp>
#include <muskat/errors.hpp>
#include <muskat/simulator.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace muskat {

inline constexpr const char* kVersion = "muskat 0.1.0";

namespace io_detail {

using json = nlohmann::json;

inline void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    if (out.count(prefix)) throw ConfigError(prefix, "key given more than once");
    out[prefix] = j;
}

/// Typed access to the flattened document; every read marks the key as used.
class Keys {
  public:
    explicit Keys(std::map<std::string, json> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double number(const std::string& key) {
        const json& v = get(key);
        if (!v.is_number()) throw ConfigError(key, "expected a number");
        return v.get<double>();
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    long integer(const std::string& key) {
        const json& v = get(key);
        if (v.is_number_integer()) return v.get<long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long>(d);
        }
        throw ConfigError(key, "expected an integer");
    }

    long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : fallback; }

    std::string text(const std::string& key) {
        const json& v = get(key);
        if (!v.is_string()) throw ConfigError(key, "expected a string");
        return v.get<std::string>();
    }

    std::vector<int> int_list(const std::string& key) {
        const json& v = get(key);
        if (!v.is_array()) throw ConfigError(key, "expected an array of integers");
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer()) throw ConfigError(key, "expected an array of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }

    /// Throws on the first key that no reader asked for.
    void reject_unused() const {
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) throw ConfigError(k, "unknown key");
        }
    }

  private:
    const json& get(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(key, "required key missing");
        used_.insert(key);
        return it->second;
    }

    std::map<std::string, json> values_;
    std::set<std::string> used_;
};

inline double non_negative(Keys& k, const std::string& key, double fallback) {
    const double v = k.number(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(key, "must be non-negative");
    return v;
}

inline double positive(Keys& k, const std::string& key) {
    const double v = k.number(key);
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
    return v;
}

inline InitialConditionSpec parse_ic(Keys& k, const std::string& base_dir) {
    const bool has_preset = k.has("ic.preset");
    const bool has_file = k.has("ic.file");
    if (has_preset == has_file) throw ConfigError("ic", "exactly one of ic.preset and ic.file is required");
    if (has_file) {
        std::filesystem::path p = k.text("ic.file");
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        return ic::File{p.lexically_normal().string()};
    }
    const std::string preset = k.text("ic.preset");
    if (preset == "constant") {
        ic::Constant c;
        c.c_f = non_negative(k, "ic.c_f", c.c_f);
        c.c_g = non_negative(k, "ic.c_g", c.c_g);
        return c;
    }
    if (preset == "bump") {
        ic::Bump b;
        b.center = k.number("ic.center", b.center);
        b.width = k.number("ic.width", b.width);
        if (!(b.width > 0.0)) throw ConfigError("ic.width", "must be positive");
        b.height_f = non_negative(k, "ic.height_f", b.height_f);
        b.height_g = non_negative(k, "ic.height_g", b.height_g);
        return b;
    }
    if (preset == "step") {
        ic::Step s;
        s.jump_at = k.number("ic.jump_at", s.jump_at);
        s.left_f = non_negative(k, "ic.left_f", s.left_f);
        s.right_f = non_negative(k, "ic.right_f", s.right_f);
        s.left_g = non_negative(k, "ic.left_g", s.left_g);
        s.right_g = non_negative(k, "ic.right_g", s.right_g);
        return s;
    }
    if (preset == "two_bumps") {
        ic::TwoBumps t;
        t.center_f = k.number("ic.center_f", t.center_f);
        t.center_g = k.number("ic.center_g", t.center_g);
        t.width = k.number("ic.width", t.width);
        if (!(t.width > 0.0)) throw ConfigError("ic.width", "must be positive");
        t.height_f = non_negative(k, "ic.height_f", t.height_f);
        t.height_g = non_negative(k, "ic.height_g", t.height_g);
        return t;
    }
    throw ConfigError("ic.preset", "unknown preset '" + preset + "' (constant, bump, step, two_bumps)");
}

inline MobilityMean parse_mean(const std::string& s) {
    if (s == "arithmetic") return MobilityMean::arithmetic;
    if (s == "logarithmic") return MobilityMean::logarithmic;
    throw ConfigError("step.mobility_mean", "expected 'arithmetic' or 'logarithmic'");
}

}  // namespace io_detail

/// Parses and validates a configuration document. Relative ic.file paths are
/// resolved against `base_dir`; the file is read to check its row count.
inline RunConfig parse_config(const std::string& text, const std::string& base_dir = "") {
    using io_detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed configuration: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    std::map<std::string, json> flat;
    io_detail::flatten(doc, "", flat);
    io_detail::Keys k(std::move(flat));

    RunConfig cfg;
    cfg.grid.a = k.number("domain.a");
    cfg.grid.b = k.number("domain.b");
    if (!(cfg.grid.a < cfg.grid.b)) throw ConfigError("domain.b", "must exceed domain.a");
    cfg.grid.m = k.integer("grid.m");
    if (cfg.grid.m < 2) throw ConfigError("grid.m", "must be >= 2");

    const double R = io_detail::positive(k, "phys.R");
    const double mu = io_detail::positive(k, "phys.mu");
    cfg.phys = PhysParams(R, mu);

    cfg.step.tau = io_detail::positive(k, "step.tau");
    cfg.step.epsilon = k.number("step.epsilon", 1e-8);
    if (!(cfg.step.epsilon > 0.0)) throw ConfigError("step.epsilon", "must be positive");
    cfg.step.picard_tol = k.number("step.picard_tol", 1e-10);
    if (!(cfg.step.picard_tol > 0.0)) throw ConfigError("step.picard_tol", "must be positive");
    cfg.step.max_iter = static_cast<int>(k.integer("step.max_iter", 200));
    if (cfg.step.max_iter < 1) throw ConfigError("step.max_iter", "must be >= 1");
    cfg.step.damping = k.number("step.damping", 1.0);
    if (!(cfg.step.damping > 0.0) || cfg.step.damping > 1.0) throw ConfigError("step.damping", "must lie in (0, 1]");
    cfg.step.clip_tol = k.number("step.clip_tol", 1e-12);
    if (!(cfg.step.clip_tol >= 0.0)) throw ConfigError("step.clip_tol", "must be non-negative");
    if (k.has("step.mobility_mean")) cfg.step.mobility_mean = io_detail::parse_mean(k.text("step.mobility_mean"));

    cfg.t_end = io_detail::positive(k, "run.t_end");
    cfg.record_every = static_cast<int>(k.integer("run.record_every", 1));
    if (cfg.record_every < 1) throw ConfigError("run.record_every", "must be >= 1");
    if (k.has("run.phi_orders")) {
        cfg.phi_orders = k.int_list("run.phi_orders");
        if (cfg.phi_orders.empty()) throw ConfigError("run.phi_orders", "must be non-empty");
        for (int n : cfg.phi_orders) {
            if (n < 2 || n > kMaxOrder) throw ConfigError("run.phi_orders", "orders must lie in [2, 64]");
        }
        std::sort(cfg.phi_orders.begin(), cfg.phi_orders.end());
        cfg.phi_orders.erase(std::unique(cfg.phi_orders.begin(), cfg.phi_orders.end()), cfg.phi_orders.end());
    }

    cfg.ic = io_detail::parse_ic(k, base_dir);
    if (k.has("output.dir")) cfg.output_dir = k.text("output.dir");
    cfg.snapshots_every = static_cast<int>(k.integer("output.snapshots_every", 0));
    if (cfg.snapshots_every < 0) throw ConfigError("output.snapshots_every", "must be >= 0");
    k.reject_unused();

    if (const auto* file = std::get_if<ic::File>(&cfg.ic)) {
        State s;
        try {
            s = read_state_file(file->path);
        } catch (const DataError& e) {
            throw ConfigError("ic.file", e.what());
        }
        if (s.size() != static_cast<std::size_t>(cfg.grid.m)) {
            throw ConfigError("ic.file", "file has " + std::to_string(s.size()) + " rows, grid.m is " +
                                             std::to_string(cfg.grid.m));
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open configuration '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

/// Nested JSON form of a configuration; parse_config reads it back to an equal RunConfig.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    using io_detail::json;
    json j;
    j["domain"] = {{"a", cfg.grid.a}, {"b", cfg.grid.b}};
    j["grid"] = {{"m", cfg.grid.m}};
    j["phys"] = {{"R", cfg.phys.R()}, {"mu", cfg.phys.mu()}};
    j["step"] = {{"tau", cfg.step.tau},
                 {"epsilon", cfg.step.epsilon},
                 {"picard_tol", cfg.step.picard_tol},
                 {"max_iter", cfg.step.max_iter},
                 {"damping", cfg.step.damping},
                 {"clip_tol", cfg.step.clip_tol},
                 {"mobility_mean", to_string(cfg.step.mobility_mean)}};
    j["run"] = {{"t_end", cfg.t_end}, {"record_every", cfg.record_every}, {"phi_orders", cfg.phi_orders}};
    j["ic"] = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ic::Constant>) {
                return {{"preset", "constant"}, {"c_f", p.c_f}, {"c_g", p.c_g}};
            } else if constexpr (std::is_same_v<T, ic::Bump>) {
                return {{"preset", "bump"}, {"center", p.center}, {"width", p.width},
                        {"height_f", p.height_f}, {"height_g", p.height_g}};
            } else if constexpr (std::is_same_v<T, ic::Step>) {
                return {{"preset", "step"}, {"jump_at", p.jump_at}, {"left_f", p.left_f}, {"right_f", p.right_f},
                        {"left_g", p.left_g}, {"right_g", p.right_g}};
            } else if constexpr (std::is_same_v<T, ic::TwoBumps>) {
                return {{"preset", "two_bumps"}, {"center_f", p.center_f}, {"center_g", p.center_g},
                        {"width", p.width}, {"height_f", p.height_f}, {"height_g", p.height_g}};
            } else {
                return {{"file", p.path}};
            }
        },
        cfg.ic);
    j["output"] = {{"dir", cfg.output_dir}, {"snapshots_every", cfg.snapshots_every}};
    return j;
}

/// diagnostics.csv header: fixed columns, then one phi_<n> column per order, ascending.
inline std::vector<std::string> diagnostics_header(const std::vector<int>& phi_orders) {
    std::vector<std::string> h{"t",       "mass_f",      "mass_g", "linf_f",      "linf_g",
                               "linf_sum", "entropy", "dissipation", "energy", "picard_iters"};
    std::vector<int> orders = phi_orders;
    std::sort(orders.begin(), orders.end());
    for (int n : orders) h.push_back("phi_" + std::to_string(n));
    return h;
}

inline void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records,
                                  const std::vector<int>& phi_orders) {
    const auto header = diagnostics_header(phi_orders);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    std::vector<int> orders = phi_orders;
    std::sort(orders.begin(), orders.end());
    using csv::format_double;
    for (const auto& r : records) {
        out << format_double(r.t) << ',' << format_double(r.mass_f) << ',' << format_double(r.mass_g) << ','
            << format_double(r.linf_f) << ',' << format_double(r.linf_g) << ',' << format_double(r.linf_sum) << ','
            << format_double(r.entropy) << ',' << format_double(r.dissipation) << ',' << format_double(r.energy)
            << ',' << r.picard_iters;
        for (int n : orders) out << ',' << format_double(r.phi.at(n));
        out << '\n';
    }
}

/// Parses diagnostics.csv; throws DataError when the header does not match the schema.
inline std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in, const std::string& source) {
    const csv::Table t = csv::parse(in, source);
    const std::vector<std::string> fixed = diagnostics_header({});
    if (t.header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), t.header.begin())) {
        throw DataError(source + ": header does not start with the diagnostics columns");
    }
    std::vector<int> orders;
    for (std::size_t c = fixed.size(); c < t.header.size(); ++c) {
        const std::string& name = t.header[c];
        if (name.rfind("phi_", 0) != 0) throw DataError(source + ": unexpected column '" + name + "'");
        try {
            orders.push_back(std::stoi(name.substr(4)));
        } catch (const std::exception&) {
            throw DataError(source + ": bad column '" + name + "'");
        }
    }
    std::vector<DiagnosticsRecord> records;
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw DataError(source + ": row width does not match header");
        DiagnosticsRecord r;
        r.t = row[0];
        r.mass_f = row[1];
        r.mass_g = row[2];
        r.linf_f = row[3];
        r.linf_g = row[4];
        r.linf_sum = row[5];
        r.entropy = row[6];
        r.dissipation = row[7];
        r.energy = row[8];
        r.picard_iters = static_cast<int>(row[9]);
        for (std::size_t i = 0; i < orders.size(); ++i) r.phi[orders[i]] = row[fixed.size() + i];
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_diagnostics_csv(in, path);
}

inline void write_snapshot(std::ostream& out, const Grid& grid, const State& s) {
    out << "x,f,g\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << csv::format_double(grid.node(i)) << ',' << csv::format_double(s.f[i]) << ','
            << csv::format_double(s.g[i]) << '\n';
    }
}

namespace io_detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out.exceptions(std::ios::badbit | std::ios::failbit);
    return out;
}

}  // namespace io_detail

inline nlohmann::json manifest_json(const SimulationResult& result, const RunConfig& cfg) {
    nlohmann::json m;
    m["version"] = kVersion;
    m["status"] = to_string(result.status);
    m["steps_taken"] = result.steps_taken;
    if (result.status == RunStatus::aborted_at_step) {
        m["failed_step"] = result.failed_step;
        m["message"] = result.message;
    }
    m["records"] = result.records.size();
    m["snapshots"] = result.snapshots.size();
    m["max_picard_iters"] = result.max_picard_iters;
    nlohmann::json worst = nlohmann::json::object();
    for (const auto& [n, v] : result.worst_step_increase) worst["phi_" + std::to_string(n)] = v;
    m["worst_step_increase"] = worst;
    m["config"] = config_to_json(cfg);
    return m;
}

/// Writes diagnostics.csv, snapshot_<k>.csv and manifest.json into `dir`
/// (created if needed). Returns the paths written.
inline std::vector<std::string> write_outputs(const SimulationResult& result, const RunConfig& cfg,
                                              const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    std::vector<std::string> written;
    try {
        const fs::path diag = fs::path(dir) / "diagnostics.csv";
        {
            auto out = io_detail::open_out(diag);
            write_diagnostics_csv(out, result.records, cfg.phi_orders);
        }
        written.push_back(diag.string());
        const Grid grid = cfg.make_grid();
        for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
            const fs::path p = fs::path(dir) / ("snapshot_" + std::to_string(k) + ".csv");
            auto out = io_detail::open_out(p);
            write_snapshot(out, grid, result.snapshots[k].second);
            written.push_back(p.string());
        }
        const fs::path man = fs::path(dir) / "manifest.json";
        {
            auto out = io_detail::open_out(man);
            nlohmann::json m = manifest_json(result, cfg);
            nlohmann::json times = nlohmann::json::array();
            for (const auto& [t, s] : result.snapshots) times.push_back(t);
            m["snapshot_times"] = times;
            out << m.dump(2) << '\n';
        }
        written.push_back(man.string());
    } catch (const std::ios_base::failure& e) {
        throw IoError("write failed in '" + dir + "': " + e.what());
    }
    return written;
}

inline std::vector<std::string> write_outputs(const SimulationResult& result, const RunConfig& cfg) {
    return write_outputs(result, cfg, cfg.output_dir);
}

}  // namespace muskat
