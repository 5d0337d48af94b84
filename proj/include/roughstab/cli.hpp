#pragma once

// Command-line front end: configuration parsing, canonical CSV/JSON output, run manifests and the
// subcommands sample, lift, norms, greedy, solve, stability and verify.

#include "roughstab/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace roughstab::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kFinding = 1, kUsage = 2, kBlowUp = 3 };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------------------------
// Canonical serialization

[[nodiscard]] inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void emit(std::ostream& os, const json& j, int indent, int depth) {
    const bool pretty = indent >= 0;
    auto newline = [&](int d) {
        if (pretty) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v))
                os << fmt_double(v);
            else
                os << '"' << fmt_double(v) << '"';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            os << '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) os << (flat && pretty ? ", " : ",");
                first = false;
                if (!flat) newline(depth + 1);
                emit(os, e, indent, depth + 1);
            }
            if (!flat) newline(depth);
            os << ']';
            return;
        }
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',';
                first = false;
                newline(depth + 1);
                os << json(it.key()).dump() << (pretty ? ": " : ":");
                emit(os, it.value(), indent, depth + 1);
            }
            newline(depth);
            os << '}';
            return;
        }
        default: os << j.dump(); return;
    }
}

}  // namespace detail

/// Sorted keys, 17 significant digits, non-finite numbers as strings.
[[nodiscard]] inline std::string dump_json(const json& j, int indent = 2) {
    std::ostringstream os;
    detail::emit(os, j, indent, 0);
    if (indent >= 0) os << '\n';
    return os.str();
}

[[nodiscard]] inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

[[nodiscard]] inline Mat mat_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ConfigError(what + ": rows must be non-empty arrays");
    Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(what + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(what + ": entries must be numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

[[nodiscard]] inline Vec vec_from_list(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

// ---------------------------------------------------------------------------------------------
// Configuration

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

/// {"A": [[..]], "C": [[[..]], ...], "f": {"family": "none"|"radial", "c0", "c1"}, "g": "linear"|"tanh"}
[[nodiscard]] inline SystemSpec system_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("system: expected an object");
    if (!j.contains("A")) throw ConfigError("system: missing 'A'");
    SystemSpec s;
    s.A = mat_from_json(j.at("A"), "system.A");
    if (s.A.rows() != s.A.cols()) throw ConfigError("system.A: must be square");
    if (!j.contains("C") || !j.at("C").is_array() || j.at("C").empty()) throw ConfigError("system: missing 'C' list");
    for (std::size_t k = 0; k < j.at("C").size(); ++k) {
        Mat c = mat_from_json(j.at("C")[k], "system.C[" + std::to_string(k) + "]");
        if (c.rows() != s.A.rows() || c.cols() != s.A.cols()) throw ConfigError("system.C: each C_j must match A");
        s.C.push_back(std::move(c));
    }
    if (j.contains("f")) {
        const auto& f = j.at("f");
        const auto family = get_or<std::string>(f, "family", "none");
        if (family == "radial") {
            s.h.c0 = get_or<double>(f, "c0", 0.0);
            s.h.c1 = get_or<double>(f, "c1", 0.0);
            if (s.h.c0 < 0.0 || s.h.c1 < 0.0) throw ConfigError("system.f: c0 and c1 must be nonnegative");
        } else if (family != "none") {
            throw ConfigError("system.f: unknown family '" + family + "' (expected none or radial)");
        }
    }
    s.g_family = get_or<std::string>(j, "g", "linear");
    if (s.g_family != "linear" && s.g_family != "tanh")
        throw ConfigError("system.g: unknown family '" + s.g_family + "' (expected linear or tanh)");
    return s;
}

[[nodiscard]] inline json system_to_json(const SystemSpec& s) {
    json c = json::array();
    for (const auto& m : s.C) c.push_back(mat_to_json(m));
    json f = s.h.c0 == 0.0 && s.h.c1 == 0.0 ? json{{"family", "none"}}
                                            : json{{"family", "radial"}, {"c0", s.h.c0}, {"c1", s.h.c1}};
    return {{"A", mat_to_json(s.A)}, {"C", c}, {"f", f}, {"g", s.g_family}};
}

/// {system, driver: {H, T, n}, seeds: {master, count}, mode, alpha, p, burn_in, y0_magnitudes,
///  mc_samples, criteria}
[[nodiscard]] inline ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected an object");
    if (!j.contains("system")) throw ConfigError("config: missing 'system'");
    ExperimentConfig c;
    c.system = system_from_json(j.at("system"));
    const json driver = j.value("driver", json::object());
    c.H = get_or<double>(driver, "H", c.H);
    c.T = get_or<double>(driver, "T", c.T);
    c.n = get_or<std::size_t>(driver, "n", c.n);
    const json seeds = j.value("seeds", json::object());
    c.master_seed = get_or<std::uint64_t>(seeds, "master", c.master_seed);
    c.count = get_or<std::size_t>(seeds, "count", c.count);
    try {
        c.mode = parse_mode(get_or<std::string>(j, "mode", "young"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.alpha = get_or<double>(j, "alpha", c.alpha);
    c.p = get_or<double>(j, "p", c.p);
    c.burn_in = get_or<double>(j, "burn_in", c.burn_in);
    c.y0_magnitudes = get_or<std::vector<double>>(j, "y0_magnitudes", c.y0_magnitudes);
    c.mc_samples = get_or<std::size_t>(j, "mc_samples", c.mc_samples);
    c.run_criteria = get_or<bool>(j, "criteria", c.run_criteria);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.run_criteria && c.mc_samples < 100) throw ConfigError("config: mc_samples must be at least 100");
    if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) throw ConfigError("config: burn_in must lie in [0,1)");
    return c;
}

[[nodiscard]] inline json experiment_to_json(const ExperimentConfig& c) {
    return {{"system", system_to_json(c.system)},
            {"driver", {{"H", c.H}, {"T", c.T}, {"n", c.n}}},
            {"seeds", {{"master", c.master_seed}, {"count", c.count}}},
            {"mode", mode_name(c.mode)},
            {"alpha", c.alpha},
            {"p", c.p},
            {"burn_in", c.burn_in},
            {"y0_magnitudes", c.y0_magnitudes},
            {"mc_samples", c.mc_samples},
            {"criteria", c.run_criteria}};
}

// ---------------------------------------------------------------------------------------------
// Manifests and output

/// Identity of a run: command, canonical configuration, code version and seed.
struct RunManifest {
    std::string command;
    json config = json::object();
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;
    bool record_time = false;

    [[nodiscard]] std::string config_hash() const { return hex64(fnv1a(dump_json(config, -1))); }
    [[nodiscard]] std::string hash() const {
        return hex64(fnv1a(command + "\n" + dump_json(config, -1) + "\n" + kVersion + "\n" +
                           (seed ? std::to_string(*seed) : std::string("-"))));
    }
    [[nodiscard]] json to_json() const {
        json j{{"command", command},     {"config", config},   {"config_hash", config_hash()},
               {"version", kVersion},    {"manifest_hash", hash()}, {"outputs", outputs}};
        j["seed"] = seed ? json(*seed) : json(nullptr);
        if (record_time) {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            j["created_at"] = buf;
        }
        return j;
    }
};

class OutputDir {
public:
    OutputDir(std::filesystem::path dir, RunManifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
    }

    [[nodiscard]] const RunManifest& manifest() const { return manifest_; }

    void write_json(const std::string& name, json body) {
        body["manifest_hash"] = manifest_.hash();
        write_text(name, dump_json(body));
    }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        std::ostringstream os;
        os << "# manifest " << manifest_.hash() << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
        write_text(name, os.str());
    }

    void write_path_csv(const std::string& name, const SampledPath& p, const std::string& prefix = "x") {
        std::vector<std::string> header{"t"};
        for (std::size_t c = 0; c < p.dim(); ++c) header.push_back(prefix + std::to_string(c + 1));
        std::vector<std::vector<std::string>> rows;
        rows.reserve(p.n() + 1);
        for (std::size_t k = 0; k <= p.n(); ++k) {
            std::vector<std::string> r{fmt_double(p.grid()[k])};
            for (std::size_t c = 0; c < p.dim(); ++c)
                r.push_back(fmt_double(p.values()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k))));
            rows.push_back(std::move(r));
        }
        write_csv(name, header, rows);
    }

    /// Writes manifest.json listing every file written so far.
    void finish() {
        auto m = manifest_.to_json();
        write_text_raw("manifest.json", dump_json(m));
    }

private:
    void write_text(const std::string& name, const std::string& text) {
        manifest_.outputs.push_back(name);
        write_text_raw(name, text);
    }
    void write_text_raw(const std::string& name, const std::string& text) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
        f << text;
    }

    std::filesystem::path dir_;
    RunManifest manifest_;
};

/// Reads a path CSV (lines starting with '#' skipped, header "t,x1,...").
[[nodiscard]] inline SampledPath read_path_csv(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw ConfigError("cannot read path file '" + file + "'");
    std::string line;
    std::vector<double> t;
    std::vector<std::vector<double>> cols;
    bool header = false;
    std::size_t dim = 0;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
            if (dim == 0) throw ConfigError("path file: need a time column and at least one value column");
            cols.resize(dim);
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw ConfigError("path file: non-numeric cell '" + cell + "'");
            vals.push_back(v);
        }
        if (vals.size() != dim + 1) throw ConfigError("path file: row width differs from header");
        t.push_back(vals[0]);
        for (std::size_t c = 0; c < dim; ++c) cols[c].push_back(vals[c + 1]);
    }
    if (t.size() < 2) throw ConfigError("path file: need at least two rows");
    TimeGrid g;
    try {
        const auto u = TimeGrid::uniform(t.front(), t.back(), t.size() - 1);
        g = u.points() == t ? u : TimeGrid::from_points(t);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("path file: ") + e.what());
    }
    Mat v(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(t.size()));
    for (std::size_t c = 0; c < dim; ++c)
        for (std::size_t k = 0; k < t.size(); ++k) v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = cols[c][k];
    return SampledPath(g, std::move(v));
}

[[nodiscard]] inline json read_json_file(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw ConfigError("cannot read config file '" + file + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + file + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------------------------
// Lift audits and CSV

struct LiftAudit {
    std::size_t triples = 0;
    double chen_max = 0.0;
    double symmetry_max = 0.0;
    double tolerance = 0.0;
    bool chen_pass = false;
    bool symmetry_pass = false;
};

/// Chen defect on `count` random ordered triples and the symmetry defect Sym X − ½xx^T on the
/// pairs (i, j) of those triples. Triples come from a fixed internal stream, so the audit is a
/// deterministic function of the lift.
[[nodiscard]] inline LiftAudit audit_lift(const RoughLift& L, std::size_t count = 1000) {
    LiftAudit a;
    const double scale = std::max(1.0, L.path().values().cwiseAbs().maxCoeff());
    a.tolerance = 1e-12 * scale * scale;
    if (L.n() < 2) {
        a.chen_pass = a.symmetry_pass = true;
        return a;
    }
    auto eng = make_engine(0x6c696674ULL, 7);
    std::uniform_int_distribution<std::size_t> pick(0, L.n());
    for (std::size_t q = 0; q < count; ++q) {
        std::size_t s[3];
        do {
            for (auto& v : s) v = pick(eng);
            std::sort(s, s + 3);
        } while (s[0] == s[2]);
        a.chen_max = std::max(a.chen_max, chen_defect(L, s[0], s[1], s[2]).cwiseAbs().maxCoeff());
        a.symmetry_max = std::max(a.symmetry_max, symmetry_defect(L, s[0], s[2]).cwiseAbs().maxCoeff());
        ++a.triples;
    }
    a.chen_pass = a.chen_max <= a.tolerance;
    a.symmetry_pass = a.symmetry_max <= a.tolerance;
    return a;
}

[[nodiscard]] inline json audit_to_json(const LiftAudit& a, bool geometric) {
    json j{{"triples", a.triples},
           {"tolerance", a.tolerance},
           {"chen_max_defect", a.chen_max},
           {"chen_pass", a.chen_pass}};
    j["symmetry_max_defect"] = a.symmetry_max;
    j["symmetry_pass"] = geometric ? json(a.symmetry_pass) : json(nullptr);
    return j;
}

inline void write_lift_csv(OutputDir& out, const std::string& name, const RoughLift& L) {
    const std::size_t m = L.dim();
    std::vector<std::string> header{"k", "t_start", "t_end"};
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) header.push_back("X" + std::to_string(j + 1) + std::to_string(k + 1));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(L.n());
    for (std::size_t i = 0; i < L.n(); ++i) {
        const Mat X = L.levy(i, i + 1);
        std::vector<std::string> r{std::to_string(i), fmt_double(L.grid()[i]), fmt_double(L.grid()[i + 1])};
        for (Eigen::Index j = 0; j < X.rows(); ++j)
            for (Eigen::Index k = 0; k < X.cols(); ++k) r.push_back(fmt_double(X(j, k)));
        rows.push_back(std::move(r));
    }
    out.write_csv(name, header, rows);
}

[[nodiscard]] inline RoughLift make_lift(const SampledPath& x, const std::string& type, std::optional<double> hurst) {
    if (type == "geometric") return lift_piecewise_linear(x, hurst);
    if (type == "ito") return lift_ito_type(x);
    throw ConfigError("unknown lift type '" + type + "' (expected geometric or ito)");
}

// ---------------------------------------------------------------------------------------------
// Verification suites (small-scale invariant checks)

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::size_t violations = 0;
    json details = json::array();
    [[nodiscard]] bool passed() const { return violations == 0 && checks > 0; }
};

namespace suites {

inline double exhaustive_pvar(const SampledPath& x, double p) {
    const std::size_t n = x.n();
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        double s = 0.0;
        std::size_t prev = 0;
        for (std::size_t k = 1; k <= n; ++k)
            if (k == n || (mask >> (k - 1)) & 1u) {
                s += std::pow(x.increment(prev, k).norm(), p);
                prev = k;
            }
        best = std::max(best, s);
    }
    return std::pow(best, 1.0 / p);
}

inline SuiteResult chen(std::uint64_t seed) {
    SuiteResult r{"chen"};
    std::size_t i = 0;
    for (double H : {0.35, 0.5, 0.7})
        for (std::size_t q = 0; q < 3; ++q, ++i) {
            auto x = sample_fbm(H, TimeGrid::uniform(0.0, 1.0, 512), 2, derive_seed(seed, i));
            auto a = audit_lift(lift_piecewise_linear(x, H));
            ++r.checks;
            if (!a.chen_pass || !a.symmetry_pass) ++r.violations;
            r.details.push_back({{"H", H}, {"chen_max_defect", a.chen_max}, {"symmetry_max_defect", a.symmetry_max}});
        }
    return r;
}

inline SuiteResult pvar(std::uint64_t seed) {
    SuiteResult r{"pvar"};
    auto eng = make_engine(seed, 1);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<std::size_t> len(2, 10), dim(1, 3);
    double worst = 0.0;
    for (std::size_t q = 0; q < 50; ++q) {
        const std::size_t n = len(eng), d = dim(eng);
        Mat v(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n + 1));
        for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = nd(eng);
        SampledPath x(TimeGrid::uniform(0.0, 1.0, n), v);
        for (double p : {1.0, 1.5, 2.5}) {
            const double a = p_variation_idx(x, p, 0, n), b = exhaustive_pvar(x, p);
            const double rel = std::abs(a - b) / std::max(b, 1e-300);
            worst = std::max(worst, rel);
            ++r.checks;
            if (rel > 1e-10) ++r.violations;
        }
    }
    r.details.push_back({{"max_relative_difference", worst}});
    return r;
}

inline SuiteResult young_loeve(std::uint64_t seed) {
    SuiteResult r{"young-loeve"};
    const double p = 1.4, K = young_loeve_constant(p, p);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < 20; ++q) {
        auto fine = TimeGrid::uniform(0.0, 1.0, 256 * 8);
        auto x = sample_fbm(0.7, fine, 1, derive_seed(seed, 2 * q));
        auto y = sample_fbm(0.7, fine, 1, derive_seed(seed, 2 * q + 1));
        const double lhs = std::abs(young_integral_idx(y, x, 0, fine.n())(0) - y.at(0)(0) * x.increment(0, fine.n())(0));
        const double rhs = K * p_variation_idx(y, p, 0, fine.n()) * p_variation_idx(x, p, 0, fine.n());
        worst = std::max(worst, lhs / rhs);
        ++r.checks;
        if (lhs > rhs) ++r.violations;
    }
    r.details.push_back({{"max_ratio", worst}, {"K", K}});
    return r;
}

inline SuiteResult greedy(std::uint64_t seed) {
    SuiteResult r{"greedy"};
    for (std::size_t q = 0; q < 10; ++q) {
        auto x = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, 512), 1, derive_seed(seed, q));
        auto L = lift_piecewise_linear(x, 0.4);
        for (double gamma : {0.25, 0.5}) {
            auto plain = greedy_times(L, gamma, 0.35, 0.0, 1.0);
            auto aug = greedy_times_augmented(L, gamma, 0.35, 0.0, 1.0);
            auto b1 = verify_count_bounds(plain, L, 0.375);
            auto b2 = verify_count_bounds(aug, L, 0.375);
            auto sub = check_subdivision(plain, L);
            r.checks += 3;
            r.violations += !b1.passed + !b2.passed + !(sub.steps_within_threshold && sub.steps_maximal);
        }
    }
    return r;
}

inline SuiteResult closed_form(std::uint64_t seed) {
    SuiteResult r{"closed-form"};
    const double a = -1.0, c = 0.5;
    const auto g = TimeGrid::uniform(0.0, 1.0, 4096);
    double worst = 0.0;
    for (std::size_t q = 0; q < 5; ++q) {
        for (double H : {0.7, 0.4}) {
            auto x = sample_fbm(H, g, 1, derive_seed(seed, q));
            SampledPath y = H > 0.5 ? solve_yde(linear_young_system(Mat::Constant(1, 1, a), {Mat::Constant(1, 1, c)}), x,
                                                Vec::Ones(1), YoungScheme::milstein)
                                    : solve_linear_rde(rough_linear_system(Mat::Constant(1, 1, a), {Mat::Constant(1, 1, c)}),
                                                       lift_piecewise_linear(x, H), Vec::Ones(1))
                                          .trajectory;
            double err = 0.0;
            for (std::size_t k = 0; k <= g.n(); ++k)
                err = std::max(err, std::abs(y.at(k)(0) / std::exp(a * g[k] + c * x.at(k)(0)) - 1.0));
            worst = std::max(worst, err);
            ++r.checks;
            if (err > 1e-2) ++r.violations;
        }
    }
    r.details.push_back({{"max_relative_error", worst}, {"tolerance", 1e-2}, {"n", 4096}});
    return r;
}

inline SuiteResult apriori(std::uint64_t seed) {
    SuiteResult r{"apriori"};
    Mat A(2, 2), C1(2, 2);
    A << -1.0, 0.3, -0.2, -1.5;
    C1 << 0.3, 0.2, -0.1, 0.4;
    const Vec y0 = Vec::Ones(2);
    for (std::size_t q = 0; q < 10; ++q) {
        auto xy = sample_fbm(0.7, TimeGrid::uniform(0.0, 1.0, 1024), 1, derive_seed(seed, q));
        auto ys = linear_young_system(A, {C1}, HFunction{0.1, 0.2});
        ++r.checks;
        if (!check_apriori(ys, xy, solve_yde(ys, xy, y0, YoungScheme::milstein), 1.5, 0.0, 1.0).passed()) ++r.violations;
        auto xr = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, 512), 1, derive_seed(seed, 100 + q));
        ++r.checks;
        if (!verify_supnorm_bound(rough_linear_system(A, {C1}), lift_piecewise_linear(xr, 0.4), y0, 0.0, 1.0).passed())
            ++r.violations;
    }
    return r;
}

inline SuiteResult angular(std::uint64_t seed) {
    SuiteResult r{"angular"};
    Mat A(2, 2), C1(2, 2);
    A << -1.0, 0.3, -0.2, -1.5;
    C1 << 0.2, -0.1, 0.05, 0.1;
    const Vec y0 = Vec::Ones(2);
    for (std::size_t q = 0; q < 3; ++q) {
        auto g = TimeGrid::uniform(0.0, 1.0, 4096);
        auto xy = sample_fbm(0.7, g, 1, derive_seed(seed, q));
        auto a = angular_log_decomposition(linear_young_system(A, {C1}), xy, y0);
        auto xr = sample_fbm(0.4, g, 1, derive_seed(seed, 100 + q));
        auto b = angular_log_decomposition(rough_linear_system(A, {C1}), lift_piecewise_linear(xr, 0.4), y0);
        for (const auto* c : {&a.consistency, &b.consistency}) {
            ++r.checks;
            if (!c->consistent() || c->max_theta_norm_dev > 1e-3) ++r.violations;
            r.details.push_back({{"reconstruction", c->max_recon_rel_err},
                                 {"scheme_tolerance", c->scheme_tolerance},
                                 {"theta_norm_deviation", c->max_theta_norm_dev}});
        }
    }
    return r;
}

}  // namespace suites

[[nodiscard]] inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"chen", "pvar", "young-loeve", "greedy", "closed-form", "apriori", "angular"};
    return names;
}

[[nodiscard]] inline SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "chen") return suites::chen(seed);
    if (name == "pvar") return suites::pvar(seed);
    if (name == "young-loeve") return suites::young_loeve(seed);
    if (name == "greedy") return suites::greedy(seed);
    if (name == "closed-form") return suites::closed_form(seed);
    if (name == "apriori") return suites::apriori(seed);
    if (name == "angular") return suites::angular(seed);
    throw ConfigError("unknown suite '" + name + "'");
}

// ---------------------------------------------------------------------------------------------
// Commands

struct CommonOptions {
    std::string out;
    bool record_time = false;
};

struct SampleOptions {
    double hurst = 0.0;
    std::size_t n = 0;
    double t = 1.0;
    std::size_t dim = 1;
    std::optional<std::uint64_t> seed;
};

inline int cmd_sample(const SampleOptions& o, const CommonOptions& c) {
    if (!(o.hurst > 0.0 && o.hurst < 1.0)) throw ConfigError("--hurst must lie in (0,1)");
    if (o.n < 1 || o.dim < 1 || !(o.t > 0.0)) throw ConfigError("--n, --dim must be positive and --t > 0");
    if (!o.seed) throw ConfigError("--seed is required");
    RunManifest m{"sample", {{"hurst", o.hurst}, {"n", o.n}, {"t", o.t}, {"dim", o.dim}}, o.seed, {}, c.record_time};
    OutputDir out(c.out, m);
    auto x = sample_fbm(o.hurst, TimeGrid::uniform(0.0, o.t, o.n), o.dim, *o.seed);
    auto L = lift_piecewise_linear(x, o.hurst);
    auto audit = audit_lift(L);
    out.write_path_csv("path.csv", x);
    write_lift_csv(out, "lift.csv", L);
    out.write_json("sample.json", {{"hurst", o.hurst},
                                   {"n", o.n},
                                   {"t", o.t},
                                   {"dim", o.dim},
                                   {"lift", "geometric"},
                                   {"audit", audit_to_json(audit, true)}});
    out.finish();
    return kOk;
}

struct LiftOptions {
    std::string path;
    std::string type = "geometric";
    std::optional<double> hurst;
};

inline int cmd_lift(const LiftOptions& o, const CommonOptions& c) {
    auto x = read_path_csv(o.path);
    json cfg{{"path", std::filesystem::path(o.path).filename().string()}, {"type", o.type}};
    if (o.hurst) cfg["hurst"] = *o.hurst;
    cfg["path_hash"] = hex64(fnv1a(std::to_string(x.n()) + dump_json(mat_to_json(x.values()), -1)));
    OutputDir out(c.out, RunManifest{"lift", cfg, std::nullopt, {}, c.record_time});
    auto L = make_lift(x, o.type, o.hurst);
    auto audit = audit_lift(L);
    write_lift_csv(out, "lift.csv", L);
    json body{{"type", o.type}, {"n", L.n()}, {"dim", L.dim()}, {"geometric", L.is_geometric()},
              {"audit", audit_to_json(audit, L.is_geometric())}};
    if (!L.is_geometric()) body["bracket_max_abs"] = bracket(L).max_abs();
    out.write_json("lift.json", body);
    out.finish();
    return kOk;
}

struct NormsOptions {
    std::string path;
    double alpha = 0.4;
    double p = 2.5;
    std::string lift = "geometric";
    std::optional<double> s, t;
};

inline int cmd_norms(const NormsOptions& o, const CommonOptions& c) {
    auto x = read_path_csv(o.path);
    const double s = o.s.value_or(x.grid().t0()), t = o.t.value_or(x.grid().t1());
    if (!(o.alpha > 0.0 && o.alpha <= 1.0)) throw ConfigError("--alpha must lie in (0,1]");
    if (!(o.p >= 1.0)) throw ConfigError("--p must be >= 1");
    json cfg{{"path_hash", hex64(fnv1a(dump_json(mat_to_json(x.values()), -1)))},
             {"alpha", o.alpha}, {"p", o.p}, {"lift", o.lift}, {"s", s}, {"t", t}};
    OutputDir out(c.out, RunManifest{"norms", cfg, std::nullopt, {}, c.record_time});
    auto L = make_lift(x, o.lift, std::nullopt);
    json body;
    try {
        const auto [i, j] = roughstab::detail::grid_interval(x.grid(), s, t);
        const auto rp = rough_seminorm_parts_idx(L, o.alpha, i, j);
        body["interval"] = {s, t};
        body["holder"] = holder_seminorm(x, o.alpha, s, t);
        body["p_variation"] = p_variation(x, o.p, s, t);
        body["rough"] = {{"level1", rp.level1}, {"level2", rp.level2}, {"value", rp.value()}};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    out.write_json("norms.json", body);
    out.finish();
    return kOk;
}

struct GreedyOptions {
    std::string path;
    double gamma = 0.5;
    double alpha = 0.35;
    bool augmented = false;
    std::optional<double> nu;
    std::string lift = "geometric";
};

inline int cmd_greedy(const GreedyOptions& o, const CommonOptions& c) {
    auto x = read_path_csv(o.path);
    json cfg{{"path_hash", hex64(fnv1a(dump_json(mat_to_json(x.values()), -1)))},
             {"gamma", o.gamma}, {"alpha", o.alpha}, {"augmented", o.augmented}, {"lift", o.lift}};
    if (o.nu) cfg["nu"] = *o.nu;
    OutputDir out(c.out, RunManifest{"greedy", cfg, std::nullopt, {}, c.record_time});
    auto L = make_lift(x, o.lift, std::nullopt);
    GreedySequence seq;
    try {
        seq = o.augmented ? greedy_times_augmented(L, o.gamma, o.alpha, x.grid().t0(), x.grid().t1())
                          : greedy_times(L, o.gamma, o.alpha, x.grid().t0(), x.grid().t1());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < seq.times.size(); ++i) rows.push_back({std::to_string(i), fmt_double(seq.times[i])});
    out.write_csv("greedy.csv", {"i", "tau"}, rows);
    json body{{"count", seq.count()}, {"gamma", o.gamma}, {"alpha", o.alpha}, {"augmented", o.augmented}};
    json margins = json::array();
    for (std::size_t i = 0; i + 1 < seq.times.size(); ++i)
        margins.push_back(o.gamma - greedy_functional(L, o.alpha, o.augmented, seq.times[i], seq.times[i + 1]));
    body["margins"] = margins;
    if (!o.augmented) {
        auto sub = check_subdivision(seq, L);
        body["subdivision"] = {{"within_threshold", sub.steps_within_threshold},
                               {"maximal", sub.steps_maximal},
                               {"worst_excess", sub.worst_excess}};
    }
    bool ok = true;
    if (o.nu) {
        if (!(*o.nu > o.alpha)) throw ConfigError("--nu must exceed --alpha");
        auto b = verify_count_bounds(seq, L, *o.nu);
        body["count_bound"] = {{"bound", b.bound}, {"log_bound", b.log_bound}, {"margin", b.margin},
                               {"passed", b.passed}, {"full_steps", b.full_steps}};
        ok = b.passed;
    }
    body["passed"] = ok;
    out.write_json("greedy.json", body);
    out.finish();
    return kOk;
}

struct SolveOptions {
    std::string system;
    std::string mode = "young";
    std::string scheme = "milstein";
    std::string stepping = "grid";
    std::string lift = "geometric";
    double alpha = 0.35;
    double p = 1.5;
    std::vector<double> y0;
    std::optional<std::string> path;
    std::optional<double> hurst;
    std::size_t n = 1024;
    double t = 1.0;
    std::optional<std::uint64_t> seed;
};

inline int cmd_solve(const SolveOptions& o, const CommonOptions& c) {
    const SystemSpec sys = system_from_json(read_json_file(o.system));
    const StabilityMode mode = [&] {
        try {
            return parse_mode(o.mode);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }();
    Vec y0 = o.y0.empty() ? Vec::Ones(static_cast<Eigen::Index>(sys.d())) : vec_from_list(o.y0);
    if (static_cast<std::size_t>(y0.size()) != sys.d()) throw ConfigError("--y0 must have one entry per state dimension");

    json cfg{{"system", system_to_json(sys)}, {"mode", o.mode}, {"y0", o.y0.empty() ? std::vector<double>(sys.d(), 1.0) : o.y0}};
    SampledPath x;
    std::optional<double> hurst = o.hurst;
    if (o.path) {
        x = read_path_csv(*o.path);
        cfg["path_hash"] = hex64(fnv1a(dump_json(mat_to_json(x.values()), -1)));
    } else {
        if (!o.hurst) throw ConfigError("give either --path or --hurst/--n/--t/--seed");
        if (!(*o.hurst > 0.0 && *o.hurst < 1.0)) throw ConfigError("--hurst must lie in (0,1)");
        if (!o.seed) throw ConfigError("--seed is required when sampling a driver");
        if (o.n < 2 || !(o.t > 0.0)) throw ConfigError("--n must be >= 2 and --t > 0");
        x = sample_fbm(*o.hurst, TimeGrid::uniform(0.0, o.t, o.n), sys.m(), *o.seed);
        cfg["driver"] = {{"hurst", *o.hurst}, {"n", o.n}, {"t", o.t}};
    }
    if (x.dim() != sys.m()) throw ConfigError("driver dimension must equal the number of C_j");
    if (mode == StabilityMode::young) {
        cfg["scheme"] = o.scheme;
        cfg["p"] = o.p;
    } else {
        cfg["stepping"] = o.stepping;
        cfg["lift"] = o.lift;
        cfg["alpha"] = o.alpha;
    }
    OutputDir out(c.out, RunManifest{"solve", cfg, o.path ? std::nullopt : o.seed, {}, c.record_time});

    json body{{"mode", o.mode}};
    SampledPath y;
    try {
        if (mode == StabilityMode::young) {
            YoungScheme sch;
            try {
                sch = parse_young_scheme(o.scheme);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            const auto ys = to_young(sys);
            y = solve_yde(ys, x, y0, sch);
            body["scheme"] = o.scheme;
            if (o.p > 1.0 && o.p < 2.0) {
                auto chk = check_apriori(ys, x, y, o.p, x.grid().t0(), x.grid().t1());
                body["bound_check"] = {{"kind", "apriori"}, {"p", o.p}, {"sup_norm", chk.sup_norm},
                                       {"log_sup_bound", chk.bound.log_sup_bound}, {"q_var", chk.q_var},
                                       {"log_q_var_bound", chk.bound.log_q_var_bound}, {"passed", chk.passed()}};
            }
        } else {
            Stepping st;
            try {
                st = parse_stepping(o.stepping);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            RoughLinearSystem rs;
            try {
                rs = to_rough(sys);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            auto L = std::make_shared<const RoughLift>(make_lift(x, o.lift, hurst));
            auto sol = solve_linear_rde(rs, L, y0, st, o.alpha);
            y = sol.trajectory;
            body["stepping"] = o.stepping;
            body["lift"] = o.lift;
            auto chk = verify_supnorm_bound(rs, *L, y0, x.grid().t0(), x.grid().t1(), o.alpha);
            body["bound_check"] = {{"kind", "supnorm"}, {"n_bar", chk.n_bar}, {"gamma", chk.gamma},
                                   {"log_bound", chk.log_bound}, {"sup_norm", chk.sup_norm},
                                   {"controlled", chk.controlled}, {"passed", chk.passed()}};
        }
    } catch (const BlowUpError& e) {
        body["blow_up"] = {{"index", e.index()}, {"message", e.what()}};
        out.write_json("solve.json", body);
        out.finish();
        std::cerr << "blow-up: " << e.what() << '\n';
        return kBlowUp;
    }
    // Closed form y0 exp(a t + c x_t) for scalar linear systems with a Young or geometric driver.
    const bool closed = sys.d() == 1 && sys.m() == 1 && sys.h.bound() == 0.0 && sys.g_family == "linear" &&
                        (mode == StabilityMode::young || o.lift == "geometric");
    json cf{{"applicable", closed}};
    if (closed) {
        double worst = 0.0;
        const double a = sys.A(0, 0), cc = sys.C[0](0, 0);
        for (std::size_t k = 0; k <= y.n(); ++k) {
            const double tk = y.grid()[k];
            const double exact = y0(0) * std::exp(a * (tk - y.grid().t0()) + cc * (x.value_at(tk)(0) - x.at(0)(0)));
            const double err = exact == 0.0 ? std::abs(y.at(k)(0)) : std::abs(y.at(k)(0) / exact - 1.0);
            worst = std::max(worst, err);
        }
        cf["max_relative_error"] = worst;
    }
    body["closed_form"] = cf;
    body["final_norm"] = y.at(y.n()).norm();
    out.write_path_csv("trajectory.csv", y, "y");
    out.write_json("solve.json", body);
    out.finish();
    return kOk;
}

struct StabilityOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<double> c_scales;
};

[[nodiscard]] inline json report_to_json(const StabilityReport& r) {
    json j{{"measured_exponent", r.measured_exponent},
           {"classification", classification_name(r.classification)},
           {"fraction_negative", r.fraction_negative},
           {"note", "almost-sure statements are checked as high-probability statements over the finite seed set"}};
    json th = json::object();
    for (const auto& [k, v] : r.thresholds) th[k] = {{"bound", v.first}, {"satisfied", v.second}};
    j["thresholds"] = th;
    if (r.linear_criterion) {
        const auto& c = *r.linear_criterion;
        j["linear_criterion"] = {{"lhs", c.lhs}, {"rhs", c.rhs}, {"rhs_conservative", c.rhs_conservative},
                                 {"K", c.K}, {"coefficient", c.coefficient}, {"moment", c.moment.estimate},
                                 {"moment_std_error", c.moment.std_error}, {"threshold", c.threshold},
                                 {"satisfied", c.satisfied}};
    }
    if (r.general_criterion) {
        const auto& g = *r.general_criterion;
        j["general_criterion"] = {{"mode", g.mode}, {"lambda_A", g.lambda_A}, {"C_f", g.C_f}, {"h0", g.h0},
                                  {"noise", g.noise}, {"E_kappa", g.E_kappa.estimate},
                                  {"E_kappa_std_error", g.E_kappa.std_error}, {"predicted_rate", g.predicted_rate},
                                  {"local_hypothesis", g.local_hypothesis}, {"global_hypothesis", g.global_hypothesis},
                                  {"eps_local", g.eps_local}, {"eps_global", g.eps_global}, {"eps_step3", g.eps_step3},
                                  {"local_satisfied", g.local_satisfied}, {"global_satisfied", g.global_satisfied}};
    }
    return j;
}

inline int cmd_stability(const StabilityOptions& o, const CommonOptions& c) {
    if (!o.seed) throw ConfigError("--seed is required");
    json raw = read_json_file(o.config);
    raw["seeds"]["master"] = *o.seed;
    ExperimentConfig cfg = experiment_from_json(raw);
    std::vector<double> scales = o.c_scales.empty() ? std::vector<double>{1.0} : o.c_scales;
    for (double s : scales)
        if (!(s >= 0.0)) throw ConfigError("--c-scales entries must be nonnegative");
    json mcfg = experiment_to_json(cfg);
    mcfg["c_scales"] = scales;
    OutputDir out(c.out, RunManifest{"stability", mcfg, o.seed, {}, c.record_time});

    std::vector<std::vector<std::string>> seed_rows, thr_rows;
    json reports = json::array();
    for (double s : scales) {
        ExperimentConfig run = cfg;
        for (auto& m : run.system.C) m *= s;
        const auto rep = run_stability_experiment(run);
        const double cn = run.system.C_norm();
        for (const auto& r : rep.seeds)
            seed_rows.push_back({fmt_double(s), std::to_string(r.index), std::to_string(r.seed), fmt_double(r.magnitude),
                                 fmt_double(r.exponent), fmt_double(r.endpoint), r.blew_up ? "1" : "0"});
        for (const auto& [name, v] : rep.thresholds)
            thr_rows.push_back({fmt_double(s), fmt_double(cn), name, fmt_double(v.first), v.second ? "1" : "0",
                                fmt_double(rep.measured_exponent), fmt_double(rep.fraction_negative),
                                classification_name(rep.classification)});
        if (rep.thresholds.empty())
            thr_rows.push_back({fmt_double(s), fmt_double(cn), "none", "nan", "0", fmt_double(rep.measured_exponent),
                                fmt_double(rep.fraction_negative), classification_name(rep.classification)});
        json j = report_to_json(rep);
        j["c_scale"] = s;
        j["C_norm"] = cn;
        reports.push_back(j);
    }
    out.write_json("report.json", {{"reports", reports}});
    out.write_csv("seeds.csv", {"c_scale", "index", "seed", "y0_magnitude", "exponent", "endpoint_exponent", "blew_up"},
                  seed_rows);
    out.write_csv("thresholds.csv",
                  {"c_scale", "C_norm", "criterion", "bound", "satisfied", "measured_exponent", "fraction_negative",
                   "classification"},
                  thr_rows);
    out.finish();
    return kOk;
}

struct VerifyOptions {
    std::string suite;
    std::optional<std::uint64_t> seed;
};

inline int cmd_verify(const VerifyOptions& o, const CommonOptions& c) {
    if (!o.seed) throw ConfigError("--seed is required");
    std::vector<std::string> names = o.suite == "all" ? suite_names() : std::vector<std::string>{o.suite};
    for (const auto& n : names)
        if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
            throw ConfigError("unknown suite '" + n + "'");
    OutputDir out(c.out, RunManifest{"verify", {{"suite", o.suite}}, o.seed, {}, c.record_time});
    json results = json::array();
    bool all = true;
    for (const auto& n : names) {
        auto r = run_suite(n, *o.seed);
        all = all && r.passed();
        results.push_back({{"suite", r.name}, {"checks", r.checks}, {"violations", r.violations},
                           {"passed", r.passed()}, {"details", r.details}});
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.checks - r.violations << "/" << r.checks
                  << ")\n";
    }
    out.write_json("verify.json", {{"suites", results}, {"passed", all}});
    out.finish();
    return all ? kOk : kFinding;
}

// ---------------------------------------------------------------------------------------------
// Entry point

inline int run(int argc, char** argv) {
    CLI::App app{"roughstab: rough-path integration and stability experiments"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "output directory")->required();
        sub->add_flag("--record-time", common.record_time, "add a creation timestamp to the manifest");
    };

    SampleOptions so;
    auto* sample = app.add_subcommand("sample", "sample an fBm path and its geometric lift");
    sample->add_option("--hurst", so.hurst, "Hurst parameter in (0,1)")->required();
    sample->add_option("--n", so.n, "number of steps")->required();
    sample->add_option("--t", so.t, "horizon");
    sample->add_option("--dim", so.dim, "path dimension");
    sample->add_option("--seed", so.seed, "random seed");
    add_common(sample);

    LiftOptions lo;
    auto* lift = app.add_subcommand("lift", "lift a sampled path and audit Chen's relation");
    lift->add_option("--path", lo.path, "path CSV")->required();
    lift->add_option("--type", lo.type, "geometric or ito");
    lift->add_option("--hurst", lo.hurst, "Hurst hint recorded with the lift");
    add_common(lift);

    NormsOptions no;
    auto* norms = app.add_subcommand("norms", "Hölder, p-variation and rough-path seminorms");
    norms->add_option("--path", no.path, "path CSV")->required();
    norms->add_option("--alpha", no.alpha, "Hölder exponent");
    norms->add_option("--p", no.p, "variation exponent");
    norms->add_option("--lift", no.lift, "geometric or ito");
    norms->add_option("--s", no.s, "interval start");
    norms->add_option("--t", no.t, "interval end");
    add_common(norms);

    GreedyOptions go;
    auto* greedy = app.add_subcommand("greedy", "greedy time sequence and its counting bound");
    greedy->add_option("--path", go.path, "path CSV")->required();
    greedy->add_option("--gamma", go.gamma, "threshold");
    greedy->add_option("--alpha", go.alpha, "Hölder exponent");
    greedy->add_flag("--augmented", go.augmented, "include the time term");
    greedy->add_option("--nu", go.nu, "exponent for the counting bound");
    greedy->add_option("--lift", go.lift, "geometric or ito");
    add_common(greedy);

    SolveOptions vo;
    auto* solve = app.add_subcommand("solve", "solve a Young or rough linear equation");
    solve->add_option("--system", vo.system, "system JSON")->required();
    solve->add_option("--mode", vo.mode, "young or rough_linear");
    solve->add_option("--scheme", vo.scheme, "euler or milstein (young)");
    solve->add_option("--stepping", vo.stepping, "grid or greedy (rough_linear)");
    solve->add_option("--lift", vo.lift, "geometric or ito (rough_linear)");
    solve->add_option("--alpha", vo.alpha, "Hölder exponent (rough_linear)");
    solve->add_option("--p", vo.p, "variation exponent for the a-priori check (young)");
    solve->add_option("--y0", vo.y0, "initial value, comma separated")->delimiter(',');
    solve->add_option("--path", vo.path, "driver CSV");
    solve->add_option("--hurst", vo.hurst, "sample a driver with this Hurst parameter");
    solve->add_option("--n", vo.n, "steps of the sampled driver");
    solve->add_option("--t", vo.t, "horizon of the sampled driver");
    solve->add_option("--seed", vo.seed, "seed of the sampled driver");
    add_common(solve);

    StabilityOptions sto;
    auto* stab = app.add_subcommand("stability", "Monte-Carlo stability experiment");
    stab->add_option("--config", sto.config, "experiment JSON")->required();
    stab->add_option("--seed", sto.seed, "master seed");
    stab->add_option("--c-scales", sto.c_scales, "multiples of C to sweep, comma separated")->delimiter(',');
    add_common(stab);

    VerifyOptions veo;
    auto* verify = app.add_subcommand("verify", "run a named invariant suite");
    verify->add_option("--suite", veo.suite, "chen, pvar, young-loeve, greedy, closed-form, apriori, angular or all")
        ->required();
    verify->add_option("--seed", veo.seed, "seed");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*sample) return cmd_sample(so, common);
        if (*lift) return cmd_lift(lo, common);
        if (*norms) return cmd_norms(no, common);
        if (*greedy) return cmd_greedy(go, common);
        if (*solve) return cmd_solve(vo, common);
        if (*stab) return cmd_stability(sto, common);
        if (*verify) return cmd_verify(veo, common);
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << '\n';
        return kBlowUp;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace roughstab::cli
