#pragma once

// Batch-driver plumbing: the flat key-value config format (sections [grid],
// [potential], [solver], [run]), field CSV output/input, the JSON run
// summary, and the run manifest.  Data artifacts are written atomically and
// are bitwise-deterministic for a fixed config; the manifest timestamp comes
// from the clock unless [run] created_utc pins it.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvortex/minimize.hpp"
#include "qvortex/seed_energy.hpp"

namespace qvortex {

using json = nlohmann::ordered_json;

inline constexpr const char* version_string = "0.1.0";

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct GridSpec {
    int n_r = 64;
    int n_z = 64;
    double r_max = 6.0;
    double z_half = 6.0;
    bool operator==(const GridSpec&) const = default;
};

struct PotentialSpec {
    double m = 1.0;
    std::vector<PotentialTerm> terms;
    double D = 0.0;
    double tau = 3.0;
    double eps0 = 1.0;
    double check_s_max = 10.0;
    int check_samples = 4096;
    bool operator==(const PotentialSpec&) const = default;
};

struct SolverSpec {
    double sigma = 1.0;
    double q = 0.0;
    int l = 0;
    std::string mode = "charge_fixed";
    double grad_tol = 1e-8;
    int max_outer = 50000;
    double initial_step = 0.1;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int recenter_every = 0;
    bool alternating = false;
    double norm_target = 1.0;
    double cg_tol = 0.0; // 0 = auto (1e-2 * grad_tol)
    int cg_max_iter = 20000;
    bool operator==(const SolverSpec&) const = default;
};

struct RunSpec {
    std::string out_dir = "out";
    long run_seed = 1;
    double seed_eps = 0.0;    // 0 = derive from the recipe
    double seed_lambda = 0.0; // 0 = derive from the recipe
    std::string created_utc;  // empty = wall clock at write time
    bool operator==(const RunSpec&) const = default;
};

struct RunConfig {
    GridSpec grid;
    PotentialSpec potential;
    SolverSpec solver;
    RunSpec run;
    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using IniSection = std::map<std::string, std::string>;
using IniFile = std::map<std::string, IniSection>;

inline IniFile parse_ini(std::istream& in) {
    IniFile ini;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            ini[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
        ini[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}
inline int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x)
        throw ConfigError("config: key '" + key + "' must be an integer (got '" + v + "')");
    return i;
}
inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' must be a boolean (got '" + v + "')");
}

/// terms syntax: semicolon-separated "coeff,exponent" pairs,
/// e.g.  terms = -1.0,3 ; 0.55,4
inline std::vector<PotentialTerm> parse_terms(const std::string& v) {
    std::vector<PotentialTerm> terms;
    std::stringstream ss(v);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        pair = trim(pair);
        if (pair.empty()) continue;
        const auto comma = pair.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config: potential term '" + pair + "' must be coeff,exponent");
        PotentialTerm t;
        t.coeff = to_double("terms", trim(pair.substr(0, comma)));
        t.exponent = to_double("terms", trim(pair.substr(comma + 1)));
        terms.push_back(t);
    }
    return terms;
}

template <class Fn>
void consume(IniSection& sec, const std::string& key, Fn&& fn) {
    auto it = sec.find(key);
    if (it == sec.end()) return;
    fn(it->second);
    sec.erase(it);
}

inline void require_empty(const std::string& section, const IniSection& sec) {
    if (sec.empty()) return;
    std::string keys;
    for (const auto& [k, v] : sec) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("config: unknown key(s) in [" + section + "]: " + keys);
}

} // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
    using namespace detail;
    IniFile ini = parse_ini(in);
    RunConfig c;

    if (auto it = ini.find("grid"); it != ini.end()) {
        auto& s = it->second;
        consume(s, "n_r", [&](const std::string& v) { c.grid.n_r = to_int("n_r", v); });
        consume(s, "n_z", [&](const std::string& v) { c.grid.n_z = to_int("n_z", v); });
        consume(s, "r_max", [&](const std::string& v) { c.grid.r_max = to_double("r_max", v); });
        consume(s, "z_half", [&](const std::string& v) { c.grid.z_half = to_double("z_half", v); });
        require_empty("grid", s);
        ini.erase(it);
    }
    if (auto it = ini.find("potential"); it != ini.end()) {
        auto& s = it->second;
        consume(s, "m", [&](const std::string& v) { c.potential.m = to_double("m", v); });
        consume(s, "terms", [&](const std::string& v) { c.potential.terms = parse_terms(v); });
        consume(s, "D", [&](const std::string& v) { c.potential.D = to_double("D", v); });
        consume(s, "tau", [&](const std::string& v) { c.potential.tau = to_double("tau", v); });
        consume(s, "eps0", [&](const std::string& v) { c.potential.eps0 = to_double("eps0", v); });
        consume(s, "check_s_max",
                [&](const std::string& v) { c.potential.check_s_max = to_double("check_s_max", v); });
        consume(s, "check_samples",
                [&](const std::string& v) { c.potential.check_samples = to_int("check_samples", v); });
        require_empty("potential", s);
        ini.erase(it);
    }
    if (auto it = ini.find("solver"); it != ini.end()) {
        auto& s = it->second;
        consume(s, "sigma", [&](const std::string& v) { c.solver.sigma = to_double("sigma", v); });
        consume(s, "q", [&](const std::string& v) { c.solver.q = to_double("q", v); });
        consume(s, "l", [&](const std::string& v) { c.solver.l = to_int("l", v); });
        consume(s, "mode", [&](const std::string& v) { c.solver.mode = v; });
        consume(s, "grad_tol", [&](const std::string& v) { c.solver.grad_tol = to_double("grad_tol", v); });
        consume(s, "max_outer", [&](const std::string& v) { c.solver.max_outer = to_int("max_outer", v); });
        consume(s, "initial_step",
                [&](const std::string& v) { c.solver.initial_step = to_double("initial_step", v); });
        consume(s, "armijo_c", [&](const std::string& v) { c.solver.armijo_c = to_double("armijo_c", v); });
        consume(s, "backtrack", [&](const std::string& v) { c.solver.backtrack = to_double("backtrack", v); });
        consume(s, "recenter_every",
                [&](const std::string& v) { c.solver.recenter_every = to_int("recenter_every", v); });
        consume(s, "alternating",
                [&](const std::string& v) { c.solver.alternating = to_bool("alternating", v); });
        consume(s, "norm_target",
                [&](const std::string& v) { c.solver.norm_target = to_double("norm_target", v); });
        consume(s, "cg_tol", [&](const std::string& v) { c.solver.cg_tol = to_double("cg_tol", v); });
        consume(s, "cg_max_iter",
                [&](const std::string& v) { c.solver.cg_max_iter = to_int("cg_max_iter", v); });
        require_empty("solver", s);
        ini.erase(it);
    }
    if (auto it = ini.find("run"); it != ini.end()) {
        auto& s = it->second;
        consume(s, "out_dir", [&](const std::string& v) { c.run.out_dir = v; });
        consume(s, "run_seed", [&](const std::string& v) { c.run.run_seed = to_int("run_seed", v); });
        consume(s, "seed_eps", [&](const std::string& v) { c.run.seed_eps = to_double("seed_eps", v); });
        consume(s, "seed_lambda",
                [&](const std::string& v) { c.run.seed_lambda = to_double("seed_lambda", v); });
        consume(s, "created_utc", [&](const std::string& v) { c.run.created_utc = v; });
        require_empty("run", s);
        ini.erase(it);
    }
    if (!ini.empty())
        throw ConfigError("config: unknown section [" + ini.begin()->first + "]");

    if (c.solver.mode != "charge_fixed" && c.solver.mode != "norm_constrained")
        throw ConfigError("config: mode must be charge_fixed or norm_constrained");
    return c;
}

inline RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_run_config(in);
}

/// Constructs the validated PotentialModel (throws ConfigError with the W3
/// bound in the message for out-of-range exponents).
inline PotentialModel make_model(const PotentialSpec& p) {
    return PotentialModel(p.m, p.terms, p.D, p.tau, p.eps0);
}

inline SolverConfig make_solver_config(const SolverSpec& s) {
    SolverConfig c;
    c.sigma = s.sigma;
    c.q = s.q;
    c.l = s.l;
    c.mode = s.mode == "norm_constrained" ? SolveMode::norm_constrained : SolveMode::charge_fixed;
    c.grad_tol = s.grad_tol;
    c.max_outer = s.max_outer;
    c.step = {s.initial_step, s.armijo_c, s.backtrack};
    c.recenter_every = s.recenter_every;
    c.alternating = s.alternating;
    c.norm_target = s.norm_target;
    c.cg = CgSettings{s.cg_tol, s.cg_max_iter, true};
    return c;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
} // namespace detail

inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, p);
}

/// Field CSV: header r,z,u,a,phi; one row per node, z-outer row-major,
/// 17 significant digits.  phi is the physical potential omega * Phi.
inline std::string fields_csv(const ScalarField& u, const ScalarField& a,
                              const ScalarField& phi_physical) {
    const Grid2D& g = u.grid();
    std::string out = "r,z,u,a,phi\n";
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) {
            out += detail::fmt17(g.r(i));
            out += ',';
            out += detail::fmt17(g.z(j));
            out += ',';
            out += detail::fmt17(u(i, j));
            out += ',';
            out += detail::fmt17(a(i, j));
            out += ',';
            out += detail::fmt17(phi_physical(i, j));
            out += '\n';
        }
    return out;
}

struct FieldsCsv {
    Grid2D grid;
    ScalarField u, a, phi_physical;
};

inline FieldsCsv read_fields_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fields CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "r,z,u,a,phi")
        throw ConfigError("fields CSV: expected header r,z,u,a,phi");
    std::vector<double> r, z, u, a, phi;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        double vals[5];
        const char* p = line.c_str();
        char* end = nullptr;
        for (int k = 0; k < 5; ++k) {
            vals[k] = std::strtod(p, &end);
            if (end == p) throw ConfigError("fields CSV: malformed row '" + line + "'");
            p = end;
            if (k < 4) {
                while (*p == ' ') ++p;
                if (*p != ',') throw ConfigError("fields CSV: malformed row '" + line + "'");
                ++p;
            }
        }
        r.push_back(vals[0]);
        z.push_back(vals[1]);
        u.push_back(vals[2]);
        a.push_back(vals[3]);
        phi.push_back(vals[4]);
    }
    if (r.empty()) throw ConfigError("fields CSV: no rows");
    // z-outer ordering: the first block shares z[0]
    int n_r = 0;
    while (n_r < static_cast<int>(z.size()) && z[static_cast<std::size_t>(n_r)] == z[0]) ++n_r;
    if (n_r < 1 || r.size() % static_cast<std::size_t>(n_r) != 0)
        throw ConfigError("fields CSV: rows are not a complete z-outer grid");
    const int n_z = static_cast<int>(r.size()) / n_r;
    if (n_r < 2 || n_z < 2) throw ConfigError("fields CSV: grid too small");
    const double dr = r[1] - r[0];
    const double dz = z[static_cast<std::size_t>(n_r)] - z[0];
    FieldsCsv out;
    out.grid = build_grid(n_r, n_z, n_r * dr, 0.5 * n_z * dz);
    for (int i = 0; i < n_r; ++i)
        if (std::abs(out.grid.r(i) - r[static_cast<std::size_t>(i)]) > 1e-9 * out.grid.r_max)
            throw ConfigError("fields CSV: radial nodes are not cell-centered uniform");
    out.u = ScalarField(out.grid, FieldKind::matter);
    out.a = ScalarField(out.grid, FieldKind::gauge);
    out.phi_physical = ScalarField(out.grid, FieldKind::electrostatic);
    for (int j = 0; j < n_z; ++j)
        for (int i = 0; i < n_r; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * n_r + i;
            out.u(i, j) = u[k];
            out.a(i, j) = a[k];
            out.phi_physical(i, j) = phi[k];
        }
    return out;
}

// ---------------------------------------------------------------------------
// JSON summary and manifest
// ---------------------------------------------------------------------------

inline json breakdown_json(const EnergyBreakdown& e) {
    return json{{"dirichlet_u", e.dirichlet_u}, {"gauge", e.gauge},
                {"covariant", e.covariant},     {"potential", e.potential},
                {"I_total", e.I_total},         {"K", e.K},
                {"E_total", e.E_total},         {"omega", e.omega},
                {"sigma", e.sigma},             {"E_hat", e.E_hat}};
}

inline json identity_json(const IdentityReport& r) {
    auto terms = [](const IdentityTerms& t) {
        json o = json::object();
        for (const auto& [k, v] : t.terms) o[k] = v;
        o["total"] = t.total;
        return o;
    };
    return json{{"v1", r.residual_v1},
                {"v3", r.residual_v3},
                {"ne4", r.residual_ne4},
                {"ne5", r.residual_ne5},
                {"ne7", r.residual_ne7},
                {"Omega", r.Omega},
                {"E_hat", r.E_hat},
                {"terms",
                 json{{"v1", terms(r.v1)},
                      {"v3", terms(r.v3)},
                      {"ne4", terms(r.ne4)},
                      {"ne5", terms(r.ne5)},
                      {"ne7", terms(r.ne7)}}}};
}

inline json summary_json(const VortexSolution& sol, const PhysicalScalars& scalars,
                         const IdentityReport& identities, const SolverSpec& solver) {
    json s;
    s["sigma"] = solver.sigma;
    s["q"] = solver.q;
    s["l"] = solver.l;
    s["omega"] = sol.omega;
    s["mu"] = sol.mu ? json(*sol.mu) : json(nullptr);
    s["effective_mass"] = sol.effective_mass ? json(*sol.effective_mass) : json(nullptr);
    s["energy"] = breakdown_json(sol.breakdown);
    s["charge_Q"] = scalars.Q;
    s["angular_momentum_Mm"] = scalars.M_m;
    s["identity_residuals"] = identity_json(identities);
    s["field_equation_residuals"] = json{{"matter", sol.residuals.matter},
                                         {"gauss", sol.residuals.gauss},
                                         {"ampere", sol.residuals.ampere}};
    s["iterations"] = sol.trace.iterations;
    s["converged"] = sol.trace.converged;
    s["max_abs_a"] = sol.a.max_abs();
    s["max_q_phi"] = solver.q * sol.phi.max_abs();
    return s;
}

inline json config_json(const RunConfig& c) {
    json terms = json::array();
    for (const auto& t : c.potential.terms) terms.push_back(json{{"coeff", t.coeff}, {"exponent", t.exponent}});
    return json{
        {"grid", {{"n_r", c.grid.n_r}, {"n_z", c.grid.n_z}, {"r_max", c.grid.r_max}, {"z_half", c.grid.z_half}}},
        {"potential",
         {{"m", c.potential.m},
          {"terms", terms},
          {"D", c.potential.D},
          {"tau", c.potential.tau},
          {"eps0", c.potential.eps0},
          {"check_s_max", c.potential.check_s_max},
          {"check_samples", c.potential.check_samples}}},
        {"solver",
         {{"sigma", c.solver.sigma},
          {"q", c.solver.q},
          {"l", c.solver.l},
          {"mode", c.solver.mode},
          {"grad_tol", c.solver.grad_tol},
          {"max_outer", c.solver.max_outer},
          {"initial_step", c.solver.initial_step},
          {"armijo_c", c.solver.armijo_c},
          {"backtrack", c.solver.backtrack},
          {"recenter_every", c.solver.recenter_every},
          {"alternating", c.solver.alternating},
          {"norm_target", c.solver.norm_target},
          {"cg_tol", c.solver.cg_tol},
          {"cg_max_iter", c.solver.cg_max_iter}}},
        {"run",
         {{"out_dir", c.run.out_dir},
          {"run_seed", c.run.run_seed},
          {"seed_eps", c.run.seed_eps},
          {"seed_lambda", c.run.seed_lambda},
          {"created_utc", c.run.created_utc}}}};
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    const auto& g = j.at("grid");
    c.grid = {g.at("n_r").get<int>(), g.at("n_z").get<int>(), g.at("r_max").get<double>(),
              g.at("z_half").get<double>()};
    const auto& p = j.at("potential");
    c.potential.m = p.at("m").get<double>();
    for (const auto& t : p.at("terms"))
        c.potential.terms.push_back({t.at("coeff").get<double>(), t.at("exponent").get<double>()});
    c.potential.D = p.at("D").get<double>();
    c.potential.tau = p.at("tau").get<double>();
    c.potential.eps0 = p.at("eps0").get<double>();
    c.potential.check_s_max = p.at("check_s_max").get<double>();
    c.potential.check_samples = p.at("check_samples").get<int>();
    const auto& s = j.at("solver");
    c.solver.sigma = s.at("sigma").get<double>();
    c.solver.q = s.at("q").get<double>();
    c.solver.l = s.at("l").get<int>();
    c.solver.mode = s.at("mode").get<std::string>();
    c.solver.grad_tol = s.at("grad_tol").get<double>();
    c.solver.max_outer = s.at("max_outer").get<int>();
    c.solver.initial_step = s.at("initial_step").get<double>();
    c.solver.armijo_c = s.at("armijo_c").get<double>();
    c.solver.backtrack = s.at("backtrack").get<double>();
    c.solver.recenter_every = s.at("recenter_every").get<int>();
    c.solver.alternating = s.at("alternating").get<bool>();
    c.solver.norm_target = s.at("norm_target").get<double>();
    c.solver.cg_tol = s.at("cg_tol").get<double>();
    c.solver.cg_max_iter = s.at("cg_max_iter").get<int>();
    const auto& r = j.at("run");
    c.run.out_dir = r.at("out_dir").get<std::string>();
    c.run.run_seed = r.at("run_seed").get<long>();
    c.run.seed_eps = r.at("seed_eps").get<double>();
    c.run.seed_lambda = r.at("seed_lambda").get<double>();
    c.run.created_utc = r.at("created_utc").get<std::string>();
    return c;
}

inline std::string utc_now_iso8601() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json manifest_json(const RunConfig& c, const std::vector<std::string>& output_paths) {
    json m;
    m["version"] = version_string;
    m["created_utc"] = c.run.created_utc.empty() ? utc_now_iso8601() : c.run.created_utc;
    m["run_seed"] = c.run.run_seed;
    m["outputs"] = output_paths;
    m["config"] = config_json(c);
    return m;
}

/// Lossless round trip: parse(serialize(m)).config == m.config.
inline RunConfig config_from_manifest(const json& manifest) {
    return config_from_json(manifest.at("config"));
}

} // namespace qvortex
