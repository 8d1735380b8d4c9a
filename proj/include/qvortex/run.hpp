#pragma once

// Orchestration for the CLI subcommands: solve, verify-seed, check-potential,
// identities (re-run diagnostics on a saved field CSV), sweep.

#include <filesystem>
#include <string>
#include <vector>

#include "qvortex/io.hpp"

namespace qvortex {

/// The seed actually used by a run: explicit (eps, lambda) from the config
/// when both are set, otherwise the recipe point eps^4 lambda^5 = 6 sigma/(m pi^2)
/// at the smallest admissible lambda.
inline SeedParams resolve_seed(const RunConfig& c) {
    if (c.run.seed_eps > 0.0 && c.run.seed_lambda > 0.0) {
        SeedParams p{c.run.seed_eps, c.run.seed_lambda};
        if (!p.eps_lambda_ok())
            throw ConfigError("seed: eps*lambda <= 1 is violated");
        if (!p.coupling_ok(c.solver.q))
            throw ConfigError("seed: eps^4 lambda^4 < 2/q^2 is violated");
        return p;
    }
    const double C = 6.0 * c.solver.sigma / (c.potential.m * pi * pi);
    const double lam = std::max({1.0, C, C * c.solver.q * c.solver.q});
    return SeedParams{std::pow(C / std::pow(lam, 5.0), 0.25), lam};
}

struct SolveOutput {
    VortexSolution solution;
    PhysicalScalars scalars;
    IdentityReport identities;
    json summary;
    std::vector<std::string> paths; // fields_csv, summary_json, manifest_json
};

inline SolveOutput run_solve(const RunConfig& c, bool write_artifacts = true) {
    const Grid2D grid = build_grid(c.grid.n_r, c.grid.n_z, c.grid.r_max, c.grid.z_half);
    const PotentialModel model = make_model(c.potential);
    const SolverConfig solver = make_solver_config(c.solver);
    const SeedParams seed = resolve_seed(c);

    ScalarField seed_u = torus_seed(grid, seed);
    ScalarField seed_a(grid, FieldKind::gauge);

    SolveOutput out;
    out.solution = solver.mode == SolveMode::norm_constrained
                       ? minimize_constrained(solver, model, seed_u, seed_a)
                       : minimize_free(solver, model, seed_u, seed_a);
    const VortexSolution& sol = out.solution;
    out.scalars = physical_scalars(sol.u, sol.a, sol.phi, sol.breakdown, c.solver.q, c.solver.l);
    out.identities = pohozaev_report(sol.u, sol.a, sol.phi, sol.omega, sol.breakdown.E_hat,
                                     c.solver.q, c.solver.l, model);
    out.summary = summary_json(sol, out.scalars, out.identities, c.solver);

    if (write_artifacts) {
        namespace fs = std::filesystem;
        const fs::path dir(c.run.out_dir);
        const std::string csv_path = (dir / "fields.csv").string();
        const std::string summary_path = (dir / "summary.json").string();
        const std::string manifest_path = (dir / "manifest.json").string();
        atomic_write(csv_path, fields_csv(sol.u, sol.a, sol.phi_physical()));
        atomic_write(summary_path, out.summary.dump(2) + "\n");
        out.paths = {csv_path, summary_path, manifest_path};
        atomic_write(manifest_path, manifest_json(c, out.paths).dump(2) + "\n");
    }
    return out;
}

inline json seed_bound_report_json(const SeedBoundReport& rep) {
    return json{{"E_value", rep.E_value},
                {"bound_m_sigma", rep.bound},
                {"ok", rep.ok},
                {"margin", rep.margin},
                {"chain",
                 {{"gradient", rep.chain.gradient},
                  {"covariant", rep.chain.covariant},
                  {"mass", rep.chain.mass},
                  {"w4_term", rep.chain.w4_term},
                  {"charge", rep.chain.charge},
                  {"total", rep.chain.total}}},
                {"energy", breakdown_json(rep.breakdown)}};
}

inline json run_verify_seed(const RunConfig& c) {
    const PotentialModel model = make_model(c.potential);
    const double vtau = torus_moment(model.tau());
    const SeedSelection sel = choose_seed_params(c.solver.sigma, model.m(), c.solver.q,
                                                 c.solver.l, model.tau(), model.D(), vtau);
    const double d0 = min_feasible_D(c.solver.sigma, model.m(), c.solver.q, c.solver.l,
                                     model.tau(), vtau);
    const SeedParams seed =
        c.run.seed_eps > 0.0 && c.run.seed_lambda > 0.0 ? resolve_seed(c) : sel.params;

    json rep;
    rep["feasible"] = sel.feasible;
    rep["violated"] = sel.violated;
    rep["seed"] = json{{"eps", seed.eps}, {"lambda", seed.lambda}, {"amplitude", seed.amplitude()}};
    rep["lambda_min"] = sel.lambda_min;
    rep["lambda_branch"] = sel.lambda_branch;
    rep["E_const"] = sel.E_const;
    rep["D0_bisect"] = d0;
    // defining relation echo: eps^4 lambda^5 * m pi^2 / (6 sigma) == 1
    rep["recipe_echo"] = std::pow(seed.eps, 4.0) * std::pow(seed.lambda, 5.0) * model.m() * pi * pi /
                         (6.0 * c.solver.sigma);
    rep["eps_below_eps0"] = seed.eps < model.eps0();

    const Grid2D grid = build_grid(c.grid.n_r, c.grid.n_z, c.grid.r_max, c.grid.z_half);
    if (grid.r_max >= 3.0 * seed.lambda && grid.z_half >= seed.lambda) {
        CgSettings cg{c.solver.cg_tol > 0.0 ? c.solver.cg_tol : 1e-10, c.solver.cg_max_iter, true};
        rep["bound_check"] = seed_bound_report_json(verify_seed_energy_bound(
            grid, seed, c.solver.sigma, c.solver.q, c.solver.l, model, cg));
    } else {
        rep["bound_check"] = json{{"skipped", "grid does not cover the torus support"}};
    }
    return rep;
}

inline json run_check_potential(const RunConfig& c) {
    const PotentialModel model = make_model(c.potential);
    const HypothesisReport rep =
        verify_hypotheses(model, c.potential.check_s_max, c.potential.check_samples);
    return json{{"W1_ok", rep.w1_ok},
                {"W2_ok", rep.w2_ok},
                {"W3_ok", rep.w3_ok},
                {"W4_ok", rep.w4_ok},
                {"W1_witness", rep.w1_witness},
                {"W4_witness", rep.w4_witness},
                {"ok", rep.ok()}};
}

/// Re-run diagnostics on a saved field CSV.  Phi is re-solved from u (the
/// stored phi column is compared against omega * Phi as a consistency check).
inline json run_identities(const RunConfig& c, const std::string& csv_path) {
    FieldsCsv f = read_fields_csv(csv_path);
    const PotentialModel model = make_model(c.potential);
    CgSettings cg{c.solver.cg_tol > 0.0 ? c.solver.cg_tol : 1e-10, c.solver.cg_max_iter, true};
    EnergyEvaluator ev({c.solver.sigma, c.solver.q, c.solver.l}, model, cg);
    const EnergyBreakdown e = ev.evaluate(f.u, f.a);
    const ScalarField& Phi = ev.cached_phi();
    IdentityReport rep = pohozaev_report(f.u, f.a, Phi, e.omega, e.E_hat, c.solver.q,
                                         c.solver.l, model);
    double phi_dev = 0.0;
    for (int j = 0; j < f.grid.n_z; ++j)
        for (int i = 0; i < f.grid.n_r; ++i)
            phi_dev = std::max(phi_dev, std::abs(f.phi_physical(i, j) - e.omega * Phi(i, j)));
    const FieldEquationResiduals res = field_equation_residuals(ev, f.u, f.a);
    json out;
    out["omega"] = e.omega;
    out["energy"] = breakdown_json(e);
    out["identity_residuals"] = identity_json(rep);
    out["field_equation_residuals"] =
        json{{"matter", res.matter}, {"gauss", res.gauss}, {"ampere", res.ampere}};
    out["phi_consistency_max_dev"] = phi_dev;
    return out;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

inline RunConfig apply_sweep_value(const RunConfig& base, const std::string& param,
                                   const std::string& value) {
    RunConfig c = base;
    if (param == "sigma") {
        c.solver.sigma = detail::to_double("sigma", value);
    } else if (param == "q") {
        c.solver.q = detail::to_double("q", value);
    } else if (param == "l") {
        c.solver.l = detail::to_int("l", value);
    } else if (param == "D") {
        const double d = detail::to_double("D", value);
        c.potential.D = d;
        bool matched = false;
        for (auto& t : c.potential.terms)
            if (std::abs(t.exponent - c.potential.tau) < 1e-12) {
                t.coeff = -d;
                matched = true;
            }
        if (!matched) c.potential.terms.push_back({-d, c.potential.tau});
    } else if (param == "grid") {
        const auto x = value.find('x');
        if (x == std::string::npos)
            throw ConfigError("sweep: grid values must look like 128x256");
        c.grid.n_r = detail::to_int("grid", value.substr(0, x));
        c.grid.n_z = detail::to_int("grid", value.substr(x + 1));
    } else {
        throw ConfigError("sweep: unknown parameter '" + param +
                          "' (expected sigma, q, D, l or grid)");
    }
    return c;
}

inline std::string sweep_table(const RunConfig& base, const std::string& param,
                               const std::vector<std::string>& values) {
    std::string table =
        "param,value,omega,E_total,E_hat,I_total,K,charge_Q,angular_momentum_Mm,max_abs_a,"
        "max_q_phi,residual_v1,residual_v3,residual_ne4,residual_ne5,residual_ne7,"
        "matter_residual,gauss_residual,ampere_residual,mu,iterations,converged\n";
    for (const auto& v : values) {
        const RunConfig c = apply_sweep_value(base, param, v);
        SolveOutput out = run_solve(c, /*write_artifacts=*/false);
        const auto& s = out.solution;
        auto f = detail::fmt17;
        table += param + "," + v + "," + f(s.omega) + "," + f(s.breakdown.E_total) + "," +
                 f(s.breakdown.E_hat) + "," + f(s.breakdown.I_total) + "," + f(s.breakdown.K) +
                 "," + f(out.scalars.Q) + "," + f(out.scalars.M_m) + "," + f(s.a.max_abs()) + "," +
                 f(c.solver.q * s.phi.max_abs()) + "," + f(out.identities.residual_v1) + "," +
                 f(out.identities.residual_v3) + "," + f(out.identities.residual_ne4) + "," +
                 f(out.identities.residual_ne5) + "," + f(out.identities.residual_ne7) + "," +
                 f(s.residuals.matter) + "," + f(s.residuals.gauss) + "," +
                 f(s.residuals.ampere) + "," + (s.mu ? f(*s.mu) : "") + "," +
                 std::to_string(s.trace.iterations) + "," + (s.trace.converged ? "true" : "false") +
                 "\n";
    }
    return table;
}

inline std::string run_sweep(const RunConfig& base, const std::string& param,
                             const std::vector<std::string>& values) {
    const std::string table = sweep_table(base, param, values);
    namespace fs = std::filesystem;
    const std::string path = (fs::path(base.run.out_dir) / ("sweep_" + param + ".csv")).string();
    atomic_write(path, table);
    return path;
}

} // namespace qvortex
