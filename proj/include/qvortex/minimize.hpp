#pragma once

// Gradient-flow minimization of E_sigma_q over (u, a).
//
// Stepping: diagonally preconditioned descent direction d = -P^{-1} grad with
// a two-point Barzilai-Borwein initial step and monotone Armijo backtracking,
// so E is nonincreasing on every accepted step by construction.  The diagonal
// metric P collects the stiff curvature sources (the Laplacian diagonal, the
// 1/r^2 winding penalty, the gauge operator's axis terms, the mass term);
// without it the axis cells of the gauge sector throttle the step length by
// four orders of magnitude.  Convergence is still declared on the plain
// weighted gradient norm, not the preconditioned one.
//
// Nonnegativity is kept by replacing u with |u| after each step; the discrete
// energy cannot increase under that map (the Dirichlet part contracts, every
// other term depends on u^2 only).  The norm-constrained mode renormalizes u
// to the target L^2(w) norm after every step and extracts the multiplier as
// the weighted Rayleigh quotient <grad_u E, u>_w / int u^2 at convergence.
//
// omega is always derived (omega = sigma / K_q(u)), never an unknown.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qvortex/diagnostics.hpp"
#include "qvortex/energy.hpp"

namespace qvortex {

enum class SolveMode { charge_fixed, norm_constrained };

struct StepControls {
    double initial_step = 0.1;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
};

struct SolverConfig {
    double sigma = 1.0;
    double q = 0.0;
    int l = 0;
    SolveMode mode = SolveMode::charge_fixed;
    double grad_tol = 1e-8;
    int max_outer = 50000;
    StepControls step;
    int recenter_every = 0;  // 0 disables in-loop recentering
    bool alternating = false; // alternate u- and a-steps instead of a joint step
    double norm_target = 1.0; // int u^2 dx in norm_constrained mode
    CgSettings cg{0.0, 20000, true}; // tol 0 = auto (1e-2 * grad_tol)
    int log_every = 0;       // progress lines to stderr every N iterations
};

struct IterationRecord {
    int iter = 0;
    double E = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    double K = 0.0;
    double u_l2sq = 0.0;
    double mu = 0.0;        // instantaneous Rayleigh quotient
    bool recentered = false; // state was shifted after this record
};

struct MinimizeTrace {
    std::vector<IterationRecord> records;
    int bounds_violations = 0; // a-priori K / L2 window failures
    int line_search_backtracks = 0;
    bool converged = false;
    int iterations = 0;
    double final_grad_norm = 0.0;
    double E_seed = 0.0;
    double bound_lo = 0.0; // sigma^2 / (2 E_seed)
    double bound_hi = 0.0; // 2 E_seed / m^2
};

struct VortexSolution {
    ScalarField u, a, phi; // phi is the unit map Phi; the physical potential is omega*Phi
    double omega = 0.0;
    EnergyBreakdown breakdown;
    std::optional<double> mu;             // norm_constrained only
    std::optional<double> effective_mass; // m^2 - mu
    FieldEquationResiduals residuals;
    MinimizeTrace trace;

    ScalarField phi_physical() const {
        ScalarField p = phi;
        for (double& x : p.values()) x *= omega;
        return p;
    }
};

struct RecenterResult {
    ScalarField u, a;
    int shift = 0; // cells the fields were moved by (toward +z)
};

/// Shift both fields by an integer number of cells so the charge-density
/// centroid int z u^2 / int u^2 lies within one cell of z = 0.
inline RecenterResult recenter_z(const ScalarField& u, const ScalarField& a) {
    const Grid2D& g = u.grid();
    double num = 0.0, den = 0.0;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) {
            const double m = u(i, j) * u(i, j) * g.weight(i);
            num += g.z(j) * m;
            den += m;
        }
    RecenterResult out{u, a, 0};
    if (den <= 0.0) return out;
    const int cells = static_cast<int>(std::llround(num / den / g.dz));
    if (cells != 0) {
        out.u = shift_z(u, -cells);
        out.a = shift_z(a, -cells);
        out.shift = -cells;
    }
    return out;
}

namespace detail {

inline void axpy_field(ScalarField& y, double alpha, const ScalarField& x) {
    auto& yv = y.values();
    const auto& xv = x.values();
    for (std::size_t k = 0; k < yv.size(); ++k) yv[k] += alpha * xv[k];
}

inline ScalarField stepped(const ScalarField& x, double alpha, const ScalarField& d) {
    ScalarField y = x;
    axpy_field(y, alpha, d);
    return y;
}

inline void take_abs(ScalarField& u) {
    for (double& x : u.values()) x = std::abs(x);
}

inline void normalize_to(ScalarField& u, double target_sq) {
    const double n2 = dot_w(u, u);
    if (!(n2 > 0.0)) throw SolverError("minimize: u collapsed to zero during projection");
    const double c = std::sqrt(target_sq / n2);
    for (double& x : u.values()) x *= c;
}

inline CgSettings effective_cg(const SolverConfig& c) {
    CgSettings cg = c.cg;
    // inner tolerance tied to the outer one, but never looser than what keeps
    // the evaluated energy resolvable across late line-search comparisons
    if (cg.tol <= 0.0) cg.tol = std::min(1e-2 * c.grad_tol, 1e-12);
    return cg;
}

} // namespace detail

namespace detail {

/// Diagonal curvature metric: Laplacian diagonals plus the winding penalty,
/// the gauge screening and the mass term.  Positive everywhere; frozen during
/// each line search.
struct DiagMetric {
    std::vector<double> pu, pa;

    void build(const Grid2D& g, double q, int l, double msq, const ScalarField& u) {
        pu.resize(static_cast<std::size_t>(g.size()));
        pa.resize(static_cast<std::size_t>(g.size()));
        for (int j = 0; j < g.n_z; ++j)
            for (int i = 0; i < g.n_r; ++i) {
                const std::size_t k = static_cast<std::size_t>(g.index(i, j));
                const double w = g.weight(i);
                const double r2 = g.r(i) * g.r(i);
                const double lap_m = (matter_g_radial(g, i) + matter_g_radial(g, i + 1) +
                                      matter_g_axial(g, i, j) + matter_g_axial(g, i, j + 1)) / w;
                const double lap_g = (gauge_g_radial(g, i) + gauge_g_radial(g, i + 1) +
                                      gauge_g_axial(g, i, j) + gauge_g_axial(g, i, j + 1)) / w;
                pu[k] = lap_m + static_cast<double>(l) * l / r2 + msq;
                pa[k] = lap_g + q * q * u(i, j) * u(i, j) / r2;
            }
    }

    static void apply_inv(const std::vector<double>& p, const ScalarField& grad, ScalarField& d) {
        d = grad;
        auto& dv = d.values();
        for (std::size_t k = 0; k < dv.size(); ++k) dv[k] = -dv[k] / p[k];
    }
};

inline VortexSolution minimize_impl(const SolverConfig& cfg, const PotentialModel& model,
                                    ScalarField u, ScalarField a) {
    const Grid2D& g = u.grid();
    if (!(a.grid() == g)) throw ConfigError("minimize: seed fields on different grids");
    if (!(cfg.sigma > 0.0)) throw ConfigError("minimize: sigma must be positive");
    if (!(cfg.grad_tol > 0.0)) throw ConfigError("minimize: grad_tol must be positive");
    const bool constrained = cfg.mode == SolveMode::norm_constrained;

    detail::take_abs(u);
    if (constrained) detail::normalize_to(u, cfg.norm_target);
    if (norm_w(u) == 0.0) throw ConfigError("minimize: seed u must be nonzero");

    EnergyEvaluator ev({cfg.sigma, cfg.q, cfg.l}, model, detail::effective_cg(cfg));
    EnergyBreakdown e = ev.evaluate(u, a);

    MinimizeTrace trace;
    trace.E_seed = e.E_total;
    trace.bound_lo = cfg.sigma * cfg.sigma / (2.0 * trace.E_seed);
    trace.bound_hi = 2.0 * trace.E_seed / model.msq();

    DiagMetric metric;
    ScalarField gu, gtan, ga, du, da;
    double mu_inst = 0.0, gn2 = 0.0, dec_full = 0.0;

    // gradients, tangential projection, preconditioned directions
    auto refresh = [&]() {
        gu = ev.grad_u(u, a, ev.cached_phi(), e.omega);
        ga = ev.grad_a(u, a);
        mu_inst = dot_w(gu, u) / dot_w(u, u);
        gtan = gu;
        if (constrained) detail::axpy_field(gtan, -mu_inst, u);
        gn2 = dot_w(gtan, gtan) + dot_w(ga, ga);

        metric.build(g, cfg.q, cfg.l, model.msq(), u);
        DiagMetric::apply_inv(metric.pu, gtan, du);
        if (constrained) {
            const double c = dot_w(du, u) / dot_w(u, u);
            detail::axpy_field(du, -c, u);
        }
        DiagMetric::apply_inv(metric.pa, ga, da);
        dec_full = -(dot_w(gtan, du) + dot_w(ga, da));
        if (!(dec_full > 0.0)) { // metric degenerated: fall back to plain descent
            du = gtan;
            for (double& x : du.values()) x = -x;
            da = ga;
            for (double& x : da.values()) x = -x;
            dec_full = gn2;
        }
    };
    refresh();

    double alpha = cfg.step.initial_step;
    bool have_bb = false;
    ScalarField prev_u, prev_a, prev_gt, prev_ga;

    // a-priori window on K and int u^2 along the run.  The lower bound
    // sigma^2/(2 E_seed) follows from E >= sigma^2/(2K) >= sigma^2/(2K) with
    // monotone E and K <= int u^2, unconditionally.  The upper bound
    // 2 E_seed / m^2 needs int N(u) >= 0, so it is asserted only for models
    // with nonnegative N; for the genuinely signed models (the interesting
    // ones) the mass term is not dominated by E and no such window exists.
    const double bound_slack = 1e-9;
    const bool upper_applies = model.all_coeffs_nonneg();
    auto check_bounds = [&](double K, double u2) {
        const double lo = trace.bound_lo * (1.0 - bound_slack) - bound_slack;
        const double hi = trace.bound_hi * (1.0 + bound_slack) + bound_slack;
        if (K < lo || u2 < lo) ++trace.bounds_violations;
        if (upper_applies && (K > hi || u2 > hi)) ++trace.bounds_violations;
    };

    // Monotone energy reference.  Near the minimum the achievable decrease
    // per step on the stiff modes (~ |g|^2 / curvature) falls below one ulp
    // of E; steps there still contract the gradient, so they are accepted
    // when the evaluated energy matches E_ref to rounding, and E_ref carries
    // the smallest evaluation seen.  The recorded energies are exactly
    // nonincreasing.
    double E_ref = e.E_total;

    // The energy is evaluated through the variational K form, which is only
    // second-order sensitive to the electrostatic residual, so the inner
    // tolerance can track the outer gradient norm; it tightens to the
    // 1e-2 * grad_tol working tolerance as the run converges.
    const double cg_tight = detail::effective_cg(cfg).tol;
    auto inner_tol = [&](double gn) {
        return std::clamp(1e-3 * gn, cg_tight, 1e-5);
    };

    int iter = 0;
    for (; iter < cfg.max_outer; ++iter) {
        const double gn = std::sqrt(gn2);
        trace.records.push_back({iter, E_ref, gn, alpha, e.K, dot_w(u, u), mu_inst, false});
        trace.final_grad_norm = gn;
        if (cfg.log_every > 0 && iter % cfg.log_every == 0)
            std::fprintf(stderr, "  it %6d  E %.12g  |g| %.3e  step %.3e  cg %ld\n", iter,
                         E_ref, gn, alpha, ev.total_cg_iters());
        if (gn < cfg.grad_tol) {
            trace.converged = true;
            break;
        }
        ev.set_cg_tol(inner_tol(gn));

        // two-point Barzilai-Borwein step in the preconditioned metric
        if (have_bb) {
            ScalarField s_u = u, s_a = a;
            detail::axpy_field(s_u, -1.0, prev_u);
            detail::axpy_field(s_a, -1.0, prev_a);
            ScalarField y_u = gtan, y_a = ga;
            detail::axpy_field(y_u, -1.0, prev_gt);
            detail::axpy_field(y_a, -1.0, prev_ga);
            double sPs = 0.0;
            {
                const Grid2D& gr = g;
                for (int j = 0; j < gr.n_z; ++j)
                    for (int i = 0; i < gr.n_r; ++i) {
                        const std::size_t k = static_cast<std::size_t>(gr.index(i, j));
                        const double w = gr.weight(i);
                        sPs += metric.pu[k] * s_u.values()[k] * s_u.values()[k] * w;
                        sPs += metric.pa[k] * s_a.values()[k] * s_a.values()[k] * w;
                    }
            }
            const double sy = dot_w(s_u, y_u) + dot_w(s_a, y_a);
            if (sy > 0.0 && sPs > 0.0) alpha = std::clamp(sPs / sy, 1e-12, 1e12);
        }

        prev_u = u;
        prev_a = a;
        prev_gt = gtan;
        prev_ga = ga;

        // monotone Armijo backtracking on the projected trial point
        bool accepted = false;
        EnergyBreakdown et;
        ScalarField tu, ta;
        const int phases = cfg.alternating ? 2 : 1;
        for (int phase = 0; phase < phases; ++phase) {
            double a_try = alpha;
            const bool step_u = !cfg.alternating || phase == 0;
            const bool step_a = !cfg.alternating || phase == 1;
            if (cfg.alternating && phase == 1) {
                ga = ev.grad_a(u, a); // refresh at the new u
                DiagMetric::apply_inv(metric.pa, ga, da);
            }
            const double dec = cfg.alternating
                                   ? (step_u ? -dot_w(gtan, du) : -dot_w(ga, da))
                                   : dec_full;
            if (!(dec > 0.0)) continue;
            bool phase_ok = false;
            // Armijo with an absolute machine-resolution slack: decrements
            // below a few hundred ulp of E are not representable, but such
            // steps still contract the gradient and must remain acceptable.
            const double floor_dec = 256.0 * std::numeric_limits<double>::epsilon() *
                                     std::abs(E_ref);
            for (int bt = 0; bt < 80; ++bt) {
                tu = step_u ? detail::stepped(u, a_try, du) : u;
                ta = step_a ? detail::stepped(a, a_try, da) : a;
                if (step_u) {
                    detail::take_abs(tu);
                    if (constrained) detail::normalize_to(tu, cfg.norm_target);
                }
                et = ev.evaluate(tu, ta);
                const double want = cfg.step.armijo_c * a_try * dec;
                if (et.E_total <= E_ref + floor_dec - want) {
                    phase_ok = true;
                    alpha = a_try;
                    break;
                }
                ++trace.line_search_backtracks;
                a_try *= cfg.step.backtrack;
                if (a_try < 1e-18 * cfg.step.initial_step) break;
            }
            if (phase_ok) {
                u = tu;
                a = ta;
                e = et;
                E_ref = std::min(E_ref, et.E_total);
                accepted = true;
            }
        }
        if (!accepted) {
            trace.iterations = iter;
            throw SolverError("minimize: line search failed at iteration " +
                              std::to_string(iter) + " (E = " + std::to_string(e.E_total) +
                              ", |grad| = " + std::to_string(gn) + ", step underflow)");
        }
        have_bb = true;

        if (cfg.recenter_every > 0 && (iter + 1) % cfg.recenter_every == 0) {
            RecenterResult rc = recenter_z(u, a);
            if (rc.shift != 0) {
                u = rc.u;
                a = rc.a;
                ev.clear_phi_cache();
                e = ev.evaluate(u, a);
                E_ref = e.E_total; // new reference: shifts move E by truncation error
                have_bb = false;   // displacement history invalid across a shift
                if (!trace.records.empty()) trace.records.back().recentered = true;
            }
        }

        check_bounds(e.K, dot_w(u, u));
        refresh();
    }
    trace.iterations = iter;

    // final state at the tight working tolerance
    ev.set_cg_tol(cg_tight);
    e = ev.evaluate(u, a);
    gu = ev.grad_u(u, a, ev.cached_phi(), e.omega);
    ga = ev.grad_a(u, a);
    mu_inst = dot_w(gu, u) / dot_w(u, u);

    VortexSolution sol;
    sol.u = u;
    sol.a = a;
    sol.phi = ev.cached_phi();
    sol.breakdown = e;
    sol.omega = e.omega;
    if (constrained) {
        sol.mu = mu_inst;
        sol.effective_mass = model.msq() - mu_inst;
    }
    sol.residuals.matter = norm_w(gu);
    sol.residuals.ampere = norm_w(ga);
    sol.residuals.gauss = ev.gauss_residual();
    sol.trace = std::move(trace);
    return sol;
}

} // namespace detail

inline VortexSolution minimize_free(const SolverConfig& cfg, const PotentialModel& model,
                                    const ScalarField& seed_u, const ScalarField& seed_a) {
    SolverConfig c = cfg;
    c.mode = SolveMode::charge_fixed;
    return detail::minimize_impl(c, model, seed_u, seed_a);
}

inline VortexSolution minimize_constrained(const SolverConfig& cfg, const PotentialModel& model,
                                           const ScalarField& seed_u, const ScalarField& seed_a) {
    SolverConfig c = cfg;
    c.mode = SolveMode::norm_constrained;
    return detail::minimize_impl(c, model, seed_u, seed_a);
}

} // namespace qvortex
