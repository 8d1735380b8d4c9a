#pragma once

// The reduced functionals and their exact discrete first variations.
//
//   I(u, a)      = 1/2 int (|grad u|^2 + |grad a|^2/r^2 + (l - q a)^2 u^2/r^2) dx
//                  + int W(u) dx
//   K_q(u)       = int (1 - q Phi_u) u^2 dx,  Phi_u the screened Poisson map
//   E_sigma_q    = I + sigma^2 / (2 K),  omega = sigma / K,  phi = omega Phi
//   E_hat        = I + omega^2 K / 2  (equal to E_sigma_q when omega = sigma/K)
//
// The u-gradient uses K'(u)[v] = 2 int (1 - q Phi_u)^2 u v dx, which is exact
// for the *discrete* K as well (the discrete screened operator is self-adjoint
// in the weighted inner product), so no adjoint solve is needed.  Gradients
// returned here are weighted-inner-product representatives: for any direction
// v, d/dt E(u + t v)|_0 = <grad_u, v>_w.
//
// K is evaluated through the variational form
//     K = int (1 - q Phi)^2 u^2 dx + int |grad Phi|^2 dx,
// which coincides with int (1 - q Phi) u^2 dx at the exact discrete Phi (the
// discrete screened equation tested with Phi) but is only second-order
// sensitive to the inner-solve residual.  That keeps energy differences
// resolvable down to machine precision during the outer line search, and it
// makes the gradient above exact for the evaluated functional at frozen Phi.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "qvortex/elliptic.hpp"
#include "qvortex/potential.hpp"

namespace qvortex {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnergyBreakdown {
    double dirichlet_u = 0.0; // 1/2 int |grad u|^2
    double gauge = 0.0;       // 1/2 int |grad a|^2 / r^2
    double covariant = 0.0;   // 1/2 int (l - q a)^2 u^2 / r^2
    double potential = 0.0;   // int W(u)
    double I_total = 0.0;
    double K = 0.0;
    double E_total = 0.0;     // I + sigma^2/(2K)
    double omega = 0.0;       // sigma / K
    double sigma = 0.0;
    double E_hat = 0.0;       // I + omega^2 K / 2
};

struct EnergyParams {
    double sigma = 1.0;
    double q = 0.0;
    int l = 0;
};

struct PhysicalScalars {
    double Q = 0.0;      // charge q*sigma
    double omega = 0.0;
    double M_m = 0.0;    // e3 component of the matter angular momentum
    double E_hat = 0.0;
    double sigma_recomputed = 0.0; // int (omega - q phi) u^2 dx, equals omega*K
};

/// Evaluation context: holds the parameters, the model and the warm-started
/// electrostatic solve.  One evaluator per minimization run (or per thread).
class EnergyEvaluator {
public:
    EnergyEvaluator(EnergyParams params, PotentialModel model, CgSettings cg = {})
        : p_(params), model_(std::move(model)), cg_(cg) {
        if (!(p_.sigma > 0.0)) throw ConfigError("energy: sigma must be positive");
        if (!(p_.q >= 0.0)) throw ConfigError("energy: q must be nonnegative");
    }

    const EnergyParams& params() const { return p_; }
    const PotentialModel& model() const { return model_; }
    const CgSettings& cg() const { return cg_; }
    void set_cg_tol(double tol) { cg_.tol = tol; }

    /// Solve (or re-solve, warm-started) Phi for this u and cache it.
    const ScalarField& phi(const ScalarField& u) {
        CgStats stats;
        phi_cache_ = solve_phi(u, p_.q, cg_, has_phi_ ? &phi_cache_ : nullptr, &stats);
        gauss_residual_ = stats.rel_residual;
        total_cg_iters_ += stats.iterations;
        has_phi_ = true;
        return phi_cache_;
    }

    double gauss_residual() const { return gauss_residual_; }
    long total_cg_iters() const { return total_cg_iters_; }

    EnergyBreakdown evaluate(const ScalarField& u, const ScalarField& a) {
        check_grids(u, a);
        const ScalarField& Phi = phi(u);
        return breakdown(u, a, Phi);
    }

    /// Breakdown with a caller-provided Phi (must solve the screened problem
    /// for this u to the working tolerance).
    EnergyBreakdown breakdown(const ScalarField& u, const ScalarField& a,
                              const ScalarField& Phi) const {
        const Grid2D& g = u.grid();
        EnergyBreakdown e;
        e.sigma = p_.sigma;
        e.dirichlet_u = dirichlet_energy(u);
        e.gauge = gauge_energy(a);
        double cov = 0.0, pot = 0.0, K = 0.0;
        for (int j = 0; j < g.n_z; ++j) {
            for (int i = 0; i < g.n_r; ++i) {
                const double w = g.weight(i);
                const double r = g.r(i);
                const double uv = u(i, j);
                const double lqa = p_.l - p_.q * a(i, j);
                const double screen = 1.0 - p_.q * Phi(i, j);
                cov += 0.5 * lqa * lqa * uv * uv / (r * r) * w;
                pot += model_.W(uv) * w;
                K += screen * screen * uv * uv * w;
            }
        }
        if (p_.q > 0.0) K += 2.0 * dirichlet_energy(Phi);
        e.covariant = cov;
        e.potential = pot;
        e.I_total = e.dirichlet_u + e.gauge + e.covariant + e.potential;
        e.K = K;
        if (!(K > 0.0))
            throw EvalError("energy: K_q(u) must be positive (u == 0 is outside the domain "
                            "of E_sigma_q)");
        e.omega = p_.sigma / K;
        e.E_total = e.I_total + p_.sigma * p_.sigma / (2.0 * K);
        e.E_hat = e.I_total + 0.5 * e.omega * e.omega * K;
        return e;
    }

    /// Exact gradient of the discrete E_sigma_q with respect to u:
    ///   -Lap u + (l - q a)^2 u / r^2 + W'(u) - omega^2 (1 - q Phi)^2 u.
    ScalarField grad_u(const ScalarField& u, const ScalarField& a,
                       const ScalarField& Phi, double omega) const {
        const Grid2D& g = u.grid();
        ScalarField out = apply_matter_laplacian(u);
        for (int j = 0; j < g.n_z; ++j) {
            for (int i = 0; i < g.n_r; ++i) {
                const double r = g.r(i);
                const double uv = u(i, j);
                const double lqa = p_.l - p_.q * a(i, j);
                const double s = 1.0 - p_.q * Phi(i, j);
                out(i, j) = -out(i, j) + lqa * lqa * uv / (r * r) + model_.Wprime(uv)
                            - omega * omega * s * s * uv;
            }
        }
        return out;
    }

    /// Exact gradient of the discrete E with respect to a:
    ///   -(a_rr - a_r/r + a_zz)/r^2 - q (l - q a) u^2 / r^2.
    ScalarField grad_a(const ScalarField& u, const ScalarField& a) const {
        const Grid2D& g = u.grid();
        ScalarField out = apply_gauge_operator(a);
        for (int j = 0; j < g.n_z; ++j) {
            for (int i = 0; i < g.n_r; ++i) {
                const double r = g.r(i);
                const double uv = u(i, j);
                const double lqa = p_.l - p_.q * a(i, j);
                out(i, j) = -out(i, j) - p_.q * lqa * uv * uv / (r * r);
            }
        }
        return out;
    }

    struct FullEval {
        EnergyBreakdown e;
        ScalarField grad_u;
        ScalarField grad_a;
    };

    FullEval full(const ScalarField& u, const ScalarField& a) {
        FullEval f{evaluate(u, a), {}, {}};
        f.grad_u = grad_u(u, a, phi_cache_, f.e.omega);
        f.grad_a = grad_a(u, a);
        return f;
    }

    const ScalarField& cached_phi() const { return phi_cache_; }
    bool has_cached_phi() const { return has_phi_; }
    void clear_phi_cache() { has_phi_ = false; }

private:
    static void check_grids(const ScalarField& u, const ScalarField& a) {
        if (!(u.grid() == a.grid()))
            throw ConfigError("energy: u and a must share a grid");
    }

    EnergyParams p_;
    PotentialModel model_;
    CgSettings cg_;
    ScalarField phi_cache_;
    bool has_phi_ = false;
    double gauss_residual_ = 0.0;
    long total_cg_iters_ = 0;
};

/// Derived physical scalars for a state with Phi solved and omega = sigma/K.
/// M_m = -int (l - q a)(omega - q phi) u^2 dx with phi = omega Phi; with
/// a == 0 this collapses to -l * sigma.
inline PhysicalScalars physical_scalars(const ScalarField& u, const ScalarField& a,
                                        const ScalarField& Phi, const EnergyBreakdown& e,
                                        double q, int l) {
    const Grid2D& g = u.grid();
    PhysicalScalars s;
    s.omega = e.omega;
    s.Q = q * e.sigma;
    s.E_hat = e.E_hat;
    double mm = 0.0, sig = 0.0;
    for (int j = 0; j < g.n_z; ++j) {
        for (int i = 0; i < g.n_r; ++i) {
            const double w = g.weight(i);
            const double u2 = u(i, j) * u(i, j);
            const double screen = e.omega * (1.0 - q * Phi(i, j)); // omega - q*phi
            mm += (l - q * a(i, j)) * screen * u2 * w;
            sig += screen * u2 * w;
        }
    }
    s.M_m = -mm;
    s.sigma_recomputed = sig;
    return s;
}

} // namespace qvortex
