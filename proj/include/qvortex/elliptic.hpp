#pragma once

// Symmetric positive-definite solves on the grid: Jacobi-preconditioned
// conjugate gradients in the weighted inner product, and the screened
// Poisson problem defining the unit-frequency electrostatic map
//   -Lap(Phi) + q^2 u^2 Phi = q u^2,
// whose exact discrete solution obeys 0 <= Phi <= 1/q (M-matrix argument);
// the returned iterate satisfies it up to a residual-sized slack.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvortex/grid.hpp"
#include "qvortex/seeds.hpp"

namespace qvortex {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CgSettings {
    double tol = 1e-12;   // relative residual, in the weighted norm
    int max_iter = 20000;
    bool warm_start = true;
};

struct CgStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

namespace detail {

inline double dot_w_raw(const Grid2D& g, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) {
            const std::size_t k = static_cast<std::size_t>(g.index(i, j));
            s += a[k] * b[k] * g.weight(i);
        }
    return s;
}

} // namespace detail

/// Preconditioned CG for an operator that is self-adjoint and positive
/// definite in the weighted inner product.  `apply(x, y)` computes y = A x;
/// `precond` holds the diagonal of A (weighted representation).  Solves
/// A x = b to ||b - Ax||_w <= tol * ||b||_w.  The optional observer is called
/// with the current iterate after every update (used by tests to track the
/// energy-norm error decay).
template <class Apply>
CgStats pcg(const Grid2D& g, Apply&& apply, const std::vector<double>& b,
            std::vector<double>& x, const std::vector<double>& precond,
            double tol, int max_iter,
            const std::function<void(int, const std::vector<double>&)>& observer = {}) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);

    const double bnorm = std::sqrt(detail::dot_w_raw(g, b, b));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }
    if (x.size() != n) x.assign(n, 0.0);

    apply(x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / precond[k];
    p = z;
    double rz = detail::dot_w_raw(g, r, z);
    double rnorm = std::sqrt(detail::dot_w_raw(g, r, r));

    CgStats stats;
    stats.rel_residual = rnorm / bnorm;
    for (int it = 0; it < max_iter && stats.rel_residual > tol; ++it) {
        apply(p, ap);
        const double pap = detail::dot_w_raw(g, p, ap);
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) x[k] += alpha * p[k];
        for (std::size_t k = 0; k < n; ++k) r[k] -= alpha * ap[k];
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / precond[k];
        const double rz_new = detail::dot_w_raw(g, r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        rnorm = std::sqrt(detail::dot_w_raw(g, r, r));
        stats.rel_residual = rnorm / bnorm;
        stats.iterations = it + 1;
        if (observer) observer(it + 1, x);
    }
    return stats;
}

namespace detail {

/// y = (-Lap + q^2 u^2) x, weighted representation.
inline void screened_apply_into(const Grid2D& g, const std::vector<double>& u,
                                double q, const std::vector<double>& x,
                                std::vector<double>& y) {
    laplacian_into(g, x, y, matter_g_radial, matter_g_axial);
    const double q2 = q * q;
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = -y[k] + q2 * u[k] * u[k] * x[k];
}

inline std::vector<double> screened_diag(const Grid2D& g, const std::vector<double>& u, double q) {
    std::vector<double> d(static_cast<std::size_t>(g.size()));
    const double q2 = q * q;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) {
            const double gsum = matter_g_radial(g, i) + matter_g_radial(g, i + 1) +
                                matter_g_axial(g, i, j) + matter_g_axial(g, i, j + 1);
            const std::size_t k = static_cast<std::size_t>(g.index(i, j));
            d[k] = gsum / g.weight(i) + q2 * u[k] * u[k];
        }
    return d;
}

} // namespace detail

/// Solve -Lap(Phi) + q^2 u^2 Phi = q u^2.  For q = 0 the solution is
/// identically zero.  Throws SolverError (with the final residual) on
/// non-convergence.
inline ScalarField solve_phi(const ScalarField& u, double q, const CgSettings& settings,
                             const ScalarField* initial = nullptr, CgStats* stats_out = nullptr) {
    const Grid2D& g = u.grid();
    ScalarField phi(g, FieldKind::electrostatic);
    if (q <= 0.0) {
        if (stats_out) *stats_out = {0, 0.0};
        return phi;
    }
    if (!u.finite()) throw SolverError("solve_phi: non-finite matter field");

    std::vector<double> b(static_cast<std::size_t>(g.size()));
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double uv = u.values()[k];
        b[k] = q * uv * uv;
    }
    if (initial && settings.warm_start) {
        if (!(initial->grid() == g)) throw ConfigError("solve_phi: warm start on a different grid");
        phi.values() = initial->values();
    }
    const std::vector<double> diag = detail::screened_diag(g, u.values(), q);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        detail::screened_apply_into(g, u.values(), q, x, y);
    };
    CgStats stats = pcg(g, apply, b, phi.values(), diag, settings.tol, settings.max_iter);
    if (stats.rel_residual > settings.tol)
        throw SolverError("solve_phi: CG did not converge (relative residual " +
                          std::to_string(stats.rel_residual) + " after " +
                          std::to_string(stats.iterations) + " iterations)");
    if (stats_out) *stats_out = stats;
    return phi;
}

/// Residual-tied slack for the post-hoc bound check 0 <= Phi <= 1/q.
inline double phi_bound_slack(double q, double tol) {
    return q > 0.0 ? 100.0 * tol / q : 0.0;
}

struct PhiBoundCheck {
    bool ok = false;
    double max_phi = 0.0;
    double bound = 0.0;
    double margin = 0.0; // bound - max_phi
};

/// Checks the pointwise estimate max Phi_{u_{eps,lambda}} <= (q/2) eps^4 lambda^4
/// for the torus seed, with a small discretization slack.  The Dirichlet box
/// only lowers Phi, so the whole-space bound should hold with room.
inline PhiBoundCheck phi_upper_estimate_check(const Grid2D& g, double eps, double lambda,
                                              double q, const CgSettings& settings = {}) {
    PhiBoundCheck out;
    out.bound = 0.5 * q * std::pow(eps * lambda, 4.0);
    if (eps <= 0.0 || q <= 0.0) {
        out.ok = true;
        out.margin = out.bound;
        return out;
    }
    ScalarField u = torus_seed(g, SeedParams{eps, lambda});
    ScalarField phi = solve_phi(u, q, settings);
    for (double x : phi.values()) out.max_phi = std::max(out.max_phi, x);
    const double slack = 1e-2 * out.bound + 1e-12;
    out.margin = out.bound - out.max_phi;
    out.ok = out.max_phi <= out.bound + slack;
    return out;
}

} // namespace qvortex
