#pragma once

// The torus test family: the unit bump
//   v(r, z) = 1 - sqrt((r-2)^2 + z^2)  on the solid torus (r-2)^2 + z^2 <= 1,
// its lambda-scaled version v(x/lambda) supported on A_lambda (centerline
// radius 2*lambda, minor radius lambda), and the parameter-selection recipe
// that makes the seed u = eps^2 * lambda * v(x/lambda) a candidate with
// reduced energy below the rest-mass line m*sigma.
//
// Closed-form moments used as oracles (Pappus factorization):
//   int v^tau dx = 8 pi^2 / ((tau+1)(tau+2)),   |A_lambda| = 4 pi^2 lambda^3,
//   int |grad v|^2 dx = |A_1| = 4 pi^2.

#include <cmath>
#include <string>

#include "qvortex/grid.hpp"
#include "qvortex/potential.hpp"

namespace qvortex {

/// int v^tau dx over R^3 for the unit bump (tau > 0).
inline double torus_moment(double tau) {
    return 8.0 * pi * pi / ((tau + 1.0) * (tau + 2.0));
}

inline constexpr double torus_unit_support_volume = 4.0 * pi * pi; // |A_1|

struct SeedParams {
    double eps = 0.0;
    double lambda = 1.0;
    double amplitude() const { return eps * eps * lambda; }
    bool eps_lambda_ok() const { return eps * lambda <= 1.0 + 1e-12; }
    bool coupling_ok(double q) const {
        if (q <= 0.0) return true;
        const double e4l4 = std::pow(eps * lambda, 4.0);
        return e4l4 < 2.0 / (q * q);
    }
};

inline void require_grid_covers_torus(const Grid2D& g, double lambda) {
    if (g.r_max < 3.0 * lambda || g.z_half < lambda)
        throw ConfigError("torus seed: grid must cover r <= 3*lambda and |z| <= lambda");
}

/// Nodal sampling of v(x/lambda); unit amplitude, zero outside A_lambda.
inline ScalarField torus_bump(const Grid2D& g, double lambda) {
    require_grid_covers_torus(g, lambda);
    ScalarField f(g, FieldKind::matter);
    for (int j = 0; j < g.n_z; ++j) {
        const double z = g.z(j);
        for (int i = 0; i < g.n_r; ++i) {
            const double r = g.r(i);
            const double rho = std::hypot(r - 2.0 * lambda, z);
            if (rho <= lambda) f(i, j) = 1.0 - rho / lambda;
        }
    }
    return f;
}

/// Nodal sampling of |grad v(x/lambda)|^2 = (1/lambda^2) * chi_{A_lambda}.
/// The gradient is known in closed form, so this avoids the first-order
/// error of differencing the sampled bump across its support edge.
inline ScalarField torus_bump_gradsq(const Grid2D& g, double lambda) {
    require_grid_covers_torus(g, lambda);
    ScalarField f(g, FieldKind::matter);
    const double inv = 1.0 / (lambda * lambda);
    for (int j = 0; j < g.n_z; ++j) {
        const double z = g.z(j);
        for (int i = 0; i < g.n_r; ++i) {
            const double rho = std::hypot(g.r(i) - 2.0 * lambda, z);
            if (rho <= lambda) f(i, j) = inv;
        }
    }
    return f;
}

/// Indicator of the support A_lambda (for the support-volume diagnostic).
inline ScalarField torus_support(const Grid2D& g, double lambda) {
    ScalarField f = torus_bump_gradsq(g, lambda);
    for (double& x : f.values()) x = x > 0.0 ? 1.0 : 0.0;
    return f;
}

/// The scaled seed u_{eps,lambda} = eps^2 * lambda * v(x/lambda).
inline ScalarField torus_seed(const Grid2D& g, const SeedParams& p) {
    ScalarField f = torus_bump(g, p.lambda);
    const double amp = p.amplitude();
    for (double& x : f.values()) x *= amp;
    return f;
}

struct SeedSelection {
    bool feasible = false;
    SeedParams params;
    std::string violated;     // the inequality that failed, when infeasible
    double lambda_min = 0.0;  // max{1, 6 q^2 sigma/(m pi^2), 6 sigma/(m pi^2)}
    double lambda_branch = 0.0; // the branch upper bound on lambda
    double E_const = 0.0;     // E = D (6 sigma/(m pi^2))^{tau/2} int v^tau
    double chain_value = 0.0; // A + B*lambda^2 - E*lambda^{5-3tau/2} at the pick
};

/// Parameter selection: fixes eps^4 lambda^5 = 6 sigma/(m pi^2), takes the
/// smallest admissible lambda, and checks the energy-chain inequality
///   12 (sigma/m)(1+l^2) + (3/2) m sigma lambda^2 <= E lambda^{5 - 3 tau/2}
/// together with the branch bound on lambda.  Infeasible is a value, not an
/// error; the minimal workable D is found by bisection elsewhere.
inline SeedSelection choose_seed_params(double sigma, double m, double q, int l,
                                        double tau, double D, double v_tau_integral) {
    if (!(sigma > 0.0) || !(m > 0.0) || !(q >= 0.0) || !(tau > 2.0))
        throw ConfigError("choose_seed_params: need sigma > 0, m > 0, q >= 0, tau > 2");

    SeedSelection sel;
    const double C = 6.0 * sigma / (m * pi * pi); // eps^4 lambda^5
    const double A = 12.0 * (sigma / m) * (1.0 + static_cast<double>(l) * l);
    const double B = 1.5 * m * sigma;
    sel.E_const = D * std::pow(C, tau / 2.0) * v_tau_integral;
    sel.lambda_min = std::max({1.0, C, 6.0 * q * q * sigma / (m * pi * pi)});

    if (tau > 10.0 / 3.0) {
        sel.lambda_branch = sel.E_const > 0.0
            ? std::pow(sel.E_const / (A + B), 2.0 / (3.0 * tau - 10.0))
            : 0.0;
    } else {
        sel.lambda_branch = sel.E_const > A ? std::sqrt((sel.E_const - A) / B) : 0.0;
    }

    const double lam = sel.lambda_min;
    const double eps = std::pow(C / std::pow(lam, 5.0), 0.25);
    sel.params = SeedParams{eps, lam};
    sel.chain_value = A + B * lam * lam - sel.E_const * std::pow(lam, 5.0 - 1.5 * tau);

    if (sel.chain_value > 0.0) {
        sel.violated = "chain: 12(sigma/m)(1+l^2) + (3/2) m sigma lambda^2 > E lambda^{5-3tau/2}";
        return sel;
    }
    if (lam > sel.lambda_branch) {
        sel.violated = "branch: lambda_min exceeds the branch bound on lambda";
        return sel;
    }
    if (!sel.params.eps_lambda_ok()) {
        sel.violated = "eps*lambda <= 1";
        return sel;
    }
    if (!sel.params.coupling_ok(q)) {
        sel.violated = "eps^4 lambda^4 < 2/q^2";
        return sel;
    }
    sel.feasible = true;
    return sel;
}

/// Minimal D (by bisection) making choose_seed_params feasible; returns a
/// negative value if no D up to `cap` works.
inline double min_feasible_D(double sigma, double m, double q, int l, double tau,
                             double v_tau_integral, double cap = 1e12) {
    auto feasible = [&](double D) {
        return choose_seed_params(sigma, m, q, l, tau, D, v_tau_integral).feasible;
    };
    double hi = 1.0;
    while (!feasible(hi)) {
        hi *= 2.0;
        if (hi > cap) return -1.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace qvortex
