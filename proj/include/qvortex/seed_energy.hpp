#pragma once

// Numerical verification that a torus seed dips below the rest-mass line:
// evaluates E_sigma_q(u_{eps,lambda}, 0) on a grid and compares against
// m*sigma, reporting each term of the analytic upper-bound chain alongside
// for diagnosis.

#include "qvortex/energy.hpp"
#include "qvortex/seeds.hpp"

namespace qvortex {

struct SeedBoundChain {
    double gradient = 0.0;   // 2 pi^2 eps^4 lambda^3
    double covariant = 0.0;  // 2 pi^2 l^2 eps^4 lambda^3
    double mass = 0.0;       // (m^2 pi^2 / 3) eps^4 lambda^5
    double w4_term = 0.0;    // -D eps^{2 tau} lambda^{tau+3} int v^tau
    double charge = 0.0;     // 3 sigma^2 / (2 pi^2 (1 - q^2 eps^4 lambda^4 / 2) eps^4 lambda^5)
    double total = 0.0;
};

struct SeedBoundReport {
    double E_value = 0.0;
    double bound = 0.0; // m * sigma
    bool ok = false;    // E_value < bound
    double margin = 0.0; // bound - E_value
    SeedBoundChain chain;
    EnergyBreakdown breakdown;
};

inline SeedBoundChain seed_bound_chain(const SeedParams& p, double sigma, double m,
                                       double q, int l, const PotentialModel& model) {
    SeedBoundChain c;
    const double e4l3 = std::pow(p.eps, 4.0) * std::pow(p.lambda, 3.0);
    const double e4l5 = std::pow(p.eps, 4.0) * std::pow(p.lambda, 5.0);
    const double e4l4 = std::pow(p.eps * p.lambda, 4.0);
    c.gradient = 2.0 * pi * pi * e4l3;
    c.covariant = 2.0 * pi * pi * l * l * e4l3;
    c.mass = m * m * pi * pi / 3.0 * e4l5;
    c.w4_term = -model.D() * std::pow(p.eps, 2.0 * model.tau()) *
                std::pow(p.lambda, model.tau() + 3.0) * torus_moment(model.tau());
    const double screen = 1.0 - 0.5 * q * q * e4l4;
    c.charge = screen > 0.0 ? 3.0 * sigma * sigma / (2.0 * pi * pi * screen * e4l5)
                            : std::numeric_limits<double>::infinity();
    c.total = c.gradient + c.covariant + c.mass + c.w4_term + c.charge;
    return c;
}

/// Evaluate E_sigma_q(u_{eps,lambda}, 0) numerically and compare to m*sigma.
inline SeedBoundReport verify_seed_energy_bound(const Grid2D& g, const SeedParams& p,
                                                double sigma, double q, int l,
                                                const PotentialModel& model,
                                                const CgSettings& cg = {}) {
    SeedBoundReport rep;
    rep.bound = model.m() * sigma;
    rep.chain = seed_bound_chain(p, sigma, model.m(), q, l, model);

    ScalarField u = torus_seed(g, p);
    ScalarField a(g, FieldKind::gauge);
    EnergyEvaluator ev({sigma, q, l}, model, cg);
    rep.breakdown = ev.evaluate(u, a);
    rep.E_value = rep.breakdown.E_total;
    rep.margin = rep.bound - rep.E_value;
    rep.ok = rep.E_value < rep.bound;
    return rep;
}

} // namespace qvortex
