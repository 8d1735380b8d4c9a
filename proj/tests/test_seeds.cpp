#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace qvortex;
using namespace testsupport;

TEST_CASE("torus bump geometry") {
    Grid2D g = build_grid(256, 256, 4.0, 2.0);
    ScalarField v = torus_bump(g, 1.0);
    double vmax = 0.0;
    for (double x : v.values()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
        vmax = std::max(vmax, x);
    }
    CHECK(vmax > 0.95);
    // support excludes r < lambda, so every axis-adjacent cell is zero
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r && g.r(i) < 1.0; ++i) CHECK(v(i, j) == 0.0);

    CHECK_THROWS_AS(torus_bump(build_grid(16, 16, 2.0, 2.0), 1.0), ConfigError);
}

TEST_CASE("support volume and gradient integral match the closed forms") {
    Grid2D g = build_grid(512, 512, 4.0, 2.0);
    CHECK(rel_diff(integrate(torus_support(g, 1.0)), 4.0 * pi * pi) < 1e-2);
    CHECK(rel_diff(integrate(torus_bump_gradsq(g, 1.0)), 4.0 * pi * pi) < 5e-3);

    Grid2D g2 = build_grid(256, 256, 8.0, 4.0);
    CHECK(rel_diff(integrate(torus_support(g2, 2.0)), 4.0 * pi * pi * 8.0) < 1e-2);
    CHECK(rel_diff(integrate(torus_bump_gradsq(g2, 2.0)), 4.0 * pi * pi * 2.0) < 1e-2);
}

TEST_CASE("seed parameter selection") {
    const double vtau4 = torus_moment(4.0);

    SECTION("tau = 4 branch with large D") {
        SeedSelection sel = choose_seed_params(1.0, 1.0, 1.0, 1, 4.0, 40.0, vtau4);
        REQUIRE(sel.feasible);
        CHECK(sel.params.lambda == 1.0); // lambda_min = max{1, 6/pi^2, 6/pi^2}
        // branch exponent 2/(3 tau - 10) = 1 at tau = 4
        const double A = 12.0 * 2.0, B = 1.5;
        CHECK(rel_diff(sel.lambda_branch, sel.E_const / (A + B)) < 1e-14);
        CHECK(sel.params.lambda <= sel.lambda_branch);
        // defining relation echo
        const double echo = std::pow(sel.params.eps, 4.0) * std::pow(sel.params.lambda, 5.0) *
                            pi * pi / 6.0;
        CHECK(rel_diff(echo, 1.0) < 1e-13);
        CHECK(sel.params.eps_lambda_ok());
        CHECK(sel.params.coupling_ok(1.0));
    }
    SECTION("tau < 10/3 branch") {
        SeedSelection sel = choose_seed_params(1.0, 1.0, 1.0, 1, 2.25, 10.0, torus_moment(2.25));
        REQUIRE(sel.feasible);
        const double A = 24.0, B = 1.5;
        CHECK(rel_diff(sel.lambda_branch, std::sqrt((sel.E_const - A) / B)) < 1e-14);
        CHECK(sel.params.lambda <= sel.lambda_branch);
    }
    SECTION("D = 0 is infeasible for any tau") {
        CHECK_FALSE(choose_seed_params(1.0, 1.0, 1.0, 1, 4.0, 0.0, vtau4).feasible);
        CHECK_FALSE(choose_seed_params(1.0, 1.0, 1.0, 1, 3.0, 0.0, torus_moment(3.0)).feasible);
        CHECK_FALSE(choose_seed_params(2.0, 1.0, 0.5, 2, 2.5, 0.0, torus_moment(2.5)).feasible);
    }
    SECTION("bisection finds the feasibility threshold") {
        const double d0 = min_feasible_D(1.0, 1.0, 1.0, 1, 4.0, vtau4);
        REQUIRE(d0 > 0.0);
        const double C = 6.0 / (pi * pi);
        const double closed = 25.5 / (C * C * vtau4); // E = A + B at lambda = 1
        CHECK(rel_diff(d0, closed) < 1e-9);
        CHECK(choose_seed_params(1.0, 1.0, 1.0, 1, 4.0, d0 * 1.01, vtau4).feasible);
        CHECK_FALSE(choose_seed_params(1.0, 1.0, 1.0, 1, 4.0, d0 * 0.99, vtau4).feasible);
    }
}

TEST_CASE("seed amplitude and covariant-term bounds") {
    Grid2D g = build_grid(100, 72, 25.0, 9.0);
    SeedParams p = recipe_seed(1.0, 1.0, 8.0);
    REQUIRE(p.eps * p.lambda <= 1.0);
    ScalarField u = torus_seed(g, p);
    for (double x : u.values()) {
        CHECK(x >= 0.0);
        CHECK(x <= p.eps);
    }
    ScalarField cov = u;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) cov(i, j) = u(i, j) * u(i, j) / (g.r(i) * g.r(i));
    const double bound = 4.0 * pi * pi * std::pow(p.eps, 4.0) * std::pow(p.lambda, 3.0);
    CHECK(integrate(cov) <= bound);
}

TEST_CASE("energy bound verification for a model meeting W1-W4") {
    PotentialModel model = full_hypothesis_model();
    auto hyp = verify_hypotheses(model, 10.0, 20000);
    CHECK(hyp.w1_ok);
    CHECK(hyp.w2_ok);
    CHECK(hyp.w3_ok);
    CHECK(hyp.w4_ok);

    Grid2D g = build_grid(100, 72, 25.0, 9.0);
    SeedParams p = recipe_seed(1.0, model.m(), 8.0);
    REQUIRE(p.eps < model.eps0());

    SeedBoundReport rep = verify_seed_energy_bound(g, p, 1.0, 1.0, 1, model, {1e-10, 20000, true});
    CHECK(rep.bound == Catch::Approx(1.0));
    CHECK(rep.ok);
    CHECK(rep.margin > 0.1);
    // the numeric energy must sit below the analytic chain bound
    CHECK(rep.E_value <= rep.chain.total + 1e-9);
    // and the chain's mass term is exactly 2 m sigma at the recipe point
    CHECK(rel_diff(rep.chain.mass, 2.0) < 1e-12);
}

TEST_CASE("paper K lower bound holds for the seed") {
    PotentialModel model = full_hypothesis_model();
    Grid2D g = build_grid(100, 72, 25.0, 9.0);
    SeedParams p = recipe_seed(1.0, 1.0, 8.0);
    ScalarField u = torus_seed(g, p);
    ScalarField a(g, FieldKind::gauge);
    EnergyEvaluator ev({1.0, 1.0, 1}, model, {1e-10, 20000, true});
    EnergyBreakdown e = ev.evaluate(u, a);
    ScalarField usq = u;
    for (double& x : usq.values()) x = x * x;
    const double e4l4 = std::pow(p.eps * p.lambda, 4.0);
    CHECK(e.K >= (1.0 - 0.5 * e4l4) * integrate(usq));
}

TEST_CASE("bound margin grows monotonically in D") {
    Grid2D g = build_grid(128, 128, 4.0, 2.0);
    SeedParams p = recipe_seed(1.0, 1.0, 1.0);
    double last = -1e300;
    for (double D : {30.0, 35.0, 40.0, 45.0}) {
        PotentialModel model(1.0, {{-D, 4.0}}, D, 4.0, 1.0);
        SeedBoundReport rep = verify_seed_energy_bound(g, p, 1.0, 1.0, 1, model);
        CHECK(rep.margin > last);
        last = rep.margin;
    }
    CHECK(last > 0.0);
}

TEST_CASE("N == 0 never beats the rest-mass line") {
    Grid2D g = build_grid(96, 96, 4.0, 2.0);
    PotentialModel model(1.0, {}, 0.0, 3.0, 1.0);
    for (double lambda : {1.0, 1.2}) {
        SeedParams p = recipe_seed(1.0, 1.0, lambda);
        SeedBoundReport rep = verify_seed_energy_bound(g, p, 1.0, 0.5, 1, model);
        CHECK_FALSE(rep.ok);
        CHECK(rep.E_value >= rep.bound); // AM-GM floor
    }
}
