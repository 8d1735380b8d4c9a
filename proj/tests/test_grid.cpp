#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace qvortex;
using namespace testsupport;

TEST_CASE("build_grid basics") {
    Grid2D g = build_grid(8, 8, 1.0, 1.0);
    CHECK(g.r(0) == Catch::Approx(1.0 / 16.0).epsilon(1e-15));
    ScalarField one(g, FieldKind::matter, 1.0);
    CHECK(integrate(one) == Catch::Approx(2.0 * pi).epsilon(1e-13)); // cylinder r=1, h=2

    Grid2D g2 = build_grid(256, 256, 8.0, 8.0);
    CHECK(g2.dr == Catch::Approx(1.0 / 32.0).epsilon(1e-15));
    CHECK(g2.dz == Catch::Approx(1.0 / 16.0).epsilon(1e-15));

    CHECK_THROWS_AS(build_grid(0, 8, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_grid(16, 16, -1.0, 1.0), ConfigError);
}

TEST_CASE("quadrature is exact for constants on every grid") {
    for (auto [nr, nz, rm, zh] : {std::tuple{8, 8, 1.0, 1.0},
                                  std::tuple{17, 23, 2.5, 0.75},
                                  std::tuple{64, 32, 10.0, 3.0}}) {
        Grid2D g = build_grid(nr, nz, rm, zh);
        ScalarField c(g, FieldKind::matter, 3.7);
        const double exact = 3.7 * pi * rm * rm * 2.0 * zh;
        CHECK(rel_diff(integrate(c), exact) < 1e-13);
    }
}

TEST_CASE("torus-bump integrals against closed forms and the Beta-integral oracle") {
    Grid2D g = build_grid(512, 512, 4.0, 2.0);
    ScalarField v = torus_bump(g, 1.0);

    ScalarField v2 = v, v3 = v;
    for (double& x : v2.values()) x = x * x;
    for (double& x : v3.values()) x = x * x * x;

    CHECK(rel_diff(integrate(v), 4.0 * pi * pi / 3.0) < 5e-3);
    CHECK(rel_diff(integrate(v2), 2.0 * pi * pi / 3.0) < 5e-3);

    // independent oracle for tau = 3: int_0^1 (1-s)^tau s ds by Simpson's rule,
    // validated against the tau = 1, 2 closed forms before freezing tau = 3
    auto beta_1d = [](double tau) {
        const int n = 20000; // even
        const double h = 1.0 / n;
        double s = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double x = k * h;
            const double f = std::pow(1.0 - x, tau) * x;
            s += f * ((k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0));
        }
        return s * h / 3.0;
    };
    CHECK(rel_diff(8.0 * pi * pi * beta_1d(1.0), 4.0 * pi * pi / 3.0) < 1e-10);
    CHECK(rel_diff(8.0 * pi * pi * beta_1d(2.0), 2.0 * pi * pi / 3.0) < 1e-10);
    const double expect_v3 = 8.0 * pi * pi * beta_1d(3.0); // = 2 pi^2 / 5
    CHECK(rel_diff(expect_v3, 2.0 * pi * pi / 5.0) < 1e-10);
    CHECK(rel_diff(integrate(v3), expect_v3) < 5e-3);
    CHECK(rel_diff(torus_moment(3.0), 2.0 * pi * pi / 5.0) < 1e-15);
}

TEST_CASE("matter laplacian on manufactured fields") {
    Grid2D g = build_grid(32, 32, 2.0, 2.0);
    ScalarField lin(g, FieldKind::matter), quad(g, FieldKind::matter);
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) {
            lin(i, j) = g.z(j);
            quad(i, j) = g.r(i) * g.r(i) + g.z(j) * g.z(j);
        }
    ScalarField Llin = apply_matter_laplacian(lin);
    ScalarField Lquad = apply_matter_laplacian(quad);
    for (int j = 2; j < g.n_z - 2; ++j)
        for (int i = 0; i < g.n_r - 2; ++i) {
            CHECK(std::abs(Llin(i, j)) < 1e-11);
            CHECK(std::abs(Lquad(i, j) - 6.0) < 1e-10); // Lap(r^2) = 4, Lap(z^2) = 2
        }
}

TEST_CASE("gauge operator annihilates r^2 away from the outer boundary") {
    Grid2D g = build_grid(32, 32, 2.0, 2.0);
    ScalarField a(g, FieldKind::gauge);
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) a(i, j) = g.r(i) * g.r(i);
    ScalarField Ga = apply_gauge_operator(a);
    for (int j = 2; j < g.n_z - 2; ++j)
        for (int i = 0; i < g.n_r - 2; ++i) CHECK(std::abs(Ga(i, j)) < 1e-10);

    ScalarField zero(g, FieldKind::gauge);
    CHECK(apply_gauge_operator(zero).max_abs() == 0.0);
}

TEST_CASE("operators are symmetric, negative semidefinite, and match the energies") {
    Grid2D g = build_grid(16, 12, 1.5, 1.0);
    for (unsigned seed : {1u, 2u, 3u}) {
        ScalarField f = random_field(g, FieldKind::matter, seed);
        ScalarField h = random_field(g, FieldKind::matter, seed + 100);
        ScalarField Lf = apply_matter_laplacian(f);
        ScalarField Lh = apply_matter_laplacian(h);
        CHECK(rel_diff(dot_w(Lf, h), dot_w(f, Lh)) < 1e-11);
        CHECK(dot_w(Lf, f) <= 0.0);
        CHECK(rel_diff(dot_w(Lf, f), -2.0 * dirichlet_energy(f)) < 1e-11);

        ScalarField af = random_field(g, FieldKind::gauge, seed + 7);
        ScalarField ah = random_field(g, FieldKind::gauge, seed + 107);
        ScalarField Gf = apply_gauge_operator(af);
        ScalarField Gh = apply_gauge_operator(ah);
        CHECK(rel_diff(dot_w(Gf, ah), dot_w(af, Gh)) < 1e-11);
        CHECK(dot_w(Gf, af) <= 0.0);
        CHECK(rel_diff(dot_w(Gf, af), -2.0 * gauge_energy(af)) < 1e-11);
    }
}

TEST_CASE("operators match the independent dense assembly") {
    Grid2D g = build_grid(8, 8, 1.0, 1.0);
    DenseMatrix Am = dense_operator(g, OpKind::matter);
    DenseMatrix Ag = dense_operator(g, OpKind::gauge);
    for (unsigned seed : {11u, 12u}) {
        ScalarField u = random_field(g, FieldKind::matter, seed);
        CHECK(field_rel_diff(apply_matter_laplacian(u), dense_apply(Am, u.values())) < 1e-12);
        ScalarField a = random_field(g, FieldKind::gauge, seed + 5);
        CHECK(field_rel_diff(apply_gauge_operator(a), dense_apply(Ag, a.values())) < 1e-12);
    }
}

TEST_CASE("operators are the exact gradients of the discrete energies") {
    Grid2D g = build_grid(10, 10, 1.0, 1.0);
    ScalarField u = random_field(g, FieldKind::matter, 21);
    ScalarField a = random_field(g, FieldKind::gauge, 22);
    ScalarField Lu = apply_matter_laplacian(u);
    ScalarField Ga = apply_gauge_operator(a);
    const double h = 1e-6;
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pick_i(0, g.n_r - 1), pick_j(0, g.n_z - 1);
    for (int probe = 0; probe < 20; ++probe) {
        const int i = pick_i(rng), j = pick_j(rng);
        { // d/du_ij dirichlet_energy = -w_ij (Lap u)_ij
            ScalarField up = u, um = u;
            up(i, j) += h;
            um(i, j) -= h;
            const double fd = (dirichlet_energy(up) - dirichlet_energy(um)) / (2.0 * h);
            CHECK(std::abs(fd - (-g.weight(i) * Lu(i, j))) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
        {
            ScalarField ap = a, am = a;
            ap(i, j) += h;
            am(i, j) -= h;
            const double fd = (gauge_energy(ap) - gauge_energy(am)) / (2.0 * h);
            CHECK(std::abs(fd - (-g.weight(i) * Ga(i, j))) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("z-shift restores interior fields and preserves integrals") {
    Grid2D g = build_grid(16, 24, 2.0, 3.0);
    ScalarField f = random_interior_field(g, FieldKind::matter, 31, 1.0, 6);
    ScalarField back = shift_z(shift_z(f, 5), -5);
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i) CHECK(back(i, j) == f(i, j));
    CHECK(rel_diff(integrate(shift_z(f, 3)), integrate(f)) < 1e-13);
}

TEST_CASE("torus-bump integrals converge at second order") {
    const double exact1 = 4.0 * pi * pi / 3.0;
    const double exact2 = 2.0 * pi * pi / 3.0;
    for (int n : {64, 128, 256}) {
        Grid2D g = build_grid(n, n, 4.0, 2.0);
        const double h = g.dr; // = dz
        ScalarField v = torus_bump(g, 1.0);
        ScalarField v2 = v;
        for (double& x : v2.values()) x = x * x;
        CHECK(std::abs(integrate(v) - exact1) / exact1 < 15.0 * h * h);
        CHECK(std::abs(integrate(v2) - exact2) / exact2 < 15.0 * h * h);
    }
}
