#pragma once

// Axisymmetric (r, z) grids, grid functions, quadrature with the 3D volume
// weight dx = 2*pi*r dr dz, and the discrete differential operators.
//
// Discretization contract: every operator here is the exact gradient of a
// discrete quadratic energy built from face conductances (a weighted graph
// Laplacian).  That keeps the operators symmetric in the weighted inner
// product and negative semidefinite, and it is what makes monotone descent
// and symmetric linear solves possible downstream.
//
// Cylindrical reductions used throughout (for A = a * grad(theta)):
//   |grad(theta)| = 1/r,   |curl A|^2 = |grad a|^2 / r^2,
//   |l*grad(theta) - q*A|^2 = (l - q*a)^2 / r^2.
//
// Axis handling (cell-centered nodes, r_i = (i+1/2)*dr, never on the axis):
//   - matter/electrostatic fields: the axis face has zero area, so it carries
//     no flux term.  This is exact both for even fields (u_r(0) = 0) and for
//     fields vanishing on the axis (u ~ r^|l|), since the flux r*u_r -> 0.
//   - gauge amplitude a: finite magnetic energy forces a(0, z) = 0.  The axis
//     half-cell is a Dirichlet face whose conductance comes from the exact
//     segment integral of the 1/r coefficient, which also makes the operator
//     annihilate the regular profile a ~ r^2 at the axis cell exactly.
// Outer boundaries are homogeneous Dirichlet at r = r_max and |z| = z_half,
// with half-cell faces.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qvortex {

inline constexpr double pi = 3.14159265358979323846;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Grid2D {
    int n_r = 0;
    int n_z = 0;
    double r_max = 0.0;
    double z_half = 0.0;
    double dr = 0.0;
    double dz = 0.0;

    double r(int i) const { return (i + 0.5) * dr; }
    double z(int j) const { return -z_half + (j + 0.5) * dz; }

    /// Cell volume weight w_ij = 2*pi*r_i*dr*dz (independent of j).
    double weight(int i) const { return 2.0 * pi * r(i) * dr * dz; }

    int size() const { return n_r * n_z; }
    /// Row-major with z outer: index = j*n_r + i.
    int index(int i, int j) const { return j * n_r + i; }

    bool operator==(const Grid2D&) const = default;
};

inline Grid2D build_grid(int n_r, int n_z, double r_max, double z_half) {
    if (n_r < 8 || n_z < 8)
        throw ConfigError("build_grid: n_r and n_z must be at least 8 (got " +
                          std::to_string(n_r) + "x" + std::to_string(n_z) + ")");
    if (!(r_max > 0.0) || !(z_half > 0.0))
        throw ConfigError("build_grid: r_max and z_half must be positive");
    Grid2D g;
    g.n_r = n_r;
    g.n_z = n_z;
    g.r_max = r_max;
    g.z_half = z_half;
    g.dr = r_max / n_r;
    g.dz = 2.0 * z_half / n_z;
    return g;
}

enum class FieldKind { matter, gauge, electrostatic };

/// Real-valued grid function.  Value semantics: copies are independent.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(const Grid2D& grid, FieldKind kind, double fill = 0.0)
        : grid_(grid), kind_(kind), v_(static_cast<std::size_t>(grid.size()), fill) {}

    const Grid2D& grid() const { return grid_; }
    FieldKind kind() const { return kind_; }

    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(grid_.index(i, j))]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(grid_.index(i, j))]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    Grid2D grid_;
    FieldKind kind_ = FieldKind::matter;
    std::vector<double> v_;
};

namespace detail {

// Face conductances.  An energy 1/2 * sum_faces g * (difference)^2 has the
// weighted-gradient (divergence) form used by the apply_* operators below.

// matter / electrostatic: Dirichlet energy 1/2 int |grad u|^2 dx.
inline double matter_g_radial(const Grid2D& g, int face) {
    // face i sits between cells i-1 and i at radius i*dr; face 0 is the axis
    // (zero area), face n_r is the outer boundary half-face.
    if (face == 0) return 0.0;
    if (face == g.n_r) return 2.0 * pi * g.r_max * g.dz / (0.5 * g.dr);
    return 2.0 * pi * (face * g.dr) * g.dz / g.dr;
}
inline double matter_g_axial(const Grid2D& g, int i, int face) {
    // face j between cells j-1 and j; faces 0 and n_z are boundary half-faces.
    const double area = 2.0 * pi * g.r(i) * g.dr;
    if (face == 0 || face == g.n_z) return area / (0.5 * g.dz);
    return area / g.dz;
}

// gauge: energy 1/2 int |grad a|^2 / r^2 dx = pi int |grad a|^2 / r dr dz.
// Segment conductance = 2*pi*dz / int_segment r dr (exact for the 1/r
// coefficient under a constant-flux profile).
inline double gauge_g_radial(const Grid2D& g, int face) {
    if (face == 0) {
        // axis half segment [0, dr/2]: int r dr = dr^2/8; encodes a(0,z) = 0.
        return 2.0 * pi * g.dz / (g.dr * g.dr / 8.0);
    }
    if (face == g.n_r) {
        const double seg = 0.5 * g.dr * (g.r_max - 0.25 * g.dr);
        return 2.0 * pi * g.dz / seg;
    }
    return 2.0 * pi * g.dz / (g.dr * (face * g.dr));
}
inline double gauge_g_axial(const Grid2D& g, int i, int face) {
    const double c = 2.0 * pi * g.dr / g.r(i);
    if (face == 0 || face == g.n_z) return c / (0.5 * g.dz);
    return c / g.dz;
}

using RadialG = double (*)(const Grid2D&, int);
using AxialG = double (*)(const Grid2D&, int, int);

inline void laplacian_into(const Grid2D& g, const std::vector<double>& in,
                           std::vector<double>& out, RadialG gr, AxialG gz) {
    out.assign(in.size(), 0.0);
    for (int j = 0; j < g.n_z; ++j) {
        for (int i = 0; i < g.n_r; ++i) {
            const int k = g.index(i, j);
            const double x = in[static_cast<std::size_t>(k)];
            double acc = 0.0;
            // radial neighbours (Dirichlet 0 outside; axis handled by g)
            const double gl = gr(g, i);
            const double grr = gr(g, i + 1);
            acc += gl * (x - (i > 0 ? in[static_cast<std::size_t>(k - 1)] : 0.0));
            acc += grr * (x - (i + 1 < g.n_r ? in[static_cast<std::size_t>(k + 1)] : 0.0));
            // axial neighbours
            const double gd = gz(g, i, j);
            const double gu = gz(g, i, j + 1);
            acc += gd * (x - (j > 0 ? in[static_cast<std::size_t>(k - g.n_r)] : 0.0));
            acc += gu * (x - (j + 1 < g.n_z ? in[static_cast<std::size_t>(k + g.n_r)] : 0.0));
            out[static_cast<std::size_t>(k)] = -acc / g.weight(i);
        }
    }
}

inline double face_energy(const Grid2D& g, const std::vector<double>& v, RadialG gr, AxialG gz) {
    double e = 0.0;
    for (int j = 0; j < g.n_z; ++j) {
        for (int i = 0; i <= g.n_r; ++i) {
            const double gc = gr(g, i);
            if (gc == 0.0) continue;
            const double left = i > 0 ? v[static_cast<std::size_t>(g.index(i - 1, j))] : 0.0;
            const double right = i < g.n_r ? v[static_cast<std::size_t>(g.index(i, j))] : 0.0;
            const double d = right - left;
            e += 0.5 * gc * d * d;
        }
    }
    for (int i = 0; i < g.n_r; ++i) {
        for (int j = 0; j <= g.n_z; ++j) {
            const double gc = gz(g, i, j);
            const double lo = j > 0 ? v[static_cast<std::size_t>(g.index(i, j - 1))] : 0.0;
            const double hi = j < g.n_z ? v[static_cast<std::size_t>(g.index(i, j))] : 0.0;
            const double d = hi - lo;
            e += 0.5 * gc * d * d;
        }
    }
    return e;
}

} // namespace detail

/// Quadrature: sum_ij f_ij * w_ij.  Exact for constants (midpoint rule is
/// exact for the linear weight 2*pi*r).
inline double integrate(const ScalarField& f) {
    const Grid2D& g = f.grid();
    double s = 0.0;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i)
            s += f(i, j) * g.weight(i);
    return s;
}

/// Weighted inner product <f, g>_w = sum f g w.
inline double dot_w(const ScalarField& f, const ScalarField& h) {
    const Grid2D& g = f.grid();
    if (!(h.grid() == g)) throw ConfigError("dot_w: fields live on different grids");
    double s = 0.0;
    for (int j = 0; j < g.n_z; ++j)
        for (int i = 0; i < g.n_r; ++i)
            s += f(i, j) * h(i, j) * g.weight(i);
    return s;
}

inline double norm_w(const ScalarField& f) { return std::sqrt(dot_w(f, f)); }

/// Discrete Dirichlet energy 1/2 int |grad f|^2 dx (matter conductances).
inline double dirichlet_energy(const ScalarField& f) {
    return detail::face_energy(f.grid(), f.values(), detail::matter_g_radial, detail::matter_g_axial);
}

/// Discrete gauge energy 1/2 int |grad a|^2 / r^2 dx.
inline double gauge_energy(const ScalarField& a) {
    return detail::face_energy(a.grid(), a.values(), detail::gauge_g_radial, detail::gauge_g_axial);
}

/// Discrete Laplacian u_rr + u_r/r + u_zz in the weighted sense:
/// <apply_matter_laplacian(f), g>_w = -(first variation of dirichlet_energy).
/// Negative semidefinite and symmetric under <.,.>_w.
inline ScalarField apply_matter_laplacian(const ScalarField& u) {
    ScalarField out(u.grid(), u.kind());
    detail::laplacian_into(u.grid(), u.values(), out.values(),
                           detail::matter_g_radial, detail::matter_g_axial);
    return out;
}

/// Discrete (a_rr - a_r/r + a_zz)/r^2 in the weighted sense: the exact
/// (negated) gradient of gauge_energy under <.,.>_w.  Annihilates a = r^2.
inline ScalarField apply_gauge_operator(const ScalarField& a) {
    ScalarField out(a.grid(), a.kind());
    detail::laplacian_into(a.grid(), a.values(), out.values(),
                           detail::gauge_g_radial, detail::gauge_g_axial);
    return out;
}

/// Shift a field by an integer number of cells along z (positive = toward
/// +z), filling with zeros at the boundary.
inline ScalarField shift_z(const ScalarField& f, int cells) {
    const Grid2D& g = f.grid();
    ScalarField out(g, f.kind());
    for (int j = 0; j < g.n_z; ++j) {
        const int src = j - cells;
        if (src < 0 || src >= g.n_z) continue;
        for (int i = 0; i < g.n_r; ++i) out(i, j) = f(i, src);
    }
    return out;
}

} // namespace qvortex
