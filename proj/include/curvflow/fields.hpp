#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "curvflow/errors.hpp"
#include "curvflow/linalg.hpp"

namespace curvflow {

enum class Boundary { periodic, clamped };

inline const char* boundary_name(Boundary b) { return b == Boundary::periodic ? "periodic" : "clamped"; }

/// Uniform structured 3D grid. Storage convention everywhere: linear index
/// i + nx*(j + ny*k), so x1 varies fastest. All dims must be >= 5 so that the
/// interior and one-sided stencils always have support.
struct Grid3 {
    std::array<int, 3> dims{};
    std::array<double, 3> spacing{};
    std::array<double, 3> origin{};
    std::array<Boundary, 3> boundary{Boundary::clamped, Boundary::clamped, Boundary::clamped};

    Grid3() = default;
    Grid3(std::array<int, 3> n, std::array<double, 3> h, std::array<double, 3> o,
          std::array<Boundary, 3> b)
        : dims(n), spacing(h), origin(o), boundary(b) {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 5)
                throw validation_error("Grid3: axis " + std::to_string(a + 1) + " has " +
                                       std::to_string(dims[a]) + " nodes, need >= 5");
            if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
                throw validation_error("Grid3: axis " + std::to_string(a + 1) + " spacing must be positive and finite");
            if (!std::isfinite(origin[a])) throw validation_error("Grid3: origin must be finite");
        }
    }

    /// Cube grid centered at the origin of coordinates: n nodes per axis, spacing h.
    static Grid3 centered_cube(int n, double h, std::array<Boundary, 3> b = {Boundary::clamped, Boundary::clamped, Boundary::clamped}) {
        const double half = 0.5 * h * (n - 1);
        return Grid3({n, n, n}, {h, h, h}, {-half, -half, -half}, b);
    }

    std::size_t node_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    }

    std::array<int, 3> unravel(std::size_t n) const {
        const int i = static_cast<int>(n % static_cast<std::size_t>(dims[0]));
        const int j = static_cast<int>((n / static_cast<std::size_t>(dims[0])) % static_cast<std::size_t>(dims[1]));
        const int k = static_cast<int>(n / (static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1])));
        return {i, j, k};
    }

    Vec3 coord(int i, int j, int k) const {
        return {origin[0] + spacing[0] * i, origin[1] + spacing[1] * j, origin[2] + spacing[2] * k};
    }
    Vec3 coord(std::size_t n) const {
        const auto ijk = unravel(n);
        return coord(ijk[0], ijk[1], ijk[2]);
    }

    bool operator==(const Grid3& o) const {
        return dims == o.dims && spacing == o.spacing && origin == o.origin && boundary == o.boundary;
    }
};

inline std::string index_string(const std::array<int, 3>& ijk) {
    return "(" + std::to_string(ijk[0]) + "," + std::to_string(ijk[1]) + "," + std::to_string(ijk[2]) + ")";
}

/// Scalar samples on a Grid3, one value per node.
struct ScalarField {
    Grid3 grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid3& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}
    ScalarField(const Grid3& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.node_count())
            throw validation_error("ScalarField: value count " + std::to_string(values.size()) +
                                   " does not match grid node count " + std::to_string(grid.node_count()));
    }

    static ScalarField sample(const Grid3& g, const std::function<double(double, double, double)>& f) {
        ScalarField out(g);
        std::size_t n = 0;
        for (int k = 0; k < g.dims[2]; ++k)
            for (int j = 0; j < g.dims[1]; ++j)
                for (int i = 0; i < g.dims[0]; ++i, ++n) {
                    const Vec3 x = g.coord(i, j, k);
                    out.values[n] = f(x[0], x[1], x[2]);
                }
        return out;
    }

    double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
    double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
};

inline void require_finite(const ScalarField& f, const std::string& name) {
    for (std::size_t n = 0; n < f.values.size(); ++n) {
        if (!std::isfinite(f.values[n]))
            throw validation_error(name + ": non-finite value at grid index " + index_string(f.grid.unravel(n)));
    }
}

inline void require_same_grid(const Grid3& a, const Grid3& b, const std::string& what) {
    if (!(a == b)) throw validation_error(what + ": fields are not on the same grid");
}

/// Three scalar components sharing one grid.
struct VectorField {
    Grid3 grid;
    std::array<ScalarField, 3> comp;

    VectorField() = default;
    explicit VectorField(const Grid3& g) : grid(g), comp{ScalarField(g), ScalarField(g), ScalarField(g)} {}
    VectorField(ScalarField c1, ScalarField c2, ScalarField c3) : grid(c1.grid), comp{std::move(c1), std::move(c2), std::move(c3)} {
        require_same_grid(comp[0].grid, comp[1].grid, "VectorField");
        require_same_grid(comp[0].grid, comp[2].grid, "VectorField");
    }

    const ScalarField& operator[](int i) const { return comp[static_cast<std::size_t>(i - 1)]; }
    ScalarField& operator[](int i) { return comp[static_cast<std::size_t>(i - 1)]; }
};

/// Symmetric rank-2 tensor field; component (i,j) and (j,i) share storage.
struct SymTensor2Field {
    Grid3 grid;
    std::array<ScalarField, 6> comp; // 11,22,33,12,13,23

    SymTensor2Field() = default;
    explicit SymTensor2Field(const Grid3& g)
        : grid(g), comp{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)} {}

    const ScalarField& operator()(int i, int j) const { return comp[static_cast<std::size_t>(sym_index(i, j))]; }
    ScalarField& operator()(int i, int j) { return comp[static_cast<std::size_t>(sym_index(i, j))]; }

    Sym3 at_node(std::size_t n) const {
        Sym3 s;
        for (std::size_t c = 0; c < 6; ++c) s.a[c] = comp[c].values[n];
        return s;
    }
};

/// General (non-symmetric) 3x3 tensor field; used for deformation gradients.
struct Matrix3Field {
    Grid3 grid;
    std::array<ScalarField, 9> comp; // row-major 11,12,13,21,...,33

    Matrix3Field() = default;
    explicit Matrix3Field(const Grid3& g) : grid(g) {
        for (auto& c : comp) c = ScalarField(g);
    }

    const ScalarField& operator()(int i, int j) const { return comp[static_cast<std::size_t>(3 * (i - 1) + (j - 1))]; }
    ScalarField& operator()(int i, int j) { return comp[static_cast<std::size_t>(3 * (i - 1) + (j - 1))]; }

    Mat3 at_node(std::size_t n) const {
        Mat3 m;
        for (std::size_t c = 0; c < 9; ++c) m.m[c] = comp[c].values[n];
        return m;
    }
};

namespace detail {

/// Applies a 1D first-derivative stencil along `axis` to every grid line.
/// order 2: central interior, 3-point one-sided at clamped ends.
/// order 4: 5-point central interior, 5-point biased at clamped ends.
template <typename LineOp>
void for_each_line(const Grid3& g, int axis, LineOp&& op) {
    const int a = axis - 1;
    const int n = g.dims[a];
    const std::size_t stride = (a == 0) ? 1
                             : (a == 1) ? static_cast<std::size_t>(g.dims[0])
                                        : static_cast<std::size_t>(g.dims[0]) * static_cast<std::size_t>(g.dims[1]);
    const int nb = g.dims[(a + 1) % 3];
    const int nc = g.dims[(a + 2) % 3];
    for (int c = 0; c < nc; ++c) {
        for (int b = 0; b < nb; ++b) {
            int ijk[3] = {0, 0, 0};
            ijk[(a + 1) % 3] = b;
            ijk[(a + 2) % 3] = c;
            const std::size_t base = g.index(ijk[0], ijk[1], ijk[2]);
            op(base, stride, n);
        }
    }
}

} // namespace detail

/// First partial derivative along axis (1..3). Second-order stencils by default;
/// order 4 is available for convergence studies. Clamped axes use one-sided
/// stencils of matching order at the ends, periodic axes wrap.
inline ScalarField partial_derivative(const ScalarField& f, int axis, int order = 2) {
    if (axis < 1 || axis > 3) throw validation_error("partial_derivative: axis must be 1..3");
    if (order != 2 && order != 4) throw validation_error("partial_derivative: order must be 2 or 4");
    require_finite(f, "partial_derivative");

    const Grid3& g = f.grid;
    const double h = g.spacing[axis - 1];
    const bool periodic = g.boundary[axis - 1] == Boundary::periodic;
    ScalarField out(g);
    const double* v = f.values.data();
    double* d = out.values.data();

    detail::for_each_line(g, axis, [&](std::size_t base, std::size_t stride, int n) {
        auto V = [&](int m) {
            if (periodic) m = ((m % n) + n) % n;
            return v[base + stride * static_cast<std::size_t>(m)];
        };
        if (order == 2) {
            const int lo = periodic ? 0 : 1;
            const int hi = periodic ? n - 1 : n - 2;
            for (int m = lo; m <= hi; ++m)
                d[base + stride * static_cast<std::size_t>(m)] = (V(m + 1) - V(m - 1)) / (2.0 * h);
            if (!periodic) {
                d[base] = (-3.0 * V(0) + 4.0 * V(1) - V(2)) / (2.0 * h);
                d[base + stride * static_cast<std::size_t>(n - 1)] =
                    (3.0 * V(n - 1) - 4.0 * V(n - 2) + V(n - 3)) / (2.0 * h);
            }
        } else {
            const int lo = periodic ? 0 : 2;
            const int hi = periodic ? n - 1 : n - 3;
            for (int m = lo; m <= hi; ++m)
                d[base + stride * static_cast<std::size_t>(m)] =
                    (V(m - 2) - 8.0 * V(m - 1) + 8.0 * V(m + 1) - V(m + 2)) / (12.0 * h);
            if (!periodic) {
                d[base] = (-25.0 * V(0) + 48.0 * V(1) - 36.0 * V(2) + 16.0 * V(3) - 3.0 * V(4)) / (12.0 * h);
                d[base + stride] = (-3.0 * V(0) - 10.0 * V(1) + 18.0 * V(2) - 6.0 * V(3) + V(4)) / (12.0 * h);
                d[base + stride * static_cast<std::size_t>(n - 2)] =
                    (3.0 * V(n - 1) + 10.0 * V(n - 2) - 18.0 * V(n - 3) + 6.0 * V(n - 4) - V(n - 5)) / (12.0 * h);
                d[base + stride * static_cast<std::size_t>(n - 1)] =
                    (25.0 * V(n - 1) - 48.0 * V(n - 2) + 36.0 * V(n - 3) - 16.0 * V(n - 4) + 3.0 * V(n - 5)) / (12.0 * h);
            }
        }
    });
    return out;
}

/// Second derivative along one axis by the 3-point stencil. Periodic axes only;
/// this is the building block of the pressure Poisson operator.
inline ScalarField second_derivative_periodic(const ScalarField& f, int axis) {
    if (axis < 1 || axis > 3) throw validation_error("second_derivative_periodic: axis must be 1..3");
    const Grid3& g = f.grid;
    if (g.boundary[axis - 1] != Boundary::periodic)
        throw validation_error("second_derivative_periodic: axis " + std::to_string(axis) + " is not periodic");
    const double h2 = g.spacing[axis - 1] * g.spacing[axis - 1];
    ScalarField out(g);
    const double* v = f.values.data();
    double* d = out.values.data();
    detail::for_each_line(g, axis, [&](std::size_t base, std::size_t stride, int n) {
        auto V = [&](int m) { return v[base + stride * static_cast<std::size_t>(((m % n) + n) % n)]; };
        for (int m = 0; m < n; ++m)
            d[base + stride * static_cast<std::size_t>(m)] = (V(m - 1) - 2.0 * V(m) + V(m + 1)) / h2;
    });
    return out;
}

/// Discrete divergence of a vector field.
inline ScalarField divergence(const VectorField& u, int order = 2) {
    ScalarField out = partial_derivative(u[1], 1, order);
    const ScalarField d2 = partial_derivative(u[2], 2, order);
    const ScalarField d3 = partial_derivative(u[3], 3, order);
    for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] += d2.values[n] + d3.values[n];
    return out;
}

/// Cumulative integral of a uniformly sampled profile by the composite
/// trapezoid rule; I[0] = 0, I[k] = integral from the first sample to sample k.
inline std::vector<double> cumulative_integral(std::span<const double> samples, double spacing) {
    if (samples.size() < 2) throw validation_error("cumulative_integral: need at least 2 samples");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw validation_error("cumulative_integral: spacing must be positive and finite");
    std::vector<double> out(samples.size(), 0.0);
    for (std::size_t k = 1; k < samples.size(); ++k)
        out[k] = out[k - 1] + 0.5 * spacing * (samples[k - 1] + samples[k]);
    return out;
}

} // namespace curvflow
