#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "curvflow/fields.hpp"

namespace curvflow {

struct PoissonResult {
    ScalarField pressure;
    double relative_residual = 0.0;
    double max_norm_residual = 0.0;
    int iterations = 0;
};

namespace detail {

/// 7-point periodic Laplacian.
inline void apply_laplacian(const Grid3& g, const std::vector<double>& x, std::vector<double>& y) {
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const double cx = 1.0 / (g.spacing[0] * g.spacing[0]);
    const double cy = 1.0 / (g.spacing[1] * g.spacing[1]);
    const double cz = 1.0 / (g.spacing[2] * g.spacing[2]);
    for (int k = 0; k < nz; ++k) {
        const int km = (k + nz - 1) % nz, kp = (k + 1) % nz;
        for (int j = 0; j < ny; ++j) {
            const int jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
            for (int i = 0; i < nx; ++i) {
                const int im = (i + nx - 1) % nx, ip = (i + 1) % nx;
                const double c = x[g.index(i, j, k)];
                y[g.index(i, j, k)] = cx * (x[g.index(im, j, k)] - 2.0 * c + x[g.index(ip, j, k)]) +
                                      cy * (x[g.index(i, jm, k)] - 2.0 * c + x[g.index(i, jp, k)]) +
                                      cz * (x[g.index(i, j, km)] - 2.0 * c + x[g.index(i, j, kp)]);
            }
        }
    }
}

inline void project_zero_mean(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    const double m = s / static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

} // namespace detail

/// Solves the periodic Poisson problem  Lap p = rhs  with the zero-mean gauge,
/// by matrix-free conjugate gradients with a zero-mean projection each
/// iteration. The rhs must be mean-free (compatibility on a periodic box).
inline PoissonResult solve_periodic_poisson(const ScalarField& rhs, double tol = 1e-10,
                                            std::size_t max_iterations = 0) {
    const Grid3& g = rhs.grid;
    for (int a = 0; a < 3; ++a)
        if (g.boundary[a] != Boundary::periodic)
            throw validation_error("solve_periodic_poisson: all axes must be periodic");
    require_finite(rhs, "solve_periodic_poisson rhs");

    const std::size_t N = g.node_count();
    if (max_iterations == 0) max_iterations = 10 * N;
    const double rhs_scale = rhs.max_abs();

    double mean = rhs.mean();
    if (std::abs(mean) > tol * std::max(1.0, rhs_scale))
        throw validation_error("solve_periodic_poisson: rhs mean " + std::to_string(mean) +
                               " incompatible with a periodic domain");

    PoissonResult result;
    result.pressure = ScalarField(g);
    if (rhs_scale == 0.0) return result;

    // CG on -Lap (positive semidefinite on the zero-mean subspace).
    std::vector<double> b = rhs.values;
    for (double& v : b) v = -v;
    detail::project_zero_mean(b);

    std::vector<double>& x = result.pressure.values;
    std::vector<double> r = b, p = b, ap(N);
    auto dotv = [](const std::vector<double>& u, const std::vector<double>& w) {
        double s = 0.0;
        for (std::size_t n = 0; n < u.size(); ++n) s += u[n] * w[n];
        return s;
    };
    const double bnorm = std::sqrt(dotv(b, b));
    double rr = dotv(r, r);
    std::size_t it = 0;
    for (; it < max_iterations; ++it) {
        if (std::sqrt(rr) <= tol * bnorm) break;
        detail::apply_laplacian(g, p, ap);
        for (double& v : ap) v = -v;
        detail::project_zero_mean(ap);
        const double alpha = rr / dotv(p, ap);
        for (std::size_t n = 0; n < N; ++n) x[n] += alpha * p[n];
        for (std::size_t n = 0; n < N; ++n) r[n] -= alpha * ap[n];
        const double rr_next = dotv(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t n = 0; n < N; ++n) p[n] = r[n] + beta * p[n];
    }
    detail::project_zero_mean(x);

    // Verify in the max norm against the unprojected operator.
    std::vector<double> lx(N);
    detail::apply_laplacian(g, x, lx);
    double max_res = 0.0;
    for (std::size_t n = 0; n < N; ++n) max_res = std::max(max_res, std::abs(lx[n] - rhs.values[n]));
    result.relative_residual = std::sqrt(rr) / (bnorm > 0.0 ? bnorm : 1.0);
    result.max_norm_residual = max_res;
    result.iterations = static_cast<int>(it);
    if (result.relative_residual > tol || max_res > tol * std::max(1.0, rhs_scale))
        throw numeric_error("solve_periodic_poisson: no convergence after " + std::to_string(it) +
                            " iterations, relative residual " + std::to_string(result.relative_residual) +
                            ", max-norm residual " + std::to_string(max_res));
    return result;
}

/// Assembles  -d_i d_j (u_i u_j)  with the same discrete operators the
/// Laplacian uses: 3-point second differences on the diagonal, nested central
/// first differences on the cross terms.
inline ScalarField momentum_flux_rhs(const VectorField& u) {
    const Grid3& g = u.grid;
    ScalarField rhs(g);
    for (int i = 1; i <= 3; ++i) {
        for (int j = i; j <= 3; ++j) {
            ScalarField s(g);
            for (std::size_t n = 0; n < s.values.size(); ++n)
                s.values[n] = u[i].values[n] * u[j].values[n];
            ScalarField dd = (i == j) ? second_derivative_periodic(s, i)
                                      : partial_derivative(partial_derivative(s, i), j);
            const double w = (i == j) ? 1.0 : 2.0;
            for (std::size_t n = 0; n < rhs.values.size(); ++n) rhs.values[n] -= w * dd.values[n];
        }
    }
    return rhs;
}

/// Pressure from the incompressible momentum balance:  Lap p = -div div (u (x) u),
/// zero-mean gauge. Supported on fully periodic grids.
inline PoissonResult solve_pressure_poisson(const VectorField& u, double tol = 1e-10) {
    for (int a = 0; a < 3; ++a)
        if (u.grid.boundary[a] != Boundary::periodic)
            throw validation_error("solve_pressure_poisson: all axes must be periodic");
    for (int i = 1; i <= 3; ++i) require_finite(u[i], "solve_pressure_poisson u" + std::to_string(i));
    return solve_periodic_poisson(momentum_flux_rhs(u), tol);
}

} // namespace curvflow
