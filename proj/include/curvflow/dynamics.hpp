#pragma once

#include <array>
#include <cstddef>

#include "curvflow/continuum.hpp"
#include "curvflow/fields.hpp"
#include "curvflow/geometry.hpp"

namespace curvflow {

// ---------------------------------------------------------------------------
// Momentum right-hand sides from connection-curvature contractions.
//
// The three rates (A1, A2, A3) are sums of Gamma * R contractions over a
// repeated index lambda. The terms are kept in one data table and executed by
// a generic engine; 0 in an index quadruple marks the lambda slot.
// ---------------------------------------------------------------------------

struct ContractionTerm {
    int row;                    // which of A1..A3
    int gi, gj;                 // lower pair of Gamma^lambda_{gi gj}
    std::array<int, 4> r_index; // R index quadruple, 0 = lambda
    int sign;
};

inline constexpr std::array<ContractionTerm, 18> momentum_contraction_table = {{
    // row 1
    {1, 1, 2, {0, 3, 2, 3}, -1},
    {1, 2, 3, {1, 2, 0, 3}, -1},
    {1, 2, 3, {3, 1, 2, 0}, -1},
    {1, 1, 3, {2, 0, 2, 3}, -1},
    {1, 2, 2, {3, 1, 0, 3}, -1},
    {1, 3, 3, {1, 2, 2, 0}, -1},
    // row 2
    {2, 1, 3, {0, 1, 2, 3}, -1},
    {2, 1, 3, {3, 0, 1, 2}, -1},
    {2, 1, 1, {3, 0, 2, 3}, -1},
    {2, 2, 1, {0, 3, 1, 3}, -1},
    {2, 2, 3, {1, 0, 1, 3}, -1},
    {2, 3, 3, {0, 1, 1, 2}, -1},
    // row 3
    {3, 1, 2, {1, 0, 2, 3}, -1},
    {3, 1, 2, {3, 1, 0, 2}, -1},
    {3, 1, 1, {0, 2, 2, 3}, -1},
    {3, 2, 2, {3, 1, 1, 0}, -1},
    {3, 3, 1, {0, 2, 1, 2}, -1},
    {3, 3, 2, {1, 2, 1, 0}, -1},
}};

/// Momentum rates (A1, A2, A3) from the contraction table, summing the lambda
/// slot over 1..3 with curvature access through the symmetry-resolving
/// accessor.
inline VectorField momentum_rhs(const Christoffel3& gamma, const Curvature3& rhat) {
    require_same_grid(gamma.grid, rhat.grid, "momentum_rhs");
    VectorField A(gamma.grid);
    const std::size_t N = gamma.grid.node_count();
    for (const auto& term : momentum_contraction_table) {
        ScalarField& out = A[term.row];
        for (int lam = 1; lam <= 3; ++lam) {
            std::array<int, 4> q = term.r_index;
            for (int& idx : q)
                if (idx == 0) idx = lam;
            const CanonicalIndex ci = canonical_component(q[0], q[1], q[2], q[3]);
            if (ci.zero()) continue;
            const double coeff = term.sign * ci.sign;
            const ScalarField& gfield = gamma.gamma(lam, term.gi, term.gj);
            const ScalarField& rfield = rhat.comp[static_cast<std::size_t>(ci.slot)];
            for (std::size_t n = 0; n < N; ++n)
                out.values[n] += coeff * gfield.values[n] * rfield.values[n];
        }
    }
    return A;
}

/// Spatial divergence of the momentum-flux rows  d_j (rho u_i u_j - T_ij).
/// Vanishes on steady solutions of the balance laws.
inline VectorField flux_divergence(const ContinuumState& state, int order = 2) {
    const Grid3& grid = state.rho.grid;
    VectorField out(grid);
    const std::size_t N = grid.node_count();
    for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 3; ++j) {
            ScalarField flux(grid);
            for (std::size_t n = 0; n < N; ++n)
                flux.values[n] = state.rho.values[n] * state.u[i].values[n] * state.u[j].values[n] -
                                 state.stress(i, j).values[n];
            const ScalarField d = partial_derivative(flux, j, order);
            for (std::size_t n = 0; n < N; ++n) out[i].values[n] += d.values[n];
        }
    }
    return out;
}

namespace detail {

struct CurvatureFluxTerm {
    int axis;
    std::array<int, 4> quad;
};

// Row i lists the prescribed components standing for rho u_i u_j - T_ij,
// j = 1..3, differentiated along j.
inline constexpr std::array<std::array<CurvatureFluxTerm, 3>, 3> curvature_flux_rows = {{
    {{{1, {2, 3, 2, 3}}, {2, {3, 1, 2, 3}}, {3, {1, 2, 2, 3}}}},
    {{{1, {3, 1, 2, 3}}, {2, {1, 3, 1, 3}}, {3, {3, 1, 1, 2}}}},
    {{{1, {1, 2, 2, 3}}, {2, {3, 1, 1, 2}}, {3, {1, 2, 1, 2}}}},
}};

} // namespace detail

/// The momentum-flux divergences written through the curvature entries and
/// differentiated directly from the curvature components. For curvature
/// fields of an actual metric, the cyclic derivative identity makes this the
/// negative of momentum_rhs; the consistency checks compare A + this.
inline VectorField flux_divergence_of_curvature(const Curvature3& rhat, int order = 2) {
    VectorField out(rhat.grid);
    const std::size_t N = rhat.grid.node_count();
    for (int i = 1; i <= 3; ++i) {
        for (const auto& term : detail::curvature_flux_rows[static_cast<std::size_t>(i - 1)]) {
            const CanonicalIndex ci = canonical_component(term.quad[0], term.quad[1], term.quad[2], term.quad[3]);
            if (ci.zero()) continue;
            const ScalarField d = partial_derivative(rhat.comp[static_cast<std::size_t>(ci.slot)], term.axis, order);
            for (std::size_t n = 0; n < N; ++n)
                out[i].values[n] += ci.sign > 0 ? d.values[n] : -d.values[n];
        }
    }
    return out;
}

/// Residual of the mass consistency relation: returns  d_i A_i + rho_tt
/// pointwise; zero means the momentum rates are consistent with the second
/// time derivative of the density.
inline ScalarField mass_consistency_residual(const VectorField& A, const ScalarField& rho_tt, int order = 2) {
    require_same_grid(A.grid, rho_tt.grid, "mass_consistency_residual");
    ScalarField res = divergence(A, order);
    for (std::size_t n = 0; n < res.values.size(); ++n) res.values[n] += rho_tt.values[n];
    return res;
}

} // namespace curvflow
