#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "curvflow/fields.hpp"
#include "curvflow/geometry.hpp"
#include "curvflow/linalg.hpp"

namespace curvflow {

// ---------------------------------------------------------------------------
// Constitutive models.
// ---------------------------------------------------------------------------

/// Tabulated barotropic pressure law p(rho); strictly positive and monotone
/// increasing in rho. Evaluation is linear interpolation, clamped at the ends.
struct PressureLaw {
    std::vector<double> rho;
    std::vector<double> p;

    PressureLaw(std::vector<double> r, std::vector<double> pr) : rho(std::move(r)), p(std::move(pr)) {
        if (rho.size() != p.size() || rho.size() < 2)
            throw validation_error("PressureLaw: need matching rho/p tables with >= 2 rows");
        for (std::size_t k = 0; k < rho.size(); ++k) {
            if (!(p[k] > 0.0)) throw validation_error("PressureLaw: pressures must be strictly positive");
            if (k > 0 && !(rho[k] > rho[k - 1] && p[k] > p[k - 1]))
                throw validation_error("PressureLaw: table must be strictly monotone in rho and p");
        }
    }

    double operator()(double r) const {
        if (r <= rho.front()) return p.front();
        if (r >= rho.back()) return p.back();
        std::size_t k = 1;
        while (rho[k] < r) ++k;
        const double t = (r - rho[k - 1]) / (rho[k] - rho[k - 1]);
        return p[k - 1] + t * (p[k] - p[k - 1]);
    }
};

struct StressModel {
    enum class Kind { euler_compressible, euler_incompressible, navier_stokes, neo_hookean };

    Kind kind = Kind::euler_incompressible;
    std::optional<PressureLaw> pressure_law; // euler_compressible
    std::optional<ScalarField> pressure;     // euler_incompressible, navier_stokes
    double gamma = 0.0;                      // navier_stokes viscosity
    std::optional<Matrix3Field> deformation; // neo_hookean

    static StressModel euler_compressible(PressureLaw law) {
        StressModel m;
        m.kind = Kind::euler_compressible;
        m.pressure_law = std::move(law);
        return m;
    }
    static StressModel euler_incompressible(ScalarField p) {
        StressModel m;
        m.kind = Kind::euler_incompressible;
        m.pressure = std::move(p);
        return m;
    }
    static StressModel navier_stokes(ScalarField p, double gamma) {
        if (!(gamma > 0.0)) throw validation_error("StressModel: Navier-Stokes viscosity gamma must be > 0");
        StressModel m;
        m.kind = Kind::navier_stokes;
        m.pressure = std::move(p);
        m.gamma = gamma;
        return m;
    }
    static StressModel neo_hookean(Matrix3Field f) {
        StressModel m;
        m.kind = Kind::neo_hookean;
        m.deformation = std::move(f);
        return m;
    }

    bool incompressible() const {
        return kind == Kind::euler_incompressible || kind == Kind::navier_stokes;
    }
};

/// rho = rho0 / det F. Rejects deformation gradients with |det F| <= 1e-12.
inline ScalarField density_from_deformation(const ScalarField& rho0, const Matrix3Field& F) {
    require_same_grid(rho0.grid, F.grid, "density_from_deformation");
    ScalarField rho(rho0.grid);
    for (std::size_t n = 0; n < rho.values.size(); ++n) {
        const double d = F.at_node(n).det();
        if (!(std::abs(d) > 1e-12))
            throw numeric_error("density_from_deformation: det F near zero at grid index " +
                                index_string(rho0.grid.unravel(n)));
        rho.values[n] = rho0.values[n] / d;
    }
    return rho;
}

/// Cauchy stress under the selected constitutive law. The rate of strain for
/// the viscous model is D_ij = (d_i u_j + d_j u_i)/2 by finite differences.
inline SymTensor2Field cauchy_stress(const StressModel& model, const ScalarField& rho, const VectorField& u) {
    const Grid3& grid = rho.grid;
    require_same_grid(grid, u.grid, "cauchy_stress");
    SymTensor2Field T(grid);
    const std::size_t N = grid.node_count();

    switch (model.kind) {
    case StressModel::Kind::euler_compressible: {
        if (!model.pressure_law) throw validation_error("cauchy_stress: euler_compressible needs a pressure law");
        for (std::size_t n = 0; n < N; ++n) {
            const double p = (*model.pressure_law)(rho.values[n]);
            for (int i = 1; i <= 3; ++i) T(i, i).values[n] = -p;
        }
        break;
    }
    case StressModel::Kind::euler_incompressible: {
        if (!model.pressure) throw validation_error("cauchy_stress: euler_incompressible needs a pressure field");
        require_same_grid(grid, model.pressure->grid, "cauchy_stress pressure");
        for (std::size_t n = 0; n < N; ++n)
            for (int i = 1; i <= 3; ++i) T(i, i).values[n] = -model.pressure->values[n];
        break;
    }
    case StressModel::Kind::navier_stokes: {
        if (!model.pressure) throw validation_error("cauchy_stress: navier_stokes needs a pressure field");
        require_same_grid(grid, model.pressure->grid, "cauchy_stress pressure");
        std::array<std::array<ScalarField, 3>, 3> du; // du[j-1][a-1] = d_a u_j
        for (int j = 1; j <= 3; ++j)
            for (int a = 1; a <= 3; ++a) du[j - 1][a - 1] = partial_derivative(u[j], a);
        for (int i = 1; i <= 3; ++i) {
            for (int j = i; j <= 3; ++j) {
                ScalarField& t = T(i, j);
                for (std::size_t n = 0; n < N; ++n) {
                    const double d = 0.5 * (du[j - 1][i - 1].values[n] + du[i - 1][j - 1].values[n]);
                    t.values[n] = 2.0 * model.gamma * d - (i == j ? model.pressure->values[n] : 0.0);
                }
            }
        }
        break;
    }
    case StressModel::Kind::neo_hookean: {
        if (!model.deformation) throw validation_error("cauchy_stress: neo_hookean needs a deformation gradient field");
        require_same_grid(grid, model.deformation->grid, "cauchy_stress deformation");
        for (std::size_t n = 0; n < N; ++n) {
            const Sym3 ff = model.deformation->at_node(n).right_gram();
            for (std::size_t c = 0; c < 6; ++c) T.comp[c].values[n] = rho.values[n] * ff.a[c];
        }
        break;
    }
    }
    return T;
}

/// Density, velocity and Cauchy stress on a common grid. The divergence of u
/// is reported, not enforced; callers inspect `max_divergence`.
struct ContinuumState {
    ScalarField rho;
    VectorField u;
    SymTensor2Field stress;
    std::optional<ScalarField> rho0;
    double max_divergence = 0.0;
    bool divergence_flagged = false;

    static ContinuumState make(ScalarField rho, VectorField u, SymTensor2Field stress,
                               std::optional<ScalarField> rho0 = std::nullopt,
                               double div_tolerance = 1e-8) {
        require_same_grid(rho.grid, u.grid, "ContinuumState");
        require_same_grid(rho.grid, stress.grid, "ContinuumState");
        require_finite(rho, "ContinuumState rho");
        ContinuumState s;
        s.max_divergence = divergence(u).max_abs();
        s.divergence_flagged = s.max_divergence > div_tolerance;
        s.rho = std::move(rho);
        s.u = std::move(u);
        s.stress = std::move(stress);
        s.rho0 = std::move(rho0);
        return s;
    }
};

/// Builds the state for a model, enforcing the model's own invariants
/// (unit density for the incompressible laws).
inline ContinuumState continuum_state(const StressModel& model, ScalarField rho, VectorField u,
                                      std::optional<ScalarField> rho0 = std::nullopt) {
    if (model.incompressible()) {
        for (std::size_t n = 0; n < rho.values.size(); ++n)
            if (std::abs(rho.values[n] - 1.0) > 1e-12)
                throw validation_error("continuum_state: incompressible model requires rho = 1, got " +
                                       std::to_string(rho.values[n]) + " at grid index " +
                                       index_string(rho.grid.unravel(n)));
    }
    SymTensor2Field T = cauchy_stress(model, rho, u);
    return ContinuumState::make(std::move(rho), std::move(u), std::move(T), std::move(rho0));
}

// ---------------------------------------------------------------------------
// The fluid-to-curvature map.
//
// Six relations prescribe the curvature from (rho, u, T):
//   R2323 = rho u1^2 - T11     R1313 = rho u2^2 - T22    R1212 = rho u3^2 - T33
//   R3123 = rho u1 u2 - T12    R1223 = rho u1 u3 - T13   R3112 = rho u2 u3 - T23
// and the symmetric matrix view places them as
//   [ R1212   R1223  -R3112 ]
//   [ R1223   R2323  -R3123 ]
//   [-R3112  -R3123   R1313 ]
// All index resolution goes through canonical_component so no sign is ever
// hand-coded.
// ---------------------------------------------------------------------------

namespace detail {

struct RhatRelation {
    std::array<int, 4> quad; // prescribed component R_quad
    int ui, uj;              // rho u_i u_j term
    int ti, tj;              // minus T_ij term
};

inline constexpr std::array<RhatRelation, 6> rhat_relations = {{
    {{2, 3, 2, 3}, 1, 1, 1, 1},
    {{1, 3, 1, 3}, 2, 2, 2, 2},
    {{1, 2, 1, 2}, 3, 3, 3, 3},
    {{3, 1, 2, 3}, 1, 2, 1, 2},
    {{1, 2, 2, 3}, 1, 3, 1, 3},
    {{3, 1, 1, 2}, 2, 3, 2, 3},
}};

struct MatrixEntry {
    std::array<int, 4> quad;
    int coeff; // +1 or -1 in front of R_quad in the matrix display
};

inline constexpr std::array<std::array<MatrixEntry, 3>, 3> rhat_matrix_entries = {{
    {{{{1, 2, 1, 2}, +1}, {{1, 2, 2, 3}, +1}, {{3, 1, 1, 2}, -1}}},
    {{{{1, 2, 2, 3}, +1}, {{2, 3, 2, 3}, +1}, {{3, 1, 2, 3}, -1}}},
    {{{{3, 1, 1, 2}, -1}, {{3, 1, 2, 3}, -1}, {{1, 3, 1, 3}, +1}}},
}};

} // namespace detail

/// Matrix view of the prescribed curvature: one symmetric 3x3 per node.
struct RhatField {
    Grid3 grid;
    std::array<ScalarField, 6> m; // 11,22,33,12,13,23

    RhatField() = default;
    explicit RhatField(const Grid3& g) : grid(g) {
        for (auto& c : m) c = ScalarField(g);
    }

    Sym3 at_node(std::size_t n) const {
        Sym3 s;
        for (std::size_t c = 0; c < 6; ++c) s.a[c] = m[c].values[n];
        return s;
    }
};

/// Matrix entry (r,c) of the curvature values, resolved through the canonical
/// accessor.
inline double rhat_matrix_entry(const CurvatureValues& cv, int r, int c) {
    const auto& e = detail::rhat_matrix_entries[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(c - 1)];
    return e.coeff * cv.component(e.quad[0], e.quad[1], e.quad[2], e.quad[3]);
}

inline RhatField rhat_matrix_from_curvature(const Curvature3& R) {
    RhatField out(R.grid);
    const std::size_t N = R.grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        const CurvatureValues cv = R.at_node(n);
        for (int r = 1; r <= 3; ++r)
            for (int c = r; c <= 3; ++c)
                out.m[static_cast<std::size_t>(sym_index(r, c))].values[n] = rhat_matrix_entry(cv, r, c);
    }
    return out;
}

inline Curvature3 rhat_curvature_from_matrix(const RhatField& M) {
    Curvature3 out(M.grid);
    const std::size_t N = M.grid.node_count();
    // Invert the (r,c) -> quad placement; each canonical slot appears exactly once.
    for (int r = 1; r <= 3; ++r) {
        for (int c = r; c <= 3; ++c) {
            const auto& e = detail::rhat_matrix_entries[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(c - 1)];
            const CanonicalIndex ci = canonical_component(e.quad[0], e.quad[1], e.quad[2], e.quad[3]);
            const double factor = e.coeff * ci.sign; // matrix entry = factor * canonical slot
            ScalarField& slot = out.comp[static_cast<std::size_t>(ci.slot)];
            const ScalarField& entry = M.m[static_cast<std::size_t>(sym_index(r, c))];
            for (std::size_t n = 0; n < N; ++n) slot.values[n] = factor > 0 ? entry.values[n] : -entry.values[n];
        }
    }
    return out;
}

struct RhatBuild {
    RhatField matrix;
    Curvature3 tensor;
};

/// Fills all six curvature slots from the continuum state and returns both
/// the tensor view and the matrix view.
inline RhatBuild build_rhat(const ContinuumState& state) {
    const Grid3& grid = state.rho.grid;
    require_same_grid(grid, state.u.grid, "build_rhat");
    require_same_grid(grid, state.stress.grid, "build_rhat");

    Curvature3 tensor(grid);
    const std::size_t N = grid.node_count();
    for (const auto& rel : detail::rhat_relations) {
        const CanonicalIndex ci = canonical_component(rel.quad[0], rel.quad[1], rel.quad[2], rel.quad[3]);
        ScalarField& slot = tensor.comp[static_cast<std::size_t>(ci.slot)];
        const ScalarField& ua = state.u[rel.ui];
        const ScalarField& ub = state.u[rel.uj];
        const ScalarField& t = state.stress(rel.ti, rel.tj);
        for (std::size_t n = 0; n < N; ++n) {
            const double prescribed = state.rho.values[n] * ua.values[n] * ub.values[n] - t.values[n];
            slot.values[n] = ci.sign > 0 ? prescribed : -prescribed; // slot = sign * R_quad
        }
    }
    return RhatBuild{rhat_matrix_from_curvature(tensor), std::move(tensor)};
}

// ---------------------------------------------------------------------------
// Definiteness and eigenvalue diagnostics.
// ---------------------------------------------------------------------------

struct NodeDefiniteness {
    double det = 0.0;
    double minor1 = 0.0;
    double minor2 = 0.0;
    bool nondegenerate = false;
    bool positive_definite = false;
    std::array<double, 3> eigenvalues{};
};

struct DefinitenessReport {
    std::vector<NodeDefiniteness> nodes;
    bool all_nondegenerate = true;
    bool all_positive_definite = true;
    double min_scaled_det = std::numeric_limits<double>::infinity();
    double tau = 0.0;
};

/// Leading minors, determinant and eigenvalues per node. The degeneracy and
/// definiteness calls use the scale-aware tolerance tau: det is compared
/// against tau * (max |entry|)^3 and each minor against the matching power.
inline NodeDefiniteness node_definiteness(const Sym3& s, double tau = 1e-10) {
    NodeDefiniteness r;
    r.det = s.det();
    r.minor1 = s.minor1();
    r.minor2 = s.minor2();
    const double scale = std::max(s.max_abs(), 1e-300);
    r.nondegenerate = std::abs(r.det) > tau * scale * scale * scale;
    r.positive_definite = r.minor1 > tau * scale && r.minor2 > tau * scale * scale &&
                          r.det > tau * scale * scale * scale;
    r.eigenvalues = sym3_eigenvalues(s);
    return r;
}

inline DefinitenessReport definiteness_report(const RhatField& M, double tau = 1e-10) {
    DefinitenessReport rep;
    rep.tau = tau;
    const std::size_t N = M.grid.node_count();
    rep.nodes.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
        const Sym3 s = M.at_node(n);
        NodeDefiniteness nd = node_definiteness(s, tau);
        rep.all_nondegenerate = rep.all_nondegenerate && nd.nondegenerate;
        rep.all_positive_definite = rep.all_positive_definite && nd.positive_definite;
        const double scale = std::max(s.max_abs(), 1e-300);
        rep.min_scaled_det = std::min(rep.min_scaled_det, nd.det / (scale * scale * scale));
        rep.nodes.push_back(nd);
    }
    return rep;
}

struct ShearEigenvalues {
    double lambda1 = 0.0; // >= lambda2
    double lambda2 = 0.0;
    double lambda3 = 0.0; // the decoupled p0 eigenvalue
};

/// Closed-form spectrum of the shear-flow curvature matrix
///   [[p0, -gamma u1', 0], [-gamma u1', u1^2 + p0, 0], [0, 0, p0]]:
/// lambda_{1,2} = (u1^2 + 2 p0 +- sqrt(u1^4 + 4 gamma^2 u1'^2)) / 2, lambda_3 = p0.
inline ShearEigenvalues shear_eigenvalues(double u1, double u1p, double p0, double gamma) {
    if (!(p0 >= 0.0) || !(gamma >= 0.0))
        throw validation_error("shear_eigenvalues: requires p0 >= 0 and gamma >= 0");
    const double u2 = u1 * u1;
    const double root = std::sqrt(u2 * u2 + 4.0 * gamma * gamma * u1p * u1p);
    ShearEigenvalues ev;
    ev.lambda1 = 0.5 * (u2 + 2.0 * p0 + root);
    ev.lambda2 = 0.5 * (u2 + 2.0 * p0 - root);
    ev.lambda3 = p0;
    return ev;
}

/// The shear-flow curvature matrix itself (for cross-checks against the
/// generic eigensolvers).
inline Sym3 shear_rhat_matrix(double u1, double u1p, double p0, double gamma) {
    Sym3 s = Sym3::diagonal(p0, u1 * u1 + p0, p0);
    s(1, 2) = -gamma * u1p;
    return s;
}

} // namespace curvflow
