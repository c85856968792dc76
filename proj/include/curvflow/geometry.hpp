#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "curvflow/fields.hpp"
#include "curvflow/linalg.hpp"

namespace curvflow {

// ---------------------------------------------------------------------------
// Curvature index algebra.
//
// A rank-4 curvature tensor in dimension 3 has six independent components.
// Canonical storage order: R1212, R1313, R2323, R1213, R1223, R1323.
// Every component R_ijkl resolves to one of these slots and a sign through
// the skew symmetries R_ijkl = -R_jikl = -R_ijlk and the pair-interchange
// symmetry R_ijkl = R_klij. The first Bianchi identity is then automatic.
// ---------------------------------------------------------------------------

struct CanonicalIndex {
    int slot; // 0..5, or -1 when the component vanishes identically (i==j or k==l)
    int sign; // +1 or -1, meaningless when slot == -1

    bool zero() const { return slot < 0; }
};

inline constexpr std::array<std::array<int, 4>, 6> canonical_quadruples = {{
    {1, 2, 1, 2}, {1, 3, 1, 3}, {2, 3, 2, 3}, {1, 2, 1, 3}, {1, 2, 2, 3}, {1, 3, 2, 3},
}};

constexpr CanonicalIndex canonical_component(int i, int j, int k, int l) {
    if (i == j || k == l) return {-1, 1};
    int sign = 1;
    if (i > j) {
        const int t = i;
        i = j;
        j = t;
        sign = -sign;
    }
    if (k > l) {
        const int t = k;
        k = l;
        l = t;
        sign = -sign;
    }
    // pair slots: (1,2)->0, (1,3)->1, (2,3)->2
    int pa = (i == 1) ? (j == 2 ? 0 : 1) : 2;
    int pb = (k == 1) ? (l == 2 ? 0 : 1) : 2;
    if (pa > pb) {
        const int t = pa;
        pa = pb;
        pb = t;
    }
    constexpr int slot_of[3][3] = {{0, 3, 4}, {-1, 1, 5}, {-1, -1, 2}};
    return {slot_of[pa][pb], sign};
}

/// Point values of the six canonical curvature components.
struct CurvatureValues {
    std::array<double, 6> c{};

    double component(int i, int j, int k, int l) const {
        const CanonicalIndex ci = canonical_component(i, j, k, l);
        if (ci.zero()) return 0.0;
        return ci.sign > 0 ? c[static_cast<std::size_t>(ci.slot)] : -c[static_cast<std::size_t>(ci.slot)];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : c) m = std::max(m, std::abs(v));
        return m;
    }
};

// ---------------------------------------------------------------------------
// Metric, connection, curvature fields.
// ---------------------------------------------------------------------------

/// Pointwise symmetric positive definite metric sampled on a grid.
/// Positivity of the three leading minors is validated at construction.
struct Metric3 {
    Grid3 grid;
    std::array<ScalarField, 6> g; // 11,22,33,12,13,23

    Metric3() = default;
    Metric3(const Grid3& gr, std::array<ScalarField, 6> comp) : grid(gr), g(std::move(comp)) {
        for (const auto& c : g) require_same_grid(c.grid, grid, "Metric3");
        validate_spd();
    }

    static Metric3 sample(const Grid3& gr, const std::function<Sym3(double, double, double)>& fn) {
        std::array<ScalarField, 6> comp;
        for (auto& c : comp) c = ScalarField(gr);
        std::size_t n = 0;
        for (int k = 0; k < gr.dims[2]; ++k)
            for (int j = 0; j < gr.dims[1]; ++j)
                for (int i = 0; i < gr.dims[0]; ++i, ++n) {
                    const Vec3 x = gr.coord(i, j, k);
                    const Sym3 s = fn(x[0], x[1], x[2]);
                    for (std::size_t c = 0; c < 6; ++c) comp[c].values[n] = s.a[c];
                }
        return Metric3(gr, std::move(comp));
    }

    const ScalarField& operator()(int i, int j) const { return g[static_cast<std::size_t>(sym_index(i, j))]; }

    Sym3 at_node(std::size_t n) const {
        Sym3 s;
        for (std::size_t c = 0; c < 6; ++c) s.a[c] = g[c].values[n];
        return s;
    }

  private:
    void validate_spd() const {
        const std::size_t N = grid.node_count();
        for (std::size_t n = 0; n < N; ++n) {
            const Sym3 s = at_node(n);
            if (!(s.minor1() > 0.0) || !(s.minor2() > 0.0) || !(s.det() > 0.0))
                throw numeric_error("Metric3: not positive definite at grid index " +
                                    index_string(grid.unravel(n)));
        }
    }
};

/// Connection coefficients Gamma^k_ij, symmetric in the lower pair.
struct Christoffel3 {
    Grid3 grid;
    std::array<ScalarField, 18> comp; // k-major, lower pair in sym_index order

    Christoffel3() = default;
    explicit Christoffel3(const Grid3& g) : grid(g) {
        for (auto& c : comp) c = ScalarField(g);
    }

    static std::size_t slot(int k, int i, int j) {
        return static_cast<std::size_t>(6 * (k - 1) + sym_index(i, j));
    }
    const ScalarField& gamma(int k, int i, int j) const { return comp[slot(k, i, j)]; }
    ScalarField& gamma(int k, int i, int j) { return comp[slot(k, i, j)]; }
    double gamma_at(std::size_t n, int k, int i, int j) const { return comp[slot(k, i, j)].values[n]; }
};

/// Covariant curvature field over the six canonical slots, with full
/// symmetry-resolving access for arbitrary index quadruples.
struct Curvature3 {
    Grid3 grid;
    std::array<ScalarField, 6> comp;

    Curvature3() = default;
    explicit Curvature3(const Grid3& g) : grid(g) {
        for (auto& c : comp) c = ScalarField(g);
    }

    double component(std::size_t n, int i, int j, int k, int l) const {
        const CanonicalIndex ci = canonical_component(i, j, k, l);
        if (ci.zero()) return 0.0;
        const double v = comp[static_cast<std::size_t>(ci.slot)].values[n];
        return ci.sign > 0 ? v : -v;
    }

    CurvatureValues at_node(std::size_t n) const {
        CurvatureValues cv;
        for (std::size_t c = 0; c < 6; ++c) cv.c[c] = comp[c].values[n];
        return cv;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : comp) m = std::max(m, c.max_abs());
        return m;
    }
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

/// Pointwise inverse metric g^{kl}; adjugate over determinant.
inline SymTensor2Field inverse_metric(const Metric3& g) {
    SymTensor2Field inv(g.grid);
    const std::size_t N = g.grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        Sym3 s = g.at_node(n);
        const double d = s.det();
        if (!(std::abs(d) > 1e-14))
            throw numeric_error("inverse_metric: determinant below 1e-14 at grid index " +
                                index_string(g.grid.unravel(n)));
        const Sym3 si = s.inverse();
        for (std::size_t c = 0; c < 6; ++c) inv.comp[c].values[n] = si.a[c];
    }
    return inv;
}

/// Gamma^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
inline Christoffel3 christoffel(const Metric3& g, int order = 2) {
    const Grid3& grid = g.grid;
    const SymTensor2Field ginv = inverse_metric(g);

    // dg[c][a-1] = d_a of metric component c
    std::array<std::array<ScalarField, 3>, 6> dg;
    for (std::size_t c = 0; c < 6; ++c)
        for (int a = 1; a <= 3; ++a) dg[c][static_cast<std::size_t>(a - 1)] = partial_derivative(g.g[c], a, order);

    auto dmetric = [&](std::size_t n, int a, int i, int j) {
        return dg[static_cast<std::size_t>(sym_index(i, j))][static_cast<std::size_t>(a - 1)].values[n];
    };

    Christoffel3 gamma(grid);
    const std::size_t N = grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        const Sym3 gi = ginv.at_node(n);
        for (int k = 1; k <= 3; ++k) {
            for (int i = 1; i <= 3; ++i) {
                for (int j = i; j <= 3; ++j) {
                    double v = 0.0;
                    for (int l = 1; l <= 3; ++l)
                        v += gi(k, l) * (dmetric(n, i, j, l) + dmetric(n, j, i, l) - dmetric(n, l, i, j));
                    gamma.gamma(k, i, j).values[n] = 0.5 * v;
                }
            }
        }
    }
    return gamma;
}

/// Covariant curvature R_ijkl = g_iq (d_k Gamma^q_lj - d_l Gamma^q_kj
///                                + Gamma^q_kp Gamma^p_lj - Gamma^q_lp Gamma^p_kj),
/// evaluated for the six canonical slots by differentiating the connection.
inline Curvature3 riemann_curvature(const Metric3& g, int order = 2) {
    const Grid3& grid = g.grid;
    const Christoffel3 gm = christoffel(g, order);
    Curvature3 R(grid);
    const std::size_t N = grid.node_count();

    for (std::size_t s = 0; s < 6; ++s) {
        const auto [i, j, k, l] = canonical_quadruples[s];
        std::array<ScalarField, 3> dk_gamma, dl_gamma; // indexed by q-1
        for (int q = 1; q <= 3; ++q) {
            dk_gamma[static_cast<std::size_t>(q - 1)] = partial_derivative(gm.gamma(q, l, j), k, order);
            dl_gamma[static_cast<std::size_t>(q - 1)] = partial_derivative(gm.gamma(q, k, j), l, order);
        }
        ScalarField& out = R.comp[s];
        for (std::size_t n = 0; n < N; ++n) {
            const Sym3 gn = g.at_node(n);
            double v = 0.0;
            for (int q = 1; q <= 3; ++q) {
                double mixed = dk_gamma[static_cast<std::size_t>(q - 1)].values[n] -
                               dl_gamma[static_cast<std::size_t>(q - 1)].values[n];
                for (int p = 1; p <= 3; ++p)
                    mixed += gm.gamma_at(n, q, k, p) * gm.gamma_at(n, p, l, j) -
                             gm.gamma_at(n, q, l, p) * gm.gamma_at(n, p, k, j);
                v += gn(i, q) * mixed;
            }
            out.values[n] = v;
        }
    }
    return R;
}

/// Ricci tensor by the direct connection formula
/// R_ij = d_p Gamma^p_ij - d_j Gamma^p_ip + Gamma^q_ij Gamma^p_pq - Gamma^q_ip Gamma^p_jq.
inline SymTensor2Field ricci(const Metric3& g, int order = 2) {
    const Grid3& grid = g.grid;
    const Christoffel3 gm = christoffel(g, order);
    SymTensor2Field ric(grid);
    const std::size_t N = grid.node_count();

    for (int i = 1; i <= 3; ++i) {
        for (int j = i; j <= 3; ++j) {
            ScalarField acc(grid);
            for (int p = 1; p <= 3; ++p) {
                const ScalarField d1 = partial_derivative(gm.gamma(p, i, j), p, order);
                const ScalarField d2 = partial_derivative(gm.gamma(p, i, p), j, order);
                for (std::size_t n = 0; n < N; ++n) acc.values[n] += d1.values[n] - d2.values[n];
            }
            for (std::size_t n = 0; n < N; ++n) {
                double v = 0.0;
                for (int q = 1; q <= 3; ++q)
                    for (int p = 1; p <= 3; ++p)
                        v += gm.gamma_at(n, q, i, j) * gm.gamma_at(n, p, p, q) -
                             gm.gamma_at(n, q, i, p) * gm.gamma_at(n, p, j, q);
                acc.values[n] += v;
            }
            ric(i, j) = std::move(acc);
        }
    }
    return ric;
}

/// Ricci by contraction, R_ik = g^{jl} R_ijkl; the independent cross-check of
/// the direct formula.
inline SymTensor2Field ricci_from_curvature(const Metric3& g, const Curvature3& R) {
    require_same_grid(g.grid, R.grid, "ricci_from_curvature");
    const SymTensor2Field ginv = inverse_metric(g);
    SymTensor2Field ric(g.grid);
    const std::size_t N = g.grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        const Sym3 gi = ginv.at_node(n);
        for (int i = 1; i <= 3; ++i)
            for (int k = i; k <= 3; ++k) {
                double v = 0.0;
                for (int j = 1; j <= 3; ++j)
                    for (int l = 1; l <= 3; ++l) v += gi(j, l) * R.component(n, i, j, k, l);
                ric(i, k).values[n] = v;
            }
    }
    return ric;
}

/// Max-norm residual of the cyclic covariant-derivative identity
/// grad_s R_ijkl + grad_k R_ijls + grad_l R_ijsk = 0 over all independent
/// index choices. On clamped axes a boundary layer of width 2 is excluded
/// (nested one-sided stencils are too noisy for third derivatives there).
inline ScalarField second_bianchi_residual(const Metric3& g, int order = 2) {
    const Grid3& grid = g.grid;
    const Christoffel3 gm = christoffel(g, order);
    const Curvature3 R = riemann_curvature(g, order);

    std::array<std::array<ScalarField, 3>, 6> dR;
    for (std::size_t c = 0; c < 6; ++c)
        for (int a = 1; a <= 3; ++a) dR[c][static_cast<std::size_t>(a - 1)] = partial_derivative(R.comp[c], a, order);

    auto dcomp = [&](std::size_t n, int a, int i, int j, int k, int l) {
        const CanonicalIndex ci = canonical_component(i, j, k, l);
        if (ci.zero()) return 0.0;
        const double v = dR[static_cast<std::size_t>(ci.slot)][static_cast<std::size_t>(a - 1)].values[n];
        return ci.sign > 0 ? v : -v;
    };
    auto covariant = [&](std::size_t n, int m, int i, int j, int k, int l) {
        double v = dcomp(n, m, i, j, k, l);
        for (int p = 1; p <= 3; ++p) {
            v -= gm.gamma_at(n, p, i, m) * R.component(n, p, j, k, l);
            v -= gm.gamma_at(n, p, j, m) * R.component(n, i, p, k, l);
            v -= gm.gamma_at(n, p, k, m) * R.component(n, i, j, p, l);
            v -= gm.gamma_at(n, p, l, m) * R.component(n, i, j, k, p);
        }
        return v;
    };

    constexpr std::array<std::array<int, 2>, 3> pairs = {{{1, 2}, {1, 3}, {2, 3}}};
    ScalarField res(grid);
    const std::size_t N = grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        const auto ijk = grid.unravel(n);
        bool excluded = false;
        for (int a = 0; a < 3; ++a) {
            if (grid.boundary[a] == Boundary::clamped &&
                (ijk[a] < 2 || ijk[a] > grid.dims[a] - 3))
                excluded = true;
        }
        if (excluded) continue;
        double worst = 0.0;
        for (const auto& ij : pairs) {
            for (const auto& kl : pairs) {
                for (int s = 1; s <= 3; ++s) {
                    const double r = covariant(n, s, ij[0], ij[1], kl[0], kl[1]) +
                                     covariant(n, kl[0], ij[0], ij[1], kl[1], s) +
                                     covariant(n, kl[1], ij[0], ij[1], s, kl[0]);
                    worst = std::max(worst, std::abs(r));
                }
            }
        }
        res.values[n] = worst;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Normal-coordinate quadratic metric jet.
// ---------------------------------------------------------------------------

/// Quadratic metric g_ij(x) = delta_ij - (1/3) sum_{k,l} R0_ikjl x_k x_l.
/// Its curvature at the origin equals R0; spd_radius is a sufficient radius
/// within which the closure stays positive definite (infinite for R0 = 0).
struct JetMetric {
    CurvatureValues r0;
    double spd_radius = std::numeric_limits<double>::infinity();

    Sym3 evaluate(const Vec3& x) const {
        Sym3 g = Sym3::identity();
        for (int i = 1; i <= 3; ++i)
            for (int j = i; j <= 3; ++j) {
                double q = 0.0;
                for (int k = 1; k <= 3; ++k)
                    for (int l = 1; l <= 3; ++l)
                        q += r0.component(i, k, j, l) * x[static_cast<std::size_t>(k - 1)] * x[static_cast<std::size_t>(l - 1)];
                g(i, j) -= q / 3.0;
            }
        return g;
    }

    /// Samples onto a grid; every node must stay positive definite.
    Metric3 sample(const Grid3& grid) const {
        std::array<ScalarField, 6> comp;
        for (auto& c : comp) c = ScalarField(grid);
        std::size_t spd_nodes = 0;
        std::size_t n = 0;
        for (int k = 0; k < grid.dims[2]; ++k)
            for (int j = 0; j < grid.dims[1]; ++j)
                for (int i = 0; i < grid.dims[0]; ++i, ++n) {
                    const Sym3 s = evaluate(grid.coord(i, j, k));
                    if (s.positive_definite()) ++spd_nodes;
                    for (std::size_t c = 0; c < 6; ++c) comp[c].values[n] = s.a[c];
                }
        if (spd_nodes < grid.node_count())
            throw numeric_error("JetMetric::sample: metric loses positive definiteness on this grid (" +
                                std::to_string(spd_nodes) + "/" + std::to_string(grid.node_count()) +
                                " nodes SPD); guaranteed neighborhood radius r = " + std::to_string(spd_radius));
        return Metric3(grid, std::move(comp));
    }
};

inline JetMetric normal_jet_metric(const CurvatureValues& r0) {
    for (double v : r0.c)
        if (!std::isfinite(v)) throw validation_error("normal_jet_metric: curvature values must be finite");
    JetMetric jet;
    jet.r0 = r0;
    // lambda_min(g) >= 1 - |x|^2 K/3 with K the Frobenius norm of the row
    // sums of |R0|; positive definiteness is guaranteed for |x| < sqrt(3/K).
    double frob = 0.0;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            double row = 0.0;
            for (int k = 1; k <= 3; ++k)
                for (int l = 1; l <= 3; ++l) row += std::abs(r0.component(i, k, j, l));
            frob += row * row;
        }
    frob = std::sqrt(frob);
    if (frob > 0.0) jet.spd_radius = std::sqrt(3.0 / frob);
    return jet;
}

} // namespace curvflow
