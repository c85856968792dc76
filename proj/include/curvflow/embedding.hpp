#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "curvflow/fields.hpp"
#include "curvflow/geometry.hpp"
#include "curvflow/linalg.hpp"

namespace curvflow {

enum class ShearAxis { x2, x3 };

inline const char* shear_axis_name(ShearAxis a) { return a == ShearAxis::x2 ? "x2" : "x3"; }

using Vec6 = std::array<double, 6>;

inline double dot6(const Vec6& a, const Vec6& b) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += a[i] * b[i];
    return s;
}

// ---------------------------------------------------------------------------
// Shear-flow embeddings into R^6.
//
// The map for a shear profile u1 depending on one coordinate s:
//   axis x2:  y = (B x2, B x1, f(x2), B x3, 0, 0)
//   axis x3:  y = (B x3, f(x3), B x2, B x1, 0, 0)
// where f solves  f'' = -u1(s)^2 sqrt(B^2 + f'^2),  f(0) = f'(0) = 0.
// Consequence (used as the analytic oracle): f'(s) = -B sinh(int_0^s u1^2).
// ---------------------------------------------------------------------------

/// Embedding data: the profile f sampled on a uniform 1D grid together with
/// its first derivative carried by the integrator.
struct ShearEmbedding {
    double B = 1.0;
    ShearAxis axis = ShearAxis::x2;
    double s0 = 0.0;      // first profile coordinate
    double hs = 0.0;      // profile spacing
    std::vector<double> f;
    std::vector<double> fp;
    std::vector<double> u1sq; // squared input profile at the samples

    int count() const { return static_cast<int>(f.size()); }
    double s_at(int m) const { return s0 + hs * m; }
    double s_end() const { return s_at(count() - 1); }

    int aligned_index(double s) const {
        const double t = (s - s0) / hs;
        const int m = static_cast<int>(std::lround(t));
        if (m < 0 || m >= count()) return -1;
        return std::abs(t - m) <= 1e-9 ? m : -1;
    }

    void require_covered(double s) const {
        if (s < s0 - 1e-9 * hs || s > s_end() + 1e-9 * hs)
            throw validation_error("ShearEmbedding: coordinate " + std::to_string(s) +
                                   " outside the integrated profile range [" + std::to_string(s0) + ", " +
                                   std::to_string(s_end()) + "]");
    }

    double f_at(double s) const { return interpolate(f, fp, s); }
    double fp_at(double s) const {
        const int m = aligned_index(s);
        if (m >= 0) return fp[static_cast<std::size_t>(m)];
        require_covered(s);
        // derivative of the cubic Hermite interpolant of f
        const int lo = std::clamp(static_cast<int>(std::floor((s - s0) / hs)), 0, count() - 2);
        const double t = (s - s_at(lo)) / hs;
        const double fa = f[static_cast<std::size_t>(lo)], fb = f[static_cast<std::size_t>(lo + 1)];
        const double da = fp[static_cast<std::size_t>(lo)], db = fp[static_cast<std::size_t>(lo + 1)];
        const double dt = (6.0 * t * t - 6.0 * t) * fa + (3.0 * t * t - 4.0 * t + 1.0) * hs * da +
                          (-6.0 * t * t + 6.0 * t) * fb + (3.0 * t * t - 2.0 * t) * hs * db;
        return dt / hs;
    }

    /// The six embedding components at a point.
    Vec6 y(double x1, double x2, double x3) const {
        if (axis == ShearAxis::x2) return {B * x2, B * x1, f_at(x2), B * x3, 0.0, 0.0};
        return {B * x3, f_at(x3), B * x2, B * x1, 0.0, 0.0};
    }

    /// Analytic tangent vectors (exact, for frame checks).
    std::array<Vec6, 3> tangents(double s) const {
        const double d = fp_at(s);
        if (axis == ShearAxis::x2)
            return {Vec6{0, B, 0, 0, 0, 0}, Vec6{B, 0, d, 0, 0, 0}, Vec6{0, 0, 0, B, 0, 0}};
        return {Vec6{0, 0, 0, B, 0, 0}, Vec6{0, 0, B, 0, 0, 0}, Vec6{B, d, 0, 0, 0, 0}};
    }

    /// Unit normal completing the tangent frame in the f-plane.
    Vec6 normal4(double s) const {
        const double d = fp_at(s);
        const double r = std::sqrt(B * B + d * d);
        if (axis == ShearAxis::x2) return {d / r, 0, -B / r, 0, 0, 0};
        return {d / r, -B / r, 0, 0, 0, 0};
    }

    /// Second fundamental form component on the profile axis, reconstructed
    /// from the integrated data: f'' by finite differences of f', then
    /// H = -f'' / sqrt(B^2 + f'^2). Independent of the defining relation, so
    /// it can be checked against the input u1^2.
    std::vector<double> h4_profile() const {
        const int n = count();
        std::vector<double> h(static_cast<std::size_t>(n));
        auto fpp = [&](int m) {
            if (m == 0) return (-3.0 * fp[0] + 4.0 * fp[1] - fp[2]) / (2.0 * hs);
            if (m == n - 1)
                return (3.0 * fp[static_cast<std::size_t>(n - 1)] - 4.0 * fp[static_cast<std::size_t>(n - 2)] +
                        fp[static_cast<std::size_t>(n - 3)]) /
                       (2.0 * hs);
            return (fp[static_cast<std::size_t>(m + 1)] - fp[static_cast<std::size_t>(m - 1)]) / (2.0 * hs);
        };
        for (int m = 0; m < n; ++m) {
            const double d = fp[static_cast<std::size_t>(m)];
            h[static_cast<std::size_t>(m)] = -fpp(m) / std::sqrt(B * B + d * d);
        }
        return h;
    }

  private:
    double interpolate(const std::vector<double>& vals, const std::vector<double>& ders, double s) const {
        const int m = aligned_index(s);
        if (m >= 0) return vals[static_cast<std::size_t>(m)];
        require_covered(s);
        const int lo = std::clamp(static_cast<int>(std::floor((s - s0) / hs)), 0, count() - 2);
        const double t = (s - s_at(lo)) / hs;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * vals[static_cast<std::size_t>(lo)] + h10 * hs * ders[static_cast<std::size_t>(lo)] +
               h01 * vals[static_cast<std::size_t>(lo + 1)] + h11 * hs * ders[static_cast<std::size_t>(lo + 1)];
    }
};

/// Integrates the profile equation by RK4 outward from s = 0 with step equal
/// to the profile spacing. The domain [s_min, s_max] must contain 0 on a grid
/// point.
inline ShearEmbedding build_shear_embedding(const std::function<double(double)>& u1, double s_min,
                                            double s_max, double spacing, double B, ShearAxis axis) {
    if (!(B > 0.0)) throw validation_error("build_shear_embedding: B must be positive");
    if (!(spacing > 0.0) || !(s_max > s_min))
        throw validation_error("build_shear_embedding: need positive spacing and s_max > s_min");
    const int n = static_cast<int>(std::lround((s_max - s_min) / spacing)) + 1;
    if (n < 2) throw validation_error("build_shear_embedding: profile needs at least 2 samples");
    const int origin = static_cast<int>(std::lround(-s_min / spacing));
    if (origin < 0 || origin >= n || std::abs(s_min + origin * spacing) > 1e-9 * spacing)
        throw validation_error("build_shear_embedding: the profile grid must contain s = 0");

    ShearEmbedding e;
    e.B = B;
    e.axis = axis;
    e.s0 = s_min;
    e.hs = spacing;
    e.f.assign(static_cast<std::size_t>(n), 0.0);
    e.fp.assign(static_cast<std::size_t>(n), 0.0);
    e.u1sq.assign(static_cast<std::size_t>(n), 0.0);
    for (int m = 0; m < n; ++m) {
        const double v = u1(s_min + spacing * m);
        e.u1sq[static_cast<std::size_t>(m)] = v * v;
    }

    auto rhs = [&](double s, double w) {
        const double v = u1(s);
        return -v * v * std::sqrt(B * B + w * w);
    };
    auto step = [&](double s, double& fv, double& wv, double h) {
        const double k1f = wv, k1w = rhs(s, wv);
        const double k2f = wv + 0.5 * h * k1w, k2w = rhs(s + 0.5 * h, wv + 0.5 * h * k1w);
        const double k3f = wv + 0.5 * h * k2w, k3w = rhs(s + 0.5 * h, wv + 0.5 * h * k2w);
        const double k4f = wv + h * k3w, k4w = rhs(s + h, wv + h * k3w);
        fv += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        wv += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    };

    double fv = 0.0, wv = 0.0;
    for (int m = origin; m < n - 1; ++m) {
        step(s_min + spacing * m, fv, wv, spacing);
        e.f[static_cast<std::size_t>(m + 1)] = fv;
        e.fp[static_cast<std::size_t>(m + 1)] = wv;
    }
    fv = 0.0;
    wv = 0.0;
    for (int m = origin; m > 0; --m) {
        step(s_min + spacing * m, fv, wv, -spacing);
        e.f[static_cast<std::size_t>(m - 1)] = fv;
        e.fp[static_cast<std::size_t>(m - 1)] = wv;
    }
    return e;
}

/// Sample-based overload: the profile is linearly interpolated between
/// samples for the integrator's half steps.
inline ShearEmbedding build_shear_embedding(std::span<const double> u1_samples, double s_min, double spacing,
                                            double B, ShearAxis axis) {
    if (u1_samples.size() < 2) throw validation_error("build_shear_embedding: need at least 2 samples");
    const double s_max = s_min + spacing * static_cast<double>(u1_samples.size() - 1);
    auto interp = [u1_samples, s_min, spacing](double s) {
        const double t = (s - s_min) / spacing;
        const int lo = std::clamp(static_cast<int>(std::floor(t)), 0, static_cast<int>(u1_samples.size()) - 2);
        const double w = t - lo;
        return (1.0 - w) * u1_samples[static_cast<std::size_t>(lo)] + w * u1_samples[static_cast<std::size_t>(lo + 1)];
    };
    return build_shear_embedding(interp, s_min, s_max, spacing, B, axis);
}

// ---------------------------------------------------------------------------
// Target metric and verifications.
// ---------------------------------------------------------------------------

/// The closed-form induced metric of a shear embedding: diagonal with B^2 on
/// the two affine axes and B^2 + f'^2 on the profile axis.
struct TargetMetric {
    double B = 1.0;
    ShearAxis axis = ShearAxis::x2;
    ShearEmbedding profile; // carries f' lookups

    static TargetMetric of(const ShearEmbedding& e) { return TargetMetric{e.B, e.axis, e}; }

    int profile_dim() const { return axis == ShearAxis::x2 ? 2 : 3; }

    Sym3 at(double s) const {
        const double d = profile.fp_at(s);
        Sym3 g = Sym3::diagonal(B * B, B * B, B * B);
        g(profile_dim(), profile_dim()) = B * B + d * d;
        return g;
    }

    double trace_at(double s) const {
        const double d = profile.fp_at(s);
        return 3.0 * B * B + d * d;
    }

    Metric3 sample(const Grid3& grid) const {
        const int pd = profile_dim();
        return Metric3::sample(grid, [&](double x1, double x2, double x3) {
            const double s = pd == 2 ? x2 : x3;
            (void)x1;
            return at(s);
        });
    }
};

struct InducedMetricResult {
    Metric3 metric;
    double max_residual = 0.0; // max |dy.dy - g*| over nodes and components
};

/// Samples the six embedding components on the grid, differentiates them
/// numerically, forms the Gram matrix and compares it with the closed-form
/// target metric.
inline InducedMetricResult induced_metric(const ShearEmbedding& e, const Grid3& grid, int order = 2) {
    std::array<ScalarField, 6> y;
    for (int c = 0; c < 6; ++c) {
        y[static_cast<std::size_t>(c)] = ScalarField::sample(grid, [&](double x1, double x2, double x3) {
            return e.y(x1, x2, x3)[static_cast<std::size_t>(c)];
        });
    }
    std::array<std::array<ScalarField, 3>, 6> dy;
    for (std::size_t c = 0; c < 6; ++c)
        for (int a = 1; a <= 3; ++a)
            dy[c][static_cast<std::size_t>(a - 1)] = partial_derivative(y[c], a, order);

    const TargetMetric target = TargetMetric::of(e);
    std::array<ScalarField, 6> comp;
    for (auto& c : comp) c = ScalarField(grid);
    double residual = 0.0;
    const std::size_t N = grid.node_count();
    const int pd = target.profile_dim();
    for (std::size_t n = 0; n < N; ++n) {
        const Vec3 x = grid.coord(n);
        const Sym3 gstar = target.at(pd == 2 ? x[1] : x[2]);
        for (int i = 1; i <= 3; ++i) {
            for (int j = i; j <= 3; ++j) {
                double v = 0.0;
                for (std::size_t c = 0; c < 6; ++c)
                    v += dy[c][static_cast<std::size_t>(i - 1)].values[n] * dy[c][static_cast<std::size_t>(j - 1)].values[n];
                comp[static_cast<std::size_t>(sym_index(i, j))].values[n] = v;
                residual = std::max(residual, std::abs(v - gstar(i, j)));
            }
        }
    }
    return InducedMetricResult{Metric3(grid, std::move(comp)), residual};
}

/// Second fundamental forms and normal frame of a shear embedding, with the
/// identity residuals. Only the profile-axis component of H^4 is nonzero and
/// the normal connection vanishes identically.
struct FundamentalForms {
    std::vector<double> s;       // profile coordinates
    std::vector<double> h4;      // H^4 on the (profile, profile) slot
    std::vector<Vec6> normal4;   // N4 per profile point (N5, N6 are e5, e6)
    double orthonormality_residual = 0.0;
    double gauss_lhs_max = 0.0;   // max |sum_mu (H_ik H_jl - H_il H_jk)| over index quadruples
    double gauss_residual = 0.0;  // max |gauss LHS - Riem(g*)| = flatness defect of g*
    double codazzi_residual = 0.0; // max |d_1 H^4|
};

inline FundamentalForms fundamental_forms(const ShearEmbedding& e, int order = 2) {
    FundamentalForms out;
    const int n = e.count();
    out.s.resize(static_cast<std::size_t>(n));
    out.h4 = e.h4_profile();
    out.normal4.resize(static_cast<std::size_t>(n));

    const Vec6 n5{0, 0, 0, 0, 1, 0}, n6{0, 0, 0, 0, 0, 1};
    for (int m = 0; m < n; ++m) {
        const double s = e.s_at(m);
        out.s[static_cast<std::size_t>(m)] = s;
        const Vec6 n4 = e.normal4(s);
        out.normal4[static_cast<std::size_t>(m)] = n4;
        const auto tang = e.tangents(s);
        double worst = 0.0;
        const std::array<Vec6, 3> frame{n4, n5, n6};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b)
                worst = std::max(worst, std::abs(dot6(frame[static_cast<std::size_t>(a)], frame[static_cast<std::size_t>(b)]) - (a == b ? 1.0 : 0.0)));
            for (const auto& t : tang)
                worst = std::max(worst, std::abs(dot6(frame[static_cast<std::size_t>(a)], t)));
        }
        out.orthonormality_residual = std::max(out.orthonormality_residual, worst);
    }

    // Gauss left side with a single nonzero H component: evaluate literally.
    const TargetMetric target = TargetMetric::of(e);
    const int pd = target.profile_dim();
    for (int m = 0; m < n; ++m) {
        auto H = [&](int i, int j) {
            return (i == pd && j == pd) ? out.h4[static_cast<std::size_t>(m)] : 0.0;
        };
        for (int i = 1; i <= 3; ++i)
            for (int j = 1; j <= 3; ++j)
                for (int k = 1; k <= 3; ++k)
                    for (int l = 1; l <= 3; ++l)
                        out.gauss_lhs_max = std::max(out.gauss_lhs_max,
                                                     std::abs(H(i, k) * H(j, l) - H(i, l) * H(j, k)));
    }

    // Right side of the Gauss equation: the curvature of g*, which must vanish.
    // Evaluated on a slab grid, 5 nodes across the invariant axes.
    std::array<int, 3> dims{5, 5, 5};
    dims[static_cast<std::size_t>(pd - 1)] = std::max(n, 5);
    std::array<double, 3> spacing{e.hs, e.hs, e.hs};
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    origin[static_cast<std::size_t>(pd - 1)] = e.s0;
    const Grid3 slab(dims, spacing, origin,
                     {Boundary::clamped, Boundary::clamped, Boundary::clamped});
    const Curvature3 R = riemann_curvature(target.sample(slab), order);
    out.gauss_residual = std::max(out.gauss_lhs_max, R.max_abs());

    // Codazzi: H depends on the profile coordinate only, so its derivative
    // along x1 must vanish. Differentiate the sampled H field literally.
    ScalarField hfield = ScalarField::sample(slab, [&](double x1, double x2, double x3) {
        (void)x1;
        const double s = pd == 2 ? x2 : x3;
        const int m = e.aligned_index(s);
        return m >= 0 ? out.h4[static_cast<std::size_t>(m)] : 0.0;
    });
    out.codazzi_residual = partial_derivative(hfield, 1, order).max_abs();
    return out;
}

// ---------------------------------------------------------------------------
// Shortness test and energy functional.
// ---------------------------------------------------------------------------

struct ShortnessResult {
    ScalarField margin;  // smallest eigenvalue of g* - g per node
    bool all_short = true;
    double min_margin = std::numeric_limits<double>::infinity();
    double tau = 0.0;
};

/// Pointwise test  g <= g*  in the sense of quadratic forms: short at a node
/// when the smallest eigenvalue of g* - g is >= -tau.
inline ShortnessResult is_short(const Metric3& g, const TargetMetric& gstar, double tau = 1e-10) {
    ShortnessResult out;
    out.tau = tau;
    out.margin = ScalarField(g.grid);
    const int pd = gstar.profile_dim();
    const std::size_t N = g.grid.node_count();
    for (std::size_t n = 0; n < N; ++n) {
        const Vec3 x = g.grid.coord(n);
        const Sym3 diff = gstar.at(pd == 2 ? x[1] : x[2]) - g.at_node(n);
        const double lmin = sym3_eigenvalues(diff)[2];
        out.margin.values[n] = lmin;
        out.min_margin = std::min(out.min_margin, lmin);
        out.all_short = out.all_short && lmin >= -tau;
    }
    return out;
}

/// Trapezoid-rule integral of tr(g*) over the grid box. The target metric
/// carries no time dependence, so the value is the same for every time tag;
/// the tag exists so callers can record that check.
inline double energy(const TargetMetric& gstar, const Grid3& box, double time_tag = 0.0) {
    (void)time_tag;
    const int pd = gstar.profile_dim();
    double total = 0.0;
    for (int k = 0; k < box.dims[2]; ++k) {
        const double wk = (k == 0 || k == box.dims[2] - 1) ? 0.5 : 1.0;
        for (int j = 0; j < box.dims[1]; ++j) {
            const double wj = (j == 0 || j == box.dims[1] - 1) ? 0.5 : 1.0;
            for (int i = 0; i < box.dims[0]; ++i) {
                const double wi = (i == 0 || i == box.dims[0] - 1) ? 0.5 : 1.0;
                const Vec3 x = box.coord(i, j, k);
                total += wi * wj * wk * gstar.trace_at(pd == 2 ? x[1] : x[2]);
            }
        }
    }
    return total * box.spacing[0] * box.spacing[1] * box.spacing[2];
}

} // namespace curvflow
