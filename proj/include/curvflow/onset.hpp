#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvflow/continuum.hpp"
#include "curvflow/errors.hpp"

namespace curvflow {

/// Round to a number of significant decimal figures (half away from zero).
inline double round_significant(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double e = std::floor(std::log10(std::abs(x)));
    const double scale = std::pow(10.0, digits - 1 - static_cast<int>(e));
    return std::round(x * scale) / scale;
}

// ---------------------------------------------------------------------------
// Critical viscosity and the critical profile fit.
// ---------------------------------------------------------------------------

/// Viscosity at which the middle shear eigenvalue crosses zero:
/// gamma_crit = sqrt(p0^2 + p0 u1^2) / |u1'|. Returns +infinity when u1' = 0
/// (such a point never destabilizes under this criterion).
inline double critical_gamma(double p0, double u1, double u1p) {
    if (!(p0 >= 0.0)) throw validation_error("critical_gamma: p0 must be nonnegative");
    if (u1p == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(p0 * p0 + p0 * u1 * u1) / std::abs(u1p);
}

/// Exponential-profile fit plus the rounding pipeline that reproduces the
/// published constants. The exact branch is
///   a = ln(u1*) / (x3* - 1),  sqrt(p0) = a / Re,  p0 = (a / Re)^2,
/// so a = sqrt(p0) * Re holds by construction. The "paper" branch rounds the
/// exponent to 2 significant figures, divides by Re, rounds the result to 3
/// significant figures and multiplies back; with the default anchor
/// (0.8, 0.4) and Re = 2900 it lands on sqrt(p0) = 0.00159 and a = 4.611.
struct ProfileFit {
    double anchor_x3 = 0.0;
    double anchor_u1 = 0.0;
    double reynolds = 0.0;
    double plate_speed = 1.0;

    double a = 0.0;
    double sqrt_p0 = 0.0;
    double p0 = 0.0;

    double paper_a = 0.0;
    double paper_sqrt_p0 = 0.0;
    double paper_p0 = 0.0;
};

inline ProfileFit fit_profile(double anchor_x3, double anchor_u1, double reynolds) {
    if (!(reynolds > 0.0)) throw validation_error("fit_profile: Reynolds number must be positive");
    if (!(anchor_x3 > 0.0) || anchor_x3 >= 1.0)
        throw validation_error("fit_profile: anchor x3 must lie in (0, 1); x3 = 1 makes the fit degenerate");
    if (!(anchor_u1 > 0.0) || !(anchor_u1 < 1.0))
        throw validation_error("fit_profile: anchor u1 must lie in (0, 1)");

    ProfileFit fit;
    fit.anchor_x3 = anchor_x3;
    fit.anchor_u1 = anchor_u1;
    fit.reynolds = reynolds;
    fit.a = std::log(anchor_u1) / (anchor_x3 - 1.0);
    fit.sqrt_p0 = fit.a / reynolds;
    fit.p0 = fit.sqrt_p0 * fit.sqrt_p0;

    const double a_2sig = round_significant(fit.a, 2);
    fit.paper_sqrt_p0 = round_significant(a_2sig / reynolds, 3);
    fit.paper_a = fit.paper_sqrt_p0 * reynolds;
    fit.paper_p0 = fit.paper_sqrt_p0 * fit.paper_sqrt_p0;
    return fit;
}

/// The critical profile u1(x3) = exp(a (x3 - 1)) on [0, 1], extended to
/// [-1, 0) as an odd function. The sign bit of x3 selects the branch, so the
/// odd symmetry u1(-x) = -u1(x) is exact for every representable x.
inline double critical_profile_eval(double a, double x3) {
    if (!(std::abs(x3) <= 1.0)) throw validation_error("critical_profile_eval: |x3| must be <= 1");
    if (std::signbit(x3)) return -std::exp(a * (-x3 - 1.0));
    return std::exp(a * (x3 - 1.0));
}

// ---------------------------------------------------------------------------
// Full (unsimplified) critical profile.
// ---------------------------------------------------------------------------

struct FullProfileResult {
    std::vector<double> x3;
    std::vector<double> u1;
    double max_deviation_from_simplified = 0.0;
};

/// Integrates  u1' = sqrt(p0^2 + p0 u1^2) / gamma  backward from u1(1) = 1 by
/// RK4 over the given abscissas, and reports the maximum deviation from the
/// simplified exponential profile with a = sqrt(p0)/gamma.
inline FullProfileResult solve_full_profile(double p0, double gamma, std::span<const double> x3_grid) {
    if (!(p0 > 0.0) || !(gamma > 0.0))
        throw validation_error("solve_full_profile: p0 and gamma must be positive");
    if (x3_grid.size() < 2) throw validation_error("solve_full_profile: need at least 2 grid points");
    for (std::size_t k = 0; k + 1 < x3_grid.size(); ++k)
        if (!(x3_grid[k] < x3_grid[k + 1]))
            throw validation_error("solve_full_profile: x3 grid must be strictly increasing");
    if (std::abs(x3_grid.back() - 1.0) > 1e-12)
        throw validation_error("solve_full_profile: the grid must end at x3 = 1 (the boundary datum)");

    const double a = std::sqrt(p0) / gamma;
    auto rhs = [&](double u) { return std::sqrt(p0 * p0 + p0 * u * u) / gamma; };

    FullProfileResult out;
    const std::size_t n = x3_grid.size();
    out.x3.assign(x3_grid.begin(), x3_grid.end());
    out.u1.assign(n, 0.0);
    out.u1[n - 1] = 1.0;

    double u = 1.0;
    for (std::size_t k = n - 1; k > 0; --k) {
        const double h = x3_grid[k - 1] - x3_grid[k]; // negative
        const double k1 = rhs(u);
        const double k2 = rhs(u + 0.5 * h * k1);
        const double k3 = rhs(u + 0.5 * h * k2);
        const double k4 = rhs(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(u))
            throw numeric_error("solve_full_profile: integrator failure stepping to x3 = " +
                                std::to_string(x3_grid[k - 1]) + "; last good point x3 = " +
                                std::to_string(x3_grid[k]));
        out.u1[k - 1] = u;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double simplified = std::exp(a * (out.x3[k] - 1.0));
        out.max_deviation_from_simplified =
            std::max(out.max_deviation_from_simplified, std::abs(out.u1[k] - simplified));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transition scan.
// ---------------------------------------------------------------------------

struct ScanPoint {
    double x3 = 0.0;
    double u1 = 0.0;
    double u1p = 0.0;
    double gamma_crit = 0.0; // meaningful only when in_range
    bool in_range = false;
};

struct TransitionScan {
    std::vector<ScanPoint> points;
    std::size_t in_range_count = 0;
    double min_gamma = std::numeric_limits<double>::infinity();
    double min_gamma_x3 = 0.0;
    double max_gamma = -std::numeric_limits<double>::infinity();
    double max_gamma_x3 = 0.0;
};

/// Locates the lambda_2 zero of the shear spectrum in gamma by bisection at
/// every profile sample. Independent of the closed-form critical_gamma: the
/// crossing is found through shear_eigenvalues only. Points without a sign
/// change in [gamma_lo, gamma_hi] are flagged out-of-range, not errors.
inline TransitionScan transition_scan(std::span<const double> x3, std::span<const double> u1,
                                      std::span<const double> u1p, double p0, double gamma_lo,
                                      double gamma_hi, int iterations = 50) {
    if (x3.size() != u1.size() || x3.size() != u1p.size())
        throw validation_error("transition_scan: sample arrays must have equal length");
    if (!(gamma_lo >= 0.0) || !(gamma_hi > gamma_lo))
        throw validation_error("transition_scan: need 0 <= gamma_lo < gamma_hi");

    TransitionScan scan;
    scan.points.reserve(x3.size());
    for (std::size_t m = 0; m < x3.size(); ++m) {
        ScanPoint pt;
        pt.x3 = x3[m];
        pt.u1 = u1[m];
        pt.u1p = u1p[m];
        const double lo_sign = shear_eigenvalues(pt.u1, pt.u1p, p0, gamma_lo).lambda2;
        const double hi_sign = shear_eigenvalues(pt.u1, pt.u1p, p0, gamma_hi).lambda2;
        if (lo_sign > 0.0 && hi_sign < 0.0) {
            double lo = gamma_lo, hi = gamma_hi;
            for (int it = 0; it < iterations; ++it) {
                const double mid = 0.5 * (lo + hi);
                (shear_eigenvalues(pt.u1, pt.u1p, p0, mid).lambda2 > 0.0 ? lo : hi) = mid;
            }
            pt.gamma_crit = 0.5 * (lo + hi);
            pt.in_range = true;
            ++scan.in_range_count;
            if (pt.gamma_crit < scan.min_gamma) {
                scan.min_gamma = pt.gamma_crit;
                scan.min_gamma_x3 = pt.x3;
            }
            if (pt.gamma_crit > scan.max_gamma) {
                scan.max_gamma = pt.gamma_crit;
                scan.max_gamma_x3 = pt.x3;
            }
        }
        scan.points.push_back(pt);
    }
    return scan;
}

/// Derivative samples by the same stencils the field module uses: central in
/// the interior, one-sided second order at the ends. Requires uniform x3.
inline std::vector<double> profile_derivative(std::span<const double> x3, std::span<const double> u1) {
    if (x3.size() != u1.size() || x3.size() < 3)
        throw validation_error("profile_derivative: need >= 3 samples");
    const double h = x3[1] - x3[0];
    if (!(h > 0.0)) throw validation_error("profile_derivative: x3 must be increasing");
    for (std::size_t k = 0; k + 1 < x3.size(); ++k)
        if (std::abs((x3[k + 1] - x3[k]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw validation_error("profile_derivative: x3 samples must be uniformly spaced");
    const std::size_t n = x3.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * u1[0] + 4.0 * u1[1] - u1[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (u1[k + 1] - u1[k - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * u1[n - 1] - 4.0 * u1[n - 2] + u1[n - 3]) / (2.0 * h);
    return d;
}

} // namespace curvflow
