#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "curvflow/errors.hpp"

namespace curvflow {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }

/// Storage index for symmetric pairs, 1-based (i,j): 11,22,33,12,13,23 -> 0..5.
inline constexpr int sym_index(int i, int j) {
    if (i > j) std::swap(i, j);
    if (i == j) return i - 1;
    if (i == 1) return j == 2 ? 3 : 4;
    return 5; // (2,3)
}

/// Symmetric 3x3 matrix, components in the order 11,22,33,12,13,23.
struct Sym3 {
    std::array<double, 6> a{};

    static Sym3 identity() { return Sym3{{1.0, 1.0, 1.0, 0.0, 0.0, 0.0}}; }
    static Sym3 diagonal(double d1, double d2, double d3) { return Sym3{{d1, d2, d3, 0.0, 0.0, 0.0}}; }

    double operator()(int i, int j) const { return a[static_cast<std::size_t>(sym_index(i, j))]; }
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(sym_index(i, j))]; }

    double trace() const { return a[0] + a[1] + a[2]; }
    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }

    /// Leading principal minors: ({11}, {11,22}, full determinant).
    double minor1() const { return a[0]; }
    double minor2() const { return a[0] * a[1] - a[3] * a[3]; }
    double det() const {
        const double g11 = a[0], g22 = a[1], g33 = a[2], g12 = a[3], g13 = a[4], g23 = a[5];
        return g11 * (g22 * g33 - g23 * g23) - g12 * (g12 * g33 - g23 * g13) + g13 * (g12 * g23 - g22 * g13);
    }

    bool positive_definite() const { return minor1() > 0.0 && minor2() > 0.0 && det() > 0.0; }

    /// Inverse via adjugate / determinant. Throws once |det| falls under the singularity floor.
    Sym3 inverse(double det_floor = 1e-14) const {
        const double d = det();
        if (!(std::abs(d) > det_floor)) {
            throw numeric_error("Sym3::inverse: determinant " + std::to_string(d) + " below floor");
        }
        const double g11 = a[0], g22 = a[1], g33 = a[2], g12 = a[3], g13 = a[4], g23 = a[5];
        Sym3 inv;
        inv.a[0] = (g22 * g33 - g23 * g23) / d;
        inv.a[1] = (g11 * g33 - g13 * g13) / d;
        inv.a[2] = (g11 * g22 - g12 * g12) / d;
        inv.a[3] = (g13 * g23 - g12 * g33) / d;
        inv.a[4] = (g12 * g23 - g13 * g22) / d;
        inv.a[5] = (g12 * g13 - g11 * g23) / d;
        return inv;
    }

    Vec3 apply(const Vec3& x) const {
        return {(*this)(1, 1) * x[0] + (*this)(1, 2) * x[1] + (*this)(1, 3) * x[2],
                (*this)(1, 2) * x[0] + (*this)(2, 2) * x[1] + (*this)(2, 3) * x[2],
                (*this)(1, 3) * x[0] + (*this)(2, 3) * x[1] + (*this)(3, 3) * x[2]};
    }
};

inline Sym3 operator-(const Sym3& x, const Sym3& y) {
    Sym3 r;
    for (std::size_t c = 0; c < 6; ++c) r.a[c] = x.a[c] - y.a[c];
    return r;
}

/// Eigenvalues of a symmetric 3x3 by cyclic Jacobi rotations, sorted descending.
/// Deterministic, converges to machine precision; used as the robust path and as
/// the numeric reference in the diagnostics.
inline std::array<double, 3> sym3_eigenvalues_jacobi(const Sym3& s) {
    double m[3][3] = {{s(1, 1), s(1, 2), s(1, 3)}, {s(1, 2), s(2, 2), s(2, 3)}, {s(1, 3), s(2, 3), s(3, 3)}};
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
        if (off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                const double app = m[p][p], aqq = m[q][q], apq = m[p][q];
                m[p][p] = c * c * app - 2.0 * sn * c * apq + sn * sn * aqq;
                m[q][q] = sn * sn * app + 2.0 * sn * c * apq + c * c * aqq;
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                const int r = 3 - p - q;
                const double arp = m[r][p], arq = m[r][q];
                m[r][p] = c * arp - sn * arq;
                m[p][r] = m[r][p];
                m[r][q] = sn * arp + c * arq;
                m[q][r] = m[r][q];
            }
        }
    }
    std::array<double, 3> ev{m[0][0], m[1][1], m[2][2]};
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

/// Eigenvalues of a symmetric 3x3, sorted descending. Closed-form trigonometric
/// method; falls back to Jacobi rotations when the acos argument sits within
/// 1e-13 of +-1 (near-multiple spectrum, where the closed form loses digits).
inline std::array<double, 3> sym3_eigenvalues(const Sym3& s) {
    const double p1 = s(1, 2) * s(1, 2) + s(1, 3) * s(1, 3) + s(2, 3) * s(2, 3);
    if (p1 == 0.0) {
        std::array<double, 3> ev{s(1, 1), s(2, 2), s(3, 3)};
        std::sort(ev.begin(), ev.end(), std::greater<double>());
        return ev;
    }
    const double q = s.trace() / 3.0;
    const double d1 = s(1, 1) - q, d2 = s(2, 2) - q, d3 = s(3, 3) - q;
    const double p2 = d1 * d1 + d2 * d2 + d3 * d3 + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Sym3 b = s;
    b.a[0] -= q;
    b.a[1] -= q;
    b.a[2] -= q;
    for (double& c : b.a) c /= p;
    const double r = b.det() / 2.0;
    if (std::abs(r) > 1.0 - 1e-13) return sym3_eigenvalues_jacobi(s);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::array<double, 3> ev{e1, e2, e3};
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

/// General 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

    double operator()(int i, int j) const { return m[static_cast<std::size_t>(3 * (i - 1) + (j - 1))]; }
    double& operator()(int i, int j) { return m[static_cast<std::size_t>(3 * (i - 1) + (j - 1))]; }

    double det() const {
        return (*this)(1, 1) * ((*this)(2, 2) * (*this)(3, 3) - (*this)(2, 3) * (*this)(3, 2)) -
               (*this)(1, 2) * ((*this)(2, 1) * (*this)(3, 3) - (*this)(2, 3) * (*this)(3, 1)) +
               (*this)(1, 3) * ((*this)(2, 1) * (*this)(3, 2) - (*this)(2, 2) * (*this)(3, 1));
    }

    /// F F^T as a symmetric matrix.
    Sym3 right_gram() const {
        Sym3 s;
        for (int i = 1; i <= 3; ++i) {
            for (int j = i; j <= 3; ++j) {
                double v = 0.0;
                for (int k = 1; k <= 3; ++k) v += (*this)(i, k) * (*this)(j, k);
                s(i, j) = v;
            }
        }
        return s;
    }
};

} // namespace curvflow
