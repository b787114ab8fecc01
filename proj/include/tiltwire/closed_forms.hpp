/*
 * closed_forms.hpp — exact elementary evaluation of the four-sine integrals.
 *
 * Splitting the square at the diagonal and expanding the sines into complex
 * exponentials reduces everything to the entire functions
 *
 *     E0(s) = int_0^pi e^{sx} dx,   E1(s) = int_0^pi x e^{sx} dx
 *
 * and the triangle primitive T(p,q) = int_0^pi e^{px} (e^{qx}-1)/q dx.  These
 * are frequency-uniform (no aliasing), so they are the evaluation of choice
 * inside channel sums reaching k in the thousands; the quadrature module
 * stays the independent cross-check.
 *
 * The |x-y|^m weights (m = 0,1,2) reduce to moment tables of
 * int int |x-y|^m cos(mu x) cos(nu y).
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "tiltwire/quadrature.hpp"

namespace tiltwire::closed_form {

// ---- moments of cos on (0, pi): P_m(mu) = int_0^pi x^m cos(mu x) dx ----

inline double mom0(int mu) { return mu == 0 ? kPi : 0.0; }

inline double mom1(int mu) {
    if (mu == 0) return kPi * kPi / 2.0;
    const double m2 = static_cast<double>(mu) * mu;
    return (mu % 2 != 0 ? -2.0 : 0.0) / m2;
}

inline double mom2(int mu) {
    if (mu == 0) return kPi * kPi * kPi / 3.0;
    const double sign = (mu % 2 != 0) ? -1.0 : 1.0;
    return 2.0 * kPi * sign / (static_cast<double>(mu) * mu);
}

// ---- I_m(mu,nu) = int int |x-y|^m cos(mu x) cos(nu y) dx dy ----

inline double abs_moment0(int mu, int nu) { return mom0(std::abs(mu)) * mom0(std::abs(nu)); }

inline double abs_moment1(int mu, int nu) {
    mu = std::abs(mu);
    nu = std::abs(nu);
    if (mu == 0 && nu == 0) return kPi * kPi * kPi / 3.0;
    if (mu == 0) return kPi * (1.0 + (nu % 2 == 0 ? 1.0 : -1.0)) / (static_cast<double>(nu) * nu);
    if (nu == 0) return kPi * (1.0 + (mu % 2 == 0 ? 1.0 : -1.0)) / (static_cast<double>(mu) * mu);
    return mu == nu ? -kPi / (static_cast<double>(nu) * nu) : 0.0;
}

inline double abs_moment2(int mu, int nu) {
    mu = std::abs(mu);
    nu = std::abs(nu);
    return mom2(mu) * mom0(nu) + mom0(mu) * mom2(nu) - 2.0 * mom1(mu) * mom1(nu);
}

/// Closed form of q_poly(m, a, b, c, d).
inline double poly_integral(int m, int a, int b, int c, int d) {
    double (*I)(int, int) = m == 0 ? abs_moment0 : (m == 1 ? abs_moment1 : abs_moment2);
    if (m < 0 || m > 2) throw std::domain_error("poly_integral: m must be 0, 1 or 2");
    return 0.25 * (I(a - b, c - d) - I(a - b, c + d) - I(a + b, c - d) + I(a + b, c + d));
}

// ---- entire exponential moments ----

/// E0(s) = (e^{s pi} - 1)/s, removable singularity at 0.
inline Complex E0(Complex s) {
    if (std::abs(s) < 0.5) {
        Complex acc(0.0, 0.0), term(kPi, 0.0);
        for (int j = 0; j < 32; ++j) {
            acc += term;
            term *= s * kPi / static_cast<double>(j + 2);
        }
        return acc;
    }
    return (std::exp(s * kPi) - 1.0) / s;
}

/// E1(s) = ((s pi - 1) e^{s pi} + 1)/s^2, removable singularity at 0.
inline Complex E1(Complex s) {
    if (std::abs(s) < 0.5) {
        // sum_j s^j pi^{j+2} (j+1)/(j+2)!
        Complex acc(0.0, 0.0), term(kPi * kPi / 2.0, 0.0);
        for (int j = 0; j < 32; ++j) {
            acc += term;
            term *= s * kPi * static_cast<double>(j + 2) /
                    (static_cast<double>(j + 1) * static_cast<double>(j + 3));
        }
        return acc;
    }
    return ((s * kPi - 1.0) * std::exp(s * kPi) + 1.0) / (s * s);
}

/// E0(i m) for integer m (the p+q argument is always of this form).
inline Complex E0_imag_int(long long m) {
    if (m == 0) return Complex(kPi, 0.0);
    if (m % 2 == 0) return Complex(0.0, 0.0);
    return Complex(0.0, 2.0 / static_cast<double>(m));
}

namespace detail {
// 16-point Gauss-Legendre on (0,1) for the small-|q| divided difference.
inline const std::array<double, 16>& gl16_nodes() {
    static const std::array<double, 16> n = [] {
        auto rule = gauss_legendre(16);
        std::array<double, 16> out{};
        for (int i = 0; i < 16; ++i) out[i] = (rule->nodes[i] + 1.0) * 0.5;
        return out;
    }();
    return n;
}
inline const std::array<double, 16>& gl16_weights() {
    static const std::array<double, 16> w = [] {
        auto rule = gauss_legendre(16);
        std::array<double, 16> out{};
        for (int i = 0; i < 16; ++i) out[i] = rule->weights[i] * 0.5;
        return out;
    }();
    return w;
}
}  // namespace detail

/// T(p, q) = int_0^pi e^{px}(e^{qx}-1)/q dx with p + q = i*musum exactly.
/// `ep` must carry e^{p pi}; for p = c + i*mu that is e^{c pi} * (-1)^mu.
inline Complex exp_triangle_term(Complex p, Complex q, long long musum, Complex ep) {
    if (std::abs(q) >= 0.5) {
        const Complex e0p = std::abs(p) < 0.5 ? E0(p) : (ep - 1.0) / p;
        return (E0_imag_int(musum) - e0p) / q;
    }
    // divided difference (E0(p+q) - E0(p))/q = int_0^1 E1(p + t q) dt
    const auto& ts = detail::gl16_nodes();
    const auto& ws = detail::gl16_weights();
    Complex acc(0.0, 0.0);
    for (int i = 0; i < 16; ++i) acc += ws[i] * E1(p + ts[i] * q);
    return acc;
}

/// Closed form of q_exp(c, a, b, d, e):
/// int_0^pi int_0^pi e^{c|x-y|} sin(ax) sin(bx) sin(dy) sin(ey) dx dy.
/// `ecpi` must equal e^{c pi} (hot loops share it across many calls).
inline Complex exp_integral_with(Complex c, Complex ecpi, int a, int b, int d, int e) {
    Complex total(0.0, 0.0);
    // two triangles: {x>y} with x-side (a,b), and the mirror with roles swapped
    const int roles[2][4] = {{a, b, d, e}, {d, e, a, b}};
    for (const auto& r : roles) {
        const int mus[4] = {r[0] - r[1], r[1] - r[0], r[0] + r[1], -r[0] - r[1]};
        const int nus[4] = {r[2] - r[3], r[3] - r[2], r[2] + r[3], -r[2] - r[3]};
        for (int im = 0; im < 4; ++im) {
            const double sm = im < 2 ? 1.0 : -1.0;
            const Complex p = c + Complex(0.0, static_cast<double>(mus[im]));
            const Complex ep = (mus[im] % 2 == 0) ? ecpi : -ecpi;
            for (int in = 0; in < 4; ++in) {
                const double sn = in < 2 ? 1.0 : -1.0;
                const Complex q = -c + Complex(0.0, static_cast<double>(nus[in]));
                total += (sm * sn / 16.0) *
                         exp_triangle_term(p, q, mus[im] + nus[in], ep);
            }
        }
    }
    return total;
}

inline Complex exp_integral(Complex c, int a, int b, int d, int e) {
    return exp_integral_with(c, std::exp(c * kPi), a, b, d, e);
}

/// trigamma psi_1(x) for real x > 0: recurrence up to x >= 20, then asymptotics.
inline double trigamma(double x) {
    if (x <= 0.0) throw std::domain_error("trigamma: x must be > 0");
    double acc = 0.0;
    while (x < 20.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double r = 1.0 / x, r2 = r * r;
    return acc + r * (1.0 + r * (0.5 + r * (1.0 / 6.0 + r2 * (-1.0 / 30.0 + r2 * (1.0 / 42.0 - r2 / 30.0)))));
}

}  // namespace tiltwire::closed_form
