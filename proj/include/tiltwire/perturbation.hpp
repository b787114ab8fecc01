/*
 * perturbation.hpp — second-order tilt expansion of the resolvent pole.
 *
 *   z_n(eps) = E_n + V_n eps + W_n eps^2 + O(eps^3),
 *
 *   V_n = -(alpha^3/pi) (w_n, T1 w_n)
 *   W_n = -(alpha^4/pi^2)(w_n, T1 w_n)^2 - (alpha^3/pi)(w_n, T2(E_n) w_n)
 *         - (alpha^4/pi)(w_n, T1^2 w_n)
 *
 * T1 is real symmetric, so V_n is real (in fact its k-sum telescopes to zero
 * and the computed V_n vanishes to machine precision; the energy shift is
 * carried entirely by Re W_n).  The width rate is gamma = 2|Im W_n| per eps^2,
 * fed only by the open channels of opposite parity (tau_k real there).
 *
 * For a repulsive wire (alpha < 0) the pole sits on the second sheet of the
 * resonant channel root with Im z > 0; the same chain applies with the
 * resonant channel flipped (SheetMode::repulsive).
 */

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "tiltwire/matrix_elements.hpp"
#include "tiltwire/spectral.hpp"

namespace tiltwire {

struct PerturbOptions {
    int K = kElementK;  // channel-sum floor
    int J = kElementJ;  // completeness-sum floor
};

inline void require_admissible(double alpha, int n, const char* who) {
    const Admissibility adm = check_admissible(alpha, n);
    if (!adm.ok) throw std::domain_error(std::string(who) + ": " + adm.diagnostic);
}

/// First-order coefficient V_n (real; identically zero, see header comment).
inline double v_coeff(double alpha, int n, const PerturbOptions& opt = {}) {
    require_admissible(alpha, n, "v_coeff");
    return -(alpha * alpha * alpha / kPi) * t1_element(n, n, opt.K);
}

/// S_n = sum over odd open channels of tau_k(E_n) k^2 n^2 / (n^2-k^2)^4.
inline double s_sum(double alpha, int n) {
    require_admissible(alpha, n, "s_sum");
    const ModeClassification mc = classify_modes(alpha, n);
    double s = 0.0;
    for (int k : mc.odd_open_channels) {
        const double dk = static_cast<double>(k) * k, dn = static_cast<double>(n) * n;
        const double r = dn - dk;
        s += tau(Complex(mc.energy), k, mc).real() * dk * dn / (r * r * r * r);
    }
    return s;
}

namespace detail {
inline Complex w_coeff_impl(double alpha, int n, SheetMode mode, const PerturbOptions& opt) {
    const ModeClassification mc = classify_modes(alpha, n);
    const double t1 = t1_element(n, n, opt.K);
    const Complex t2 = t2_element(n, n, Complex(mc.energy), mc, opt.K, mode);
    const double t1sq = t1_squared_element(n, opt.J, opt.K);
    const double a3 = alpha * alpha * alpha, a4 = a3 * alpha;
    return -(a4 / (kPi * kPi)) * t1 * t1 - (a3 / kPi) * t2 - (a4 / kPi) * t1sq;
}
}  // namespace detail

/// Second-order coefficient W_n for the attractive wire; Im W_n <= 0.
inline Complex w_coeff(double alpha, int n, const PerturbOptions& opt = {}) {
    require_admissible(alpha, n, "w_coeff");
    if (alpha <= 0.0) throw std::domain_error("w_coeff: alpha must be > 0");
    return detail::w_coeff_impl(alpha, n, SheetMode::attractive, opt);
}

/// z_n(eps) through second order, attractive coupling.
inline Complex pole_expansion(double alpha, int n, double eps, const PerturbOptions& opt = {}) {
    require_admissible(alpha, n, "pole_expansion");
    if (alpha <= 0.0) throw std::domain_error("pole_expansion: alpha must be > 0");
    if (eps < 0.0) throw std::domain_error("pole_expansion: eps must be >= 0");
    const double energy = embedded_eigenvalue(alpha, n);
    if (eps == 0.0) return Complex(energy);
    return energy + v_coeff(alpha, n, opt) * eps + w_coeff(alpha, n, opt) * eps * eps;
}

/// Second-sheet pole for a repulsive wire (alpha < 0): Im > 0 for eps > 0.
inline Complex repulsive_pole(double alpha, int n, double eps, const PerturbOptions& opt = {}) {
    if (alpha >= 0.0) throw std::domain_error("repulsive_pole: alpha must be < 0");
    require_admissible(alpha, n, "repulsive_pole");
    if (eps < 0.0) throw std::domain_error("repulsive_pole: eps must be >= 0");
    const double energy = embedded_eigenvalue(-alpha, n);  // alpha enters as alpha^2
    if (eps == 0.0) return Complex(energy);
    const double v = -(alpha * alpha * alpha / kPi) * t1_element(n, n, opt.K);
    const Complex w = detail::w_coeff_impl(alpha, n, SheetMode::repulsive, opt);
    return energy + v * eps + w * eps * eps;
}

/// Everything the reports need, in one record.
struct PerturbativeCoefficients {
    double alpha = 0.0;
    int n = 0;
    double energy = 0.0;
    double v = 0.0;
    Complex w{0.0, 0.0};
    double s = 0.0;
    double gamma_rate = 0.0;        // 2 |Im w| per eps^2
    double im_z_coeff_chain = 0.0;  // Im w, the value the expansion actually uses
    double im_z_coeff_display = 0.0;  // -(4 alpha^2/pi^3) S_n, the printed variant
};

inline PerturbativeCoefficients perturbative_coefficients(double alpha, int n,
                                                          const PerturbOptions& opt = {}) {
    require_admissible(alpha, n, "perturbative_coefficients");
    PerturbativeCoefficients c;
    c.alpha = alpha;
    c.n = n;
    c.energy = embedded_eigenvalue(std::abs(alpha), n);
    c.s = s_sum(alpha, n);
    if (alpha > 0.0) {
        c.v = v_coeff(alpha, n, opt);
        c.w = w_coeff(alpha, n, opt);
    } else {
        c.v = -(alpha * alpha * alpha / kPi) * t1_element(n, n, opt.K);
        c.w = detail::w_coeff_impl(alpha, n, SheetMode::repulsive, opt);
    }
    c.gamma_rate = 2.0 * std::abs(c.w.imag());
    c.im_z_coeff_chain = c.w.imag();
    c.im_z_coeff_display = -(4.0 * alpha * alpha / (kPi * kPi * kPi)) * c.s;
    return c;
}

}  // namespace tiltwire
