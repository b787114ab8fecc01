/*
 * matrix_elements.hpp — Galerkin elements feeding the tilt expansion.
 *
 * M_{k,n} and N_{k,n} are the |x-y|- and |x-y|^2-weighted four-sine integrals.
 * The printed literature values are carried verbatim by m_closed / n_closed
 * (diagonals tagged unverified); m_oracle / n_oracle recompute everything by
 * converged quadrature, and the two are reconciled in a discrepancy report —
 * the oracle wins on any disagreement.
 *
 * t1_element(j,n)  = (w_j, T1 w_n)      with T1 kernel -(1/pi)|x-y| sum_k w_k w_k
 * t2_element(j,n)  = (w_j, T2(z) w_n)   with kernel -(i/2pi) sum_k tau_k |x-y|^2 w_k w_k
 *
 * The k-sum of the T1 elements telescopes to zero: off-diagonal elements have
 * finitely many nonzero terms that cancel exactly, and the diagonal partial
 * sums equal -(1/4)[psi1(K+1-n) + psi1(K+1+n)], which t1_element completes
 * with the exact trigamma tail.  t1_element_partial exposes the bare
 * truncated sum for diagnostics.
 */

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltwire/closed_forms.hpp"
#include "tiltwire/quadrature.hpp"
#include "tiltwire/spectral.hpp"

namespace tiltwire {

inline constexpr int kElementK = 200;   // default channel count in k-sums
inline constexpr int kElementJ = 60;    // default basis count in completeness sums
inline constexpr double kOracleTol = 1e-10;

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A printed closed-form value; diagonals are carried but not trusted.
struct ClosedFormValue {
    double value = 0.0;
    bool verified = true;   // false: printed value known to fail sanity bounds
};

/// Printed closed form for M_{k,n} (|x-y| weight).
inline ClosedFormValue m_closed(int k, int n) {
    if (k < 1 || n < 1) throw std::domain_error("m_closed: indices must be >= 1");
    if (k == n)
        return {-(21.0 / 48.0) * kPi / (static_cast<double>(k) * k) +
                    (11.0 / 6.0) * kPi * kPi * kPi,
                false};
    const double dk = static_cast<double>(k) * k, dn = static_cast<double>(n) * n;
    return {-(kPi / 4.0) * (dn + dk) / ((dn - dk) * (dn - dk)), true};
}

/// Printed closed form for N_{k,n} (|x-y|^2 weight).
inline ClosedFormValue n_closed(int k, int n) {
    if (k < 1 || n < 1) throw std::domain_error("n_closed: indices must be >= 1");
    if (k == n)
        return {std::pow(kPi, 4) / 12.0 - kPi * kPi / (4.0 * k * k), false};
    if ((k - n) % 2 == 0) return {0.0, true};
    const double dk = static_cast<double>(k) * k, dn = static_cast<double>(n) * n;
    const double r = dn - dk;
    return {-8.0 * dk * dn / (r * r * r * r), true};
}

/// Converged-quadrature ground truth for M_{k,n}.
inline double m_oracle(int k, int n) {
    IntegralSpec s;
    s.m = 1;
    s.a = k; s.b = n; s.c = k; s.d = n;
    return q_converged(s, kOracleTol).value.real();
}

/// Converged-quadrature ground truth for N_{k,n}.
inline double n_oracle(int k, int n) {
    IntegralSpec s;
    s.m = 2;
    s.a = k; s.b = n; s.c = k; s.d = n;
    return q_converged(s, kOracleTol).value.real();
}

/// Bare truncated sum -(1/pi) sum_{k<=K} q(1; j,k,k,n), exact closed forms.
inline double t1_element_partial(int j, int n, int K) {
    if (j < 1 || n < 1) throw std::domain_error("t1_element_partial: indices must be >= 1");
    double s = 0.0;
    for (int k = 1; k <= K; ++k) s += closed_form::poly_integral(1, j, k, k, n);
    return -s / kPi;
}

/// Galerkin element (w_j, T1 w_n): truncated sum completed with its exact
/// trigamma tail.  Zero for all (j, n); kept as a computation so the
/// cancellation is exercised, not assumed.
inline double t1_element(int j, int n, int K = kElementK) {
    if (K < std::max(j, n) + 10)
        throw std::domain_error("t1_element: K must be >= max(j,n)+10");
    const double partial = t1_element_partial(j, n, K);
    if (j != n) return partial;  // finitely many nonzero terms, all included
    const double tail =
        0.25 * (closed_form::trigamma(K + 1 - n) + closed_form::trigamma(K + 1 + n));
    return partial + tail;
}

/// Galerkin element (w_j, T2(z) w_n) = -(i/2pi) sum_k tau_k(z) q(2; j,k,k,n).
/// The given K is a floor; the sum extends (doubling) until three consecutive
/// terms are negligible.
inline Complex t2_element(int j, int n, Complex z, const ModeClassification& mc,
                          int K = kElementK, SheetMode mode = SheetMode::attractive) {
    if (j < 1 || n < 1) throw std::domain_error("t2_element: indices must be >= 1");
    if (!mc.region_contains(z)) throw std::domain_error("t2_element: z outside region");
    if (K < std::max(j, n) + 10)
        throw std::domain_error("t2_element: K must be >= max(j,n)+10");
    const int cap = 1 << 20;
    Complex sum(0.0, 0.0);
    int tiny_run = 0;
    for (int k = 1; k <= cap; ++k) {
        const Complex term = tau(z, k, mc, mode) * closed_form::poly_integral(2, j, k, k, n);
        sum += term;
        if (k >= K) {
            if (std::abs(term) < 1e-12 * std::max(1.0, std::abs(sum)))
                ++tiny_run;
            else
                tiny_run = 0;
            if (tiny_run >= 3) break;
        }
        if (k == cap)
            throw TruncationError("t2_element: channel sum tail not decaying");
    }
    return Complex(0.0, -1.0 / (2.0 * kPi)) * sum;
}

/// (w_n, T1^2 w_n) via completeness of the normalized sine basis:
/// sum_j (2/pi) t1_element(j,n,K)^2, J doubled until stable.
inline double t1_squared_element(int n, int J = kElementJ, int K = kElementK) {
    if (J < 2 * n + 10) throw std::domain_error("t1_squared_element: J must be >= 2n+10");
    double prev = -1.0;
    for (int JJ = J; JJ <= 16 * J; JJ *= 2) {
        double s = 0.0;
        for (int j = 1; j <= JJ; ++j) {
            const double t = t1_element(j, n, std::max(K, j + n + 10));
            s += (2.0 / kPi) * t * t;
        }
        if (prev >= 0.0 && std::abs(s - prev) <= std::max(1e-8 * std::abs(s), 1e-14))
            return s;
        prev = s;
    }
    throw TruncationError("t1_squared_element: basis sum not converging");
}

// ---- element tables and the discrepancy report ----

struct ElementEntry {
    char kind;        // 'M' or 'N'
    int k, n;
    double closed;
    bool closed_verified;
    double oracle;
    double abs_diff;
};

struct ElementTable {
    char kind;
    std::vector<ElementEntry> entries;  // all (k, n) with k, n <= kmax
};

inline ElementTable build_element_table(char kind, int kmax) {
    if (kind != 'M' && kind != 'N') throw std::domain_error("build_element_table: kind must be M or N");
    ElementTable t;
    t.kind = kind;
    for (int k = 1; k <= kmax; ++k)
        for (int n = 1; n <= kmax; ++n) {
            const ClosedFormValue cf = kind == 'M' ? m_closed(k, n) : n_closed(k, n);
            const double oracle = kind == 'M' ? m_oracle(k, n) : n_oracle(k, n);
            t.entries.push_back({kind, k, n, cf.value, cf.verified, oracle,
                                 std::abs(cf.value - oracle)});
        }
    return t;
}

/// Pairs where the printed value and the oracle disagree beyond tol.
inline std::vector<ElementEntry> discrepancies(const ElementTable& t, double tol = 1e-6) {
    std::vector<ElementEntry> out;
    for (const auto& e : t.entries)
        if (e.abs_diff >= tol) out.push_back(e);
    return out;
}

}  // namespace tiltwire
