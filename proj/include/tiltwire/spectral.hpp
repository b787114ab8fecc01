/*
 * spectral.hpp — spectrum bookkeeping for a Dirichlet strip of width pi with
 * an attractive delta wire on a segment.
 *
 * With the wire perpendicular to the walls the Hamiltonian decouples into
 * transverse channels k = 1,2,... with thresholds k^2, and each channel
 * carries one point-interaction level
 *
 *     E_k = -alpha^2/4 + k^2 .
 *
 * Levels below the continuum threshold 1 are discrete eigenvalues, levels
 * above are embedded in the essential spectrum [1, inf).  Around a resonant
 * index n this header classifies channels into open (k^2 < E_n) and closed,
 * fixes the inter-threshold window Upsilon_n = (k1^2, (k1+1)^2) that contains
 * E_n, and provides the per-channel square root tau_k(z) continued through
 * that window into the lower half plane:
 *
 *     open channel   k <= k1 : principal sqrt(z - k^2)   (positive on the cut,
 *                               analytic off (-inf, k^2])
 *     closed channel k >  k1 : i * principal sqrt(k^2 - z)
 *
 * For a repulsive wire the pole sits on the second sheet of the *resonant*
 * channel root only; that variant flips tau_n to -i*sqrt(n^2 - z) and leaves
 * every other channel untouched (SheetMode::repulsive).
 */

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiltwire {

using Complex = std::complex<double>;

inline constexpr double kEssentialThreshold = 1.0;  // ground transverse mode, width pi
inline constexpr double kCollisionTol = 1e-9;       // threshold-collision detection

/// Physical configuration: coupling alpha (attractive if > 0) and tilt eps >= 0.
struct WaveguideParams {
    double alpha;
    double epsilon;

    WaveguideParams(double a, double e) : alpha(a), epsilon(e) {
        if (alpha == 0.0)
            throw std::domain_error("WaveguideParams: alpha must be nonzero");
        if (epsilon < 0.0)
            throw std::domain_error("WaveguideParams: epsilon must be >= 0");
    }
};

/// E_k = -alpha^2/4 + k^2 for the straight (eps = 0) wire, attractive coupling.
inline double embedded_eigenvalue(double alpha, int k) {
    if (alpha <= 0.0)
        throw std::domain_error("embedded_eigenvalue: requires alpha > 0 "
                                "(repulsive case has no eigenvalues)");
    if (k < 1) throw std::domain_error("embedded_eigenvalue: k must be >= 1");
    return -0.25 * alpha * alpha + static_cast<double>(k) * k;
}

struct SpectrumSummary {
    std::vector<double> discrete;   // E_k < 1
    std::vector<double> embedded;   // E_k >= 1
    double ess_threshold = kEssentialThreshold;
};

/// Classify E_k for k = 1..k_max.  #discrete always equals #{k : k^2 < 1 + alpha^2/4}.
inline SpectrumSummary spectrum_summary(double alpha, int k_max) {
    if (alpha <= 0.0) throw std::domain_error("spectrum_summary: alpha must be > 0");
    if (k_max < 1) throw std::domain_error("spectrum_summary: k_max must be >= 1");
    SpectrumSummary s;
    for (int k = 1; k <= k_max; ++k) {
        const double e = embedded_eigenvalue(alpha, k);
        (e < kEssentialThreshold ? s.discrete : s.embedded).push_back(e);
    }
    return s;
}

/// Channel bookkeeping around the resonant index n.
struct ModeClassification {
    int n = 0;
    double energy = 0.0;              // E_n
    int k1 = 0;                       // max open channel; open set = {1..k1}
    std::vector<int> open_channels;       // {k : k^2 < E_n}
    std::vector<int> odd_open_channels;   // {k open : |n - k| odd}
    double window_lo = 0.0, window_hi = 0.0;   // Upsilon_n = (k1^2, (k1+1)^2)

    // Continuation box below the window: (window_lo + margin, window_hi - margin)
    // x (-box_height, 0).  The window itself and the whole upper half plane are
    // always part of the validity region.
    double box_margin = 1e-6;
    double box_height = 0.0;

    bool in_window(double x) const { return x > window_lo && x < window_hi; }

    /// z admissible for tau / kernel evaluation: C_+, the window, or the box.
    bool region_contains(Complex z) const {
        if (z.imag() > 0.0) return true;
        if (z.imag() == 0.0) return in_window(z.real());
        return z.real() > window_lo + box_margin && z.real() < window_hi - box_margin &&
               z.imag() > -box_height;
    }
};

struct Admissibility {
    bool ok = false;
    std::string diagnostic;
};

/// E_n must lie above the continuum threshold and away from every channel
/// threshold (alpha != 2 sqrt(n^2 - k^2) within kCollisionTol).
inline Admissibility check_admissible(double alpha, int n) {
    if (n < 1) return {false, "n must be >= 1"};
    const double a = std::abs(alpha);
    const double energy = -0.25 * a * a + static_cast<double>(n) * n;
    if (energy <= kEssentialThreshold)
        return {false, "E_" + std::to_string(n) + "=" + std::to_string(energy) +
                           " below essential-spectrum threshold 1"};
    for (int k = 1; k < n; ++k) {
        const double collision = 2.0 * std::sqrt(static_cast<double>(n) * n - k * k);
        if (std::abs(a - collision) <= kCollisionTol)
            return {false, "collision at k=" + std::to_string(k)};
    }
    return {true, ""};
}

/// Channel classification for an embedded level E_n.  Throws on inadmissible input.
inline ModeClassification classify_modes(double alpha, int n) {
    const Admissibility adm = check_admissible(alpha, n);
    if (!adm.ok) {
        if (adm.diagnostic.find("collision") != std::string::npos)
            throw std::domain_error("classify_modes: threshold collision (" + adm.diagnostic + ")");
        throw std::domain_error("classify_modes: not an embedded eigenvalue (" + adm.diagnostic + ")");
    }
    ModeClassification mc;
    mc.n = n;
    mc.energy = -0.25 * std::abs(alpha) * std::abs(alpha) + static_cast<double>(n) * n;
    int k1 = 0;
    while (static_cast<double>(k1 + 1) * (k1 + 1) < mc.energy) ++k1;
    mc.k1 = k1;
    for (int k = 1; k <= k1; ++k) {
        mc.open_channels.push_back(k);
        if ((n - k) % 2 != 0) mc.odd_open_channels.push_back(k);
    }
    mc.window_lo = static_cast<double>(k1) * k1;
    mc.window_hi = static_cast<double>(k1 + 1) * (k1 + 1);
    mc.box_height = 0.5 * std::min(1.0, mc.window_hi - mc.window_lo);
    return mc;
}

/// Which sheet the resonant channel root lives on.
enum class SheetMode {
    attractive,  // tau_n = +i sqrt(n^2 - z): first sheet, embedded-eigenvalue setup
    repulsive    // tau_n = -i sqrt(n^2 - z): resonant channel continued to sheet II
};

/// A point on the glued energy surface, tied to the classification that fixes
/// the branch of every channel root.
struct ComplexEnergy {
    Complex z;
    const ModeClassification* context = nullptr;

    bool valid() const { return context != nullptr && context->region_contains(z); }
    void require_valid() const {
        if (!valid())
            throw std::domain_error("ComplexEnergy: z outside the continuation region");
    }
};

/// Per-channel square root on the continuation region (see header comment).
inline Complex tau(Complex z, int k, const ModeClassification& mc,
                   SheetMode mode = SheetMode::attractive) {
    if (k < 1) throw std::domain_error("tau: k must be >= 1");
    if (!mc.region_contains(z))
        throw std::domain_error("tau: z outside the continuation region");
    const double k2 = static_cast<double>(k) * k;
    if (k <= mc.k1) return std::sqrt(z - k2);
    const Complex first_sheet = Complex(0, 1) * std::sqrt(Complex(k2) - z);
    if (mode == SheetMode::repulsive && k == mc.n) return -first_sheet;
    return first_sheet;
}

inline Complex tau(const ComplexEnergy& z, int k, SheetMode mode = SheetMode::attractive) {
    z.require_valid();
    return tau(z.z, k, *z.context, mode);
}

}  // namespace tiltwire
