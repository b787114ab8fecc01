/*
 * bs_solver.hpp — nonperturbative pole search.
 *
 * The continued interaction kernel
 *
 *     G(z; x,y) = (i/pi) sum_k e^{i tau_k(z) eps |x-y|} / tau_k(z) w_k(x) w_k(y)
 *
 * is represented in the normalized sine basis e_k = sqrt(2/pi) w_k.  Each
 * entry splits into the exact straight-wire diagonal i/(2 tau_j) delta_jl plus
 * a channel sum of exponential-integral remainders; the linear-in-eps content
 * is removed analytically (its channel sum vanishes identically), which keeps
 * the truncation error at the eps^2 level and makes the Galerkin matrix stable
 * under J,K refinement.  Entries with j+l odd vanish by the mirror symmetry
 * x -> pi - x of the kernel and are skipped.
 *
 * The pole condition is the scalar reduction
 *
 *     eta(z, eps) = tau_n(z) - i (alpha/2) [(I - alpha T(z))^{-1}]_{nn},
 *
 * whose root is chased with a complex secant iteration (Muller fallback,
 * bisection damping against region escapes).  det(I - alpha R) and the
 * smallest singular value provide an independent detection route.
 */

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tiltwire/closed_forms.hpp"
#include "tiltwire/perturbation.hpp"
#include "tiltwire/spectral.hpp"

namespace tiltwire {

struct SolverOptions {
    int J = 30;                // Galerkin modes
    int K = 120;               // channel-sum floor (tail rule may extend it)
    double tol_root = 1e-10;   // |eta| at convergence
    int max_iterations = 60;
    double cond_limit = 1e12;
    int assembly_threads = 1;
};

struct NearSingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegionEscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OperatorMatrix {
    Eigen::MatrixXcd mat;  // J x J, normalized sine basis
    Complex z;
    double eps = 0.0;
    double alpha = 0.0;
    int n = 0;
    int J = 0;
    int K = 0;       // requested floor
    int k_used = 0;  // channels actually summed
};

namespace detail {

struct ChannelData {
    std::vector<Complex> tau, c, ecpi;
};

inline ChannelData channel_data(Complex z, double eps, const ModeClassification& mc,
                                SheetMode mode, int k_max) {
    ChannelData d;
    d.tau.resize(k_max + 1);
    d.c.resize(k_max + 1);
    d.ecpi.resize(k_max + 1);
    for (int k = 1; k <= k_max; ++k) {
        d.tau[k] = tau(z, k, mc, mode);
        d.c[k] = Complex(0, 1) * d.tau[k] * eps;
        d.ecpi[k] = std::exp(d.c[k] * kPi);
    }
    return d;
}

/// Channel-k remainder of entry (j,l): [q_exp - eps^0 - eps^1 parts] / tau_k.
inline Complex entry_term(const ChannelData& d, int j, int l, int k) {
    Complex v = closed_form::exp_integral_with(d.c[k], d.ecpi[k], j, k, k, l);
    if (j == k && k == l) v -= (kPi / 2.0) * (kPi / 2.0);
    v -= d.c[k] * closed_form::poly_integral(1, j, k, k, l);
    return v / d.tau[k];
}

/// Tail rule: channels summed until three consecutive terms fall below
/// 1e-12 of the running entry magnitude (checked on the most sensitive
/// entry, (n,n)), never fewer than the requested floor.
inline int resolve_k_used(const ChannelData& d, int n, int floor_k, int k_cap) {
    Complex entry = Complex(0, 1) / (2.0 * d.tau[n]);
    int tiny_run = 0;
    for (int k = 1; k <= k_cap; ++k) {
        const Complex t = (2.0 * Complex(0, 1) / (kPi * kPi)) * entry_term(d, n, n, k);
        entry += t;
        if (k >= floor_k) {
            if (std::abs(t) < 1e-12 * std::max(std::abs(entry), 1e-3))
                ++tiny_run;
            else
                tiny_run = 0;
            if (tiny_run >= 3) return k;
        }
    }
    return k_cap;
}

template <typename Fn>
inline void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count < 8) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int nt = std::min<std::size_t>(threads, count);
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Galerkin matrix of the continued kernel in the normalized sine basis.
/// `k_fixed` > 0 pins the channel count (frozen across a root search).
inline OperatorMatrix r_matrix(Complex z, double eps, double alpha, int n, int J, int K,
                               SheetMode mode, int k_fixed = 0, int threads = 1) {
    if (J < 2 * n || K < 2 * n) throw std::domain_error("r_matrix: J and K must be >= 2n");
    const ModeClassification mc = classify_modes(alpha, n);
    if (!mc.region_contains(z)) throw std::domain_error("r_matrix: z outside region");

    OperatorMatrix om;
    om.z = z;
    om.eps = eps;
    om.alpha = alpha;
    om.n = n;
    om.J = J;
    om.K = K;
    om.mat = Eigen::MatrixXcd::Zero(J, J);

    if (eps == 0.0) {
        const auto d0 = detail::channel_data(z, 0.0, mc, mode, J);
        for (int j = 1; j <= J; ++j) om.mat(j - 1, j - 1) = Complex(0, 1) / (2.0 * d0.tau[j]);
        om.k_used = J;
        return om;
    }

    constexpr int k_cap = 1 << 15;
    const int floor_k = std::max(K, J);
    const auto d = detail::channel_data(z, eps, mc, mode,
                                        k_fixed > 0 ? std::max(k_fixed, J) : k_cap);
    const int k_used = k_fixed > 0 ? std::max(k_fixed, J)
                                   : detail::resolve_k_used(d, n, floor_k, k_cap);
    om.k_used = k_used;

    std::vector<std::pair<int, int>> pairs;
    for (int j = 1; j <= J; ++j)
        for (int l = j; l <= J; ++l)
            if ((j + l) % 2 == 0) pairs.emplace_back(j, l);

    std::vector<Complex> results(pairs.size());
    detail::parallel_for(pairs.size(), threads, [&](std::size_t i) {
        const auto [j, l] = pairs[i];
        Complex s(0.0, 0.0);
        for (int k = 1; k <= k_used; ++k) s += detail::entry_term(d, j, l, k);
        results[i] = (2.0 * Complex(0, 1) / (kPi * kPi)) * s;
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [j, l] = pairs[i];
        om.mat(j - 1, l - 1) += results[i];
        if (l != j) om.mat(l - 1, j - 1) = om.mat(j - 1, l - 1);
    }
    for (int j = 1; j <= J; ++j) om.mat(j - 1, j - 1) += Complex(0, 1) / (2.0 * d.tau[j]);
    return om;
}

/// Rank-one resonant-channel part S_n in the normalized basis.
inline OperatorMatrix s_rank1(Complex z, double alpha, int n, int J,
                              SheetMode mode = SheetMode::attractive) {
    const ModeClassification mc = classify_modes(alpha, n);
    if (!mc.region_contains(z)) throw std::domain_error("s_rank1: z outside region");
    OperatorMatrix om;
    om.z = z;
    om.alpha = alpha;
    om.n = n;
    om.J = J;
    om.mat = Eigen::MatrixXcd::Zero(J, J);
    om.mat(n - 1, n - 1) = Complex(0, 1) / (2.0 * tau(z, n, mc, mode));
    return om;
}

/// Reduced scalar pole condition; roots of eta are the resolvent poles.
inline Complex eta(Complex z, double eps, double alpha, int n, const SolverOptions& opt = {},
                   int k_fixed = 0) {
    const SheetMode mode = alpha > 0 ? SheetMode::attractive : SheetMode::repulsive;
    const OperatorMatrix R = r_matrix(z, eps, alpha, n, opt.J, opt.K, mode, k_fixed,
                                      opt.assembly_threads);
    const OperatorMatrix S = s_rank1(z, alpha, n, opt.J, mode);
    Eigen::MatrixXcd A =
        Eigen::MatrixXcd::Identity(opt.J, opt.J) - alpha * (R.mat - S.mat);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const double cond = svd.singularValues()(0) / svd.singularValues()(opt.J - 1);
    if (!(cond < opt.cond_limit))
        throw NearSingularError("eta: I - alpha T near singular (cond " + std::to_string(cond) +
                                "); z may sit near a different pole or eps is too large");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(opt.J);
    rhs(n - 1) = 1.0;
    const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
    const ModeClassification mc = classify_modes(alpha, n);
    return tau(z, n, mc, mode) - Complex(0, 1) * (alpha / 2.0) * x(n - 1);
}

struct PoleResult {
    Complex z{0.0, 0.0};
    double residual = 0.0;  // |eta| at z
    int iterations = 0;
    int J = 0, K = 0;
    int k_used = 0;
    Complex seed{0.0, 0.0};
    bool converged = false;
    std::string note;
    std::vector<std::pair<Complex, double>> trace;  // iterates and |eta|
};

/// Secant/Muller root search on eta, seeded at the perturbative pole.
inline PoleResult find_pole(double alpha, double eps, int n, const SolverOptions& opt = {},
                            std::optional<Complex> seed_opt = std::nullopt,
                            double tol_root = -1.0) {
    const double tol = tol_root > 0 ? tol_root : opt.tol_root;
    const ModeClassification mc = classify_modes(alpha, n);
    const Complex seed = seed_opt ? *seed_opt
                                  : (alpha > 0 ? pole_expansion(alpha, n, eps)
                                               : repulsive_pole(alpha, n, eps));
    PoleResult res;
    res.J = opt.J;
    res.K = opt.K;
    res.seed = seed;
    if (!mc.region_contains(seed)) throw RegionEscapeError("find_pole: seed outside region");

    // Freeze the channel count at the seed so eta stays smooth in z.
    const SheetMode mode = alpha > 0 ? SheetMode::attractive : SheetMode::repulsive;
    const int k_fixed =
        r_matrix(seed, eps, alpha, n, opt.J, opt.K, mode, 0, opt.assembly_threads).k_used;
    res.k_used = k_fixed;

    auto f = [&](Complex z) { return eta(z, eps, alpha, n, opt, k_fixed); };

    Complex z0 = seed, z1 = seed + Complex(1e-6 * (1.0 + std::abs(seed)), 0.0);
    Complex f0 = f(z0);
    res.trace.emplace_back(z0, std::abs(f0));
    if (std::abs(f0) < tol) {
        res.z = z0;
        res.residual = std::abs(f0);
        res.converged = true;
        return res;
    }
    Complex f1 = f(z1);
    res.trace.emplace_back(z1, std::abs(f1));
    Complex zp = z0, fp = f0;  // previous-previous, for the Muller fallback

    for (int it = 0; it < opt.max_iterations; ++it) {
        Complex z2;
        bool have_step = false;
        const Complex df = f1 - f0;
        if (std::abs(df) > 1e-300) {
            z2 = z1 - f1 * (z1 - z0) / df;
            have_step = true;
        }
        const bool stalling = it >= 2 && std::abs(f1) > 0.9 * std::abs(f0);
        if ((!have_step || stalling) && zp != z0 && z0 != z1) {
            // Muller step through (zp, z0, z1)
            const Complex q = (z1 - z0) / (z0 - zp);
            const Complex a = q * f1 - q * (1.0 + q) * f0 + q * q * fp;
            const Complex b = (2.0 * q + 1.0) * f1 - (1.0 + q) * (1.0 + q) * f0 + q * q * fp;
            const Complex cc = (1.0 + q) * f1;
            const Complex disc = std::sqrt(b * b - 4.0 * a * cc);
            const Complex den1 = b + disc, den2 = b - disc;
            const Complex den = std::abs(den1) > std::abs(den2) ? den1 : den2;
            if (std::abs(den) > 1e-300) {
                z2 = z1 - (z1 - z0) * 2.0 * cc / den;
                have_step = true;
            }
        }
        if (!have_step) break;

        // bisection damping against region escape: seeds are accurate, an
        // escape means overshoot, not absence of a root
        int halvings = 0;
        while (!mc.region_contains(z2) && halvings < 12) {
            z2 = 0.5 * (z1 + z2);
            ++halvings;
        }
        if (!mc.region_contains(z2))
            throw RegionEscapeError("find_pole: iteration left the continuation region");

        const Complex f2 = f(z2);
        res.trace.emplace_back(z2, std::abs(f2));
        zp = z0;
        fp = f0;
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = f2;
        res.iterations = it + 1;
        if (std::abs(f2) < tol) break;
    }

    res.z = z1;
    res.residual = std::abs(f1);
    res.converged = res.residual < tol && mc.region_contains(z1);
    if (res.converged && alpha > 0 && z1.imag() > tol) {
        res.converged = false;
        res.note = "root has positive imaginary part under attractive coupling";
    }
    return res;
}

struct DetCheck {
    Complex det;       // det(I - alpha R)
    double sigma_min;  // smallest singular value of I - alpha R
};

/// Independent pole detector: det / smallest singular value of I - alpha R.
inline DetCheck det_crosscheck(Complex z, double eps, double alpha, int n,
                               const SolverOptions& opt = {}, int k_fixed = 0) {
    const SheetMode mode = alpha > 0 ? SheetMode::attractive : SheetMode::repulsive;
    const OperatorMatrix R =
        r_matrix(z, eps, alpha, n, opt.J, opt.K, mode, k_fixed, opt.assembly_threads);
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(opt.J, opt.J) - alpha * R.mat;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    return {A.partialPivLu().determinant(), svd.singularValues()(opt.J - 1)};
}

/// Locate the minimum of sigma_min(I - alpha R(z)) by Nelder-Mead, without
/// consulting eta.  Cross-validates find_pole.
inline Complex min_singular_root(double alpha, double eps, int n, const SolverOptions& opt = {},
                                 std::optional<Complex> seed_opt = std::nullopt) {
    const Complex seed = seed_opt ? *seed_opt
                                  : (alpha > 0 ? pole_expansion(alpha, n, eps)
                                               : repulsive_pole(alpha, n, eps));
    const SheetMode mode = alpha > 0 ? SheetMode::attractive : SheetMode::repulsive;
    const int k_fixed =
        r_matrix(seed, eps, alpha, n, opt.J, opt.K, mode, 0, opt.assembly_threads).k_used;
    const ModeClassification mc = classify_modes(alpha, n);

    auto f = [&](double x, double y) {
        const Complex z(x, y);
        if (!mc.region_contains(z)) return 1e6;  // reject outside the region
        return det_crosscheck(z, eps, alpha, n, opt, k_fixed).sigma_min;
    };

    const double h = 1e-5 * (1.0 + std::abs(seed));
    std::array<std::array<double, 2>, 3> v{{{seed.real(), seed.imag()},
                                            {seed.real() + h, seed.imag()},
                                            {seed.real(), seed.imag() + h}}};
    std::array<double, 3> fv{f(v[0][0], v[0][1]), f(v[1][0], v[1][1]), f(v[2][0], v[2][1])};
    for (int it = 0; it < 200; ++it) {
        // order best..worst
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const auto vb = v[idx[0]], vs = v[idx[1]], vw = v[idx[2]];
        const double fb = fv[idx[0]], fs = fv[idx[1]], fw = fv[idx[2]];
        const double size = std::hypot(vb[0] - vw[0], vb[1] - vw[1]) +
                            std::hypot(vb[0] - vs[0], vb[1] - vs[1]);
        if (size < 1e-10 * (1.0 + std::abs(seed))) break;
        const double cx = 0.5 * (vb[0] + vs[0]), cy = 0.5 * (vb[1] + vs[1]);
        auto try_pt = [&](double s) {
            return std::array<double, 2>{cx + s * (cx - vw[0]), cy + s * (cy - vw[1])};
        };
        auto pr = try_pt(1.0);
        double fr = f(pr[0], pr[1]);
        if (fr < fb) {
            auto pe = try_pt(2.0);
            const double fe = f(pe[0], pe[1]);
            v[idx[2]] = fe < fr ? pe : pr;
            fv[idx[2]] = std::min(fe, fr);
        } else if (fr < fs) {
            v[idx[2]] = pr;
            fv[idx[2]] = fr;
        } else {
            auto pc = try_pt(fr < fw ? 0.5 : -0.5);
            const double fc = f(pc[0], pc[1]);
            if (fc < std::min(fr, fw)) {
                v[idx[2]] = pc;
                fv[idx[2]] = fc;
            } else {  // shrink toward best
                for (int i : {idx[1], idx[2]}) {
                    v[i] = {0.5 * (v[i][0] + vb[0]), 0.5 * (v[i][1] + vb[1])};
                    fv[i] = f(v[i][0], v[i][1]);
                }
            }
        }
    }
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    return Complex(v[idx[0]][0], v[idx[0]][1]);
}

struct SweepPoint {
    double eps = 0.0;
    PoleResult pole;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    PerturbativeCoefficients coeffs;  // module coefficients used for residuals
    Complex v_hat{0.0, 0.0};          // least-squares fit of z - E against [eps, eps^2]
    Complex w_hat{0.0, 0.0};
    double cubic_residual_slope = 0.0;  // log-log slope of |z - (E + V eps + W eps^2)|
    bool all_converged = false;
};

/// Pole sweep over a tilt grid plus coefficient extraction.
inline SweepResult sweep_and_fit(double alpha, int n, const std::vector<double>& eps_list,
                                 const SolverOptions& opt = {}, int threads = 1,
                                 bool seed_from_expansion = true) {
    if (eps_list.size() < 5) throw std::domain_error("sweep_and_fit: need at least 5 tilt values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (eps_list[i] <= 0.0 || eps_list[i] > 0.1)
            throw std::domain_error("sweep_and_fit: eps values must lie in (0, 0.1]");
        if (i > 0 && eps_list[i] <= eps_list[i - 1])
            throw std::domain_error("sweep_and_fit: eps grid must be strictly increasing");
    }
    SweepResult out;
    out.coeffs = perturbative_coefficients(alpha, n);
    out.points.resize(eps_list.size());

    detail::parallel_for(eps_list.size(), threads, [&](std::size_t i) {
        const double e = eps_list[i];
        SweepPoint pt;
        pt.eps = e;
        try {
            std::optional<Complex> seed;
            if (!seed_from_expansion) seed = Complex(out.coeffs.energy);
            pt.pole = find_pole(alpha, e, n, opt, seed);
        } catch (const std::exception& ex) {
            pt.pole.converged = false;
            pt.pole.note = ex.what();
        }
        out.points[i] = pt;
    });

    out.all_converged = true;
    for (const auto& p : out.points) out.all_converged = out.all_converged && p.pole.converged;

    // least-squares fit of z - E against [eps, eps^2] (real design, complex data)
    double s2 = 0, s3 = 0, s4 = 0;
    Complex b1(0, 0), b2(0, 0);
    for (const auto& p : out.points) {
        const double e = p.eps;
        const Complex y = p.pole.z - out.coeffs.energy;
        s2 += e * e;
        s3 += e * e * e;
        s4 += e * e * e * e;
        b1 += e * y;
        b2 += e * e * y;
    }
    const double det = s2 * s4 - s3 * s3;
    out.v_hat = (s4 * b1 - s3 * b2) / det;
    out.w_hat = (s2 * b2 - s3 * b1) / det;

    // residuals against the module coefficients, log-log slope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto& c = out.coeffs;
    for (const auto& p : out.points) {
        const Complex model = c.energy + c.v * p.eps + c.w * p.eps * p.eps;
        const double r = std::max(std::abs(p.pole.z - model), 1e-300);
        const double lx = std::log(p.eps), ly = std::log(r);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(out.points.size());
    out.cubic_residual_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

}  // namespace tiltwire
