/*
 * quadrature.hpp — ground-truth evaluation of the double integrals
 *
 *     int_0^pi int_0^pi w(|x-y|) sin(ax) sin(bx) sin(cy) sin(dy) dx dy
 *
 * with w(t) = t^m (m = 0,1,2) or w(t) = e^{ct}.  The integrand is smooth on
 * each side of the diagonal; the square is split at x = y and each triangle
 * {x > y} is mapped to a product domain via (x, y) = (x, x t), t in (0,1),
 * Jacobian x, which restores spectral Gauss-Legendre accuracy.
 *
 * A tensor rule of order p resolves sine frequencies up to roughly p/2; every
 * call cross-checks against the half-order rule and refuses to return a value
 * it cannot vouch for.  q_converged doubles the order until two successive
 * values agree to the requested tolerance.
 */

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "tiltwire/spectral.hpp"

namespace tiltwire {

inline constexpr int kQuadDefaultOrder = 64;
inline constexpr int kQuadOrderCap = 512;
inline constexpr double kPi = 3.14159265358979323846;

struct QuadratureError : std::runtime_error {
    Complex best_estimate;
    double achieved;
    QuadratureError(const std::string& msg, Complex best, double err)
        : std::runtime_error(msg), best_estimate(best), achieved(err) {}
};

/// Gauss-Legendre rule on (-1, 1).  Nodes by Newton iteration on P_p.
struct QuadratureRule {
    int order;
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit QuadratureRule(int p) : order(p) {
        if (p < 2) throw std::domain_error("QuadratureRule: order must be >= 2");
        nodes.resize(p);
        weights.resize(p);
        for (int i = 0; i < (p + 1) / 2; ++i) {
            // Tricomi-style initial guess, then Newton on P_p(x).
            double x = std::cos(kPi * (i + 0.75) / (p + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= p; ++j) {
                    const double pj = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = pj;
                }
                dp = p * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[p - 1 - i] = x;
            weights[i] = w;
            weights[p - 1 - i] = w;
        }
    }
};

/// Cached rules; construction serialized, lookups return shared immutable rules.
inline std::shared_ptr<const QuadratureRule> gauss_legendre(int order) {
    static std::mutex m;
    static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    auto rule = std::make_shared<const QuadratureRule>(order);
    cache.emplace(order, rule);
    return rule;
}

namespace detail {

/// Integral over one triangle {0 < y < x < pi} of w(x-y) sin(ax)sin(bx)sin(cy)sin(dy).
template <typename Weight>
Complex triangle(const Weight& w, int a, int b, int c, int d, const QuadratureRule& r) {
    const int p = r.order;
    Complex total(0.0, 0.0);
    for (int i = 0; i < p; ++i) {
        const double x = (r.nodes[i] + 1.0) * (kPi / 2.0);
        const double wx = r.weights[i] * (kPi / 2.0) * x;  // Jacobian x
        const double sx = std::sin(a * x) * std::sin(b * x);
        Complex inner(0.0, 0.0);
        for (int q = 0; q < p; ++q) {
            const double t = (r.nodes[q] + 1.0) * 0.5;
            const double wt = r.weights[q] * 0.5;
            const double y = x * t;
            inner += wt * w(x - y) * std::sin(c * y) * std::sin(d * y);
        }
        total += wx * sx * inner;
    }
    return total;
}

template <typename Weight>
Complex square(const Weight& w, int a, int b, int c, int d, int order) {
    auto rule = gauss_legendre(order);
    return triangle(w, a, b, c, d, *rule) + triangle(w, c, d, a, b, *rule);
}

template <typename Weight>
Complex checked(const Weight& w, int a, int b, int c, int d, int order, const char* name) {
    const Complex v = square(w, a, b, c, d, order);
    const Complex ref = square(w, a, b, c, d, order + 24);
    const double err = std::abs(v - ref);
    // Entire integrands: once resolved, successive orders agree to near machine
    // precision, so any visible disagreement flags an under-resolved frequency.
    if (err > 1e-8 * std::max(1.0, std::abs(v)))
        throw QuadratureError(std::string(name) + ": order " + std::to_string(order) +
                                  " too small for frequencies " + std::to_string(a) + "," +
                                  std::to_string(b) + "," + std::to_string(c) + "," +
                                  std::to_string(d),
                              v, err);
    return v;
}

}  // namespace detail

/// int int |x-y|^m sin(ax)sin(bx)sin(cy)sin(dy), m in {0,1,2}.
inline double q_poly(int m, int a, int b, int c, int d, int order = kQuadDefaultOrder) {
    if (m < 0 || m > 2) throw std::domain_error("q_poly: m must be 0, 1 or 2");
    if (a < 1 || b < 1 || c < 1 || d < 1) throw std::domain_error("q_poly: frequencies must be >= 1");
    if (order < 8) throw std::domain_error("q_poly: order must be >= 8");
    auto w = [m](double t) { return m == 0 ? 1.0 : (m == 1 ? t : t * t); };
    return detail::checked(w, a, b, c, d, order, "q_poly").real();
}

/// int int e^{c |x-y|} sin(ax)sin(bx)sin(cy)sin(dy).
inline Complex q_exp(Complex cexp, int a, int b, int c, int d, int order = kQuadDefaultOrder) {
    if (a < 1 || b < 1 || c < 1 || d < 1) throw std::domain_error("q_exp: frequencies must be >= 1");
    if (order < 8) throw std::domain_error("q_exp: order must be >= 8");
    if (cexp.real() * kPi > 700.0)
        throw std::domain_error("q_exp: exponent would overflow (Re c * pi > 700)");
    auto w = [cexp](double t) { return std::exp(cexp * t); };
    return detail::checked(w, a, b, c, d, order, "q_exp");
}

/// Integrand description for q_converged.
struct IntegralSpec {
    int m = 0;               // used when !exponential
    Complex cexp{0.0, 0.0};  // used when exponential
    bool exponential = false;
    int a = 1, b = 1, c = 1, d = 1;
};

struct ConvergedValue {
    Complex value;
    double error;  // |last - previous|
    int order;
};

/// Double the order until two successive values differ by < tol.
inline ConvergedValue q_converged(const IntegralSpec& spec, double tol,
                                  int start_order = 32, int order_cap = kQuadOrderCap) {
    if (tol <= 0.0) throw std::domain_error("q_converged: tol must be > 0");
    auto eval = [&spec](int order) -> Complex {
        auto w_poly = [&spec](double t) {
            return spec.m == 0 ? 1.0 : (spec.m == 1 ? t : t * t);
        };
        auto w_exp = [&spec](double t) { return std::exp(spec.cexp * t); };
        return spec.exponential ? detail::square(w_exp, spec.a, spec.b, spec.c, spec.d, order)
                                : detail::square(w_poly, spec.a, spec.b, spec.c, spec.d, order);
    };
    Complex prev = eval(start_order);
    for (int order = 2 * start_order; order <= order_cap; order *= 2) {
        const Complex cur = eval(order);
        const double diff = std::abs(cur - prev);
        if (diff < tol) return {cur, diff, order};
        prev = cur;
    }
    throw QuadratureError("q_converged: order cap " + std::to_string(order_cap) +
                              " reached without convergence",
                          prev, std::abs(prev));
}

}  // namespace tiltwire
