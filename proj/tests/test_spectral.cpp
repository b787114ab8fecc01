#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tiltwire/spectral.hpp"

using namespace tiltwire;
using Catch::Approx;

TEST_CASE("embedded eigenvalue formula") {
    CHECK(embedded_eigenvalue(2.0, 1) == Approx(0.0).margin(1e-15));
    CHECK(embedded_eigenvalue(1.0, 2) == Approx(3.75));
    CHECK(embedded_eigenvalue(1e-8, 3) == Approx(9.0));
    CHECK_THROWS_AS(embedded_eigenvalue(-1.0, 2), std::domain_error);
    CHECK_THROWS_AS(embedded_eigenvalue(0.0, 2), std::domain_error);
}

TEST_CASE("spectrum summary classification") {
    const auto s1 = spectrum_summary(1.0, 3);
    REQUIRE(s1.discrete.size() == 1);
    CHECK(s1.discrete[0] == Approx(0.75));
    REQUIRE(s1.embedded.size() == 2);
    CHECK(s1.embedded[0] == Approx(3.75));
    CHECK(s1.embedded[1] == Approx(8.75));

    const auto s4 = spectrum_summary(4.0, 3);
    REQUIRE(s4.discrete.size() == 2);
    CHECK(s4.discrete[0] == Approx(-3.0));
    CHECK(s4.discrete[1] == Approx(0.0).margin(1e-15));
    REQUIRE(s4.embedded.size() == 1);
    CHECK(s4.embedded[0] == Approx(5.0));

    const auto sw = spectrum_summary(0.1, 1);
    REQUIRE(sw.discrete.size() == 1);
    CHECK(sw.discrete[0] == Approx(0.9975));
    CHECK(sw.embedded.empty());
    CHECK(sw.ess_threshold == 1.0);
}

TEST_CASE("discrete count identity") {
    // #discrete == #{k : k^2 < 1 + alpha^2/4}, exactly
    for (double alpha : {0.1, 1.0, 4.0, 10.0}) {
        const auto s = spectrum_summary(alpha, 40);
        int expected = 0;
        for (int k = 1; k <= 40; ++k)
            if (static_cast<double>(k) * k < 1.0 + alpha * alpha / 4.0) ++expected;
        CHECK(static_cast<int>(s.discrete.size()) == expected);
    }
}

TEST_CASE("mode classification") {
    const auto mc2 = classify_modes(1.0, 2);
    CHECK(mc2.energy == Approx(3.75));
    CHECK(mc2.k1 == 1);
    CHECK(mc2.open_channels == std::vector<int>{1});
    CHECK(mc2.odd_open_channels == std::vector<int>{1});
    CHECK(mc2.window_lo == Approx(1.0));
    CHECK(mc2.window_hi == Approx(4.0));

    const auto mc3 = classify_modes(1.0, 3);
    CHECK(mc3.energy == Approx(8.75));
    CHECK(mc3.open_channels == std::vector<int>{1, 2});
    CHECK(mc3.odd_open_channels == std::vector<int>{2});  // |3-1| even, excluded
    CHECK(mc3.k1 == 2);
    CHECK(mc3.window_lo == Approx(4.0));
    CHECK(mc3.window_hi == Approx(9.0));

    CHECK_THROWS_WITH(classify_modes(2.0 * std::sqrt(3.0), 2),
                      Catch::Matchers::ContainsSubstring("collision"));
    CHECK_THROWS_WITH(classify_modes(1.0, 1),
                      Catch::Matchers::ContainsSubstring("not an embedded eigenvalue"));
}

TEST_CASE("window holds exactly one level") {
    // gaps E_{k+1} - E_k = 2k+1 exceed the window width only fails if two
    // levels squeeze between adjacent thresholds; check a sample of couplings
    for (double alpha : {0.3, 1.0, 2.2, 3.7}) {
        for (int n = 2; n <= 6; ++n) {
            if (!check_admissible(alpha, n).ok) continue;
            const auto mc = classify_modes(alpha, n);
            int inside = 0;
            for (int m = 1; m <= 12; ++m) {
                const double em = embedded_eigenvalue(alpha, m);
                if (em > mc.window_lo && em < mc.window_hi) ++inside;
            }
            CHECK(inside == 1);
        }
    }
}

TEST_CASE("admissibility diagnostics") {
    CHECK(check_admissible(1.0, 2).ok);
    const auto col = check_admissible(2.0 * std::sqrt(3.0), 2);
    CHECK_FALSE(col.ok);
    CHECK(col.diagnostic.find("collision at k=1") != std::string::npos);
    const auto low = check_admissible(1.0, 1);
    CHECK_FALSE(low.ok);
    CHECK(low.diagnostic.find("below essential-spectrum threshold") != std::string::npos);
}

TEST_CASE("tau boundary values") {
    const auto mc = classify_modes(1.0, 2);
    const Complex t1 = tau(Complex(3.75, 0.0), 1, mc);
    CHECK(t1.real() == Approx(std::sqrt(2.75)).epsilon(1e-12));
    CHECK(t1.imag() == Approx(0.0).margin(1e-15));

    const Complex t2 = tau(Complex(3.75, 0.0), 2, mc);
    CHECK(t2.real() == Approx(0.0).margin(1e-15));
    CHECK(t2.imag() == Approx(0.5));  // i sqrt(4 - 3.75) = i alpha/2 at the level

    CHECK_THROWS_AS(tau(Complex(10.0, 0.0), 1, mc), std::domain_error);  // outside region
}

TEST_CASE("tau squares to z - k^2 on both branches") {
    const auto mc = classify_modes(1.0, 2);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> re(mc.window_lo + 0.01, mc.window_hi - 0.01);
    std::uniform_real_distribution<double> im(-mc.box_height * 0.9, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Complex z(re(rng), im(rng));
        if (!mc.region_contains(z)) continue;
        for (int k = 1; k <= 6; ++k) {
            const Complex t = tau(z, k, mc);
            const Complex expect = z - Complex(static_cast<double>(k) * k);
            CHECK(std::abs(t * t - expect) <= 1e-13 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("closed channels keep nonnegative imaginary part in the upper half plane") {
    const auto mc = classify_modes(1.0, 2);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(1.1, 3.9);
    std::uniform_real_distribution<double> im(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Complex z(re(rng), im(rng));
        for (int k = mc.k1 + 1; k <= mc.k1 + 5; ++k) CHECK(tau(z, k, mc).imag() >= 0.0);
    }
}

TEST_CASE("tau is continuous across the window") {
    const auto mc = classify_modes(1.0, 2);
    const double E = 3.75;
    double prev = 1e9;
    for (double delta : {1e-4, 1e-6}) {
        const Complex above = tau(Complex(E, delta), 1, mc);
        const Complex below = tau(Complex(E, -delta), 1, mc);
        const double gap = std::abs(above - below);
        CHECK(gap < 1e-3 * delta / 1e-4 * 10);  // shrinks with delta
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("tau is path independent inside the region") {
    const auto mc = classify_modes(1.0, 2);
    // two homotopic paths from z0 (upper half plane) to z1 (below the window):
    // straight segment vs. a two-leg detour through the window
    const Complex z0(2.0, 0.5), z1(3.2, -0.2);
    auto walk = [&](const std::vector<Complex>& waypoints, int k) {
        Complex prev_val = tau(waypoints.front(), k, mc);
        for (std::size_t seg = 0; seg + 1 < waypoints.size(); ++seg) {
            for (int s = 1; s <= 200; ++s) {
                const Complex z =
                    waypoints[seg] + (waypoints[seg + 1] - waypoints[seg]) * (s / 200.0);
                const Complex val = tau(z, k, mc);
                REQUIRE(std::abs(val - prev_val) < 0.05);  // no branch jumps
                prev_val = val;
            }
        }
        return prev_val;
    };
    for (int k = 1; k <= 4; ++k) {
        const Complex direct = walk({z0, z1}, k);
        const Complex detour = walk({z0, Complex(3.2, 0.4), z1}, k);
        CHECK(std::abs(direct - detour) < 1e-12);
    }
}

TEST_CASE("repulsive sheet flips only the resonant channel") {
    const auto mc = classify_modes(-1.0, 2);
    const Complex z(3.75, 0.0);
    CHECK(tau(z, 2, mc, SheetMode::repulsive) == -tau(z, 2, mc, SheetMode::attractive));
    CHECK(tau(z, 1, mc, SheetMode::repulsive) == tau(z, 1, mc, SheetMode::attractive));
    CHECK(tau(z, 3, mc, SheetMode::repulsive) == tau(z, 3, mc, SheetMode::attractive));
}

TEST_CASE("complex energy validity") {
    const auto mc = classify_modes(1.0, 2);
    CHECK(ComplexEnergy{Complex(3.75, 0.0), &mc}.valid());
    CHECK(ComplexEnergy{Complex(2.0, 1.0), &mc}.valid());
    CHECK_FALSE(ComplexEnergy{Complex(3.75, -10.0), &mc}.valid());
    CHECK_FALSE(ComplexEnergy{Complex(5.0, 0.0), &mc}.valid());
    CHECK_THROWS_AS((ComplexEnergy{Complex(5.0, 0.0), &mc}.require_valid()), std::domain_error);
}

TEST_CASE("waveguide params invariants") {
    CHECK_NOTHROW(WaveguideParams(1.0, 0.0));
    CHECK_THROWS_AS(WaveguideParams(0.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(WaveguideParams(1.0, -0.1), std::domain_error);
}
