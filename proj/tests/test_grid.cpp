#include "doctest.h"

#include <cmath>
#include <vector>

#include "rdcircle/grid.hpp"
#include "rdcircle/rng.hpp"

using namespace rdcircle;

namespace {

/// Band-limited random field with modes |k| <= max_mode.
StateVector random_band_limited(const CircleGrid& g, int max_mode, RandomStream& rng) {
    std::vector<double> v(static_cast<std::size_t>(g.n()), 0.0);
    for (int k = 0; k <= max_mode; ++k) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = k == 0 ? 0.0 : rng.uniform(-1.0, 1.0);
        for (int i = 0; i < g.n(); ++i) {
            v[static_cast<std::size_t>(i)] +=
                a * std::cos(k * g.node(i)) + b * std::sin(k * g.node(i));
        }
    }
    return StateVector(g, std::move(v));
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    }
    return m;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid construction rejects bad sizes") {
    CHECK_THROWS_AS(CircleGrid(6), PreconditionError);
    CHECK_THROWS_AS(CircleGrid(48), PreconditionError);
    CircleGrid g(64);
    CHECK(g.n() == 64);
    CHECK(g.spacing() * g.n() == doctest::Approx(kTwoPi).epsilon(1e-15));
}

TEST_CASE("derivative of sin is cos") {
    CircleGrid g(64);
    auto s = sample_state(g, [](double x) { return std::sin(x); });
    auto d = spectral_derivative(s, 1);
    auto expected = sample_state(g, [](double x) { return std::cos(x); });
    CHECK(max_abs_diff(d, expected) <= 1e-12);
}

TEST_CASE("second derivative of cos(2x) is -4 cos(2x)") {
    CircleGrid g(64);
    auto s = sample_state(g, [](double x) { return std::cos(2 * x); });
    auto d = spectral_derivative(s, 2);
    auto expected = sample_state(g, [](double x) { return -4.0 * std::cos(2 * x); });
    CHECK(max_abs_diff(d, expected) <= 1e-12);
}

TEST_CASE("derivative of a constant vanishes") {
    CircleGrid g(32);
    auto d = spectral_derivative(constant_state(g, 3.0), 1);
    CHECK(sup_norm(d) <= 1e-13);
}

TEST_CASE("derivative rejects non-finite input") {
    CircleGrid g(16);
    StateVector s(g);
    s.values[3] = std::nan("");
    CHECK_THROWS_AS(spectral_derivative(s, 1), InvalidStateError);
}

TEST_CASE("derivative is linear on random resolved fields") {
    CircleGrid g(64);
    auto rng = RandomStream::seeded(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = random_band_limited(g, 12, rng);
        auto v = random_band_limited(g, 12, rng);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        StateVector combo = a * u + b * v;
        StateVector lhs = spectral_derivative(combo, 1);
        StateVector rhs = a * spectral_derivative(u, 1) + b * spectral_derivative(v, 1);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * std::max(1.0, sup_norm(lhs)));
    }
}

TEST_CASE("interpolation of a resolved mode") {
    CircleGrid g(64);
    auto s = sample_state(g, [](double x) { return std::sin(3 * x); });
    CHECK(interpolate(s, kTwoPi / 12.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interpolation reproduces nodal values") {
    CircleGrid g(32);
    auto rng = RandomStream::seeded(7);
    auto s = random_band_limited(g, 10, rng);
    for (int i = 0; i < g.n(); i += 5) {
        CHECK(interpolate(s, g.node(i)) ==
              doctest::Approx(s.values[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("interpolation matches the closed form off the nodes") {
    // Oracle: direct evaluation of sin(x) + 0.5 cos(4x).
    CircleGrid g(64);
    auto s = sample_state(g, [](double x) { return std::sin(x) + 0.5 * std::cos(4 * x); });
    const double x = 0.3;
    const double oracle = std::sin(x) + 0.5 * std::cos(4 * x);
    CHECK(std::abs(interpolate(s, x) - oracle) <= 1e-12);
}

TEST_CASE("refinement preserves a resolved cosine") {
    CircleGrid coarse(16);
    auto s = sample_state(coarse, [](double x) { return std::cos(x); });
    auto fine = refine(s, 64);
    auto expected = sample_state(CircleGrid(64), [](double x) { return std::cos(x); });
    CHECK(max_abs_diff(fine, expected) <= 1e-12);
}

TEST_CASE("refinement to the same size is the identity") {
    CircleGrid g(32);
    auto rng = RandomStream::seeded(3);
    auto s = random_band_limited(g, 8, rng);
    auto r = refine(s, 32);
    CHECK(max_abs_diff(s, r) == 0.0);
}

TEST_CASE("refinement rejects coarsening") {
    CircleGrid g(32);
    CHECK_THROWS_AS(refine(StateVector(g), 16), UnsupportedCoarsenError);
}

TEST_CASE("refinement round-trip preserves original nodes") {
    // Oracle: the original nodal values are a subsample of the fine grid.
    CircleGrid g(32);
    auto rng = RandomStream::seeded(17);
    auto s = random_band_limited(g, 10, rng);
    auto fine = refine(s, 128);
    double m = 0.0;
    for (int i = 0; i < g.n(); ++i) {
        m = std::max(m, std::abs(fine.values[static_cast<std::size_t>(4 * i)] -
                                 s.values[static_cast<std::size_t>(i)]));
    }
    CHECK(m <= 1e-12);
}

TEST_CASE("fractional norm of constants") {
    CircleGrid g(64);
    for (double alpha : {0.25, 0.5, 0.875, 1.0}) {
        CHECK(fractional_norm(constant_state(g, -2.5), alpha) ==
              doctest::Approx(2.5 * std::sqrt(kTwoPi)).epsilon(1e-12));
    }
    // alpha = 0 reduces to twice the L2 norm (A^0 is the identity).
    CHECK(fractional_norm(constant_state(g, -2.5), 0.0) ==
          doctest::Approx(5.0 * std::sqrt(kTwoPi)).epsilon(1e-12));
}

TEST_CASE("fractional norm of a single mode") {
    CircleGrid g(64);
    for (int k : {1, 3, 7}) {
        auto s = sample_state(g, [k](double x) { return std::sin(k * x); });
        for (double alpha : {0.25, 0.875}) {
            const double expected = (std::pow(k, 2.0 * alpha) + 1.0) * std::sqrt(kTwoPi / 2.0);
            CHECK(fractional_norm(s, alpha) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("fractional norm matches a direct coefficient-sum oracle") {
    // Oracle: assemble the weighted sums from the known coefficients of an
    // explicit trigonometric polynomial.
    CircleGrid g(64);
    const double a0 = 0.7, a2 = -1.3, b5 = 0.4;
    auto s = sample_state(g, [=](double x) {
        return a0 + a2 * std::cos(2 * x) + b5 * std::sin(5 * x);
    });
    const double alpha = 0.875;
    // |c_0| = |a0|; |c_2| = |a2|/2 (twice); |c_5| = |b5|/2 (twice).
    const double frac = 2.0 * std::pow(2.0, 4 * alpha) * (a2 * a2 / 4.0) +
                        2.0 * std::pow(5.0, 4 * alpha) * (b5 * b5 / 4.0);
    const double l2 = a0 * a0 + 2.0 * (a2 * a2 / 4.0) + 2.0 * (b5 * b5 / 4.0);
    const double oracle = std::sqrt(kTwoPi * frac) + std::sqrt(kTwoPi * l2);
    CHECK(fractional_norm(s, alpha) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("fractional norm at alpha 0 doubles the L2 norm") {
    CircleGrid g(64);
    auto rng = RandomStream::seeded(23);
    auto s = random_band_limited(g, 9, rng);
    CHECK(fractional_norm(s, 0.0) == doctest::Approx(2.0 * l2_norm(s)).epsilon(1e-12));
}

TEST_CASE("fractional norm is monotone in alpha away from the mean") {
    CircleGrid g(64);
    auto rng = RandomStream::seeded(29);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_band_limited(g, 8, rng);
        // remove the mean so all energy sits at |k| >= 1
        Spectrum sp = to_spectrum(s);
        sp.coeff[0] = 0.0;
        s = from_spectrum(sp);
        double prev = 0.0;
        for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double cur = fractional_norm(s, alpha);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("refinement preserves the fractional norm of band-limited fields") {
    CircleGrid g(32);
    auto rng = RandomStream::seeded(31);
    auto s = random_band_limited(g, 10, rng);
    CHECK(fractional_norm(refine(s, 128), 0.875) ==
          doctest::Approx(fractional_norm(s, 0.875)).epsilon(1e-10));
}

TEST_CASE("grid mismatch is an error") {
    StateVector a{CircleGrid(32)};
    StateVector b{CircleGrid(64)};
    CHECK_THROWS_AS(a + b, GridMismatchError);
}

TEST_CASE("translate shifts a resolved field") {
    CircleGrid g(64);
    auto s = sample_state(g, [](double x) { return std::sin(2 * x) + 0.3 * std::cos(x); });
    const double a = 0.7;
    auto t = translate(s, a);
    auto expected =
        sample_state(g, [a](double x) { return std::sin(2 * (x + a)) + 0.3 * std::cos(x + a); });
    CHECK(max_abs_diff(t, expected) <= 1e-12);
}

}  // TEST_SUITE
