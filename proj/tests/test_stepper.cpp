#include "doctest.h"

#include <cmath>

#include "rdcircle/grid.hpp"
#include "rdcircle/nonlinearity.hpp"
#include "rdcircle/rng.hpp"
#include "rdcircle/stepper.hpp"
#include "support/oracles.hpp"

using namespace rdcircle;

namespace {

double max_abs_diff(const StateVector& a, const StateVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    }
    return m;
}

Nonlinearity decay_nl() { return parse_nonlinearity("-u", 0.5); }
Nonlinearity chafee2_nl() { return parse_nonlinearity("2*u - u^3", 0.5); }

}  // namespace

TEST_SUITE("stepper") {

TEST_CASE("linear decay matches the exact mode solution") {
    // u_t = u_xx - u with u0 = cos x decays like exp(-2t) in mode 1.
    CircleGrid g(64);
    auto u0 = sample_state(g, [](double x) { return std::cos(x); });
    auto nl = decay_nl();
    const double want = std::exp(-2.0);

    auto cfg = StepperConfig::per_period(0.5, 128, Scheme::etdrk4);
    auto seg = evolve(u0, nl, cfg, 0.0, 1.0);
    CHECK(seg.times.back() == doctest::Approx(1.0));
    auto expected = sample_state(g, [&](double x) { return want * std::cos(x); });
    CHECK(max_abs_diff(seg.back(), expected) <= 1e-6 * want);

    auto cfg2 = StepperConfig::per_period(0.5, 1024, Scheme::imex_bdf2);
    auto seg2 = evolve(u0, nl, cfg2, 0.0, 1.0);
    CHECK(max_abs_diff(seg2.back(), expected) <= 1e-6 * want);
}

TEST_CASE("zero stays zero") {
    CircleGrid g(32);
    auto nl = parse_nonlinearity("0", 0.5);
    auto seg = evolve(StateVector(g), nl, StepperConfig::per_period(0.5, 16), 0.0, 1.0);
    CHECK(sup_norm(seg.back()) == 0.0);
}

TEST_CASE("homogeneous state follows the scalar ODE") {
    CircleGrid g(32);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 64, Scheme::etdrk4);
    auto seg = evolve(constant_state(g, 0.1), nl, cfg, 0.0, 5.0);
    const double want =
        oracle::ode_rk4([](double, double y) { return 2 * y - y * y * y; }, 0.1, 0.0, 5.0, 200000);
    for (double v : seg.back().values) {
        CHECK(oracle::rel_err(v, want) <= 1e-6);
    }
}

TEST_CASE("window must be a multiple of dt") {
    CircleGrid g(32);
    auto nl = chafee2_nl();
    CHECK_THROWS_AS(evolve(StateVector(g), nl, StepperConfig::per_period(0.5, 64), 0.0, 0.7),
                    PreconditionError);
}

TEST_CASE("blow-up is reported with the last valid time") {
    CircleGrid g(32);
    // u_t = u_xx + u^3 blows up from a large homogeneous state
    auto nl = parse_nonlinearity("u^3", 0.5);
    auto cfg = StepperConfig::per_period(0.5, 256);
    cfg.blowup_sup = 1e4;
    try {
        evolve(constant_state(g, 5.0), nl, cfg, 0.0, 10.0);
        FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
        CHECK(e.last_valid_time > 0.0);
        CHECK(e.last_valid_time < 1.0);  // 1/(2*25) = 0.02 in exact arithmetic
    }
}

TEST_CASE("poincare of a homogeneous state under linear decay") {
    CircleGrid g(32);
    auto nl = decay_nl();
    auto cfg = StepperConfig::per_period(0.5, 64, Scheme::etdrk4);
    auto p = poincare(constant_state(g, 2.0), nl, cfg);
    for (double v : p.values) {
        CHECK(oracle::rel_err(v, 2.0 * std::exp(-0.5)) <= 1e-9);
    }
}

TEST_CASE("poincare fixes the cubic equilibrium") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    const double root = std::sqrt(2.0);
    for (auto scheme : {Scheme::imex_bdf2, Scheme::etdrk4}) {
        auto cfg = StepperConfig::per_period(0.5, 128, scheme);
        auto p = poincare(constant_state(g, root), nl, cfg);
        CHECK(max_abs_diff(p, constant_state(g, root)) <= 1e-12);
    }
}

TEST_CASE("small mode-1 perturbations grow at the linear rate") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 256, Scheme::etdrk4);
    auto u0 = sample_state(g, [](double x) { return 1e-3 * std::cos(x); });
    auto p = poincare(u0, nl, cfg);
    // mode-1 multiplier exp((2 - 1) T)
    const double want = 1e-3 * std::exp(0.5);
    CHECK(oracle::rel_err(sup_norm(p), want) <= 1e-3);
}

TEST_CASE("poincare iterates of linear decay") {
    CircleGrid g(32);
    auto nl = decay_nl();
    auto cfg = StepperConfig::per_period(0.5, 64, Scheme::etdrk4);
    auto its = poincare_iterates(constant_state(g, 1.0), nl, cfg, 3);
    REQUIRE(its.size() == 4);
    for (int m = 0; m <= 3; ++m) {
        CHECK(oracle::rel_err(its[static_cast<std::size_t>(m)].values[0],
                              std::exp(-0.5 * m)) <= 1e-8);
    }
}

TEST_CASE("poincare iterates stay on a fixed point") {
    CircleGrid g(32);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 64);
    auto its = poincare_iterates(constant_state(g, std::sqrt(2.0)), nl, cfg, 5);
    for (const auto& u : its) {
        CHECK(max_abs_diff(u, constant_state(g, std::sqrt(2.0))) <= 1e-11);
    }
}

TEST_CASE("dissipative forcing contracts the iterates") {
    // Long-run sweep, cross-checked at two resolutions.
    auto nl = parse_nonlinearity("-u^3 + 0.2*cos(2*pi*t/T)", 0.5,
                                 Dissipativity{0.0, [](double r) { return r * r * r + 0.2; }, 0.6});
    auto rng = RandomStream::seeded(41);
    StateVector u64 = oracle::with_sup_norm(oracle::random_band_limited(CircleGrid(64), 6, rng), 5.0);
    StateVector u32(CircleGrid(32));
    for (int i = 0; i < 32; ++i) u32.values[static_cast<std::size_t>(i)] =
        u64.values[static_cast<std::size_t>(2 * i)];

    auto run = [&](const StateVector& u0, int steps) {
        auto cfg = StepperConfig::per_period(0.5, steps);
        return poincare_iterates(u0, nl, cfg, 40);
    };
    auto its = run(u64, 256);

    std::vector<double> sups;
    for (const auto& u : its) sups.push_back(sup_norm(u));
    // eventually non-increasing
    std::size_t settle = 0;
    for (std::size_t m = 1; m < sups.size(); ++m) {
        if (sups[m] > sups[m - 1] + 1e-12) settle = m;
    }
    CHECK(settle < sups.size() - 5);
    CHECK(sups.back() <= 0.6 + 0.1);

    auto its32 = run(u32, 256);
    CHECK(std::abs(sup_norm(its32.back()) - sups.back()) <= 1e-5);
}

TEST_CASE("tangent evolution at a constant background matches the mode rate") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 128, Scheme::etdrk4);
    auto traj = evolve(StateVector(g), nl, cfg, 0.0, 0.5);
    auto v0 = sample_state(g, [](double x) { return std::cos(x); });
    auto tv = tangent_evolve(traj, v0);
    const double want = std::exp(0.5);  // exp((2 - 1) T)
    auto expected = sample_state(g, [&](double x) { return want * std::cos(x); });
    CHECK(max_abs_diff(tv.back(), expected) <= 1e-6 * want);
}

TEST_CASE("tangent of zero is zero and the map is linear") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 64);
    auto rng = RandomStream::seeded(12);
    auto u0 = 0.2 * oracle::random_band_limited(g, 5, rng);
    auto traj = evolve(u0, nl, cfg, 0.0, 0.5);

    CHECK(sup_norm(tangent_evolve(traj, StateVector(g)).back()) == 0.0);

    auto v = oracle::random_band_limited(g, 8, rng);
    auto w = oracle::random_band_limited(g, 8, rng);
    const double a = 1.3, b = -0.4;
    auto lhs = tangent_evolve(traj, a * v + b * w).back();
    auto rhs = a * tangent_evolve(traj, v).back() + b * tangent_evolve(traj, w).back();
    CHECK(max_abs_diff(lhs, rhs) <= 1e-10 * std::max(1.0, sup_norm(lhs)));
}

TEST_CASE("dp_apply at the origin reproduces mode multipliers") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 128, Scheme::etdrk4);
    auto phi = StateVector(g);

    auto v_const = constant_state(g, 1.0);
    auto out0 = dp_apply(phi, v_const, nl, cfg);
    for (double v : out0.values) CHECK(oracle::rel_err(v, std::exp(1.0)) <= 1e-6);

    auto v2 = sample_state(g, [](double x) { return std::cos(2 * x); });
    auto out2 = dp_apply(phi, v2, nl, cfg);
    auto expected = sample_state(g, [](double x) { return std::exp(-1.0) * std::cos(2 * x); });
    CHECK(max_abs_diff(out2, expected) <= 1e-6 * std::exp(-1.0));
}

TEST_CASE("dp_apply agrees with a central finite difference") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 256);
    auto rng = RandomStream::seeded(77);
    auto u0 = 0.4 * oracle::random_band_limited(g, 5, rng);
    auto v0 = oracle::random_band_limited(g, 6, rng);

    auto jv = dp_apply(u0, v0, nl, cfg);

    const double eps = 1e-6;
    auto plus = poincare(u0 + eps * v0, nl, cfg);
    auto minus = poincare(u0 + (-eps) * v0, nl, cfg);
    auto fd = (1.0 / (2 * eps)) * (plus - minus);
    CHECK(l2_norm(fd - jv) <= 1e-4 * l2_norm(jv));
}

TEST_CASE("halving dt gains at least a factor 3.5 of accuracy") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto u0 = sample_state(g, [](double x) { return 0.5 + 0.3 * std::cos(x); });

    auto terminal = [&](int steps) {
        auto cfg = StepperConfig::per_period(0.5, steps, Scheme::imex_bdf2);
        return evolve(u0, nl, cfg, 0.0, 0.5).back();
    };
    auto ref = terminal(1024);  // dt/8 reference
    const double e_h = max_abs_diff(terminal(128), ref);
    const double e_h2 = max_abs_diff(terminal(256), ref);
    CHECK(e_h / e_h2 >= 3.5);
}

TEST_CASE("homogeneous states stay homogeneous") {
    CircleGrid g(64);
    auto nl = parse_nonlinearity("(2 + 0.5*cos(2*pi*t/T))*u - u^3", 0.5);
    auto cfg = StepperConfig::per_period(0.5, 128);
    auto its = poincare_iterates(constant_state(g, 1.2), nl, cfg, 20);
    for (const auto& u : its) {
        double lo = u.values[0], hi = u.values[0];
        for (double v : u.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo <= 1e-10);
    }
}

TEST_CASE("even initial data stays even when f is z-symmetric") {
    CircleGrid g(64);
    auto nl = chafee2_nl();
    auto cfg = StepperConfig::per_period(0.5, 128);
    auto u0 = sample_state(g, [](double x) { return 0.4 * std::cos(x) + 0.2 * std::cos(3 * x); });
    auto seg = evolve(u0, nl, cfg, 0.0, 1.0);
    const auto& u = seg.back();
    for (int i = 1; i < g.n() / 2; ++i) {
        CHECK(std::abs(u.values[static_cast<std::size_t>(i)] -
                       u.values[static_cast<std::size_t>(g.n() - i)]) <= 1e-8);
    }
}

TEST_CASE("dissipativity audit: cubic damping enters the ball") {
    auto nl = parse_nonlinearity(
        "-u^3", 0.5, Dissipativity{0.0, [](double r) { return r * r * r; }, 0.1});
    CircleGrid g(64);
    auto rng = RandomStream::seeded(4242);
    std::vector<StateVector> seeds;
    for (int i = 0; i < 4; ++i) {
        seeds.push_back(
            oracle::with_sup_norm(oracle::random_band_limited(g, 6, rng, 0.1), 3.0));
    }
    auto cfg = StepperConfig::per_period(0.5, 128);
    auto rep = check_dissipativity(nl, cfg, seeds, 20.0);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.blowup_seeds.empty());
    CHECK(rep.entered_ball);
    CHECK(rep.time_to_ball <= 20.0);
    CHECK(rep.final_sup <= 0.1 + 0.01);
}

TEST_CASE("dissipativity audit: seed already inside the ball stays") {
    auto nl = parse_nonlinearity(
        "-u^3", 0.5, Dissipativity{0.0, [](double r) { return r * r * r; }, 0.1});
    CircleGrid g(32);
    std::vector<StateVector> seeds{constant_state(g, 0.05)};
    auto rep = check_dissipativity(nl, StepperConfig::per_period(0.5, 64), seeds, 5.0);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.entered_ball);
    CHECK(rep.time_to_ball == 0.0);
    CHECK(rep.envelope_ok);
    CHECK(rep.passed());
}

TEST_CASE("dissipativity audit flags a violated sign hypothesis") {
    // f = +u violates y f(t,y,0) < 0
    auto nl = parse_nonlinearity("u", 0.5,
                                 Dissipativity{0.0, [](double r) { return r; }, 0.5});
    CircleGrid g(32);
    std::vector<StateVector> seeds{constant_state(g, 0.1)};
    auto rep = check_dissipativity(nl, StepperConfig::per_period(0.5, 64), seeds, 2.0);
    CHECK(!rep.hypothesis_ok);
    CHECK(!rep.passed());
}

}  // TEST_SUITE
