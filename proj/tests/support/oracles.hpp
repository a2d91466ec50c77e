#pragma once

// Test-only reference computations, independent of the library's stepping
// path: dense classical RK4 for scalar ODEs, Simpson quadrature, bisection
// root finding, and random band-limited fields.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rdcircle/grid.hpp"
#include "rdcircle/rng.hpp"

namespace oracle {

/// y' = f(t, y) integrated with classical RK4.
inline double ode_rk4(const std::function<double(double, double)>& f, double y0, double t0,
                      double t1, int n_steps) {
    const double h = (t1 - t0) / n_steps;
    double y = y0;
    double t = t0;
    for (int i = 0; i < n_steps; ++i) {
        const double k1 = f(t, y);
        const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t = t0 + (i + 1) * h;
    }
    return y;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    return acc * h / 3.0;
}

/// Root of g on [lo, hi] with a sign change.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
    double flo = g(lo);
    if (flo * g(hi) > 0) throw std::runtime_error("bisect: no sign change");
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if ((flo <= 0 && fm <= 0) || (flo >= 0 && fm >= 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Fixed point of the period map of y' = f(t, y) located by bisection on
/// y0 -> phi_T(y0) - y0 over [lo, hi].
inline double periodic_point(const std::function<double(double, double)>& f, double period,
                             double lo, double hi, int ode_steps = 20000) {
    auto gap = [&](double y0) { return ode_rk4(f, y0, 0.0, period, ode_steps) - y0; };
    return bisect(gap, lo, hi);
}

inline rdcircle::StateVector random_band_limited(const rdcircle::CircleGrid& g, int max_mode,
                                                 rdcircle::RandomStream& rng,
                                                 double mean_scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(g.n()), 0.0);
    for (int k = 0; k <= max_mode; ++k) {
        const double a = (k == 0 ? mean_scale : 1.0) * rng.uniform(-1.0, 1.0);
        const double b = k == 0 ? 0.0 : rng.uniform(-1.0, 1.0);
        for (int i = 0; i < g.n(); ++i) {
            v[static_cast<std::size_t>(i)] +=
                a * std::cos(k * g.node(i)) + b * std::sin(k * g.node(i));
        }
    }
    return rdcircle::StateVector(g, std::move(v));
}

/// Rescales to a prescribed sup-norm.
inline rdcircle::StateVector with_sup_norm(rdcircle::StateVector s, double target) {
    const double cur = rdcircle::sup_norm(s);
    if (cur > 0) {
        for (double& x : s.values) x *= target / cur;
    }
    return s;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace oracle
