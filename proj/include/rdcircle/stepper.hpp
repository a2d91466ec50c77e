#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rdcircle/grid.hpp"
#include "rdcircle/nonlinearity.hpp"

namespace rdcircle {

enum class Scheme { imex_bdf2, etdrk4 };

/// Time-stepping parameters. dt must divide the nonlinearity period exactly,
/// so the Poincare map is a whole number of steps.
struct StepperConfig {
    double dt = 0.0;
    Scheme scheme = Scheme::imex_bdf2;
    bool dealias = true;      // 2/3 rule on the (non)linear term transform
    double blowup_sup = 1e6;  // sup-norm bound; beyond it the run aborts

    static StepperConfig per_period(double period_T, int steps,
                                    Scheme scheme = Scheme::imex_bdf2, bool dealias = true) {
        StepperConfig cfg;
        cfg.dt = period_T / steps;
        cfg.scheme = scheme;
        cfg.dealias = dealias;
        return cfg;
    }
};

/// Solution samples at the macro steps of one integration window. nl is
/// empty for linear trajectories driven by explicit coefficients.
struct TrajectorySegment {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::optional<Nonlinearity> nl;
    StepperConfig cfg;

    const StateVector& front() const { return states.front(); }
    const StateVector& back() const { return states.back(); }
    std::size_t size() const { return states.size(); }
};

/// Number of macro steps covering [t0, t1]; throws unless the window is an
/// integer multiple of cfg.dt.
int steps_between(const StepperConfig& cfg, double t0, double t1);
void require_period_aligned(const Nonlinearity& nl, const StepperConfig& cfg);

// -- nonlinear flow ----------------------------------------------------------

TrajectorySegment evolve(const StateVector& u0, const Nonlinearity& nl,
                         const StepperConfig& cfg, double t0, double t1);

/// u(T, .; u0): the Poincare map.
StateVector poincare(const StateVector& u0, const Nonlinearity& nl, const StepperConfig& cfg);

/// {u0, P(u0), ..., P^n(u0)}. Blow-up at iterate m < n rethrows BlowUpError
/// with last_valid_iterate = m.
std::vector<StateVector> poincare_iterates(const StateVector& u0, const Nonlinearity& nl,
                                           const StepperConfig& cfg, int n);

// -- linearized flow ---------------------------------------------------------

/// Propagator of the linearization v_t = v_xx + c(t,x) v_x + d(t,x) v along a
/// nonlinear trajectory (c = df_dz, d = df_dy along u) or along explicitly
/// given coefficient functions. The background pass caches the nodal
/// coefficient arrays at every stage, so repeated tangent applications only
/// step the linear equation.
class LinearizedFlow {
public:
    /// Linearization along the solution of u_t = u_xx + f starting at u0.
    LinearizedFlow(const StateVector& u0, const Nonlinearity& nl, const StepperConfig& cfg,
                   double t0, double t1);

    /// Linear equation with explicit coefficients c(t,x), d(t,x) on a window.
    LinearizedFlow(const CircleGrid& grid,
                   std::function<double(double, double)> c,
                   std::function<double(double, double)> d, const StepperConfig& cfg,
                   double t0, double t1);

    /// v(t1) for initial tangent v(t0) = v0. Linear in v0.
    StateVector apply(const StateVector& v0) const;

    /// Tangent samples at every macro step.
    TrajectorySegment apply_with_history(const StateVector& v0) const;

    const TrajectorySegment& background() const;
    double t0() const;
    double t1() const;

    ~LinearizedFlow();
    LinearizedFlow(LinearizedFlow&&) noexcept;
    LinearizedFlow& operator=(LinearizedFlow&&) noexcept;
    LinearizedFlow(const LinearizedFlow&) = delete;
    LinearizedFlow& operator=(const LinearizedFlow&) = delete;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// DP(u0) v0: one-period propagation of the linearization.
StateVector dp_apply(const StateVector& u0, const StateVector& v0, const Nonlinearity& nl,
                     const StepperConfig& cfg);

/// Linearization along a stored trajectory (replayed from its initial state
/// with the segment's own nonlinearity and stepper settings).
TrajectorySegment tangent_evolve(const TrajectorySegment& traj, const StateVector& v0);

// -- dissipativity audit -----------------------------------------------------

struct DissipativityOptions {
    double envelope_tol = 0.05;  // slack on delta + R exp(-zeta t)
    double enter_tol = 0.01;     // absorbing-ball entry margin
};

struct DissipativityReport {
    bool hypothesis_ok = false;  // sampled sign condition y f(t,y,0) < 0, |y| >= delta
    double delta = 0.0;
    double R = 0.0;
    bool zeta_fitted = false;
    double zeta_hat = 0.0;
    double fit_residual = 0.0;
    bool envelope_ok = false;
    bool entered_ball = false;
    double time_to_ball = -1.0;
    double final_sup = 0.0;
    std::vector<std::vector<std::pair<double, double>>> envelopes;  // per seed (t, sup)
    std::vector<int> blowup_seeds;

    bool passed() const {
        return hypothesis_ok && envelope_ok && entered_ball && blowup_seeds.empty() &&
               (!zeta_fitted || zeta_hat > 0.0);
    }
};

DissipativityReport check_dissipativity(const Nonlinearity& nl, const StepperConfig& cfg,
                                        const std::vector<StateVector>& seeds, double horizon,
                                        const DissipativityOptions& opt = {});

}  // namespace rdcircle
