#include "rdcircle/stepper.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace rdcircle {

namespace {

using Cplx = std::complex<double>;
using Cvec = std::vector<Cplx>;

constexpr int kContourPoints = 32;

/// Per-(grid, dt) mode-wise operators. ETDRK4 coefficients are evaluated by
/// contour averaging around each L*dt value, which is stable through the
/// removable singularity at k = 0.
struct ModeOps {
    int n = 0;
    int m = 0;  // stored modes, n/2 + 1
    double dt = 0.0;
    int kcut = 0;  // highest mode kept by the dealias rule
    std::vector<double> bdf_denom;
    std::vector<double> E, E2, Q, f1, f2, f3;
};

ModeOps make_mode_ops(const CircleGrid& g, const StepperConfig& cfg) {
    ModeOps ops;
    ops.n = g.n();
    ops.m = g.spectrum_size();
    ops.dt = cfg.dt;
    ops.kcut = cfg.dealias ? g.n() / 3 : g.nyquist();
    ops.bdf_denom.resize(static_cast<std::size_t>(ops.m));
    ops.E.resize(static_cast<std::size_t>(ops.m));
    ops.E2.resize(static_cast<std::size_t>(ops.m));
    ops.Q.resize(static_cast<std::size_t>(ops.m));
    ops.f1.resize(static_cast<std::size_t>(ops.m));
    ops.f2.resize(static_cast<std::size_t>(ops.m));
    ops.f3.resize(static_cast<std::size_t>(ops.m));
    const double h = cfg.dt;
    for (int k = 0; k < ops.m; ++k) {
        const double k2 = static_cast<double>(k) * k;
        ops.bdf_denom[static_cast<std::size_t>(k)] = 3.0 + 2.0 * h * k2;
        const double z0 = -k2 * h;
        ops.E[static_cast<std::size_t>(k)] = std::exp(z0);
        ops.E2[static_cast<std::size_t>(k)] = std::exp(0.5 * z0);
        double q = 0, a1 = 0, a2 = 0, a3 = 0;
        for (int j = 0; j < kContourPoints; ++j) {
            const double theta = 3.14159265358979323846 * (j + 0.5) / kContourPoints;
            const Cplx lr = Cplx(z0, 0.0) + Cplx(std::cos(theta), std::sin(theta));
            const Cplx elr = std::exp(lr);
            const Cplx lr3 = lr * lr * lr;
            q += ((std::exp(0.5 * lr) - 1.0) / lr).real();
            a1 += ((-4.0 - lr + elr * (4.0 - 3.0 * lr + lr * lr)) / lr3).real();
            a2 += ((2.0 + lr + elr * (-2.0 + lr)) / lr3).real();
            a3 += ((-4.0 - 3.0 * lr - lr * lr + elr * (4.0 - lr)) / lr3).real();
        }
        const double scale = h / kContourPoints;
        ops.Q[static_cast<std::size_t>(k)] = q * scale;
        ops.f1[static_cast<std::size_t>(k)] = a1 * scale;
        ops.f2[static_cast<std::size_t>(k)] = a2 * scale;
        ops.f3[static_cast<std::size_t>(k)] = a3 * scale;
    }
    return ops;
}

void dealias_cut(const ModeOps& ops, Cvec& a) {
    for (int k = ops.kcut + 1; k < ops.m; ++k) a[static_cast<std::size_t>(k)] = 0.0;
}

/// Nodal coefficient fields of the linearization at one stage background:
/// c = df_dz(t, u, u_x), d = df_dy(t, u, u_x).
struct StageCoeffs {
    std::vector<double> c, d;
    void resize(int n) {
        c.resize(static_cast<std::size_t>(n));
        d.resize(static_cast<std::size_t>(n));
    }
};

struct FlowCache {
    std::vector<StageCoeffs> macro;                  // imex_bdf2, one per step
    std::array<StageCoeffs, 4> bootstrap;            // imex_bdf2 first step
    std::vector<std::array<StageCoeffs, 4>> stages;  // etdrk4, four per step
};

struct Workspace {
    std::vector<double> u, ux, f;
    Cvec der;

    explicit Workspace(const CircleGrid& g)
        : u(static_cast<std::size_t>(g.n())),
          ux(static_cast<std::size_t>(g.n())),
          f(static_cast<std::size_t>(g.n())),
          der(static_cast<std::size_t>(g.spectrum_size())) {}
};

void nodal_and_slope(const CircleGrid& g, const ModeOps& ops, const Cvec& uhat, Workspace& w) {
    fft_inverse(g, uhat.data(), w.u.data());
    const int nyq = g.nyquist();
    for (int k = 0; k < nyq; ++k) {
        w.der[static_cast<std::size_t>(k)] = Cplx(0.0, k) * uhat[static_cast<std::size_t>(k)];
    }
    w.der[static_cast<std::size_t>(nyq)] = 0.0;
    fft_inverse(g, w.der.data(), w.ux.data());
    (void)ops;
}

/// F(t, u) transform; optionally records the linearization coefficients at
/// this stage background.
void eval_reaction(const CircleGrid& g, const ModeOps& ops, const Nonlinearity& nl, double t,
                   const Cvec& uhat, Workspace& w, Cvec& fhat, StageCoeffs* rec) {
    nodal_and_slope(g, ops, uhat, w);
    for (int i = 0; i < g.n(); ++i) {
        w.f[static_cast<std::size_t>(i)] =
            nl.f(t, w.u[static_cast<std::size_t>(i)], w.ux[static_cast<std::size_t>(i)]);
    }
    fft_forward(g, w.f.data(), fhat.data());
    dealias_cut(ops, fhat);
    if (rec) {
        rec->resize(g.n());
        for (int i = 0; i < g.n(); ++i) {
            const double y = w.u[static_cast<std::size_t>(i)];
            const double z = w.ux[static_cast<std::size_t>(i)];
            rec->c[static_cast<std::size_t>(i)] = nl.df_dz(t, y, z);
            rec->d[static_cast<std::size_t>(i)] = nl.df_dy(t, y, z);
        }
    }
}

/// (c v_x + d v) transform for the tangent equation.
void eval_tangent(const CircleGrid& g, const ModeOps& ops, const StageCoeffs& cd,
                  const Cvec& vhat, Workspace& w, Cvec& chat) {
    nodal_and_slope(g, ops, vhat, w);
    for (int i = 0; i < g.n(); ++i) {
        w.f[static_cast<std::size_t>(i)] =
            cd.c[static_cast<std::size_t>(i)] * w.ux[static_cast<std::size_t>(i)] +
            cd.d[static_cast<std::size_t>(i)] * w.u[static_cast<std::size_t>(i)];
    }
    fft_forward(g, w.f.data(), chat.data());
    dealias_cut(ops, chat);
}

double sup_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

void check_blowup(const Workspace& w, const StepperConfig& cfg, double t) {
    const double s = sup_of(w.u);
    if (!std::isfinite(s) || s > cfg.blowup_sup) {
        throw BlowUpError("solution sup-norm exceeded blow-up bound at t = " + std::to_string(t),
                          t);
    }
}

using MacroFn = std::function<void(int step, double t, const std::vector<double>& nodal)>;

/// One ETDRK4 step of u' = Lu + N; nhat0 holds N(t, u) on entry. Stage
/// evaluations go through `eval`, which also records coefficients.
template <typename EvalFn>
Cvec etdrk4_step(const ModeOps& ops, const Cvec& uhat, const Cvec& nhat0, double t, double h,
                 EvalFn&& eval, Cvec& na, Cvec& nb, Cvec& nc, int rec_base) {
    const std::size_t m = static_cast<std::size_t>(ops.m);
    Cvec a(m), b(m), c(m), out(m);
    for (std::size_t k = 0; k < m; ++k) a[k] = ops.E2[k] * uhat[k] + ops.Q[k] * nhat0[k];
    eval(t + 0.5 * h, a, na, rec_base + 1);
    for (std::size_t k = 0; k < m; ++k) b[k] = ops.E2[k] * uhat[k] + ops.Q[k] * na[k];
    eval(t + 0.5 * h, b, nb, rec_base + 2);
    for (std::size_t k = 0; k < m; ++k)
        c[k] = ops.E2[k] * a[k] + ops.Q[k] * (2.0 * nb[k] - nhat0[k]);
    eval(t + h, c, nc, rec_base + 3);
    for (std::size_t k = 0; k < m; ++k) {
        out[k] = ops.E[k] * uhat[k] + ops.f1[k] * nhat0[k] + 2.0 * ops.f2[k] * (na[k] + nb[k]) +
                 ops.f3[k] * nc[k];
    }
    return out;
}

/// Advances the nonlinear equation over n_steps macro steps from t0,
/// reporting nodal states and (optionally) caching linearization
/// coefficients at every stage.
void integrate_nonlinear(const StateVector& u0, const Nonlinearity& nl, const StepperConfig& cfg,
                         double t0, int n_steps, const MacroFn& on_macro, FlowCache* cache) {
    require_finite(u0, "evolve");
    const CircleGrid g = u0.grid;
    const ModeOps ops = make_mode_ops(g, cfg);
    Workspace w(g);
    const std::size_t m = static_cast<std::size_t>(ops.m);
    const double h = cfg.dt;

    if (cache) {
        if (cfg.scheme == Scheme::imex_bdf2) {
            cache->macro.resize(static_cast<std::size_t>(n_steps));
        } else {
            cache->stages.resize(static_cast<std::size_t>(n_steps));
        }
    }

    Cvec uhat(m);
    fft_forward(g, u0.values.data(), uhat.data());
    if (on_macro) on_macro(0, t0, u0.values);

    if (cfg.scheme == Scheme::etdrk4) {
        Cvec n0(m), na(m), nb(m), nc(m);
        for (int step = 0; step < n_steps; ++step) {
            const double t = t0 + h * step;
            StageCoeffs* rec0 = cache ? &cache->stages[static_cast<std::size_t>(step)][0] : nullptr;
            eval_reaction(g, ops, nl, t, uhat, w, n0, rec0);
            if (step == 0) check_blowup(w, cfg, t);
            auto eval = [&](double ts, const Cvec& stage, Cvec& out, int rec_idx) {
                StageCoeffs* rec =
                    cache ? &cache->stages[static_cast<std::size_t>(step)][rec_idx] : nullptr;
                eval_reaction(g, ops, nl, ts, stage, w, out, rec);
            };
            uhat = etdrk4_step(ops, uhat, n0, t, h, eval, na, nb, nc, -1);
            fft_inverse(g, uhat.data(), w.u.data());
            check_blowup(w, cfg, t + h);
            if (on_macro) on_macro(step + 1, t + h, w.u);
        }
        return;
    }

    // imex_bdf2: ETDRK4 bootstrap for the first step, then the two-step
    // recurrence with implicit diffusion.
    Cvec f_prev(m), f_cur(m), na(m), nb(m), nc(m);
    StageCoeffs* rec_macro0 = cache ? &cache->macro[0] : nullptr;
    eval_reaction(g, ops, nl, t0, uhat, w, f_prev, rec_macro0);
    check_blowup(w, cfg, t0);
    if (cache) cache->bootstrap[0] = cache->macro[0];

    Cvec uhat_prev = uhat;
    if (n_steps >= 1) {
        auto eval = [&](double ts, const Cvec& stage, Cvec& out, int rec_idx) {
            StageCoeffs* rec = cache ? &cache->bootstrap[static_cast<std::size_t>(rec_idx)] : nullptr;
            eval_reaction(g, ops, nl, ts, stage, w, out, rec);
        };
        uhat = etdrk4_step(ops, uhat, f_prev, t0, h, eval, na, nb, nc, 0);
        fft_inverse(g, uhat.data(), w.u.data());
        check_blowup(w, cfg, t0 + h);
        if (on_macro) on_macro(1, t0 + h, w.u);
    }
    for (int step = 1; step < n_steps; ++step) {
        const double t = t0 + h * step;
        StageCoeffs* rec = cache ? &cache->macro[static_cast<std::size_t>(step)] : nullptr;
        eval_reaction(g, ops, nl, t, uhat, w, f_cur, rec);
        Cvec unew(m);
        for (std::size_t k = 0; k < m; ++k) {
            unew[k] = (4.0 * uhat[k] - uhat_prev[k] + 2.0 * h * (2.0 * f_cur[k] - f_prev[k])) /
                      ops.bdf_denom[k];
        }
        uhat_prev = uhat;
        uhat = std::move(unew);
        std::swap(f_prev, f_cur);
        fft_inverse(g, uhat.data(), w.u.data());
        check_blowup(w, cfg, t + h);
        if (on_macro) on_macro(step + 1, t + h, w.u);
    }
}

/// Supplier of linearization coefficients per stage. `macro` is the start of
/// a step; the four bootstrap/etdrk4 stage slots follow the stage order of
/// etdrk4_step.
class CoeffSource {
public:
    virtual ~CoeffSource() = default;
    virtual void macro(int step, StageCoeffs& out) const = 0;
    virtual void bootstrap(int stage, StageCoeffs& out) const = 0;
    virtual void stage(int step, int stage, StageCoeffs& out) const = 0;
};

class CachedSource final : public CoeffSource {
public:
    explicit CachedSource(const FlowCache& cache) : cache_(cache) {}
    void macro(int step, StageCoeffs& out) const override {
        out = cache_.macro[static_cast<std::size_t>(step)];
    }
    void bootstrap(int stage, StageCoeffs& out) const override {
        out = cache_.bootstrap[static_cast<std::size_t>(stage)];
    }
    void stage(int step, int stage, StageCoeffs& out) const override {
        out = cache_.stages[static_cast<std::size_t>(step)][static_cast<std::size_t>(stage)];
    }

private:
    const FlowCache& cache_;
};

/// Coefficients from explicit functions c(t,x), d(t,x).
class FunctionSource final : public CoeffSource {
public:
    FunctionSource(const CircleGrid& g, double t0, double dt,
                   const std::function<double(double, double)>& c,
                   const std::function<double(double, double)>& d)
        : g_(g), t0_(t0), dt_(dt), c_(c), d_(d) {}

    void macro(int step, StageCoeffs& out) const override { fill(t0_ + dt_ * step, out); }
    void bootstrap(int stage, StageCoeffs& out) const override {
        fill(t0_ + stage_offset(stage), out);
    }
    void stage(int step, int stage, StageCoeffs& out) const override {
        fill(t0_ + dt_ * step + stage_offset(stage), out);
    }

private:
    double stage_offset(int stage) const {
        switch (stage) {
            case 0: return 0.0;
            case 1:
            case 2: return 0.5 * dt_;
            default: return dt_;
        }
    }
    void fill(double t, StageCoeffs& out) const {
        out.resize(g_.n());
        for (int i = 0; i < g_.n(); ++i) {
            const double x = g_.node(i);
            out.c[static_cast<std::size_t>(i)] = c_(t, x);
            out.d[static_cast<std::size_t>(i)] = d_(t, x);
        }
    }

    CircleGrid g_;
    double t0_, dt_;
    const std::function<double(double, double)>& c_;
    const std::function<double(double, double)>& d_;
};

/// Steps the linear equation with coefficients drawn from `src`. Mirrors
/// integrate_nonlinear stage for stage, so the tangent map is the exact
/// derivative of the discrete flow in the etdrk4/bootstrap stages.
StateVector propagate_tangent(const StateVector& v0, const StepperConfig& cfg, double t0,
                              int n_steps, const CoeffSource& src, const MacroFn& on_macro) {
    require_finite(v0, "tangent_evolve");
    const CircleGrid g = v0.grid;
    const ModeOps ops = make_mode_ops(g, cfg);
    Workspace w(g);
    const std::size_t m = static_cast<std::size_t>(ops.m);
    const double h = cfg.dt;

    Cvec vhat(m);
    fft_forward(g, v0.values.data(), vhat.data());
    if (on_macro) on_macro(0, t0, v0.values);

    StageCoeffs cd;
    auto finish_step = [&](int step) {
        fft_inverse(g, vhat.data(), w.u.data());
        if (!std::isfinite(sup_of(w.u))) {
            throw BlowUpError("tangent propagation became non-finite", t0 + h * (step + 1));
        }
        if (on_macro) on_macro(step + 1, t0 + h * (step + 1), w.u);
    };

    if (cfg.scheme == Scheme::etdrk4) {
        Cvec n0(m), na(m), nb(m), nc(m);
        for (int step = 0; step < n_steps; ++step) {
            const double t = t0 + h * step;
            src.stage(step, 0, cd);
            eval_tangent(g, ops, cd, vhat, w, n0);
            auto eval = [&](double, const Cvec& stage_v, Cvec& out, int rec_idx) {
                src.stage(step, rec_idx, cd);
                eval_tangent(g, ops, cd, stage_v, w, out);
            };
            vhat = etdrk4_step(ops, vhat, n0, t, h, eval, na, nb, nc, -1);
            finish_step(step);
        }
        return StateVector(g, w.u);
    }

    Cvec c_prev(m), c_cur(m), na(m), nb(m), nc(m);
    src.macro(0, cd);
    eval_tangent(g, ops, cd, vhat, w, c_prev);
    Cvec vhat_prev = vhat;
    if (n_steps >= 1) {
        auto eval = [&](double, const Cvec& stage_v, Cvec& out, int rec_idx) {
            src.bootstrap(rec_idx, cd);
            eval_tangent(g, ops, cd, stage_v, w, out);
        };
        vhat = etdrk4_step(ops, vhat, c_prev, t0, h, eval, na, nb, nc, 0);
        finish_step(0);
    }
    for (int step = 1; step < n_steps; ++step) {
        src.macro(step, cd);
        eval_tangent(g, ops, cd, vhat, w, c_cur);
        Cvec vnew(m);
        for (std::size_t k = 0; k < m; ++k) {
            vnew[k] = (4.0 * vhat[k] - vhat_prev[k] + 2.0 * h * (2.0 * c_cur[k] - c_prev[k])) /
                      ops.bdf_denom[k];
        }
        vhat_prev = vhat;
        vhat = std::move(vnew);
        std::swap(c_prev, c_cur);
        finish_step(step);
    }
    if (n_steps == 0) return v0;
    return StateVector(g, w.u);
}

}  // namespace

int steps_between(const StepperConfig& cfg, double t0, double t1) {
    if (!(cfg.dt > 0.0)) throw PreconditionError("stepper dt must be positive");
    if (!(t1 > t0)) throw PreconditionError("time window must be increasing");
    const double raw = (t1 - t0) / cfg.dt;
    const double rounded = std::round(raw);
    if (rounded < 1.0 || std::abs(raw - rounded) > 1e-9 * std::max(1.0, raw)) {
        throw PreconditionError("window length must be an integer multiple of dt");
    }
    return static_cast<int>(rounded);
}

void require_period_aligned(const Nonlinearity& nl, const StepperConfig& cfg) {
    (void)steps_between(cfg, 0.0, nl.period());
}

TrajectorySegment evolve(const StateVector& u0, const Nonlinearity& nl, const StepperConfig& cfg,
                         double t0, double t1) {
    const int n_steps = steps_between(cfg, t0, t1);
    TrajectorySegment seg{{}, {}, nl, cfg};
    seg.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    seg.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    integrate_nonlinear(u0, nl, cfg, t0, n_steps,
                        [&](int, double t, const std::vector<double>& nodal) {
                            seg.times.push_back(t);
                            seg.states.emplace_back(u0.grid, nodal);
                        },
                        nullptr);
    return seg;
}

StateVector poincare(const StateVector& u0, const Nonlinearity& nl, const StepperConfig& cfg) {
    require_period_aligned(nl, cfg);
    const int n_steps = steps_between(cfg, 0.0, nl.period());
    StateVector out = u0;
    integrate_nonlinear(u0, nl, cfg, 0.0, n_steps,
                        [&](int step, double, const std::vector<double>& nodal) {
                            if (step == n_steps) out.values = nodal;
                        },
                        nullptr);
    return out;
}

std::vector<StateVector> poincare_iterates(const StateVector& u0, const Nonlinearity& nl,
                                           const StepperConfig& cfg, int n) {
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(u0);
    for (int i = 0; i < n; ++i) {
        try {
            out.push_back(poincare(out.back(), nl, cfg));
        } catch (const BlowUpError& e) {
            throw BlowUpError(std::string(e.what()) + " (at Poincare iterate " +
                                  std::to_string(i) + ")",
                              e.last_valid_time, i);
        }
    }
    return out;
}

// -- LinearizedFlow ----------------------------------------------------------

struct LinearizedFlow::Impl {
    CircleGrid grid;
    StepperConfig cfg;
    double t0 = 0.0, t1 = 0.0;
    int n_steps = 0;
    bool from_background = false;
    std::optional<TrajectorySegment> bg;
    FlowCache cache;
    std::function<double(double, double)> cfn, dfn;
};

LinearizedFlow::LinearizedFlow(const StateVector& u0, const Nonlinearity& nl,
                               const StepperConfig& cfg, double t0, double t1)
    : impl_(std::make_unique<Impl>(Impl{u0.grid, cfg, t0, t1, 0, true, std::nullopt, {}, {}, {}})) {
    impl_->n_steps = steps_between(cfg, t0, t1);
    TrajectorySegment seg{{}, {}, nl, cfg};
    integrate_nonlinear(u0, nl, cfg, t0, impl_->n_steps,
                        [&](int, double t, const std::vector<double>& nodal) {
                            seg.times.push_back(t);
                            seg.states.emplace_back(u0.grid, nodal);
                        },
                        &impl_->cache);
    impl_->bg = std::move(seg);
}

LinearizedFlow::LinearizedFlow(const CircleGrid& grid, std::function<double(double, double)> c,
                               std::function<double(double, double)> d, const StepperConfig& cfg,
                               double t0, double t1)
    : impl_(std::make_unique<Impl>(
          Impl{grid, cfg, t0, t1, 0, false, std::nullopt, {}, std::move(c), std::move(d)})) {
    impl_->n_steps = steps_between(cfg, t0, t1);
}

LinearizedFlow::~LinearizedFlow() = default;
LinearizedFlow::LinearizedFlow(LinearizedFlow&&) noexcept = default;
LinearizedFlow& LinearizedFlow::operator=(LinearizedFlow&&) noexcept = default;

StateVector LinearizedFlow::apply(const StateVector& v0) const {
    if (v0.grid != impl_->grid) throw GridMismatchError("tangent vector on a different grid");
    if (impl_->from_background) {
        CachedSource src(impl_->cache);
        return propagate_tangent(v0, impl_->cfg, impl_->t0, impl_->n_steps, src, nullptr);
    }
    FunctionSource src(impl_->grid, impl_->t0, impl_->cfg.dt, impl_->cfn, impl_->dfn);
    return propagate_tangent(v0, impl_->cfg, impl_->t0, impl_->n_steps, src, nullptr);
}

TrajectorySegment LinearizedFlow::apply_with_history(const StateVector& v0) const {
    if (v0.grid != impl_->grid) throw GridMismatchError("tangent vector on a different grid");
    TrajectorySegment seg{{}, {}, impl_->bg ? impl_->bg->nl : std::nullopt, impl_->cfg};
    auto record = [&](int, double t, const std::vector<double>& nodal) {
        seg.times.push_back(t);
        seg.states.emplace_back(impl_->grid, nodal);
    };
    if (impl_->from_background) {
        CachedSource src(impl_->cache);
        propagate_tangent(v0, impl_->cfg, impl_->t0, impl_->n_steps, src, record);
    } else {
        FunctionSource src(impl_->grid, impl_->t0, impl_->cfg.dt, impl_->cfn, impl_->dfn);
        propagate_tangent(v0, impl_->cfg, impl_->t0, impl_->n_steps, src, record);
    }
    return seg;
}

const TrajectorySegment& LinearizedFlow::background() const {
    if (!impl_->bg) {
        throw PreconditionError("explicit-coefficient flow has no nonlinear background");
    }
    return *impl_->bg;
}

double LinearizedFlow::t0() const { return impl_->t0; }
double LinearizedFlow::t1() const { return impl_->t1; }

StateVector dp_apply(const StateVector& u0, const StateVector& v0, const Nonlinearity& nl,
                     const StepperConfig& cfg) {
    require_period_aligned(nl, cfg);
    LinearizedFlow flow(u0, nl, cfg, 0.0, nl.period());
    return flow.apply(v0);
}

TrajectorySegment tangent_evolve(const TrajectorySegment& traj, const StateVector& v0) {
    if (traj.states.empty()) throw PreconditionError("empty trajectory segment");
    if (!traj.nl) throw PreconditionError("trajectory segment carries no nonlinearity");
    require_same_grid(traj.front(), v0);
    LinearizedFlow flow(traj.front(), *traj.nl, traj.cfg, traj.times.front(), traj.times.back());
    return flow.apply_with_history(v0);
}

// -- dissipativity -----------------------------------------------------------

DissipativityReport check_dissipativity(const Nonlinearity& nl, const StepperConfig& cfg,
                                        const std::vector<StateVector>& seeds, double horizon,
                                        const DissipativityOptions& opt) {
    if (!nl.dissipativity()) {
        throw PreconditionError("nonlinearity carries no dissipativity record");
    }
    require_period_aligned(nl, cfg);
    DissipativityReport rep;
    rep.delta = nl.dissipativity()->delta;

    // Sampled sign hypothesis y f(t,y,0) < 0 for |y| >= delta.
    rep.hypothesis_ok = true;
    for (int it = 0; it < 16 && rep.hypothesis_ok; ++it) {
        const double t = nl.period() * it / 16.0;
        for (int iy = 0; iy < 32; ++iy) {
            const double mag = rep.delta * (1.0 + 1e-6) + 0.2 * iy;
            for (double y : {mag, -mag}) {
                if (y * nl.f(t, y, 0.0) >= 0.0) {
                    rep.hypothesis_ok = false;
                    break;
                }
            }
        }
    }

    const double T = nl.period();
    const int steps_per_period = steps_between(cfg, 0.0, T);
    const int n_periods = std::max(1, static_cast<int>(std::ceil(horizon / T - 1e-9)));

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        rep.R = std::max(rep.R, sup_norm(seeds[i]) - rep.delta);
    }
    rep.R = std::max(rep.R, 0.0);

    rep.envelopes.resize(seeds.size());
    for (std::size_t si = 0; si < seeds.size(); ++si) {
        auto& env = rep.envelopes[si];
        env.emplace_back(0.0, sup_norm(seeds[si]));
        double period_max = 0.0;
        try {
            integrate_nonlinear(
                seeds[si], nl, cfg, 0.0, n_periods * steps_per_period,
                [&](int step, double t, const std::vector<double>& nodal) {
                    if (step == 0) return;
                    period_max = std::max(period_max, sup_of(nodal));
                    if (step % steps_per_period == 0) {
                        env.emplace_back(t, period_max);
                        period_max = 0.0;
                    }
                },
                nullptr);
        } catch (const BlowUpError&) {
            rep.blowup_seeds.push_back(static_cast<int>(si));
        }
    }
    if (!rep.blowup_seeds.empty()) return rep;

    // Per-period worst envelope across seeds.
    std::vector<std::pair<double, double>> worst;
    for (int p = 0; p <= n_periods; ++p) {
        double t = p * T;
        double mx = 0.0;
        for (const auto& env : rep.envelopes) {
            if (p < static_cast<int>(env.size())) mx = std::max(mx, env[static_cast<std::size_t>(p)].second);
        }
        worst.emplace_back(t, mx);
    }

    // Entry into the absorbing ball delta + enter_tol (and staying there).
    rep.final_sup = worst.back().second;
    int enter_idx = -1;
    for (int p = static_cast<int>(worst.size()) - 1; p >= 0; --p) {
        if (worst[static_cast<std::size_t>(p)].second > rep.delta + opt.enter_tol) {
            enter_idx = p + 1;
            break;
        }
        enter_idx = p;
    }
    rep.entered_ball = enter_idx >= 0 && enter_idx < static_cast<int>(worst.size());
    if (rep.entered_ball) rep.time_to_ball = worst[static_cast<std::size_t>(enter_idx)].first;

    // Least-squares decay rate on log(sup - delta) over the decaying window.
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, s] : worst) {
        const double excess = s - rep.delta;
        if (excess > std::max(1e-10, 1e-3 * rep.R)) pts.emplace_back(t, std::log(excess));
    }
    if (pts.size() >= 4 && rep.R > opt.enter_tol) {
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (const auto& [t, y] : pts) {
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double n = static_cast<double>(pts.size());
        const double slope = (n * sty - st * sy) / (n * stt - st * st);
        rep.zeta_hat = -slope;
        rep.zeta_fitted = true;
        double ss = 0;
        const double icept = (sy - slope * st) / n;
        for (const auto& [t, y] : pts) {
            const double r = y - (icept + slope * t);
            ss += r * r;
        }
        rep.fit_residual = std::sqrt(ss / n);
    }

    // Envelope verdict: sup(t) <= delta + R exp(-zeta t) + tol at the samples.
    const double zeta = rep.zeta_fitted ? std::max(rep.zeta_hat, 0.0) : 0.0;
    rep.envelope_ok = true;
    for (const auto& [t, s] : worst) {
        if (s > rep.delta + rep.R * std::exp(-zeta * t) + opt.envelope_tol) {
            rep.envelope_ok = false;
            break;
        }
    }
    return rep;
}

}  // namespace rdcircle
