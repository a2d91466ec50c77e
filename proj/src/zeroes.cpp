#include "rdcircle/zeroes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdcircle {

namespace {

constexpr double kDegenerateSup = 1e-13;
constexpr int kBisectionDepth = 60;

/// Interpolant evaluation from precomputed coefficients.
double trig_eval(const Spectrum& sp, double x) {
    const int nyq = sp.grid.nyquist();
    double acc = sp.coeff[0].real();
    for (int k = 1; k < nyq; ++k) {
        const auto& c = sp.coeff[static_cast<std::size_t>(k)];
        acc += 2.0 * (c.real() * std::cos(k * x) - c.imag() * std::sin(k * x));
    }
    acc += sp.coeff[static_cast<std::size_t>(nyq)].real() * std::cos(nyq * x);
    return acc;
}

Spectrum derivative_spectrum(const Spectrum& sp) {
    Spectrum d = sp;
    const int nyq = sp.grid.nyquist();
    for (int k = 0; k < nyq; ++k) {
        d.coeff[static_cast<std::size_t>(k)] *= std::complex<double>(0.0, k);
    }
    d.coeff[static_cast<std::size_t>(nyq)] = 0.0;
    return d;
}

}  // namespace

ZeroCount zero_count(const StateVector& s) {
    const double sup = sup_norm(s);
    return zero_count(s, 1e-9 * sup);
}

ZeroCount zero_count(const StateVector& s, double tol_abs) {
    require_finite(s, "zero_count");
    if (!(tol_abs >= 0.0)) throw PreconditionError("zero_count tolerance must be >= 0");
    const double sup = sup_norm(s);
    if (sup < kDegenerateSup || sup <= tol_abs) {
        throw DegenerateFunctionError("zero count undefined: field below tolerance");
    }

    // Scan an oversampled copy so crossings between coarse nodes are seen.
    const int fine_n = std::min(4 * s.n(), 2048);
    const StateVector fine = refine(s, fine_n);
    const Spectrum sp = to_spectrum(s);
    const Spectrum dsp = derivative_spectrum(sp);

    // Definite-signed fine nodes in cyclic order.
    std::vector<int> idx;
    std::vector<int> sgn;
    for (int i = 0; i < fine_n; ++i) {
        const double v = fine.values[static_cast<std::size_t>(i)];
        if (std::abs(v) > tol_abs) {
            idx.push_back(i);
            sgn.push_back(v > 0 ? 1 : -1);
        }
    }
    ZeroCount out;
    out.tolerance_used = tol_abs;
    out.min_slope_at_zero = std::numeric_limits<double>::infinity();
    if (idx.empty()) {
        throw DegenerateFunctionError("zero count undefined: all samples indeterminate");
    }

    const double fine_dx = kTwoPi / fine_n;
    const std::size_t m = idx.size();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t jn = (j + 1) % m;
        if (sgn[j] == sgn[jn]) continue;
        ++out.count;
        // Bisect the bracket [x_j, x_jn] (wrapping past 2pi at the seam).
        double lo = idx[j] * fine_dx;
        double hi = idx[jn] * fine_dx;
        if (jn == 0) hi += kTwoPi;
        double flo = fine.values[static_cast<std::size_t>(idx[j])];
        for (int it = 0; it < kBisectionDepth; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = trig_eval(sp, std::fmod(mid, kTwoPi));
            if ((flo <= 0.0) == (fm <= 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const double root = std::fmod(0.5 * (lo + hi), kTwoPi);
        const double slope = std::abs(trig_eval(dsp, root));
        out.min_slope_at_zero = std::min(out.min_slope_at_zero, slope);
        if (slope <= tol_abs) out.all_simple = false;
    }
    return out;
}

ZeroHistory zero_history(const TrajectorySegment& traj, double sample_dt,
                         std::optional<double> tol_abs) {
    if (traj.states.size() < 2) throw PreconditionError("zero_history needs a trajectory");
    const double dt = traj.cfg.dt;
    const double ratio = sample_dt / dt;
    const int stride = static_cast<int>(std::round(ratio));
    if (stride < 1 || std::abs(ratio - stride) > 1e-9 * std::max(1.0, ratio)) {
        throw PreconditionError("sample_dt must be a positive multiple of the macro step");
    }

    ZeroHistory hist;
    hist.monotone_ok = true;
    int prev_count = -1;
    for (std::size_t i = 0; i < traj.states.size(); i += static_cast<std::size_t>(stride)) {
        ZeroHistoryEntry e;
        e.time = traj.times[i];
        const StateVector& v = traj.states[i];
        if (sup_norm(v) < kDegenerateSup) {
            e.degenerate = true;
        } else {
            try {
                e.zc = tol_abs ? zero_count(v, *tol_abs) : zero_count(v);
            } catch (const DegenerateFunctionError&) {
                e.degenerate = true;
            }
        }
        if (!e.degenerate) {
            if (prev_count >= 0 && e.zc.count > prev_count) hist.monotone_ok = false;
            prev_count = e.zc.count;
        }
        hist.entries.push_back(std::move(e));
    }
    return hist;
}

DroppingReport dropping_times(const ZeroHistory& history) {
    DroppingReport rep;
    const ZeroHistoryEntry* prev = nullptr;
    for (const auto& e : history.entries) {
        if (e.degenerate) continue;
        if (prev && e.zc.count < prev->zc.count) {
            rep.drops.push_back({prev->time, e.time, prev->zc.count, e.zc.count});
        }
        prev = &e;
    }
    if (prev) rep.plateau = prev->zc.count;

    double candidate = -1.0;
    for (auto it = history.entries.rbegin(); it != history.entries.rend(); ++it) {
        if (it->degenerate) continue;
        if (it->zc.all_simple) {
            candidate = it->time;
        } else {
            break;
        }
    }
    rep.first_all_simple_time = candidate;
    return rep;
}

}  // namespace rdcircle
