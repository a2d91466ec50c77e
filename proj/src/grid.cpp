#include "rdcircle/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace rdcircle {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Per-thread FFTW workspace for one grid size. Plan creation is globally
/// serialized (FFTW requirement); execution uses thread-local buffers.
struct FftWorkspace {
    int n;
    double* real_buf;
    fftw_complex* cplx_buf;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit FftWorkspace(int n_) : n(n_) {
        static std::mutex plan_mutex;
        std::lock_guard<std::mutex> lock(plan_mutex);
        real_buf = fftw_alloc_real(static_cast<std::size_t>(n));
        cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
        fwd = fftw_plan_dft_r2c_1d(n, real_buf, cplx_buf, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(n, cplx_buf, real_buf, FFTW_ESTIMATE);
    }
    ~FftWorkspace() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
    }
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;
};

FftWorkspace& workspace_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftWorkspace>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, std::make_unique<FftWorkspace>(n)).first;
    }
    return *it->second;
}

}  // namespace

CircleGrid::CircleGrid(int n_points) : n_(n_points) {
    if (n_points < 8 || !is_power_of_two(n_points)) {
        throw PreconditionError("grid size must be a power of two >= 8, got " +
                                std::to_string(n_points));
    }
}

StateVector::StateVector(CircleGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n()) {
        throw PreconditionError("state length does not match grid size");
    }
}

StateVector::StateVector(CircleGrid g)
    : grid(g), values(static_cast<std::size_t>(g.n()), 0.0) {}

void fft_forward(const CircleGrid& g, const double* nodal, std::complex<double>* coeff) {
    auto& ws = workspace_for(g.n());
    std::copy(nodal, nodal + g.n(), ws.real_buf);
    fftw_execute(ws.fwd);
    const double inv_n = 1.0 / g.n();
    for (int k = 0; k < g.spectrum_size(); ++k) {
        coeff[k] = std::complex<double>(ws.cplx_buf[k][0] * inv_n, ws.cplx_buf[k][1] * inv_n);
    }
}

void fft_inverse(const CircleGrid& g, const std::complex<double>* coeff, double* nodal) {
    auto& ws = workspace_for(g.n());
    for (int k = 0; k < g.spectrum_size(); ++k) {
        ws.cplx_buf[k][0] = coeff[k].real();
        ws.cplx_buf[k][1] = coeff[k].imag();
    }
    fftw_execute(ws.bwd);
    std::copy(ws.real_buf, ws.real_buf + g.n(), nodal);
}

Spectrum to_spectrum(const StateVector& s) {
    require_finite(s, "to_spectrum");
    Spectrum sp{s.grid, std::vector<std::complex<double>>(
                            static_cast<std::size_t>(s.grid.spectrum_size()))};
    fft_forward(s.grid, s.values.data(), sp.coeff.data());
    return sp;
}

StateVector from_spectrum(const Spectrum& sp) {
    StateVector out(sp.grid);
    fft_inverse(sp.grid, sp.coeff.data(), out.values.data());
    return out;
}

StateVector constant_state(const CircleGrid& g, double value) {
    return StateVector(g, std::vector<double>(static_cast<std::size_t>(g.n()), value));
}

StateVector spectral_derivative(const StateVector& s, int order) {
    if (order != 1 && order != 2) {
        throw PreconditionError("derivative order must be 1 or 2");
    }
    Spectrum sp = to_spectrum(s);
    const int nyq = s.grid.nyquist();
    for (int k = 0; k <= nyq; ++k) {
        auto& c = sp.coeff[static_cast<std::size_t>(k)];
        if (order == 1) {
            c = (k == nyq) ? std::complex<double>(0.0, 0.0)
                           : std::complex<double>(0.0, k) * c;
        } else {
            c *= -static_cast<double>(k) * static_cast<double>(k);
        }
    }
    return from_spectrum(sp);
}

double interpolate(const StateVector& s, double x) {
    require_finite(s, "interpolate");
    x = std::fmod(x, kTwoPi);
    if (x < 0) x += kTwoPi;
    Spectrum sp = to_spectrum(s);
    const int nyq = s.grid.nyquist();
    double acc = sp.coeff[0].real();
    for (int k = 1; k < nyq; ++k) {
        const auto& c = sp.coeff[static_cast<std::size_t>(k)];
        acc += 2.0 * (c.real() * std::cos(k * x) - c.imag() * std::sin(k * x));
    }
    // Nyquist mode interpolates as cos(N/2 x); its coefficient is real.
    acc += sp.coeff[static_cast<std::size_t>(nyq)].real() * std::cos(nyq * x);
    return acc;
}

StateVector refine(const StateVector& s, int new_n) {
    if (new_n < s.n()) {
        throw UnsupportedCoarsenError("refine cannot reduce resolution " +
                                      std::to_string(s.n()) + " -> " + std::to_string(new_n));
    }
    if (new_n == s.n()) return s;
    Spectrum sp = to_spectrum(s);
    CircleGrid fine(new_n);
    Spectrum out{fine, std::vector<std::complex<double>>(
                           static_cast<std::size_t>(fine.spectrum_size()))};
    const int nyq = s.grid.nyquist();
    for (int k = 0; k < nyq; ++k) out.coeff[static_cast<std::size_t>(k)] = sp.coeff[static_cast<std::size_t>(k)];
    // The coarse Nyquist coefficient represents a pure cosine; on the fine
    // grid it splits into the +/-nyq pair, of which we store the + half.
    out.coeff[static_cast<std::size_t>(nyq)] = 0.5 * sp.coeff[static_cast<std::size_t>(nyq)];
    return from_spectrum(out);
}

namespace {

/// Sum of |c_k|^2 weighted by w(|k|) over signed wavenumbers.
template <typename W>
double signed_coeff_sum(const Spectrum& sp, W&& weight) {
    const int nyq = sp.grid.nyquist();
    double acc = weight(0) * std::norm(sp.coeff[0]);
    for (int k = 1; k < nyq; ++k) {
        acc += 2.0 * weight(k) * std::norm(sp.coeff[static_cast<std::size_t>(k)]);
    }
    acc += weight(nyq) * std::norm(sp.coeff[static_cast<std::size_t>(nyq)]);
    return acc;
}

}  // namespace

double fractional_norm(const StateVector& s, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw PreconditionError("alpha must lie in [0,1]");
    }
    Spectrum sp = to_spectrum(s);
    // A^alpha annihilates constants for alpha > 0; A^0 is the identity.
    const double frac = signed_coeff_sum(sp, [alpha](int k) {
        if (k == 0) return alpha == 0.0 ? 1.0 : 0.0;
        return std::pow(static_cast<double>(k), 4.0 * alpha);
    });
    const double l2 = signed_coeff_sum(sp, [](int) { return 1.0; });
    return std::sqrt(kTwoPi * frac) + std::sqrt(kTwoPi * l2);
}

double l2_norm(const StateVector& s) {
    Spectrum sp = to_spectrum(s);
    return std::sqrt(kTwoPi * signed_coeff_sum(sp, [](int) { return 1.0; }));
}

double sup_norm(const StateVector& s) {
    double m = 0.0;
    for (double v : s.values) m = std::max(m, std::abs(v));
    return m;
}

double alpha_inner(const StateVector& a, const StateVector& b, double alpha) {
    require_same_grid(a, b);
    Spectrum sa = to_spectrum(a);
    Spectrum sb = to_spectrum(b);
    const int nyq = a.grid.nyquist();
    auto weight = [alpha](int k) {
        return 1.0 + (k == 0 ? 0.0 : std::pow(static_cast<double>(k), 4.0 * alpha));
    };
    double acc = weight(0) * (sa.coeff[0].real() * sb.coeff[0].real());
    for (int k = 1; k < nyq; ++k) {
        const auto& ca = sa.coeff[static_cast<std::size_t>(k)];
        const auto& cb = sb.coeff[static_cast<std::size_t>(k)];
        acc += 2.0 * weight(k) * (ca.real() * cb.real() + ca.imag() * cb.imag());
    }
    acc += weight(nyq) * (sa.coeff[static_cast<std::size_t>(nyq)].real() *
                          sb.coeff[static_cast<std::size_t>(nyq)].real());
    return kTwoPi * acc;
}

StateVector operator+(const StateVector& a, const StateVector& b) {
    require_same_grid(a, b);
    StateVector out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

StateVector operator-(const StateVector& a, const StateVector& b) {
    require_same_grid(a, b);
    StateVector out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

StateVector operator*(double c, const StateVector& s) {
    StateVector out = s;
    for (double& v : out.values) v *= c;
    return out;
}

StateVector& axpy(StateVector& y, double a, const StateVector& x) {
    require_same_grid(y, x);
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
    return y;
}

void require_same_grid(const StateVector& a, const StateVector& b) {
    if (a.grid != b.grid) {
        throw GridMismatchError("grid mismatch: " + std::to_string(a.n()) + " vs " +
                                std::to_string(b.n()));
    }
}

bool all_finite(const StateVector& s) {
    for (double v : s.values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_finite(const StateVector& s, const char* context) {
    if (!all_finite(s)) {
        throw InvalidStateError(std::string(context) + ": non-finite state values");
    }
}

StateVector translate(const StateVector& s, double a) {
    Spectrum sp = to_spectrum(s);
    const int nyq = s.grid.nyquist();
    for (int k = 1; k < nyq; ++k) {
        sp.coeff[static_cast<std::size_t>(k)] *=
            std::complex<double>(std::cos(k * a), std::sin(k * a));
    }
    // Keep the Nyquist cosine real: cos(nyq (x + a)) sampled on the shifted
    // nodes projects back onto cos(nyq x) with factor cos(nyq a).
    sp.coeff[static_cast<std::size_t>(nyq)] *= std::cos(nyq * a);
    return from_spectrum(sp);
}

}  // namespace rdcircle
