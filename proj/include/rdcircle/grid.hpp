#pragma once

#include <complex>
#include <vector>

#include "rdcircle/errors.hpp"

namespace rdcircle {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Default fractional-power exponent used when reporting norms. The theory
/// needs alpha in (3/4, 1); scenarios may override.
inline constexpr double kDefaultAlpha = 0.875;

/// Uniform periodic grid on the circle R/2piZ with nodes x_i = 2*pi*i/N.
/// N is restricted to powers of two (resolution studies proceed by doubling).
class CircleGrid {
public:
    explicit CircleGrid(int n_points);

    int n() const { return n_; }
    double spacing() const { return kTwoPi / n_; }
    double node(int i) const { return spacing() * i; }
    int nyquist() const { return n_ / 2; }
    /// Number of stored complex coefficients (real-to-complex layout).
    int spectrum_size() const { return n_ / 2 + 1; }

    friend bool operator==(const CircleGrid& a, const CircleGrid& b) { return a.n_ == b.n_; }
    friend bool operator!=(const CircleGrid& a, const CircleGrid& b) { return a.n_ != b.n_; }

private:
    int n_;
};

/// Real-valued field sampled at the grid nodes.
struct StateVector {
    CircleGrid grid;
    std::vector<double> values;

    StateVector(CircleGrid g, std::vector<double> v);
    /// Zero field.
    explicit StateVector(CircleGrid g);

    int n() const { return grid.n(); }
};

/// Fourier coefficients c_k = (1/N) sum_j u_j exp(-i k x_j), k = 0..N/2.
/// Coefficients for negative k follow by conjugation.
struct Spectrum {
    CircleGrid grid;
    std::vector<std::complex<double>> coeff;
};

// -- transforms ------------------------------------------------------------

Spectrum to_spectrum(const StateVector& s);
StateVector from_spectrum(const Spectrum& sp);

/// Raw-buffer transforms for inner loops; coeff has grid.spectrum_size()
/// entries with the same normalization as Spectrum.
void fft_forward(const CircleGrid& g, const double* nodal, std::complex<double>* coeff);
void fft_inverse(const CircleGrid& g, const std::complex<double>* coeff, double* nodal);

// -- constructors ----------------------------------------------------------

StateVector constant_state(const CircleGrid& g, double value);
/// Samples fn(x) at the nodes.
template <typename F>
StateVector sample_state(const CircleGrid& g, F&& fn) {
    std::vector<double> v(static_cast<std::size_t>(g.n()));
    for (int i = 0; i < g.n(); ++i) v[static_cast<std::size_t>(i)] = fn(g.node(i));
    return StateVector(g, std::move(v));
}

// -- spec operations -------------------------------------------------------

/// Exact derivative of the trigonometric interpolant; order 1 or 2.
/// The Nyquist mode is zeroed for odd orders.
StateVector spectral_derivative(const StateVector& s, int order);

/// Trigonometric interpolant evaluated at x (any real; reduced mod 2pi).
double interpolate(const StateVector& s, double x);

/// Zero-padded spectral upsampling to new_n >= n.
StateVector refine(const StateVector& s, int new_n);

/// Discrete X^alpha norm:
///   sqrt(2pi sum_k k^{4a} |c_k|^2) + sqrt(2pi sum_k |c_k|^2),
/// summing over signed wavenumbers; the k = 0 term of the first sum vanishes.
double fractional_norm(const StateVector& s, double alpha);

// -- norms and inner products ----------------------------------------------

double l2_norm(const StateVector& s);
double sup_norm(const StateVector& s);
/// Inner product inducing a norm equivalent to fractional_norm; used for
/// orthonormalization of tangent frames.
double alpha_inner(const StateVector& a, const StateVector& b, double alpha);

// -- arithmetic ------------------------------------------------------------

StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a, const StateVector& b);
StateVector operator*(double c, const StateVector& s);
StateVector& axpy(StateVector& y, double a, const StateVector& x);  // y += a*x

void require_same_grid(const StateVector& a, const StateVector& b);
void require_finite(const StateVector& s, const char* context);
bool all_finite(const StateVector& s);

/// Circular shift u(x) -> u(x + a) via the interpolant (spectral phase shift).
StateVector translate(const StateVector& s, double a);

}  // namespace rdcircle
