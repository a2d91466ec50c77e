#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "rdcircle/grid.hpp"

namespace rdcircle {

using LinearOp = std::function<StateVector(const StateVector&)>;

struct GmresOptions {
    int max_inner = 60;
    int max_restarts = 3;
    double rel_tol = 1e-8;
};

struct GmresResult {
    StateVector x;
    double rel_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Restarted GMRES for op(x) = rhs with x0 = 0, discrete L2 inner product.
GmresResult gmres(const LinearOp& op, const StateVector& rhs, const GmresOptions& opt = {});

/// Ritz approximation of an eigenpair. Real eigenvalues carry vec_im = 0;
/// complex pairs appear as two consecutive entries (+imag first) sharing the
/// plane spanned by vec_re, vec_im.
struct RitzPair {
    std::complex<double> value;
    StateVector vec_re;
    StateVector vec_im;
    double residual = 0.0;  // ||A z - theta z|| / ||z|| in L2
};

struct BlockKrylovOptions {
    int subspace_dim = 24;
    std::uint64_t seed = 0x5eed;
    int max_replacements = 2;  // random refills after Krylov saturation
};

struct BlockKrylovResult {
    std::vector<RitzPair> pairs;  // sorted by non-increasing |value|
    bool stagnated = false;
};

/// Leading spectrum of a matrix-free operator by a block (band-2) Krylov
/// basis with full reorthogonalization and explicit Rayleigh-Ritz
/// extraction. Two starting vectors make geometric multiplicity two -- the
/// generic case for the monodromy ladder -- reachable.
BlockKrylovResult block_krylov_spectrum(const LinearOp& op, const CircleGrid& grid,
                                        const BlockKrylovOptions& opt = {});

}  // namespace rdcircle
