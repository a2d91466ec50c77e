#pragma once

#include <complex>
#include <string>
#include <vector>

#include "rdcircle/krylov.hpp"
#include "rdcircle/stepper.hpp"

namespace rdcircle {

/// Leading Floquet multipliers of the monodromy operator at a fixed point,
/// sorted by non-increasing modulus. Level structure (Sturm ladder): level 0
/// is index 0; level j >= 1 occupies indices 2j-1 and 2j. Complex pairs are
/// stored as two consecutive entries (+imag first) whose eigenfunction slots
/// hold the real and imaginary parts of the eigenplane.
struct FloquetSpectrum {
    std::vector<std::complex<double>> multipliers;
    std::vector<StateVector> eigenfunctions;
    std::vector<double> moduli_ladder;       // |multipliers|, same order
    std::vector<double> arnoldi_residuals;   // relative eigenresiduals
    int k_max = 0;                           // highest fully resolved level
    bool stagnated = false;
    double alpha = kDefaultAlpha;

    int levels() const { return k_max + 1; }
    /// Multiplier indices forming level j (one index for j = 0, else two).
    std::vector<int> level_indices(int j) const;
    /// Real spanning vectors of the level-j eigenplane.
    std::vector<const StateVector*> level_plane(int j) const;
    double level_modulus(int j) const { return moduli_ladder[static_cast<std::size_t>(j == 0 ? 0 : 2 * j - 1)]; }
    double min_resolved_modulus() const { return moduli_ladder.back(); }
};

struct FloquetOptions {
    double margin = 1e-3;        // hyperbolicity margin on ||lambda| - 1|
    double residual_tol = 1e-8;  // acceptance threshold relative to r0
    double alpha = kDefaultAlpha;
    std::uint64_t seed = 0x10c;
    int subspace_extra = 8;      // Krylov dimension = 4 k_max + subspace_extra
};

/// Floquet multipliers at a fixed point phi via block Krylov iteration on the
/// cached one-period linearized flow. Resolves levels 0..k_max when the
/// residuals allow; otherwise returns the resolved prefix with `stagnated`.
FloquetSpectrum floquet_spectrum(const StateVector& phi, const Nonlinearity& nl,
                                 const StepperConfig& cfg, int k_max,
                                 const FloquetOptions& opt = {});

/// Number of multipliers of modulus > 1, with multiplicity. Throws
/// NonHyperbolicError when a multiplier sits within `margin` of the unit
/// circle, and PreconditionError when the resolved part of the spectrum does
/// not reach below modulus 1 - margin.
int morse_index(const FloquetSpectrum& spec, double margin = 1e-3);

struct FixedPointRecord {
    StateVector profile;
    double residual = 0.0;  // X^alpha norm of P(profile) - profile
    FloquetSpectrum spectrum;
    int morse_index = -1;  // -1 when non-hyperbolic
    bool hyperbolic = false;
    double hyperbolicity_margin = 0.0;
    double homogeneity_defect = 0.0;       // sup - inf of the profile
    std::vector<double> newton_residuals;  // per-iteration diagnostics
};

struct NewtonOptions {
    int max_iterations = 40;
    GmresOptions gmres;
    int k_max = 4;
    FloquetOptions floquet;
    bool with_spectrum = true;
};

/// Newton iteration on P(u) - u = 0 with matrix-free GMRES for the Jacobian
/// solves. Throws NonConvergenceError / SingularJacobianError.
FixedPointRecord newton_fixed_point(const StateVector& guess, const Nonlinearity& nl,
                                    const StepperConfig& cfg, double tol,
                                    const NewtonOptions& opt = {});

struct EigenStructureReport {
    bool ladder_ok = false;       // r0 > r1 >= r1~ > r2 >= r2~ > ...
    bool zeros_ok = false;        // z = 2j with simple zeros on each level
    bool pairs_ok = true;         // |lambda_j| = |lambda~_j| (hyperbolic case)
    bool hyperbolic_checked = false;
    std::vector<std::string> violations;
    bool passed() const { return ladder_ok && zeros_ok && pairs_ok; }
};

/// Ladder ordering, eigenfunction zero counts (z = 2j, simple, for random
/// rotations within each level plane), and paired moduli for hyperbolic
/// spectra.
EigenStructureReport verify_eigen_structure(const FloquetSpectrum& spec, double tol,
                                            int samples_per_level = 12,
                                            std::uint64_t seed = 0x2e11);

struct RigidityReport {
    bool homogeneous_ok = false;
    bool parity_ok = false;  // Morse index zero or odd
    double homogeneity_defect = 0.0;
    int index = -1;
    std::vector<std::string> violations;
    bool passed() const { return homogeneous_ok && parity_ok; }
};

/// Structural predictions for hyperbolic fixed points: spatial homogeneity
/// and the zero-or-odd Morse index law. Violations are report content (a
/// falsifier), not errors.
RigidityReport verify_hyperbolic_rigidity(const FixedPointRecord& rec, double hom_tol = 1e-8);

struct CensusOptions {
    double dedup_radius = 1e-6;  // X^alpha distance identifying two records
    NewtonOptions newton;
};

struct CensusResult {
    std::vector<FixedPointRecord> records;  // deduplicated, sorted by index
    std::vector<std::string> failures;      // per-seed diagnostics
};

CensusResult fixed_point_census(const Nonlinearity& nl, const StepperConfig& cfg,
                                const std::vector<StateVector>& seeds, double tol,
                                const CensusOptions& opt = {});

}  // namespace rdcircle
