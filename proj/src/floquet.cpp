#include "rdcircle/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rdcircle/rng.hpp"
#include "rdcircle/zeroes.hpp"

namespace rdcircle {

std::vector<int> FloquetSpectrum::level_indices(int j) const {
    if (j == 0) return {0};
    return {2 * j - 1, 2 * j};
}

std::vector<const StateVector*> FloquetSpectrum::level_plane(int j) const {
    std::vector<const StateVector*> out;
    for (int idx : level_indices(j)) {
        const auto& v = eigenfunctions[static_cast<std::size_t>(idx)];
        // Imaginary parts of complex pairs can vanish for real eigenplanes.
        if (sup_norm(v) > 1e-13) out.push_back(&v);
    }
    return out;
}

FloquetSpectrum floquet_spectrum(const StateVector& phi, const Nonlinearity& nl,
                                 const StepperConfig& cfg, int k_max,
                                 const FloquetOptions& opt) {
    require_period_aligned(nl, cfg);
    if (k_max < 0) throw PreconditionError("k_max must be non-negative");

    LinearizedFlow flow(phi, nl, cfg, 0.0, nl.period());
    BlockKrylovOptions kopt;
    kopt.subspace_dim = 4 * k_max + opt.subspace_extra;
    kopt.seed = opt.seed;
    auto kr = block_krylov_spectrum([&](const StateVector& v) { return flow.apply(v); }, phi.grid,
                                    kopt);

    FloquetSpectrum spec;
    spec.alpha = opt.alpha;
    spec.stagnated = kr.stagnated;
    if (kr.pairs.empty()) {
        spec.k_max = -1;
        return spec;
    }
    const double r0 = std::abs(kr.pairs.front().value);
    const int wanted = 2 * k_max + 1;

    int accepted = 0;
    for (const auto& pair : kr.pairs) {
        if (accepted >= wanted) break;
        if (pair.residual > opt.residual_tol * std::max(r0, 1e-300)) break;
        ++accepted;
    }
    // Only whole levels are reported.
    if (accepted < wanted) {
        spec.stagnated = true;
        if (accepted % 2 == 0) accepted = std::max(accepted - 1, 0);
    }
    spec.k_max = accepted == 0 ? -1 : (accepted - 1) / 2;

    for (int i = 0; i < accepted; ++i) {
        const auto& pair = kr.pairs[static_cast<std::size_t>(i)];
        spec.multipliers.push_back(pair.value);
        spec.moduli_ladder.push_back(std::abs(pair.value));
        spec.arnoldi_residuals.push_back(pair.residual);
        // One real scale normalizes the whole eigenplane in X^alpha.
        const double nr = fractional_norm(pair.vec_re, opt.alpha);
        const double ni =
            sup_norm(pair.vec_im) > 1e-13 ? fractional_norm(pair.vec_im, opt.alpha) : 0.0;
        const double scale = 1.0 / std::max(std::hypot(nr, ni), 1e-300);
        // A real multiplier stores its eigenvector; a conjugate pair stores
        // Re at the +imag slot and Im at the -imag slot.
        if (pair.value.imag() <= 0.0 && ni > 0.0) {
            spec.eigenfunctions.push_back(scale * pair.vec_im);
        } else {
            spec.eigenfunctions.push_back(scale * pair.vec_re);
        }
    }
    return spec;
}

int morse_index(const FloquetSpectrum& spec, double margin) {
    if (spec.multipliers.empty()) {
        throw PreconditionError("empty spectrum");
    }
    if (spec.min_resolved_modulus() >= 1.0 - margin) {
        throw PreconditionError(
            "spectrum does not resolve moduli below the unit circle; raise k_max");
    }
    int count = 0;
    for (const auto& lam : spec.multipliers) {
        const double m = std::abs(lam);
        if (std::abs(m - 1.0) <= margin) {
            throw NonHyperbolicError("multiplier within margin of the unit circle");
        }
        if (m > 1.0) ++count;
    }
    return count;
}

FixedPointRecord newton_fixed_point(const StateVector& guess, const Nonlinearity& nl,
                                    const StepperConfig& cfg, double tol,
                                    const NewtonOptions& opt) {
    require_period_aligned(nl, cfg);
    const double T = nl.period();
    const double alpha = opt.floquet.alpha;

    FixedPointRecord rec;
    rec.profile = guess;
    StateVector u = guess;

    bool converged = false;
    for (int it = 0; it <= opt.max_iterations; ++it) {
        LinearizedFlow flow(u, nl, cfg, 0.0, T);
        const StateVector& pu = flow.background().back();
        StateVector r = pu - u;
        const double rn = fractional_norm(r, alpha);
        rec.newton_residuals.push_back(rn);
        if (rn <= tol) {
            converged = true;
            break;
        }
        if (it == opt.max_iterations) break;

        auto jac = [&](const StateVector& v) { return flow.apply(v) - v; };
        GmresResult sol = gmres(jac, (-1.0) * r, opt.gmres);
        if (!sol.converged) {
            if (sol.rel_residual > 1e-3) {
                throw SingularJacobianError(
                    "Krylov solve stalled (relative residual " +
                    std::to_string(sol.rel_residual) + "); DP - I nearly singular");
            }
            // mildly unconverged correction still usable
        }
        u = u + sol.x;
        require_finite(u, "newton iterate");
    }
    if (!converged) {
        std::ostringstream os;
        os << "Newton did not reach tol " << tol << " in " << opt.max_iterations
           << " iterations; last residual " << rec.newton_residuals.back();
        throw NonConvergenceError(os.str());
    }

    rec.profile = u;
    rec.residual = rec.newton_residuals.back();
    double lo = u.values[0], hi = u.values[0];
    for (double v : u.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rec.homogeneity_defect = hi - lo;

    if (opt.with_spectrum) {
        rec.spectrum = floquet_spectrum(u, nl, cfg, opt.k_max, opt.floquet);
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& lam : rec.spectrum.multipliers) {
            margin = std::min(margin, std::abs(std::abs(lam) - 1.0));
        }
        rec.hyperbolicity_margin = margin;
        rec.hyperbolic = rec.spectrum.k_max >= 0 && margin > opt.floquet.margin &&
                         rec.spectrum.min_resolved_modulus() < 1.0 - opt.floquet.margin;
        if (rec.hyperbolic) {
            rec.morse_index = morse_index(rec.spectrum, opt.floquet.margin);
        }
    }
    return rec;
}

EigenStructureReport verify_eigen_structure(const FloquetSpectrum& spec, double tol,
                                            int samples_per_level, std::uint64_t seed) {
    EigenStructureReport rep;
    auto complain = [&rep](const std::string& s) { rep.violations.push_back(s); };

    if (spec.k_max < 0) {
        complain("no resolved levels");
        return rep;
    }

    // (a) ladder ordering with strict drops between levels
    rep.ladder_ok = true;
    for (int j = 0; j < spec.k_max; ++j) {
        double lo_j = std::numeric_limits<double>::infinity();
        for (int idx : spec.level_indices(j)) {
            lo_j = std::min(lo_j, spec.moduli_ladder[static_cast<std::size_t>(idx)]);
        }
        double hi_next = 0.0;
        for (int idx : spec.level_indices(j + 1)) {
            hi_next = std::max(hi_next, spec.moduli_ladder[static_cast<std::size_t>(idx)]);
        }
        if (!(lo_j > hi_next)) {
            rep.ladder_ok = false;
            std::ostringstream os;
            os << "ladder not strictly decreasing between levels " << j << " and " << j + 1;
            complain(os.str());
        }
    }
    for (int j = 1; j <= spec.k_max; ++j) {
        const auto idx = spec.level_indices(j);
        if (spec.moduli_ladder[static_cast<std::size_t>(idx[0])] +
                1e-12 * spec.moduli_ladder[0] <
            spec.moduli_ladder[static_cast<std::size_t>(idx[1])]) {
            rep.ladder_ok = false;
            complain("within-level moduli out of order at level " + std::to_string(j));
        }
    }

    // (b) zero number 2j with only simple zeros across each level plane
    rep.zeros_ok = true;
    auto rng = RandomStream::seeded(seed);
    for (int j = 0; j <= spec.k_max; ++j) {
        auto plane = spec.level_plane(j);
        if (plane.empty()) {
            rep.zeros_ok = false;
            complain("level " + std::to_string(j) + " has no spanning vectors");
            continue;
        }
        for (int s = 0; s < samples_per_level; ++s) {
            StateVector probe = *plane[0];
            if (plane.size() == 2) {
                const double theta = s < 8 ? kTwoPi * s / 8.0 : rng.uniform(0.0, kTwoPi);
                probe = std::cos(theta) * (*plane[0]) + std::sin(theta) * (*plane[1]);
            } else if (s > 0) {
                break;  // one-dimensional level: a single probe suffices
            }
            try {
                auto zc = zero_count(probe);
                if (zc.count != 2 * j || !zc.all_simple) {
                    rep.zeros_ok = false;
                    std::ostringstream os;
                    os << "level " << j << " probe has z = " << zc.count
                       << (zc.all_simple ? "" : " (non-simple)") << ", expected " << 2 * j;
                    complain(os.str());
                    break;
                }
            } catch (const DegenerateFunctionError&) {
                rep.zeros_ok = false;
                complain("level " + std::to_string(j) + " probe degenerate");
                break;
            }
        }
    }

    // (c) paired moduli within a level (hyperbolic spectra)
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& lam : spec.multipliers) {
        margin = std::min(margin, std::abs(std::abs(lam) - 1.0));
    }
    if (margin > 1e-3 && spec.min_resolved_modulus() < 1.0 - 1e-3) {
        rep.hyperbolic_checked = true;
        for (int j = 1; j <= spec.k_max; ++j) {
            const auto idx = spec.level_indices(j);
            const double a = spec.moduli_ladder[static_cast<std::size_t>(idx[0])];
            const double b = spec.moduli_ladder[static_cast<std::size_t>(idx[1])];
            if (std::abs(a - b) > tol * std::max(a, 1e-300)) {
                rep.pairs_ok = false;
                complain("level " + std::to_string(j) + " moduli differ beyond tol");
            }
        }
    }
    return rep;
}

RigidityReport verify_hyperbolic_rigidity(const FixedPointRecord& rec, double hom_tol) {
    if (!rec.hyperbolic) {
        throw PreconditionError("rigidity check requires a hyperbolic record");
    }
    RigidityReport rep;
    rep.homogeneity_defect = rec.homogeneity_defect;
    rep.index = rec.morse_index;
    rep.homogeneous_ok = rec.homogeneity_defect <= hom_tol;
    if (!rep.homogeneous_ok) {
        rep.violations.push_back("profile is not spatially homogeneous (defect " +
                                 std::to_string(rec.homogeneity_defect) + ")");
    }
    rep.parity_ok = rec.morse_index == 0 || rec.morse_index % 2 == 1;
    if (!rep.parity_ok) {
        rep.violations.push_back("Morse index " + std::to_string(rec.morse_index) +
                                 " is neither zero nor odd");
    }
    return rep;
}

CensusResult fixed_point_census(const Nonlinearity& nl, const StepperConfig& cfg,
                                const std::vector<StateVector>& seeds, double tol,
                                const CensusOptions& opt) {
    CensusResult out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        try {
            FixedPointRecord rec = newton_fixed_point(seeds[i], nl, cfg, tol, opt.newton);
            bool duplicate = false;
            for (const auto& have : out.records) {
                if (fractional_norm(have.profile - rec.profile, have.spectrum.alpha) <
                    opt.dedup_radius) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) out.records.push_back(std::move(rec));
        } catch (const Error& e) {
            out.failures.push_back("seed " + std::to_string(i) + ": " + e.what());
        }
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const FixedPointRecord& a, const FixedPointRecord& b) {
                  const int ia = a.hyperbolic ? a.morse_index : std::numeric_limits<int>::max();
                  const int ib = b.hyperbolic ? b.morse_index : std::numeric_limits<int>::max();
                  if (ia != ib) return ia < ib;
                  double ma = 0, mb = 0;
                  for (double v : a.profile.values) ma += v;
                  for (double v : b.profile.values) mb += v;
                  return ma < mb;
              });
    return out;
}

}  // namespace rdcircle
