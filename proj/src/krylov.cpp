#include "rdcircle/krylov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "rdcircle/rng.hpp"

namespace rdcircle {

namespace {

double dot(const StateVector& a, const StateVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return acc;
}

double nrm(const StateVector& a) { return std::sqrt(dot(a, a)); }

StateVector random_state(const CircleGrid& g, RandomStream& rng) {
    StateVector s(g);
    for (double& v : s.values) v = rng.normal();
    return s;
}

/// Two-pass classical Gram-Schmidt of z against an orthonormal set.
void orthogonalize(StateVector& z, const std::vector<StateVector>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) {
            const double h = dot(z, v);
            axpy(z, -h, v);
        }
    }
}

}  // namespace

GmresResult gmres(const LinearOp& op, const StateVector& rhs, const GmresOptions& opt) {
    const CircleGrid g = rhs.grid;
    GmresResult res{StateVector(g), 0.0, 0, false};
    const double beta0 = nrm(rhs);
    if (beta0 == 0.0) {
        res.converged = true;
        return res;
    }

    StateVector x(g);
    StateVector r = rhs;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        const double beta = nrm(r);
        res.rel_residual = beta / beta0;
        if (res.rel_residual <= opt.rel_tol) {
            res.converged = true;
            res.x = x;
            return res;
        }
        const int m = opt.max_inner;
        std::vector<StateVector> V;
        V.reserve(static_cast<std::size_t>(m) + 1);
        V.push_back((1.0 / beta) * r);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        Eigen::VectorXd gvec = Eigen::VectorXd::Zero(m + 1);
        gvec(0) = beta;
        std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
        int j_done = 0;
        bool breakdown = false;

        for (int j = 0; j < m; ++j) {
            StateVector w = op(V[static_cast<std::size_t>(j)]);
            ++res.iterations;
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const double h = dot(w, V[static_cast<std::size_t>(i)]);
                    H(i, j) += h;
                    axpy(w, -h, V[static_cast<std::size_t>(i)]);
                }
            }
            const double hnext = nrm(w);
            H(j + 1, j) = hnext;

            // Apply accumulated Givens rotations, then create the new one.
            for (int i = 0; i < j; ++i) {
                const double t = cs[static_cast<std::size_t>(i)] * H(i, j) +
                                 sn[static_cast<std::size_t>(i)] * H(i + 1, j);
                H(i + 1, j) = -sn[static_cast<std::size_t>(i)] * H(i, j) +
                              cs[static_cast<std::size_t>(i)] * H(i + 1, j);
                H(i, j) = t;
            }
            const double denom = std::hypot(H(j, j), H(j + 1, j));
            if (denom < 1e-300) {
                breakdown = true;
                j_done = j;
                break;
            }
            cs[static_cast<std::size_t>(j)] = H(j, j) / denom;
            sn[static_cast<std::size_t>(j)] = H(j + 1, j) / denom;
            H(j, j) = denom;
            H(j + 1, j) = 0.0;
            gvec(j + 1) = -sn[static_cast<std::size_t>(j)] * gvec(j);
            gvec(j) = cs[static_cast<std::size_t>(j)] * gvec(j);
            j_done = j + 1;

            const double rel = std::abs(gvec(j + 1)) / beta0;
            if (hnext < 1e-14 * beta0 || rel <= opt.rel_tol) break;
            V.push_back((1.0 / hnext) * w);
        }

        // Back-substitute and update x.
        if (j_done > 0) {
            Eigen::VectorXd y(j_done);
            for (int i = j_done - 1; i >= 0; --i) {
                double s = gvec(i);
                for (int k2 = i + 1; k2 < j_done; ++k2) s -= H(i, k2) * y(k2);
                y(i) = s / H(i, i);
            }
            for (int i = 0; i < j_done; ++i) axpy(x, y(i), V[static_cast<std::size_t>(i)]);
        }
        r = rhs - op(x);
        ++res.iterations;
        res.rel_residual = nrm(r) / beta0;
        if (res.rel_residual <= opt.rel_tol) {
            res.converged = true;
            res.x = x;
            return res;
        }
        if (breakdown) break;
    }
    res.x = x;
    return res;
}

BlockKrylovResult block_krylov_spectrum(const LinearOp& op, const CircleGrid& grid,
                                        const BlockKrylovOptions& opt) {
    BlockKrylovResult out;
    const int m = std::max(4, opt.subspace_dim);
    auto rng = RandomStream::seeded(opt.seed);

    std::vector<StateVector> V;
    V.reserve(static_cast<std::size_t>(m));
    for (int b = 0; b < 2; ++b) {
        StateVector z = random_state(grid, rng);
        orthogonalize(z, V);
        V.push_back((1.0 / nrm(z)) * z);
    }

    std::vector<StateVector> AV;
    AV.reserve(static_cast<std::size_t>(m));
    int replacements = 0;

    // Band-2 Krylov sweep: each application both feeds the projection matrix
    // and (until the basis is full) contributes a new direction.
    for (std::size_t j = 0; j < V.size(); ++j) {
        AV.push_back(op(V[j]));
        if (static_cast<int>(V.size()) >= m) continue;
        StateVector z = AV.back();
        const double wn = std::max(nrm(AV.back()), 1e-300);
        orthogonalize(z, V);
        if (nrm(z) > 1e-10 * wn) {
            V.push_back((1.0 / nrm(z)) * z);
        } else if (replacements < opt.max_replacements) {
            ++replacements;
            StateVector fresh = random_state(grid, rng);
            orthogonalize(fresh, V);
            V.push_back((1.0 / nrm(fresh)) * fresh);
        } else {
            out.stagnated = true;
        }
    }

    // Rayleigh-Ritz on the explicitly projected matrix.
    const int dim = static_cast<int>(V.size());
    Eigen::MatrixXd M(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) {
            M(i, k) = dot(V[static_cast<std::size_t>(i)], AV[static_cast<std::size_t>(k)]);
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) {
        out.stagnated = true;
        return out;
    }

    struct Raw {
        std::complex<double> theta;
        Eigen::VectorXcd y;
    };
    std::vector<Raw> raws;
    for (int i = 0; i < dim; ++i) {
        raws.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
    }
    std::sort(raws.begin(), raws.end(), [](const Raw& a, const Raw& b) {
        const double ma = std::abs(a.theta), mb = std::abs(b.theta);
        if (ma != mb) return ma > mb;
        return a.theta.imag() > b.theta.imag();
    });

    for (const auto& raw : raws) {
        StateVector zr(grid), zi(grid);
        for (int i = 0; i < dim; ++i) {
            axpy(zr, raw.y(i).real(), V[static_cast<std::size_t>(i)]);
            axpy(zi, raw.y(i).imag(), V[static_cast<std::size_t>(i)]);
        }
        // Residual A z - theta z assembled from cached applications.
        StateVector rr(grid), ri(grid);
        for (int i = 0; i < dim; ++i) {
            axpy(rr, raw.y(i).real(), AV[static_cast<std::size_t>(i)]);
            axpy(ri, raw.y(i).imag(), AV[static_cast<std::size_t>(i)]);
        }
        const double a = raw.theta.real(), b = raw.theta.imag();
        StateVector dr = rr - (a * zr - b * zi);
        StateVector di = ri - (a * zi + b * zr);
        const double znorm = std::sqrt(dot(zr, zr) + dot(zi, zi));
        const double resid = std::sqrt(dot(dr, dr) + dot(di, di)) / std::max(znorm, 1e-300);
        out.pairs.push_back({raw.theta, std::move(zr), std::move(zi), resid});
    }
    return out;
}

}  // namespace rdcircle
