#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Jacobi>

#include "rabi/model.hpp"

namespace rabi {

template <typename Scalar = double>
using DenseSymmetric = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Truncated Hamiltonian in the sigma_x eigenbasis, order 2M. The first M rows
/// are sigma_x = +1 (w n + e on the diagonal, +g sqrt(n+1) beside it), the
/// last M rows sigma_x = -1 (w n - e, -g sqrt(n+1)); D couples |n,+> and |n,->.
template <typename Scalar = double>
DenseSymmetric<Scalar> build_hamiltonian(const ModelParams& p, int fock_cutoff) {
    p.validate(false);
    if (fock_cutoff < 2) throw std::invalid_argument("fock cutoff must be >= 2");
    const int m = fock_cutoff;
    DenseSymmetric<Scalar> h = DenseSymmetric<Scalar>::Zero(2 * m, 2 * m);
    for (int n = 0; n < m; ++n) {
        h(n, n) = Scalar(p.omega * n + p.epsilon);
        h(m + n, m + n) = Scalar(p.omega * n - p.epsilon);
        h(n, m + n) = h(m + n, n) = Scalar(p.delta);
        if (n + 1 < m) {
            using std::sqrt;
            const Scalar hop = Scalar(p.g) * sqrt(Scalar(n + 1));
            h(n, n + 1) = h(n + 1, n) = hop;
            h(m + n, m + n + 1) = h(m + n + 1, m + n) = -hop;
        }
    }
    return h;
}

template <typename Scalar = double>
struct EigenResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // ascending
    int sweeps = 0;
    bool converged = false;
};

struct JacobiOptions {
    /// Stop once the off-diagonal Frobenius mass drops below rel_tol * ||A||_F.
    double rel_tol = 1e-12;
    int max_sweeps = 100;
};

/// Cyclic Jacobi eigenvalues of a real symmetric matrix. A partial result is
/// returned with converged = false when the sweep cap is reached.
template <typename Derived>
EigenResult<typename Derived::Scalar> eigenvalues(const Eigen::MatrixBase<Derived>& input,
                                                  JacobiOptions opts = {}) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::sqrt;
    if (input.rows() != input.cols()) throw std::invalid_argument("matrix must be square");
    if (!input.allFinite()) throw std::invalid_argument("matrix has non-finite entries");

    DenseSymmetric<Scalar> a = input;
    const Eigen::Index n = a.rows();
    const Scalar total = a.norm();
    const Scalar target = Scalar(opts.rel_tol) * total;

    auto off_mass = [&] {
        Scalar s(0);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = j + 1; i < n; ++i) s += a(i, j) * a(i, j);
        return sqrt(Scalar(2) * s);
    };

    EigenResult<Scalar> out;
    Scalar off = off_mass();
    while (off > target && out.sweeps < opts.max_sweeps) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == Scalar(0)) continue;
                Eigen::JacobiRotation<Scalar> rot;
                rot.makeJacobi(a, p, q);
                a.applyOnTheLeft(p, q, rot.adjoint());
                a.applyOnTheRight(p, q, rot);
                a(p, q) = a(q, p) = Scalar(0);
            }
        }
        ++out.sweeps;
        off = off_mass();
    }
    out.converged = off <= target;
    out.values = a.diagonal();
    std::sort(out.values.data(), out.values.data() + n);
    return out;
}

/// Oracle spectrum with a cutoff self-check against M + 20.
struct OracleSpectrum {
    Eigen::VectorXd values;
    int fock_cutoff = 0;
    /// Largest change of the requested levels between M and M + 20.
    double cutoff_drift = 0.0;
    bool converged = false;
};

/// Default cutoff: 60 for |g| <= w, growing with the displacement (g/w)^2.
int recommended_cutoff(const ModelParams& p);

/// Lowest `count` oracle eigenvalues. The cutoff starts at `fock_cutoff`
/// (or recommended_cutoff when <= 0) and grows by 20 until the lowest
/// `count` levels move less than `drift_tol`.
OracleSpectrum oracle_levels(const ModelParams& p, int count, int fock_cutoff = 0,
                             double drift_tol = 1e-9, int max_cutoff = 400);

}  // namespace rabi
