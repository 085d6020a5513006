#include "rabi/oracle.hpp"

#include <algorithm>

namespace rabi {

int recommended_cutoff(const ModelParams& p) {
    const double r = std::abs(p.g) / p.omega;
    if (r <= 1.0) return 60;
    return 40 + static_cast<int>(std::ceil(12.0 * r * r + 20.0 * r));
}

OracleSpectrum oracle_levels(const ModelParams& p, int count, int fock_cutoff, double drift_tol,
                             int max_cutoff) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    int m = fock_cutoff > 0 ? fock_cutoff : recommended_cutoff(p);
    m = std::max(m, count);

    OracleSpectrum out;
    auto solve = [&](int cutoff) {
        const auto r = eigenvalues(build_hamiltonian(p, cutoff));
        return std::pair{Eigen::VectorXd(r.values.head(count)), r.converged};
    };
    auto [current, ok] = solve(m);
    while (true) {
        auto [next, ok_next] = solve(m + 20);
        out.cutoff_drift = (next - current).cwiseAbs().maxCoeff();
        out.values = current;
        out.fock_cutoff = m;
        out.converged = ok && ok_next && out.cutoff_drift < drift_tol;
        if (out.converged || m + 20 >= max_cutoff) break;
        m += 20;
        current = next;
        ok = ok_next;
    }
    return out;
}

}  // namespace rabi
