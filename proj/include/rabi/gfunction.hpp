#pragma once

#include <optional>

#include "rabi/model.hpp"
#include "rabi/signed_log.hpp"

namespace rabi {

/// A G-function value with the convergence state of the series behind it.
struct GValue {
    SignedLog<> value;
    bool converged = true;
    int stop_index = 0;
    /// Baseline limits only: the estimate sat too close to its zero floor to call.
    bool ambiguous = false;
};

/// G(x) = D^2 Rbar+(x) Rbar-(x) - R+(x) R-(x).
GValue g_eps(double x, const ModelParams& p, const Truncation& t = {});

/// Smallest product cutoff that clears every pole up to x_max: ceil(x_max/w) + 1.
int product_cutoff(double x_max, double omega);

/// prod_{n=0}^{n_prod} (x - n w - e)(x - n w + e).
SignedLog<> pole_product(double x, const ModelParams& p, int n_prod);

/// Regularized G: G(x) times pole_product(x, n_prod). Throws PoleProximity on a pole.
GValue g_reg(double x, const ModelParams& p, const Truncation& t, int n_prod);

struct BaselineLimitOptions {
    /// Half-width of the symmetric limit stencil, in units of omega.
    double delta = 1e-6;
    /// Product cutoff; negative selects product_cutoff(x_p).
    int n_prod = -1;
};

/// Finite value of the regularized G at x_p, from symmetric averages at
/// x_p +/- delta and x_p +/- delta/2 combined by one Richardson step.
/// Returns sign 0 when the estimate is below 10 |E(delta) - E(delta/2)|.
GValue g_reg_at_baseline(const Baseline& b, const ModelParams& p, const Truncation& t = {},
                         BaselineLimitOptions opts = {});

/// Same limit from the Laurent residue of G at x_p, propagated through the
/// pole branch recurrence. Only defined for e != 0 (simple pole).
GValue g_reg_at_baseline_residue(const Baseline& b, const ModelParams& p,
                                 const Truncation& t = {}, int n_prod = -1);

/// Baseline whose x_p lies within `radius` of x, if any (nearest wins).
std::optional<Baseline> nearest_baseline(double x, const ModelParams& p, double radius);

/// Regularized G over a fixed product cutoff, safe to call anywhere on the
/// real line: inside the limit stencil of a baseline it returns the local
/// linear model through the baseline limit.
class RegularizedG {
public:
    RegularizedG(const ModelParams& p, const Truncation& t, int n_prod,
                 BaselineLimitOptions opts = {});

    GValue operator()(double x) const;
    GValue at_baseline(const Baseline& b) const;

    const ModelParams& params() const { return params_; }
    const Truncation& truncation() const { return trunc_; }
    int n_prod() const { return n_prod_; }
    double stencil() const { return opts_.delta * params_.omega; }

private:
    ModelParams params_;
    Truncation trunc_;
    int n_prod_;
    BaselineLimitOptions opts_;
};

}  // namespace rabi
