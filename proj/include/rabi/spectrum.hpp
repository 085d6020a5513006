#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rabi/model.hpp"

namespace rabi {

/// One zero x_N of the regularized G and its energy E_N = x_N - g^2/w.
struct SpectralPoint {
    int index = 0;
    double x = 0.0;
    double energy = 0.0;
    std::optional<Baseline> on_baseline;
    bool converged = true;
};

struct ScanOptions {
    /// Grid step in units of omega; must not exceed 1/20.
    double grid_step = 1.0 / 40.0;
    /// Bisection stops below x_tol * omega.
    double x_tol = 1e-10;
    /// Baseline double roots: |K| < s1_tol |dK/dg|.
    double s1_tol = 1e-8;
    /// Upper limit of the automatic window growth, in units of omega.
    double x_ceiling = 200.0;
};

/// All zeros of the regularized G on [x_lo, x_hi]. Even-multiplicity zeros
/// on a baseline (the e = 0 constraint roots) are emitted twice.
std::vector<SpectralPoint> scan_zeros(const ModelParams& p, double x_lo, double x_hi,
                                      const Truncation& t = {}, const ScanOptions& opts = {});

/// The lowest `count` spectral points. Throws WindowExhausted when the
/// window would have to grow past opts.x_ceiling.
std::vector<SpectralPoint> energy_levels(const ModelParams& p, int count,
                                         const Truncation& t = {},
                                         const ScanOptions& opts = {});

/// Lowest levels on a grid of couplings. Per-column failures are flagged.
struct SpectrumSweep {
    ModelParams params;  // g unused
    Eigen::VectorXd g_values;
    int count = 0;
    std::vector<std::vector<SpectralPoint>> levels;
    std::vector<bool> truncated;

    bool any_flagged() const;
};

/// `steps` couplings spaced evenly over [g_lo, g_hi], endpoints included.
SpectrumSweep sweep_spectrum(const ModelParams& p, double g_lo, double g_hi, int steps, int count,
                             const Truncation& t = {}, const ScanOptions& opts = {});

/// Header: g,N,x,E,on_baseline[,oracle_dE]. on_baseline is "" or e.g. "2+".
void write_sweep_csv(std::ostream& os, const SpectrumSweep& sweep,
                     const std::vector<Eigen::VectorXd>* oracle_levels = nullptr);

/// Header: g,baseline_N,branch,E for E = N w - g^2/w +/- e, N = 0..n_top.
void write_baselines_csv(std::ostream& os, const SpectrumSweep& sweep, int n_top);

}  // namespace rabi
