#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "rabi/model.hpp"

namespace rabi {

/// Which zero set a plane grid samples.
enum class CurveKind {
    all,  // regularized G at x_p: S1 and S2 curves together
    s1,   // constraint value K_N at x_p: S1 curves only
};

const char* curve_kind_name(CurveKind k);

/// Uniform axis: `cells` intervals over [lo, hi].
struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
    int cells = 100;

    Eigen::VectorXd nodes() const { return Eigen::VectorXd::LinSpaced(cells + 1, lo, hi); }
    double cell() const { return (hi - lo) / cells; }
};

/// Samples on the (delta, g) plane. Entry (i, j) belongs to delta_axis(i), g_axis(j).
struct PlaneGrid {
    Baseline baseline;
    CurveKind kind = CurveKind::all;
    ModelParams params;  // omega and epsilon; delta and g vary over the grid
    Truncation trunc;
    Eigen::VectorXd delta_axis;
    Eigen::VectorXd g_axis;
    Eigen::MatrixXi sign;
    Eigen::MatrixXd log_mag;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flagged;

    Eigen::Index flagged_count() const { return flagged.count(); }
};

PlaneGrid sample_plane(const Baseline& b, const ModelParams& p, const AxisRange& delta,
                       const AxisRange& g, CurveKind kind = CurveKind::all,
                       const Truncation& t = {});

struct Polyline {
    std::vector<Eigen::Vector2d> vertices;  // (delta, g)
    bool closed = false;
};

struct ContourSet {
    Baseline baseline;
    CurveKind kind = CurveKind::all;
    std::vector<Polyline> polylines;
    /// Cells with diagonal corner signs, resolved by the sign at the cell centre.
    std::vector<Eigen::Vector2i> saddles;
    /// Cells left out because a corner was flagged.
    int skipped_cells = 0;
};

/// Marching squares over the sign field. Throws std::invalid_argument when
/// more than 5% of the nodes are flagged.
ContourSet trace_contours(const PlaneGrid& grid);

/// g values where the contours cross the vertical line delta = d.
std::vector<double> crossings_at_delta(const ContourSet& contours, double d);

/// Columns baseline_N,branch,polyline_id,vertex_index,delta,g,closed_flag,
/// preceded by '#'-prefixed metadata lines.
void write_contours_csv(std::ostream& os, const ContourSet& contours, const PlaneGrid& grid);

/// Samples, traces and writes both curve kinds for every baseline into
/// `dir` as curves_N<n><p|m>_<kind>.csv. Returns the written paths.
std::vector<std::filesystem::path> emit_figure(const std::vector<Baseline>& baselines,
                                               const ModelParams& p, const AxisRange& delta,
                                               const AxisRange& g, const Truncation& t,
                                               const std::filesystem::path& dir);

}  // namespace rabi
