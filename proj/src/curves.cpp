#include "rabi/curves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "rabi/exceptional.hpp"
#include "rabi/format.hpp"
#include "rabi/gfunction.hpp"
#include "rabi/parallel.hpp"
#include "rabi/signed_log.hpp"

namespace rabi {

const char* curve_kind_name(CurveKind k) { return k == CurveKind::s1 ? "s1" : "all"; }

PlaneGrid sample_plane(const Baseline& b, const ModelParams& p, const AxisRange& delta,
                       const AxisRange& g, CurveKind kind, const Truncation& t) {
    p.validate(false);
    t.validate();
    if (delta.cells < 1 || g.cells < 1 || !(delta.hi > delta.lo) || !(g.hi > g.lo))
        throw std::invalid_argument("plane axes need hi > lo and at least one cell");
    if (!(g.lo > 0.0)) throw std::invalid_argument("g axis must be strictly positive");
    require_non_resonant(p);

    PlaneGrid grid;
    grid.baseline = b;
    grid.kind = kind;
    grid.params = p;
    grid.trunc = t;
    grid.delta_axis = delta.nodes();
    grid.g_axis = g.nodes();
    const Eigen::Index nd = grid.delta_axis.size(), ng = grid.g_axis.size();
    grid.sign = Eigen::MatrixXi::Zero(nd, ng);
    grid.log_mag = Eigen::MatrixXd::Zero(nd, ng);
    grid.flagged = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nd, ng, false);

    // One column per g value; the truncation only depends on g.
    parallel_for(static_cast<std::size_t>(ng), [&](std::size_t jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        const Truncation tj = t.adapted_to(grid.g_axis(j), p.omega);
        for (Eigen::Index i = 0; i < nd; ++i) {
            ModelParams q = p.with_g(grid.g_axis(j));
            q.delta = grid.delta_axis(i);
            try {
                SignedLog<> v;
                bool ok = true;
                if (kind == CurveKind::s1) {
                    v = SignedLog<>::from_value(constraint_value(b, q, tj));
                    ok = std::isfinite(v.log_mag) || v.sign == 0;
                } else {
                    const GValue gv = g_reg_at_baseline(b, q, tj);
                    v = gv.value;
                    ok = gv.converged;
                }
                grid.sign(i, j) = v.sign;
                grid.log_mag(i, j) = v.sign == 0 ? 0.0 : v.log_mag;
                grid.flagged(i, j) = !ok;
            } catch (const std::exception&) {
                grid.flagged(i, j) = true;
            }
        }
    });
    return grid;
}

namespace {

struct Tracer {
    const PlaneGrid& grid;
    Eigen::Index nd, ng;

    // Horizontal edges join (i, j)-(i+1, j); vertical edges join (i, j)-(i, j+1).
    long h_edge(Eigen::Index i, Eigen::Index j) const { return j * (nd - 1) + i; }
    long v_edge(Eigen::Index i, Eigen::Index j) const { return (nd - 1) * ng + j * nd + i; }

    bool positive(Eigen::Index i, Eigen::Index j) const { return grid.sign(i, j) >= 0; }

    // Zero crossing between two nodes, placed by |a| / (|a| + |b|) computed
    // from the log magnitudes.
    double fraction(Eigen::Index i0, Eigen::Index j0, Eigen::Index i1, Eigen::Index j1) const {
        if (grid.sign(i0, j0) == 0) return 0.0;
        if (grid.sign(i1, j1) == 0) return 1.0;
        return 1.0 / (1.0 + std::exp(grid.log_mag(i1, j1) - grid.log_mag(i0, j0)));
    }

    Eigen::Vector2d vertex(long edge) const {
        const long horizontal = (nd - 1) * ng;
        if (edge < horizontal) {
            const Eigen::Index j = edge / (nd - 1), i = edge % (nd - 1);
            const double f = fraction(i, j, i + 1, j);
            return {grid.delta_axis(i) + f * (grid.delta_axis(i + 1) - grid.delta_axis(i)),
                    grid.g_axis(j)};
        }
        const long e = edge - horizontal;
        const Eigen::Index j = e / nd, i = e % nd;
        const double f = fraction(i, j, i, j + 1);
        return {grid.delta_axis(i), grid.g_axis(j) + f * (grid.g_axis(j + 1) - grid.g_axis(j))};
    }

    SignedLog<> value(Eigen::Index i, Eigen::Index j) const {
        return {grid.sign(i, j), grid.sign(i, j) == 0 ? SignedLog<>{}.log_mag : grid.log_mag(i, j)};
    }
};

}  // namespace

ContourSet trace_contours(const PlaneGrid& grid) {
    const Eigen::Index nd = grid.delta_axis.size(), ng = grid.g_axis.size();
    if (nd < 2 || ng < 2) throw std::invalid_argument("grid needs at least 2x2 nodes");
    if (grid.flagged_count() > 0.05 * static_cast<double>(nd * ng))
        throw std::invalid_argument("more than 5% of the grid is flagged");

    Tracer tr{grid, nd, ng};
    ContourSet out;
    out.baseline = grid.baseline;
    out.kind = grid.kind;

    std::vector<std::array<long, 2>> segments;
    for (Eigen::Index j = 0; j + 1 < ng; ++j) {
        for (Eigen::Index i = 0; i + 1 < nd; ++i) {
            if (grid.flagged(i, j) || grid.flagged(i + 1, j) || grid.flagged(i + 1, j + 1)
                || grid.flagged(i, j + 1)) {
                ++out.skipped_cells;
                continue;
            }
            // Corners counter-clockwise from (i, j); edge k joins corner k and k+1.
            const std::array<bool, 4> c{tr.positive(i, j), tr.positive(i + 1, j),
                                        tr.positive(i + 1, j + 1), tr.positive(i, j + 1)};
            const std::array<long, 4> e{tr.h_edge(i, j), tr.v_edge(i + 1, j), tr.h_edge(i, j + 1),
                                        tr.v_edge(i, j)};
            std::array<int, 4> cut{};
            int n_cut = 0;
            for (int k = 0; k < 4; ++k)
                if (c[k] != c[(k + 1) % 4]) cut[n_cut++] = k;
            if (n_cut == 2) {
                segments.push_back({e[cut[0]], e[cut[1]]});
            } else if (n_cut == 4) {
                out.saddles.emplace_back(static_cast<int>(i), static_cast<int>(j));
                const SignedLog<> centre =
                    tr.value(i, j) + tr.value(i + 1, j) + tr.value(i + 1, j + 1) + tr.value(i, j + 1);
                if ((centre.sign >= 0) == c[0]) {
                    // Corners 0 and 2 connect through the centre: cut off 1 and 3.
                    segments.push_back({e[0], e[1]});
                    segments.push_back({e[2], e[3]});
                } else {
                    segments.push_back({e[3], e[0]});
                    segments.push_back({e[1], e[2]});
                }
            }
        }
    }

    std::unordered_map<long, std::vector<std::size_t>> at_edge;
    for (std::size_t s = 0; s < segments.size(); ++s)
        for (long e : segments[s]) at_edge[e].push_back(s);

    std::vector<bool> used(segments.size(), false);
    auto walk = [&](std::size_t first, long start_edge) {
        Polyline line;
        line.vertices.push_back(tr.vertex(start_edge));
        long edge = start_edge;
        std::size_t seg = first;
        while (true) {
            used[seg] = true;
            edge = segments[seg][0] == edge ? segments[seg][1] : segments[seg][0];
            line.vertices.push_back(tr.vertex(edge));
            if (edge == start_edge) {
                line.closed = true;
                break;
            }
            const auto& next = at_edge[edge];
            auto it = std::find_if(next.begin(), next.end(), [&](std::size_t s) { return !used[s]; });
            if (it == next.end()) break;
            seg = *it;
        }
        out.polylines.push_back(std::move(line));
    };

    // Open chains start at edges touched by one segment; whatever is left is closed.
    std::vector<long> ends;
    for (const auto& [edge, segs] : at_edge)
        if (segs.size() == 1) ends.push_back(edge);
    std::sort(ends.begin(), ends.end());
    for (long e : ends)
        if (!used[at_edge[e][0]]) walk(at_edge[e][0], e);
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (!used[s]) walk(s, segments[s][0]);
    return out;
}

std::vector<double> crossings_at_delta(const ContourSet& contours, double d) {
    std::vector<double> out;
    for (const auto& line : contours.polylines) {
        for (std::size_t k = 0; k + 1 < line.vertices.size(); ++k) {
            const Eigen::Vector2d& a = line.vertices[k];
            const Eigen::Vector2d& b = line.vertices[k + 1];
            if ((a.x() - d) * (b.x() - d) > 0.0 || a.x() == b.x()) continue;
            // Half-open test so a vertex exactly on the line is counted once.
            if (b.x() == d) continue;
            const double f = (d - a.x()) / (b.x() - a.x());
            out.push_back(a.y() + f * (b.y() - a.y()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_contours_csv(std::ostream& os, const ContourSet& contours, const PlaneGrid& grid) {
    const auto& d = grid.delta_axis;
    const auto& g = grid.g_axis;
    os << "# kind: " << curve_kind_name(contours.kind) << '\n'
       << "# baseline: " << contours.baseline.label() << '\n'
       << "# omega: " << format_double(grid.params.omega) << '\n'
       << "# epsilon: " << format_double(grid.params.epsilon) << '\n'
       << "# delta_window: " << format_double(d(0)) << ':' << format_double(d(d.size() - 1)) << ':'
       << d.size() - 1 << '\n'
       << "# g_window: " << format_double(g(0)) << ':' << format_double(g(g.size() - 1)) << ':'
       << g.size() - 1 << '\n'
       << "# truncation: n_max=" << grid.trunc.n_max << " tail_tol=" << format_double(grid.trunc.tail_tol)
       << " tail_run=" << grid.trunc.tail_run << " pole_guard=" << format_double(grid.trunc.pole_guard)
       << '\n'
       << "# flagged_nodes: " << grid.flagged_count() << " skipped_cells: " << contours.skipped_cells
       << " saddles: " << contours.saddles.size() << '\n';
    os << "baseline_N,branch,polyline_id,vertex_index,delta,g,closed_flag\n";
    for (std::size_t id = 0; id < contours.polylines.size(); ++id) {
        const auto& line = contours.polylines[id];
        for (std::size_t k = 0; k < line.vertices.size(); ++k)
            os << contours.baseline.n_level << ',' << branch_name(contours.baseline.branch) << ','
               << id << ',' << k << ',' << format_double(line.vertices[k].x()) << ','
               << format_double(line.vertices[k].y()) << ',' << (line.closed ? 1 : 0) << '\n';
    }
}

std::vector<std::filesystem::path> emit_figure(const std::vector<Baseline>& baselines,
                                               const ModelParams& p, const AxisRange& delta,
                                               const AxisRange& g, const Truncation& t,
                                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const Baseline& b : baselines) {
        for (CurveKind kind : {CurveKind::all, CurveKind::s1}) {
            const PlaneGrid grid = sample_plane(b, p, delta, g, kind, t);
            const ContourSet contours = trace_contours(grid);
            const auto path = dir / ("curves_N" + std::to_string(b.n_level)
                                     + (b.branch == Branch::plus ? "p" : "m") + "_"
                                     + curve_kind_name(kind) + ".csv");
            std::ofstream os(path);
            if (!os) throw std::runtime_error("cannot write " + path.string());
            write_contours_csv(os, contours, grid);
            if (!os) throw std::runtime_error("write failed for " + path.string());
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace rabi
