#include "rabi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rabi/exceptional.hpp"
#include "rabi/format.hpp"
#include "rabi/gfunction.hpp"
#include "rabi/parallel.hpp"
#include "rabi/roots.hpp"

namespace rabi {

namespace {

struct Node {
    double x = 0.0;
    int sign = 0;
    int baseline = -1;  // index into the window's baseline list
    bool converged = true;
};

std::vector<Baseline> baselines_inside(const ModelParams& p, double lo, double hi, int n_top) {
    std::vector<Baseline> out;
    for (int n = 0; n <= n_top; ++n) {
        for (Branch br : {Branch::plus, Branch::minus}) {
            const Baseline b{n, br};
            const double xp = b.x_p(p);
            if (xp <= lo || xp >= hi) continue;
            const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Baseline& o) {
                return o.x_p(p) == xp;
            });
            if (!duplicate) out.push_back(b);
        }
    }
    return out;
}

// Trisects every sign-change interval that has another sign change within
// three cells, repeated `passes` times with the cell shrinking each time.
void refine_clusters(std::vector<Node>& nodes, const RegularizedG& G, double cell, int passes) {
    for (int pass = 0; pass < passes; ++pass, cell /= 3.0) {
        std::vector<std::size_t> changes;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            if (nodes[i].sign * nodes[i + 1].sign < 0) changes.push_back(i);
        std::vector<bool> mark(nodes.size(), false);
        for (std::size_t a = 0; a + 1 < changes.size(); ++a) {
            const std::size_t i = changes[a], j = changes[a + 1];
            if (nodes[j].x - nodes[i + 1].x > 3.0 * cell) continue;
            for (std::size_t k = i; k <= j; ++k) mark[k] = true;
        }
        std::vector<Node> extra;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            if (!mark[i]) continue;
            const double lo = nodes[i].x, hi = nodes[i + 1].x;
            for (int k = 1; k <= 2; ++k) {
                Node n;
                n.x = lo + (hi - lo) * k / 3.0;
                const GValue v = G(n.x);
                n.sign = v.value.sign;
                n.converged = v.converged;
                extra.push_back(n);
            }
        }
        if (extra.empty()) return;
        nodes.insert(nodes.end(), extra.begin(), extra.end());
        std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.x < b.x; });
    }
}

}  // namespace

std::vector<SpectralPoint> scan_zeros(const ModelParams& p, double x_lo, double x_hi,
                                      const Truncation& t, const ScanOptions& opts) {
    p.validate();
    t.validate();
    if (!(x_lo < x_hi)) throw std::invalid_argument("scan window must satisfy x_lo < x_hi");
    if (!(opts.grid_step > 0.0) || opts.grid_step > 1.0 / 20.0 + 1e-15)
        throw std::invalid_argument("grid_step must lie in (0, omega/20]");

    const double w = p.omega;
    const Truncation te = t.adapted_to(p.g, w);
    const int n_prod = product_cutoff(x_hi, w);
    const RegularizedG G(p, te, n_prod);
    const double h = opts.grid_step * w;
    const std::vector<Baseline> bases = baselines_inside(p, x_lo, x_hi, n_prod);

    std::vector<Node> nodes;
    const int cells = static_cast<int>(std::ceil((x_hi - x_lo) / h));
    for (int k = 0; k <= cells; ++k) nodes.push_back({k == cells ? x_hi : x_lo + (x_hi - x_lo) * k / cells});
    for (std::size_t i = 0; i < bases.size(); ++i) {
        const double xp = bases[i].x_p(p);
        nodes.push_back({xp, 0, static_cast<int>(i)});
        // Geometric ladder around x_p: root pairs hugging a baseline.
        double off = h;
        for (int j = 0; j < 6; ++j) {
            off /= 3.0;
            for (double x : {xp - off, xp + off})
                if (x > x_lo && x < x_hi) nodes.push_back({x});
        }
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
        return a.x < b.x || (a.x == b.x && a.baseline > b.baseline);
    });
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](const Node& a, const Node& b) { return a.x == b.x; }),
                nodes.end());

    std::vector<bool> s1(bases.size(), false);
    for (std::size_t i = 0; i < bases.size(); ++i)
        s1[i] = bases[i].n_level > 0 && constraint_distance(bases[i], p, te) < opts.s1_tol;

    for (Node& n : nodes) {
        const GValue v = n.baseline >= 0 ? G.at_baseline(bases[n.baseline]) : G(n.x);
        n.sign = v.value.sign;
        n.converged = v.converged;
        if (n.baseline >= 0 && s1[n.baseline]) n.sign = 0;
    }
    refine_clusters(nodes, G, h, 3);

    auto sign_at = [&](double x) { return G(x).value.sign; };
    const double guard = t.pole_guard_abs(w);
    std::vector<SpectralPoint> out;
    auto emit = [&](double x, int multiplicity, bool converged) {
        for (int m = 0; m < multiplicity; ++m) {
            SpectralPoint sp;
            sp.x = x;
            sp.energy = x - p.g * p.g / w;
            sp.on_baseline = nearest_baseline(x, p, guard);
            sp.converged = converged;
            out.push_back(sp);
        }
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (n.sign == 0) {
            // A zero node sits on a baseline; the neighbours decide the parity.
            int left = 0, right = 0;
            for (std::size_t k = i; k-- > 0;)
                if (nodes[k].sign != 0) { left = nodes[k].sign; break; }
            for (std::size_t k = i + 1; k < nodes.size(); ++k)
                if (nodes[k].sign != 0) { right = nodes[k].sign; break; }
            // Constraint roots are double zeros only when the two branches coincide.
            const bool s1_double = n.baseline >= 0 && s1[n.baseline] && p.epsilon == 0.0;
            const bool double_root = s1_double || (left != 0 && left == right);
            emit(n.x, double_root ? 2 : 1, n.converged);
            continue;
        }
        if (i + 1 < nodes.size() && nodes[i + 1].sign != 0 && nodes[i + 1].sign != n.sign) {
            const double root = bisect_sign(sign_at, n.x, nodes[i + 1].x, n.sign, opts.x_tol * w);
            emit(root, 1, n.converged && nodes[i + 1].converged);
        }
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const SpectralPoint& a, const SpectralPoint& b) { return a.x < b.x; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
}

std::vector<SpectralPoint> energy_levels(const ModelParams& p, int count, const Truncation& t,
                                         const ScanOptions& opts) {
    p.validate();
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    const double w = p.omega;
    // x = E + g^2/w is bounded below by -sqrt(D^2 + e^2).
    const double x_lo = -(std::hypot(p.delta, p.epsilon) + w);
    double span = (0.5 * count + 3.0) * w;
    while (true) {
        if (span > opts.x_ceiling * w)
            throw WindowExhausted("could not find " + std::to_string(count)
                                  + " levels below x = " + std::to_string(x_lo + opts.x_ceiling * w));
        const double x_hi = x_lo + span;
        auto pts = scan_zeros(p, x_lo, x_hi, t, opts);
        // Keep one omega of margin so a root pair at the edge is not split.
        const auto usable = std::count_if(pts.begin(), pts.end(),
                                          [&](const SpectralPoint& s) { return s.x < x_hi - w; });
        if (usable >= count) {
            pts.resize(count);
            return pts;
        }
        span *= 2.0;
    }
}

bool SpectrumSweep::any_flagged() const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (truncated[i]) return true;
        for (const auto& sp : levels[i])
            if (!sp.converged) return true;
    }
    return false;
}

SpectrumSweep sweep_spectrum(const ModelParams& p, double g_lo, double g_hi, int steps, int count,
                             const Truncation& t, const ScanOptions& opts) {
    if (!(g_lo > 0.0) || !(g_hi > g_lo)) throw std::invalid_argument("sweep needs 0 < g_lo < g_hi");
    if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
    SpectrumSweep sweep;
    sweep.params = p;
    sweep.count = count;
    sweep.g_values = Eigen::VectorXd::LinSpaced(steps, g_lo, g_hi);
    sweep.levels.assign(steps, {});
    sweep.truncated.assign(steps, false);
    std::vector<char> truncated(steps, 0);
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
        try {
            sweep.levels[i] = energy_levels(p.with_g(sweep.g_values(i)), count, t, opts);
        } catch (const WindowExhausted&) {
            truncated[i] = 1;
        }
    });
    for (int i = 0; i < steps; ++i) sweep.truncated[i] = truncated[i] != 0;
    return sweep;
}

void write_sweep_csv(std::ostream& os, const SpectrumSweep& sweep,
                     const std::vector<Eigen::VectorXd>* oracle_levels) {
    os << "g,N,x,E,on_baseline" << (oracle_levels ? ",oracle_dE" : "") << '\n';
    for (Eigen::Index i = 0; i < sweep.g_values.size(); ++i) {
        for (const auto& sp : sweep.levels[i]) {
            os << format_double(sweep.g_values(i)) << ',' << sp.index << ',' << format_double(sp.x)
               << ',' << format_double(sp.energy) << ','
               << (sp.on_baseline ? sp.on_baseline->label() : std::string());
            if (oracle_levels) {
                const auto& ref = (*oracle_levels)[i];
                os << ',';
                if (sp.index < ref.size()) os << format_double(sp.energy - ref(sp.index));
            }
            os << '\n';
        }
    }
}

void write_baselines_csv(std::ostream& os, const SpectrumSweep& sweep, int n_top) {
    const ModelParams& p = sweep.params;
    os << "g,baseline_N,branch,E\n";
    for (Eigen::Index i = 0; i < sweep.g_values.size(); ++i) {
        const ModelParams q = p.with_g(sweep.g_values(i));
        for (int n = 0; n <= n_top; ++n)
            for (Branch br : {Branch::plus, Branch::minus})
                os << format_double(q.g) << ',' << n << ',' << branch_name(br) << ','
                   << format_double(Baseline{n, br}.energy(q)) << '\n';
    }
}

}  // namespace rabi
