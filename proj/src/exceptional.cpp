#include "rabi/exceptional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "rabi/gfunction.hpp"
#include "rabi/oracle.hpp"
#include "rabi/roots.hpp"
#include "rabi/series.hpp"

namespace rabi {

namespace {

int sign_of_value(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void require_window(double g_lo, double g_hi) {
    if (!(g_lo > 0.0) || !(g_hi > g_lo))
        throw std::invalid_argument("g window must satisfy 0 < g_lo < g_hi");
}

// Roots of a sign function over a uniform grid on [lo, hi]: exact zeros at
// nodes plus bisected sign changes between nodes.
template <class SignAt>
std::vector<double> grid_roots(SignAt&& sign_at, double lo, double hi, int steps, double tol) {
    if (steps < 1) throw std::invalid_argument("grid needs at least one step");
    std::vector<double> nodes(steps + 1);
    std::vector<int> signs(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        nodes[i] = i == steps ? hi : lo + (hi - lo) * i / steps;
        signs[i] = sign_at(nodes[i]);
    }
    std::vector<double> roots;
    for (int i = 0; i <= steps; ++i) {
        if (signs[i] == 0) {
            roots.push_back(nodes[i]);
            continue;
        }
        if (i < steps && signs[i + 1] != 0 && signs[i] != signs[i + 1])
            roots.push_back(bisect_sign(sign_at, nodes[i], nodes[i + 1], signs[i], tol));
    }
    return roots;
}

int baseline_sign(const Baseline& b, const ModelParams& p, const Truncation& t) {
    return g_reg_at_baseline(b, p, t.adapted_to(p.g, p.omega)).value.sign;
}

}  // namespace

std::string class_name(PointClass c) {
    switch (c) {
        case PointClass::S1: return "S1";
        case PointClass::S2: return "S2";
        case PointClass::ambiguous: return "ambiguous";
    }
    return "ambiguous";
}

DegeneracyCheck oracle_degeneracy(const ModelParams& p, double energy) {
    const int first_cutoff = recommended_cutoff(p);
    const auto rough = eigenvalues(build_hamiltonian(p, first_cutoff)).values;
    const auto below = std::count_if(rough.begin(), rough.end(),
                                     [&](double v) { return v < energy + 0.02; });
    const int count = std::max<int>(2, static_cast<int>(below) + 1);
    const OracleSpectrum spec = oracle_levels(p, count, first_cutoff);

    DegeneracyCheck out;
    out.energy = energy;
    out.fock_cutoff = spec.fock_cutoff;
    out.converged = spec.converged;
    std::vector<double> vals(spec.values.begin(), spec.values.end());
    for (double v : vals) {
        out.within_1e4 += std::abs(v - energy) < 1e-4;
        out.within_1e2 += std::abs(v - energy) < 1e-2;
    }
    std::sort(vals.begin(), vals.end(), [&](double a, double b) {
        return std::abs(a - energy) < std::abs(b - energy);
    });
    out.pair_gap = vals.size() >= 2 ? std::abs(vals[0] - vals[1])
                                    : std::numeric_limits<double>::infinity();
    return out;
}

double constraint_value(const Baseline& b, const ModelParams& p, const Truncation& t) {
    p.validate();
    require_non_resonant(p);
    if (b.n_level < 0) throw std::invalid_argument("baseline level must be >= 0");
    if (b.n_level == 0) return 1.0;
    return k_sequence<double>(b.x_p(p), p, b.pole_branch(), b.n_level, t)(b.n_level);
}

double constraint_distance(const Baseline& b, const ModelParams& p, const Truncation& t) {
    const double value = constraint_value(b, p, t);
    const double h = 1e-6 * std::max(std::abs(p.g), 1e-3);
    const double slope = (constraint_value(b, p.with_g(p.g + h), t)
                          - constraint_value(b, p.with_g(p.g - h), t))
                       / (2.0 * h);
    if (slope == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(value / slope);
}

ExceptionalPoint classify(const Baseline& b, const ModelParams& p, const Truncation& t,
                          const ExceptionalOptions& opts) {
    p.validate();
    const Truncation te = t.adapted_to(p.g, p.omega);

    bool zero = g_reg_at_baseline(b, p, te).value.is_zero();
    if (!zero) {
        const double h = std::max(100.0 * opts.g_tol, 1e-9 * std::max(1.0, std::abs(p.g)));
        const int lo = baseline_sign(b, p.with_g(p.g - h), t);
        const int hi = baseline_sign(b, p.with_g(p.g + h), t);
        zero = lo == 0 || hi == 0 || lo != hi;
    }
    if (!zero)
        throw NotExceptional("regularized G does not vanish on baseline " + b.label()
                             + " at g = " + std::to_string(p.g));

    ExceptionalPoint pt;
    pt.baseline = b;
    pt.delta = p.delta;
    pt.g = p.g;
    pt.x_p = b.x_p(p);
    pt.energy = b.energy(p);
    pt.constraint_value = constraint_value(b, p, te);
    pt.constraint_distance = constraint_distance(b, p, te);
    if (pt.constraint_distance < opts.s1_tol) pt.cls = PointClass::S1;
    else if (pt.constraint_distance > 100.0 * opts.s1_tol) pt.cls = PointClass::S2;
    else pt.cls = PointClass::ambiguous;

    if (opts.verify_with_oracle) {
        pt.oracle = oracle_degeneracy(p, pt.energy);
        pt.oracle_checked = true;
        // Constraint roots are two-fold degenerate only in the unbiased model;
        // with e != 0 a single level passes through the baseline.
        const bool expect_pair = pt.cls == PointClass::S1 && p.epsilon == 0.0;
        const bool agrees = pt.cls == PointClass::ambiguous
                         || (expect_pair ? pt.oracle.degenerate_pair() : pt.oracle.single());
        if (!agrees) pt.cls = PointClass::ambiguous;
    }
    return pt;
}

std::vector<ExceptionalPoint> find_s1(const Baseline& b, const ModelParams& p, double g_lo,
                                      double g_hi, const Truncation& t,
                                      const ExceptionalOptions& opts) {
    require_window(g_lo, g_hi);
    if (b.n_level == 0) return {};  // K_0 = 1
    auto sign_at = [&](double g) { return sign_of_value(constraint_value(b, p.with_g(g), t)); };
    std::vector<ExceptionalPoint> out;
    for (double g : grid_roots(sign_at, g_lo, g_hi, opts.s1_steps, opts.g_tol))
        out.push_back(classify(b, p.with_g(g), t, opts));
    return out;
}

std::vector<ExceptionalPoint> find_s2(const Baseline& b, const ModelParams& p, double g_lo,
                                      double g_hi, const Truncation& t,
                                      const ExceptionalOptions& opts) {
    require_window(g_lo, g_hi);
    std::vector<double> s1_roots;
    if (b.n_level > 0) {
        auto k_sign = [&](double g) { return sign_of_value(constraint_value(b, p.with_g(g), t)); };
        s1_roots = grid_roots(k_sign, g_lo, g_hi, opts.s1_steps, opts.g_tol);
    }
    const double exclusion = std::max(1e3 * opts.g_tol, 1e-7);

    auto sign_at = [&](double g) { return baseline_sign(b, p.with_g(g), t); };
    std::vector<ExceptionalPoint> out;
    for (double g : grid_roots(sign_at, g_lo, g_hi, opts.s2_steps, opts.g_tol)) {
        const bool is_s1 = std::any_of(s1_roots.begin(), s1_roots.end(),
                                       [&](double r) { return std::abs(r - g) < exclusion; });
        if (is_s1) continue;
        ExceptionalPoint pt = classify(b, p.with_g(g), t, opts);
        // A root that classify still calls S1 is not part of this subset's count.
        if (pt.cls == PointClass::S1) pt.cls = PointClass::ambiguous;
        out.push_back(pt);
    }
    return out;
}

std::string exceptional_json(const std::vector<ExceptionalPoint>& points, int indent) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& pt : points) {
        nlohmann::ordered_json rec;
        rec["N"] = pt.baseline.n_level;
        rec["branch"] = branch_name(pt.baseline.branch);
        rec["delta"] = pt.delta;
        rec["g"] = pt.g;
        rec["x_p"] = pt.x_p;
        rec["energy"] = pt.energy;
        rec["class"] = class_name(pt.cls);
        rec["constraint_value"] = pt.constraint_value;
        arr.push_back(std::move(rec));
    }
    return arr.dump(indent);
}

}  // namespace rabi
