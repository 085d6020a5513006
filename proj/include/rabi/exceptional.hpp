#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rabi/model.hpp"

namespace rabi {

enum class PointClass { S1, S2, ambiguous };

std::string class_name(PointClass c);

/// Oracle view of the spectrum around one energy.
struct DegeneracyCheck {
    double energy = 0.0;
    int within_1e4 = 0;  // eigenvalues with |lambda - E| < 1e-4
    int within_1e2 = 0;  // eigenvalues with |lambda - E| < 1e-2
    double pair_gap = 0.0;  // gap between the two eigenvalues closest to E
    int fock_cutoff = 0;
    bool converged = false;

    bool degenerate_pair() const { return within_1e4 >= 2 && pair_gap < 1e-6; }
    bool single() const { return within_1e4 == 1 && within_1e2 == 1; }
};

DegeneracyCheck oracle_degeneracy(const ModelParams& p, double energy);

/// A baseline point of the spectrum with its S1/S2 label.
struct ExceptionalPoint {
    Baseline baseline;
    double delta = 0.0;
    double g = 0.0;
    double x_p = 0.0;
    double energy = 0.0;
    PointClass cls = PointClass::ambiguous;
    /// K_N of the pole branch at x_p.
    double constraint_value = 0.0;
    /// Distance in g to the nearest constraint root, |K| / |dK/dg|.
    double constraint_distance = 0.0;
    bool oracle_checked = false;
    DegeneracyCheck oracle;
};

struct ExceptionalOptions {
    int s1_steps = 400;
    int s2_steps = 2000;
    double g_tol = 1e-10;
    /// S1 when |K| < s1_tol |dK/dg|; S2 above 100 s1_tol; ambiguous between.
    double s1_tol = 1e-8;
    bool verify_with_oracle = true;
};

/// K_N^{-/+}(x_p): the constraint polynomial of the baseline, evaluated numerically.
double constraint_value(const Baseline& b, const ModelParams& p, const Truncation& t = {});

/// |K| / |dK/dg| at the current coupling; infinity when K does not depend on g.
double constraint_distance(const Baseline& b, const ModelParams& p, const Truncation& t = {});

/// Roots in g of the constraint value on (g_lo, g_hi]; p supplies w, D, e.
std::vector<ExceptionalPoint> find_s1(const Baseline& b, const ModelParams& p, double g_lo,
                                      double g_hi, const Truncation& t = {},
                                      const ExceptionalOptions& opts = {});

/// Sign-change roots in g of the regularized G at x_p, minus the S1 roots.
std::vector<ExceptionalPoint> find_s2(const Baseline& b, const ModelParams& p, double g_lo,
                                      double g_hi, const Truncation& t = {},
                                      const ExceptionalOptions& opts = {});

/// Labels a candidate (b, p.delta, p.g). Throws NotExceptional when the
/// regularized G does not vanish at x_p.
ExceptionalPoint classify(const Baseline& b, const ModelParams& p, const Truncation& t = {},
                          const ExceptionalOptions& opts = {});

/// {N, branch, delta, g, x_p, energy, class, constraint_value} per record.
std::string exceptional_json(const std::vector<ExceptionalPoint>& points, int indent = 2);

}  // namespace rabi
