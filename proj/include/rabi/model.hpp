#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rabi {

/// Selects the +/- superscript of K_n, f_n, R and R-bar.
enum class Branch { plus, minus };

constexpr int sign_of(Branch b) { return b == Branch::plus ? 1 : -1; }
constexpr Branch opposite(Branch b) { return b == Branch::plus ? Branch::minus : Branch::plus; }
constexpr char branch_char(Branch b) { return b == Branch::plus ? '+' : '-'; }
inline std::string branch_name(Branch b) { return b == Branch::plus ? "plus" : "minus"; }
Branch parse_branch(const std::string& s);

/// Physical parameters of H = w a^dag a + g sx (a^dag + a) + D sz + e sx.
struct ModelParams {
    double omega = 1.0;
    double g = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;

    /// Throws std::invalid_argument unless omega > 0 (and g != 0 when require_coupling).
    void validate(bool require_coupling = true) const;

    ModelParams with_g(double coupling) const {
        ModelParams p = *this;
        p.g = coupling;
        return p;
    }
};

/// Series cutoffs and tolerances shared by every evaluator.
struct Truncation {
    int n_max = 200;
    double tail_tol = 1e-14;
    int tail_run = 5;
    /// Minimum distance from a pole, in units of omega.
    double pole_guard = 1e-8;

    void validate() const;

    double pole_guard_abs(double omega) const { return pole_guard * omega; }

    /// Same settings with n_max raised far enough that the series terms,
    /// which peak near n ~ 4 (g/w)^2, have decayed below tail_tol.
    Truncation adapted_to(double g, double omega) const;
};

/// Exceptional-energy candidate E = N w - g^2/w +/- e, i.e. x_p = N w +/- e.
struct Baseline {
    int n_level = 0;
    Branch branch = Branch::plus;

    double x_p(const ModelParams& p) const {
        return n_level * p.omega + sign_of(branch) * p.epsilon;
    }
    double energy(const ModelParams& p) const { return x_p(p) - p.g * p.g / p.omega; }

    /// Series branch whose R-bar denominators vanish at x_p.
    Branch pole_branch() const { return opposite(branch); }

    std::string label() const { return std::to_string(n_level) + branch_char(branch); }

    friend bool operator==(const Baseline&, const Baseline&) = default;
};

/// x is within pole_guard of a pole of the f_n / R-bar terms of one branch.
class PoleProximity : public std::runtime_error {
public:
    PoleProximity(int n, Branch b);
    int n() const { return n_; }
    Branch branch() const { return branch_; }

private:
    int n_;
    Branch branch_;
};

/// 2e/w is (numerically) a nonzero integer: poles of the two branches collide.
class ResonantParameters : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WindowExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotExceptional : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// True when 2e/w is within 1e-6 of a nonzero integer.
bool is_resonant(const ModelParams& p);
void require_non_resonant(const ModelParams& p);

}  // namespace rabi
