#include "rabi/model.hpp"

#include <algorithm>

namespace rabi {

Branch parse_branch(const std::string& s) {
    if (s == "plus" || s == "+" || s == "p") return Branch::plus;
    if (s == "minus" || s == "-" || s == "m") return Branch::minus;
    throw std::invalid_argument("unknown branch '" + s + "' (expected plus or minus)");
}

void ModelParams::validate(bool require_coupling) const {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("omega must be a finite positive number");
    if (!std::isfinite(g) || !std::isfinite(delta) || !std::isfinite(epsilon))
        throw std::invalid_argument("model parameters must be finite");
    if (require_coupling && g == 0.0)
        throw std::invalid_argument("g must be nonzero for G-function evaluation");
}

void Truncation::validate() const {
    if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be > 0");
    if (tail_run < 1) throw std::invalid_argument("tail_run must be >= 1");
    if (!(pole_guard > 0.0)) throw std::invalid_argument("pole_guard must be > 0");
}

Truncation Truncation::adapted_to(double g, double omega) const {
    Truncation t = *this;
    const double r = g / omega;
    t.n_max = std::max(n_max, static_cast<int>(std::ceil(8.0 * r * r)) + 80);
    return t;
}

PoleProximity::PoleProximity(int n, Branch b)
    : std::runtime_error("x within pole_guard of pole n=" + std::to_string(n) + " of branch "
                         + branch_name(b)),
      n_(n),
      branch_(b) {}

bool is_resonant(const ModelParams& p) {
    const double ratio = 2.0 * p.epsilon / p.omega;
    const double nearest = std::round(ratio);
    return nearest != 0.0 && std::abs(ratio - nearest) < 1e-6;
}

void require_non_resonant(const ModelParams& p) {
    if (is_resonant(p))
        throw ResonantParameters("2*epsilon/omega = " + std::to_string(2.0 * p.epsilon / p.omega)
                                 + " is a nonzero integer; branch poles collide");
}

}  // namespace rabi
