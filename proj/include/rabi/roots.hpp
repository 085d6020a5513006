#pragma once

#include <stdexcept>

namespace rabi {

/// Bisects a bracket whose left end has sign s_lo (nonzero) and right end the
/// opposite sign, until the bracket is narrower than tol. A probe that lands
/// on an exact zero ends the search there.
template <class SignAt>
double bisect_sign(SignAt&& sign_at, double lo, double hi, int s_lo, double tol) {
    if (!(lo < hi) || s_lo == 0) throw std::invalid_argument("bisect_sign: bad bracket");
    while (hi - lo >= tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const int s = sign_at(mid);
        if (s == 0) return mid;
        if (s == s_lo) lo = mid;
        else hi = mid;
    }
    return lo + 0.5 * (hi - lo);
}

}  // namespace rabi
