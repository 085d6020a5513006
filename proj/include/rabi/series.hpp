#pragma once

#include <cmath>
#include <cstdlib>

#include <Eigen/Core>

#include "rabi/model.hpp"

namespace rabi {

template <typename Scalar = double>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A truncated series value together with the index at which it stopped.
template <typename Scalar = double>
struct SeriesSum {
    Scalar value{0};
    int stop_index = 0;
    bool converged = false;
};

template <typename Scalar = double>
struct BranchSums {
    SeriesSum<Scalar> r;
    SeriesSum<Scalar> rbar;
};

namespace detail {

// x - n w + s e, the denominator shared by f_n and the n-th R-bar term.
template <typename Scalar>
Scalar pole_denominator(int n, Scalar x, const ModelParams& p, Branch b) {
    return x - Scalar(n) * Scalar(p.omega) + Scalar(sign_of(b)) * Scalar(p.epsilon);
}

template <typename Scalar>
void require_pole_distance(int n, Scalar d, const ModelParams& p, Branch b, const Truncation& t) {
    using std::abs;
    if (abs(d) <= Scalar(t.pole_guard_abs(p.omega))) throw PoleProximity(n, b);
}

// f_n without validation or pole check; d is pole_denominator(n, x, ...).
template <typename Scalar>
Scalar f_unchecked(int n, Scalar x, Scalar d, const ModelParams& p, Branch b) {
    const Scalar w(p.omega), g(p.g), D(p.delta), e(p.epsilon);
    return Scalar(2) * g / w
         + (Scalar(n) * w - x + Scalar(sign_of(b)) * e + D * D / d) / (Scalar(2) * g);
}

// Tracks the run of consecutive small terms of one partial sum.
template <typename Scalar>
struct TailTracker {
    SeriesSum<Scalar>& sum;
    int run = 0;
    bool done = false;

    void add(int n, Scalar term, const Truncation& t) {
        using std::abs;
        if (done) return;
        sum.value += term;
        sum.stop_index = n;
        if (n > 0 && abs(term) < Scalar(t.tail_tol) * abs(sum.value)) {
            if (++run >= t.tail_run) {
                done = true;
                sum.converged = true;
            }
        } else {
            run = 0;
        }
    }
};

// Shared term loop for R and R-bar. Terms are carried already scaled by
// (g/w)^n so neither K_n nor the power is ever formed on its own.
template <typename Scalar>
BranchSums<Scalar> accumulate(Scalar x, const ModelParams& p, Branch b, const Truncation& t,
                              bool want_r, bool want_rbar) {
    p.validate();
    t.validate();
    BranchSums<Scalar> out;
    TailTracker<Scalar> r{out.r, 0, !want_r};
    TailTracker<Scalar> rbar{out.rbar, 0, !want_rbar};

    const Scalar ratio = Scalar(p.g) / Scalar(p.omega);
    Scalar d_prev = pole_denominator(0, x, p, b);

    Scalar t_prev2(0);
    Scalar t_prev(1);
    r.add(0, t_prev, t);
    if (want_rbar) {
        require_pole_distance(0, d_prev, p, b, t);
        rbar.add(0, t_prev / d_prev, t);
    }

    for (int n = 1; n <= t.n_max && !(r.done && rbar.done); ++n) {
        const Scalar d = pole_denominator(n, x, p, b);
        // R alone only needs d_{n-1}; R-bar also divides by d_n.
        require_pole_distance(n - 1, d_prev, p, b, t);
        if (!rbar.done) require_pole_distance(n, d, p, b, t);
        const Scalar f = f_unchecked(n - 1, x, d_prev, p, b);
        const Scalar term = (f * ratio * t_prev - ratio * ratio * t_prev2) / Scalar(n);
        r.add(n, term, t);
        rbar.add(n, term / d, t);
        t_prev2 = t_prev;
        t_prev = term;
        d_prev = d;
    }
    return out;
}

}  // namespace detail

/// f_n(x) = 2g/w + (n w - x +/- e + D^2 / (x - n w +/- e)) / (2g).
template <typename Scalar = double>
Scalar f_coeff(int n, Scalar x, const ModelParams& p, Branch b, const Truncation& t = {}) {
    p.validate();
    const Scalar d = detail::pole_denominator(n, x, p, b);
    detail::require_pole_distance(n, d, p, b, t);
    return detail::f_unchecked(n, x, d, p, b);
}

/// K_0 .. K_{n_last} from n K_n = f_{n-1} K_{n-1} - K_{n-2}, K_0 = 1, K_1 = f_0.
/// Only f_0 .. f_{n_last-1} are touched, so x may sit on the pole of f_{n_last}.
template <typename Scalar = double>
Vector<Scalar> k_sequence(Scalar x, const ModelParams& p, Branch b, int n_last,
                          const Truncation& t = {}) {
    p.validate();
    if (n_last < 0) throw std::invalid_argument("k_sequence: n_last must be >= 0");
    Vector<Scalar> k(n_last + 1);
    k(0) = Scalar(1);
    for (int n = 1; n <= n_last; ++n) {
        const Scalar d = detail::pole_denominator(n - 1, x, p, b);
        detail::require_pole_distance(n - 1, d, p, b, t);
        const Scalar f = detail::f_unchecked(n - 1, x, d, p, b);
        const Scalar km2 = n >= 2 ? k(n - 2) : Scalar(0);
        k(n) = (f * k(n - 1) - km2) / Scalar(n);
    }
    return k;
}

template <typename Scalar = double>
Vector<Scalar> k_sequence(Scalar x, const ModelParams& p, Branch b, const Truncation& t = {}) {
    t.validate();
    return k_sequence<Scalar>(x, p, b, t.n_max, t);
}

/// R(x) = sum_n K_n (g/w)^n, truncated by the tail rule of `t`.
template <typename Scalar = double>
SeriesSum<Scalar> r_series(Scalar x, const ModelParams& p, Branch b, const Truncation& t = {}) {
    return detail::accumulate<Scalar>(x, p, b, t, true, false).r;
}

/// R-bar(x) = sum_n K_n (g/w)^n / (x - n w +/- e).
template <typename Scalar = double>
SeriesSum<Scalar> rbar_series(Scalar x, const ModelParams& p, Branch b, const Truncation& t = {}) {
    return detail::accumulate<Scalar>(x, p, b, t, false, true).rbar;
}

/// Both sums of one branch in a single pass.
template <typename Scalar = double>
BranchSums<Scalar> branch_sums(Scalar x, const ModelParams& p, Branch b, const Truncation& t = {}) {
    return detail::accumulate<Scalar>(x, p, b, t, true, true);
}

}  // namespace rabi
