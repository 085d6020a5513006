#include "rabi/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rabi/series.hpp"

namespace rabi {

namespace {

using SL = SignedLog<>;

SL abs_of(SL v) {
    v.sign = v.sign == 0 ? 0 : 1;
    return v;
}

bool less_mag(const SL& a, const SL& b) {
    if (a.sign == 0) return b.sign != 0;
    if (b.sign == 0) return false;
    return a.log_mag < b.log_mag;
}

}  // namespace

GValue g_eps(double x, const ModelParams& p, const Truncation& t) {
    const auto plus = branch_sums(x, p, Branch::plus, t);
    const auto minus = branch_sums(x, p, Branch::minus, t);

    const SL dd = SL::from_value(p.delta * p.delta);
    const SL bar_part = dd * SL::from_value(plus.rbar.value) * SL::from_value(minus.rbar.value);
    const SL plain_part = SL::from_value(plus.r.value) * SL::from_value(minus.r.value);

    GValue out;
    out.value = bar_part - plain_part;
    out.converged = plus.r.converged && plus.rbar.converged && minus.r.converged
                 && minus.rbar.converged;
    out.stop_index = std::max({plus.r.stop_index, plus.rbar.stop_index, minus.r.stop_index,
                               minus.rbar.stop_index});
    return out;
}

int product_cutoff(double x_max, double omega) {
    return std::max(0, static_cast<int>(std::ceil(x_max / omega)) + 1);
}

SL pole_product(double x, const ModelParams& p, int n_prod) {
    SL prod = SL::from_value(1.0);
    for (int n = 0; n <= n_prod; ++n) {
        const double shifted = x - n * p.omega;
        prod *= SL::from_value(shifted - p.epsilon);
        prod *= SL::from_value(shifted + p.epsilon);
    }
    return prod;
}

GValue g_reg(double x, const ModelParams& p, const Truncation& t, int n_prod) {
    if (n_prod < 0) throw std::invalid_argument("g_reg: n_prod must be >= 0");
    GValue v = g_eps(x, p, t);
    v.value *= pole_product(x, p, n_prod);
    return v;
}

GValue g_reg_at_baseline(const Baseline& b, const ModelParams& p, const Truncation& t,
                         BaselineLimitOptions opts) {
    p.validate();
    require_non_resonant(p);
    if (b.n_level < 0) throw std::invalid_argument("baseline level must be >= 0");
    const double xp = b.x_p(p);
    const int n_prod = opts.n_prod < 0 ? product_cutoff(xp, p.omega) : opts.n_prod;
    if (n_prod < b.n_level)
        throw std::invalid_argument("n_prod does not reach the baseline pole");

    const double h = opts.delta * p.omega;
    GValue out;
    SL largest;
    auto symmetric = [&](double step) {
        const GValue above = g_reg(xp + step, p, t, n_prod);
        const GValue below = g_reg(xp - step, p, t, n_prod);
        out.converged = out.converged && above.converged && below.converged;
        out.stop_index = std::max({out.stop_index, above.stop_index, below.stop_index});
        for (const SL& v : {above.value, below.value})
            if (less_mag(largest, v)) largest = abs_of(v);
        return (above.value + below.value).scaled(0.5);
    };

    const SL coarse = symmetric(h);
    const SL fine = symmetric(0.5 * h);
    const SL estimate = (fine.scaled(4.0) - coarse).scaled(1.0 / 3.0);

    SL floor = abs_of(coarse - fine).scaled(10.0);
    // Values below the rounding level of the stencil samples carry no sign.
    const SL rounding = largest.scaled(64.0 * std::numeric_limits<double>::epsilon());
    if (less_mag(floor, rounding)) floor = rounding;

    if (less_mag(abs_of(estimate), floor)) {
        out.value = SL::zero();
    } else {
        out.value = estimate;
        out.ambiguous = less_mag(abs_of(estimate), floor.scaled(2.0));
    }
    return out;
}

GValue g_reg_at_baseline_residue(const Baseline& b, const ModelParams& p, const Truncation& t,
                                 int n_prod) {
    p.validate();
    t.validate();
    require_non_resonant(p);
    if (p.epsilon == 0.0)
        throw std::invalid_argument("residue evaluator requires epsilon != 0 (simple pole)");
    const int N = b.n_level;
    if (N < 0) throw std::invalid_argument("baseline level must be >= 0");
    const double xp = b.x_p(p);
    if (n_prod < 0) n_prod = product_cutoff(xp, p.omega);
    if (n_prod < N) throw std::invalid_argument("n_prod does not reach the baseline pole");

    const Branch regular = b.branch;
    const Branch singular = b.pole_branch();
    const double ratio = p.g / p.omega;

    // Regular branch: plain values at x_p.
    const auto reg = branch_sums(xp, p, regular, t);

    // Pole branch: scaled K_n (g/w)^n up to N are regular at x_p.
    Vector<double> k = k_sequence(xp, p, singular, N, t);
    double scaled_kn = k(N) * std::pow(ratio, N);
    // K_N below the rounding level of the recurrence terms is a zero of the constraint.
    double k_scale = 0.0;
    for (int n = 0; n <= N; ++n) k_scale = std::max(k_scale, std::abs(k(n) * std::pow(ratio, n)));
    if (std::abs(scaled_kn) < 64.0 * std::numeric_limits<double>::epsilon() * k_scale) scaled_kn = 0.0;

    // Residues a_n (g/w)^n for n > N obey the same recurrence with a_N = 0.
    auto d_at = [&](int n) { return detail::pole_denominator(n, xp, p, singular); };
    double res_prev2 = 0.0;
    double res_prev = p.delta * p.delta / (2.0 * p.g) * scaled_kn * ratio / (N + 1);
    SeriesSum<double> res_r{res_prev, N + 1, false};
    SeriesSum<double> res_rbar{scaled_kn + res_prev / d_at(N + 1), N + 1, false};
    detail::TailTracker<double> tr{res_r, 0, false};
    detail::TailTracker<double> tb{res_rbar, 0, false};
    for (int n = N + 2; n <= t.n_max && !(tr.done && tb.done); ++n) {
        const double d_prev = d_at(n - 1);
        const double f = detail::f_unchecked(n - 1, xp, d_prev, p, singular);
        const double term = (f * ratio * res_prev - ratio * ratio * res_prev2) / n;
        tr.add(n, term, t);
        tb.add(n, term / d_at(n), t);
        res_prev2 = res_prev;
        res_prev = term;
    }

    const SL first = SL::from_value(p.delta * p.delta) * SL::from_value(reg.rbar.value)
                   * SL::from_value(res_rbar.value);
    const SL second = SL::from_value(reg.r.value) * SL::from_value(res_r.value);
    SL residue = first - second;
    // A difference below the rounding level of its two products carries no sign.
    const SL larger = less_mag(first, second) ? abs_of(second) : abs_of(first);
    if (less_mag(abs_of(residue), larger.scaled(64.0 * std::numeric_limits<double>::epsilon())))
        residue = SL::zero();

    // Product with the vanishing factor replaced by its unit derivative.
    SL rest = SL::from_value(1.0);
    for (int n = 0; n <= n_prod; ++n) {
        const double shifted = xp - n * p.omega;
        const double minus_e = shifted - p.epsilon;
        const double plus_e = shifted + p.epsilon;
        const bool vanishing_minus = n == N && b.branch == Branch::plus;
        const bool vanishing_plus = n == N && b.branch == Branch::minus;
        if (!vanishing_minus) rest *= SL::from_value(minus_e);
        if (!vanishing_plus) rest *= SL::from_value(plus_e);
    }

    GValue out;
    out.value = residue * rest;
    out.converged = reg.r.converged && reg.rbar.converged && tr.done && tb.done;
    out.stop_index = out.converged ? std::max({reg.r.stop_index, reg.rbar.stop_index,
                                               res_r.stop_index, res_rbar.stop_index})
                                   : t.n_max;
    return out;
}

std::optional<Baseline> nearest_baseline(double x, const ModelParams& p, double radius) {
    std::optional<Baseline> best;
    double best_dist = radius;
    for (Branch br : {Branch::plus, Branch::minus}) {
        const int n = static_cast<int>(std::lround((x - sign_of(br) * p.epsilon) / p.omega));
        if (n < 0) continue;
        const Baseline cand{n, br};
        const double dist = std::abs(x - cand.x_p(p));
        if (dist <= best_dist && (!best || dist < best_dist)) {
            best = cand;
            best_dist = dist;
        }
    }
    return best;
}

RegularizedG::RegularizedG(const ModelParams& p, const Truncation& t, int n_prod,
                           BaselineLimitOptions opts)
    : params_(p), trunc_(t), n_prod_(n_prod), opts_(opts) {
    params_.validate();
    trunc_.validate();
    if (n_prod_ < 0) throw std::invalid_argument("n_prod must be >= 0");
    opts_.n_prod = n_prod_;
}

GValue RegularizedG::at_baseline(const Baseline& b) const {
    return g_reg_at_baseline(b, params_, trunc_, opts_);
}

GValue RegularizedG::operator()(double x) const {
    const double h = stencil();
    const auto near = nearest_baseline(x, params_, h);
    if (!near || near->n_level > n_prod_) return g_reg(x, params_, trunc_, n_prod_);

    const double xp = near->x_p(params_);
    GValue centre = at_baseline(*near);
    const GValue above = g_reg(xp + h, params_, trunc_, n_prod_);
    const GValue below = g_reg(xp - h, params_, trunc_, n_prod_);
    const SL slope = (above.value - below.value).scaled(0.5 / h);
    const double offset = x - xp;
    if (offset != 0.0) centre.value = centre.value + slope.scaled(offset);
    centre.converged = centre.converged && above.converged && below.converged;
    return centre;
}

}  // namespace rabi
