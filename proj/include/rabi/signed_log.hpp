#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rabi {

/// A real number stored as sign * exp(log_mag). Zero is canonical: sign 0.
template <typename Scalar = double>
struct SignedLog {
    int sign = 0;
    Scalar log_mag = -std::numeric_limits<Scalar>::infinity();

    static SignedLog zero() { return {}; }

    static SignedLog from_value(Scalar v) {
        using std::abs;
        using std::log;
        if (v == Scalar(0)) return {};
        return {v > 0 ? 1 : -1, log(abs(v))};
    }

    /// Overflows to +/-inf when the magnitude is not representable.
    Scalar to_value() const {
        using std::exp;
        if (sign == 0) return Scalar(0);
        return sign * exp(log_mag);
    }

    bool is_zero() const { return sign == 0; }

    SignedLog operator-() const { return {-sign, log_mag}; }

    SignedLog& operator*=(const SignedLog& o) {
        sign *= o.sign;
        log_mag = sign == 0 ? zero().log_mag : log_mag + o.log_mag;
        return *this;
    }
    SignedLog& operator/=(const SignedLog& o) {
        if (o.sign == 0) throw std::domain_error("SignedLog division by zero");
        sign *= o.sign;
        log_mag = sign == 0 ? zero().log_mag : log_mag - o.log_mag;
        return *this;
    }
    friend SignedLog operator*(SignedLog a, const SignedLog& b) { return a *= b; }
    friend SignedLog operator/(SignedLog a, const SignedLog& b) { return a /= b; }

    /// Log-sum-exp addition; exact cancellation gives canonical zero.
    friend SignedLog operator+(const SignedLog& a, const SignedLog& b) {
        using std::exp;
        using std::log;
        using std::log1p;
        if (a.sign == 0) return b;
        if (b.sign == 0) return a;
        const SignedLog& big = a.log_mag >= b.log_mag ? a : b;
        const SignedLog& small = a.log_mag >= b.log_mag ? b : a;
        const Scalar ratio = exp(small.log_mag - big.log_mag);
        if (big.sign == small.sign) return {big.sign, big.log_mag + log1p(ratio)};
        if (ratio == Scalar(1)) return {};
        return {big.sign, big.log_mag + log1p(-ratio)};
    }
    friend SignedLog operator-(const SignedLog& a, const SignedLog& b) { return a + (-b); }

    SignedLog scaled(Scalar factor) const { return *this * from_value(factor); }
};

}  // namespace rabi
