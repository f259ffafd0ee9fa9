#pragma once

#include "digitflux/numeric.hpp"

#include <boost/math/special_functions/bernoulli.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace digitflux {

// B_{2k} / (2k)! for k = 1..count.
template <class R>
std::vector<R> bernoulli_over_factorial(int count) {
    std::vector<R> out;
    R fact = 1;
    for (int k = 1; k <= count; ++k) {
        fact *= R(2 * k - 1) * R(2 * k);
        out.push_back(boost::math::bernoulli_b2n<R>(k) / fact);
    }
    return out;
}

// x^{-s} for real x > 0.
template <class R>
ComplexT<R> real_power_neg(const R& x, const ComplexT<R>& s) {
    using std::exp;
    using std::log;
    return exp(-s * log(x));
}

// Hurwitz zeta(s, a) = sum_{n >= 0} (n + a)^{-s} for a > 0, s != 1, by a
// direct head sum followed by Euler-Maclaurin. `table` holds B_{2k}/(2k)!.
// On return *error (if given) holds the size of the first omitted correction.
template <class R>
ComplexT<R> hurwitz_zeta(const ComplexT<R>& s, const R& a, int digits, const std::vector<R>& table,
                         double* error = nullptr) {
    using C = ComplexT<R>;
    using std::abs;
    using std::ceil;
    using std::pow;
    if (!(a > 0)) throw std::domain_error("Hurwitz zeta needs a positive shift");
    if (s == C(1)) throw std::domain_error("Hurwitz zeta has a pole at s = 1");
    const double mod_s = static_cast<double>(abs(s));
    const double x_min = (mod_s + 4.0 * digits) / 3.14159;
    const long long head = std::max(0LL, static_cast<long long>(std::ceil(x_min - static_cast<double>(a))));

    C sum(0);
    for (long long n = 0; n < head; ++n) sum += real_power_neg<R>(a + R(n), s);
    const R x = a + R(head);
    const C xs = real_power_neg<R>(x, s);  // x^{-s}
    sum += xs * x / (s - C(1)) + xs / R(2);

    const R tol = pow(R(10), -digits - 2);
    const R inv_x2 = R(1) / (x * x);
    C poch = s;           // s (s+1) ... (s+2k-2)
    C power = xs / x;     // x^{-s-2k+1}
    double last = 0;
    bool converged = false;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const C term = table[k - 1] * poch * power;
        sum += term;
        poch *= (s + R(2 * k - 1)) * (s + R(2 * k));
        power *= inv_x2;
        if (abs(term) <= tol * (abs(sum) + R(1e-300))) {
            // size of the first omitted correction
            last = k < table.size() ? static_cast<double>(abs(table[k] * poch * power)) : static_cast<double>(abs(term));
            converged = true;
            break;
        }
        last = static_cast<double>(abs(term));
    }
    if (error) *error = converged ? last : last * 10;
    return sum;
}

// Digamma for x > 0 by the recurrence shift and the asymptotic series.
template <class R>
R digamma(const R& x, int digits, const std::vector<R>& table) {
    using std::abs;
    using std::log;
    using std::pow;
    if (!(x > 0)) throw std::domain_error("digamma needs a positive argument");
    R shift_sum = 0;
    R y = x;
    const R target = R(digits + 10);
    while (y < target) {
        shift_sum += R(1) / y;
        y += 1;
    }
    R result = log(y) - R(1) / (2 * y);
    const R inv_y2 = R(1) / (y * y);
    R power = inv_y2;
    const R tol = pow(R(10), -digits - 2);
    R fact = 1;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        // B_{2k} / (2k y^{2k}) = table * (2k-1)! / y^{2k}
        if (k > 1) fact *= R(2 * k - 2) * R(2 * k - 1);
        const R term = table[k - 1] * fact * power;
        result -= term;
        if (abs(term) < tol) break;
        power *= inv_y2;
    }
    return result - shift_sum;
}

// Double-precision conveniences.
inline std::complex<double> hurwitz_zeta(std::complex<double> s, double a) {
    static const std::vector<double> table = bernoulli_over_factorial<double>(60);
    return hurwitz_zeta<double>(s, a, 16, table);
}

inline double digamma(double x) {
    static const std::vector<double> table = bernoulli_over_factorial<double>(60);
    return digamma<double>(x, 16, table);
}

}  // namespace digitflux
