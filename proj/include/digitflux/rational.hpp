#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace digitflux {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "p/q", plain integers and decimals such as "-0.25" or "1.5e-3".
// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string to_string(const Rational& r);

bool is_integer(const Rational& r);

static_assert(sizeof(long) == sizeof(long long), "GMP conversions assume 64-bit long");
inline Rational to_rational(long long v) { return Rational(static_cast<long>(v)); }
inline Integer to_integer(long long v) { return Integer(static_cast<long>(v)); }
// num/den in canonical form; gmp's two-argument constructor does not reduce.
inline Rational ratio(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

double to_double(const Rational& r);

// Least common multiple of the denominators; 1 for an empty range.
template <class Range>
Integer common_denominator(const Range& values) {
    Integer den = 1;
    for (const Rational& v : values) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
    return den;
}

}  // namespace digitflux
