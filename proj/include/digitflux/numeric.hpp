#pragma once

#include "digitflux/rational.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/math/constants/constants.hpp>

#include <complex>
#include <stdexcept>
#include <vector>
#include <string>
#include <type_traits>

namespace digitflux {

namespace mp = boost::multiprecision;

template <unsigned Digits>
using BinFloat = mp::number<mp::cpp_bin_float<Digits>, mp::et_off>;

using Real40 = BinFloat<40>;
using Real70 = BinFloat<70>;

template <class R>
struct ComplexOf {
    using type = std::complex<R>;
};

template <unsigned Digits>
struct ComplexOf<BinFloat<Digits>> {
    using type = mp::number<mp::complex_adaptor<mp::cpp_bin_float<Digits>>, mp::et_off>;
};

template <class R>
using ComplexT = typename ComplexOf<R>::type;

template <class R>
R to_real(const Rational& r) {
    if constexpr (std::is_floating_point_v<R>) {
        return static_cast<R>(r.get_d());
    } else {
        return R(r.get_num().get_str()) / R(r.get_den().get_str());
    }
}

template <class R>
R pi_value() {
    if constexpr (std::is_floating_point_v<R>)
        return static_cast<R>(3.141592653589793238462643383279502884L);
    else
        return boost::math::constants::pi<R>();
}

template <class R>
double to_double(const R& x) {
    return static_cast<double>(x);
}

template <class C>
std::complex<double> to_complex_double(const C& z) {
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// exp(2 pi i num / den)
template <class R>
ComplexT<R> root_of_unity(long long num, long long den) {
    long long k = num % den;
    if (k < 0) k += den;
    const R angle = 2 * pi_value<R>() * R(k) / R(den);
    using std::cos;
    using std::sin;
    return ComplexT<R>(cos(angle), sin(angle));
}

template <class C>
auto magnitude(const C& z) {
    using std::abs;
    return abs(z);
}

// Dense solve with partial pivoting; works for real and complex scalar types.
template <class C>
std::vector<C> solve_dense(std::vector<std::vector<C>> a, std::vector<C> b) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        auto best = magnitude(a[col][col]);
        for (std::size_t i = col + 1; i < n; ++i) {
            auto m = magnitude(a[i][col]);
            if (m > best) best = m, pivot = i;
        }
        if (best == 0) throw std::domain_error("singular linear system");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        const C inv = C(1) / a[col][col];
        for (std::size_t i = col + 1; i < n; ++i) {
            const C f = a[i][col] * inv;
            if (f == C(0)) continue;
            for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[col][j];
            b[i] -= f * b[col];
        }
    }
    std::vector<C> x(n);
    for (std::size_t i = n; i-- > 0;) {
        C s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace digitflux
