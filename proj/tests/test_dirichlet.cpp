#include "support.hpp"

#include "digitflux/dirichlet.hpp"
#include "digitflux/special.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace digitflux;
using testsupport::fixture;
using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;

// Paperfolding Fourier coefficients c_0..c_23 as published (10 decimals).
const double kTable[24][2] = {
    {1.5308151288, 0},
    {-0.0162585750, 0.0478637218},
    {0.0054521982, 0.0075023586},
    {-0.0028294724, 0.0086495903},
    {0.0036818110, 0.0021908312},
    {-0.0028244495, 0.0014519078},
    {-0.0008962222, 0.0030512180},
    {0.0015033904, 0.0013217107},
    {-0.0006766166, -0.0015392566},
    {0.0016074870, -0.0000503663},
    {-0.0006908394, 0.0018753575},
    {-0.0008974336, 0.0007658455},
    {-0.0002297481, 0.0009687657},
    {0.0006425378, 0.0006516706},
    {0.0000413217, -0.0003867709},
    {-0.0005632948, -0.0001843541},
    {0.0009051717, -0.0000476354},
    {-0.0004621780, -0.0000594551},
    {-0.0000127264, -0.0003100798},
    {0.0004112716, 0.0001954204},
    {-0.0000011706, 0.0004183253},
    {-0.0001027596, 0.0004091624},
    {-0.0004725451, 0.0004237489},
    {-0.0000596181, 0.0002323317},
};

using Big = BinFloat<150>;
using BigC = ComplexT<Big>;

Transducer zero_transducer() {
    return make_transducer(2, 1, {{0, 1}, {1, 0}}, {{Rational(0), Rational(0)}, {Rational(0), Rational(0)}},
                           {Rational(0), Rational(0)});
}

}  // namespace

TEST_CASE("Hurwitz zeta special values") {
    CHECK(std::abs(hurwitz_zeta(cd(2, 0), 1.0) - kPi * kPi / 6) < 1e-12);
    CHECK(std::abs(hurwitz_zeta(cd(0, 0), 0.5)) < 1e-12);
    for (double a : {0.25, 0.5, 1.0}) {
        // zeta(0, a) = 1/2 - a, zeta(-1, a) = -(a^2 - a + 1/6) / 2
        CHECK(std::abs(hurwitz_zeta(cd(0, 0), a) - (0.5 - a)) < 1e-12);
        CHECK(std::abs(hurwitz_zeta(cd(-1, 0), a) + (a * a - a + 1.0 / 6) / 2) < 1e-12);
    }
    // Direct summation with an integral tail bracket.
    const double a = 0.3;
    double direct = 0;
    const int N = 200000;
    for (int n = N; n-- > 0;) direct += std::pow(n + a, -3.0);
    const double lo = 0.5 / std::pow(N + a, 2), hi = 0.5 / std::pow(N + a - 1, 2);
    const double z = hurwitz_zeta(cd(3, 0), a).real();
    CHECK(z > direct + lo - 1e-12);
    CHECK(z < direct + hi + 1e-12);

    const std::vector<Real40> t40 = bernoulli_over_factorial<Real40>(120);
    const auto z40 = hurwitz_zeta<Real40>(ComplexT<Real40>(2), Real40(1), 38, t40);
    CHECK(abs(z40 - ComplexT<Real40>(pi_value<Real40>() * pi_value<Real40>() / 6)) < Real40("1e-36"));

    CHECK_THROWS_AS(hurwitz_zeta(cd(1, 0), 0.5), std::domain_error);
    CHECK_THROWS_AS(hurwitz_zeta(cd(2, 0), 0.0), std::domain_error);
}

TEST_CASE("Hurwitz zeta on the line Re z = 1 at two depths") {
    const double chi = 2 * kPi / std::log(2.0);
    const std::vector<Real40> t40 = bernoulli_over_factorial<Real40>(120);
    const std::vector<Real70> t70 = bernoulli_over_factorial<Real70>(180);
    for (double a : {1.0, 0.5, 1024.5}) {
        const auto lo = hurwitz_zeta<Real40>(ComplexT<Real40>(Real40(1), Real40(chi)), Real40(a), 35, t40);
        const auto hi = hurwitz_zeta<Real70>(ComplexT<Real70>(Real70(1), Real70(chi)), Real70(a), 65, t70);
        const cd d = to_complex_double(lo) - to_complex_double(hi);
        CHECK(std::abs(d) < 1e-15);
        CHECK(std::abs(static_cast<double>(lo.real()) - static_cast<double>(hi.real())) < 1e-15);
        const Real70 diff = abs(ComplexT<Real70>(Real70(lo.real()), Real70(lo.imag())) - hi);
        CHECK(diff < Real70("1e-33"));
    }
    // The double convenience agrees with the extended computation.
    const auto ref = hurwitz_zeta<Real40>(ComplexT<Real40>(Real40(1), Real40(chi)), Real40(1), 35, t40);
    CHECK(std::abs(hurwitz_zeta(cd(1, chi), 1.0) - to_complex_double(ref)) < 1e-13);
    // and with the independent Riemann zeta oracle.
    CHECK(std::abs(riemann_zeta_reference(cd(1, chi)) - to_complex_double(ref)) < 1e-14);
    CHECK(std::abs(riemann_zeta_reference(cd(2, 0)) - kPi * kPi / 6) < 1e-15);
}

TEST_CASE("digamma") {
    CHECK(std::abs(digamma(1.0) + kEulerGamma) < 1e-12);
    CHECK(std::abs(digamma(0.5) + kEulerGamma + 2 * std::log(2.0)) < 1e-12);
    CHECK(std::abs(digamma(2.0) - digamma(1.0) - 1) < 1e-12);
    CHECK(std::abs(digamma(1000.25) - digamma(999.25) - 1 / 999.25) < 1e-12);
    const std::vector<Real40> t40 = bernoulli_over_factorial<Real40>(120);
    const Real40 g("0.5772156649015328606065120900824024310422");
    CHECK(abs(digamma<Real40>(Real40(1), 38, t40) + g) < Real40("1e-36"));
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-1.5), std::domain_error);
}

TEST_CASE("b(n) vectors") {
    const auto t = fixture("sumdigits-q2.fst");
    const auto b = h_vector_terms(t, 8);
    CHECK(b[0][0] == 0);
    CHECK(b[1][0] == 1);
    CHECK(b[2][0] == 1);
    CHECK(b[3][0] == 2);
    CHECK(b[7][0] == 3);

    const auto pf = testsupport::paperfolding();
    const auto bp = h_vector_terms(pf, 64);
    const auto m = matrices(pf);
    CHECK(bp[0] == m.finals);
    for (std::uint64_t n = 0; n <= 64; ++n) CHECK(bp[n][0] == evaluate(pf, n));

    const auto sf = fixture("signflip.fst");
    const auto bs = h_vector_terms(sf, 32);
    for (std::uint64_t n = 0; n <= 32; ++n) CHECK(bs[n][0] == evaluate(sf, n));

    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(h_vector_terms(testsupport::random_transducer(rng, 2, 2, 2), 4), std::domain_error);
}

TEST_CASE("H(z) against direct summation") {
    const int N = 1000000;
    const auto pf = testsupport::paperfolding();
    const auto sd = fixture("sumdigits-q2.fst");
    double s3 = 0, p2 = 0, p3 = 0;
    for (std::uint64_t n = 1; n < static_cast<std::uint64_t>(N); ++n) {
        const double nn = double(n);
        s3 += double(std::popcount(n)) / (nn * nn * nn);
        const double rho = evaluate(pf, n).get_d();
        p2 += rho / (nn * nn);
        p3 += rho / (nn * nn * nn);
    }
    SUBCASE("sum of digits at z = 3") {
        const auto h = h_series(sd, {3, 0});
        CHECK(std::abs(h.value[0] - s3) < 1e-9);
        CHECK(h.error < 1e-9);
    }
    SUBCASE("paperfolding") {
        const auto h3 = h_series(pf, {3, 0});
        CHECK(std::abs(h3.value[0] - p3) < 1e-9);
        const auto h2 = h_series(pf, {2, 0});
        CHECK(std::abs(h2.value[0].imag()) < 1e-20);
        // rho(n) >= 0 and rho(n) <= 3 (log2 n + 1), so the omitted tail lies in [0, bound].
        const double bound = 3 * (std::log2(double(N)) + 2) / (N - 1);
        CHECK(h2.value[0].real() >= p2 - 1e-9);
        CHECK(h2.value[0].real() <= p2 + bound + 1e-9);
        CHECK(std::abs(h2.value[0].real() - p2) < 1e-4);
    }
    SUBCASE("zero outputs") {
        const auto h = h_series(zero_transducer(), {2.5, 1.0});
        for (const cd& v : h.value) CHECK(std::abs(v) == 0);
    }
}

TEST_CASE("Delange closed forms for the sum of digits") {
    for (int q = 2; q <= 5; ++q) {
        const auto t = fixture("sumdigits-q" + std::to_string(q) + ".fst");
        const auto res = fourier(t, 10);
        for (long long k = 0; k <= 10; ++k) {
            const cd want = sum_of_digits_coefficient(q, k);
            INFO("q = " << q << ", k = " << k);
            CHECK(std::abs(res.coefficient(k) - want) < 1e-9);
            CHECK(res.error[static_cast<std::size_t>(k + 10)] < 1e-9);
        }
    }
}

TEST_CASE("paperfolding coefficients match the published table") {
    const auto pf = testsupport::paperfolding();
    const auto start = std::chrono::steady_clock::now();
    const auto res = fourier(pf, 23);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("K = 23 at defaults: " << secs << " s");
    CHECK(secs < 120);
    for (int k = 0; k <= 23; ++k) {
        INFO("k = " << k);
        CHECK(std::abs(res.coefficient(k) - cd(kTable[k][0], kTable[k][1])) < 1e-6);
    }
}

TEST_CASE("paperfolding table at 50 digits") {
    const auto pf = testsupport::paperfolding();
    SpecialFunctionContext ctx;
    ctx.precision = 50;
    ctx.threads = 4;
    const auto res = fourier(pf, 23, ctx);
    for (int k = 0; k <= 23; ++k) {
        INFO("k = " << k);
        CHECK(std::abs(res.coefficient(k) - cd(kTable[k][0], kTable[k][1])) < 1e-8);
    }
}

TEST_CASE("conjugate symmetry and real c_0") {
    for (const auto& t : {testsupport::paperfolding(), fixture("sixperiodic.fst"), fixture("naf.fst")}) {
        if (t.d() != 1) continue;
        SpecialFunctionContext ctx;
        ctx.precision = 15;
        FourierEngine eng(t, ctx);
        for (long long k = 1; k <= 4; ++k) {
            const Estimate a = eng.coefficient(k), b = eng.coefficient(-k);
            CHECK(std::abs(b.value - std::conj(a.value)) < 1e-12);
        }
        CHECK(eng.coefficient(0).value.imag() == 0);
    }
}

TEST_CASE("doubling R and M_max stays within the reported error") {
    const auto pf = testsupport::paperfolding();
    for (int precision : {15, 30}) {
        SpecialFunctionContext a;
        a.precision = precision;
        a.terms = 512;
        a.max_shift = 20;
        SpecialFunctionContext b = a;
        b.terms = 1024;
        b.max_shift = 40;
        FourierEngine ea(pf, a), eb(pf, b);
        for (long long k : {0, 1, 5, 23}) {
            const Estimate x = ea.coefficient(k), y = eb.coefficient(k);
            INFO("precision " << precision << ", k = " << k << ", diff " << std::abs(x.value - y.value)
                              << ", err " << x.error);
            CHECK(std::abs(x.value - y.value) <= x.error);
            CHECK(y.error <= x.error * (1 + 1e-9));
        }
    }
}

TEST_CASE("pole factor times H is regular at 1 + chi_k") {
    for (const auto& t : {testsupport::paperfolding(), fixture("sixperiodic.fst")}) {
        SpecialFunctionContext ctx;
        ctx.precision = 15;
        FourierEngine eng(t, ctx);
        const auto& rep = eng.report();
        const int p = rep.period();
        const double lq = std::log(2.0);
        int tested = 0;
        for (long long k : {1, 2, 3}) {
            const auto w = projection<double>(rep, k % p);
            double wn = 0;
            for (const cd& x : w) wn += std::abs(x);
            if (wn == 0) continue;  // no pole at 1 + chi_k
            ++tested;
            const cd z0(1, 2 * kPi * double(k) / (p * lq));
            const cd target = eng.residue(k).value * lq;
            std::vector<double> dev;
            for (double r : {1e-2, 1e-3, 1e-4}) {
                double worst = 0;
                for (int j = 0; j < 8; ++j) {
                    const cd z = z0 + std::polar(r, 2 * kPi * (j + 0.5) / 8);
                    const auto h = eng.h_series(z);
                    cd wh = 0;
                    for (std::size_t i = 0; i < w.size(); ++i) wh += w[i] * h.value[i];
                    const cd f = (1.0 - std::exp((1.0 - z) * lq) * std::polar(1.0, 2 * kPi * double(k) / p)) * wh;
                    worst = std::max(worst, std::abs(f - target));
                }
                dev.push_back(worst);
            }
            INFO("k = " << k << " deviations " << dev[0] << " " << dev[1] << " " << dev[2]);
            CHECK(dev[1] < 0.2 * dev[0]);
            CHECK(dev[2] < 0.2 * dev[1]);
            CHECK(dev[2] < 1e-3);
        }
        CHECK(tested >= 2);
    }
}

TEST_CASE("zero outputs give zero coefficients") {
    const auto res = fourier(zero_transducer(), 5);
    for (const cd& c : res.c) CHECK(std::abs(c) == 0);
    CHECK(res.pole.h == 0);
    CHECK(res.pole.residue == 0);
    CHECK(residue_k(zero_transducer(), 3).value == cd(0));
    CHECK(w0_derivative_term(zero_transducer()) == 0);
}

TEST_CASE("w0 derivative term") {
    CHECK(w0_derivative_term(fixture("sumdigits-q3.fst")) == 0);
    const auto pf = testsupport::paperfolding();
    CHECK(w0_derivative_term(pf) == analyze(pf).w0_derivative.get_d());
}

TEST_CASE("k = 0 data reproduces c_0") {
    const auto t = fixture("sumdigits-q2.fst");
    const auto d = double_pole_data(t);
    const double lq = std::log(2.0);
    CHECK(std::abs(d.residue - (0.25 + d.h / lq)) < 1e-15);
    CHECK(std::abs(-0.5 / lq + d.residue - sum_of_digits_coefficient(2, 0).real()) < 1e-12);
}

TEST_CASE("threads do not change results") {
    const auto pf = testsupport::paperfolding();
    SpecialFunctionContext one;
    one.precision = 15;
    SpecialFunctionContext many = one;
    many.threads = 4;
    const auto a = fourier(pf, 12, one), b = fourier(pf, 12, many);
    CHECK(a.c == b.c);
    CHECK(a.error == b.error);
}

TEST_CASE("partial series is periodic and real") {
    const auto t = fixture("sixperiodic.fst");
    SpecialFunctionContext ctx;
    ctx.precision = 15;
    const auto res = fourier(t, 6, ctx);
    CHECK(res.period == 6);
    for (double x : {0.1, 1.7, 4.2}) CHECK(std::abs(res.evaluate(x) - res.evaluate(x + 6)) < 1e-12);
}

TEST_CASE("d = 2 is rejected") {
    std::mt19937_64 rng(5);
    const auto t2 = testsupport::random_transducer(rng, 2, 2, 3);
    CHECK_THROWS_AS(fourier(t2, 1), std::domain_error);
    CHECK_THROWS_AS(FourierEngine{t2}, std::domain_error);
}
