#include "support.hpp"

#include "digitflux/spectral.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>

using namespace digitflux;
using testsupport::fixture;

namespace {

using CMat = Eigen::MatrixXcd;
using cd = std::complex<double>;

// M(t) with entries exp(i t output).
CMat char_matrix(const TransitionMatrices& m, double t) {
    CMat a = CMat::Zero(m.size(), m.size());
    for (int e = 0; e < m.symbols; ++e)
        for (int i = 0; i < m.size(); ++i) a(i, m.next[e][i]) += std::polar(1.0, t * m.out[e][i].get_d());
    return a;
}

// e_1^T P 1 with P the spectral projection onto the eigenvalues within `radius` of q^d.
cd dominant_mass(const TransitionMatrices& m, double t, double radius) {
    CMat a = char_matrix(m, t);
    Eigen::ComplexEigenSolver<CMat> es(a);
    CMat v = es.eigenvectors();
    CMat vinv = v.inverse();
    const double qd = m.dominant().get_d();
    cd total = 0;
    for (int k = 0; k < m.size(); ++k) {
        if (std::abs(es.eigenvalues()(k) - qd) > radius) continue;
        cd left = 0;
        for (int j = 0; j < m.size(); ++j) left += vinv(k, j);
        total += v(0, k) * left;
    }
    return total;
}

// Dominant eigenvalue of M_C(t) restricted to a component.
cd component_eigenvalue(const TransitionMatrices& m, const std::vector<int>& comp, double t) {
    std::vector<int> pos(m.size(), -1);
    for (std::size_t i = 0; i < comp.size(); ++i) pos[comp[i]] = static_cast<int>(i);
    CMat a = CMat::Zero(comp.size(), comp.size());
    for (int e = 0; e < m.symbols; ++e)
        for (std::size_t i = 0; i < comp.size(); ++i)
            a(i, pos[m.next[e][comp[i]]]) += std::polar(1.0, t * m.out[e][comp[i]].get_d());
    Eigen::ComplexEigenSolver<CMat> es(a);
    const double qd = m.dominant().get_d();
    cd best = es.eigenvalues()(0);
    for (int k = 1; k < es.eigenvalues().size(); ++k)
        if (std::abs(es.eigenvalues()(k) - qd) < std::abs(best - qd)) best = es.eigenvalues()(k);
    return best;
}

Transducer random_final_mix(std::mt19937_64& rng) {
    return testsupport::random_transducer(rng, 2 + static_cast<int>(rng() % 2), 1, 2 + static_cast<int>(rng() % 6));
}

}  // namespace

TEST_CASE("transition matrices") {
    for (int q = 2; q <= 5; ++q) {
        auto m = matrices(fixture("sumdigits-q" + std::to_string(q) + ".fst"));
        CHECK(m.total() == QMatrix{{Rational(q)}});
        CHECK(m.delta == QVector{ratio(q * (q - 1), 2)});
    }
    auto sign = matrices(fixture("signflip.fst"));
    CHECK(sign.total() == QMatrix{{0, 2}, {0, 2}});
    CHECK(sign.delta == QVector{0, 0});

    auto zero = make_transducer(2, 1, {{0, 1}, {1, 0}}, {{0, 0}, {0, 0}}, {0, 0});
    auto mz = matrices(zero);
    CHECK(mz.output_total() == zero_matrix(2, 2));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
        auto m = matrices(testsupport::random_transducer(rng, 2 + i % 3, 1 + i % 2, 1 + i % 6));
        CHECK(m.total() * QVector(m.size(), Rational(1)) == QVector(m.size(), m.dominant()));
        for (int e = 0; e < m.symbols; ++e)
            CHECK(m.adjacency(e) * QVector(m.size(), Rational(1)) == QVector(m.size(), Rational(1)));
    }
}

TEST_CASE("characteristic polynomial against an eigensolver") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> entry(-3, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 9;
        QMatrix a = zero_matrix(n, n);
        Eigen::MatrixXd e(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int v = (trial % 3 == 0 && j < i) ? 0 : entry(rng);
                a[i][j] = v;
                e(i, j) = v;
            }
        QPoly chi = characteristic_polynomial(a);
        REQUIRE(chi.size() == static_cast<std::size_t>(n + 1));
        CHECK(chi.back() == 1);
        Eigen::EigenSolver<Eigen::MatrixXd> es(e);
        for (int k = 0; k < n; ++k) {
            const cd z = es.eigenvalues()(k);
            cd val = 0;
            for (std::size_t i = chi.size(); i-- > 0;) val = val * z + chi[i].get_d();
            CHECK(std::abs(val) < 1e-6 * std::pow(1 + std::abs(z), n));
        }
        auto roots = distinct_roots(chi);
        for (const auto& r : roots) {
            double nearest = 1e9;
            for (int k = 0; k < n; ++k) nearest = std::min(nearest, std::abs(r - es.eigenvalues()(k)));
            CHECK(nearest < 1e-5);
        }
    }
    // Repeated roots collapse to distinct ones.
    QPoly square = {4, -4, 1};  // (x - 2)^2
    auto r = distinct_roots(square);
    REQUIRE(r.size() == 1);
    CHECK(std::abs(r[0] - cd(2, 0)) < 1e-14);
}

TEST_CASE("component constants") {
    auto sd = analyze(fixture("sumdigits-q2.fst"));
    REQUIRE(sd.components.size() == 1);
    CHECK(sd.components[0].a == Rational(1, 2));
    CHECK(sd.components[0].b == Rational(1, 4));

    auto sign = analyze(fixture("signflip.fst"));
    REQUIRE(sign.components.size() == 1);
    CHECK(sign.components[0].a == 0);
    CHECK(sign.components[0].b == 0);

    auto pf = analyze(testsupport::paperfolding());
    REQUIRE(pf.components.size() == 1);
    CHECK(pf.components[0].a == Rational(8, 13));
    CHECK(pf.components[0].b == Rational(432, 2197));
}

TEST_CASE("component variance matches a finite difference of the dominant eigenvalue") {
    std::mt19937_64 rng(17);
    const double h = 1e-3;
    for (int trial = 0; trial < 40; ++trial) {
        auto t = random_final_mix(rng);
        auto rep = analyze(t);
        for (const auto& c : rep.components) {
            if (c.period != 1) continue;
            // log(mu(t) / q) = i a t - b t^2 / 2 + O(t^3)
            const double qd = rep.mats.dominant().get_d();
            auto f = [&](double s) { return std::log(component_eigenvalue(rep.mats, c.states, s) / qd); };
            // Richardson-extrapolated central differences, truncation O(h^4).
            auto d1 = [&](double s) { return (f(s) - f(-s)) / (2 * s); };
            auto d2 = [&](double s) { return (f(s) - 2.0 * f(0) + f(-s)) / (s * s); };
            const cd first = (4.0 * d1(h / 2) - d1(h)) / 3.0;
            const cd second = (4.0 * d2(h / 2) - d2(h)) / 3.0;
            CHECK(std::abs(first - cd(0, c.a.get_d())) < 1e-8);
            CHECK(std::abs(second + c.b.get_d()) < 1e-5);
            CHECK(sgn(c.b) >= 0);
        }
    }
}

TEST_CASE("hitting probabilities") {
    CHECK(hitting_probabilities(fixture("signflip.fst")) == std::vector<Rational>{1});
    CHECK(hitting_probabilities(fixture("sumdigits-q3.fst")) == std::vector<Rational>{1});

    auto six = fixture("sixperiodic.fst");
    auto lambda = hitting_probabilities(six);
    REQUIRE(lambda.size() == 2);
    CHECK(lambda[0] + lambda[1] == 1);
    // Monte Carlo over random digit strings.
    auto st = structure(six);
    std::mt19937_64 rng(23);
    std::vector<int> hits(2, 0);
    const int runs = 200000;
    for (int r = 0; r < runs; ++r) {
        int s = six.initial();
        for (int step = 0; step < 64; ++step) s = six.next(s, static_cast<int>(rng() % 2));
        for (int j = 0; j < 2; ++j)
            if (st.scc_of[s] == st.final_components[j]) ++hits[j];
    }
    for (int j = 0; j < 2; ++j) CHECK(std::abs(hits[j] / double(runs) - lambda[j].get_d()) < 0.01);

    std::mt19937_64 rng2(29);
    for (int i = 0; i < 50; ++i) {
        auto l = hitting_probabilities(random_final_mix(rng2));
        Rational sum = 0;
        for (const auto& v : l) {
            CHECK(sgn(v) > 0);
            sum += v;
        }
        CHECK(sum == 1);
    }
}

TEST_CASE("analysis of the bundled transducers") {
    auto pf = analyze(testsupport::paperfolding());
    CHECK(pf.e_T == Rational(8, 13));
    CHECK(pf.v_T == Rational(432, 2197));
    const double expected = std::abs(cd(-0.7718445063, 1.1151425080));
    CHECK(std::abs(pf.second_modulus - expected) < 1e-6);
    CHECK(std::abs(pf.xi - 0.5604267891) < 1e-8);
    CHECK(pf.classification == Classification::SingleGaussian);
    CHECK_FALSE(pf.exact_no_error_term);
    REQUIRE(pf.structure.nondiff_applicable);
    CHECK(*pf.structure.nondiff_applicable);
    bool found = false;
    for (const auto& z : pf.nondominant_eigenvalues)
        found = found || std::abs(z - cd(-0.7718445063, -1.1151425080)) < 1e-9;
    CHECK(found);

    auto six = analyze(fixture("sixperiodic.fst"));
    CHECK(six.e_T == Rational(11, 8));
    CHECK(six.period() == 6);

    auto sign = analyze(fixture("signflip.fst"));
    CHECK(sign.e_T == 0);
    CHECK(sign.v_T == 0);
    CHECK(sign.classification == Classification::Degenerate);

    for (int q = 2; q <= 5; ++q) {
        auto sd = analyze(fixture("sumdigits-q" + std::to_string(q) + ".fst"));
        CHECK(sd.e_T == ratio(q - 1, 2));
        CHECK(sd.v_T == ratio(q * q - 1, 12));
        CHECK(sd.exact_no_error_term);
        CHECK(sd.nondominant_eigenvalues.empty());
        CHECK(sd.w0_derivative == 0);
        CHECK(sd.classification == Classification::SingleGaussian);
    }
}

TEST_CASE("second modulus against an eigensolver") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        auto t = random_final_mix(rng);
        AsymptoticReport rep;
        try {
            rep = analyze(t);
        } catch (const AnalysisError&) {
            FAIL("analysis failure on a random transducer");
            continue;
        }
        const auto& m = rep.mats;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.size(), m.size());
        for (int e = 0; e < m.symbols; ++e)
            for (int i = 0; i < m.size(); ++i) a(i, m.next[e][i]) += 1;
        Eigen::EigenSolver<Eigen::MatrixXd> es(a);
        std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + m.size());
        // Remove the dominant eigenvalues q^d * zeta, one per root of unity per component.
        const double qd = m.dominant().get_d();
        for (const auto& c : rep.components)
            for (int k = 0; k < c.period; ++k) {
                const cd target = qd * std::polar(1.0, 2 * std::acos(-1.0) * k / c.period);
                auto it = std::min_element(ev.begin(), ev.end(), [&](cd x, cd y) {
                    return std::abs(x - target) < std::abs(y - target);
                });
                REQUIRE(std::abs(*it - target) < 1e-6);
                ev.erase(it);
            }
        double second = 0;
        for (const auto& z : ev) second = std::max(second, std::abs(z));
        // A defective eigenvalue of multiplicity k is only resolved to about (n eps |M|)^(1/k)
        // by the floating-point eigensolver.
        int mult = 0;
        if (!rep.nondominant_eigenvalues.empty())
            for (const auto& z : ev) mult += std::abs(z - rep.nondominant_eigenvalues.front()) < 1e-2;
        const double tol = 4 * std::pow(m.size() * qd * 1e-16, 1.0 / std::max(1, mult)) + 1e-9;
        CHECK(std::abs(second - rep.second_modulus) < tol);
        CHECK(rep.exact_no_error_term == ev.empty());
        if (rep.second_modulus > 0) CHECK(std::pow(m.q, m.d - rep.xi) == doctest::Approx(rep.second_modulus));
    }
}

TEST_CASE("dominant projection") {
    auto sd = analyze(fixture("sumdigits-q2.fst"));
    CHECK(sd.w0 == QVector{1});
    auto sign = analyze(fixture("signflip.fst"));
    CHECK(sign.w0 == QVector{0, 1});

    auto pf = analyze(testsupport::paperfolding());
    Rational total = 0;
    for (const auto& v : pf.w0) {
        CHECK(sgn(v) >= 0);
        total += v;
    }
    CHECK(total == 1);
    // State distribution after 64 uniformly random digits, computed by exact propagation.
    const auto& m = pf.mats;
    std::vector<double> dist(m.size(), 0.0);
    dist[0] = 1;
    for (int step = 0; step < 64; ++step) {
        std::vector<double> next(m.size(), 0.0);
        for (int e = 0; e < m.symbols; ++e)
            for (int i = 0; i < m.size(); ++i) next[m.next[e][i]] += dist[i] / m.symbols;
        dist = next;
    }
    for (int i = 0; i < m.size(); ++i) CHECK(std::abs(dist[i] - pf.w0[i].get_d()) < 1e-8);

    for (const char* name : {"naf.fst", "sixperiodic.fst", "signflip.fst"}) {
        auto rep = analyze(fixture(name));
        auto it = dominant_projection(rep);
        for (int l = 0; l < rep.period(); ++l) {
            auto w = projection<double>(rep, l);
            for (int i = 0; i < rep.mats.size(); ++i) CHECK(std::abs(w[i] - it.w[l][i]) < 1e-10);
        }
        for (int i = 0; i < rep.mats.size(); ++i) CHECK(std::abs(it.w[0][i].real() - rep.w0[i].get_d()) < 1e-10);
    }
    // The multiprecision path agrees with double.
    auto six = analyze(fixture("sixperiodic.fst"));
    for (int l = 0; l < 6; ++l) {
        auto wd = projection<double>(six, l);
        auto wm = projection<Real40>(six, l);
        for (int i = 0; i < six.mats.size(); ++i) CHECK(std::abs(wd[i] - to_complex_double(wm[i])) < 1e-14);
    }
}

TEST_CASE("steady state identity") {
    for (const char* name : {"sumdigits-q2.fst", "sixperiodic.fst", "naf.fst", "signflip.fst"})
        CHECK(steady_state_identity_check(analyze(fixture(name))));
    CHECK(steady_state_identity_check(analyze(testsupport::paperfolding())));
}

TEST_CASE("projection derivative against a finite difference") {
    const double h = 1e-4;
    std::vector<Transducer> cases = {testsupport::paperfolding(), fixture("naf.fst"), fixture("sixperiodic.fst"),
                                     fixture("signflip.fst")};
    std::mt19937_64 rng(41);
    for (int i = 0; i < 15; ++i) cases.push_back(random_final_mix(rng));
    for (const auto& t : cases) {
        auto rep = analyze(t);
        const double qd = rep.mats.dominant().get_d();
        // Radius separating the split dominant group from the rest of the spectrum.
        const double radius = 0.5 * (qd - rep.second_modulus);
        const cd derivative = (dominant_mass(rep.mats, h, radius) - dominant_mass(rep.mats, -h, radius)) / (2 * h);
        // -i w_0'^T 1
        CHECK(std::abs(cd(0, -1) * derivative - rep.w0_derivative.get_d()) < 1e-5);
    }
}

TEST_CASE("projection identity for periodic components") {
    auto rep = analyze(fixture("sixperiodic.fst"));
    const double qd = rep.mats.dominant().get_d();
    for (int l = 1; l < 6; ++l) {
        auto w = projection<double>(rep, l);
        cd wdelta = 0;
        for (int i = 0; i < rep.mats.size(); ++i) wdelta += w[i] * rep.mats.delta[i].get_d();
        const cd term = projection_derivative_term(rep, l);
        const cd omega = std::polar(1.0, 2 * std::acos(-1.0) * l / 6);
        CHECK(std::abs(wdelta + qd * (omega - 1.0) * term) < 1e-8);
    }
    // l = 0 identity with the exact derivative term.
    cd w0delta = 0;
    for (int i = 0; i < rep.mats.size(); ++i) w0delta += rep.w0[i].get_d() * rep.mats.delta[i].get_d();
    CHECK(std::abs(w0delta - qd * rep.e_T.get_d()) < 1e-12);
}

TEST_CASE("mean slope matches e_T") {
    for (const auto& t : {testsupport::paperfolding(), fixture("naf.fst"), fixture("sumdigits-q2.fst")}) {
        auto rep = analyze(t);
        // Least squares of the prefix mean against log_2 N at N = 2^8, ..., 2^20.
        std::vector<double> xs, ys;
        double sum = 0;
        std::uint64_t n = 0;
        for (int k = 8; k <= 20; ++k) {
            const std::uint64_t target = std::uint64_t{1} << k;
            for (; n < target; ++n) sum += evaluate(t, n).get_d();
            xs.push_back(k);
            ys.push_back(sum / static_cast<double>(target));
        }
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        CHECK(std::abs(sxy / sxx - rep.e_T.get_d()) < 1e-3);
    }
}
