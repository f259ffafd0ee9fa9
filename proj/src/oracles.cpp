#include "digitflux/oracles.hpp"

#include "digitflux/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace digitflux {

Rational BruteForceRecursion::operator()(const IVec& n) { return walk(n, 0); }

Rational BruteForceRecursion::walk(const IVec& n, int depth) {
    if (depth > 10000) throw std::runtime_error("recursion does not terminate");
    if (auto it = sys_.initial_values.find(n); it != sys_.initial_values.end()) return it->second;
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    long long M = 1;
    for (int i = 0; i < sys_.kappa; ++i) M *= sys_.q;
    std::size_t code = 0, scale = 1;
    for (std::size_t i = 0; i < n.size(); ++i) {
        code += static_cast<std::size_t>(n[i] % M) * scale;
        scale *= static_cast<std::size_t>(M);
    }
    const auto& rule = sys_.rules[code];
    long long Q = 1;
    for (int i = 0; i < rule.kappa_lambda; ++i) Q *= sys_.q;
    IVec arg(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        arg[i] = Q * (n[i] / M) + rule.r[i];
        if (arg[i] < 0) throw std::runtime_error("undefined value");
    }
    Rational v = walk(arg, depth + 1) + rule.t;
    memo_[n] = v;
    return v;
}

RecursionSystem random_system(std::mt19937_64& rng, int q, int d, int kappa, int rmin, int rmax, int tmax) {
    RecursionSystem sys;
    sys.q = q;
    sys.d = d;
    sys.kappa = kappa;
    std::size_t count = 1;
    for (int i = 0; i < d * kappa; ++i) count *= static_cast<std::size_t>(q);
    std::uniform_int_distribution<int> kl(0, kappa - 1), r(rmin, rmax), t(-tmax, tmax);
    for (std::size_t i = 0; i < count; ++i) {
        RecursionRule rule;
        rule.kappa_lambda = kl(rng);
        for (int c = 0; c < d; ++c) rule.r.push_back(r(rng));
        rule.t = t(rng);
        sys.rules.push_back(rule);
    }
    return sys;
}

RecursionSystem random_well_posed(std::mt19937_64& rng, int d) {
    for (;;) {
        std::uniform_int_distribution<int> qd(2, 3), kd(1, d == 1 ? 3 : 2);
        const int q = d == 1 ? qd(rng) : 2;
        auto sys = d == 1 ? random_system(rng, q, 1, kd(rng), -8, 8) : random_system(rng, 2, d, kd(rng), 0, 8);
        RawAutomaton raw;
        try {
            raw = build_raw(sys, 20000);
        } catch (const StateCapExceeded&) {
            continue;
        }
        auto rep = well_posedness(raw, sys);
        if (!rep.bad_cycles.empty()) continue;
        std::uniform_int_distribution<int> v(-5, 5);
        for (const auto& cls : rep.classes) {
            std::uniform_int_distribution<std::size_t> pick(0, cls.size() - 1);
            sys.initial_values[cls[pick(rng)]] = v(rng);
        }
        return sys;
    }
}

Transducer random_transducer(std::mt19937_64& rng, int q, int d, int states) {
    std::uniform_int_distribution<int> st(0, states - 1), out(-3, 3), den(1, 2);
    int symbols = 1;
    for (int i = 0; i < d; ++i) symbols *= q;
    std::vector<std::vector<int>> next(states, std::vector<int>(symbols));
    std::vector<std::vector<Rational>> outputs(states, std::vector<Rational>(symbols));
    std::vector<Rational> finals(states);
    for (int s = 0; s < states; ++s) {
        for (int e = 0; e < symbols; ++e) {
            next[s][e] = st(rng);
            const int a = out(rng);
            outputs[s][e] = ratio(a, den(rng));
        }
        const int a = out(rng);
        finals[s] = ratio(a, den(rng));
    }
    return make_transducer(q, d, next, outputs, finals);
}

std::complex<double> riemann_zeta_reference(std::complex<double> s_in) {
    using Big = BinFloat<150>;
    using BigC = ComplexT<Big>;
    const int n = 220;
    const BigC s(Big(s_in.real()), Big(s_in.imag()));
    // d_k = sum_{i <= k} (n+i-1)! 4^i / ((n-i)! (2i)!), up to a common factor
    std::vector<Big> d(n + 1);
    Big term = Big(1) / Big(n);
    Big acc = term;
    d[0] = acc;
    for (int i = 1; i <= n; ++i) {
        term *= Big(n + i - 1) * Big(n - i + 1) * Big(4) / (Big(2 * i - 1) * Big(2 * i));
        acc += term;
        d[i] = acc;
    }
    BigC sum(0);
    for (int k = 0; k < n; ++k) {
        const BigC p = exp(-s * log(Big(k + 1)));
        const Big w = (k % 2 == 0 ? Big(1) : Big(-1)) * (d[k] - d[n]);
        sum += p * w;
    }
    const BigC two_pow = exp((BigC(1) - s) * log(Big(2)));
    return to_complex_double(BigC(-sum / (d[n] * (BigC(1) - two_pow))));
}

std::complex<double> sum_of_digits_coefficient(int q, long long k) {
    const double pi = 3.14159265358979323846;
    const double lq = std::log(double(q));
    if (k == 0) return (q - 1) / (2 * lq) * (std::log(2 * pi) - 1) - (q + 1) / 4.0;
    const std::complex<double> chi(0, 2 * pi * double(k) / lq);
    return -double(q - 1) * riemann_zeta_reference(chi) / (chi * (1.0 + chi) * lq);
}

}  // namespace digitflux
