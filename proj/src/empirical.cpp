#include "digitflux/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace digitflux {

namespace {

using i128 = __int128;

Integer to_big(i128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    const std::uint64_t limbs[2] = {static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(u >> 64)};
    Integer out;
    mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, limbs);
    return neg ? Integer(-out) : out;
}

template <class I>
I from_big(const Integer& v) {
    if constexpr (std::is_same_v<I, Integer>) {
        return v;
    } else {
        return static_cast<I>(v.get_si());  // callers guarantee |v| < 2^62
    }
}

// Value, sum and sum of squares of the outputs over a set of paths.
template <class I>
struct Jet {
    I c = 0, s = 0, q = 0;
};

template <class I>
void add_appended(Jet<I>& acc, const Jet<I>& j, const I& g) {
    acc.c += j.c;
    acc.s += j.s + j.c * g;
    acc.q += j.q + 2 * j.s * g + j.c * g * g;
}

struct ScaledOutputs {
    TransitionMatrices m;
    Integer den;
    std::vector<std::vector<Integer>> out;  // out[symbol][state] * den
    std::vector<Integer> finals;            // finals[state] * den
    Integer max_abs;
};

ScaledOutputs scale_outputs(const Transducer& t) {
    if (auto v = validate(t); !v.empty()) throw std::invalid_argument("invalid transducer: " + v.front().message);
    ScaledOutputs so;
    so.m = matrices(t);
    std::vector<Rational> all(so.m.finals.begin(), so.m.finals.end());
    for (const auto& row : so.m.out) all.insert(all.end(), row.begin(), row.end());
    so.den = common_denominator(all);
    so.max_abs = 0;
    auto scaled = [&](const Rational& r) {
        Rational x = r * so.den;
        Integer v = x.get_num();
        if (abs(v) > so.max_abs) so.max_abs = abs(v);
        return v;
    };
    so.out.assign(so.m.symbols, std::vector<Integer>(so.m.size()));
    for (int e = 0; e < so.m.symbols; ++e)
        for (int i = 0; i < so.m.size(); ++i) so.out[e][i] = scaled(so.m.out[e][i]);
    for (int i = 0; i < so.m.size(); ++i) so.finals.push_back(scaled(so.m.finals[i]));
    return so;
}

int digit_length(std::uint64_t v, int q) {
    int len = 0;
    while (v) {
        v /= static_cast<std::uint64_t>(q);
        ++len;
    }
    return len;
}

template <class I>
Jet<I> box_jet(const ScaledOutputs& so, const std::vector<std::uint64_t>& N) {
    const auto& m = so.m;
    const int d = m.d, q = m.q, n = m.size();
    const int flag_count = 1 << d;
    std::vector<std::vector<int>> ndig(d);
    std::vector<int> len(d);
    int lmax = 0;
    for (int i = 0; i < d; ++i) {
        len[i] = digit_length(N[i], q);
        lmax = std::max(lmax, len[i]);
        for (std::uint64_t v = N[i]; v; v /= static_cast<std::uint64_t>(q)) ndig[i].push_back(static_cast<int>(v % q));
    }
    std::vector<std::vector<I>> out(m.symbols, std::vector<I>(n));
    std::vector<I> fin(n);
    for (int e = 0; e < m.symbols; ++e)
        for (int s = 0; s < n; ++s) out[e][s] = from_big<I>(so.out[e][s]);
    for (int s = 0; s < n; ++s) fin[s] = from_big<I>(so.finals[s]);

    // symbol digits
    std::vector<std::vector<int>> sym(m.symbols, std::vector<int>(d));
    for (int e = 0; e < m.symbols; ++e) {
        int code = e;
        for (int i = 0; i < d; ++i) {
            sym[e][i] = code % q;
            code /= q;
        }
    }

    Jet<I> total;
    add_appended(total, Jet<I>{1, 0, 0}, fin[0]);

    // V[state * flag_count + flags]; flag bit i: lower digits of n_i < those of N_i.
    std::vector<Jet<I>> V(static_cast<std::size_t>(n) * flag_count), W(V.size());
    V[0] = Jet<I>{1, 0, 0};
    for (int l = 1; l <= lmax; ++l) {
        const int pos = l - 1;
        std::vector<int> y(d);
        for (int i = 0; i < d; ++i) y[i] = pos < len[i] ? ndig[i][pos] : 0;
        std::fill(W.begin(), W.end(), Jet<I>{});
        for (int s = 0; s < n; ++s)
            for (int fl = 0; fl < flag_count; ++fl) {
                const Jet<I>& j = V[s * flag_count + fl];
                if (j.c == 0) continue;
                for (int e = 0; e < m.symbols; ++e) {
                    int nf = fl;
                    bool accept = true;
                    for (int i = 0; i < d; ++i) {
                        if (sym[e][i] < y[i])
                            nf |= 1 << i;
                        else if (sym[e][i] > y[i])
                            nf &= ~(1 << i);
                        if (!((nf >> i) & 1) && len[i] <= l) accept = false;
                    }
                    const int to = m.next[e][s];
                    if (e != 0 && accept) add_appended(total, j, I(out[e][s] + fin[to]));
                    if (l < lmax) add_appended(W[to * flag_count + nf], j, out[e][s]);
                }
            }
        std::swap(V, W);
    }
    return total;
}

MomentSummary summarize(const std::vector<std::uint64_t>& N, const Integer& count, const Integer& s,
                        const Integer& q, const Integer& den) {
    MomentSummary r;
    r.N = N;
    r.count = count;
    r.sum1 = Rational(s, den);
    r.sum1.canonicalize();
    r.sum2 = Rational(q, Integer(den * den));
    r.sum2.canonicalize();
    r.mean = r.sum1 / Rational(count);
    r.variance = r.sum2 / Rational(count) - r.mean * r.mean;
    return r;
}

}  // namespace

MomentSummary prefix_moments(const Transducer& t, const std::vector<std::uint64_t>& N) {
    if (static_cast<int>(N.size()) != t.d()) throw std::invalid_argument("box dimension differs from d");
    for (std::uint64_t v : N) {
        if (v < 1) throw std::domain_error("N must be at least 1");
        if (v > (std::uint64_t(1) << 63)) throw std::invalid_argument("N must not exceed 2^63");
    }
    const ScaledOutputs so = scale_outputs(t);
    long double count = 1;
    int lmax = 0;
    for (std::uint64_t v : N) {
        count *= static_cast<long double>(v);
        lmax = std::max(lmax, digit_length(v, so.m.q));
    }
    const long double g = (static_cast<long double>(lmax) + 1) * so.max_abs.get_d();
    const bool fast = so.max_abs < Integer("4611686018427387904") && count * (g * g + 1) * 4 < 0x1p125L;
    Integer c, s, q;
    if (fast) {
        const Jet<i128> j = box_jet<i128>(so, N);
        c = to_big(j.c);
        s = to_big(j.s);
        q = to_big(j.q);
    } else {
        const Jet<Integer> j = box_jet<Integer>(so, N);
        c = j.c;
        s = j.s;
        q = j.q;
    }
    return summarize(N, c, s, q, so.den);
}

MomentSummary prefix_moments(const Transducer& t, std::uint64_t N) {
    return prefix_moments(t, std::vector<std::uint64_t>(static_cast<std::size_t>(t.d()), N));
}

MomentSummary enumerate_moments(const Transducer& t, const std::vector<std::uint64_t>& N) {
    if (static_cast<int>(N.size()) != t.d()) throw std::invalid_argument("box dimension differs from d");
    Rational s1 = 0, s2 = 0;
    Integer count = 1;
    for (std::uint64_t v : N) count *= to_integer(static_cast<long long>(v));
    std::vector<std::uint64_t> n(N.size(), 0);
    if (count == 0) throw std::domain_error("N must be at least 1");
    while (true) {
        const Rational v = evaluate(t, n);
        s1 += v;
        s2 += v * v;
        std::size_t i = 0;
        while (i < n.size() && ++n[i] == N[i]) n[i++] = 0;
        if (i == n.size()) break;
    }
    MomentSummary r;
    r.N = N;
    r.count = count;
    r.sum1 = s1;
    r.sum2 = s2;
    r.mean = s1 / Rational(count);
    r.variance = s2 / Rational(count) - r.mean * r.mean;
    return r;
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0) || !(hi >= lo)) throw std::invalid_argument("grid needs lo <= hi and step > 0");
    std::vector<double> g;
    const long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream in(spec);
    for (std::string tok; std::getline(in, tok, ':');) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("grid must look like lo:hi:step");
        }
        if (used != tok.size()) throw std::invalid_argument("grid must look like lo:hi:step");
        parts.push_back(v);
    }
    if (parts.size() != 3) throw std::invalid_argument("grid must look like lo:hi:step");
    return make_grid(parts[0], parts[1], parts[2]);
}

namespace {

void require_d1(const Transducer& t, const char* what) {
    if (t.d() != 1) throw std::domain_error(std::string(what) + " is only available for d = 1");
}

std::uint64_t grid_n(int q, double x) {
    const long double v = std::round(std::pow(static_cast<long double>(q), static_cast<long double>(x)));
    if (!(v >= 1)) throw std::domain_error("grid point gives N < 1");
    if (v > 0x1p62L) throw std::domain_error("grid point exceeds 2^62");
    return static_cast<std::uint64_t>(v);
}

template <class F>
std::vector<FluctuationSample> sample_grid(const Transducer& t, const std::vector<double>& grid, F value) {
    std::vector<FluctuationSample> rows;
    const double lq = std::log(double(t.q()));
    for (double x : grid) {
        FluctuationSample r;
        r.x = x;
        r.N = grid_n(t.q(), x);
        r.log_n = std::log(static_cast<double>(r.N)) / lq;
        r.value = value(prefix_moments(t, r.N), r.log_n);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

std::vector<FluctuationSample> fluctuation_samples(const Transducer& t, const AsymptoticReport& rep,
                                                   const std::vector<double>& grid) {
    require_d1(t, "fluctuation sampling");
    const double eT = rep.e_T.get_d();
    return sample_grid(t, grid, [&](const MomentSummary& m, double L) { return m.mean.get_d() - eT * L; });
}

std::vector<FluctuationSample> variance_fluctuation(const Transducer& t, const AsymptoticReport& rep,
                                                    const std::vector<double>& grid) {
    require_d1(t, "variance sampling");
    if (rep.classification == Classification::VarianceThetaLogSquared)
        throw std::domain_error("variance grows like log^2 N for this transducer; no periodic variance fluctuation");
    const double vT = rep.v_T.get_d();
    return sample_grid(t, grid, [&](const MomentSummary& m, double L) { return m.variance.get_d() - vT * L; });
}

DistributionCheck distribution_check(const Transducer& t, const AsymptoticReport& rep, std::uint64_t N,
                                     KsMode mode) {
    require_d1(t, "the distribution check");
    if (N < 2) throw std::domain_error("the distribution check needs N >= 2");
    const ScaledOutputs so = scale_outputs(t);
    const Integer limit("1000000000000");
    if (so.max_abs > limit) throw std::domain_error("outputs too large for the distribution check");
    const auto& m = so.m;
    const int n = m.size(), q = m.q;
    std::vector<long long> out(static_cast<std::size_t>(q) * n), fin(n);
    for (int e = 0; e < q; ++e)
        for (int s = 0; s < n; ++s) out[e * n + s] = so.out[e][s].get_si();
    for (int s = 0; s < n; ++s) fin[s] = so.finals[s].get_si();
    auto value = [&](std::uint64_t v) {
        long long acc = 0;
        int s = 0;
        while (v) {
            const int e = static_cast<int>(v % static_cast<std::uint64_t>(q));
            v /= static_cast<std::uint64_t>(q);
            acc += out[e * n + s];
            s = m.next[e][s];
        }
        return acc + fin[s];
    };

    DistributionCheck r;
    r.N = N;
    r.mode = mode;
    const double L = std::log(static_cast<double>(N)) / std::log(double(q));
    r.reference_scale = 1 / std::sqrt(L);

    const std::uint64_t enum_limit = std::uint64_t(1) << 24;
    const std::uint64_t strata = std::uint64_t(1) << 22;
    std::vector<long long> vals;
    if (N <= enum_limit) {
        vals.reserve(N);
        for (std::uint64_t v = 0; v < N; ++v) vals.push_back(value(v));
    } else {
        r.sampled = true;
        vals.reserve(strata);
        for (std::uint64_t i = 0; i < strata; ++i) {
            const auto v = static_cast<std::uint64_t>((static_cast<unsigned __int128>(2 * i + 1) * N) / (2 * strata));
            vals.push_back(value(v));
        }
    }
    r.observations = vals.size();
    std::sort(vals.begin(), vals.end());
    const double den = so.den.get_d();
    const double total = static_cast<double>(vals.size());

    bool positive = !rep.components.empty();
    for (const auto& c : rep.components) positive = positive && sgn(c.b) > 0;
    if (!positive) {
        r.quantitative = false;
        r.note = "quantitative mode refused: a final component has zero variance constant b_j, so no Gaussian limit applies";
        for (std::size_t i = 0; i < vals.size();) {
            std::size_t j = i;
            while (j < vals.size() && vals[j] == vals[i]) ++j;
            if (r.support.size() < 64) {
                Rational v(to_integer(vals[i]), so.den);
                v.canonicalize();
                r.support.emplace_back(v, static_cast<double>(j - i) / total);
            }
            i = j;
        }
        return r;
    }

    r.quantitative = true;
    double shift = 0;
    if (mode == KsMode::Centered) {
        long double sum = 0;
        for (long long v : vals) sum += static_cast<long double>(v);
        const double mean = static_cast<double>(sum / vals.size()) / den;
        shift = mean - rep.e_T.get_d() * L;
    }
    const double root = std::sqrt(L);
    auto cdf = [&](double y) {
        double f = 0;
        for (const auto& c : rep.components) {
            const double z = (y - c.a.get_d() * root) / std::sqrt(c.b.get_d());
            f += c.lambda.get_d() * 0.5 * std::erfc(-z / std::sqrt(2.0));
        }
        return f;
    };
    double ks = 0;
    for (std::size_t i = 0; i < vals.size();) {
        std::size_t j = i;
        while (j < vals.size() && vals[j] == vals[i]) ++j;
        const double y = (static_cast<double>(vals[i]) / den - shift) / root;
        const double f = cdf(y);
        ks = std::max({ks, std::abs(static_cast<double>(i) / total - f), std::abs(static_cast<double>(j) / total - f)});
        i = j;
    }
    r.ks_distance = ks;
    return r;
}

}  // namespace digitflux
