#include "digitflux/dirichlet.hpp"

#include "digitflux/numeric.hpp"
#include "digitflux/special.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace digitflux {

namespace {

void require_d1(const Transducer& t) {
    if (t.d() != 1) throw std::domain_error("Fourier coefficients are only available for d = 1");
}

long long mod_floor(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

std::vector<QVector> h_vector_terms(const Transducer& t, long long R) {
    require_d1(t);
    const TransitionMatrices m = matrices(t);
    const int n = m.size();
    std::vector<QVector> b(static_cast<std::size_t>(R + 1), QVector(n));
    b[0] = m.finals;
    for (long long v = 1; v <= R; ++v) {
        const long long r = v / m.q;
        const int e = static_cast<int>(v % m.q);
        for (int i = 0; i < n; ++i) b[v][i] = m.out[e][i] + b[r][m.next[e][i]];
    }
    return b;
}

struct FourierEngine::Impl {
    AsymptoticReport rep;
    SpecialFunctionContext ctx;

    explicit Impl(const Transducer& t, SpecialFunctionContext c) : rep(analyze(t)), ctx(c) {}
    virtual ~Impl() = default;
    virtual SeriesValue h_series(std::complex<double> z) const = 0;
    virtual Estimate residue(long long k) const = 0;
    virtual DoublePole double_pole() const = 0;
};

namespace {

using std::abs;
using std::exp;
using std::log;
using std::pow;

template <class R>
class Engine final : public FourierEngine::Impl {
    using C = ComplexT<R>;
    using CVec = std::vector<C>;

public:
    Engine(const Transducer& t, SpecialFunctionContext c) : Impl(t, c) {
        const auto& m = rep.mats;
        q_ = m.q;
        n_ = m.size();
        R0_ = ctx.terms;
        digits_ = std::min(ctx.precision, std::numeric_limits<R>::digits10);
        logq_ = log(R(q_));
        bernoulli_ = bernoulli_over_factorial<R>(2 * digits_ + 40);

        out_.assign(q_, std::vector<R>(n_));
        for (int e = 0; e < q_; ++e)
            for (int i = 0; i < n_; ++i) out_[e][i] = to_real<R>(m.out[e][i]);

        beta_ = 0;
        gamma_ = 0;
        for (int e = 0; e < q_; ++e)
            for (int i = 0; i < n_; ++i) beta_ = std::max(beta_, std::abs(m.out[e][i].get_d()));
        for (int i = 0; i < n_; ++i) gamma_ = std::max(gamma_, std::abs(m.finals[i].get_d()));

        // b(v) for 0 <= v < q R0, rounded from exact recursion steps.
        const long long count = static_cast<long long>(q_) * R0_;
        b_.assign(static_cast<std::size_t>(count * n_), R(0));
        for (int i = 0; i < n_; ++i) b_[i] = to_real<R>(m.finals[i]);
        for (long long v = 1; v < count; ++v) {
            const long long r = v / q_;
            const int e = static_cast<int>(v % q_);
            for (int i = 0; i < n_; ++i) b_[v * n_ + i] = out_[e][i] + b_[r * n_ + m.next[e][i]];
        }

        w0_.resize(n_);
        for (int i = 0; i < n_; ++i) w0_[i] = to_real<R>(rep.w0[i]);
        eT_ = to_real<R>(rep.e_T);
    }

    SeriesValue h_series(std::complex<double> zd) const override {
        if (!(zd.real() > 0)) throw std::domain_error("H(z) is only continued to Re z > 0");
        const C z(R(zd.real()), R(zd.imag()));
        const auto plan = plan_shifts(zd);
        const auto L = levels(z, plan.J);
        CVec rhs = top_rhs(z, L, true);
        auto a = system(z);
        const double cond = inverse_norm(zd);
        if (cond > 1e12) throw std::domain_error("H(z) evaluated too close to a pole; use the residue path");
        CVec tail = solve_dense(std::move(a), rhs);

        // Explicit head sum_{1 <= n < R0} b(n) n^{-z}.
        std::vector<R> re(n_, R(0)), im(n_, R(0));
        for (long long v = 1; v < R0_; ++v) {
            const C p = real_power_neg<R>(R(v), z);
            const R pr = p.real(), pi = p.imag();
            const R* bv = &b_[v * n_];
            for (int i = 0; i < n_; ++i) {
                re[i] += bv[i] * pr;
                im[i] += bv[i] * pi;
            }
        }
        SeriesValue out;
        for (int i = 0; i < n_; ++i) out.value.push_back(to_complex_double(tail[i] + C(re[i], im[i])));
        out.error = cond * (plan.truncation + L.zeta_error) + roundoff() * (1 + cond);
        return out;
    }

    Estimate residue(long long k) const override {
        if (k == 0) throw std::invalid_argument("the k = 0 pole is double; use double_pole");
        const long long p = rep.period();
        const C chi = chi_k(k);
        const C z0 = C(1) + chi;
        const auto plan = plan_shifts(to_complex_double(z0));
        const auto L = levels(z0, plan.J);
        const CVec rhs = top_rhs(z0, L, true);
        const CVec w = projection<R>(rep, mod_floor(k, p));
        C acc(0);
        double wnorm = 0;
        for (int i = 0; i < n_; ++i) {
            acc += w[i] * rhs[i];
            wnorm += static_cast<double>(abs(w[i]));
        }
        Estimate e;
        e.value = to_complex_double(acc / logq_);
        e.error = wnorm * (plan.truncation + L.zeta_error + roundoff()) / static_cast<double>(logq_);
        return e;
    }

    DoublePole double_pole() const override {
        const C z0(1);
        const auto plan = plan_shifts({1.0, 0.0});
        const auto L = levels(z0, plan.J);
        const CVec rhs = top_rhs(z0, L, false);
        R h = 0;
        double wnorm = 0;
        for (int i = 0; i < n_; ++i) {
            h += w0_[i] * rhs[i].real();
            wnorm += std::abs(static_cast<double>(w0_[i]));
        }
        h -= eT_ * logq_;
        for (int e = 0; e < q_; ++e) {
            R wd = 0;
            for (int i = 0; i < n_; ++i) wd += w0_[i] * out_[e][i];
            if (wd == 0) continue;
            h -= wd * digamma<R>(R(R0_) + R(e) / R(q_), digits_, bernoulli_) / R(q_);
        }
        DoublePole d;
        d.h = static_cast<double>(h);
        d.residue = static_cast<double>(eT_ / 2 + h / logq_);
        d.error = wnorm * (plan.truncation + L.zeta_error + roundoff()) / static_cast<double>(logq_);
        return d;
    }

private:
    struct Plan {
        int J = 1;
        double truncation = 0;
    };

    struct Levels {
        std::vector<CVec> T;  // T[j] = T(z0 + j), j = 1..J
        CVec S0;              // sum_{R0 <= n < q R0} b(n) n^{-z0}
        int J = 0;
        double zeta_error = 0;
    };

    // Bound on sum_{n >= R0} |b(n)| n^{-sigma}.
    double tail_bound(double sigma) const {
        const double lq = std::log(double(q_));
        const double r = static_cast<double>(R0_);
        const double a = beta_ + gamma_;
        const double lr = std::log(r) / lq;
        const double head = (a + beta_ * lr) * std::pow(r, -sigma);
        const double integral =
            std::pow(r, 1 - sigma) * ((a + beta_ * lr) / (sigma - 1) + beta_ / ((sigma - 1) * (sigma - 1) * lq));
        return head + integral;
    }

    // Rounding allowance: a fixed multiple of the working precision scaled by the output sizes.
    double roundoff() const { return std::pow(10.0, -digits_) * 100 * n_ * (beta_ + gamma_ + 1); }

    // Uses J = M_max shifted levels and bounds the neglected binomial terms, with
    // a factor 2^m for the nested substitutions and 4 for the resolvent norms.
    Plan plan_shifts(std::complex<double> z0) const {
        const double sigma = z0.real();
        Plan plan;
        plan.J = ctx.max_shift;
        double binom = 1;
        for (int m = 1; m <= ctx.max_shift + 60; ++m) {
            binom *= std::abs(z0 + double(m - 1)) / m;
            if (m <= plan.J) continue;
            double eps_sum = 0;
            for (int e = 1; e < q_; ++e) eps_sum += std::pow(double(e) / q_, m);
            plan.truncation +=
                4 * std::pow(2.0, m) * binom * std::pow(double(q_), -sigma) * eps_sum * tail_bound(sigma + m);
        }
        return plan;
    }

    C chi_k(long long k) const {
        const R im = 2 * pi_value<R>() * R(k) / (R(rep.period()) * logq_);
        return C(R(0), im);
    }

    C q_power_neg(const C& s) const {
        using std::exp;
        return exp(-s * logq_);
    }

    std::vector<CVec> system(const C& s) const {
        const C f = q_power_neg(s);
        std::vector<CVec> a(n_, CVec(n_, C(0)));
        for (int i = 0; i < n_; ++i) {
            a[i][i] += C(1);
            for (int e = 0; e < q_; ++e) a[i][rep.mats.next[e][i]] -= f;
        }
        return a;
    }

    // max-norm of (I - q^{-z} M)^{-1} in double precision.
    double inverse_norm(std::complex<double> z) const {
        const std::complex<double> f = std::exp(-z * std::log(double(q_)));
        std::vector<std::vector<std::complex<double>>> a(n_, std::vector<std::complex<double>>(n_, 0.0));
        for (int i = 0; i < n_; ++i) {
            a[i][i] += 1.0;
            for (int e = 0; e < q_; ++e) a[i][rep.mats.next[e][i]] -= f;
        }
        std::vector<double> rows(n_, 0.0);
        for (int col = 0; col < n_; ++col) {
            std::vector<std::complex<double>> unit(n_, 0.0);
            unit[col] = 1.0;
            std::vector<std::complex<double>> x;
            try {
                x = solve_dense(a, unit);
            } catch (const std::domain_error&) {
                return std::numeric_limits<double>::infinity();
            }
            for (int i = 0; i < n_; ++i) rows[i] += std::abs(x[i]);
        }
        return *std::max_element(rows.begin(), rows.end());
    }

    // q^{-s} sum_e delta_e zeta(s, R0 + e/q), accumulated into rhs.
    double add_zeta_part(const C& s, CVec& rhs) const {
        const C f = q_power_neg(s);
        double err = 0;
        for (int e = 0; e < q_; ++e) {
            double zerr = 0;
            const C zeta = hurwitz_zeta<R>(s, R(R0_) + R(e) / R(q_), digits_, bernoulli_, &zerr);
            const C fz = f * zeta;
            double dmax = 0;
            for (int i = 0; i < n_; ++i) {
                if (out_[e][i] == 0) continue;
                rhs[i] += fz * out_[e][i];
                dmax = std::max(dmax, std::abs(static_cast<double>(out_[e][i])));
            }
            // A converged expansion sits below the working precision, which roundoff() already covers.
            if (zerr > std::pow(10.0, -digits_) * (static_cast<double>(abs(zeta)) + 1))
                err += dmax * zerr * static_cast<double>(abs(f));
        }
        return err;
    }

    // sum_{m = 1}^{upto} binom(-s, m) q^{-s-m} sum_e e^m M_e T(s + m), accumulated into rhs.
    void add_binomial_part(const C& s, const std::vector<CVec>& T, int j, int upto, CVec& rhs) const {
        C coef = q_power_neg(s);
        for (int m = 1; m <= upto; ++m) {
            coef *= (-s - R(m - 1)) / R(m * q_);
            const CVec& t = T[j + m];
            for (int e = 1; e < q_; ++e) {
                const C f = coef * pow(R(e), m);
                for (int i = 0; i < n_; ++i) rhs[i] += f * t[rep.mats.next[e][i]];
            }
        }
    }

    Levels levels(const C& z0, int J) const {
        Levels L;
        L.J = J;
        L.T.assign(J + 1, CVec());
        const long long count = static_cast<long long>(q_ - 1) * R0_;
        std::vector<R> cre(count), cim(count);
        for (long long idx = 0; idx < count; ++idx) {
            const R v = R(R0_ + idx);
            const C p = real_power_neg<R>(v, z0) * pow(v, -J);
            cre[idx] = p.real();
            cim[idx] = p.imag();
        }
        for (int j = J; j >= 0; --j) {
            std::vector<R> sre(n_, R(0)), sim(n_, R(0));
            for (long long idx = 0; idx < count; ++idx) {
                const R* bv = &b_[(R0_ + idx) * n_];
                const R& pr = cre[idx];
                const R& pi = cim[idx];
                for (int i = 0; i < n_; ++i) {
                    if (bv[i] == 0) continue;
                    sre[i] += bv[i] * pr;
                    sim[i] += bv[i] * pi;
                }
            }
            CVec S(n_);
            for (int i = 0; i < n_; ++i) S[i] = C(sre[i], sim[i]);
            if (j == 0) {
                L.S0 = std::move(S);
                break;
            }
            const C s = z0 + R(j);
            CVec rhs = std::move(S);
            L.zeta_error += add_zeta_part(s, rhs);
            add_binomial_part(s, L.T, j, J - j, rhs);
            L.T[j] = solve_dense(system(s), rhs);
            for (long long idx = 0; idx < count; ++idx) {
                const R v = R(R0_ + idx);
                cre[idx] *= v;
                cim[idx] *= v;
            }
        }
        return L;
    }

    CVec top_rhs(const C& z0, const Levels& L, bool with_zeta) const {
        CVec rhs = L.S0;
        if (with_zeta) add_zeta_part(z0, rhs);
        add_binomial_part(z0, L.T, 0, L.J, rhs);
        return rhs;
    }

    int q_ = 2, n_ = 0, digits_ = 15;
    long long R0_ = 1024;
    R logq_;
    std::vector<R> bernoulli_;
    std::vector<std::vector<R>> out_;
    std::vector<R> b_;
    std::vector<R> w0_;
    R eT_;
    double beta_ = 0, gamma_ = 0;
};

std::unique_ptr<FourierEngine::Impl> make_impl(const Transducer& t, const SpecialFunctionContext& ctx) {
    require_d1(t);
    if (ctx.terms < 16) throw std::invalid_argument("the explicit term count must be at least 16");
    if (ctx.max_shift < 1) throw std::invalid_argument("the binomial shift depth must be positive");
    if (ctx.precision < 1 || ctx.precision > 65) throw std::invalid_argument("precision must lie in 1..65 digits");
    if (ctx.precision <= 15) return std::make_unique<Engine<double>>(t, ctx);
    if (ctx.precision <= 35) return std::make_unique<Engine<Real40>>(t, ctx);
    return std::make_unique<Engine<Real70>>(t, ctx);
}

}  // namespace

FourierEngine::FourierEngine(const Transducer& t, SpecialFunctionContext ctx) : impl_(make_impl(t, ctx)) {}
FourierEngine::~FourierEngine() = default;
FourierEngine::FourierEngine(FourierEngine&&) noexcept = default;
FourierEngine& FourierEngine::operator=(FourierEngine&&) noexcept = default;

const AsymptoticReport& FourierEngine::report() const { return impl_->rep; }
const SpecialFunctionContext& FourierEngine::context() const { return impl_->ctx; }
SeriesValue FourierEngine::h_series(std::complex<double> z) const { return impl_->h_series(z); }
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Adds the rounding of the final double operations to an estimate.
Estimate rounded(Estimate e, double magnitude) {
    e.error += 4 * kEps * magnitude;
    return e;
}

Estimate coefficient_zero(const AsymptoticReport& rep, const DoublePole& d) {
    const double a = -rep.e_T.get_d() / std::log(double(rep.mats.q)), b = rep.w0_derivative.get_d();
    return rounded({{a + b + d.residue, 0.0}, d.error}, std::abs(a) + std::abs(b) + std::abs(d.residue));
}

}  // namespace

Estimate FourierEngine::residue(long long k) const {
    const Estimate e = impl_->residue(k);
    return rounded(e, std::abs(e.value));
}
DoublePole FourierEngine::double_pole() const {
    DoublePole d = impl_->double_pole();
    d.error += 4 * kEps * (std::abs(d.h) + std::abs(d.residue));
    return d;
}
double FourierEngine::w0_derivative_term() const { return impl_->rep.w0_derivative.get_d(); }

Estimate FourierEngine::coefficient(long long k) const {
    const double logq = std::log(double(impl_->rep.mats.q));
    if (k == 0) return coefficient_zero(impl_->rep, double_pole());
    const Estimate r = residue(k);
    const std::complex<double> denom(1.0, 2 * 3.14159265358979323846 * double(k) / (impl_->rep.period() * logq));
    const std::complex<double> c = r.value / denom;
    return rounded({c, r.error / std::abs(denom)}, std::abs(c));
}

FourierResult FourierEngine::fourier(long long K) const {
    if (K < 0) throw std::invalid_argument("K must be non-negative");
    FourierResult res;
    res.period = impl_->rep.period();
    res.K = K;
    res.pole = double_pole();
    res.w0_derivative = w0_derivative_term();
    std::vector<Estimate> pos(static_cast<std::size_t>(K));
    const int threads = std::max(1, std::min<int>(impl_->ctx.threads, static_cast<int>(std::max<long long>(K, 1))));
    std::vector<std::exception_ptr> failures(threads);
    auto work = [&](int tid) {
        try {
            for (long long k = 1 + tid; k <= K; k += threads) pos[k - 1] = residue(k);
        } catch (...) {
            failures[tid] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < threads; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    const double logq = std::log(double(impl_->rep.mats.q));
    const Estimate c0 = coefficient_zero(impl_->rep, res.pole);
    std::vector<Estimate> ck(static_cast<std::size_t>(K));
    for (long long k = 1; k <= K; ++k) {
        const std::complex<double> denom(1.0, 2 * 3.14159265358979323846 * double(k) / (res.period * logq));
        res.residues.push_back(pos[k - 1].value);
        const std::complex<double> c = pos[k - 1].value / denom;
        ck[k - 1] = rounded({c, pos[k - 1].error / std::abs(denom)}, std::abs(c));
    }
    // Outputs are rational, so c_{-k} is the conjugate of c_k.
    for (long long k = -K; k <= K; ++k) {
        res.k.push_back(k);
        const Estimate& e = k == 0 ? c0 : ck[std::abs(k) - 1];
        res.c.push_back(k < 0 ? std::conj(e.value) : e.value);
        res.error.push_back(e.error);
    }
    return res;
}

double FourierResult::evaluate(double x) const {
    double sum = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double angle = 2 * 3.14159265358979323846 * double(k[i]) * x / period;
        sum += c[i].real() * std::cos(angle) - c[i].imag() * std::sin(angle);
    }
    return sum;
}

SeriesValue h_series(const Transducer& t, std::complex<double> z, const SpecialFunctionContext& ctx) {
    return FourierEngine(t, ctx).h_series(z);
}

Estimate residue_k(const Transducer& t, long long k, const SpecialFunctionContext& ctx) {
    return FourierEngine(t, ctx).residue(k);
}

DoublePole double_pole_data(const Transducer& t, const SpecialFunctionContext& ctx) {
    return FourierEngine(t, ctx).double_pole();
}

double w0_derivative_term(const Transducer& t) {
    require_d1(t);
    return analyze(t).w0_derivative.get_d();
}

FourierResult fourier(const Transducer& t, long long K, const SpecialFunctionContext& ctx) {
    return FourierEngine(t, ctx).fourier(K);
}

}  // namespace digitflux
