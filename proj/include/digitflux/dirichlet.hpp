#pragma once

#include "digitflux/linalg.hpp"
#include "digitflux/spectral.hpp"
#include "digitflux/transducer.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace digitflux {

// Numerical policy for the Dirichlet series engine (d = 1 only).
struct SpecialFunctionContext {
    int precision = 30;        // working decimal digits; at most 65
    long long terms = 1024;    // R: b(n) for R <= n < qR enter explicitly, the rest through the recursion
    int max_shift = 40;        // M_max: cap on the binomial shifts z + m
    int threads = 1;
};

// b(0), ..., b(R) exactly, as vectors over the accessible states (local order).
std::vector<QVector> h_vector_terms(const Transducer& t, long long R);

struct SeriesValue {
    std::vector<std::complex<double>> value;  // H(z), one entry per accessible state
    double error = 0;                         // estimate of the max-norm error
};

struct Estimate {
    std::complex<double> value;
    double error = 0;
};

struct DoublePole {
    double h = 0;           // constant term of the Laurent expansion of w_0^T H at z = 1 (plus e_T / (z-1)^2 removed)
    double residue = 0;     // e_T / 2 + h / log q
    double error = 0;
};

struct FourierResult {
    int period = 1;
    long long K = 0;
    std::vector<long long> k;                    // -K..K
    std::vector<std::complex<double>> c;         // aligned with k
    std::vector<double> error;                   // aligned with k
    std::vector<std::complex<double>> residues;  // Res at 1 + chi_k for k = 1..K (index k - 1)
    DoublePole pole;
    double w0_derivative = 0;

    std::complex<double> coefficient(long long kk) const { return c[static_cast<std::size_t>(kk + K)]; }
    // Partial Fourier series sum_{|k| <= K} c_k exp(2 pi i k x / p), real part.
    double evaluate(double x) const;
};

// Shared state for all evaluations on one transducer; read-only after construction
// and safe to use from several threads.
class FourierEngine {
public:
    FourierEngine(const Transducer& t, SpecialFunctionContext ctx = {});
    ~FourierEngine();
    FourierEngine(FourierEngine&&) noexcept;
    FourierEngine& operator=(FourierEngine&&) noexcept;

    const AsymptoticReport& report() const;
    const SpecialFunctionContext& context() const;

    // Meromorphic continuation for Re z > 0 away from the poles 1 + chi_k.
    SeriesValue h_series(std::complex<double> z) const;
    Estimate residue(long long k) const;  // Res_{z = 1 + chi_k} w_k^T H(z), k != 0
    DoublePole double_pole() const;
    double w0_derivative_term() const;
    Estimate coefficient(long long k) const;
    FourierResult fourier(long long K) const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

SeriesValue h_series(const Transducer& t, std::complex<double> z, const SpecialFunctionContext& ctx = {});
Estimate residue_k(const Transducer& t, long long k, const SpecialFunctionContext& ctx = {});
DoublePole double_pole_data(const Transducer& t, const SpecialFunctionContext& ctx = {});
double w0_derivative_term(const Transducer& t);
FourierResult fourier(const Transducer& t, long long K, const SpecialFunctionContext& ctx = {});

}  // namespace digitflux
