#pragma once

// Independent reference computations shared by the tests, the acceptance
// suite and `digitflux selftest`.

#include "digitflux/recursion.hpp"
#include "digitflux/transducer.hpp"

#include <complex>
#include <map>
#include <random>

namespace digitflux {

// Top-down application of a recursion system with memoization; does not use
// the compiler or RecursionEvaluator.
class BruteForceRecursion {
public:
    explicit BruteForceRecursion(const RecursionSystem& sys) : sys_(sys) {}
    // Throws std::runtime_error when the walk leaves the domain or does not end.
    Rational operator()(const IVec& n);

private:
    Rational walk(const IVec& n, int depth);
    const RecursionSystem& sys_;
    std::map<IVec, Rational> memo_;
};

// Rules with kappa_lambda in [0, kappa), shifts r in [rmin, rmax], constants in [-tmax, tmax].
RecursionSystem random_system(std::mt19937_64& rng, int q, int d, int kappa, int rmin, int rmax, int tmax = 4);

// Draws systems until one has no bad zero-input cycle, then picks one initial
// value per class. d = 1: q in {2, 3}, kappa <= 3, |r| <= 8. d >= 2: q = 2,
// kappa <= 2, 0 <= r <= 8. |t| <= 4 throughout.
RecursionSystem random_well_posed(std::mt19937_64& rng, int d);

// Complete deterministic transducer with outputs and final outputs in {-3..3}/{1,2}.
Transducer random_transducer(std::mt19937_64& rng, int q, int d, int states);

// Riemann zeta by an alternating series with binomial-sum weights at 150 bits.
std::complex<double> riemann_zeta_reference(std::complex<double> s);

// Closed-form Fourier coefficients of the q-ary sum of digits.
std::complex<double> sum_of_digits_coefficient(int q, long long k);

}  // namespace digitflux
