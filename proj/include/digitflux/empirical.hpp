#pragma once

#include "digitflux/rational.hpp"
#include "digitflux/spectral.hpp"
#include "digitflux/transducer.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace digitflux {

// Moments of T(n) over the box n in [0, N_1) x ... x [0, N_d).
struct MomentSummary {
    std::vector<std::uint64_t> N;
    Integer count;     // N_1 ... N_d
    Rational sum1;     // sum T(n)
    Rational sum2;     // sum T(n)^2
    Rational mean;
    Rational variance;
};

// Exact, through a digit-by-digit recursion on (state, comparison flags) with
// integer 2-jets; O(log N) steps. Each N_i must lie in [1, 2^63].
MomentSummary prefix_moments(const Transducer& t, const std::vector<std::uint64_t>& N);
MomentSummary prefix_moments(const Transducer& t, std::uint64_t N);  // same N on every axis

// Reference: fold of evaluate over the box.
MomentSummary enumerate_moments(const Transducer& t, const std::vector<std::uint64_t>& N);

// lo, lo + step, ... up to hi (inclusive within rounding).
std::vector<double> make_grid(double lo, double hi, double step);
// "lo:hi:step"
std::vector<double> parse_grid(const std::string& spec);

struct FluctuationSample {
    double x = 0;          // requested log_q N
    std::uint64_t N = 0;   // round(q^x)
    double log_n = 0;      // log_q N of the rounded N
    double value = 0;
};

// mean(N) - e_T log_q N with N = round(q^x) for each grid point (d = 1).
std::vector<FluctuationSample> fluctuation_samples(const Transducer& t, const AsymptoticReport& rep,
                                                   const std::vector<double>& grid);

// Variance(N) - v_T log_q N; refused for the theta(log^2 N) variance class.
std::vector<FluctuationSample> variance_fluctuation(const Transducer& t, const AsymptoticReport& rep,
                                                    const std::vector<double>& grid);

// Raw compares T(n)/sqrt(log_q N) with sum_j lambda_j Phi(a_j sqrt(log_q N), b_j).
// Centered first removes the empirical offset mean(N) - e_T log_q N.
enum class KsMode { Raw, Centered };

struct DistributionCheck {
    std::uint64_t N = 0;
    KsMode mode = KsMode::Centered;
    bool quantitative = false;
    double ks_distance = std::numeric_limits<double>::quiet_NaN();
    double reference_scale = 0;   // 1 / sqrt(log_q N)
    bool sampled = false;         // stratified sample instead of full enumeration
    std::uint64_t observations = 0;
    std::vector<std::pair<Rational, double>> support;  // degenerate mode: values and masses
    std::string note;
};

// Full enumeration for N <= 2^24, 2^22 stratified points above (d = 1).
DistributionCheck distribution_check(const Transducer& t, const AsymptoticReport& rep, std::uint64_t N,
                                     KsMode mode = KsMode::Centered);

}  // namespace digitflux
