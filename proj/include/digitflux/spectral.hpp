#pragma once

#include "digitflux/linalg.hpp"
#include "digitflux/numeric.hpp"
#include "digitflux/structure.hpp"
#include "digitflux/transducer.hpp"

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace digitflux {

// Transition structure restricted to the accessible states. Local index i
// refers to states[i]; the initial state has local index 0.
struct TransitionMatrices {
    int q = 2;
    int d = 1;
    int symbols = 2;
    std::vector<int> states;
    std::vector<int> local;                   // transducer state -> local index or -1
    std::vector<std::vector<int>> next;       // next[symbol][i]
    std::vector<std::vector<Rational>> out;   // out[symbol][i]
    QVector finals;
    QVector delta;   // row sums of the output matrix
    QVector delta2;  // row sums of the squared outputs

    int size() const { return static_cast<int>(states.size()); }
    Rational dominant() const;  // q^d
    QMatrix adjacency(int symbol) const;
    QMatrix total() const;
    QMatrix output_matrix(int symbol) const;
    QMatrix output_total() const;
};

TransitionMatrices matrices(const Transducer& t);

struct ComponentConstants {
    std::vector<int> states;         // local indices
    int period = 1;
    std::vector<int> cyclic_class;   // per local state; -1 outside the component
    Rational a, b, lambda;
    QVector stationary;              // left eigenvector for q^d, normalized to sum 1
    QVector absorption;              // probability of ending in this component, per local start state
    // phase_hits[i][r]: probability that the run from local state i enters the
    // component at a state of cyclic class c after T steps with c - T = r (mod period).
    std::vector<QVector> phase_hits;
};

// a_j, b_j, stationary vector and cyclic classes of one final component
// (given as local indices). lambda, absorption and phase_hits stay empty.
ComponentConstants component_mean_var(const TransitionMatrices& m, const std::vector<int>& component);

// Absorption probabilities of the final components under uniform digits.
std::vector<Rational> hitting_probabilities(const Transducer& t);

enum class Classification { GaussianMixture, SingleGaussian, Degenerate, VarianceThetaLogSquared };
std::string to_string(Classification c);

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AsymptoticReport {
    StructureReport structure;
    TransitionMatrices mats;
    std::vector<ComponentConstants> components;  // aligned with structure.final_components
    Rational e_T, v_T;
    QVector w0;                // left projection of e_1 onto the eigenvalue q^d
    Rational w0_derivative;    // -i w_0'^T 1
    std::vector<std::complex<double>> nondominant_eigenvalues;  // distinct
    double second_modulus = 0;
    double xi = std::numeric_limits<double>::infinity();  // supremum d - log_q(second_modulus)
    bool exact_no_error_term = false;  // the non-dominant spectrum is empty
    Classification classification = Classification::Degenerate;

    int period() const { return structure.final_period; }
};

AsymptoticReport analyze(const Transducer& t);

// w_l, the projection of e_1 onto the left eigenspace of q^d exp(2 pi i l / p).
template <class R>
std::vector<ComplexT<R>> projection(const AsymptoticReport& rep, long long l) {
    using C = ComplexT<R>;
    const int n = rep.mats.size();
    const long long p = rep.period();
    std::vector<C> w(n, C(0));
    for (const auto& comp : rep.components) {
        const long long pj = comp.period;
        if ((l * pj) % p != 0) continue;
        const long long m = l * pj / p;
        C coef(0);
        for (long long r = 0; r < pj; ++r)
            if (sgn(comp.phase_hits[0][r]) != 0) coef += root_of_unity<R>(m * r, pj) * to_real<R>(comp.phase_hits[0][r]);
        for (int s : comp.states)
            w[s] += coef * root_of_unity<R>(-m * comp.cyclic_class[s], pj) * to_real<R>(comp.stationary[s]);
    }
    return w;
}

// Power iteration of e_1^T (M / q^d)^n over residue classes mod p followed by
// a discrete Fourier transform; returns w_0, ..., w_{p-1}.
struct IterativeProjection {
    std::vector<std::vector<std::complex<double>>> w;
    long long iterations = 0;
};
IterativeProjection dominant_projection(const AsymptoticReport& rep, double tol = 1e-14, long long max_iterations = 1000000);

// q^{-d} w_0 . delta == e_T with w_0 from power iteration.
bool steady_state_identity_check(const AsymptoticReport& rep, double tol = 1e-10);

// i w_l'^T 1 for l != 0 through the reduced resolvent at q^d exp(2 pi i l / p).
std::complex<double> projection_derivative_term(const AsymptoticReport& rep, long long l);

}  // namespace digitflux
