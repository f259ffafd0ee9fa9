#include "digitflux/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace digitflux {

namespace {

Rational rational_power(int base, int e) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
    return Rational(r);
}

std::vector<int> to_local(const TransitionMatrices& m, const std::vector<int>& states) {
    std::vector<int> out;
    for (int s : states) out.push_back(m.local[s]);
    return out;
}

// Cyclic classes by BFS depth modulo the period.
std::vector<int> cyclic_classes(const TransitionMatrices& m, const std::vector<int>& comp, int period) {
    std::vector<int> cls(m.size(), -1);
    std::deque<int> queue{comp.front()};
    cls[comp.front()] = 0;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int e = 0; e < m.symbols; ++e) {
            int t = m.next[e][s];
            if (cls[t] < 0) {
                cls[t] = (cls[s] + 1) % period;
                queue.push_back(t);
            }
        }
    }
    return cls;
}

int component_period(const TransitionMatrices& m, const std::vector<int>& comp) {
    std::vector<long long> depth(m.size(), -1);
    std::deque<int> queue{comp.front()};
    depth[comp.front()] = 0;
    long long g = 0;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int e = 0; e < m.symbols; ++e) {
            int t = m.next[e][s];
            if (depth[t] < 0) {
                depth[t] = depth[s] + 1;
                queue.push_back(t);
            } else {
                g = std::gcd(g, std::llabs(depth[s] + 1 - depth[t]));
            }
        }
    }
    return static_cast<int>(g == 0 ? 1 : g);
}

}  // namespace

Rational TransitionMatrices::dominant() const { return rational_power(q, d); }

QMatrix TransitionMatrices::adjacency(int symbol) const {
    QMatrix a = zero_matrix(size(), size());
    for (int i = 0; i < size(); ++i) a[i][next[symbol][i]] += 1;
    return a;
}

QMatrix TransitionMatrices::total() const {
    QMatrix a = zero_matrix(size(), size());
    for (int e = 0; e < symbols; ++e)
        for (int i = 0; i < size(); ++i) a[i][next[e][i]] += 1;
    return a;
}

QMatrix TransitionMatrices::output_matrix(int symbol) const {
    QMatrix a = zero_matrix(size(), size());
    for (int i = 0; i < size(); ++i) a[i][next[symbol][i]] += out[symbol][i];
    return a;
}

QMatrix TransitionMatrices::output_total() const {
    QMatrix a = zero_matrix(size(), size());
    for (int e = 0; e < symbols; ++e)
        for (int i = 0; i < size(); ++i) a[i][next[e][i]] += out[e][i];
    return a;
}

TransitionMatrices matrices(const Transducer& t) {
    TransitionMatrices m;
    m.q = t.q();
    m.d = t.d();
    m.symbols = t.symbol_count();
    m.states = accessible_states(t);
    m.local.assign(t.state_count(), -1);
    for (int i = 0; i < m.size(); ++i) m.local[m.states[i]] = i;
    m.next.assign(m.symbols, std::vector<int>(m.size()));
    m.out.assign(m.symbols, std::vector<Rational>(m.size()));
    m.finals.resize(m.size());
    m.delta.assign(m.size(), Rational(0));
    m.delta2.assign(m.size(), Rational(0));
    for (int i = 0; i < m.size(); ++i) {
        const int s = m.states[i];
        m.finals[i] = t.final_output(s);
        for (int e = 0; e < m.symbols; ++e) {
            m.next[e][i] = m.local[t.next(s, e)];
            m.out[e][i] = t.output(s, e);
            m.delta[i] += m.out[e][i];
            m.delta2[i] += m.out[e][i] * m.out[e][i];
        }
    }
    return m;
}

ComponentConstants component_mean_var(const TransitionMatrices& m, const std::vector<int>& comp) {
    ComponentConstants c;
    c.states = comp;
    std::sort(c.states.begin(), c.states.end());
    const std::size_t k = c.states.size();
    std::vector<int> pos(m.size(), -1);
    for (std::size_t i = 0; i < k; ++i) pos[c.states[i]] = static_cast<int>(i);
    const Rational qd = m.dominant();

    // A = M_C - q^d I
    QMatrix a = zero_matrix(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        a[i][i] -= qd;
        for (int e = 0; e < m.symbols; ++e) {
            int t = pos[m.next[e][c.states[i]]];
            if (t < 0) throw std::invalid_argument("component is not closed under transitions");
            a[i][t] += 1;
        }
    }

    // u A = 0, u . 1 = 1: transpose and replace the last equation.
    QMatrix at = zero_matrix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) at[i][j] = a[j][i];
    QVector rhs(k, Rational(0));
    at[k - 1].assign(k, Rational(1));
    rhs[k - 1] = 1;
    QVector u = solve(at, rhs);

    QVector dl(k), d2(k);
    for (std::size_t i = 0; i < k; ++i) {
        dl[i] = m.delta[c.states[i]];
        d2[i] = m.delta2[c.states[i]];
    }
    c.a = dot(u, dl) / qd;

    // (M_C - q^d I) y = q^d a 1 - delta with u . y = 0 replacing the last equation.
    QMatrix sys = a;
    QVector r(k);
    for (std::size_t i = 0; i < k; ++i) r[i] = qd * c.a - dl[i];
    sys[k - 1] = u;
    r[k - 1] = 0;
    QVector y = solve(sys, r);

    Rational cross = 0;  // u . Delta_C y
    for (std::size_t i = 0; i < k; ++i) {
        Rational row = 0;
        for (int e = 0; e < m.symbols; ++e) row += m.out[e][c.states[i]] * y[pos[m.next[e][c.states[i]]]];
        cross += u[i] * row;
    }
    c.b = (dot(u, d2) + 2 * cross) / qd - c.a * c.a;

    c.stationary.assign(m.size(), Rational(0));
    for (std::size_t i = 0; i < k; ++i) c.stationary[c.states[i]] = u[i];
    c.period = component_period(m, c.states);
    c.cyclic_class = cyclic_classes(m, c.states, c.period);
    for (int s = 0; s < m.size(); ++s)
        if (pos[s] < 0) c.cyclic_class[s] = -1;
    return c;
}

namespace {

// Fills absorption and phase_hits for every component.
void absorption_data(const TransitionMatrices& m, std::vector<ComponentConstants>& comps) {
    const int n = m.size();
    std::vector<int> owner(n, -1);
    for (std::size_t j = 0; j < comps.size(); ++j)
        for (int s : comps[j].states) owner[s] = static_cast<int>(j);
    std::vector<int> transient, tpos(n, -1);
    for (int s = 0; s < n; ++s)
        if (owner[s] < 0) {
            tpos[s] = static_cast<int>(transient.size());
            transient.push_back(s);
        }
    const Rational step = 1 / m.dominant();

    for (std::size_t j = 0; j < comps.size(); ++j) {
        auto& c = comps[j];
        const int p = c.period;
        const std::size_t dim = transient.size() * static_cast<std::size_t>(p);
        // Unknowns A[s][r], s transient: A[s][r] - q^-d sum_e A[next][(r + 1) mod p] = 0.
        QMatrix a = identity_matrix(dim);
        QVector rhs(dim, Rational(0));
        for (std::size_t ti = 0; ti < transient.size(); ++ti) {
            const int s = transient[ti];
            for (int r = 0; r < p; ++r) {
                const std::size_t row = ti * p + r;
                for (int e = 0; e < m.symbols; ++e) {
                    const int t = m.next[e][s];
                    const int rr = (r + 1) % p;
                    if (tpos[t] >= 0)
                        a[row][tpos[t] * p + rr] -= step;
                    else if (owner[t] == static_cast<int>(j) && c.cyclic_class[t] == rr)
                        rhs[row] += step;
                }
            }
        }
        QVector x = dim ? solve(a, rhs) : QVector{};
        c.phase_hits.assign(n, QVector(p, Rational(0)));
        c.absorption.assign(n, Rational(0));
        for (int s = 0; s < n; ++s) {
            if (owner[s] == static_cast<int>(j))
                c.phase_hits[s][c.cyclic_class[s]] = 1;
            else if (tpos[s] >= 0)
                for (int r = 0; r < p; ++r) c.phase_hits[s][r] = x[tpos[s] * p + r];
            for (int r = 0; r < p; ++r) c.absorption[s] += c.phase_hits[s][r];
        }
        c.lambda = c.absorption[0];
    }
}

}  // namespace

std::vector<Rational> hitting_probabilities(const Transducer& t) {
    const auto st = structure(t);
    const auto m = matrices(t);
    std::vector<ComponentConstants> comps;
    for (int j = 0; j < st.component_count(); ++j) {
        ComponentConstants c;
        c.states = to_local(m, st.component(j));
        c.period = st.component_periods[j];
        c.cyclic_class = cyclic_classes(m, c.states, c.period);
        comps.push_back(std::move(c));
    }
    absorption_data(m, comps);
    std::vector<Rational> out;
    for (const auto& c : comps) out.push_back(c.lambda);
    return out;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::GaussianMixture: return "GaussianMixture";
        case Classification::SingleGaussian: return "SingleGaussian";
        case Classification::Degenerate: return "Degenerate";
        case Classification::VarianceThetaLogSquared: return "VarianceThetaLogSquared";
    }
    return "?";
}

AsymptoticReport analyze(const Transducer& t) {
    if (auto v = validate(t); !v.empty()) throw std::invalid_argument("invalid transducer: " + v.front().message);
    AsymptoticReport rep;
    rep.structure = structure(t);
    rep.mats = matrices(t);
    const auto& m = rep.mats;
    const int n = m.size();
    const Rational qd = m.dominant();

    for (int j = 0; j < rep.structure.component_count(); ++j)
        rep.components.push_back(component_mean_var(m, to_local(m, rep.structure.component(j))));
    absorption_data(m, rep.components);

    rep.e_T = 0;
    rep.v_T = 0;
    rep.w0.assign(n, Rational(0));
    for (const auto& c : rep.components) {
        rep.e_T += c.lambda * c.a;
        rep.v_T += c.lambda * c.b;
        for (int s : c.states) rep.w0[s] += c.lambda * c.stationary[s];
    }

    // -i w_0'^T 1 = -e_1^T y with (M - q^d I - q^d P_0) y = (I - P_0) delta.
    QMatrix p0 = zero_matrix(n, n);
    for (const auto& c : rep.components)
        for (int i = 0; i < n; ++i) {
            if (sgn(c.absorption[i]) == 0) continue;
            for (int s : c.states) p0[i][s] += c.absorption[i] * c.stationary[s];
        }
    QMatrix sys = m.total();
    for (int i = 0; i < n; ++i) {
        sys[i][i] -= qd;
        for (int j = 0; j < n; ++j) sys[i][j] -= qd * p0[i][j];
    }
    QVector rhs = m.delta;
    QVector proj = p0 * m.delta;
    for (int i = 0; i < n; ++i) rhs[i] -= proj[i];
    rep.w0_derivative = -solve(sys, rhs)[0];

    // Non-dominant spectrum: characteristic polynomials of the diagonal SCC
    // blocks, with the dominant factor x^{p_j} - q^{d p_j} removed from final blocks.
    std::vector<int> final_index(rep.structure.scc_list.size(), -1);
    for (int j = 0; j < rep.structure.component_count(); ++j) final_index[rep.structure.final_components[j]] = j;
    bool empty = true;
    for (std::size_t b = 0; b < rep.structure.scc_list.size(); ++b) {
        std::vector<int> comp = to_local(m, rep.structure.scc_list[b]);
        std::vector<int> pos(n, -1);
        for (std::size_t i = 0; i < comp.size(); ++i) pos[comp[i]] = static_cast<int>(i);
        QMatrix block = zero_matrix(comp.size(), comp.size());
        for (std::size_t i = 0; i < comp.size(); ++i)
            for (int e = 0; e < m.symbols; ++e)
                if (int t = pos[m.next[e][comp[i]]]; t >= 0) block[i][t] += 1;
        QPoly chi = characteristic_polynomial(block);
        if (final_index[b] >= 0) {
            const int pj = rep.components[final_index[b]].period;
            QPoly dom(pj + 1, Rational(0));
            dom[pj] = 1;
            dom[0] = -rational_power(m.q, m.d * pj);
            auto [quot, rem] = divmod(chi, dom);
            if (!rem.empty()) throw AnalysisError("dominant eigenvalues of a final component are not simple");
            chi = quot;
        }
        if (chi.size() <= 1) continue;
        empty = false;
        for (const auto& z : distinct_roots(chi)) {
            bool seen = false;
            for (const auto& w : rep.nondominant_eigenvalues)
                if (std::abs(w - z) < 1e-9 * std::max(1.0, std::abs(z))) seen = true;
            if (!seen) rep.nondominant_eigenvalues.push_back(z);
        }
    }
    std::sort(rep.nondominant_eigenvalues.begin(), rep.nondominant_eigenvalues.end(),
              [](const auto& x, const auto& y) {
                  if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
                  return std::arg(x) < std::arg(y);
              });
    rep.exact_no_error_term = empty;
    rep.second_modulus = rep.nondominant_eigenvalues.empty() ? 0.0 : std::abs(rep.nondominant_eigenvalues.front());
    const double qd_double = qd.get_d();
    if (rep.second_modulus >= qd_double * (1 - 1e-12))
        throw AnalysisError("a non-dominant eigenvalue has modulus q^d within 1e-12; component detection failed");
    if (rep.second_modulus > 0)
        rep.xi = m.d - std::log(rep.second_modulus) / std::log(static_cast<double>(m.q));

    bool equal_a = true, all_b_zero = true;
    for (const auto& c : rep.components) {
        equal_a = equal_a && c.a == rep.components.front().a;
        all_b_zero = all_b_zero && sgn(c.b) == 0;
    }
    if (!equal_a)
        rep.classification = Classification::VarianceThetaLogSquared;
    else if (rep.components.size() == 1 && sgn(rep.v_T) > 0)
        rep.classification = Classification::SingleGaussian;
    else if (all_b_zero)
        rep.classification = Classification::Degenerate;
    else
        rep.classification = Classification::GaussianMixture;

    rep.structure.nondiff_applicable = rep.structure.nondiff_preconditions && !is_integer(rep.e_T);
    return rep;
}

IterativeProjection dominant_projection(const AsymptoticReport& rep, double tol, long long max_iterations) {
    const auto& m = rep.mats;
    const int n = m.size();
    const int p = rep.period();
    const double scale = 1.0 / m.dominant().get_d();
    std::vector<double> x(n, 0.0);
    x[0] = 1;
    auto advance = [&](const std::vector<double>& v) {
        std::vector<double> y(n, 0.0);
        for (int e = 0; e < m.symbols; ++e)
            for (int i = 0; i < n; ++i) y[m.next[e][i]] += v[i] * scale;
        return y;
    };
    IterativeProjection res;
    std::vector<std::vector<double>> block(p), previous;
    for (;;) {
        // block[k] holds x_{mp+k}
        for (int k = 0; k < p; ++k) {
            block[k] = x;
            x = advance(x);
            ++res.iterations;
        }
        if (!previous.empty()) {
            double diff = 0;
            for (int k = 0; k < p; ++k)
                for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(block[k][i] - previous[k][i]));
            if (diff < tol) break;
        }
        if (res.iterations > max_iterations) throw AnalysisError("power iteration did not converge");
        previous = block;
    }
    // Align so that block[k] corresponds to length congruent k mod p.
    res.w.assign(p, std::vector<std::complex<double>>(n));
    const double two_pi = 2 * std::acos(-1.0);
    const long long base = res.iterations - p;  // length of block[0]
    for (int l = 0; l < p; ++l)
        for (int k = 0; k < p; ++k) {
            const long long len = base + k;
            const std::complex<double> w = std::polar(1.0, -two_pi * static_cast<double>((l * len) % p) / p);
            for (int i = 0; i < n; ++i) res.w[l][i] += w * block[k][i] / static_cast<double>(p);
        }
    return res;
}

bool steady_state_identity_check(const AsymptoticReport& rep, double tol) {
    const auto it = dominant_projection(rep);
    double lhs = 0;
    for (int i = 0; i < rep.mats.size(); ++i) lhs += it.w[0][i].real() * rep.mats.delta[i].get_d();
    lhs /= rep.mats.dominant().get_d();
    return std::abs(lhs - rep.e_T.get_d()) < tol;
}

std::complex<double> projection_derivative_term(const AsymptoticReport& rep, long long l) {
    using C = std::complex<double>;
    const auto& m = rep.mats;
    const int n = m.size();
    const long long p = rep.period();
    const C omega = std::polar(1.0, 2 * std::acos(-1.0) * static_cast<double>(((l % p) + p) % p) / p);
    const double qd = m.dominant().get_d();

    // P_l = sum_j h_{j} v_j^T for the components carrying the eigenvalue q^d omega.
    std::vector<std::vector<C>> pl(n, std::vector<C>(n));
    for (const auto& comp : rep.components) {
        const long long pj = comp.period;
        if ((l * pj) % p != 0) continue;
        const long long mm = l * pj / p;
        auto zeta = [&](long long k) { return root_of_unity<double>(mm * k, pj); };
        for (int i = 0; i < n; ++i) {
            C h = 0;
            for (long long r = 0; r < pj; ++r) h += zeta(r) * comp.phase_hits[i][r].get_d();
            if (h == C(0)) continue;
            for (int s : comp.states) pl[i][s] += h * zeta(-comp.cyclic_class[s]) * comp.stationary[s].get_d();
        }
    }
    // (M - q^d omega I - q^d omega P_l) y = 1 gives y = S_l 1 with P_l y = 0.
    std::vector<std::vector<C>> a(n, std::vector<C>(n));
    for (int e = 0; e < m.symbols; ++e)
        for (int i = 0; i < n; ++i) a[i][m.next[e][i]] += 1.0;
    for (int i = 0; i < n; ++i) {
        a[i][i] -= qd * omega;
        for (int j = 0; j < n; ++j) a[i][j] -= qd * omega * pl[i][j];
    }
    std::vector<C> y = solve_dense(a, std::vector<C>(n, C(1)));
    // i w_l'^T 1 = w_l Delta y with w_l = e_1^T P_l.
    C total = 0;
    for (int i = 0; i < n; ++i) {
        C row = 0;
        for (int e = 0; e < m.symbols; ++e) row += m.out[e][i].get_d() * y[m.next[e][i]];
        total += pl[0][i] * row;
    }
    return total;
}

}  // namespace digitflux
