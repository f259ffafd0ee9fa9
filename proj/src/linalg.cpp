#include "digitflux/linalg.hpp"

#include "digitflux/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace digitflux {

QMatrix zero_matrix(std::size_t rows, std::size_t cols) { return QMatrix(rows, QVector(cols, Rational(0))); }

QMatrix identity_matrix(std::size_t n) {
    QMatrix m = zero_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

QVector operator*(const QMatrix& a, const QVector& x) {
    QVector y(a.size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (sgn(a[i][j]) != 0) y[i] += a[i][j] * x[j];
    return y;
}

QVector operator*(const QVector& x, const QMatrix& a) {
    QVector y(a.empty() ? 0 : a[0].size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(x[i]) == 0) continue;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (sgn(a[i][j]) != 0) y[j] += x[i] * a[i][j];
    }
    return y;
}

QMatrix operator*(const QMatrix& a, const QMatrix& b) {
    const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size();
    QMatrix c = zero_matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (sgn(a[i][k]) == 0) continue;
            for (std::size_t j = 0; j < m; ++j)
                if (sgn(b[k][j]) != 0) c[i][j] += a[i][k] * b[k][j];
        }
    return c;
}

Rational dot(const QVector& a, const QVector& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

QMatrix solve(QMatrix a, QMatrix b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("dimension mismatch in solve");
    const std::size_t m = n == 0 ? 0 : b[0].size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && sgn(a[pivot][col]) == 0) ++pivot;
        if (pivot == n) throw std::domain_error("singular linear system");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        const Rational inv = 1 / a[col][col];
        for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
        for (std::size_t j = 0; j < m; ++j) b[col][j] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || sgn(a[i][col]) == 0) continue;
            const Rational f = a[i][col];
            for (std::size_t j = col; j < n; ++j)
                if (sgn(a[col][j]) != 0) a[i][j] -= f * a[col][j];
            for (std::size_t j = 0; j < m; ++j)
                if (sgn(b[col][j]) != 0) b[i][j] -= f * b[col][j];
        }
    }
    return b;
}

QVector solve(QMatrix a, QVector b) {
    QMatrix rhs(b.size(), QVector(1));
    for (std::size_t i = 0; i < b.size(); ++i) rhs[i][0] = std::move(b[i]);
    QMatrix x = solve(std::move(a), std::move(rhs));
    QVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::move(x[i][0]);
    return out;
}

void trim(QPoly& p) {
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

QPoly derivative(const QPoly& p) {
    QPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
    trim(d);
    return d;
}

std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b) {
    QPoly r = a, bb = b;
    trim(r);
    trim(bb);
    if (bb.empty()) throw std::domain_error("polynomial division by zero");
    if (r.size() < bb.size()) return {QPoly{}, r};
    QPoly quot(r.size() - bb.size() + 1, Rational(0));
    const Rational lead = bb.back();
    for (std::size_t k = quot.size(); k-- > 0;) {
        const Rational c = r[k + bb.size() - 1] / lead;
        quot[k] = c;
        if (sgn(c) == 0) continue;
        for (std::size_t j = 0; j < bb.size(); ++j) r[k + j] -= c * bb[j];
    }
    r.resize(bb.size() - 1);
    trim(r);
    trim(quot);
    return {quot, r};
}

QPoly poly_gcd(QPoly a, QPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        QPoly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (a.empty()) return a;
    const Rational lead = a.back();
    for (auto& c : a) c /= lead;
    return a;
}

QPoly squarefree_part(const QPoly& p) {
    QPoly g = poly_gcd(p, derivative(p));
    QPoly s = divmod(p, g).first;
    const Rational lead = s.back();
    for (auto& c : s) c /= lead;
    return s;
}

QPoly characteristic_polynomial(QMatrix h) {
    const std::size_t n = h.size();
    // Reduce to upper Hessenberg form by similarity transformations.
    for (std::size_t k = 0; k + 2 < n; ++k) {
        std::size_t pivot = k + 1;
        while (pivot < n && sgn(h[pivot][k]) == 0) ++pivot;
        if (pivot == n) continue;
        if (pivot != k + 1) {
            std::swap(h[pivot], h[k + 1]);
            for (auto& row : h) std::swap(row[pivot], row[k + 1]);
        }
        for (std::size_t i = k + 2; i < n; ++i) {
            if (sgn(h[i][k]) == 0) continue;
            const Rational f = h[i][k] / h[k + 1][k];
            for (std::size_t j = 0; j < n; ++j) h[i][j] -= f * h[k + 1][j];
            for (std::size_t r = 0; r < n; ++r) h[r][k + 1] += f * h[r][i];
        }
    }
    // p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_im (prod_{k=i+1..m} h_{k,k-1}) p_{i-1}
    std::vector<QPoly> p(n + 1);
    p[0] = {Rational(1)};
    for (std::size_t m = 1; m <= n; ++m) {
        QPoly cur(m + 1, Rational(0));
        for (std::size_t i = 0; i < p[m - 1].size(); ++i) {
            cur[i + 1] += p[m - 1][i];
            cur[i] -= h[m - 1][m - 1] * p[m - 1][i];
        }
        Rational prod = 1;
        for (std::size_t i = m - 1; i-- > 0;) {
            prod *= h[i + 1][i];
            if (sgn(prod) == 0) break;
            const Rational f = h[i][m - 1] * prod;
            if (sgn(f) == 0) continue;
            for (std::size_t j = 0; j < p[i].size(); ++j) cur[j] -= f * p[i][j];
        }
        trim(cur);
        p[m] = std::move(cur);
    }
    return p[n];
}

namespace {

template <class C, class Coeffs>
std::pair<C, C> horner(const Coeffs& c, const C& z) {
    C val = c.back(), der = 0;
    for (std::size_t i = c.size() - 1; i-- > 0;) {
        der = der * z + val;
        val = val * z + c[i];
    }
    return {val, der};
}

}  // namespace

std::vector<std::complex<double>> distinct_roots(const QPoly& poly) {
    QPoly p = squarefree_part(poly);
    const std::size_t deg = p.size() - 1;
    if (deg == 0) return {};
    using LD = long double;
    using CL = std::complex<LD>;
    std::vector<LD> c(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = static_cast<LD>(p[i].get_d());

    // Cauchy bound for the initial circle.
    LD bound = 0;
    for (std::size_t i = 0; i < deg; ++i) bound = std::max(bound, std::abs(c[i] / c[deg]));
    const LD radius = 1 + bound;
    std::vector<CL> z(deg);
    for (std::size_t k = 0; k < deg; ++k) {
        const LD angle = 2 * 3.14159265358979323846L * (static_cast<LD>(k) + 0.25L) / static_cast<LD>(deg);
        z[k] = std::polar(radius * 0.5L, angle);
    }
    for (int iter = 0; iter < 1000; ++iter) {
        LD change = 0;
        for (std::size_t k = 0; k < deg; ++k) {
            auto [val, der] = horner(c, z[k]);
            if (val == CL(0)) continue;
            const CL ratio = val / der;
            CL repulsion = 0;
            for (std::size_t j = 0; j < deg; ++j)
                if (j != k) repulsion += CL(1) / (z[k] - z[j]);
            const CL step = ratio / (CL(1) - ratio * repulsion);
            z[k] -= step;
            change = std::max(change, std::abs(step) / std::max<LD>(1, std::abs(z[k])));
        }
        if (change < 1e-18L) break;
    }

    // Newton polishing at 40 digits on the exact coefficients.
    using C40 = ComplexT<Real40>;
    std::vector<Real40> c40(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) c40[i] = to_real<Real40>(p[i]);
    std::vector<std::complex<double>> roots;
    for (const CL& guess : z) {
        C40 x(Real40(static_cast<double>(guess.real())), Real40(static_cast<double>(guess.imag())));
        for (int it = 0; it < 8; ++it) {
            auto [val, der] = horner(c40, x);
            if (val == C40(0) || der == C40(0)) break;
            x -= val / der;
        }
        roots.push_back(to_complex_double(x));
    }
    return roots;
}

}  // namespace digitflux
