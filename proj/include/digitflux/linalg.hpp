#pragma once

#include "digitflux/rational.hpp"

#include <complex>
#include <vector>

namespace digitflux {

using QVector = std::vector<Rational>;
using QMatrix = std::vector<QVector>;  // row-major

QMatrix zero_matrix(std::size_t rows, std::size_t cols);
QMatrix identity_matrix(std::size_t n);
QVector operator*(const QMatrix& a, const QVector& x);
QVector operator*(const QVector& x, const QMatrix& a);  // row vector times matrix
QMatrix operator*(const QMatrix& a, const QMatrix& b);
Rational dot(const QVector& a, const QVector& b);

// Solves A x = b by Gaussian elimination. Throws std::domain_error when A is singular.
QVector solve(QMatrix a, QVector b);
// Same, several right-hand sides given as the columns of B.
QMatrix solve(QMatrix a, QMatrix b);

// Polynomials over Q, coefficient of x^i at index i, no trailing zeros.
using QPoly = std::vector<Rational>;

void trim(QPoly& p);
QPoly derivative(const QPoly& p);
// Quotient and remainder; throws std::domain_error on division by zero.
std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b);
QPoly poly_gcd(QPoly a, QPoly b);  // monic
QPoly squarefree_part(const QPoly& p);

// det(x I - A), computed through an exact Hessenberg reduction.
QPoly characteristic_polynomial(QMatrix a);

// Distinct complex roots of p (degree >= 1); Aberth iteration then Newton polishing.
std::vector<std::complex<double>> distinct_roots(const QPoly& p);

}  // namespace digitflux
