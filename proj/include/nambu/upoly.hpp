#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nambu/rational.hpp"

namespace nambu {

// Dense univariate polynomial over Q, coefficients stored lowest degree
// first. The zero polynomial is the empty vector; trailing zeros are trimmed
// by every operation below.
using UPoly = std::vector<Rational>;

void trim(UPoly& p);
int degree(const UPoly& p);  // -1 for zero
Rational eval(const UPoly& p, const Rational& t);
std::complex<double> eval(const UPoly& p, std::complex<double> t);
UPoly derivative(const UPoly& p);
UPoly multiply(const UPoly& a, const UPoly& b);
UPoly subtract(const UPoly& a, const UPoly& b);
// Euclidean division a = q*b + r with deg r < deg b.
void divmod(const UPoly& a, const UPoly& b, UPoly& q, UPoly& r);
UPoly monic(const UPoly& p);
UPoly gcd(UPoly a, UPoly b);

// Square-free decomposition p = c * prod_i f_i^i (Yun). Entry i-1 holds the
// monic factor f_i (possibly the constant 1).
std::vector<UPoly> squarefree_decomposition(const UPoly& p);

// All complex roots of a square-free polynomial (Aberth iteration followed by
// Newton polishing until the step drops below tol).
std::vector<std::complex<double>> numeric_roots(const UPoly& p, double tol);

// "t^2 - 2" style, highest degree first.
std::string upoly_to_string(const UPoly& p, const std::string& var = "t");

}  // namespace nambu
