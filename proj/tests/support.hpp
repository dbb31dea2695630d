#pragma once

// Seeded random generators shared by the test binaries.

#include <random>

#include "nambu/field.hpp"
#include "nambu/formal_map.hpp"
#include "nambu/matrix.hpp"
#include "nambu/poly.hpp"

namespace nambu::testing {

inline Rational random_rational(std::mt19937_64& rng, int num_bound = 5, int den_bound = 3) {
  std::uniform_int_distribution<int> num(-num_bound, num_bound);
  std::uniform_int_distribution<int> den(1, den_bound);
  return make_rational(num(rng), den(rng));
}

inline Rational random_nonzero_rational(std::mt19937_64& rng, int num_bound = 5, int den_bound = 3) {
  Rational r;
  do {
    r = random_rational(rng, num_bound, den_bound);
  } while (r == 0);
  return r;
}

// Random polynomial with up to `terms` terms of total degree in [min_deg, max_deg].
inline Poly random_poly(std::mt19937_64& rng, int nvars, int max_deg, int terms = 4, int min_deg = 0) {
  Poly p(nvars);
  std::uniform_int_distribution<int> deg(min_deg, max_deg);
  std::uniform_int_distribution<int> var(0, nvars - 1);
  for (int t = 0; t < terms; ++t) {
    Monomial m(nvars);
    int d = deg(rng);
    for (int k = 0; k < d; ++k) {
      int v = var(rng);
      m.set(v, m[v] + 1);
    }
    p.add_term(m, random_rational(rng));
  }
  return p;
}

inline RatMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, int num_bound = 3) {
  RatMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = random_rational(rng, num_bound, 2);
  }
  return m;
}

inline RatMatrix random_invertible(std::mt19937_64& rng, int n, int num_bound = 3) {
  while (true) {
    RatMatrix m = random_matrix(rng, n, n, num_bound);
    if (det(m) != 0) return m;
  }
}

template <Kind K>
Field<K> random_field(std::mt19937_64& rng, int nvars, int grade, int max_deg, int comps = 3, int terms = 3,
                      int min_deg = 0) {
  Field<K> f(nvars, grade);
  auto keys = subsets_of_size(nvars, grade);
  std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
  for (int c = 0; c < comps; ++c) f.add(keys[pick(rng)], random_poly(rng, nvars, max_deg, terms, min_deg));
  return f;
}

inline Poly P(const char* text, int n) { return Poly::parse(text, n); }

// Basis form / multivector on 1-based indices.
inline DiffForm dx(int n, std::vector<int> one_based, const Poly& c) {
  for (int& i : one_based) --i;
  return DiffForm::basis(n, one_based, c);
}
inline DiffForm dx(int n, std::vector<int> one_based) { return dx(n, std::move(one_based), Poly::constant(n, 1)); }
inline Multivector dd(int n, std::vector<int> one_based, const Poly& c) {
  for (int& i : one_based) --i;
  return Multivector::basis(n, one_based, c);
}
inline Multivector dd(int n, std::vector<int> one_based) {
  return dd(n, std::move(one_based), Poly::constant(n, 1));
}

// Identity plus random terms of degree 2..max_deg.
inline FormalMap random_near_identity(std::mt19937_64& rng, int n, int max_deg, int trunc, int terms = 2) {
  std::vector<Poly> c;
  for (int i = 0; i < n; ++i) c.push_back(Poly::variable(n, i) + random_poly(rng, n, max_deg, terms, 2));
  return FormalMap(std::move(c), trunc);
}

// Random invertible linear part plus random higher terms.
inline FormalMap random_map(std::mt19937_64& rng, int n, int max_deg, int trunc, int terms = 2) {
  FormalMap l = FormalMap::linear(random_invertible(rng, n, 2));
  std::vector<Poly> c;
  for (int i = 0; i < n; ++i) c.push_back(l.component(i) + random_poly(rng, n, max_deg, terms, 2));
  return FormalMap(std::move(c), trunc);
}

}  // namespace nambu::testing
