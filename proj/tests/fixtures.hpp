#pragma once

// Random linear Nambu fixtures built from normal forms.

#include <random>

#include "nambu/linclass.hpp"
#include "support.hpp"

namespace nambu::testing {

inline std::vector<int> random_signs(std::mt19937_64& rng, int count) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> out;
  for (int i = 0; i < count; ++i) out.push_back(coin(rng) ? 1 : -1);
  return out;
}

inline NormalForm random_type1(std::mt19937_64& rng, int n, int q) {
  int p = n - q;
  int r = std::uniform_int_distribution<int>(-1, q)(rng);
  int s = std::uniform_int_distribution<int>(0, std::min(p - 1, q - r))(rng);
  return type1_normal_form(n, q, r, s, random_signs(rng, r + 1));
}

// Type 1 forms are closed while d of a Type 2 form is trace(M) times a
// volume, so a nonzero trace keeps the two tags apart.
inline NormalForm random_type2(std::mt19937_64& rng, int n, int q) {
  while (true) {
    RatMatrix m = random_matrix(rng, n - q + 1, n - q + 1);
    if (trace(m) != 0) return type2_normal_form(n, q, m);
  }
}

inline NormalForm random_normal_form(std::mt19937_64& rng, int n, int q) {
  return std::bernoulli_distribution(0.5)(rng) ? random_type1(rng, n, q) : random_type2(rng, n, q);
}

// Pullback of w along a random invertible linear map.
inline DiffForm random_linear_image(std::mt19937_64& rng, const DiffForm& w) {
  return pullback_form(w, FormalMap::linear(random_invertible(rng, w.nvars(), 2)), kExact);
}

// True when the eigenvalue multiset b equals c * a for one nonzero scalar c.
inline bool eigen_proportional(const EigenData& a, const EigenData& b, double tol = 1e-6) {
  auto la = a.all_numeric();
  auto lb = b.all_numeric();
  if (la.size() != lb.size()) return false;
  std::size_t pivot = 0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (std::abs(la[i]) > std::abs(la[pivot])) pivot = i;
  }
  auto matches = [&](std::complex<double> c) {
    std::vector<bool> used(lb.size(), false);
    for (const auto& x : la) {
      bool found = false;
      for (std::size_t j = 0; j < lb.size(); ++j) {
        if (!used[j] && std::abs(c * x - lb[j]) <= tol * (1.0 + std::abs(lb[j]))) {
          used[j] = found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  };
  if (la.empty() || std::abs(la[pivot]) <= tol) return matches(1.0);
  for (const auto& y : lb) {
    if (std::abs(y) > tol && matches(y / la[pivot])) return true;
  }
  return false;
}

}  // namespace nambu::testing
