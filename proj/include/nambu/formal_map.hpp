#pragma once

#include <unordered_map>
#include <vector>

#include "nambu/field.hpp"
#include "nambu/matrix.hpp"
#include "nambu/poly.hpp"

namespace nambu {

// Polynomial coordinate change x' = Phi(x) fixing the origin, known through
// degree trunc() (kExact for maps given exactly, e.g. linear ones).
class FormalMap {
 public:
  FormalMap() = default;
  FormalMap(std::vector<Poly> components, int trunc);

  static FormalMap identity(int n, int trunc = kExact);
  // x'_i = sum_j L(i, j) x_j, exact.
  static FormalMap linear(const RatMatrix& l);

  int nvars() const { return static_cast<int>(comps_.size()); }
  int trunc() const { return trunc_; }
  const std::vector<Poly>& components() const { return comps_; }
  const Poly& component(int i) const { return comps_[static_cast<std::size_t>(i)]; }

  RatMatrix linear_part() const;
  bool is_linear() const;
  bool operator==(const FormalMap& o) const = default;

  // p(Phi(x)) through degree max_degree.
  Poly substitute(const Poly& p, int max_degree) const;
  // (this o inner)(x) = this(inner(x)) through degree max_degree.
  FormalMap compose(const FormalMap& inner, int max_degree) const;
  FormalMap truncated(int max_degree) const;

 private:
  int trunc_ = kExact;
  std::vector<Poly> comps_;
};

// Memoizing substitution engine x -> Phi(x). Monomial images are cached so
// repeated substitutions into many coefficients share work.
class Substituter {
 public:
  Substituter(const FormalMap& phi, int max_degree);
  Poly operator()(const Poly& p);
  const Poly& monomial_image(const Monomial& m);

 private:
  struct MonoHash {
    std::size_t operator()(const Monomial& m) const;
  };
  const FormalMap& phi_;
  int max_degree_;
  std::unordered_map<Monomial, Poly, MonoHash> cache_;
};

// Psi with Psi o Phi = Phi o Psi = id through degree N. Exact inverse for an
// exact linear map. Throws PreconditionError on a singular linear part.
FormalMap formal_inverse(const FormalMap& phi, int max_degree);

// Phi^* w: substitute x -> Phi(x) in the coefficients and dx_i -> dPhi_i.
// For a form of positive grade the result through degree N depends on Phi
// through degree N+1.
DiffForm pullback_form(const DiffForm& w, const FormalMap& phi, int max_degree);

// Determinant of D Phi through degree N.
Poly jacobian_determinant(const FormalMap& phi, int max_degree);

// Phi_* P expressed in the new coordinates x' = Phi(x), through degree N.
// Realized through volume duality: the pullback of i_P(dx) by the inverse
// map, converted back to a tensor and divided by det D(Phi^{-1}).
Multivector pushforward_tensor(const Multivector& p, const FormalMap& phi, int max_degree);

// Same, given the inverse map psi = Phi^{-1} directly. The result is exact
// through degree N only when psi is known through degree N+1.
Multivector pushforward_by_inverse(const Multivector& p, const FormalMap& psi, int max_degree);

}  // namespace nambu
