#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nambu/poly.hpp"

namespace nambu {

// Strictly increasing index tuple stored as a bitmask; bit i is the 0-based
// variable index i.
using IndexSet = std::uint64_t;

inline int set_size(IndexSet s) { return std::popcount(s); }
inline bool set_contains(IndexSet s, int i) { return (s >> i) & 1U; }
inline int count_below(IndexSet s, int i) { return std::popcount(s & ((IndexSet{1} << i) - 1)); }
IndexSet index_set(const std::vector<int>& zero_based);
std::vector<int> set_indices(IndexSet s);  // ascending, 0-based
IndexSet full_set(int n);

// Lexicographic order on equal-size tuples: the smaller tuple is the one
// holding the lowest index where the two differ.
struct TupleLess {
  bool operator()(IndexSet a, IndexSet b) const {
    IndexSet d = a ^ b;
    if (d == 0) return false;
    if (set_size(a) != set_size(b)) return set_size(a) < set_size(b);
    return (a & (d & (~d + 1))) != 0;
  }
};

// All k-subsets of {0..n-1} in TupleLess order.
std::vector<IndexSet> subsets_of_size(int n, int k);

enum class Kind { Vector, Form };

// Grade-k antisymmetric field with Poly coefficients: a multivector
// sum P_I d/dx_I or a differential form sum P_I dx_I. Zero coefficients are
// never stored; grade 0 uses the empty key.
template <Kind K>
class Field {
 public:
  using Comps = std::map<IndexSet, Poly, TupleLess>;

  Field() = default;
  Field(int nvars, int grade);
  // Coefficient times the basis element on `zero_based` indices, given in any
  // order; the permutation sign is applied and repeated indices give zero.
  static Field basis(int nvars, const std::vector<int>& zero_based, const Poly& coeff);
  static Field basis(int nvars, const std::vector<int>& zero_based);
  static Field scalar(const Poly& p);

  int nvars() const { return nvars_; }
  int grade() const { return grade_; }
  const Comps& comps() const { return comps_; }
  bool is_zero() const { return comps_.empty(); }
  Poly coeff(IndexSet key) const;
  void add(IndexSet key, const Poly& p);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(const Poly& p);
  Field& operator*=(const Rational& c);
  Field operator-() const;
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(const Poly& p, Field a) { return a *= p; }
  friend Field operator*(const Rational& c, Field a) { return a *= c; }
  bool operator==(const Field& o) const = default;

  // Coefficient-wise operations.
  Field truncated(int max_degree) const;
  Field homogeneous_component(int degree) const;
  Field mul_trunc(const Poly& p, int max_degree) const;
  int degree() const;      // max coefficient degree, kZeroDegree for 0
  int low_degree() const;  // min coefficient degree, kZeroDegree for 0

  // "x1*dx1^dx2 - dx3^dx4" for forms, "x4*d1^d2 + ..." for multivectors.
  std::string to_string() const;

 private:
  void check_compatible(const Field& o) const;

  int nvars_ = 0;
  int grade_ = 0;
  Comps comps_;
};

using Multivector = Field<Kind::Vector>;
using DiffForm = Field<Kind::Form>;

extern template class Field<Kind::Vector>;
extern template class Field<Kind::Form>;

// Sign of the basis product e_A ^ e_B for disjoint A, B.
int wedge_sign(IndexSet a, IndexSet b);
// Sign of i_{e_A} e_B for A contained in B, with the convention
// i_{e_{i1} ^ ... ^ e_{im}} = i_{e_im} o ... o i_{e_i1}.
int interior_sign(IndexSet a, IndexSet b);

template <Kind K>
Field<K> wedge(const Field<K>& a, const Field<K>& b, int max_degree = kExact);

// Contraction of a field of the opposite kind into `b`.
DiffForm interior(const Multivector& a, const DiffForm& b, int max_degree = kExact);
Multivector interior(const DiffForm& a, const Multivector& b, int max_degree = kExact);

DiffForm dform(const DiffForm& w);
DiffForm differential(const Poly& f);
// X(f) = sum X_i df/dx_i for a vector field X.
Poly apply_vector_field(const Multivector& x, const Poly& f, int max_degree = kExact);
Multivector lie_bracket(const Multivector& x, const Multivector& y);
// L_X of a multivector field (Schouten bracket [X, P]).
Multivector lie_derivative(const Multivector& x, const Multivector& p);
// L_X w = i_X dw + d i_X w.
DiffForm lie_derivative(const Multivector& x, const DiffForm& w);

// Volume forms f dx1^...^dxn with f(0) != 0.
DiffForm standard_volume(int n);
// Returns f; throws PreconditionError unless vol is such a volume form.
Poly volume_multiplier(const DiffForm& vol);

DiffForm tensor_to_form(const Multivector& p, const DiffForm& vol);
// Inverse of tensor_to_form. With a non-constant multiplier the division is
// exact when max_degree is kExact, and a truncated series division otherwise.
Multivector form_to_tensor(const DiffForm& w, const DiffForm& vol, int max_degree = kExact);

}  // namespace nambu
