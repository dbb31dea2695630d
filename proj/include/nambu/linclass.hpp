#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nambu/field.hpp"
#include "nambu/formal_map.hpp"
#include "nambu/matrix.hpp"
#include "nambu/nambu.hpp"

namespace nambu {

// Thrown when a form handed to the classifier is not co-Nambu.
class NotConambuError : public std::runtime_error {
 public:
  explicit NotConambuError(ConambuWitness w)
      : std::runtime_error("input is not co-Nambu"), witness_(std::move(w)) {}
  const ConambuWitness& witness() const { return witness_; }

 private:
  ConambuWitness witness_;
};

// A linear p-form written as w = sum_j x_j w_j with constant w_j. Entry j
// holds a row basis of E_j = span{ i_A w_j : A constant (p-1)-vector }.
struct SpanTable {
  int nvars = 0;
  int grade = 0;
  std::vector<RatMatrix> spans;  // rows = basis covectors, empty when w_j = 0
  bool is_zero(int j) const { return spans[static_cast<std::size_t>(j)].rows() == 0; }
  int dim(int j) const { return spans[static_cast<std::size_t>(j)].rows(); }
};

bool is_linear_field(const DiffForm& w);
bool is_linear_field(const Multivector& p);

SpanTable span_table(const DiffForm& w);

enum class NormalType { Type1, Type2 };

// Linear normal forms in coordinates x1..xn (1-based in the comments):
//   Type 1: w = dx1^...^dx_{p-1} ^ d[ sum_{j=p}^{p+r} d_j x_j^2 / 2 + sum_{i=1}^{s} x_i x_{p+r+i} ]
//   Type 2: P = d/dx1 ^ ... ^ d/dx_{q-1} ^ Y with Y = sum_{j,i >= q} M(j,i) x_i d/dx_j,
// the Type 2 form being i_P(dx1^...^dxn). Type 1 diagonal entries are
// nonzero rationals; only their signs are invariants.
struct NormalForm {
  NormalType type = NormalType::Type1;
  int n = 0;
  int q = 0;
  int r = -1;
  int s = 0;
  RatVector diag;          // Type 1, r+1 entries
  RatMatrix matrix;        // Type 2, (p+1) x (p+1), Jacobian matrix of Y
  DiffForm form;
  Multivector tensor;      // dual of form under the standard volume
  int p() const { return n - q; }
  std::vector<int> signs() const;
};

NormalForm type1_normal_form(int n, int q, int r, int s, const RatVector& diag);
NormalForm type1_normal_form(int n, int q, int r, int s, const std::vector<int>& signs);
NormalForm type2_normal_form(int n, int q, const RatMatrix& m);

struct ClassificationReport {
  NormalForm normal_form;
  // Normal coordinates v = change(x): pulling normal_form.form back along
  // change reproduces the input exactly.
  FormalMap change;
  std::string route;  // "1a", "1b" or "2": branch of the construction taken
  std::optional<std::array<int, 3>> case2_triple;  // 0-based, Case 2 only

  bool nondegenerate = false;
  // Type 1
  bool elliptic = false;
  int signature = 0;
  int n_plus = 0;
  int n_minus = 0;
  std::optional<std::array<int, 2>> index;  // nondegenerate Type 1, sorted pair
  // Type 2
  EigenData eigen;
  std::optional<std::vector<JordanBlock>> jordan;

  int zero_set_dim = 0;
};

// Classifies a linear co-Nambu form. Throws PreconditionError for nonlinear
// input or q < 3 and NotConambuError when the form fails the co-Nambu test.
ClassificationReport classify_linear(const DiffForm& w, double tol = 1e-9);
ClassificationReport classify_linear_tensor(const Multivector& p, const DiffForm& vol, double tol = 1e-9);

// Fills the nondegeneracy invariants from the normal form.
void fill_invariants(ClassificationReport& report, double tol = 1e-9);

}  // namespace nambu
