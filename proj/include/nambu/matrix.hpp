#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nambu/rational.hpp"
#include "nambu/upoly.hpp"

namespace nambu {

using RatVector = std::vector<Rational>;

// Dense rectangular matrix over Q.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(int rows, int cols);
  static RatMatrix identity(int n);
  static RatMatrix from_rows(const std::vector<RatVector>& rows);
  static RatMatrix diagonal(const RatVector& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool is_symmetric() const;

  Rational& operator()(int i, int j) { return data_[index(i, j)]; }
  const Rational& operator()(int i, int j) const { return data_[index(i, j)]; }
  RatVector row(int i) const;
  RatVector col(int j) const;

  RatMatrix transpose() const;
  RatVector apply(const RatVector& v) const;

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator+(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator-(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator*(const Rational& c, const RatMatrix& a);
  bool operator==(const RatMatrix& other) const = default;

  std::string to_string() const;  // "[[1,0],[0,1]]"

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> data_;
};

int rank(const RatMatrix& m);
Rational det(const RatMatrix& m);
std::optional<RatMatrix> inverse(const RatMatrix& m);
Rational trace(const RatMatrix& m);
// Basis of {v : m v = 0}, one vector per free column.
std::vector<RatVector> kernel(const RatMatrix& m);
// Reduced row echelon basis of the row space (nonzero rows only).
std::vector<RatVector> row_space_basis(const RatMatrix& m);

struct RowReduction {
  RatMatrix echelon;        // reduced row echelon form E = R * M
  RatMatrix transform;      // invertible R
  std::vector<int> pivots;  // pivot column of each nonzero row of E
};
RowReduction row_reduce(const RatMatrix& m);

// Sparse exact linear system assembled row by row. Rows are reduced against
// the pivots stored so far as soon as they arrive, so inconsistency is
// detected eagerly and memory stays proportional to the rank.
class SparseSystem {
 public:
  using Row = std::map<int, Rational>;

  explicit SparseSystem(int ncols, bool track_witness = false);

  // Returns false if this row made the system inconsistent.
  bool add_row(Row coeffs, Rational rhs);
  bool consistent() const { return consistent_; }
  int ncols() const { return ncols_; }
  int rank() const { return static_cast<int>(pivots_.size()); }
  int rows_added() const { return rows_added_; }

  // Particular solution with every free variable set to zero.
  RatVector solve() const;
  std::vector<RatVector> kernel() const;
  // Coefficients y over the added rows with y^T M = 0 and y^T b != 0.
  const Row& witness() const { return witness_; }

 private:
  struct Pivot {
    Row coeffs;  // leading coefficient normalized to 1
    Rational rhs;
    Row combo;  // combination of original rows that produced this pivot
  };
  void back_substitute(RatVector& x) const;

  int ncols_;
  bool track_;
  bool consistent_ = true;
  int rows_added_ = 0;
  std::map<int, Pivot> pivots_;
  Row witness_;
};

struct LinearSolution {
  bool consistent = false;
  RatVector solution;             // valid when consistent
  std::vector<RatVector> kernel;  // valid when consistent
  RatVector witness;              // valid when inconsistent: y^T M = 0, y^T b != 0
};

LinearSolution solve_linear(const RatMatrix& m, const RatVector& b);

struct Inertia {
  int n_plus = 0;
  int n_zero = 0;
  int n_minus = 0;
  RatMatrix congruence;  // C with C^T S C = diag(diagonal)
  RatVector diagonal;
};

Inertia inertia(const RatMatrix& s);

struct EigenData {
  UPoly char_poly;                                    // det(t I - M), monic
  std::vector<std::pair<Rational, int>> rational;     // eigenvalue, multiplicity
  std::vector<std::complex<double>> numeric;          // remaining roots, repeated by multiplicity
  bool all_rational() const { return numeric.empty(); }
  // Every eigenvalue as a complex double, repeated by multiplicity.
  std::vector<std::complex<double>> all_numeric() const;
};

UPoly characteristic_polynomial(const RatMatrix& m);
EigenData eigen_data(const RatMatrix& m, double tol = 1e-9);

struct JordanBlock {
  Rational eigenvalue;
  int size;
};

// Jordan structure when every eigenvalue is rational, blocks ordered by
// eigenvalue then by decreasing size; nullopt otherwise.
std::optional<std::vector<JordanBlock>> rational_jordan(const RatMatrix& m, double tol = 1e-9);

}  // namespace nambu
