#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "nambu/field.hpp"
#include "nambu/formal_map.hpp"
#include "nambu/linclass.hpp"

namespace nambu {

// One exact linear solve inside a degree-by-degree induction.
struct GradedSolveRecord {
  std::string stage;
  int degree = 0;
  int unknowns = 0;
  int equations = 0;
  int rank = 0;
  bool solved = false;
};

struct GradedSolveReport {
  std::vector<GradedSolveRecord> records;
  void append(const GradedSolveReport& other);
};

// ---------------------------------------------------------------------------
// Division by a 1-form

struct Division {
  DiffForm theta;
  GradedSolveReport report;
};

// theta with beta = alpha ^ theta through degree max_degree. theta only uses
// dx_i for i in `vars` (0-based); the remaining variables act as parameters.
// Throws SolveError naming the first degree whose system is inconsistent.
Division derham_divide(const DiffForm& alpha, const DiffForm& beta, const std::vector<int>& vars, int max_degree);

// ---------------------------------------------------------------------------
// Type 1

struct Decomposition {
  std::vector<DiffForm> gammas;  // p - 1 one-forms, nonzero at the origin
  DiffForm alpha;                // one-form vanishing at the origin
  GradedSolveReport report;
};

// w = gamma_1 ^ ... ^ gamma_{p-1} ^ alpha through degree N. The linear part
// must classify as Type 1; each division must succeed.
Decomposition formal_decompose_type1(const DiffForm& w, int max_degree);

struct Type1Linearization {
  // Substitution x -> map(x): pullback_form(w, map, N) = multiplier * linear_form.
  FormalMap map;
  Poly multiplier;  // known through degree N - 1
  NormalForm normal_form;
  GradedSolveReport report;
};

Type1Linearization formal_linearize_type1(const DiffForm& w, int max_degree);

struct MultiplierRemoval {
  // Change x' = map(x) with map_* (f P1) = P1 through degree N (or
  // |f(0)| * P1 when the scaling root is irrational, see below).
  FormalMap map;
  bool exact_scale = true;
  Rational constant = 1;     // f(0)
  std::string root;          // required scaling when not exact, e.g. "(2)^(-1/2)"
  double numeric_scale = 1;  // floating value of that root
  std::vector<Multivector> fields;  // per-degree X with L_X P1 = f^(r) P1
  std::vector<Poly> targets;        // the matching f^(r)
  GradedSolveReport report;
};

// P1 = nf.tensor must be a nondegenerate Type 1 normal form.
MultiplierRemoval remove_multiplier(const Poly& f, const NormalForm& nf, int max_degree);

struct TensorLinearization {
  FormalMap map;  // x' = map(x), pushforward of the input equals result through degree N
  Multivector result;
  Multivector linear;  // target normal form
  Poly multiplier;     // result = multiplier * linear (1 unless the scaling root is irrational)
  NormalForm normal_form;
  GradedSolveReport report;
};

// Full Type 1 pipeline for a tensor: linearize its dual form up to a
// multiplier, then remove the multiplier.
TensorLinearization linearize_type1_tensor(const Multivector& p, int max_degree);

// ---------------------------------------------------------------------------
// Type 2

struct Prelinearization {
  FormalMap map;                    // x' = map(x)
  Poly multiplier;                  // f
  std::vector<Multivector> frame;   // V_i: images of d/dx'_i in the old coordinates
  Multivector field;                // X, coefficients free of x'_1..x'_{q-1}
  Multivector tensor;               // pushforward of the input, = f d1^...^d_{q-1}^X
  NormalForm normal_form;
  GradedSolveReport report;
};

Prelinearization prelinearize_type2(const Multivector& p, int max_degree);

struct Resonance {
  int index = 0;       // 1-based i with lambda_i = sum m_j lambda_j
  std::vector<int> m;
};

struct BryunoRow {
  int order = 0;
  double min_divisor = 0;
  double bound = 0;  // C exp(-order^(1 - eps))
  bool holds = false;
};

struct ResonanceReport {
  std::vector<std::complex<double>> eigenvalues;
  bool exact = false;  // every eigenvalue rational, resonances decided exactly
  int max_order = 0;
  double tol = 0;
  double c = 1;
  double eps = 0.5;
  std::vector<Resonance> resonances;
  std::vector<BryunoRow> orders;  // one row per order 2..max_order
};

// Eigenvalues come in diagonal order for triangular matrices, otherwise
// rational ones first (ascending) followed by the numeric ones.
ResonanceReport resonance_report(const RatMatrix& b, int max_order, double tol = 1e-9, double c = 1.0,
                                 double eps = 0.5);

class ResonanceError : public std::runtime_error {
 public:
  explicit ResonanceError(ResonanceReport r)
      : std::runtime_error("resonant linear part"), report_(std::move(r)) {}
  const ResonanceReport& report() const { return report_; }

 private:
  ResonanceReport report_;
};

struct PoincareLinearization {
  FormalMap map;  // x' = map(x), pushforward of X equals its linear part through degree N
  RatMatrix linear;  // Jacobian matrix B of the linear part, X_j = sum_i B(j,i) x_i
  ResonanceReport resonance;
  GradedSolveReport report;
};

PoincareLinearization poincare_linearize(const Multivector& x, int max_degree, double tol = 1e-9);

struct Type2Linearization {
  FormalMap map;
  Poly multiplier;     // result = multiplier * linear through degree N
  Multivector result;
  Multivector linear;
  Prelinearization pre;
  PoincareLinearization poincare;
};

// prelinearize_type2 followed by poincare_linearize on the reduced field.
Type2Linearization linearize_type2(const Multivector& p, int max_degree, double tol = 1e-9);

}  // namespace nambu
