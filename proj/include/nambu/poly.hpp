#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nambu/rational.hpp"

namespace nambu {

inline constexpr int kMaxVars = 16;

// Degree reported for the zero polynomial.
inline constexpr int kZeroDegree = std::numeric_limits<int>::min();

// Sentinel truncation degree meaning "keep everything".
inline constexpr int kExact = std::numeric_limits<int>::max();

// Exponent vector x1^e1 * ... * xn^en with n <= kMaxVars.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(int nvars);
  Monomial(int nvars, std::span<const int> exponents);

  static Monomial unit(int nvars, int var);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int operator[](int var) const { return exps_[static_cast<std::size_t>(var)]; }
  void set(int var, int exponent);

  Monomial operator*(const Monomial& other) const;
  bool divides(const Monomial& other) const;
  // Requires divides(other): returns other / *this.
  Monomial quotient_of(const Monomial& other) const;

  bool operator==(const Monomial& other) const = default;

  // Graded-lexicographic order with x1 > x2 > ... > xn.
  friend bool grlex_less(const Monomial& a, const Monomial& b) {
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return a.exps_ < b.exps_;
  }

 private:
  std::array<std::uint8_t, kMaxVars> exps_{};
  std::uint8_t nvars_ = 0;
  std::uint16_t degree_ = 0;
};

struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return grlex_less(a, b); }
};

// All monomials in `nvars` variables of total degree exactly `degree`, in
// ascending graded-lex order.
std::vector<Monomial> monomials_of_degree(int nvars, int degree);

// Multivariate polynomial over Q. Zero coefficients are never stored.
class Poly {
 public:
  using Terms = std::map<Monomial, Rational, GrlexLess>;

  explicit Poly(int nvars = 0);

  static Poly constant(int nvars, const Rational& c);
  static Poly variable(int nvars, int var);
  static Poly term(const Monomial& m, const Rational& c);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  // Smallest total degree among stored terms; kZeroDegree for 0.
  int low_degree() const;
  std::size_t size() const { return terms_.size(); }
  const Terms& terms() const { return terms_; }

  Rational coeff(const Monomial& m) const;
  Rational constant_term() const;
  void add_term(const Monomial& m, const Rational& c);

  Poly& operator+=(const Poly& rhs);
  Poly& operator-=(const Poly& rhs);
  Poly& operator*=(const Poly& rhs);
  Poly& operator*=(const Rational& c);
  Poly operator-() const;

  friend Poly operator+(Poly lhs, const Poly& rhs) { return lhs += rhs; }
  friend Poly operator-(Poly lhs, const Poly& rhs) { return lhs -= rhs; }
  friend Poly operator*(const Poly& lhs, const Poly& rhs) { return lhs.mul_trunc(rhs, kExact); }
  friend Poly operator*(Poly lhs, const Rational& c) { return lhs *= c; }
  friend Poly operator*(const Rational& c, Poly rhs) { return rhs *= c; }
  bool operator==(const Poly& rhs) const;

  // Product with every term of degree > max_degree dropped.
  Poly mul_trunc(const Poly& rhs, int max_degree) const;

  Poly partial(int var) const;
  Poly homogeneous_component(int degree) const;
  Poly truncated(int max_degree) const;
  // Multiply every monomial by m.
  Poly shifted(const Monomial& m) const;

  // Exact division; returns false when `divisor` does not divide *this.
  bool divide_exact(const Poly& divisor, Poly& quotient) const;

  Rational eval(std::span<const Rational> point) const;
  double eval(std::span<const double> point) const;

  // Textual form "3/2*x1^2*x3 - x2 + 1", terms in descending graded-lex order.
  std::string to_string(std::string_view var_prefix = "x") const;
  static Poly parse(std::string_view text, int nvars);

 private:
  void check_same(const Poly& rhs) const;

  int nvars_;
  Terms terms_;
};

// Formal reciprocal 1/p through degree max_degree; p(0) must be nonzero.
Poly reciprocal_series(const Poly& p, int max_degree);

}  // namespace nambu
