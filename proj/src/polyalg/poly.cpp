#include "nambu/poly.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nambu/errors.hpp"

namespace nambu {

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(int nvars) {
  if (nvars < 0 || nvars > kMaxVars) {
    throw std::invalid_argument("variable count " + std::to_string(nvars) + " outside [0, " +
                                std::to_string(kMaxVars) + "]");
  }
  nvars_ = static_cast<std::uint8_t>(nvars);
}

Monomial::Monomial(int nvars, std::span<const int> exponents) : Monomial(nvars) {
  if (static_cast<int>(exponents.size()) != nvars) {
    throw std::invalid_argument("exponent vector length does not match variable count");
  }
  for (int i = 0; i < nvars; ++i) set(i, exponents[static_cast<std::size_t>(i)]);
}

Monomial Monomial::unit(int nvars, int var) {
  Monomial m(nvars);
  m.set(var, 1);
  return m;
}

void Monomial::set(int var, int exponent) {
  if (var < 0 || var >= nvars_) throw std::invalid_argument("variable index out of range");
  if (exponent < 0 || exponent > 255) throw std::invalid_argument("exponent outside [0, 255]");
  auto& slot = exps_[static_cast<std::size_t>(var)];
  degree_ = static_cast<std::uint16_t>(degree_ - slot + exponent);
  slot = static_cast<std::uint8_t>(exponent);
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial r(*this);
  for (int i = 0; i < nvars_; ++i) {
    int e = exps_[static_cast<std::size_t>(i)] + other.exps_[static_cast<std::size_t>(i)];
    if (e > 255) throw std::overflow_error("monomial exponent overflow");
    r.exps_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(e);
  }
  r.degree_ = static_cast<std::uint16_t>(degree_ + other.degree_);
  return r;
}

bool Monomial::divides(const Monomial& other) const {
  for (int i = 0; i < nvars_; ++i) {
    if (exps_[static_cast<std::size_t>(i)] > other.exps_[static_cast<std::size_t>(i)]) return false;
  }
  return true;
}

Monomial Monomial::quotient_of(const Monomial& other) const {
  Monomial r(other);
  for (int i = 0; i < nvars_; ++i) {
    r.exps_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
        other.exps_[static_cast<std::size_t>(i)] - exps_[static_cast<std::size_t>(i)]);
  }
  r.degree_ = static_cast<std::uint16_t>(other.degree_ - degree_);
  return r;
}

std::vector<Monomial> monomials_of_degree(int nvars, int degree) {
  std::vector<Monomial> out;
  if (degree < 0) return out;
  if (nvars == 0) {
    if (degree == 0) out.emplace_back(0);
    return out;
  }
  std::vector<int> e(static_cast<std::size_t>(nvars), 0);
  // Enumerate compositions of `degree` into nvars parts, then sort.
  auto rec = [&](auto&& self, int var, int left) -> void {
    if (var == nvars - 1) {
      e[static_cast<std::size_t>(var)] = left;
      out.emplace_back(nvars, e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[static_cast<std::size_t>(var)] = k;
      self(self, var + 1, left - k);
    }
  };
  rec(rec, 0, degree);
  std::sort(out.begin(), out.end(), GrlexLess{});
  return out;
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(int nvars) : nvars_(nvars) {
  if (nvars < 0 || nvars > kMaxVars) {
    throw std::invalid_argument("variable count " + std::to_string(nvars) + " outside [0, " +
                                std::to_string(kMaxVars) + "]");
  }
}

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  p.add_term(Monomial(nvars), c);
  return p;
}

Poly Poly::variable(int nvars, int var) {
  Poly p(nvars);
  p.add_term(Monomial::unit(nvars, var), 1);
  return p;
}

Poly Poly::term(const Monomial& m, const Rational& c) {
  Poly p(m.nvars());
  p.add_term(m, c);
  return p;
}

int Poly::degree() const { return terms_.empty() ? kZeroDegree : terms_.rbegin()->first.degree(); }

int Poly::low_degree() const { return terms_.empty() ? kZeroDegree : terms_.begin()->first.degree(); }

Rational Poly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

Rational Poly::constant_term() const { return coeff(Monomial(nvars_)); }

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (m.nvars() != nvars_) throw std::invalid_argument("monomial variable count mismatch");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void Poly::check_same(const Poly& rhs) const {
  if (rhs.nvars_ != nvars_) {
    throw std::invalid_argument("polynomial variable count mismatch (" + std::to_string(nvars_) + " vs " +
                                std::to_string(rhs.nvars_) + ")");
  }
}

Poly& Poly::operator+=(const Poly& rhs) {
  check_same(rhs);
  for (const auto& [m, c] : rhs.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
  check_same(rhs);
  for (const auto& [m, c] : rhs.terms_) add_term(m, -c);
  return *this;
}

Poly& Poly::operator*=(const Poly& rhs) {
  *this = mul_trunc(rhs, kExact);
  return *this;
}

Poly& Poly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Poly Poly::operator-() const {
  Poly r(*this);
  for (auto& [m, v] : r.terms_) v = -v;
  return r;
}

bool Poly::operator==(const Poly& rhs) const { return nvars_ == rhs.nvars_ && terms_ == rhs.terms_; }

Poly Poly::mul_trunc(const Poly& rhs, int max_degree) const {
  check_same(rhs);
  Poly out(nvars_);
  if (terms_.empty() || rhs.terms_.empty()) return out;
  Rational prod;
  for (const auto& [ma, ca] : terms_) {
    if (max_degree != kExact && ma.degree() + rhs.low_degree() > max_degree) break;
    for (const auto& [mb, cb] : rhs.terms_) {
      if (max_degree != kExact && ma.degree() + mb.degree() > max_degree) break;
      mpq_mul(prod.get_mpq_t(), ca.get_mpq_t(), cb.get_mpq_t());
      out.add_term(ma * mb, prod);
    }
  }
  return out;
}

Poly Poly::partial(int var) const {
  if (var < 0 || var >= nvars_) {
    throw std::invalid_argument("partial derivative index " + std::to_string(var + 1) + " out of range 1.." +
                                std::to_string(nvars_));
  }
  Poly out(nvars_);
  for (const auto& [m, c] : terms_) {
    int e = m[var];
    if (e == 0) continue;
    Monomial d(m);
    d.set(var, e - 1);
    out.add_term(d, c * e);
  }
  return out;
}

Poly Poly::homogeneous_component(int degree) const {
  Poly out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m.degree() == degree) out.terms_.emplace_hint(out.terms_.end(), m, c);
  }
  return out;
}

Poly Poly::truncated(int max_degree) const {
  if (max_degree == kExact) return *this;
  Poly out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m.degree() > max_degree) break;
    out.terms_.emplace_hint(out.terms_.end(), m, c);
  }
  return out;
}

Poly Poly::shifted(const Monomial& m) const {
  Poly out(nvars_);
  for (const auto& [t, c] : terms_) out.terms_.emplace(t * m, c);
  return out;
}

bool Poly::divide_exact(const Poly& divisor, Poly& quotient) const {
  check_same(divisor);
  if (divisor.is_zero()) throw std::invalid_argument("division by the zero polynomial");
  quotient = Poly(nvars_);
  Poly rem(*this);
  const auto& [lead_m, lead_c] = *divisor.terms_.rbegin();
  while (!rem.is_zero()) {
    const auto& [rm, rc] = *rem.terms_.rbegin();
    if (!lead_m.divides(rm)) return false;
    Poly t = Poly::term(lead_m.quotient_of(rm), rc / lead_c);
    quotient += t;
    rem -= t * divisor;
  }
  return true;
}

Rational Poly::eval(std::span<const Rational> point) const {
  if (static_cast<int>(point.size()) != nvars_) throw std::invalid_argument("evaluation point has wrong length");
  Rational sum = 0;
  for (const auto& [m, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < m[i]; ++k) t *= point[static_cast<std::size_t>(i)];
    }
    sum += t;
  }
  return sum;
}

double Poly::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != nvars_) throw std::invalid_argument("evaluation point has wrong length");
  double sum = 0;
  for (const auto& [m, c] : terms_) {
    double t = c.get_d();
    for (int i = 0; i < nvars_; ++i) t *= std::pow(point[static_cast<std::size_t>(i)], m[i]);
    sum += t;
  }
  return sum;
}

std::string Poly::to_string(std::string_view var_prefix) const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    bool negative = c < 0;
    Rational mag = abs(c);
    if (first) {
      if (negative) out += '-';
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    std::string vars;
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      if (!vars.empty()) vars += '*';
      vars += var_prefix;
      vars += std::to_string(i + 1);
      if (m[i] > 1) vars += "^" + std::to_string(m[i]);
    }
    if (vars.empty()) {
      out += mag.get_str();
    } else if (mag == 1) {
      out += vars;
    } else {
      out += mag.get_str() + "*" + vars;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser for the polynomial text grammar.

namespace {

class PolyParser {
 public:
  // Whitespace carries no meaning, so it is dropped up front; `columns_`
  // maps each kept character back to its 1-based column for error reports.
  PolyParser(std::string_view text, int nvars) : original_(text), nvars_(nvars) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) continue;
      stripped_ += text[i];
      columns_.push_back(static_cast<int>(i) + 1);
    }
    columns_.push_back(static_cast<int>(text.size()) + 1);
    text_ = stripped_;
  }

  Poly run() {
    Poly out(nvars_);
    skip_ws();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      Rational sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      auto [m, c] = parse_term();
      out.add_term(m, sign * c);
      skip_ws();
    }
    return out;
  }

 private:
  std::pair<Monomial, Rational> parse_term() {
    Monomial m(nvars_);
    Rational c = 1;
    bool any = false;
    while (true) {
      skip_ws();
      if (at_end()) break;
      char ch = peek();
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        c *= parse_number();
      } else if (ch == 'x') {
        auto [var, exp] = parse_power();
        int e = m[var] + exp;
        if (e > 255) fail("exponent too large");
        m.set(var, e);
      } else {
        break;
      }
      any = true;
      skip_ws();
      if (!at_end() && peek() == '*') {
        ++pos_;
        skip_ws();
        if (at_end() || !(std::isdigit(static_cast<unsigned char>(peek())) || peek() == 'x')) {
          fail("expected factor after '*'");
        }
      }
    }
    if (!any) fail("expected a term");
    return {m, c};
  }

  Rational parse_number() {
    Integer num = parse_digits();
    Integer den = 1;
    if (!at_end() && peek() == '/') {
      ++pos_;
      if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected denominator after '/'");
      den = parse_digits();
      if (den == 0) fail("zero denominator");
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  std::pair<int, int> parse_power() {
    std::size_t start = pos_;
    ++pos_;  // 'x'
    if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected variable index after 'x'");
    Integer idx = parse_digits();
    if (idx < 1 || idx > nvars_) {
      pos_ = start;
      fail("variable x" + idx.get_str() + " outside x1..x" + std::to_string(nvars_));
    }
    int exp = 1;
    if (!at_end() && peek() == '^') {
      ++pos_;
      if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent after '^'");
      Integer e = parse_digits();
      if (e > 255) fail("exponent too large");
      exp = static_cast<int>(e.get_si());
    }
    return {static_cast<int>(idx.get_si()) - 1, exp};
  }

  Integer parse_digits() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    return Integer(std::string(text_.substr(start, pos_ - start)));
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " in polynomial '" + std::string(original_) + "'", columns_[pos_]);
  }

  std::string_view original_;
  std::string stripped_;
  std::vector<int> columns_;
  std::string_view text_;
  int nvars_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly Poly::parse(std::string_view text, int nvars) { return PolyParser(text, nvars).run(); }

Poly reciprocal_series(const Poly& p, int max_degree) {
  Rational c0 = p.constant_term();
  if (c0 == 0) throw std::invalid_argument("reciprocal of a series vanishing at the origin");
  int n = p.nvars();
  Poly h = (p - Poly::constant(n, c0)) * Rational(1 / c0);  // p = c0 (1 + h)
  // 1/(1+h) = sum (-h)^k, h has no constant term so k <= max_degree suffices.
  Poly result = Poly::constant(n, 1);
  Poly power = Poly::constant(n, 1);
  Poly neg_h = -h;
  int kmax = max_degree == kExact ? 64 : max_degree;
  for (int k = 1; k <= kmax; ++k) {
    power = power.mul_trunc(neg_h, max_degree);
    if (power.is_zero()) break;
    result += power;
  }
  if (max_degree == kExact && !(result * p - Poly::constant(n, c0)).is_zero()) {
    throw std::invalid_argument("reciprocal is not a polynomial; pass a truncation degree");
  }
  return result * Rational(1 / c0);
}

}  // namespace nambu
