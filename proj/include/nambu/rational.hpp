#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace nambu {

// GMP keeps mpq values canonical (lowest terms, positive denominator) after
// every arithmetic operation; only raw num/den construction needs an explicit
// canonicalize(), which make_rational does.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

// Accepts "7", "-3/4", "+2". Throws InputError on anything else.
Rational parse_rational(std::string_view text);

inline int sign(const Rational& r) { return sgn(r); }

}  // namespace nambu
