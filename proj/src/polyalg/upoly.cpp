#include "nambu/upoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nambu {

void trim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

int degree(const UPoly& p) { return static_cast<int>(p.size()) - 1; }

Rational eval(const UPoly& p, const Rational& t) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::complex<double> eval(const UPoly& p, std::complex<double> t) {
  std::complex<double> acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + it->get_d();
  return acc;
}

UPoly derivative(const UPoly& p) {
  UPoly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

UPoly multiply(const UPoly& a, const UPoly& b) {
  if (a.empty() || b.empty()) return {};
  UPoly r(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim(r);
  return r;
}

UPoly subtract(const UPoly& a, const UPoly& b) {
  UPoly r(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

void divmod(const UPoly& a, const UPoly& b, UPoly& q, UPoly& r) {
  if (b.empty()) throw std::invalid_argument("polynomial division by zero");
  r = a;
  trim(r);
  q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, Rational(0));
  while (!r.empty() && r.size() >= b.size()) {
    std::size_t shift = r.size() - b.size();
    Rational c = r.back() / b.back();
    q[shift] = c;
    for (std::size_t i = 0; i < b.size(); ++i) r[shift + i] -= c * b[i];
    r.pop_back();  // leading term cancels exactly
    trim(r);
  }
  trim(q);
}

UPoly monic(const UPoly& p) {
  if (p.empty()) return p;
  UPoly r(p);
  Rational lead = r.back();
  for (auto& c : r) c /= lead;
  return r;
}

UPoly gcd(UPoly a, UPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    UPoly q, r;
    divmod(a, b, q, r);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

std::vector<UPoly> squarefree_decomposition(const UPoly& p) {
  if (p.empty()) throw std::invalid_argument("square-free decomposition of zero");
  std::vector<UPoly> out;
  UPoly f = monic(p);
  if (degree(f) == 0) return out;
  UPoly fp = derivative(f);
  UPoly a = gcd(f, fp);
  UPoly q, r;
  divmod(f, a, q, r);
  UPoly b = q;
  divmod(fp, a, q, r);
  UPoly c = q;
  UPoly d = subtract(c, derivative(b));
  while (degree(b) > 0) {
    UPoly g = gcd(b, d);
    out.push_back(g);
    divmod(b, g, q, r);
    b = q;
    divmod(d, g, q, r);
    c = q;
    d = subtract(c, derivative(b));
  }
  while (!out.empty() && degree(out.back()) == 0) out.pop_back();
  return out;
}

std::vector<std::complex<double>> numeric_roots(const UPoly& p_in, double tol) {
  UPoly p = monic(p_in);
  int n = degree(p);
  std::vector<std::complex<double>> z;
  if (n <= 0) return z;
  if (n == 1) {
    z.emplace_back(-p[0].get_d(), 0.0);
    return z;
  }
  UPoly dp = derivative(p);
  double bound = 0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(p[static_cast<std::size_t>(i)].get_d()));
  bound += 1.0;
  for (int k = 0; k < n; ++k) {
    double ang = 2 * std::numbers::pi * k / n + 0.4;
    z.push_back(std::polar(0.5 * bound, ang));
  }
  for (int iter = 0; iter < 2000; ++iter) {
    double max_step = 0;
    for (int i = 0; i < n; ++i) {
      auto zi = z[static_cast<std::size_t>(i)];
      auto ratio = eval(p, zi) / eval(dp, zi);
      std::complex<double> sum = 0;
      for (int j = 0; j < n; ++j) {
        if (j != i) sum += 1.0 / (zi - z[static_cast<std::size_t>(j)]);
      }
      auto step = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = {1e-3, 1e-3};
      z[static_cast<std::size_t>(i)] -= step;
      max_step = std::max(max_step, std::abs(step));
    }
    if (max_step < 1e-15 * bound) break;
  }
  // Newton polish; the roots are simple so quadratic convergence applies.
  for (auto& r : z) {
    for (int k = 0; k < 50; ++k) {
      auto d = eval(dp, r);
      if (std::abs(d) == 0) break;
      auto step = eval(p, r) / d;
      r -= step;
      if (std::abs(step) < tol * 1e-3) break;
    }
    if (std::abs(r.imag()) < tol) r = {r.real(), 0.0};
  }
  std::sort(z.begin(), z.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return z;
}

std::string upoly_to_string(const UPoly& p, const std::string& var) {
  if (p.empty()) return "0";
  std::string out;
  bool first = true;
  for (int k = degree(p); k >= 0; --k) {
    const Rational& c = p[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    bool neg = c < 0;
    Rational mag = abs(c);
    if (first) {
      if (neg) out += '-';
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    std::string mono = k == 0 ? "" : (k == 1 ? var : var + "^" + std::to_string(k));
    if (mono.empty()) {
      out += mag.get_str();
    } else if (mag == 1) {
      out += mono;
    } else {
      out += mag.get_str() + "*" + mono;
    }
  }
  return out;
}

}  // namespace nambu
