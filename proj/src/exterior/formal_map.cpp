#include "nambu/formal_map.hpp"

#include <stdexcept>

#include "nambu/errors.hpp"

namespace nambu {

FormalMap::FormalMap(std::vector<Poly> components, int trunc) : trunc_(trunc), comps_(std::move(components)) {
  int n = static_cast<int>(comps_.size());
  for (auto& c : comps_) {
    if (c.nvars() != n) throw std::invalid_argument("map component variable count differs from map dimension");
    if (c.constant_term() != 0) throw std::invalid_argument("coordinate change must fix the origin");
    c = c.truncated(trunc_);
  }
}

FormalMap FormalMap::identity(int n, int trunc) {
  std::vector<Poly> c;
  for (int i = 0; i < n; ++i) c.push_back(Poly::variable(n, i));
  return FormalMap(std::move(c), trunc);
}

FormalMap FormalMap::linear(const RatMatrix& l) {
  if (!l.is_square()) throw std::invalid_argument("linear map needs a square matrix");
  int n = l.rows();
  std::vector<Poly> c;
  for (int i = 0; i < n; ++i) {
    Poly p(n);
    for (int j = 0; j < n; ++j) p.add_term(Monomial::unit(n, j), l(i, j));
    c.push_back(std::move(p));
  }
  return FormalMap(std::move(c), kExact);
}

RatMatrix FormalMap::linear_part() const {
  int n = nvars();
  RatMatrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) l(i, j) = comps_[static_cast<std::size_t>(i)].coeff(Monomial::unit(n, j));
  }
  return l;
}

bool FormalMap::is_linear() const {
  for (const auto& c : comps_) {
    if (!c.is_zero() && (c.degree() != 1 || c.low_degree() != 1)) return false;
  }
  return true;
}

Poly FormalMap::substitute(const Poly& p, int max_degree) const {
  Substituter sub(*this, max_degree);
  return sub(p);
}

FormalMap FormalMap::compose(const FormalMap& inner, int max_degree) const {
  if (inner.nvars() != nvars()) throw std::invalid_argument("composing maps of different dimensions");
  Substituter sub(inner, max_degree);
  std::vector<Poly> c;
  for (const auto& p : comps_) c.push_back(sub(p));
  int t = std::min({max_degree, trunc_, inner.trunc_});
  return FormalMap(std::move(c), t);
}

FormalMap FormalMap::truncated(int max_degree) const { return FormalMap(comps_, std::min(max_degree, trunc_)); }

// ---------------------------------------------------------------------------

std::size_t Substituter::MonoHash::operator()(const Monomial& m) const {
  std::size_t h = 1469598103934665603ULL;
  for (int i = 0; i < m.nvars(); ++i) h = (h ^ static_cast<std::size_t>(m[i])) * 1099511628211ULL;
  return h;
}

Substituter::Substituter(const FormalMap& phi, int max_degree) : phi_(phi), max_degree_(max_degree) {}

const Poly& Substituter::monomial_image(const Monomial& m) {
  auto it = cache_.find(m);
  if (it != cache_.end()) return it->second;
  int n = phi_.nvars();
  Poly img(n);
  if (m.degree() == 0) {
    img = Poly::constant(n, 1);
  } else {
    int j = 0;
    while (m[j] == 0) ++j;
    Monomial rest(m);
    rest.set(j, m[j] - 1);
    Poly lower = monomial_image(rest);  // copy: the cache may rehash below
    img = lower.mul_trunc(phi_.component(j), max_degree_);
  }
  return cache_.emplace(m, std::move(img)).first->second;
}

Poly Substituter::operator()(const Poly& p) {
  if (p.nvars() != phi_.nvars()) throw std::invalid_argument("substitution variable count mismatch");
  Poly out(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    // Phi has no constant term, so images only raise degree.
    if (max_degree_ != kExact && m.degree() > max_degree_) break;
    Poly t = monomial_image(m);
    t *= c;
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------

FormalMap formal_inverse(const FormalMap& phi, int max_degree) {
  int n = phi.nvars();
  auto linv = inverse(phi.linear_part());
  if (!linv) throw PreconditionError("coordinate change has a singular linear part");
  FormalMap l_inv = FormalMap::linear(*linv);
  if (phi.is_linear()) return max_degree == kExact ? l_inv : l_inv.truncated(max_degree);
  if (max_degree == kExact) throw std::invalid_argument("inverse of a nonlinear map needs a truncation degree");
  // Phi = L x + h(x); iterate Psi <- L^{-1}(y - h(Psi)). Each pass fixes one
  // more degree, so max_degree passes suffice.
  std::vector<Poly> h;
  for (int i = 0; i < n; ++i) {
    Poly hi = phi.component(i) - phi.component(i).homogeneous_component(1);
    h.push_back(std::move(hi));
  }
  FormalMap psi = l_inv.truncated(max_degree);
  for (int pass = 1; pass < max_degree; ++pass) {
    Substituter sub(psi, max_degree);
    std::vector<Poly> rhs;
    for (int i = 0; i < n; ++i) rhs.push_back(Poly::variable(n, i) - sub(h[static_cast<std::size_t>(i)]));
    std::vector<Poly> next;
    for (int i = 0; i < n; ++i) {
      Poly c(n);
      for (int j = 0; j < n; ++j) {
        const Rational& a = (*linv)(i, j);
        if (a != 0) c += rhs[static_cast<std::size_t>(j)] * a;
      }
      next.push_back(std::move(c));
    }
    FormalMap updated(std::move(next), max_degree);
    if (updated == psi) break;
    psi = std::move(updated);
  }
  return psi;
}

DiffForm pullback_form(const DiffForm& w, const FormalMap& phi, int max_degree) {
  int n = w.nvars();
  if (phi.nvars() != n) throw std::invalid_argument("pullback by a map of different dimension");
  Substituter sub(phi, max_degree);
  std::vector<DiffForm> dphi;
  for (int i = 0; i < n; ++i) dphi.push_back(differential(phi.component(i)).truncated(max_degree));
  std::map<IndexSet, DiffForm> wedge_cache;
  auto dphi_of = [&](auto&& self, IndexSet key) -> DiffForm {
    if (key == 0) return DiffForm::scalar(Poly::constant(n, 1));
    auto it = wedge_cache.find(key);
    if (it != wedge_cache.end()) return it->second;
    int first = std::countr_zero(key);
    DiffForm r = wedge(dphi[static_cast<std::size_t>(first)], self(self, key & (key - 1)), max_degree);
    wedge_cache.emplace(key, r);
    return r;
  };
  DiffForm out(n, w.grade());
  for (const auto& [key, c] : w.comps()) {
    Poly coef = sub(c);
    if (coef.is_zero()) continue;
    out += dphi_of(dphi_of, key).mul_trunc(coef, max_degree);
  }
  return out;
}

Poly jacobian_determinant(const FormalMap& phi, int max_degree) {
  int n = phi.nvars();
  DiffForm vol = pullback_form(standard_volume(n), phi, max_degree);
  return vol.coeff(full_set(n));
}

Multivector pushforward_by_inverse(const Multivector& p, const FormalMap& psi, int max_degree) {
  int n = p.nvars();
  if (psi.nvars() != n) throw std::invalid_argument("pushforward by a map of different dimension");
  if (det(psi.linear_part()) == 0) throw PreconditionError("coordinate change has a singular linear part");
  DiffForm vol = standard_volume(n);
  DiffForm w = pullback_form(tensor_to_form(p, vol), psi, max_degree);
  Poly jac = jacobian_determinant(psi, max_degree);
  Multivector out = form_to_tensor(w, vol);
  if (jac.degree() == 0) {
    out *= Rational(1 / jac.constant_term());
    return out;
  }
  return out.mul_trunc(reciprocal_series(jac, max_degree), max_degree);
}

Multivector pushforward_tensor(const Multivector& p, const FormalMap& phi, int max_degree) {
  // dPsi loses one degree, so the inverse is needed one degree further.
  int deg = phi.is_linear() ? kExact : (max_degree == kExact ? kExact : max_degree + 1);
  return pushforward_by_inverse(p, formal_inverse(phi, deg), max_degree);
}

}  // namespace nambu
