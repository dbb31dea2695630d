#include "nambu/field.hpp"

#include <algorithm>
#include <stdexcept>

#include "nambu/errors.hpp"

namespace nambu {

IndexSet index_set(const std::vector<int>& zero_based) {
  IndexSet s = 0;
  for (int i : zero_based) {
    if (i < 0 || i >= kMaxVars) throw std::invalid_argument("index out of range");
    s |= IndexSet{1} << i;
  }
  return s;
}

std::vector<int> set_indices(IndexSet s) {
  std::vector<int> out;
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

IndexSet full_set(int n) { return n >= 64 ? ~IndexSet{0} : (IndexSet{1} << n) - 1; }

std::vector<IndexSet> subsets_of_size(int n, int k) {
  std::vector<IndexSet> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(index_set(idx));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

int wedge_sign(IndexSet a, IndexSet b) {
  // Parity of pairs (i in A, j in B) with i > j.
  int inversions = 0;
  for (IndexSet t = b; t; t &= t - 1) {
    int j = std::countr_zero(t);
    inversions += set_size(a) - count_below(a, j + 1);
  }
  return inversions % 2 ? -1 : 1;
}

int interior_sign(IndexSet a, IndexSet b) {
  int exponent = 0;
  int k = 0;
  for (IndexSet t = a; t; t &= t - 1, ++k) exponent += count_below(b, std::countr_zero(t)) - k;
  return exponent % 2 ? -1 : 1;
}

// ---------------------------------------------------------------------------
// Field

template <Kind K>
Field<K>::Field(int nvars, int grade) : nvars_(nvars), grade_(grade) {
  if (nvars < 0 || nvars > kMaxVars) throw std::invalid_argument("variable count out of range");
  if (grade < 0 || grade > nvars) {
    throw std::invalid_argument("grade " + std::to_string(grade) + " outside [0, " + std::to_string(nvars) + "]");
  }
}

template <Kind K>
Field<K> Field<K>::basis(int nvars, const std::vector<int>& zero_based, const Poly& coeff) {
  Field f(nvars, static_cast<int>(zero_based.size()));
  std::vector<int> idx(zero_based);
  int sign = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= nvars) throw std::invalid_argument("basis index out of range");
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[i] == idx[j]) return f;
      if (idx[i] > idx[j]) sign = -sign;
    }
  }
  f.add(index_set(idx), sign > 0 ? coeff : -coeff);
  return f;
}

template <Kind K>
Field<K> Field<K>::basis(int nvars, const std::vector<int>& zero_based) {
  return basis(nvars, zero_based, Poly::constant(nvars, 1));
}

template <Kind K>
Field<K> Field<K>::scalar(const Poly& p) {
  Field f(p.nvars(), 0);
  f.add(0, p);
  return f;
}

template <Kind K>
Poly Field<K>::coeff(IndexSet key) const {
  auto it = comps_.find(key);
  return it == comps_.end() ? Poly(nvars_) : it->second;
}

template <Kind K>
void Field<K>::add(IndexSet key, const Poly& p) {
  if (set_size(key) != grade_ || (key & ~full_set(nvars_)) != 0) throw std::invalid_argument("key does not fit field");
  if (p.nvars() != nvars_) throw std::invalid_argument("coefficient variable count mismatch");
  if (p.is_zero()) return;
  auto [it, inserted] = comps_.try_emplace(key, p);
  if (!inserted) {
    it->second += p;
    if (it->second.is_zero()) comps_.erase(it);
  }
}

template <Kind K>
void Field<K>::check_compatible(const Field& o) const {
  if (o.nvars_ != nvars_ || o.grade_ != grade_) {
    throw std::invalid_argument("field shape mismatch (nvars " + std::to_string(nvars_) + "/" +
                                std::to_string(o.nvars_) + ", grade " + std::to_string(grade_) + "/" +
                                std::to_string(o.grade_) + ")");
  }
}

template <Kind K>
Field<K>& Field<K>::operator+=(const Field& o) {
  check_compatible(o);
  for (const auto& [k, p] : o.comps_) add(k, p);
  return *this;
}

template <Kind K>
Field<K>& Field<K>::operator-=(const Field& o) {
  check_compatible(o);
  for (const auto& [k, p] : o.comps_) add(k, -p);
  return *this;
}

template <Kind K>
Field<K>& Field<K>::operator*=(const Poly& p) {
  for (auto it = comps_.begin(); it != comps_.end();) {
    it->second *= p;
    it = it->second.is_zero() ? comps_.erase(it) : std::next(it);
  }
  return *this;
}

template <Kind K>
Field<K>& Field<K>::operator*=(const Rational& c) {
  if (c == 0) {
    comps_.clear();
    return *this;
  }
  for (auto& [k, p] : comps_) p *= c;
  return *this;
}

template <Kind K>
Field<K> Field<K>::operator-() const {
  Field r(*this);
  for (auto& [k, p] : r.comps_) p = -p;
  return r;
}

template <Kind K>
Field<K> Field<K>::truncated(int max_degree) const {
  Field r(nvars_, grade_);
  for (const auto& [k, p] : comps_) r.add(k, p.truncated(max_degree));
  return r;
}

template <Kind K>
Field<K> Field<K>::homogeneous_component(int degree) const {
  Field r(nvars_, grade_);
  for (const auto& [k, p] : comps_) r.add(k, p.homogeneous_component(degree));
  return r;
}

template <Kind K>
Field<K> Field<K>::mul_trunc(const Poly& q, int max_degree) const {
  Field r(nvars_, grade_);
  for (const auto& [k, p] : comps_) r.add(k, p.mul_trunc(q, max_degree));
  return r;
}

template <Kind K>
int Field<K>::degree() const {
  int d = kZeroDegree;
  for (const auto& [k, p] : comps_) d = std::max(d, p.degree());
  return d;
}

template <Kind K>
int Field<K>::low_degree() const {
  if (comps_.empty()) return kZeroDegree;
  int d = std::numeric_limits<int>::max();
  for (const auto& [k, p] : comps_) d = std::min(d, p.low_degree());
  return d;
}

template <Kind K>
std::string Field<K>::to_string() const {
  if (comps_.empty()) return "0";
  std::string out;
  for (const auto& [key, p] : comps_) {
    std::string basis;
    for (int i : set_indices(key)) {
      if (!basis.empty()) basis += '^';
      basis += (K == Kind::Form ? "dx" : "d/dx") + std::to_string(i + 1);
    }
    // A sum whose leading term is negative is printed as -(...).
    bool negate = p.size() > 1 && p.terms().rbegin()->second < 0;
    std::string coeff = negate ? (-p).to_string() : p.to_string();
    bool simple = p.size() == 1;
    std::string term;
    if (basis.empty()) {
      term = simple ? coeff : "(" + coeff + ")";
    } else if (coeff == "1") {
      term = basis;
    } else if (coeff == "-1") {
      term = "-" + basis;
    } else {
      term = (simple ? coeff : "(" + coeff + ")") + "*" + basis;
    }
    if (negate) term = "-" + term;
    if (out.empty()) {
      out = term;
    } else if (term[0] == '-') {
      out += " - " + term.substr(1);
    } else {
      out += " + " + term;
    }
  }
  return out;
}

template class Field<Kind::Vector>;
template class Field<Kind::Form>;

// ---------------------------------------------------------------------------
// Algebra

template <Kind K>
Field<K> wedge(const Field<K>& a, const Field<K>& b, int max_degree) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("wedge of fields with different variable counts");
  int n = a.nvars();
  if (a.grade() + b.grade() > n) return Field<K>(n, n);
  Field<K> out(n, a.grade() + b.grade());
  for (const auto& [ka, pa] : a.comps()) {
    for (const auto& [kb, pb] : b.comps()) {
      if (ka & kb) continue;
      Poly prod = pa.mul_trunc(pb, max_degree);
      if (wedge_sign(ka, kb) < 0) prod = -prod;
      out.add(ka | kb, prod);
    }
  }
  return out;
}

template Multivector wedge(const Multivector&, const Multivector&, int);
template DiffForm wedge(const DiffForm&, const DiffForm&, int);

namespace {

template <Kind KA, Kind KB>
Field<KB> contract(const Field<KA>& a, const Field<KB>& b, int max_degree) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("interior product of fields with different variable counts");
  if (a.grade() > b.grade()) {
    throw std::invalid_argument("interior product grade " + std::to_string(a.grade()) + " exceeds target grade " +
                                std::to_string(b.grade()));
  }
  Field<KB> out(b.nvars(), b.grade() - a.grade());
  for (const auto& [ka, pa] : a.comps()) {
    for (const auto& [kb, pb] : b.comps()) {
      if ((ka & kb) != ka) continue;
      Poly prod = pa.mul_trunc(pb, max_degree);
      if (interior_sign(ka, kb) < 0) prod = -prod;
      out.add(kb & ~ka, prod);
    }
  }
  return out;
}

}  // namespace

DiffForm interior(const Multivector& a, const DiffForm& b, int max_degree) { return contract(a, b, max_degree); }

Multivector interior(const DiffForm& a, const Multivector& b, int max_degree) { return contract(a, b, max_degree); }

DiffForm dform(const DiffForm& w) {
  int n = w.nvars();
  if (w.grade() >= n) return DiffForm(n, n);
  DiffForm out(n, w.grade() + 1);
  for (const auto& [key, p] : w.comps()) {
    for (int i = 0; i < n; ++i) {
      if (set_contains(key, i)) continue;
      Poly d = p.partial(i);
      if (d.is_zero()) continue;
      if (count_below(key, i) % 2) d = -d;
      out.add(key | (IndexSet{1} << i), d);
    }
  }
  return out;
}

DiffForm differential(const Poly& f) {
  DiffForm out(f.nvars(), 1);
  for (int i = 0; i < f.nvars(); ++i) out.add(IndexSet{1} << i, f.partial(i));
  return out;
}

Poly apply_vector_field(const Multivector& x, const Poly& f, int max_degree) {
  if (x.grade() != 1) throw std::invalid_argument("expected a vector field (grade 1)");
  Poly out(f.nvars());
  for (const auto& [key, c] : x.comps()) out += c.mul_trunc(f.partial(std::countr_zero(key)), max_degree);
  return out;
}

Multivector lie_bracket(const Multivector& x, const Multivector& y) {
  if (x.grade() != 1 || y.grade() != 1) throw std::invalid_argument("Lie bracket needs two vector fields");
  if (x.nvars() != y.nvars()) throw std::invalid_argument("Lie bracket of fields with different variable counts");
  int n = x.nvars();
  Multivector out(n, 1);
  for (int j = 0; j < n; ++j) {
    IndexSet kj = IndexSet{1} << j;
    Poly c = apply_vector_field(x, y.coeff(kj)) - apply_vector_field(y, x.coeff(kj));
    out.add(kj, c);
  }
  return out;
}

Multivector lie_derivative(const Multivector& x, const Multivector& p) {
  if (x.grade() != 1) throw std::invalid_argument("Lie derivative needs a vector field");
  if (x.nvars() != p.nvars()) throw std::invalid_argument("Lie derivative of fields with different variable counts");
  int n = p.nvars();
  Multivector out(n, p.grade());
  // Jacobian entries dX^j/dx_i.
  std::vector<std::vector<Poly>> jac(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) jac[static_cast<std::size_t>(i)].push_back(x.coeff(IndexSet{1} << j).partial(i));
  }
  for (const auto& [key, c] : p.comps()) {
    out.add(key, apply_vector_field(x, c));
    // Slot i replaced by [X, d/dx_i] = -sum_j dX^j/dx_i d/dx_j.
    for (int i : set_indices(key)) {
      IndexSet rest = key & ~(IndexSet{1} << i);
      for (int j = 0; j < n; ++j) {
        const Poly& dij = jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (dij.is_zero()) continue;
        if (set_contains(rest, j)) continue;
        // Position of d/dx_i in `key` equals count_below(key, i); moving d/dx_j
        // there and sorting costs the parity below.
        int moves = count_below(rest, j) + count_below(key, i);
        Poly term = -(c * dij);
        if (moves % 2) term = -term;
        out.add(rest | (IndexSet{1} << j), term);
      }
    }
  }
  return out;
}

DiffForm lie_derivative(const Multivector& x, const DiffForm& w) {
  if (x.grade() != 1) throw std::invalid_argument("Lie derivative needs a vector field");
  DiffForm out = interior(x, dform(w));
  if (w.grade() > 0) out += dform(interior(x, w));
  return out;
}

DiffForm standard_volume(int n) { return DiffForm::basis(n, set_indices(full_set(n))); }

Poly volume_multiplier(const DiffForm& vol) {
  int n = vol.nvars();
  if (vol.grade() != n || vol.comps().size() != 1) {
    throw PreconditionError("volume form must be a single top-degree component f*dx1^...^dx" + std::to_string(n));
  }
  const Poly& f = vol.comps().begin()->second;
  if (f.constant_term() == 0) throw PreconditionError("degenerate volume form: multiplier vanishes at the origin");
  return f;
}

DiffForm tensor_to_form(const Multivector& p, const DiffForm& vol) {
  if (p.nvars() != vol.nvars()) throw std::invalid_argument("tensor and volume form have different variable counts");
  volume_multiplier(vol);
  return interior(p, vol);
}

Multivector form_to_tensor(const DiffForm& w, const DiffForm& vol, int max_degree) {
  int n = vol.nvars();
  if (w.nvars() != n) throw std::invalid_argument("form and volume form have different variable counts");
  Poly f = volume_multiplier(vol);
  IndexSet all = full_set(n);
  Multivector out(n, n - w.grade());
  bool constant = f.degree() == 0;
  Poly recip = constant || max_degree == kExact ? Poly(n) : reciprocal_series(f, max_degree);
  for (const auto& [key, c] : w.comps()) {
    IndexSet comp = all & ~key;
    Poly coef = c;
    if (interior_sign(comp, all) < 0) coef = -coef;
    if (constant) {
      coef *= Rational(1 / f.constant_term());
    } else if (max_degree == kExact) {
      Poly q;
      if (!coef.divide_exact(f, q)) {
        throw PreconditionError("form coefficient is not divisible by the volume multiplier " + f.to_string());
      }
      coef = q;
    } else {
      coef = coef.mul_trunc(recip, max_degree);
    }
    out.add(comp, coef);
  }
  return out;
}

}  // namespace nambu
