#include "nambu/formal.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "nambu/errors.hpp"

namespace nambu {

void GradedSolveReport::append(const GradedSolveReport& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

namespace {

// ---------------------------------------------------------------------------
// Linear systems whose columns are images of unknown basis elements

struct RowKey {
  IndexSet key;
  Monomial mono;
};

struct RowLess {
  bool operator()(const RowKey& a, const RowKey& b) const {
    if (a.key != b.key) return TupleLess{}(a.key, b.key);
    return grlex_less(a.mono, b.mono);
  }
};

template <Kind K>
class ImageSystem {
 public:
  ImageSystem(std::string stage, int degree) : stage_(std::move(stage)), degree_(degree) {}

  int add(const Field<K>& image) {
    int col = ncols_++;
    for (const auto& [key, c] : image.comps()) {
      for (const auto& [m, v] : c.terms()) rows_[RowKey{key, m}][col] += v;
    }
    return col;
  }

  // Solves sum_col u_col image_col = rhs on the rows whose key passes `keep`;
  // free unknowns are set to zero.
  RatVector solve(const Field<K>& rhs, GradedSolveReport& report,
                  const std::function<bool(IndexSet)>& keep = nullptr) {
    std::map<RowKey, Rational, RowLess> b;
    for (const auto& [key, c] : rhs.comps()) {
      if (keep && !keep(key)) continue;
      for (const auto& [m, v] : c.terms()) b[RowKey{key, m}] = v;
    }
    SparseSystem sys(ncols_);
    int equations = 0;
    for (auto& [rk, row] : rows_) {
      if (keep && !keep(rk.key)) continue;
      SparseSystem::Row clean;
      for (const auto& [col, v] : row) {
        if (v != 0) clean.emplace(col, v);
      }
      auto it = b.find(rk);
      Rational r = it == b.end() ? Rational(0) : it->second;
      if (clean.empty() && r == 0) continue;
      ++equations;
      sys.add_row(std::move(clean), r);
    }
    for (const auto& [rk, v] : b) {
      if (rows_.count(rk)) continue;
      ++equations;
      sys.add_row({}, v);
    }
    report.records.push_back(GradedSolveRecord{stage_, degree_, ncols_, equations, sys.rank(), sys.consistent()});
    if (!sys.consistent()) throw SolveError(stage_ + ": graded system is inconsistent", degree_);
    return sys.solve();
  }

 private:
  std::string stage_;
  int degree_;
  int ncols_ = 0;
  std::map<RowKey, SparseSystem::Row, RowLess> rows_;
};

// ---------------------------------------------------------------------------
// Small helpers

IndexSet bit(int i) { return IndexSet{1} << i; }

Poly mono(const Monomial& m) { return Poly::term(m, 1); }

Rational linear_coeff(const Poly& c, int var) { return c.coeff(Monomial::unit(c.nvars(), var)); }

std::vector<int> range(int from, int to) {
  std::vector<int> out;
  for (int i = from; i < to; ++i) out.push_back(i);
  return out;
}

// Monomials of the given degree using only variables in `vars`.
std::vector<Monomial> monomials_in(int n, int degree, const std::vector<int>& vars) {
  std::vector<Monomial> out;
  IndexSet allowed = index_set(vars);
  for (const Monomial& m : monomials_of_degree(n, degree)) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (m[i] > 0 && !set_contains(allowed, i)) ok = false;
    }
    if (ok) out.push_back(m);
  }
  return out;
}

template <Kind K>
Field<K> keep_keys(const Field<K>& f, const std::function<bool(IndexSet)>& keep) {
  Field<K> out(f.nvars(), f.grade());
  for (const auto& [key, c] : f.comps()) {
    if (keep(key)) out.add(key, c);
  }
  return out;
}

// Polynomial in `nvars` variables with old variable i renamed to target[i].
Poly remap(const Poly& p, int nvars, const std::vector<int>& target) {
  Poly out(nvars);
  for (const auto& [m, c] : p.terms()) {
    Monomial r(nvars);
    for (int i = 0; i < p.nvars(); ++i) {
      if (m[i] == 0) continue;
      int t = target[static_cast<std::size_t>(i)];
      if (t < 0) throw std::logic_error("remap drops a variable that occurs");
      r.set(t, r[t] + m[i]);
    }
    out.add_term(r, c);
  }
  return out;
}

FormalMap shift_map(int n, const std::vector<Poly>& shifts) {
  std::vector<Poly> comps;
  for (int i = 0; i < n; ++i) comps.push_back(Poly::variable(n, i) + shifts[static_cast<std::size_t>(i)]);
  return FormalMap(std::move(comps), kExact);
}

// Time-one flow of a vector field without linear part, through degree trunc.
FormalMap flow_map(const Multivector& x, int trunc) {
  int n = x.nvars();
  std::vector<Poly> comps;
  for (int i = 0; i < n; ++i) {
    Poly term = Poly::variable(n, i);
    Poly acc = term;
    for (int k = 1;; ++k) {
      term = apply_vector_field(x, term, trunc) * make_rational(1, k);
      if (term.is_zero()) break;
      acc += term;
    }
    comps.push_back(acc.truncated(trunc));
  }
  return FormalMap(std::move(comps), trunc);
}

void check_degree(int max_degree) {
  if (max_degree < 2) throw std::invalid_argument("truncation order must be at least 2");
}

void check_co_order(int n, int p) {
  int q = n - p;
  if (q < 3) {
    throw PreconditionError("co-order q = " + std::to_string(q) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  if (p < 1) throw PreconditionError("form grade must be at least 1");
}

// Linear part already equal to a nondegenerate Type 1 normal form?
std::optional<NormalForm> as_type1_normal_form(const DiffForm& w1) {
  int n = w1.nvars();
  int p = w1.grade();
  int q = n - p;
  IndexSet head = full_set(p - 1);
  RatVector diag;
  for (int k = 0; k <= q; ++k) {
    Rational d = linear_coeff(w1.coeff(head | bit(p - 1 + k)), p - 1 + k);
    if (d == 0) return std::nullopt;
    diag.push_back(d);
  }
  NormalForm nf = type1_normal_form(n, q, q, 0, diag);
  if (nf.form != w1) return std::nullopt;
  return nf;
}

std::optional<NormalForm> as_type2_normal_form(const DiffForm& w1) {
  int n = w1.nvars();
  int p = w1.grade();
  int q = n - p;
  Multivector t = form_to_tensor(w1, standard_volume(n));
  IndexSet head = full_set(q - 1);
  RatMatrix m(p + 1, p + 1);
  for (int j = 0; j <= p; ++j) {
    Poly c = t.coeff(head | bit(q - 1 + j));
    for (int i = 0; i <= p; ++i) m(j, i) = linear_coeff(c, q - 1 + i);
  }
  NormalForm nf = type2_normal_form(n, q, m);
  if (nf.form != w1) return std::nullopt;
  return nf;
}

struct LinearFrame {
  NormalForm nf;
  RatMatrix change;  // v = change * x
};

LinearFrame linear_frame(const DiffForm& w, NormalType want) {
  int n = w.nvars();
  DiffForm w1 = w.homogeneous_component(1);
  auto fast = want == NormalType::Type1 ? as_type1_normal_form(w1) : as_type2_normal_form(w1);
  if (fast) return LinearFrame{*fast, RatMatrix::identity(n)};
  ClassificationReport rep;
  try {
    rep = classify_linear(w1);
  } catch (const NotConambuError&) {
    throw PreconditionError("linear part is not co-Nambu");
  }
  if (rep.normal_form.type != want) {
    throw PreconditionError(std::string("linear part is of Type ") +
                            (rep.normal_form.type == NormalType::Type1 ? "1" : "2") + ", expected Type " +
                            (want == NormalType::Type1 ? "1" : "2"));
  }
  return LinearFrame{rep.normal_form, rep.change.linear_part()};
}

// h with P = h * P1 through degree N, read off a component of P1 that is a
// single linear term.
std::optional<Poly> extract_multiplier(const Multivector& p, const Multivector& p1, int max_degree) {
  int n = p.nvars();
  for (const auto& [key, c] : p1.comps()) {
    if (c.size() != 1 || c.degree() != 1) continue;
    const auto& [m, a] = *c.terms().begin();
    int var = 0;
    while (m[var] == 0) ++var;
    Poly h(n);
    Poly coeff = p.coeff(key);
    for (const auto& [mm, v] : coeff.terms()) {
      if (mm.degree() > max_degree) continue;
      if (mm[var] == 0) return std::nullopt;
      Monomial q = mm;
      q.set(var, mm[var] - 1);
      h.add_term(q, v / a);
    }
    if ((p - p1.mul_trunc(h, max_degree)).truncated(max_degree).is_zero()) return h;
    return std::nullopt;
  }
  return std::nullopt;
}

bool integer_root(const Integer& a, unsigned long k, Integer& out) {
  if (a < 0) return false;
  mpz_class r;
  int exact = mpz_root(r.get_mpz_t(), a.get_mpz_t(), k);
  if (!exact) return false;
  out = r;
  return true;
}

// All exponent vectors of length k summing to total, in lexicographic order
// with the first entry largest first.
void compositions(int k, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur.push_back(v);
    compositions(k, total - v, cur, out);
    cur.pop_back();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Division

Division derham_divide(const DiffForm& alpha, const DiffForm& beta, const std::vector<int>& vars, int max_degree) {
  if (alpha.grade() != 1) throw std::invalid_argument("divisor must be a 1-form");
  if (beta.grade() < 1) throw std::invalid_argument("dividend must have positive grade");
  if (alpha.nvars() != beta.nvars()) throw std::invalid_argument("divisor and dividend variable counts differ");
  int n = beta.nvars();
  int k = beta.grade();
  if (!alpha.homogeneous_component(0).is_zero()) throw PreconditionError("divisor must vanish at the origin");
  DiffForm a1 = alpha.homogeneous_component(1);
  if (a1.is_zero()) throw PreconditionError("divisor has zero linear part");
  Division out{DiffForm(n, k - 1), {}};
  if (!beta.homogeneous_component(0).is_zero()) {
    out.report.records.push_back(GradedSolveRecord{"derham_divide", 0, 0, 1, 0, false});
    throw SolveError("derham_divide: dividend has a nonzero constant term, no divisor-multiple can match it", 0);
  }
  auto keys = subsets_of_size(static_cast<int>(vars.size()), k - 1);
  std::vector<IndexSet> theta_keys;
  for (IndexSet s : keys) {
    std::vector<int> idx;
    for (int i : set_indices(s)) idx.push_back(vars[static_cast<std::size_t>(i)]);
    theta_keys.push_back(index_set(idx));
  }
  for (int m = 0; m < max_degree; ++m) {
    DiffForm residual =
        beta.homogeneous_component(m + 1) - wedge(alpha, out.theta, m + 1).homogeneous_component(m + 1);
    if (residual.is_zero()) continue;
    ImageSystem<Kind::Form> sys("derham_divide", m + 1);
    struct Unknown {
      IndexSet key;
      Monomial mono;
    };
    std::vector<Unknown> unknowns;
    for (IndexSet key : theta_keys) {
      for (const Monomial& mm : monomials_of_degree(n, m)) {
        DiffForm e(n, k - 1);
        e.add(key, mono(mm));
        sys.add(wedge(a1, e));
        unknowns.push_back({key, mm});
      }
    }
    RatVector u = sys.solve(residual, out.report);
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
      if (u[i] != 0) out.theta.add(unknowns[i].key, Poly::term(unknowns[i].mono, u[i]));
    }
  }
  if (!(beta - wedge(alpha, out.theta, max_degree)).truncated(max_degree).is_zero()) {
    throw SolveError("derham_divide: residual does not vanish", max_degree);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Type 1

Decomposition formal_decompose_type1(const DiffForm& w, int max_degree) {
  check_degree(max_degree);
  int n = w.nvars();
  int p = w.grade();
  check_co_order(n, p);
  Decomposition out;
  if (p == 1) {
    out.alpha = w.truncated(max_degree);
    return out;
  }
  LinearFrame frame = linear_frame(w, NormalType::Type1);
  RatMatrix tinv = *inverse(frame.change);
  DiffForm wv = pullback_form(w, FormalMap::linear(tinv), max_degree);
  IndexSet head = full_set(p - 1);
  std::vector<int> yvars = range(p - 1, n);

  DiffForm alpha(n, 1);
  std::vector<DiffForm> betas(static_cast<std::size_t>(p - 1), DiffForm(n, 2));
  for (const auto& [key, c] : wv.comps()) {
    IndexSet h = key & head;
    IndexSet rest = key & ~head;
    if (h == head) {
      alpha.add(rest, c);
      continue;
    }
    if (set_size(h) != p - 2) continue;  // fixed by the product expansion
    int missing = set_indices(head & ~h).front();
    betas[static_cast<std::size_t>(missing)].add(rest, c * Rational(wedge_sign(h, rest)));
  }
  DiffForm product = DiffForm::scalar(Poly::constant(n, 1));
  for (int j = 0; j < p - 1; ++j) {
    Division div = derham_divide(alpha, betas[static_cast<std::size_t>(j)], yvars, max_degree);
    out.report.append(div.report);
    // Moving theta_j into slot j of dx_1 ^ ... ^ dx_{p-1} ^ alpha costs (-1)^{p-j} (1-based j).
    int sign = (p - (j + 1)) % 2 == 0 ? 1 : -1;
    DiffForm gamma = DiffForm::basis(n, {j}) + Rational(sign) * div.theta;
    product = wedge(product, gamma, max_degree);
    out.gammas.push_back(gamma);
  }
  if (!(wedge(product, alpha, max_degree) - wv).truncated(max_degree).is_zero()) {
    throw SolveError("decomposition residual does not vanish", max_degree);
  }
  FormalMap back = FormalMap::linear(frame.change);
  for (auto& g : out.gammas) g = pullback_form(g, back, kExact);
  out.alpha = pullback_form(alpha, back, kExact);
  return out;
}

Type1Linearization formal_linearize_type1(const DiffForm& w, int max_degree) {
  check_degree(max_degree);
  int n = w.nvars();
  int p = w.grade();
  int q = n - p;
  check_co_order(n, p);
  int N = max_degree;
  LinearFrame frame = linear_frame(w, NormalType::Type1);
  const NormalForm& nf = frame.nf;
  if (nf.r != q || nf.s != 0) {
    throw PreconditionError("linear part is a degenerate Type 1 form (r = " + std::to_string(nf.r) +
                            ", s = " + std::to_string(nf.s) + ")");
  }
  Type1Linearization out;
  out.normal_form = nf;
  FormalMap total = FormalMap::linear(*inverse(frame.change));
  DiffForm cur = pullback_form(w, total, N);
  IndexSet head = full_set(p - 1);
  std::vector<int> yvars = range(p - 1, n);
  DiffForm alpha1(n, 1);
  for (int k = 0; k <= q; ++k) {
    alpha1.add(bit(p - 1 + k), Poly::variable(n, p - 1 + k) * nf.diag[static_cast<std::size_t>(k)]);
  }
  auto off_head = [head](IndexSet key) { return (key & head) != head; };

  // Stage 1: shifts of x_1..x_{p-1} make every term divisible by dx_1^...^dx_{p-1}.
  for (int d = 2; d <= N && p > 1; ++d) {
    DiffForm rhs = -keep_keys(cur.homogeneous_component(d), off_head);
    if (rhs.is_zero()) continue;
    ImageSystem<Kind::Form> sys("type1_divisibility", d);
    auto monos = monomials_of_degree(n, d);
    for (int k = 0; k < p - 1; ++k) {
      for (const Monomial& m : monos) {
        DiffForm img = DiffForm::scalar(Poly::constant(n, 1));
        for (int i = 0; i < p - 1; ++i) {
          img = wedge(img, i == k ? differential(mono(m)) : DiffForm::basis(n, {i}));
        }
        sys.add(wedge(img, alpha1));
      }
    }
    RatVector u = sys.solve(rhs, out.report, off_head);
    std::vector<Poly> shifts(static_cast<std::size_t>(n), Poly(n));
    std::size_t col = 0;
    for (int k = 0; k < p - 1; ++k) {
      for (const Monomial& m : monos) {
        if (u[col] != 0) shifts[static_cast<std::size_t>(k)].add_term(m, u[col]);
        ++col;
      }
    }
    FormalMap step = shift_map(n, shifts);
    cur = pullback_form(cur, step, N);
    total = total.compose(step, N + 1);
  }

  // Stage 2: w = dx ^ alpha with alpha integrable in y; normalize alpha to
  // F * alpha1 by changes y -> y + h(x, y).
  Poly f = Poly::constant(n, 1);
  for (int d = 2; d <= N; ++d) {
    DiffForm a(n, 1);
    for (int j : yvars) a.add(bit(j), cur.coeff(head | bit(j)).homogeneous_component(d));
    if (a.is_zero()) continue;
    ImageSystem<Kind::Form> sys("type1_multiplier", d);
    auto f_monos = monomials_of_degree(n, d - 1);
    std::vector<Monomial> g_monos;
    for (const Monomial& m : monomials_of_degree(n, d + 1)) {
      bool has_y = false;
      for (int j : yvars) has_y = has_y || m[j] > 0;
      if (has_y) g_monos.push_back(m);
    }
    for (const Monomial& m : f_monos) sys.add(-(mono(m) * alpha1));
    for (const Monomial& m : g_monos) {
      DiffForm dg(n, 1);
      for (int j : yvars) dg.add(bit(j), mono(m).partial(j));
      sys.add(dg);
    }
    RatVector u = sys.solve(-a, out.report);
    std::size_t col = 0;
    for (const Monomial& m : f_monos) {
      if (u[col] != 0) f.add_term(m, u[col]);
      ++col;
    }
    // G = sum_j d_j y_j h_j: each monomial of G goes to its first y variable.
    std::vector<Poly> shifts(static_cast<std::size_t>(n), Poly(n));
    for (const Monomial& m : g_monos) {
      Rational c = u[col++];
      if (c == 0) continue;
      int j = p - 1;
      while (m[j] == 0) ++j;
      Monomial r = m;
      r.set(j, m[j] - 1);
      shifts[static_cast<std::size_t>(j)].add_term(r, c / nf.diag[static_cast<std::size_t>(j - (p - 1))]);
    }
    FormalMap step = shift_map(n, shifts);
    cur = pullback_form(cur, step, N);
    total = total.compose(step, N + 1);
  }

  out.multiplier = f.truncated(N - 1);
  out.map = total.truncated(N + 1);
  DiffForm lhs = pullback_form(w, out.map, N);
  if (!(lhs - nf.form.mul_trunc(out.multiplier, N)).truncated(N).is_zero()) {
    throw SolveError("Type 1 linearization residual does not vanish", N);
  }
  return out;
}

MultiplierRemoval remove_multiplier(const Poly& f, const NormalForm& nf, int max_degree) {
  check_degree(max_degree);
  if (nf.type != NormalType::Type1 || nf.r != nf.q || nf.s != 0) {
    throw PreconditionError("multiplier removal needs a nondegenerate Type 1 normal form");
  }
  int n = nf.n;
  int q = nf.q;
  int p = n - q;
  int N = max_degree;
  if (f.nvars() != n) throw std::invalid_argument("multiplier variable count differs from the normal form");
  Rational c = f.constant_term();
  if (c == 0) throw PreconditionError("multiplier vanishes at the origin");
  const Multivector& p1 = nf.tensor;
  MultiplierRemoval out;
  out.constant = c;

  // Scaling y -> s_i g y_i multiplies c P1 by c * sigma * g^(q-1).
  int k = q - 1;
  Rational mag = c < 0 ? Rational(-c) : c;
  Integer num_root;
  Integer den_root;
  bool exact = integer_root(mag.get_num(), static_cast<unsigned long>(k), num_root) &&
               integer_root(mag.get_den(), static_cast<unsigned long>(k), den_root);
  RatVector scale(static_cast<std::size_t>(n), Rational(1));
  Rational g = 1;
  if (exact) {
    g = Rational(den_root, num_root);
    g.canonicalize();
  } else {
    out.exact_scale = false;
    out.root = "(" + mag.get_str() + ")^(-1/" + std::to_string(k) + ")";
    out.numeric_scale = std::pow(mag.get_d(), -1.0 / k);
  }
  for (int j = p - 1; j < n; ++j) scale[static_cast<std::size_t>(j)] = g;
  if (c < 0) scale[static_cast<std::size_t>(p - 1)] = -scale[static_cast<std::size_t>(p - 1)];
  FormalMap total = FormalMap::linear(RatMatrix::diagonal(scale));
  Rational target = exact ? Rational(1) : mag;

  Multivector cur = pushforward_tensor(p1.mul_trunc(f, N), total, N);
  auto h = extract_multiplier(cur, p1, N);
  if (!h) throw SolveError("scaled tensor is not a multiple of the normal form", 0);
  if (!exact) *h = *h * (1 / mag);

  for (int r = 1; r <= N - 1; ++r) {
    Poly hr = h->homogeneous_component(r);
    if (hr.is_zero()) continue;
    ImageSystem<Kind::Vector> sys("multiplier_removal", r);
    auto monos = monomials_of_degree(n, r + 1);
    for (int j = p - 1; j < n; ++j) {
      for (const Monomial& m : monos) sys.add(lie_derivative(Multivector::basis(n, {j}, mono(m)), p1));
    }
    RatVector u = sys.solve(p1.mul_trunc(hr, kExact), out.report);
    Multivector x(n, 1);
    std::size_t col = 0;
    for (int j = p - 1; j < n; ++j) {
      Poly comp(n);
      for (const Monomial& m : monos) {
        if (u[col] != 0) comp.add_term(m, u[col]);
        ++col;
      }
      x.add(bit(j), comp);
    }
    if (lie_derivative(x, p1) != p1.mul_trunc(hr, kExact)) {
      throw SolveError("Lie derivative identity fails for the solved field", r);
    }
    out.fields.push_back(x);
    out.targets.push_back(hr);
    FormalMap step = flow_map(x, N + 1);
    cur = pushforward_tensor(cur, step, N);
    total = step.compose(total, N + 1);
    h = extract_multiplier(cur, p1, N);
    if (!h) throw SolveError("transformed tensor is no longer a multiple of the normal form", r);
    if (!exact) *h = *h * (1 / mag);
  }
  out.map = total;
  Multivector check = pushforward_tensor(p1.mul_trunc(f, N), total, N);
  if (!(check - target * p1).truncated(N).is_zero()) {
    throw SolveError("multiplier removal residual does not vanish", N);
  }
  return out;
}

TensorLinearization linearize_type1_tensor(const Multivector& p, int max_degree) {
  check_degree(max_degree);
  int n = p.nvars();
  int N = max_degree;
  if (p.grade() < 3) {
    throw PreconditionError("tensor order q = " + std::to_string(p.grade()) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  DiffForm w = tensor_to_form(p, standard_volume(n));
  Type1Linearization lin = formal_linearize_type1(w, N);
  FormalMap psi = formal_inverse(lin.map, N + 1);
  Multivector pa = pushforward_tensor(p, psi, N);
  const Multivector& p1 = lin.normal_form.tensor;
  auto g = extract_multiplier(pa, p1, N);
  if (!g) throw SolveError("pushed-forward tensor is not a multiple of the normal form", N);
  MultiplierRemoval rm = remove_multiplier(*g, lin.normal_form, N);
  TensorLinearization out;
  out.map = rm.map.compose(psi, N + 1);
  out.result = pushforward_tensor(p, out.map, N);
  out.linear = p1;
  Rational residual_scale = rm.constant < 0 ? Rational(-rm.constant) : rm.constant;
  out.multiplier = Poly::constant(n, rm.exact_scale ? Rational(1) : residual_scale);
  out.normal_form = lin.normal_form;
  out.report = lin.report;
  out.report.append(rm.report);
  if (!(out.result - p1.mul_trunc(out.multiplier, N)).truncated(N).is_zero()) {
    throw SolveError("Type 1 tensor linearization residual does not vanish", N);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Type 2

Prelinearization prelinearize_type2(const Multivector& p, int max_degree) {
  check_degree(max_degree);
  int n = p.nvars();
  int q = p.grade();
  int pp = n - q;
  int N = max_degree;
  check_co_order(n, pp);
  DiffForm vol = standard_volume(n);
  DiffForm w = tensor_to_form(p, vol);
  LinearFrame frame = linear_frame(w, NormalType::Type2);
  const NormalForm& nf = frame.nf;
  if (det(nf.matrix) == 0) throw PreconditionError("linear part is a degenerate Type 2 form (singular matrix)");
  if (q == n - 1 && trace(nf.matrix) == 0) {
    throw PreconditionError("q = n - 1 requires a Type 2 matrix with nonzero trace");
  }
  Prelinearization out;
  out.normal_form = nf;
  FormalMap total = FormalMap::linear(*inverse(frame.change));
  DiffForm cur = pullback_form(w, total, N);
  std::vector<int> yvars = range(q - 1, n);
  std::vector<IndexSet> ykeys;
  for (IndexSet s : subsets_of_size(pp + 1, pp)) ykeys.push_back(s << (q - 1));

  Poly f = Poly::constant(n, 1);
  DiffForm omega1 = nf.form;  // y-only factor
  for (int d = 2; d <= N; ++d) {
    DiffForm rhs = -cur.homogeneous_component(d);
    for (int k = 1; k <= d - 2; ++k) {
      rhs += omega1.homogeneous_component(d - k).mul_trunc(f.homogeneous_component(k), kExact);
    }
    if (rhs.is_zero()) continue;
    ImageSystem<Kind::Form> sys("type2_prelinearize", d);
    auto monos = monomials_of_degree(n, d);
    auto f_monos = monomials_of_degree(n, d - 1);
    auto y_monos = monomials_in(n, d, yvars);
    for (int i = 0; i < n; ++i) {
      for (const Monomial& m : monos) sys.add(lie_derivative(Multivector::basis(n, {i}, mono(m)), nf.form));
    }
    for (const Monomial& m : f_monos) sys.add(-(mono(m) * nf.form));
    for (IndexSet key : ykeys) {
      for (const Monomial& m : y_monos) {
        DiffForm e(n, pp);
        e.add(key, -mono(m));
        sys.add(e);
      }
    }
    RatVector u = sys.solve(rhs, out.report);
    std::size_t col = 0;
    std::vector<Poly> shifts(static_cast<std::size_t>(n), Poly(n));
    for (int i = 0; i < n; ++i) {
      for (const Monomial& m : monos) {
        if (u[col] != 0) shifts[static_cast<std::size_t>(i)].add_term(m, u[col]);
        ++col;
      }
    }
    for (const Monomial& m : f_monos) {
      if (u[col] != 0) f.add_term(m, u[col]);
      ++col;
    }
    for (IndexSet key : ykeys) {
      for (const Monomial& m : y_monos) {
        if (u[col] != 0) omega1.add(key, Poly::term(m, u[col]));
        ++col;
      }
    }
    FormalMap step = shift_map(n, shifts);
    cur = pullback_form(cur, step, N);
    total = total.compose(step, N + 1);
  }
  total = total.truncated(N + 1);
  if (!(pullback_form(w, total, N) - omega1.mul_trunc(f, N)).truncated(N).is_zero()) {
    throw SolveError("Type 2 prelinearization residual does not vanish", N);
  }

  out.map = formal_inverse(total, N + 1);
  out.tensor = pushforward_tensor(p, out.map, N);
  Poly jac = jacobian_determinant(total, N);
  out.multiplier = f.mul_trunc(reciprocal_series(jac, N), N - 1);
  Multivector p1 = form_to_tensor(omega1.truncated(N), vol);
  IndexSet head = full_set(q - 1);
  out.field = Multivector(n, 1);
  for (int j : yvars) out.field.add(bit(j), p1.coeff(head | bit(j)));
  if (!(out.tensor - p1.mul_trunc(out.multiplier, N)).truncated(N).is_zero()) {
    throw SolveError("prelinearized tensor does not factor", N);
  }
  for (int i = 0; i < q - 1; ++i) out.frame.push_back(pushforward_tensor(Multivector::basis(n, {i}), total, N));
  return out;
}

ResonanceReport resonance_report(const RatMatrix& b, int max_order, double tol, double c, double eps) {
  if (!b.is_square()) throw std::invalid_argument("resonance analysis needs a square matrix");
  if (max_order < 2) throw std::invalid_argument("maximum order must be at least 2");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  int k = b.rows();
  ResonanceReport rep;
  rep.max_order = max_order;
  rep.tol = tol;
  rep.c = c;
  rep.eps = eps;

  bool upper = true;
  bool lower = true;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i > j && b(i, j) != 0) upper = false;
      if (i < j && b(i, j) != 0) lower = false;
    }
  }
  std::vector<Rational> exact_vals;
  if (upper || lower) {
    for (int i = 0; i < k; ++i) exact_vals.push_back(b(i, i));
    rep.exact = true;
  } else {
    EigenData e = eigen_data(b, tol);
    for (const auto& [v, mult] : e.rational) {
      for (int t = 0; t < mult; ++t) exact_vals.push_back(v);
    }
    rep.exact = e.all_rational();
    for (const auto& z : e.numeric) rep.eigenvalues.push_back(z);
  }
  std::vector<std::complex<double>> lam;
  for (const auto& v : exact_vals) lam.emplace_back(v.get_d(), 0.0);
  lam.insert(lam.end(), rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.eigenvalues = lam;

  for (int order = 2; order <= max_order; ++order) {
    std::vector<std::vector<int>> ms;
    std::vector<int> cur;
    compositions(k, order, cur, ms);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : ms) {
      for (int i = 0; i < k; ++i) {
        double mag;
        bool resonant;
        if (rep.exact) {
          Rational s = -exact_vals[static_cast<std::size_t>(i)];
          for (int j = 0; j < k; ++j) s += m[static_cast<std::size_t>(j)] * exact_vals[static_cast<std::size_t>(j)];
          mag = std::abs(s.get_d());
          resonant = s == 0;
        } else {
          std::complex<double> s = -lam[static_cast<std::size_t>(i)];
          for (int j = 0; j < k; ++j) s += static_cast<double>(m[static_cast<std::size_t>(j)]) * lam[static_cast<std::size_t>(j)];
          mag = std::abs(s);
          resonant = mag <= tol;
        }
        best = std::min(best, mag);
        if (resonant) rep.resonances.push_back(Resonance{i + 1, m});
      }
    }
    double bound = c * std::exp(-std::pow(static_cast<double>(order), 1.0 - eps));
    rep.orders.push_back(BryunoRow{order, best, bound, best > bound});
  }
  return rep;
}

PoincareLinearization poincare_linearize(const Multivector& x, int max_degree, double tol) {
  check_degree(max_degree);
  if (x.grade() != 1) throw std::invalid_argument("Poincare linearization needs a vector field");
  int m = x.nvars();
  int N = max_degree;
  if (!x.homogeneous_component(0).is_zero()) throw PreconditionError("vector field does not vanish at the origin");
  PoincareLinearization out;
  out.linear = RatMatrix(m, m);
  for (int j = 0; j < m; ++j) {
    Poly c = x.coeff(bit(j));
    for (int i = 0; i < m; ++i) out.linear(j, i) = linear_coeff(c, i);
  }
  if (out.linear == RatMatrix(m, m)) throw PreconditionError("vector field has zero linear part");
  out.resonance = resonance_report(out.linear, N, tol);
  if (!out.resonance.resonances.empty()) throw ResonanceError(out.resonance);

  Multivector xlin = x.homogeneous_component(1);
  Multivector cur = x.truncated(N);
  FormalMap total = FormalMap::identity(m, N + 1);
  for (int d = 2; d <= N; ++d) {
    Multivector comp = cur.homogeneous_component(d);
    if (comp.is_zero()) continue;
    ImageSystem<Kind::Vector> sys("poincare", d);
    auto monos = monomials_of_degree(m, d);
    for (int j = 0; j < m; ++j) {
      for (const Monomial& mm : monos) sys.add(lie_bracket(xlin, Multivector::basis(m, {j}, mono(mm))));
    }
    RatVector u = sys.solve(-comp, out.report);
    std::vector<Poly> shifts(static_cast<std::size_t>(m), Poly(m));
    std::size_t col = 0;
    for (int j = 0; j < m; ++j) {
      for (const Monomial& mm : monos) {
        if (u[col] != 0) shifts[static_cast<std::size_t>(j)].add_term(mm, u[col]);
        ++col;
      }
    }
    FormalMap step = shift_map(m, shifts);
    cur = pushforward_tensor(cur, step, N);
    total = step.compose(total, N + 1);
  }
  out.map = total;
  if (!(pushforward_tensor(x, total, N) - xlin).truncated(N).is_zero()) {
    throw SolveError("Poincare linearization residual does not vanish", N);
  }
  return out;
}

Type2Linearization linearize_type2(const Multivector& p, int max_degree, double tol) {
  int N = max_degree;
  Type2Linearization out;
  out.pre = prelinearize_type2(p, N);
  int n = p.nvars();
  int q = p.grade();
  int m = n - q + 1;
  std::vector<int> to_y(static_cast<std::size_t>(n), -1);
  std::vector<int> to_full(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    to_y[static_cast<std::size_t>(q - 1 + j)] = j;
    to_full[static_cast<std::size_t>(j)] = q - 1 + j;
  }
  Multivector xy(m, 1);
  for (int j = 0; j < m; ++j) xy.add(bit(j), remap(out.pre.field.coeff(bit(q - 1 + j)), m, to_y));
  out.poincare = poincare_linearize(xy, N, tol);

  std::vector<Poly> comps;
  for (int i = 0; i < q - 1; ++i) comps.push_back(Poly::variable(n, i));
  for (int j = 0; j < m; ++j) comps.push_back(remap(out.poincare.map.component(j), n, to_full));
  FormalMap embed(std::move(comps), N + 1);
  out.map = embed.compose(out.pre.map, N + 1);
  out.result = pushforward_tensor(p, out.map, N);
  out.linear = type2_normal_form(n, q, out.poincare.linear).tensor;
  FormalMap embed_inv = formal_inverse(embed, N);
  out.multiplier = embed_inv.substitute(out.pre.multiplier, N - 1);
  if (!(out.result - out.linear.mul_trunc(out.multiplier, N)).truncated(N).is_zero()) {
    throw SolveError("Type 2 linearization residual does not vanish", N);
  }
  return out;
}

}  // namespace nambu
