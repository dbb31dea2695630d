#include "nambu/linclass.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "nambu/errors.hpp"

namespace nambu {

namespace {

template <Kind K>
bool linear_impl(const Field<K>& f) {
  for (const auto& [key, c] : f.comps()) {
    (void)key;
    if (c.degree() != 1 || c.low_degree() != 1) return false;
  }
  return true;
}

RatMatrix rows_matrix(const std::vector<RatVector>& rows, int ncols) {
  RatMatrix m(static_cast<int>(rows.size()), ncols);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < ncols; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

std::vector<RatVector> matrix_rows(const RatMatrix& m) {
  std::vector<RatVector> out;
  for (int i = 0; i < m.rows(); ++i) out.push_back(m.row(i));
  return out;
}

// Canonical row basis of the sum of row spaces.
RatMatrix span_sum(const std::vector<RatVector>& rows, int n) {
  return rows_matrix(row_space_basis(rows_matrix(rows, n)), n);
}

// Row space intersection through annihilators: U n W = ann(ann U + ann W).
RatMatrix span_intersection(const RatMatrix& a, const RatMatrix& b) {
  int n = a.cols();
  std::vector<RatVector> ann = kernel(a);
  for (auto& v : kernel(b)) ann.push_back(std::move(v));
  return span_sum(kernel(rows_matrix(ann, n)), n);
}

// Appends unit covectors e_k (ascending k) that enlarge the span until it
// reaches `target` rows.
std::vector<RatVector> complete_with_units(std::vector<RatVector> rows, int n, int target) {
  int have = rank(rows_matrix(rows, n));
  for (int k = 0; k < n && have < target; ++k) {
    RatVector e(static_cast<std::size_t>(n), Rational(0));
    e[static_cast<std::size_t>(k)] = 1;
    rows.push_back(e);
    int next = rank(rows_matrix(rows, n));
    if (next > have) {
      have = next;
    } else {
      rows.pop_back();
    }
  }
  return rows;
}

// Unit covectors not in the span of `rows`, ascending.
std::vector<RatVector> unit_complement(const std::vector<RatVector>& rows, int n) {
  std::vector<RatVector> all = complete_with_units(rows, n, n);
  return std::vector<RatVector>(all.begin() + static_cast<std::ptrdiff_t>(rows.size()), all.end());
}

Rational linear_coeff(const Poly& c, int var) { return c.coeff(Monomial::unit(c.nvars(), var)); }

// Matrix whose row j lists the constant form w_j over the grade-p keys.
RatMatrix coefficient_matrix(const DiffForm& w) {
  int n = w.nvars();
  auto keys = subsets_of_size(n, w.grade());
  RatMatrix m(n, static_cast<int>(keys.size()));
  for (std::size_t k = 0; k < keys.size(); ++k) {
    Poly c = w.coeff(keys[k]);
    for (int j = 0; j < n; ++j) m(j, static_cast<int>(k)) = linear_coeff(c, j);
  }
  return m;
}

DiffForm in_new_coordinates(const DiffForm& w, const RatMatrix& t) {
  // v = T x, so x = T^{-1} v and w expressed in v is the pullback along T^{-1}.
  auto tinv = inverse(t);
  if (!tinv) throw std::logic_error("coordinate change is singular");
  return pullback_form(w, FormalMap::linear(*tinv), kExact);
}

void verify_round_trip(const DiffForm& input, const NormalForm& nf, const RatMatrix& change) {
  if (pullback_form(nf.form, FormalMap::linear(change), kExact) != input) {
    throw std::logic_error("internal error: normal form does not pull back to the input");
  }
}

void check_order(int n, int q) {
  if (q < 3) {
    throw PreconditionError("co-order q = " + std::to_string(q) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  if (q > n - 1) throw PreconditionError("form grade must be at least 1");
}

ClassificationReport type2_report(const DiffForm& w, const SpanTable& table) {
  int n = w.nvars();
  int p = w.grade();
  int q = n - p;
  std::vector<RatVector> rows;
  for (const RatMatrix& e : table.spans) {
    for (auto& r : matrix_rows(e)) rows.push_back(std::move(r));
  }
  RatMatrix coeffs = coefficient_matrix(w);
  for (int k = 0; k < coeffs.cols(); ++k) rows.push_back(coeffs.col(k));
  std::vector<RatVector> block = row_space_basis(rows_matrix(rows, n));
  if (static_cast<int>(block.size()) > p + 1) {
    throw std::logic_error("internal error: Type 2 support exceeds p + 1 covectors");
  }
  block = complete_with_units(block, n, p + 1);
  std::vector<RatVector> t_rows = unit_complement(block, n);
  for (auto& r : block) t_rows.push_back(std::move(r));
  RatMatrix t = rows_matrix(t_rows, n);

  DiffForm wy = in_new_coordinates(w, t);
  Multivector py = form_to_tensor(wy, standard_volume(n));
  IndexSet head = full_set(q - 1);
  RatMatrix m(p + 1, p + 1);
  for (const auto& [key, c] : py.comps()) {
    if ((key & head) != head) throw std::logic_error("internal error: Type 2 tensor lacks the constant factor");
    int j = set_indices(key & ~head).front() - (q - 1);
    for (int i = 0; i < q - 1; ++i) {
      if (linear_coeff(c, i) != 0) throw std::logic_error("internal error: Type 2 field depends on x1..x_{q-1}");
    }
    for (int i = 0; i <= p; ++i) m(j, i) = linear_coeff(c, q - 1 + i);
  }
  ClassificationReport rep;
  rep.normal_form = type2_normal_form(n, q, m);
  verify_round_trip(w, rep.normal_form, t);
  rep.change = FormalMap::linear(t);
  return rep;
}

// Case 1 of the construction: the spans share p-1 covectors. Returns nullopt
// when the reduced 1-form is not closed in the remaining variables.
std::optional<ClassificationReport> type1_report(const DiffForm& w, const RatMatrix& common) {
  int n = w.nvars();
  int p = w.grade();
  int q = n - p;
  int k0 = p - 1;      // number of parameter coordinates
  int m = n - k0;      // size of the quadratic block, q + 1
  std::vector<RatVector> t_rows;
  for (int i = 0; i < k0; ++i) t_rows.push_back(common.row(i));
  t_rows = complete_with_units(t_rows, n, n);
  RatMatrix t1 = rows_matrix(t_rows, n);

  // In y = T1 x: w = dy_1 ^ ... ^ dy_{p-1} ^ alpha.
  DiffForm wy = in_new_coordinates(w, t1);
  IndexSet head = full_set(k0);
  RatMatrix a(k0, m);  // a(i, j): coefficient of y_i in alpha_{k0 + j}
  RatMatrix qm(m, m);  // qm(j, k): coefficient of y_{k0 + k} in alpha_{k0 + j}
  for (const auto& [key, c] : wy.comps()) {
    if ((key & head) != head) throw std::logic_error("internal error: common factor missing from a component");
    int j = set_indices(key & ~head).front() - k0;
    for (int i = 0; i < k0; ++i) a(i, j) = linear_coeff(c, i);
    for (int k = 0; k < m; ++k) qm(j, k) = linear_coeff(c, k0 + k);
  }
  if (!qm.is_symmetric()) return std::nullopt;

  // Diagonalize the quadratic part, nonzero entries first.
  Inertia in = inertia(qm);
  std::vector<int> order;
  for (int k = 0; k < m; ++k) {
    if (in.diagonal[static_cast<std::size_t>(k)] != 0) order.push_back(k);
  }
  int rank_q = static_cast<int>(order.size());
  for (int k = 0; k < m; ++k) {
    if (in.diagonal[static_cast<std::size_t>(k)] == 0) order.push_back(k);
  }
  RatMatrix c(m, m);
  RatVector d(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    int src = order[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(k)] = in.diagonal[static_cast<std::size_t>(src)];
    for (int j = 0; j < m; ++j) c(j, k) = in.congruence(j, src);
  }
  RatMatrix cinv = *inverse(c);
  RatMatrix pm = a * c;  // parameter couplings y_i dz_k

  // Normalize the couplings with the null directions: R * B * K = diag(I_s, 0).
  int rest = m - rank_q;
  RatMatrix b(k0, rest);
  for (int i = 0; i < k0; ++i) {
    for (int k = 0; k < rest; ++k) b(i, k) = pm(i, rank_q + k);
  }
  RowReduction red = row_reduce(b);
  RatMatrix rmat = red.transform;
  int s = static_cast<int>(red.pivots.size());
  RatMatrix kmat(rest, rest);
  {
    int col = 0;
    for (int piv : red.pivots) kmat(piv, col++) = 1;
    for (const RatVector& v : kernel(red.echelon)) {
      for (int i = 0; i < rest; ++i) kmat(i, col) = v[static_cast<std::size_t>(i)];
      ++col;
    }
  }
  Rational scale = k0 > 0 ? det(rmat) : Rational(1);
  if (scale < 0) {
    for (int j = 0; j < k0; ++j) rmat(k0 - 1, j) = -rmat(k0 - 1, j);
    if (k0 - 1 < s) {
      for (int i = 0; i < rest; ++i) kmat(i, k0 - 1) = -kmat(i, k0 - 1);
    }
    scale = -scale;
  }
  RatMatrix kinv = *inverse(kmat);

  // Assemble v = V y.
  RatMatrix v(n, n);
  if (k0 > 0) {
    RatMatrix rinvt = inverse(rmat)->transpose();
    for (int i = 0; i < k0; ++i) {
      for (int j = 0; j < k0; ++j) v(i, j) = rinvt(i, j);
    }
  }
  for (int k = 0; k < rank_q; ++k) {
    for (int j = 0; j < m; ++j) v(k0 + k, k0 + j) = cinv(k, j);
    Rational inv_d = 1 / d[static_cast<std::size_t>(k)];
    for (int i = 0; i < k0; ++i) v(k0 + k, i) = inv_d * pm(i, k);
  }
  for (int l = 0; l < rest; ++l) {
    Rational f = l < s ? scale : Rational(1);
    for (int t = 0; t < rest; ++t) {
      if (kinv(l, t) == 0) continue;
      for (int j = 0; j < m; ++j) v(k0 + rank_q + l, k0 + j) += f * kinv(l, t) * cinv(rank_q + t, j);
    }
  }
  RatVector diag(d.begin(), d.begin() + rank_q);
  for (auto& x : diag) x *= scale;

  ClassificationReport rep;
  rep.normal_form = type1_normal_form(n, q, rank_q - 1, s, diag);
  RatMatrix total = v * t1;
  verify_round_trip(w, rep.normal_form, total);
  rep.change = FormalMap::linear(total);
  rep.route = "1a";
  return rep;
}

}  // namespace

bool is_linear_field(const DiffForm& w) { return linear_impl(w); }
bool is_linear_field(const Multivector& p) { return linear_impl(p); }

SpanTable span_table(const DiffForm& w) {
  if (!is_linear_field(w)) throw PreconditionError("classification needs a linear form");
  int n = w.nvars();
  int p = w.grade();
  SpanTable table{n, p, {}};
  auto a_sets = subsets_of_size(n, p - 1);
  for (int j = 0; j < n; ++j) {
    std::vector<RatVector> rows;
    for (IndexSet a : a_sets) {
      RatVector row(static_cast<std::size_t>(n), Rational(0));
      bool any = false;
      for (const auto& [key, c] : w.comps()) {
        if ((key & a) != a) continue;
        Rational v = linear_coeff(c, j);
        if (v == 0) continue;
        int k = set_indices(key & ~a).front();
        row[static_cast<std::size_t>(k)] += interior_sign(a, key) * v;
        any = true;
      }
      if (any) rows.push_back(std::move(row));
    }
    table.spans.push_back(span_sum(rows, n));
  }
  return table;
}

std::vector<int> NormalForm::signs() const {
  std::vector<int> out;
  for (const auto& x : diag) out.push_back(sign(x));
  return out;
}

NormalForm type1_normal_form(int n, int q, int r, int s, const RatVector& diag) {
  int p = n - q;
  if (p < 1 || q < 1) throw std::invalid_argument("need 1 <= q <= n - 1");
  if (r < -1 || r > q) throw std::invalid_argument("r must lie in [-1, q]");
  if (s < 0 || s > std::min(p - 1, q - r)) throw std::invalid_argument("s must lie in [0, min(p - 1, q - r)]");
  if (static_cast<int>(diag.size()) != r + 1) throw std::invalid_argument("need r + 1 diagonal entries");
  for (const auto& x : diag) {
    if (x == 0) throw std::invalid_argument("diagonal entries must be nonzero");
  }
  DiffForm alpha(n, 1);
  for (int k = 0; k <= r; ++k) {
    int var = p - 1 + k;
    alpha.add(IndexSet{1} << var, Poly::variable(n, var) * diag[static_cast<std::size_t>(k)]);
  }
  for (int l = 0; l < s; ++l) alpha.add(IndexSet{1} << (p + r + l), Poly::variable(n, l));
  std::vector<int> head;
  for (int i = 0; i < p - 1; ++i) head.push_back(i);
  NormalForm nf;
  nf.type = NormalType::Type1;
  nf.n = n;
  nf.q = q;
  nf.r = r;
  nf.s = s;
  nf.diag = diag;
  nf.form = wedge(DiffForm::basis(n, head), alpha);
  nf.tensor = form_to_tensor(nf.form, standard_volume(n));
  return nf;
}

NormalForm type1_normal_form(int n, int q, int r, int s, const std::vector<int>& signs) {
  RatVector diag;
  for (int e : signs) {
    if (e != 1 && e != -1) throw std::invalid_argument("signs must be +1 or -1");
    diag.emplace_back(e);
  }
  return type1_normal_form(n, q, r, s, diag);
}

NormalForm type2_normal_form(int n, int q, const RatMatrix& m) {
  int p = n - q;
  if (p < 1 || q < 1) throw std::invalid_argument("need 1 <= q <= n - 1");
  if (m.rows() != p + 1 || m.cols() != p + 1) {
    throw std::invalid_argument("Type 2 matrix must be " + std::to_string(p + 1) + "x" + std::to_string(p + 1));
  }
  Multivector y(n, 1);
  for (int j = 0; j <= p; ++j) {
    Poly c(n);
    for (int i = 0; i <= p; ++i) c += Poly::variable(n, q - 1 + i) * m(j, i);
    y.add(IndexSet{1} << (q - 1 + j), c);
  }
  std::vector<int> head;
  for (int i = 0; i < q - 1; ++i) head.push_back(i);
  NormalForm nf;
  nf.type = NormalType::Type2;
  nf.n = n;
  nf.q = q;
  nf.matrix = m;
  nf.tensor = wedge(Multivector::basis(n, head), y);
  nf.form = tensor_to_form(nf.tensor, standard_volume(n));
  return nf;
}

void fill_invariants(ClassificationReport& rep, double tol) {
  const NormalForm& nf = rep.normal_form;
  if (nf.type == NormalType::Type1) {
    rep.n_plus = 0;
    rep.n_minus = 0;
    for (const auto& x : nf.diag) (x > 0 ? rep.n_plus : rep.n_minus)++;
    rep.signature = std::abs(rep.n_plus - rep.n_minus);
    rep.nondegenerate = nf.r == nf.q && nf.s == 0;
    rep.elliptic = rep.nondegenerate && (rep.n_plus == 0 || rep.n_minus == 0);
    if (rep.nondegenerate) {
      int a = rep.n_minus;
      int b = nf.q + 1 - rep.n_minus;
      rep.index = std::array<int, 2>{std::min(a, b), std::max(a, b)};
    } else {
      rep.index.reset();
    }
  } else {
    rep.nondegenerate = det(nf.matrix) != 0;
    rep.eigen = eigen_data(nf.matrix, tol);
    rep.jordan = rational_jordan(nf.matrix, tol);
  }
  rep.zero_set_dim = nf.n - rank(coefficient_matrix(nf.form));
}

ClassificationReport classify_linear(const DiffForm& w, double tol) {
  int n = w.nvars();
  int p = w.grade();
  check_order(n, n - p);
  if (!is_linear_field(w)) throw PreconditionError("classification needs a form with linear coefficients");
  ConambuVerdict verdict = is_conambu(w);
  if (!verdict.passed) throw NotConambuError(*verdict.witness);

  ClassificationReport rep;
  if (w.is_zero()) {
    rep.normal_form = type1_normal_form(n, n - p, -1, 0, RatVector{});
    rep.change = FormalMap::linear(RatMatrix::identity(n));
    rep.route = "1a";
    fill_invariants(rep, tol);
    return rep;
  }

  SpanTable table = span_table(w);
  std::vector<int> nonzero;
  for (int j = 0; j < n; ++j) {
    if (!table.is_zero(j)) nonzero.push_back(j);
  }
  RatMatrix common = table.spans[static_cast<std::size_t>(nonzero.front())];
  for (int j : nonzero) common = span_intersection(common, table.spans[static_cast<std::size_t>(j)]);

  if (common.rows() >= p - 1) {
    if (auto r = type1_report(w, common)) {
      rep = std::move(*r);
    } else {
      rep = type2_report(w, table);
      rep.route = "1b";
    }
  } else {
    rep = type2_report(w, table);
    rep.route = "2";
    for (std::size_t a = 0; a < nonzero.size() && !rep.case2_triple; ++a) {
      for (std::size_t b = a + 1; b < nonzero.size() && !rep.case2_triple; ++b) {
        RatMatrix ab = span_intersection(table.spans[static_cast<std::size_t>(nonzero[a])],
                                         table.spans[static_cast<std::size_t>(nonzero[b])]);
        for (std::size_t c = b + 1; c < nonzero.size(); ++c) {
          if (span_intersection(ab, table.spans[static_cast<std::size_t>(nonzero[c])]).rows() < p - 1) {
            rep.case2_triple = std::array<int, 3>{nonzero[a], nonzero[b], nonzero[c]};
            break;
          }
        }
      }
    }
  }
  fill_invariants(rep, tol);
  return rep;
}

ClassificationReport classify_linear_tensor(const Multivector& p, const DiffForm& vol, double tol) {
  if (p.grade() < 3) {
    throw PreconditionError("tensor order q = " + std::to_string(p.grade()) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  if (!is_linear_field(p)) throw PreconditionError("classification needs a tensor with linear coefficients");
  return classify_linear(tensor_to_form(p, vol), tol);
}

}  // namespace nambu
