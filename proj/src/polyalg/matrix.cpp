#include "nambu/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nambu {

RatMatrix::RatMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Rational(0));
}

RatMatrix RatMatrix::identity(int n) {
  RatMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::from_rows(const std::vector<RatVector>& rows) {
  int r = static_cast<int>(rows.size());
  int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
  RatMatrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c) {
      throw std::invalid_argument("ragged matrix rows");
    }
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

RatMatrix RatMatrix::diagonal(const RatVector& d) {
  int n = static_cast<int>(d.size());
  RatMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

bool RatMatrix::is_symmetric() const {
  if (!is_square()) return false;
  for (int i = 0; i < rows_; ++i) {
    for (int j = i + 1; j < cols_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

RatVector RatMatrix::row(int i) const {
  return RatVector(data_.begin() + static_cast<std::ptrdiff_t>(index(i, 0)),
                   data_.begin() + static_cast<std::ptrdiff_t>(index(i, 0) + static_cast<std::size_t>(cols_)));
}

RatVector RatMatrix::col(int j) const {
  RatVector v;
  for (int i = 0; i < rows_; ++i) v.push_back((*this)(i, j));
  return v;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

RatVector RatMatrix::apply(const RatVector& v) const {
  if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("matrix-vector dimension mismatch");
  RatVector out(static_cast<std::size_t>(rows_), Rational(0));
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      if ((*this)(i, j) != 0) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product dimension mismatch");
  RatMatrix c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i) {
    for (int k = 0; k < a.cols_; ++k) {
      const Rational& aik = a(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

RatMatrix operator+(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix sum dimension mismatch");
  RatMatrix c(a);
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix difference dimension mismatch");
  RatMatrix c(a);
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

RatMatrix operator*(const Rational& s, const RatMatrix& a) {
  RatMatrix c(a);
  for (auto& v : c.data_) v *= s;
  return c;
}

std::string RatMatrix::to_string() const {
  std::string out = "[";
  for (int i = 0; i < rows_; ++i) {
    if (i) out += ',';
    out += '[';
    for (int j = 0; j < cols_; ++j) {
      if (j) out += ',';
      out += (*this)(i, j).get_str();
    }
    out += ']';
  }
  return out + "]";
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(RatMatrix& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i) {
      if (m(i, c) != 0) {
        p = i;
        break;
      }
    }
    if (p < 0) continue;
    if (p != r) {
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    }
    Rational inv = 1 / m(r, c);
    for (int j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rational f = m(i, c);
      for (int j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

int rank(const RatMatrix& m) {
  RatMatrix w(m);
  return static_cast<int>(rref(w).size());
}

Rational det(const RatMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("determinant of a non-square matrix");
  RatMatrix w(m);
  int n = m.rows();
  Rational d = 1;
  for (int c = 0; c < n; ++c) {
    int p = -1;
    for (int i = c; i < n; ++i) {
      if (w(i, c) != 0) {
        p = i;
        break;
      }
    }
    if (p < 0) return 0;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(w(p, j), w(c, j));
      d = -d;
    }
    d *= w(c, c);
    for (int i = c + 1; i < n; ++i) {
      if (w(i, c) == 0) continue;
      Rational f = w(i, c) / w(c, c);
      for (int j = c; j < n; ++j) w(i, j) -= f * w(c, j);
    }
  }
  return d;
}

std::optional<RatMatrix> inverse(const RatMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("inverse of a non-square matrix");
  int n = m.rows();
  if (n == 0) return RatMatrix(0, 0);
  RatMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  auto piv = rref(aug);
  if (static_cast<int>(piv.size()) < n || piv[static_cast<std::size_t>(n - 1)] != n - 1) return std::nullopt;
  RatMatrix inv(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  }
  return inv;
}

Rational trace(const RatMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("trace of a non-square matrix");
  Rational t = 0;
  for (int i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

std::vector<RatVector> kernel(const RatMatrix& m) {
  RatMatrix w(m);
  auto piv = rref(w);
  std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
  for (int c : piv) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<RatVector> basis;
  for (int f = 0; f < m.cols(); ++f) {
    if (is_pivot[static_cast<std::size_t>(f)]) continue;
    RatVector v(static_cast<std::size_t>(m.cols()), Rational(0));
    v[static_cast<std::size_t>(f)] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) v[static_cast<std::size_t>(piv[r])] = -w(static_cast<int>(r), f);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<RatVector> row_space_basis(const RatMatrix& m) {
  RatMatrix w(m);
  auto piv = rref(w);
  std::vector<RatVector> out;
  for (std::size_t r = 0; r < piv.size(); ++r) out.push_back(w.row(static_cast<int>(r)));
  return out;
}

RowReduction row_reduce(const RatMatrix& m) {
  int r = m.rows(), c = m.cols();
  RatMatrix aug(r, c + r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) aug(i, j) = m(i, j);
    aug(i, c + i) = 1;
  }
  auto piv = rref(aug);
  RowReduction out{RatMatrix(r, c), RatMatrix(r, r), {}};
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) out.echelon(i, j) = aug(i, j);
    for (int j = 0; j < r; ++j) out.transform(i, j) = aug(i, c + j);
  }
  for (int p : piv) {
    if (p < c) out.pivots.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SparseSystem

SparseSystem::SparseSystem(int ncols, bool track_witness) : ncols_(ncols), track_(track_witness) {}

bool SparseSystem::add_row(Row coeffs, Rational rhs) {
  int row_id = rows_added_++;
  if (!consistent_) return false;
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (it->second == 0) {
      it = coeffs.erase(it);
    } else {
      ++it;
    }
  }
  Row combo;
  if (track_) combo[row_id] = 1;
  Rational prod;
  auto it = coeffs.begin();
  while (it != coeffs.end()) {
    auto pit = pivots_.find(it->first);
    if (pit == pivots_.end()) {
      ++it;
      continue;
    }
    int col = it->first;
    Rational f = it->second;
    const Pivot& pv = pit->second;
    for (const auto& [c, v] : pv.coeffs) {
      mpq_mul(prod.get_mpq_t(), f.get_mpq_t(), v.get_mpq_t());
      auto [slot, inserted] = coeffs.try_emplace(c, 0);
      slot->second -= prod;
      if (slot->second == 0 && c != col) coeffs.erase(slot);
    }
    coeffs.erase(col);  // exact cancellation of the pivot column
    rhs -= f * pv.rhs;
    if (track_) {
      for (const auto& [r, v] : pv.combo) {
        auto [slot, inserted] = combo.try_emplace(r, 0);
        slot->second -= f * v;
        if (slot->second == 0) combo.erase(slot);
      }
    }
    it = coeffs.upper_bound(col);
  }
  if (coeffs.empty()) {
    if (rhs != 0) {
      consistent_ = false;
      if (track_) witness_ = std::move(combo);
      return false;
    }
    return true;
  }
  int lead = coeffs.begin()->first;
  if (lead < 0 || lead >= ncols_) throw std::out_of_range("sparse system column out of range");
  Rational inv = 1 / coeffs.begin()->second;
  for (auto& [c, v] : coeffs) v *= inv;
  rhs *= inv;
  if (track_) {
    for (auto& [r, v] : combo) v *= inv;
  }
  pivots_.emplace(lead, Pivot{std::move(coeffs), std::move(rhs), std::move(combo)});
  return true;
}

void SparseSystem::back_substitute(RatVector& x) const {
  Rational prod;
  for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
    const auto& [lead, pv] = *it;
    Rational v = x[static_cast<std::size_t>(lead)];  // rhs seed placed by caller
    for (const auto& [c, a] : pv.coeffs) {
      if (c == lead) continue;
      const Rational& xc = x[static_cast<std::size_t>(c)];
      if (xc == 0) continue;
      mpq_mul(prod.get_mpq_t(), a.get_mpq_t(), xc.get_mpq_t());
      v -= prod;
    }
    x[static_cast<std::size_t>(lead)] = v;
  }
}

RatVector SparseSystem::solve() const {
  if (!consistent_) throw std::logic_error("solve() on an inconsistent system");
  RatVector x(static_cast<std::size_t>(ncols_), Rational(0));
  for (const auto& [lead, pv] : pivots_) x[static_cast<std::size_t>(lead)] = pv.rhs;
  back_substitute(x);
  return x;
}

std::vector<RatVector> SparseSystem::kernel() const {
  std::vector<RatVector> basis;
  for (int f = 0; f < ncols_; ++f) {
    if (pivots_.count(f)) continue;
    RatVector x(static_cast<std::size_t>(ncols_), Rational(0));
    x[static_cast<std::size_t>(f)] = 1;
    back_substitute(x);
    basis.push_back(std::move(x));
  }
  return basis;
}

LinearSolution solve_linear(const RatMatrix& m, const RatVector& b) {
  if (static_cast<int>(b.size()) != m.rows()) throw std::invalid_argument("right-hand side length mismatch");
  SparseSystem sys(m.cols(), true);
  for (int i = 0; i < m.rows(); ++i) {
    SparseSystem::Row row;
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0) row.emplace(j, m(i, j));
    }
    sys.add_row(std::move(row), b[static_cast<std::size_t>(i)]);
  }
  LinearSolution out;
  out.consistent = sys.consistent();
  if (out.consistent) {
    out.solution = sys.solve();
    out.kernel = sys.kernel();
  } else {
    out.witness.assign(static_cast<std::size_t>(m.rows()), Rational(0));
    for (const auto& [r, v] : sys.witness()) out.witness[static_cast<std::size_t>(r)] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric elimination

Inertia inertia(const RatMatrix& s) {
  if (!s.is_symmetric()) throw std::invalid_argument("inertia requires a symmetric matrix");
  int n = s.rows();
  RatMatrix a(s);
  RatMatrix c = RatMatrix::identity(n);
  auto swap_idx = [&](int i, int j) {
    if (i == j) return;
    for (int k = 0; k < n; ++k) std::swap(a(i, k), a(j, k));
    for (int k = 0; k < n; ++k) std::swap(a(k, i), a(k, j));
    for (int k = 0; k < n; ++k) std::swap(c(k, i), c(k, j));
  };
  // Basis change e_i <- e_i + f e_j applied on both sides.
  auto add_idx = [&](int i, int j, const Rational& f) {
    for (int k = 0; k < n; ++k) a(i, k) += f * a(j, k);
    for (int k = 0; k < n; ++k) a(k, i) += f * a(k, j);
    for (int k = 0; k < n; ++k) c(k, i) += f * c(k, j);
  };
  for (int k = 0; k < n; ++k) {
    int p = -1;
    for (int i = k; i < n; ++i) {
      if (a(i, i) != 0) {
        p = i;
        break;
      }
    }
    if (p < 0) {
      int pi = -1, pj = -1;
      for (int i = k; i < n && pi < 0; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (a(i, j) != 0) {
            pi = i;
            pj = j;
            break;
          }
        }
      }
      if (pi < 0) break;  // remaining block is zero
      add_idx(pi, pj, 1);  // new diagonal entry 2 a(pi,pj) != 0
      p = pi;
    }
    swap_idx(k, p);
    for (int i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      add_idx(i, k, -a(i, k) / a(k, k));
    }
  }
  Inertia out;
  out.congruence = c;
  for (int i = 0; i < n; ++i) {
    out.diagonal.push_back(a(i, i));
    int sg = sgn(a(i, i));
    if (sg > 0) {
      ++out.n_plus;
    } else if (sg < 0) {
      ++out.n_minus;
    } else {
      ++out.n_zero;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvalues

UPoly characteristic_polynomial(const RatMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("characteristic polynomial of a non-square matrix");
  int n = m.rows();
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k.
  UPoly c(static_cast<std::size_t>(n + 1), Rational(0));
  c[static_cast<std::size_t>(n)] = 1;
  RatMatrix mk(n, n);
  for (int k = 1; k <= n; ++k) {
    RatMatrix next = m * mk;
    for (int i = 0; i < n; ++i) next(i, i) += c[static_cast<std::size_t>(n - k + 1)];
    mk = std::move(next);
    c[static_cast<std::size_t>(n - k)] = -trace(m * mk) / k;
  }
  trim(c);
  return c;
}

namespace {

// Continued-fraction convergents of x with denominator at most max_den.
std::vector<Rational> convergents(double x, long max_den) {
  std::vector<Rational> out;
  if (!std::isfinite(x) || std::abs(x) > 1e15) return out;
  Integer h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h_{-1}, h_{-2}, ...
  double r = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    Integer ai(a);
    Integer h = ai * h0 + h1;
    Integer k = ai * k0 + k1;
    if (k > max_den) break;
    out.emplace_back(h, k);
    out.back().canonicalize();
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    double frac = r - a;
    if (std::abs(frac) < 1e-14) break;
    r = 1.0 / frac;
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> EigenData::all_numeric() const {
  std::vector<std::complex<double>> out;
  for (const auto& [v, mult] : rational) {
    for (int k = 0; k < mult; ++k) out.emplace_back(v.get_d(), 0.0);
  }
  out.insert(out.end(), numeric.begin(), numeric.end());
  return out;
}

EigenData eigen_data(const RatMatrix& m, double tol) {
  if (!m.is_square()) throw std::invalid_argument("eigen_data requires a square matrix");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  EigenData out;
  out.char_poly = characteristic_polynomial(m);
  if (m.rows() == 0) return out;
  auto factors = squarefree_decomposition(out.char_poly);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    int mult = static_cast<int>(i) + 1;
    UPoly f = factors[i];
    if (degree(f) <= 0) continue;
    // Exact rational roots, found by rationalizing the numeric ones.
    auto roots = numeric_roots(f, tol);
    for (const auto& z : roots) {
      if (std::abs(z.imag()) > 1e-6 * (1 + std::abs(z.real()))) continue;
      for (const Rational& cand : convergents(z.real(), 100000000L)) {
        if (eval(f, cand) != 0) continue;
        out.rational.emplace_back(cand, mult);
        UPoly q, r;
        divmod(f, UPoly{-cand, Rational(1)}, q, r);
        f = q;
        break;
      }
    }
    if (degree(f) > 0) {
      for (const auto& z : numeric_roots(f, tol)) {
        for (int k = 0; k < mult; ++k) out.numeric.push_back(z);
      }
    }
  }
  std::sort(out.rational.begin(), out.rational.end());
  std::sort(out.numeric.begin(), out.numeric.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

std::optional<std::vector<JordanBlock>> rational_jordan(const RatMatrix& m, double tol) {
  EigenData ed = eigen_data(m, tol);
  if (!ed.all_rational()) return std::nullopt;
  int n = m.rows();
  std::vector<JordanBlock> blocks;
  for (const auto& [lambda, mult] : ed.rational) {
    RatMatrix shifted = m - lambda * RatMatrix::identity(n);
    std::vector<int> ranks{n};
    RatMatrix power = RatMatrix::identity(n);
    for (int k = 1; k <= mult; ++k) {
      power = power * shifted;
      ranks.push_back(rank(power));
    }
    // ge[k] = number of blocks of size >= k.
    std::vector<int> ge(static_cast<std::size_t>(mult + 2), 0);
    for (int k = 1; k <= mult; ++k) ge[static_cast<std::size_t>(k)] = ranks[static_cast<std::size_t>(k - 1)] - ranks[static_cast<std::size_t>(k)];
    for (int k = mult; k >= 1; --k) {
      int exact = ge[static_cast<std::size_t>(k)] - ge[static_cast<std::size_t>(k + 1)];
      for (int b = 0; b < exact; ++b) blocks.push_back({lambda, k});
    }
  }
  return blocks;
}

}  // namespace nambu
