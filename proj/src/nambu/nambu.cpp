#include "nambu/nambu.hpp"

#include <stdexcept>
#include <string>

#include "nambu/errors.hpp"

namespace nambu {

ConambuVerdict is_conambu(const DiffForm& w, int max_degree) {
  int n = w.nvars();
  int p = w.grade();
  int q = n - p;
  if (q < 3) {
    throw PreconditionError("co-order q = " + std::to_string(q) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  if (p < 1) throw PreconditionError("form grade must be at least 1");
  DiffForm dw = dform(w);
  ConambuVerdict verdict;
  for (IndexSet a : subsets_of_size(n, p - 1)) {
    DiffForm ia = interior(Multivector::basis(n, set_indices(a)), w);
    DiffForm eq3 = wedge(ia, w, max_degree);
    if (!eq3.is_zero()) {
      verdict.passed = false;
      verdict.witness = ConambuWitness{a, 3, eq3};
      return verdict;
    }
    DiffForm eq4 = wedge(ia, dw, max_degree);
    if (!eq4.is_zero()) {
      verdict.passed = false;
      verdict.witness = ConambuWitness{a, 4, eq4};
      return verdict;
    }
  }
  return verdict;
}

ConambuVerdict is_nambu(const Multivector& p, const DiffForm& vol, int max_degree) {
  if (p.grade() < 3) {
    throw PreconditionError("tensor order q = " + std::to_string(p.grade()) +
                            " is below 3; the Poisson case q = 2 is outside the supported scope");
  }
  return is_conambu(tensor_to_form(p, vol), max_degree);
}

namespace {

Multivector contract_all(const Multivector& p, const std::vector<Poly>& fs) {
  Multivector cur = p;
  for (const Poly& f : fs) {
    if (f.nvars() != p.nvars()) throw std::invalid_argument("argument variable count differs from tensor");
    cur = interior(differential(f), cur);
  }
  return cur;
}

}  // namespace

Poly nambu_bracket(const Multivector& p, const std::vector<Poly>& fs) {
  if (static_cast<int>(fs.size()) != p.grade()) {
    throw std::invalid_argument("bracket of order " + std::to_string(p.grade()) + " needs " +
                                std::to_string(p.grade()) + " arguments, got " + std::to_string(fs.size()));
  }
  return contract_all(p, fs).coeff(0);
}

Multivector hamiltonian_vf(const Multivector& p, const std::vector<Poly>& fs) {
  if (static_cast<int>(fs.size()) != p.grade() - 1) {
    throw std::invalid_argument("Hamiltonian field of an order-" + std::to_string(p.grade()) + " tensor needs " +
                                std::to_string(p.grade() - 1) + " functions, got " + std::to_string(fs.size()));
  }
  return contract_all(p, fs);
}

Poly fundamental_identity_residual(const Multivector& p, const std::vector<Poly>& fs, const std::vector<Poly>& gs) {
  if (static_cast<int>(gs.size()) != p.grade()) {
    throw std::invalid_argument("fundamental identity needs " + std::to_string(p.grade()) + " functions g");
  }
  Multivector x = hamiltonian_vf(p, fs);
  Poly residual = apply_vector_field(x, nambu_bracket(p, gs));
  for (std::size_t i = 0; i < gs.size(); ++i) {
    std::vector<Poly> args(gs);
    args[i] = apply_vector_field(x, gs[i]);
    residual -= nambu_bracket(p, args);
  }
  return residual;
}

OracleSearch search_identity_violation(const Multivector& p, int max_degree) {
  int n = p.nvars();
  int q = p.grade();
  std::vector<Poly> monos;
  for (int d = 1; d <= max_degree; ++d) {
    for (const Monomial& m : monomials_of_degree(n, d)) monos.push_back(Poly::term(m, 1));
  }
  int count = static_cast<int>(monos.size());
  OracleSearch out;
  // Enumerate strictly increasing index tuples of length k.
  auto tuples = [count](int k) {
    std::vector<std::vector<int>> all;
    if (k > count) return all;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      all.push_back(idx);
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == count - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return all;
  };
  auto f_tuples = tuples(q - 1);
  auto g_tuples = tuples(q);
  std::vector<Poly> fs(static_cast<std::size_t>(q - 1), Poly(n));
  std::vector<Poly> gs(static_cast<std::size_t>(q), Poly(n));
  for (const auto& ft : f_tuples) {
    for (std::size_t i = 0; i < ft.size(); ++i) fs[i] = monos[static_cast<std::size_t>(ft[i])];
    Multivector x = hamiltonian_vf(p, fs);
    if (x.is_zero()) {
      out.tuples_checked += static_cast<std::int64_t>(g_tuples.size());
      continue;  // every residual vanishes for this f
    }
    for (const auto& gt : g_tuples) {
      for (std::size_t i = 0; i < gt.size(); ++i) gs[i] = monos[static_cast<std::size_t>(gt[i])];
      ++out.tuples_checked;
      Poly r = fundamental_identity_residual(p, fs, gs);
      if (!r.is_zero()) {
        out.witness = OracleWitness{fs, gs, r};
        return out;
      }
    }
  }
  return out;
}

}  // namespace nambu
