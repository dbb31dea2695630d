#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nambu/field.hpp"

namespace nambu {

struct ConambuWitness {
  IndexSet a = 0;  // constant (p-1)-vector d/dx_A
  int equation = 3;  // 3: i_A w ^ w = 0, 4: i_A w ^ dw = 0
  DiffForm residual;
};

struct ConambuVerdict {
  bool passed = true;
  std::optional<ConambuWitness> witness;
};

// Decides whether the p-form w (co-order q = n - p >= 3) is co-Nambu: for
// every constant basis (p-1)-vector A, i_A w ^ w = 0 and i_A w ^ dw = 0.
// Both conditions are function-linear in A, so basis vectors suffice. The
// first failure in canonical tuple order is returned. With a finite
// max_degree only coefficients through that degree are compared.
ConambuVerdict is_conambu(const DiffForm& w, int max_degree = kExact);

// is_conambu of the dual form i_P vol.
ConambuVerdict is_nambu(const Multivector& p, const DiffForm& vol, int max_degree = kExact);

// The bracket {f1, ..., fq} = P(df1, ..., dfq).
Poly nambu_bracket(const Multivector& p, const std::vector<Poly>& fs);

// Vector field g -> {f1, ..., f_{q-1}, g}.
Multivector hamiltonian_vf(const Multivector& p, const std::vector<Poly>& fs);

// {f, {g1..gq}} - sum_i {g1, .., {f, g_i}, .., gq}, with f = (f1..f_{q-1}).
Poly fundamental_identity_residual(const Multivector& p, const std::vector<Poly>& fs, const std::vector<Poly>& gs);

struct OracleWitness {
  std::vector<Poly> fs;
  std::vector<Poly> gs;
  Poly residual;
};

struct OracleSearch {
  std::optional<OracleWitness> witness;
  std::int64_t tuples_checked = 0;
};

// Exhaustive search for arguments violating the fundamental identity among
// monomials of degree 1..max_degree. fs and gs run over strictly increasing
// tuples of the graded monomial list, in lexicographic order; the first
// nonzero residual ends the search.
OracleSearch search_identity_violation(const Multivector& p, int max_degree = 2);

}  // namespace nambu
