#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "nambu/errors.hpp"
#include "nambu/formal.hpp"
#include "nambu/nambu.hpp"
#include "support.hpp"

using namespace nambu;
using namespace nambu::testing;

namespace {

Poly V(int n, int one_based) { return Poly::variable(n, one_based - 1); }

bool is_identity(const FormalMap& m) {
  for (int i = 0; i < m.nvars(); ++i) {
    if (m.component(i) != Poly::variable(m.nvars(), i)) return false;
  }
  return true;
}

bool zero_through(const DiffForm& w, int n) { return w.truncated(n).is_zero(); }
bool zero_through(const Multivector& w, int n) { return w.truncated(n).is_zero(); }

NormalForm elliptic(int n, int q) { return type1_normal_form(n, q, q, 0, std::vector<int>(static_cast<std::size_t>(q + 1), 1)); }

}  // namespace

// ---------------------------------------------------------------------------
// derham_divide

TEST_CASE("derham_divide: worked examples") {
  int n = 2;
  DiffForm alpha = dx(n, {1}, V(n, 1)) + dx(n, {2}, V(n, 2));
  Division d = derham_divide(alpha, dx(n, {1, 2}, V(n, 1)), {0, 1}, 3);
  CHECK(d.theta == dx(n, {2}));

  Division z = derham_divide(alpha, DiffForm(n, 2), {0, 1}, 3);
  CHECK(z.theta.is_zero());

  try {
    derham_divide(alpha, dx(n, {1, 2}), {0, 1}, 3);
    FAIL("expected a divisibility failure");
  } catch (const SolveError& e) {
    CHECK(e.degree() == 0);
  }
}

TEST_CASE("derham_divide: quotients of random products recompose") {
  std::mt19937_64 rng(501);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 3 + trial % 3;
    DiffForm alpha(n, 1);
    for (int i = 0; i < n; ++i) alpha.add(IndexSet{1} << i, V(n, i + 1) * random_nonzero_rational(rng));
    alpha += random_field<Kind::Form>(rng, n, 1, 3, 2, 2, 2);
    int k = 1 + trial % 2;
    DiffForm theta = random_field<Kind::Form>(rng, n, k, 2, 3, 2, 0);
    DiffForm beta = wedge(alpha, theta);
    int N = 4;
    std::vector<int> vars;
    for (int i = 0; i < n; ++i) vars.push_back(i);
    Division d = derham_divide(alpha, beta, vars, N);
    CHECK(zero_through(beta - wedge(alpha, d.theta), N));
  }
}

// ---------------------------------------------------------------------------
// formal_decompose_type1

TEST_CASE("formal_decompose_type1: examples") {
  SUBCASE("linear normal form is already factored") {
    NormalForm nf = elliptic(5, 3);
    Decomposition d = formal_decompose_type1(nf.form, 4);
    REQUIRE(d.gammas.size() == 1);
    CHECK(d.gammas[0] == dx(5, {1}));
    CHECK(wedge(d.gammas[0], d.alpha) == nf.form);
  }
  SUBCASE("expanded product with a degenerate linear part") {
    int n = 5;
    DiffForm g = dx(n, {1}) + dx(n, {3}, V(n, 2));
    DiffForm a = dx(n, {3}, V(n, 3)) + dx(n, {4}, V(n, 4)) + dx(n, {5}, V(n, 5));
    DiffForm w = wedge(g, a);
    int N = 4;
    Decomposition d = formal_decompose_type1(w, N);
    REQUIRE(d.gammas.size() == 1);
    CHECK(zero_through(wedge(d.gammas[0], d.alpha) - w, N));
    CHECK(!d.gammas[0].homogeneous_component(0).is_zero());
    CHECK(d.alpha.homogeneous_component(0).is_zero());
  }
  SUBCASE("p = 1 returns the form itself") {
    int n = 4;
    DiffForm w = dx(n, {1}, V(n, 1)) + dx(n, {2}, V(n, 2) * V(n, 3));
    Decomposition d = formal_decompose_type1(w, 3);
    CHECK(d.gammas.empty());
    CHECK(d.alpha == w);
  }
}

TEST_CASE("formal_decompose_type1: random perturbations") {
  std::mt19937_64 rng(502);
  for (int trial = 0; trial < 12; ++trial) {
    int n = 5 + trial % 2;
    int q = 3;
    NormalForm nf = type1_normal_form(n, q, q, 0, random_signs(rng, q + 1));
    int N = 3;
    FormalMap phi = random_map(rng, n, 2, N + 1);
    DiffForm w = pullback_form(nf.form, phi, N);
    Decomposition d = formal_decompose_type1(w, N);
    REQUIRE(static_cast<int>(d.gammas.size()) == n - q - 1);
    DiffForm prod = DiffForm::scalar(Poly::constant(n, 1));
    RatMatrix at_origin(static_cast<int>(d.gammas.size()), n);
    for (std::size_t j = 0; j < d.gammas.size(); ++j) {
      prod = wedge(prod, d.gammas[j], N);
      for (int i = 0; i < n; ++i) {
        at_origin(static_cast<int>(j), i) = d.gammas[j].coeff(IndexSet{1} << i).constant_term();
      }
    }
    CHECK(rank(at_origin) == static_cast<int>(d.gammas.size()));
    CHECK(d.alpha.homogeneous_component(0).is_zero());
    CHECK(zero_through(wedge(prod, d.alpha, N) - w, N));
  }
}

// ---------------------------------------------------------------------------
// formal_linearize_type1

TEST_CASE("formal_linearize_type1: examples") {
  SUBCASE("linear input is a fixed point") {
    NormalForm nf = elliptic(5, 3);
    Type1Linearization lin = formal_linearize_type1(nf.form, 4);
    CHECK(is_identity(lin.map));
    CHECK(lin.multiplier == Poly::constant(5, 1));
  }
  SUBCASE("perturbed elliptic form, n = 5, p = 2, N = 4") {
    std::mt19937_64 rng(503);
    int n = 5;
    int N = 4;
    NormalForm nf = elliptic(n, 3);
    DiffForm w = pullback_form(nf.form, random_near_identity(rng, n, 3, N + 1), N);
    Type1Linearization lin = formal_linearize_type1(w, N);
    CHECK(zero_through(pullback_form(w, lin.map, N) - lin.normal_form.form.mul_trunc(lin.multiplier, N), N));
    CHECK(lin.normal_form.r == 3);
  }
  SUBCASE("degenerate linear part is rejected") {
    NormalForm nf = type1_normal_form(5, 3, 2, 1, std::vector<int>{1, 1, 1});
    CHECK_THROWS_AS(formal_linearize_type1(nf.form, 3), PreconditionError);
  }
}

TEST_CASE("formal_linearize_type1: round trip over random perturbations") {
  std::mt19937_64 rng(504);
  int N = 4;
  for (int n = 4; n <= 5; ++n) {
    for (int q = 3; q <= n - 1; ++q) {
      for (int trial = 0; trial < 5; ++trial) {
        NormalForm nf = type1_normal_form(n, q, q, 0, random_signs(rng, q + 1));
        DiffForm w = pullback_form(nf.form, random_map(rng, n, 3, N + 1), N);
        Type1Linearization lin = formal_linearize_type1(w, N);
        CHECK(zero_through(pullback_form(w, lin.map, N) - lin.normal_form.form.mul_trunc(lin.multiplier, N), N));
        CHECK(lin.multiplier.constant_term() != 0);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// remove_multiplier and the full Type 1 tensor pipeline

TEST_CASE("remove_multiplier: examples") {
  int n = 4;
  NormalForm nf = elliptic(n, 3);
  SUBCASE("f = 1") {
    MultiplierRemoval rm = remove_multiplier(Poly::constant(n, 1), nf, 3);
    CHECK(is_identity(rm.map));
    CHECK(rm.fields.empty());
  }
  SUBCASE("constant with a rational root") {
    // The scaling multiplies by g^(q-1) = g^2, so c = 1/4 needs g = 2.
    MultiplierRemoval rm = remove_multiplier(Poly::constant(n, make_rational(1, 4)), nf, 3);
    CHECK(rm.exact_scale);
    CHECK(rm.map.is_linear());
    Multivector pushed = pushforward_tensor(make_rational(1, 4) * nf.tensor, rm.map, 3);
    CHECK(pushed == nf.tensor);
  }
  SUBCASE("negative constant flips one direction") {
    MultiplierRemoval rm = remove_multiplier(Poly::constant(n, Rational(-9)), nf, 3);
    CHECK(rm.exact_scale);
    CHECK(pushforward_tensor(Rational(-9) * nf.tensor, rm.map, 3) == nf.tensor);
  }
  SUBCASE("constant without a rational root") {
    MultiplierRemoval rm = remove_multiplier(Poly::constant(n, Rational(2)), nf, 3);
    CHECK_FALSE(rm.exact_scale);
    CHECK(rm.root == "(2)^(-1/2)");
    CHECK(rm.numeric_scale == doctest::Approx(std::pow(2.0, -0.5)));
  }
  SUBCASE("f = 1 + x1, N = 3") {
    int N = 3;
    Poly f = Poly::constant(n, 1) + V(n, 1);
    MultiplierRemoval rm = remove_multiplier(f, nf, N);
    REQUIRE(!rm.fields.empty());
    CHECK(rm.targets[0] == V(n, 1));
    CHECK(lie_derivative(rm.fields[0], nf.tensor) == V(n, 1) * nf.tensor);
    CHECK(zero_through(pushforward_tensor(nf.tensor.mul_trunc(f, N), rm.map, N) - nf.tensor, N));
  }
  SUBCASE("vanishing multiplier is rejected") {
    CHECK_THROWS_AS(remove_multiplier(V(n, 1), nf, 3), PreconditionError);
  }
}

TEST_CASE("remove_multiplier: Lie derivative identities for random multipliers") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 4 + trial % 2;
    int q = 3;
    NormalForm nf = type1_normal_form(n, q, q, 0, random_signs(rng, q + 1));
    int N = 4;
    Poly f = Poly::constant(n, 1) + random_poly(rng, n, N - 1, 4, 1);
    MultiplierRemoval rm = remove_multiplier(f, nf, N);
    REQUIRE(rm.fields.size() == rm.targets.size());
    for (std::size_t i = 0; i < rm.fields.size(); ++i) {
      CHECK(lie_derivative(rm.fields[i], nf.tensor) == rm.targets[i] * nf.tensor);
    }
    CHECK(zero_through(pushforward_tensor(nf.tensor.mul_trunc(f, N), rm.map, N) - nf.tensor, N));
  }
}

TEST_CASE("linearize_type1_tensor: perturbed tensors become linear") {
  std::mt19937_64 rng(506);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 4 + trial % 2;
    int q = 3;
    NormalForm nf = type1_normal_form(n, q, q, 0, random_signs(rng, q + 1));
    int N = 3;
    Multivector p = pushforward_tensor(nf.tensor, random_map(rng, n, 2, N + 1), N);
    TensorLinearization lin = linearize_type1_tensor(p, N);
    CHECK(zero_through(lin.result - lin.linear.mul_trunc(lin.multiplier, N), N));
    CHECK(zero_through(pushforward_tensor(p, lin.map, N) - lin.result, N));
  }
}

// ---------------------------------------------------------------------------
// prelinearize_type2

TEST_CASE("prelinearize_type2: examples") {
  int n = 5;
  RatMatrix b(2, 2);
  b(0, 0) = 1;
  b(1, 1) = 2;
  NormalForm nf = type2_normal_form(n, 4, b);
  SUBCASE("linear input is a fixed point") {
    Prelinearization pre = prelinearize_type2(nf.tensor, 3);
    CHECK(is_identity(pre.map));
    CHECK(pre.multiplier == Poly::constant(n, 1));
    CHECK(pre.tensor == nf.tensor);
  }
  SUBCASE("pushforward by identity plus quadratic terms, N = 3") {
    std::mt19937_64 rng(507);
    int N = 3;
    Multivector p = pushforward_tensor(nf.tensor, random_near_identity(rng, n, 2, N + 1), N);
    Prelinearization pre = prelinearize_type2(p, N);
    Multivector head = dd(n, {1, 2, 3});
    CHECK(zero_through(pre.tensor - wedge(head, pre.field).mul_trunc(pre.multiplier, N), N));
    CHECK(zero_through(pushforward_tensor(p, pre.map, N) - pre.tensor, N));
    for (const auto& [key, c] : pre.field.comps()) {
      for (const auto& [m, v] : c.terms()) CHECK((m[0] == 0 && m[1] == 0 && m[2] == 0));
    }
    CHECK(pre.frame.size() == 3);
  }
  SUBCASE("trace zero with q = n - 1 is rejected") {
    RatMatrix rot(2, 2);
    rot(0, 1) = 1;
    rot(1, 0) = -1;
    NormalForm bad = type2_normal_form(n, 4, rot);
    CHECK_THROWS_AS(prelinearize_type2(bad.tensor, 3), PreconditionError);
  }
}

TEST_CASE("prelinearize_type2: random round trips") {
  std::mt19937_64 rng(508);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 4 + trial % 3;
    int q = 3 + (n > 4 ? trial % 2 : 0);
    NormalForm nf = random_type2(rng, n, q);
    if (det(nf.matrix) == 0) continue;
    int N = 3;
    Multivector p = pushforward_tensor(nf.tensor, random_map(rng, n, 2, N + 1), N);
    Prelinearization pre = prelinearize_type2(p, N);
    Multivector head(n, q - 1);
    head.add(full_set(q - 1), Poly::constant(n, 1));
    CHECK(zero_through(pre.tensor - wedge(head, pre.field).mul_trunc(pre.multiplier, N), N));
    for (const auto& [key, c] : pre.field.comps()) {
      for (const auto& [m, v] : c.terms()) {
        for (int i = 0; i < q - 1; ++i) CHECK(m[i] == 0);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// resonance_report and poincare_linearize

TEST_CASE("resonance_report: examples") {
  SUBCASE("diag(1, 2)") {
    ResonanceReport r = resonance_report(RatMatrix::diagonal({1, 2}), 5);
    CHECK(r.exact);
    REQUIRE(r.resonances.size() == 1);
    CHECK(r.resonances[0].index == 2);
    CHECK(r.resonances[0].m == std::vector<int>{2, 0});
  }
  SUBCASE("diag(1, -1)") {
    ResonanceReport r = resonance_report(RatMatrix::diagonal({1, -1}), 3);
    bool found = false;
    for (const auto& res : r.resonances) found = found || (res.index == 1 && res.m == std::vector<int>{2, 1});
    CHECK(found);
  }
  SUBCASE("diag(2, 3)") {
    ResonanceReport r = resonance_report(RatMatrix::diagonal({2, 3}), 10);
    CHECK(r.resonances.empty());
    REQUIRE(r.orders.size() == 9);
    for (const auto& row : r.orders) {
      CHECK(row.min_divisor >= 1.0);
      CHECK(row.holds);
    }
    CHECK(r.orders[0].min_divisor == doctest::Approx(1.0));
  }
  SUBCASE("non-diagonal matrix with irrational eigenvalues") {
    RatMatrix b(2, 2);
    b(0, 1) = 1;
    b(1, 0) = 2;
    ResonanceReport r = resonance_report(b, 6);
    CHECK_FALSE(r.exact);
    CHECK(r.eigenvalues.size() == 2);
  }
}

TEST_CASE("resonance_report: minimum divisors match direct enumeration") {
  std::mt19937_64 rng(509);
  for (int trial = 0; trial < 20; ++trial) {
    int k = 2 + trial % 2;
    RatVector d;
    for (int i = 0; i < k; ++i) d.push_back(random_nonzero_rational(rng, 6, 2));
    int M = 6;
    ResonanceReport a = resonance_report(RatMatrix::diagonal(d), M, 1e-9);
    ResonanceReport b = resonance_report(RatMatrix::diagonal(d), M, 1e-3);
    CHECK(a.resonances.size() == b.resonances.size());
    for (int order = 2; order <= M; ++order) {
      double best = 1e300;
      std::vector<int> m(static_cast<std::size_t>(k), 0);
      // Brute force over the box [0, order]^k.
      std::vector<int> idx(static_cast<std::size_t>(k), 0);
      while (true) {
        int total = 0;
        for (int v : idx) total += v;
        if (total == order) {
          for (int i = 0; i < k; ++i) {
            Rational s = -d[static_cast<std::size_t>(i)];
            for (int j = 0; j < k; ++j) s += idx[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j)];
            best = std::min(best, std::abs(s.get_d()));
          }
        }
        int pos = 0;
        while (pos < k && ++idx[static_cast<std::size_t>(pos)] > order) idx[static_cast<std::size_t>(pos++)] = 0;
        if (pos == k) break;
      }
      CHECK(a.orders[static_cast<std::size_t>(order - 2)].min_divisor == doctest::Approx(best));
    }
  }
}

TEST_CASE("poincare_linearize: examples") {
  SUBCASE("linear field is a fixed point") {
    int m = 2;
    Multivector x = dd(m, {1}, V(m, 1) * Rational(2)) + dd(m, {2}, V(m, 2) * Rational(3));
    PoincareLinearization pl = poincare_linearize(x, 4);
    CHECK(is_identity(pl.map));
  }
  SUBCASE("resonant field is rejected with its witness") {
    int m = 2;
    Multivector x = dd(m, {1}, V(m, 1)) + dd(m, {2}, V(m, 2) * Rational(2) + V(m, 1) * V(m, 1));
    try {
      poincare_linearize(x, 3);
      FAIL("expected a resonance");
    } catch (const ResonanceError& e) {
      REQUIRE(!e.report().resonances.empty());
      CHECK(e.report().resonances[0].index == 2);
      CHECK(e.report().resonances[0].m == std::vector<int>{2, 0});
    }
  }
  SUBCASE("zero linear part is rejected") {
    int m = 2;
    CHECK_THROWS_AS(poincare_linearize(dd(m, {1}, V(m, 2) * V(m, 2)), 3), PreconditionError);
  }
  SUBCASE("2x1 d1 + 3x2 d2 plus random terms") {
    std::mt19937_64 rng(510);
    int m = 2;
    int N = 3;
    for (int trial = 0; trial < 10; ++trial) {
      Multivector x = dd(m, {1}, V(m, 1) * Rational(2) + random_poly(rng, m, 3, 3, 2)) +
                      dd(m, {2}, V(m, 2) * Rational(3) + random_poly(rng, m, 3, 3, 2));
      PoincareLinearization pl = poincare_linearize(x, N);
      CHECK(zero_through(pushforward_tensor(x, pl.map, N) - x.homogeneous_component(1), N));
      ResonanceReport direct = resonance_report(pl.linear, N);
      REQUIRE(direct.orders.size() == pl.resonance.orders.size());
      for (std::size_t i = 0; i < direct.orders.size(); ++i) {
        CHECK(direct.orders[i].min_divisor == pl.resonance.orders[i].min_divisor);
      }
    }
  }
}

TEST_CASE("linearize_type2: full pipeline") {
  std::mt19937_64 rng(511);
  int n = 5;
  RatMatrix b(2, 2);
  b(0, 0) = 2;
  b(1, 1) = 3;
  NormalForm nf = type2_normal_form(n, 4, b);
  int N = 3;
  for (int trial = 0; trial < 4; ++trial) {
    Multivector p = pushforward_tensor(nf.tensor, random_near_identity(rng, n, 2, N + 1), N);
    Type2Linearization lin = linearize_type2(p, N);
    CHECK(zero_through(lin.result - lin.linear.mul_trunc(lin.multiplier, N), N));
    CHECK(lin.multiplier.constant_term() != 0);
  }
}

TEST_CASE("exterior derivative of a co-Nambu form is co-Nambu") {
  std::mt19937_64 rng(512);
  for (int trial = 0; trial < 15; ++trial) {
    int n = 5;
    int q = 3 + trial % 2;
    NormalForm nf = random_normal_form(rng, n, q);
    DiffForm w = pullback_form(nf.form, random_map(rng, n, 2, kExact), kExact);
    DiffForm dw = dform(w);
    if (dw.is_zero() || n - dw.grade() < 3) continue;
    CHECK(is_conambu(dw).passed);
  }
}
