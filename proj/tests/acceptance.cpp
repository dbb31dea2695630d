// Acceptance run: one PASS/FAIL line per criterion with its runtime. A
// criterion passes when its property holds on every instance and it finishes
// within its time budget. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "nambu/formal.hpp"
#include "nambu/nambu.hpp"
#include "support.hpp"

using namespace nambu;
using namespace nambu::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> body;
};

// ---------------------------------------------------------------------------
// Fixture set shared by criteria 1 and 2

// Equality that ignores the grade label of two zero fields; wedges past the
// top degree produce zeros whose nominal grade exceeds n.
template <Kind K>
bool same(const Field<K>& a, const Field<K>& b) {
  return a == b || (a.is_zero() && b.is_zero());
}

std::vector<NormalForm> criterion1_fixtures(std::mt19937_64& rng) {
  std::vector<NormalForm> out;
  for (int n = 4; n <= 6; ++n) {
    for (int q = 3; q <= n - 1; ++q) {
      int p = n - q;
      for (int r = -1; r <= q; ++r) {
        for (int s = 0; s <= std::min(p - 1, q - r); ++s) {
          for (int k = 0; k < 8; ++k) out.push_back(type1_normal_form(n, q, r, s, random_signs(rng, r + 1)));
        }
      }
      for (int k = 0; k < 10; ++k) out.push_back(random_type2(rng, n, q));
    }
  }
  return out;
}

Outcome criterion1() {
  std::mt19937_64 rng(1001);
  auto fixtures = criterion1_fixtures(rng);
  int failures = 0;
  int type1 = 0;
  for (const auto& nf : fixtures) {
    if (nf.type == NormalType::Type1) ++type1;
    if (!is_nambu(nf.tensor, standard_volume(nf.n)).passed) ++failures;
  }
  std::ostringstream os;
  os << fixtures.size() << " normal forms (" << type1 << " Type 1, " << fixtures.size() - type1
     << " Type 2), " << failures << " rejected";
  return {failures == 0, os.str()};
}

Outcome criterion2() {
  std::mt19937_64 rng(1001);
  auto fixtures = criterion1_fixtures(rng);
  std::mt19937_64 changes(1002);
  long cases = 0;
  long tag_miss = 0;
  long invariant_miss = 0;
  for (const auto& nf : fixtures) {
    ClassificationReport base;
    base.normal_form = nf;
    fill_invariants(base);
    for (int k = 0; k < 20; ++k) {
      ++cases;
      DiffForm w = random_linear_image(changes, nf.form);
      ClassificationReport rep = classify_linear(w);
      if (rep.normal_form.type != nf.type) {
        ++tag_miss;
        continue;
      }
      if (nf.type == NormalType::Type1) {
        if (base.nondegenerate &&
            (!rep.nondegenerate || rep.signature != base.signature || rep.index != base.index)) {
          ++invariant_miss;
        }
      } else if (!eigen_proportional(base.eigen, rep.eigen)) {
        ++invariant_miss;
      }
    }
  }
  std::ostringstream os;
  os << cases << " classifications, " << tag_miss << " wrong tags, " << invariant_miss << " invariant mismatches";
  return {tag_miss == 0 && invariant_miss == 0, os.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion3() {
  std::mt19937_64 rng(1003);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    int n = 2 + t % 5;
    int k = t % (n + 1);
    Multivector p = random_field<Kind::Vector>(rng, n, k, 3);
    DiffForm vol = (Poly::constant(n, random_nonzero_rational(rng)) + random_poly(rng, n, 2, 2, 1)) * standard_volume(n);
    if (form_to_tensor(tensor_to_form(p, vol), vol) != p) ++bad;
    if (form_to_tensor(tensor_to_form(p, standard_volume(n)), standard_volume(n)) != p) ++bad;
  }
  for (int t = 0; t < 100; ++t) {
    int n = 2 + t % 5;
    DiffForm w = random_field<Kind::Form>(rng, n, t % n, 3);
    if (!dform(dform(w)).is_zero()) ++bad;
  }
  for (int t = 0; t < 500; ++t) {
    int n = 3 + t % 4;
    int k = t % 3;
    int l = (t / 3) % 3;
    DiffForm a = random_field<Kind::Form>(rng, n, k, 2);
    DiffForm b = random_field<Kind::Form>(rng, n, l, 2);
    DiffForm c = random_field<Kind::Form>(rng, n, 1, 2);
    Multivector x = random_field<Kind::Vector>(rng, n, 1, 2);
    Rational sk = k % 2 ? -1 : 1;
    Rational skl = (k * l) % 2 ? -1 : 1;
    switch (t % 5) {
      case 0:
        if (!same(wedge(a, b), skl * wedge(b, a))) ++bad;
        break;
      case 1:
        if (!same(wedge(wedge(a, b), c), wedge(a, wedge(b, c)))) ++bad;
        break;
      case 2:
        if (!same(dform(wedge(a, b)), wedge(dform(a), b) + sk * wedge(a, dform(b)))) ++bad;
        break;
      case 3:
        if (k == 0 || l == 0) break;
        if (!same(interior(x, wedge(a, b)), wedge(interior(x, a), b) + sk * wedge(a, interior(x, b)))) ++bad;
        break;
      case 4:
        // Cartan: L_X a = i_X da + d i_X a, the second term absent for functions.
        if (k == 0) {
          if (lie_derivative(x, a) != interior(x, dform(a))) ++bad;
        } else if (lie_derivative(x, a) != interior(x, dform(a)) + dform(interior(x, a))) {
          ++bad;
        }
        break;
    }
  }
  std::ostringstream os;
  os << "200 duality round trips, 100 d^2 checks, 500 graded identities; " << bad << " failures";
  return {bad == 0, os.str()};
}

// ---------------------------------------------------------------------------

std::vector<Poly> monomial_pool(int n, int max_degree) {
  std::vector<Poly> out;
  for (int d = 1; d <= max_degree; ++d) {
    for (const Monomial& m : monomials_of_degree(n, d)) out.push_back(Poly::term(m, 1));
  }
  return out;
}

std::vector<Poly> sample(std::mt19937_64& rng, const std::vector<Poly>& pool, int k) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Poly> out;
  for (int i = 0; i < k; ++i) out.push_back(pool[idx[static_cast<std::size_t>(i)]]);
  return out;
}

Outcome criterion4() {
  std::mt19937_64 rng(1004);
  int disagreements = 0;
  int passes = 0;
  for (int t = 0; t < 50; ++t) {
    int n = 4 + t % 2;
    Multivector p = t % 3 == 0 ? random_field<Kind::Vector>(rng, n, 3, 1, 3, 2, 1)
                               : form_to_tensor(random_linear_image(rng, random_normal_form(rng, n, 3).form),
                                                standard_volume(n));
    if (t % 5 == 1) p += random_field<Kind::Vector>(rng, n, 3, 1, 3, 2, 1);
    bool passed = is_nambu(p, standard_volume(n)).passed;
    if (passed) {
      ++passes;
      auto pool = monomial_pool(n, 2);
      for (int k = 0; k < 200; ++k) {
        if (!fundamental_identity_residual(p, sample(rng, pool, 2), sample(rng, pool, 3)).is_zero()) {
          ++disagreements;
          break;
        }
      }
    } else if (!search_identity_violation(p, 2).witness) {
      ++disagreements;
    }
  }
  std::ostringstream os;
  os << "50 linear tensors (" << passes << " Nambu), " << disagreements << " disagreements";
  return {disagreements == 0, os.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion5() {
  std::mt19937_64 rng(1005);
  int n = 5;
  int N = 4;
  int bad = 0;
  int runs = 0;
  for (const auto& signs : {std::vector<int>{1, 1, 1, 1}, std::vector<int>{1, 1, 1, -1}}) {
    NormalForm nf = type1_normal_form(n, 3, 3, 0, signs);
    for (int k = 0; k < 20; ++k) {
      ++runs;
      DiffForm w = pullback_form(nf.form, random_map(rng, n, 3, N + 1), N);
      try {
        Type1Linearization lin = formal_linearize_type1(w, N);
        DiffForm residual = pullback_form(w, lin.map, N) - lin.normal_form.form.mul_trunc(lin.multiplier, N);
        if (!residual.truncated(N).is_zero()) ++bad;
      } catch (const std::exception&) {
        ++bad;
      }
    }
  }
  std::ostringstream os;
  os << runs << " perturbed fixtures (elliptic and signature 2), " << bad << " nonzero residuals or failures";
  return {bad == 0, os.str()};
}

Outcome criterion6() {
  int n = 4;
  int N = 4;
  NormalForm nf = type1_normal_form(n, 3, 3, 0, std::vector<int>{1, 1, 1, 1});
  int bad = 0;
  int identities = 0;
  for (const char* text : {"1 + x1", "1 + x1*x2"}) {
    Poly f = Poly::parse(text, n);
    try {
      MultiplierRemoval rm = remove_multiplier(f, nf, N);
      for (std::size_t i = 0; i < rm.fields.size(); ++i) {
        ++identities;
        if (lie_derivative(rm.fields[i], nf.tensor) != rm.targets[i] * nf.tensor) ++bad;
      }
      if (!(pushforward_tensor(nf.tensor.mul_trunc(f, N), rm.map, N) - nf.tensor).truncated(N).is_zero()) ++bad;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  std::ostringstream os;
  os << "2 multipliers, " << identities << " Lie-derivative identities, " << bad << " failures";
  return {bad == 0, os.str()};
}

Outcome criterion7() {
  std::mt19937_64 rng(1007);
  int n = 5;
  int N = 3;
  int bad = 0;
  NormalForm nf = type2_normal_form(n, 4, RatMatrix::diagonal({2, 3}));
  for (int k = 0; k < 20; ++k) {
    Multivector p = pushforward_tensor(nf.tensor, random_map(rng, n, 2, N + 1), N);
    try {
      Type2Linearization lin = linearize_type2(p, N);
      Multivector residual = pushforward_tensor(p, lin.map, N) - lin.linear.mul_trunc(lin.multiplier, N);
      if (!residual.truncated(N).is_zero()) ++bad;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  ResonanceReport r12 = resonance_report(RatMatrix::diagonal({1, 2}), 5);
  bool r12_ok = r12.resonances.size() == 1 && r12.resonances[0].index == 2 && r12.resonances[0].m == std::vector<int>{2, 0};
  ResonanceReport r23 = resonance_report(RatMatrix::diagonal({2, 3}), 10);
  bool r23_ok = r23.resonances.empty();
  std::ostringstream os;
  os << "20 perturbed fixtures, " << bad << " failures; diag(1,2) M=5 " << (r12_ok ? "ok" : "WRONG")
     << "; diag(2,3) M=10 " << (r23_ok ? "ok" : "WRONG");
  return {bad == 0 && r12_ok && r23_ok, os.str()};
}

Outcome criterion8() {
  std::mt19937_64 rng(1008);
  int bad = 0;
  int nonzero = 0;
  for (int t = 0; t < 50; ++t) {
    int n = 5 + t % 2;
    int q = 4 + (n == 6 ? t % 2 : 0);
    NormalForm nf = random_normal_form(rng, n, q);
    DiffForm w = pullback_form(nf.form, random_map(rng, n, 2, kExact), kExact);
    if (!is_conambu(w).passed) {
      ++bad;
      continue;
    }
    DiffForm dw = dform(w);
    if (!dw.is_zero()) ++nonzero;
    if (!is_conambu(dw).passed) ++bad;
  }
  std::ostringstream os;
  os << "50 coordinate-changed fixtures (" << nonzero << " with dw != 0), " << bad << " failures";
  return {bad == 0, os.str()};
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "normal-form validity", 60, criterion1},
      {2, "classification round trip", 300, criterion2},
      {3, "duality and algebra suite", 30, criterion3},
      {4, "oracle agreement", 120, criterion4},
      {5, "formal linearization Type 1", 300, criterion5},
      {6, "multiplier removal", 60, criterion6},
      {7, "Type 2 pipeline and resonances", 180, criterion7},
      {8, "d-closure", 60, criterion8},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool within = secs < c.budget_seconds;
    bool pass = o.ok && within;
    if (!pass) ++failed;
    std::printf("%s criterion %d: %s (%.2f s, budget %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                secs, c.budget_seconds, within ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
