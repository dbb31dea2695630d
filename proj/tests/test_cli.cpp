#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "nambu/cli.hpp"
#include "nambu/errors.hpp"
#include "nambu/json_io.hpp"
#include "support.hpp"

using namespace nambu;
using namespace nambu::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(args, in, out, err);
  return Run{code, out.str(), err.str()};
}

std::string dump(const Json& j) { return j.dump(); }

}  // namespace

TEST_CASE("parse_input: examples") {
  FieldInput in = parse_field_text(R"({"nvars":5,"grade":3,"components":{"1,2,3":"1"}})");
  CHECK_FALSE(in.is_form);
  CHECK(in.tensor == dd(5, {1, 2, 3}));

  try {
    parse_field_text(R"({"nvars":5,"grade":3,"components":{"2,1,3":"1"}})");
    FAIL("expected a validation error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("indices not strictly increasing") != std::string::npos);
  }

  try {
    parse_field_text(R"({"nvars":5,"grade":3,"components":{"1,2,3":"x1^"}})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 4);
  }

  CHECK_THROWS_AS(parse_field_text(R"({"nvars":5,"grade":3,"components":{"1,2":"1"}})"), InputError);
  CHECK_THROWS_AS(parse_field_text(R"({"nvars":5,"grade":3,"components":{"1,2,9":"1"}})"), InputError);
  CHECK_THROWS_AS(parse_field_text(R"({"nvars":5,"grade":3,"components":)"), InputError);
  CHECK_THROWS_AS(parse_field_text(R"({"nvars":5,"components":{}})"), InputError);
  CHECK_THROWS_AS(parse_field_text(R"({"kind":"scalar","nvars":5,"grade":3,"components":{}})"), InputError);

  FieldInput f = parse_field_text(R"({"kind":"form","nvars":3,"grade":1,"components":{"2":"x1*x3"}})");
  CHECK(f.is_form);
  CHECK(f.form == dx(3, {2}, P("x1*x3", 3)));
}

TEST_CASE("json round trips") {
  std::mt19937_64 rng(601);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 3 + trial % 4;
    int k = trial % (n + 1);
    Multivector p = random_field<Kind::Vector>(rng, n, k, 3);
    FieldInput back = field_from_json(to_json(p));
    CHECK_FALSE(back.is_form);
    CHECK(back.tensor == p);
    DiffForm w = random_field<Kind::Form>(rng, n, k, 3);
    FieldInput wb = field_from_json(to_json(w));
    CHECK(wb.is_form);
    CHECK(wb.form == w);
    FormalMap m = random_map(rng, n, 3, 4);
    CHECK(map_from_json(to_json(m)) == m);
    RatMatrix a = random_matrix(rng, n, n);
    CHECK(matrix_from_json(matrix_to_json(a)) == a);
  }
  CHECK(parse_matrix_text("1,0,0;0,2,0;0,0,-3/2") == RatMatrix::diagonal({1, 2, make_rational(-3, 2)}));
  CHECK_THROWS_AS(parse_matrix_text("1,0;0"), InputError);
}

TEST_CASE("run: exit codes on a fixture matrix") {
  SUBCASE("0: verify on the constant tensor d1^d2^d3") {
    Run r = run({"verify", R"({"nvars":5,"grade":3,"components":{"1,2,3":"1"}})"});
    CHECK(r.code == kExitOk);
    CHECK(dump(r.json()) == R"({"passed":true})");
  }
  SUBCASE("0: classify on the zero form") {
    Run r = run({"classify", R"({"kind":"form","nvars":4,"grade":1,"components":{}})"});
    CHECK(r.code == kExitOk);
    Json j = r.json();
    CHECK(j["type"] == "1");
    CHECK(j["r"] == -1);
  }
  SUBCASE("1: verify failure carries a witness") {
    Run r = run({"verify", R"({"nvars":5,"grade":3,"components":{"1,2,3":"1","1,4,5":"1"}})"});
    CHECK(r.code == kExitFailed);
    Json j = r.json();
    CHECK(j["passed"] == false);
    CHECK(j["witness"].contains("A"));
  }
  SUBCASE("1: classify on a linear form that is not co-Nambu") {
    Run r = run({"classify", R"({"kind":"form","nvars":5,"grade":2,"components":{"1,2":"x3","3,4":"x5"}})"});
    CHECK(r.code == kExitFailed);
    CHECK(r.json()["witness"].contains("residual"));
  }
  SUBCASE("1: resonance found") {
    Run r = run({"resonance", "--matrix", "1,0;0,2", "--max-order", "5"});
    CHECK(r.code == kExitFailed);
    Json j = r.json();
    REQUIRE(j["resonances"].size() == 1);
    CHECK(j["resonances"][0]["i"] == 2);
    CHECK(dump(j["resonances"][0]["m"]) == "[2,0]");
  }
  SUBCASE("2: malformed input") {
    CHECK(run({"verify", R"({"nvars":5,"grade":3,"components":{"2,1,3":"1"}})"}).code == kExitInput);
    CHECK(run({"verify", "{not json"}).code == kExitInput);
    CHECK(run({"verify", "/nonexistent/file.json"}).code == kExitInput);
    CHECK(run({"frobnicate"}).code == kExitInput);
    CHECK(run({"linearize", "--order", "1", R"({"nvars":5,"grade":3,"components":{}})"}).code == kExitInput);
    CHECK(run({"generate", "type1", "--n", "4", "--q", "3", "--r", "9"}).code == kExitInput);
  }
  SUBCASE("3: precondition unmet") {
    Run gen = run({"generate", "type2", "--n", "5", "--q", "4", "--matrix", "0,1;-1,0"});
    REQUIRE(gen.code == kExitOk);
    Run r = run({"linearize", "--type2", gen.out});
    CHECK(r.code == kExitPrecondition);
    CHECK(r.err.find("trace") != std::string::npos);
    CHECK(run({"verify", R"({"nvars":4,"grade":2,"components":{"1,2":"1"}})"}).code == kExitPrecondition);
    CHECK(run({"classify", R"({"kind":"form","nvars":4,"grade":1,"components":{"1":"x1*x2"}})"}).code ==
          kExitPrecondition);
  }
  SUBCASE("4: graded solve inconsistency") {
    // A Type 2 linear part plus a quadratic term that breaks decomposability
    // only at degree 3: the precheck through degree N - 1 = 1 passes, the
    // degree-2 homological system cannot.
    int n = 5;
    RatMatrix b = RatMatrix::diagonal({2, 3, 5});
    DiffForm w = type2_normal_form(n, 3, b).form + dx(n, {1, 2}, P("x3*x4", n));
    Run r = run({"linearize", "--order", "2", "--type2", dump(to_json(w))});
    CHECK(r.code == kExitSolve);
    CHECK(r.json()["error"].get<std::string>().find("degree 2") != std::string::npos);
  }
}

TEST_CASE("run: stdin input, text format and tolerance override") {
  Run r = run({"verify", "-", "--format", "text"}, R"({"nvars":5,"grade":3,"components":{"1,2,3":"1"}})");
  CHECK(r.code == kExitOk);
  CHECK(r.out == "passed: yes\n");
  Run res = run({"resonance", "--matrix", "2,0;0,3", "--max-order", "10", "--tol", "1e-6", "--bryuno", "1,0.5"});
  CHECK(res.code == kExitOk);
  Json j = res.json();
  CHECK(j["resonances"].empty());
  CHECK(j["small_divisors"].size() == 9);
  CHECK(run({"resonance", "--matrix", "2,0;0,3", "--bryuno", "1"}).code == kExitInput);
}

TEST_CASE("run: linearize outputs verify") {
  std::mt19937_64 rng(602);
  int n = 5;
  int N = 3;
  NormalForm nf = type2_normal_form(n, 4, RatMatrix::diagonal({2, 3}));
  Multivector p = pushforward_tensor(nf.tensor, random_near_identity(rng, n, 2, N + 1), N);
  Run r = run({"linearize", "--order", std::to_string(N), dump(to_json(p))});
  REQUIRE(r.code == kExitOk);
  Json j = r.json();
  CHECK(j["type"] == "2");
  FormalMap map = map_from_json(j["map"]);
  Poly g = Poly::parse(j["multiplier"].get<std::string>(), n);
  Multivector lin = field_from_json(j["linear"]).tensor;
  CHECK((pushforward_tensor(p, map, N) - lin.mul_trunc(g, N)).truncated(N).is_zero());

  NormalForm t1 = type1_normal_form(n, 3, 3, 0, std::vector<int>{1, -1, 1, 1});
  Multivector p1 = pushforward_tensor(t1.tensor, random_near_identity(rng, n, 2, N + 1), N);
  Run r1 = run({"linearize", "--order", std::to_string(N), dump(to_json(p1))});
  REQUIRE(r1.code == kExitOk);
  Json j1 = r1.json();
  CHECK(j1["type"] == "1");
  FormalMap map1 = map_from_json(j1["map"]);
  Multivector lin1 = field_from_json(j1["linear"]).tensor;
  CHECK((pushforward_tensor(p1, map1, N) - lin1).truncated(N).is_zero());
}

TEST_CASE("generate: outputs round trip and verify") {
  for (int n = 4; n <= 6; ++n) {
    for (int q = 3; q <= n - 1; ++q) {
      for (int r = -1; r <= q; ++r) {
        for (int s = 0; s <= std::min(n - q - 1, q - r); ++s) {
          std::string signs(static_cast<std::size_t>(r + 1), '+');
          if (r >= 1) signs[0] = '-';
          std::vector<std::string> args{"generate", "type1", "--n", std::to_string(n), "--q", std::to_string(q),
                                        "--r", std::to_string(r), "--s", std::to_string(s)};
          if (r >= 0) {
            args.push_back("--signs");
            args.push_back(signs);
          }
          Run g = run(args);
          REQUIRE(g.code == kExitOk);
          FieldInput in = parse_field_text(g.out);
          CHECK(in.tensor.grade() == q);
          CHECK(run({"verify", g.out}).code == kExitOk);
          CHECK(run(args).out == g.out);
        }
      }
    }
  }
  Run g2 = run({"generate", "type2", "--n", "5", "--q", "3", "--matrix", "1,0,0;0,2,0;0,0,3"});
  REQUIRE(g2.code == kExitOk);
  CHECK(run({"verify", g2.out}).code == kExitOk);
  Run c = run({"classify", g2.out});
  REQUIRE(c.code == kExitOk);
  CHECK(c.json()["type"] == "2");
  Run gf = run({"generate", "type1", "--n", "4", "--q", "3", "--form"});
  REQUIRE(gf.code == kExitOk);
  CHECK(parse_field_text(gf.out).is_form);
  CHECK(run({"verify", gf.out}).code == kExitOk);
}
