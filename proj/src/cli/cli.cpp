#include "nambu/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nambu/errors.hpp"
#include "nambu/formal.hpp"
#include "nambu/json_io.hpp"
#include "nambu/linclass.hpp"
#include "nambu/nambu.hpp"

namespace nambu {

namespace {

struct Options {
  std::string format = "json";
  std::string input;
  std::string volume;
  double tol = 1e-9;
  int order = 4;
  bool type1 = false;
  bool type2 = false;
  int max_order = 12;
  std::string bryuno;
  std::string matrix;
  std::string tag;
  int n = 0;
  int q = 0;
  int r = -2;
  int s = 0;
  std::string signs;
  bool emit_form = false;
};

// A failure that already carries its exit code and JSON payload.
struct Reported {
  int code;
  std::string message;
  Json payload;
};

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty()) throw InputError("no input given (use a path, inline JSON or \"-\" for stdin)");
  if (path == "-") {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  auto first = path.find_first_not_of(" \t\n");
  if (first != std::string::npos && path[first] == '{') return path;
  std::ifstream f(path);
  if (!f) throw InputError("cannot open input file \"" + path + "\"");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

DiffForm volume_form(int n, const std::string& multiplier) {
  if (multiplier.empty()) return standard_volume(n);
  return Poly::parse(multiplier, n) * standard_volume(n);
}

DiffForm as_form(const FieldInput& in, const DiffForm& vol) {
  return in.is_form ? in.form : tensor_to_form(in.tensor, vol);
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void print(std::ostream& out, const Options& o, const Json& j, const std::string& text) {
  if (o.format == "text") {
    out << text;
  } else {
    out << j.dump(2) << "\n";
  }
}

std::string classification_text(const ClassificationReport& r) {
  std::ostringstream os;
  const NormalForm& nf = r.normal_form;
  os << "type: " << (nf.type == NormalType::Type1 ? 1 : 2) << " (route " << r.route << ")\n";
  if (nf.type == NormalType::Type1) {
    os << "r = " << nf.r << ", s = " << nf.s << "\n";
    os << "signature: " << r.signature << " (n+ = " << r.n_plus << ", n- = " << r.n_minus << ")\n";
    os << "elliptic: " << yes_no(r.elliptic) << "\n";
    if (r.index) os << "index: {" << (*r.index)[0] << ", " << (*r.index)[1] << "}\n";
  } else {
    os << "matrix: " << nf.matrix.to_string() << "\n";
    os << "characteristic polynomial: " << upoly_to_string(r.eigen.char_poly) << "\n";
  }
  os << "nondegenerate: " << yes_no(r.nondegenerate) << "\n";
  os << "zero set dimension: " << r.zero_set_dim << "\n";
  os << "normal form: " << nf.form.to_string() << "\n";
  return os.str();
}

std::string resonance_text(const ResonanceReport& r) {
  std::ostringstream os;
  os << "eigenvalues:";
  for (const auto& z : r.eigenvalues) os << " " << z.real() << (z.imag() != 0 ? "+" + std::to_string(z.imag()) + "i" : "");
  os << "\nresonances up to order " << r.max_order << ": " << r.resonances.size() << "\n";
  for (const auto& x : r.resonances) {
    os << "  lambda_" << x.index << " = sum m_j lambda_j, m = (";
    for (std::size_t i = 0; i < x.m.size(); ++i) os << (i ? "," : "") << x.m[i];
    os << ")\n";
  }
  for (const auto& row : r.orders) {
    os << "  order " << row.order << ": min divisor " << row.min_divisor << ", bound " << row.bound
       << (row.holds ? " (holds)" : " (fails)") << "\n";
  }
  return os.str();
}

int cmd_verify(const Options& o, std::istream& in, std::ostream& out) {
  FieldInput fi = parse_field_text(read_input(o.input, in));
  ConambuVerdict v = fi.is_form ? is_conambu(fi.form) : is_nambu(fi.tensor, volume_form(fi.nvars(), o.volume));
  Json j = to_json(v);
  std::string text = std::string("passed: ") + yes_no(v.passed) + "\n";
  if (v.witness) {
    text += "witness: A = {" + index_key(v.witness->a) + "}, equation " + std::to_string(v.witness->equation) +
            " residual " + v.witness->residual.to_string() + "\n";
  }
  print(out, o, j, text);
  return v.passed ? kExitOk : kExitFailed;
}

int cmd_classify(const Options& o, std::istream& in, std::ostream& out) {
  FieldInput fi = parse_field_text(read_input(o.input, in));
  ClassificationReport r;
  try {
    r = fi.is_form ? classify_linear(fi.form, o.tol)
                   : classify_linear_tensor(fi.tensor, volume_form(fi.nvars(), o.volume), o.tol);
  } catch (const NotConambuError& e) {
    throw Reported{kExitFailed, e.what(), Json{{"passed", false}, {"witness", to_json(e.witness())}}};
  }
  print(out, o, to_json(r), classification_text(r));
  return kExitOk;
}

NormalType detect_type(const DiffForm& w, double tol) {
  try {
    return classify_linear(w.homogeneous_component(1), tol).normal_form.type;
  } catch (const NotConambuError&) {
    throw PreconditionError("linear part is not co-Nambu");
  }
}

int cmd_linearize(const Options& o, std::istream& in, std::ostream& out) {
  if (o.type1 && o.type2) throw InputError("--type1 and --type2 are exclusive");
  if (o.order < 2) throw InputError("--order must be at least 2");
  FieldInput fi = parse_field_text(read_input(o.input, in));
  int n = fi.nvars();
  DiffForm vol = standard_volume(n);
  DiffForm w = as_form(fi, vol);
  int N = o.order;
  if (n - w.grade() >= 3) {
    // Products of coefficients through degree N are known exactly, while dw
    // loses one degree, so the check runs through N - 1.
    ConambuVerdict v = is_conambu(w, N - 1);
    if (!v.passed) {
      throw Reported{kExitFailed, "input is not co-Nambu through degree " + std::to_string(N - 1), to_json(v)};
    }
  }
  NormalType type = o.type1 ? NormalType::Type1 : o.type2 ? NormalType::Type2 : detect_type(w, o.tol);
  Json j;
  std::ostringstream text;
  if (type == NormalType::Type1 && fi.is_form) {
    Type1Linearization lin = formal_linearize_type1(w, N);
    j["type"] = "1";
    j["order"] = N;
    j["direction"] = "substitution x = map(x'), pulling the input back to multiplier * linear";
    j["map"] = to_json(lin.map);
    j["multiplier"] = lin.multiplier.to_string();
    j["linear"] = to_json(lin.normal_form.form);
    j["report"] = to_json(lin.report);
    text << "type 1, order " << N << "\nmultiplier: " << lin.multiplier.to_string()
         << "\nlinear form: " << lin.normal_form.form.to_string() << "\n";
  } else if (type == NormalType::Type1) {
    TensorLinearization lin = linearize_type1_tensor(fi.tensor, N);
    j["type"] = "1";
    j["order"] = N;
    j["direction"] = "new coordinates x' = map(x), input pushed forward to multiplier * linear";
    j["map"] = to_json(lin.map);
    j["multiplier"] = lin.multiplier.to_string();
    j["linear"] = to_json(lin.linear);
    j["report"] = to_json(lin.report);
    text << "type 1, order " << N << "\nmultiplier: " << lin.multiplier.to_string()
         << "\nlinear tensor: " << lin.linear.to_string() << "\n";
  } else {
    Multivector p = fi.is_form ? form_to_tensor(fi.form, vol) : fi.tensor;
    Type2Linearization lin = linearize_type2(p, N, o.tol);
    j["type"] = "2";
    j["order"] = N;
    j["direction"] = "new coordinates x' = map(x), input pushed forward to multiplier * linear";
    j["map"] = to_json(lin.map);
    j["multiplier"] = lin.multiplier.to_string();
    j["linear"] = to_json(lin.linear);
    j["matrix"] = matrix_to_json(lin.poincare.linear);
    GradedSolveReport rep = lin.pre.report;
    rep.append(lin.poincare.report);
    j["report"] = to_json(rep);
    j["resonance"] = to_json(lin.poincare.resonance);
    text << "type 2, order " << N << "\nmultiplier: " << lin.multiplier.to_string()
         << "\nlinear tensor: " << lin.linear.to_string() << "\n";
  }
  text << "map:\n";
  for (int i = 0; i < n; ++i) text << "  x" << i + 1 << "' = " << Json(j["map"]["components"][static_cast<std::size_t>(i)]).get<std::string>() << "\n";
  print(out, o, j, text.str());
  return kExitOk;
}

int cmd_resonance(const Options& o, std::istream& in, std::ostream& out) {
  RatMatrix b;
  if (!o.matrix.empty()) {
    b = parse_matrix_text(o.matrix);
  } else {
    Json j = parse_json(read_input(o.input, in));
    if (j.is_object() && j.contains("matrix")) {
      b = matrix_from_json(j.at("matrix"));
    } else {
      FieldInput fi = field_from_json(j);
      DiffForm w = as_form(fi, standard_volume(fi.nvars()));
      ClassificationReport r;
      try {
        r = classify_linear(w.homogeneous_component(1), o.tol);
      } catch (const NotConambuError&) {
        throw PreconditionError("linear part is not co-Nambu");
      }
      if (r.normal_form.type != NormalType::Type2) {
        throw PreconditionError("resonance analysis needs a Type 2 linear part");
      }
      b = r.normal_form.matrix;
    }
  }
  if (!b.is_square()) throw InputError("matrix must be square");
  if (o.max_order < 2) throw InputError("--max-order must be at least 2");
  double c = 1.0;
  double eps = 0.5;
  if (!o.bryuno.empty()) {
    auto comma = o.bryuno.find(',');
    if (comma == std::string::npos) throw InputError("--bryuno expects C,EPS");
    try {
      c = std::stod(o.bryuno.substr(0, comma));
      eps = std::stod(o.bryuno.substr(comma + 1));
    } catch (const std::exception&) {
      throw InputError("--bryuno expects two numbers C,EPS");
    }
    if (!(c > 0) || !(eps > 0 && eps < 1)) throw InputError("--bryuno needs C > 0 and 0 < EPS < 1");
  }
  ResonanceReport r = resonance_report(b, o.max_order, o.tol, c, eps);
  print(out, o, to_json(r), resonance_text(r));
  return r.resonances.empty() ? kExitOk : kExitFailed;
}

int cmd_generate(const Options& o, std::ostream& out) {
  NormalForm nf;
  if (o.tag == "type1") {
    int r = o.r == -2 ? o.q : o.r;
    std::vector<int> signs;
    if (o.signs.empty()) {
      signs.assign(static_cast<std::size_t>(std::max(r + 1, 0)), 1);
    } else {
      for (char ch : o.signs) {
        if (ch != '+' && ch != '-') throw InputError("--signs must consist of '+' and '-'");
        signs.push_back(ch == '+' ? 1 : -1);
      }
    }
    nf = type1_normal_form(o.n, o.q, r, o.s, signs);
  } else if (o.tag == "type2") {
    if (o.matrix.empty()) throw InputError("generate type2 needs --matrix");
    nf = type2_normal_form(o.n, o.q, parse_matrix_text(o.matrix));
  } else {
    throw InputError("generate expects \"type1\" or \"type2\"");
  }
  Json j = o.emit_form ? to_json(nf.form) : to_json(nf.tensor);
  print(out, o, j, (o.emit_form ? nf.form.to_string() : nf.tensor.to_string()) + "\n");
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Options o;
  if (const char* env = std::getenv("NAMBU_TOL")) {
    try {
      o.tol = std::stod(env);
    } catch (const std::exception&) {
      err << "error: NAMBU_TOL is not a number\n";
      return kExitInput;
    }
  }

  CLI::App app{"Exact Nambu tensors and co-Nambu forms: verification, linear classification, formal linearization"};
  app.name("nambu");
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));

  auto* verify = app.add_subcommand("verify", "Check the Nambu / co-Nambu conditions");
  verify->add_option("input", o.input, "Input JSON file, inline JSON, or - for stdin")->required();
  verify->add_option("--volume", o.volume, "Volume multiplier f in f dx1^...^dxn");

  auto* classify = app.add_subcommand("classify", "Classify a linear structure into Type 1 or Type 2");
  classify->add_option("input", o.input, "Input JSON file, inline JSON, or - for stdin")->required();
  classify->add_option("--volume", o.volume, "Volume multiplier f in f dx1^...^dxn");
  classify->add_option("--tol", o.tol, "Numeric tolerance for eigenvalues")->check(CLI::PositiveNumber);

  auto* linearize = app.add_subcommand("linearize", "Formal linearization at the origin");
  linearize->add_option("input", o.input, "Input JSON file, inline JSON, or - for stdin")->required();
  linearize->add_option("--order", o.order, "Truncation degree N");
  linearize->add_flag("--type1", o.type1, "Force the Type 1 pipeline");
  linearize->add_flag("--type2", o.type2, "Force the Type 2 pipeline");
  linearize->add_option("--tol", o.tol, "Resonance tolerance")->check(CLI::PositiveNumber);

  auto* resonance = app.add_subcommand("resonance", "Resonances and finite-order Bryuno proxy");
  resonance->add_option("input", o.input, "Input JSON (tensor, form, or {\"matrix\": ...})");
  resonance->add_option("--matrix", o.matrix, "Matrix as \"a,b;c,d\"");
  resonance->add_option("--max-order", o.max_order, "Maximum order M");
  resonance->add_option("--tol", o.tol, "Numeric tolerance")->check(CLI::PositiveNumber);
  resonance->add_option("--bryuno", o.bryuno, "Bound constants C,EPS");

  auto* generate = app.add_subcommand("generate", "Emit a normal form as input JSON");
  generate->add_option("tag", o.tag, "type1 or type2")->required();
  generate->add_option("--n", o.n, "Number of variables")->required();
  generate->add_option("--q", o.q, "Tensor order q")->required();
  generate->add_option("--r", o.r, "Type 1: r (default q)");
  generate->add_option("--s", o.s, "Type 1: s");
  generate->add_option("--signs", o.signs, "Type 1: sign pattern such as ++-+");
  generate->add_option("--matrix", o.matrix, "Type 2: matrix as \"a,b;c,d\"");
  generate->add_flag("--form", o.emit_form, "Emit the dual form instead of the tensor");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  auto fail = [&](int code, const std::string& msg, Json payload = Json::object()) {
    err << "error: " << msg << "\n";
    if (o.format == "json") {
      payload["error"] = msg;
      payload["exit_code"] = code;
      out << payload.dump(2) << "\n";
    }
    return code;
  };

  try {
    if (verify->parsed()) return cmd_verify(o, in, out);
    if (classify->parsed()) return cmd_classify(o, in, out);
    if (linearize->parsed()) return cmd_linearize(o, in, out);
    if (resonance->parsed()) return cmd_resonance(o, in, out);
    if (generate->parsed()) return cmd_generate(o, out);
  } catch (const Reported& r) {
    return fail(r.code, r.message, r.payload);
  } catch (const ResonanceError& e) {
    return fail(kExitFailed, e.what(), Json{{"resonance", to_json(e.report())}});
  } catch (const InputError& e) {
    return fail(kExitInput, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInput, e.what());
  } catch (const PreconditionError& e) {
    return fail(kExitPrecondition, e.what());
  } catch (const SolveError& e) {
    return fail(kExitSolve, e.what());
  } catch (const std::exception& e) {
    return fail(kExitSolve, std::string("internal error: ") + e.what());
  }
  return kExitInput;
}

}  // namespace nambu
