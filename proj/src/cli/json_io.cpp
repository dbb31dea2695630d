#include "nambu/json_io.hpp"

#include <cmath>
#include <sstream>

#include "nambu/errors.hpp"

namespace nambu {

namespace {

int require_int(const Json& j, const char* name) {
  if (!j.contains(name)) throw InputError(std::string("missing field \"") + name + "\"");
  const Json& v = j.at(name);
  if (!v.is_number_integer()) throw InputError(std::string("field \"") + name + "\" must be an integer");
  return v.get<int>();
}

Rational parse_number(const Json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw InputError("matrix entries must be integers or rational strings");
}

std::string complex_text(std::complex<double> z) {
  std::ostringstream os;
  os.precision(12);
  os << z.real();
  if (z.imag() != 0) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

template <Kind K>
Json field_json(const Field<K>& f, const char* kind) {
  Json comps = Json::object();
  for (const auto& [key, c] : f.comps()) comps[index_key(key)] = c.to_string();
  return Json{{"kind", kind}, {"nvars", f.nvars()}, {"grade", f.grade()}, {"components", comps}};
}

template <Kind K>
Field<K> read_components(const Json& j, int n, int grade) {
  Field<K> out(n, grade);
  if (!j.contains("components")) throw InputError("missing field \"components\"");
  const Json& comps = j.at("components");
  if (!comps.is_object()) throw InputError("\"components\" must be an object");
  for (const auto& [key, value] : comps.items()) {
    IndexSet s = parse_index_key(key, n, grade);
    if (!value.is_string()) throw InputError("component \"" + key + "\" must be a polynomial string");
    Poly p(n);
    try {
      p = Poly::parse(value.template get<std::string>(), n);
    } catch (const ParseError& e) {
      throw ParseError("component \"" + key + "\": " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" at column")),
                       e.column());
    }
    if (out.comps().count(s)) throw InputError("component \"" + key + "\" given twice");
    out.add(s, p);
  }
  return out;
}

}  // namespace

std::string index_key(IndexSet s) {
  std::string out;
  for (int i : set_indices(s)) {
    if (!out.empty()) out += ",";
    out += std::to_string(i + 1);
  }
  return out;
}

IndexSet parse_index_key(const std::string& key, int nvars, int grade) {
  std::vector<int> idx;
  std::stringstream ss(key);
  std::string part;
  if (!key.empty()) {
    while (std::getline(ss, part, ',')) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(part, &pos);
      } catch (const std::exception&) {
        throw InputError("index key \"" + key + "\": not a comma-separated list of integers");
      }
      if (pos != part.size() && part.find_first_not_of(' ', pos) != std::string::npos) {
        throw InputError("index key \"" + key + "\": not a comma-separated list of integers");
      }
      if (v < 1 || v > nvars) throw InputError("index key \"" + key + "\": index out of range 1.." + std::to_string(nvars));
      if (!idx.empty() && v <= idx.back() + 1) {
        throw InputError("index key \"" + key + "\": indices not strictly increasing");
      }
      idx.push_back(v - 1);
    }
    if (key.back() == ',') throw InputError("index key \"" + key + "\": trailing comma");
  }
  if (static_cast<int>(idx.size()) != grade) {
    throw InputError("index key \"" + key + "\" has " + std::to_string(idx.size()) + " indices, grade is " +
                     std::to_string(grade));
  }
  return index_set(idx);
}

FieldInput field_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("input must be a JSON object");
  int n = require_int(j, "nvars");
  int grade = require_int(j, "grade");
  if (n < 1 || n > 64) throw InputError("nvars must lie in 1..64");
  if (grade < 0 || grade > n) throw InputError("grade must lie in 0..nvars");
  FieldInput in;
  if (j.contains("kind")) {
    const Json& k = j.at("kind");
    if (k == "form") {
      in.is_form = true;
    } else if (k != "tensor") {
      throw InputError("\"kind\" must be \"tensor\" or \"form\"");
    }
  }
  if (in.is_form) {
    in.form = read_components<Kind::Form>(j, n, grade);
  } else {
    in.tensor = read_components<Kind::Vector>(j, n, grade);
  }
  return in;
}

FieldInput parse_field_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  return field_from_json(j);
}

Json to_json(const Multivector& p) { return field_json(p, "tensor"); }
Json to_json(const DiffForm& w) { return field_json(w, "form"); }

Json to_json(const FormalMap& m) {
  Json comps = Json::array();
  for (const Poly& c : m.components()) comps.push_back(c.to_string());
  Json out{{"nvars", m.nvars()}, {"components", comps}};
  out["trunc"] = m.trunc() == kExact ? Json(nullptr) : Json(m.trunc());
  return out;
}

FormalMap map_from_json(const Json& j) {
  int n = require_int(j, "nvars");
  if (!j.contains("components") || !j.at("components").is_array()) throw InputError("map needs a \"components\" array");
  std::vector<Poly> comps;
  for (const Json& c : j.at("components")) {
    if (!c.is_string()) throw InputError("map components must be polynomial strings");
    comps.push_back(Poly::parse(c.get<std::string>(), n));
  }
  if (static_cast<int>(comps.size()) != n) throw InputError("map must have nvars components");
  int trunc = kExact;
  if (j.contains("trunc") && !j.at("trunc").is_null()) trunc = require_int(j, "trunc");
  return FormalMap(std::move(comps), trunc);
}

Json matrix_to_json(const RatMatrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(to_string(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

RatMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix must be a non-empty array of rows");
  std::vector<RatVector> rows;
  for (const Json& r : j) {
    if (!r.is_array()) throw InputError("matrix rows must be arrays");
    RatVector row;
    for (const Json& v : r) row.push_back(parse_number(v));
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError("matrix rows differ in length");
    rows.push_back(row);
  }
  return RatMatrix::from_rows(rows);
}

RatMatrix parse_matrix_text(const std::string& text) {
  std::vector<RatVector> rows;
  std::stringstream ss(text);
  std::string row_text;
  while (std::getline(ss, row_text, ';')) {
    RatVector row;
    std::stringstream rs(row_text);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      auto b = cell.find_first_not_of(' ');
      auto e = cell.find_last_not_of(' ');
      if (b == std::string::npos) throw InputError("empty matrix entry in \"" + text + "\"");
      row.push_back(parse_rational(cell.substr(b, e - b + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError("matrix rows differ in length");
    rows.push_back(row);
  }
  if (rows.empty()) throw InputError("empty matrix");
  return RatMatrix::from_rows(rows);
}

Json to_json(const ConambuWitness& w) {
  std::vector<int> a;
  for (int i : set_indices(w.a)) a.push_back(i + 1);
  return Json{{"A", a}, {"equation", w.equation}, {"residual", w.residual.to_string()}};
}

Json to_json(const ConambuVerdict& v) {
  Json out{{"passed", v.passed}};
  if (v.witness) out["witness"] = to_json(*v.witness);
  return out;
}

Json to_json(const ClassificationReport& r) {
  const NormalForm& nf = r.normal_form;
  Json out;
  out["type"] = nf.type == NormalType::Type1 ? "1" : "2";
  out["n"] = nf.n;
  out["q"] = nf.q;
  out["route"] = r.route;
  if (r.case2_triple) {
    out["case2_triple"] = {(*r.case2_triple)[0] + 1, (*r.case2_triple)[1] + 1, (*r.case2_triple)[2] + 1};
  }
  if (nf.type == NormalType::Type1) {
    out["r"] = nf.r;
    out["s"] = nf.s;
    out["signs"] = nf.signs();
    Json diag = Json::array();
    Json rescale = Json::array();
    for (const Rational& d : nf.diag) {
      diag.push_back(to_string(d));
      rescale.push_back(std::sqrt(std::abs(d.get_d())));
    }
    out["diag"] = diag;
    out["rescale"] = rescale;
    out["n_plus"] = r.n_plus;
    out["n_minus"] = r.n_minus;
    out["signature"] = r.signature;
    out["elliptic"] = r.elliptic;
    out["index"] = r.index ? Json{(*r.index)[0], (*r.index)[1]} : Json(nullptr);
  } else {
    out["matrix"] = matrix_to_json(nf.matrix);
    out["char_poly"] = upoly_to_string(r.eigen.char_poly);
    Json eig = Json::array();
    for (const auto& [v, mult] : r.eigen.rational) eig.push_back(Json{{"value", to_string(v)}, {"multiplicity", mult}});
    for (const auto& z : r.eigen.numeric) eig.push_back(Json{{"value", complex_text(z)}, {"multiplicity", 1}});
    out["eigenvalues"] = eig;
    if (r.jordan) {
      Json blocks = Json::array();
      for (const auto& b : *r.jordan) blocks.push_back(Json{{"eigenvalue", to_string(b.eigenvalue)}, {"size", b.size}});
      out["jordan"] = blocks;
    } else {
      out["jordan"] = nullptr;
    }
  }
  out["nondegenerate"] = r.nondegenerate;
  out["zero_set_dim"] = r.zero_set_dim;
  out["change"] = to_json(r.change);
  out["normal_form"] = to_json(nf.form);
  return out;
}

Json to_json(const GradedSolveReport& r) {
  Json out = Json::array();
  for (const auto& rec : r.records) {
    out.push_back(Json{{"stage", rec.stage},
                       {"degree", rec.degree},
                       {"unknowns", rec.unknowns},
                       {"equations", rec.equations},
                       {"rank", rec.rank},
                       {"solved", rec.solved}});
  }
  return out;
}

Json to_json(const ResonanceReport& r) {
  Json eig = Json::array();
  for (const auto& z : r.eigenvalues) eig.push_back(complex_text(z));
  Json res = Json::array();
  for (const auto& x : r.resonances) res.push_back(Json{{"i", x.index}, {"m", x.m}});
  Json orders = Json::array();
  for (const auto& row : r.orders) {
    orders.push_back(Json{{"order", row.order}, {"min_divisor", row.min_divisor}, {"bound", row.bound}, {"holds", row.holds}});
  }
  return Json{{"eigenvalues", eig},
              {"exact", r.exact},
              {"max_order", r.max_order},
              {"tol", r.tol},
              {"resonances", res},
              {"small_divisors", orders},
              {"bryuno_proxy", Json{{"C", r.c}, {"eps", r.eps}, {"finite_order_only", true}}}};
}

}  // namespace nambu
