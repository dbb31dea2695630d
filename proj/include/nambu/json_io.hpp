#pragma once

#include <json.hpp>
#include <string>

#include "nambu/field.hpp"
#include "nambu/formal.hpp"
#include "nambu/formal_map.hpp"
#include "nambu/linclass.hpp"
#include "nambu/nambu.hpp"

namespace nambu {

using Json = nlohmann::ordered_json;

// A parsed input object. Inputs carry an optional "kind" field ("tensor" or
// "form"); without it the object is read as a tensor.
struct FieldInput {
  bool is_form = false;
  Multivector tensor;
  DiffForm form;
  int nvars() const { return is_form ? form.nvars() : tensor.nvars(); }
};

// Schema: {"nvars": n, "grade": k, "components": {"1,2,3": "<poly>", ...}}
// with 1-based strictly increasing keys. Throws InputError (ParseError for
// bad polynomial text) on any violation.
FieldInput field_from_json(const Json& j);
FieldInput parse_field_text(const std::string& text);

Json to_json(const Multivector& p);
Json to_json(const DiffForm& w);
// {"nvars": n, "components": [...], "trunc": N}, trunc null when exact.
Json to_json(const FormalMap& m);
FormalMap map_from_json(const Json& j);

// Matrix as nested arrays of rational strings, and back. Text form
// "1,0;0,2" is also accepted by parse_matrix_text.
Json matrix_to_json(const RatMatrix& m);
RatMatrix matrix_from_json(const Json& j);
RatMatrix parse_matrix_text(const std::string& text);

std::string index_key(IndexSet s);  // "1,2,3"
IndexSet parse_index_key(const std::string& key, int nvars, int grade);

Json to_json(const ConambuVerdict& v);
Json to_json(const ConambuWitness& w);
Json to_json(const ClassificationReport& r);
Json to_json(const GradedSolveReport& r);
Json to_json(const ResonanceReport& r);

}  // namespace nambu
