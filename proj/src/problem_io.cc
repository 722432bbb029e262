#include "reachavoid/problem_io.h"

#include <fstream>

#include "reachavoid/poly_parse.h"

namespace reachavoid {
namespace {

using nlohmann::json;

const json& Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ProblemError("missing field '" + where + key + "'");
  }
  return obj.at(key);
}

Polynomial ParseField(const json& value, int dim, const std::string& where) {
  if (!value.is_string()) throw ProblemError("'" + where + "' must be a polynomial string");
  try {
    return ParsePolynomial(value.get<std::string>(), dim);
  } catch (const std::exception& e) {
    throw ProblemError("'" + where + "': " + e.what());
  }
}

Box ParseBox(const json& value, int dim, const std::string& where) {
  if (!value.is_array() || static_cast<int>(value.size()) != dim) {
    throw ProblemError("'" + where + "' must list " + std::to_string(dim) + " [lo, hi] pairs");
  }
  Box box;
  for (const json& pair : value) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw ProblemError("'" + where + "' entries must be [lo, hi] number pairs");
    }
    box.intervals.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  try {
    box.Validate();
  } catch (const std::exception& e) {
    throw ProblemError("'" + where + "': " + e.what());
  }
  return box;
}

BasicOpenSet ParseSet(const json& obj, int dim, const std::string& name, Box* sampling_box) {
  const json& list = Field(obj, "constraints", name + ".");
  if (!list.is_array() || list.empty()) {
    throw ProblemError("'" + name + ".constraints' must be a non-empty list");
  }
  BasicOpenSet set;
  for (size_t i = 0; i < list.size(); ++i) {
    set.constraints.push_back(
        ParseField(list[i], dim, name + ".constraints[" + std::to_string(i) + "]"));
  }
  if (obj.contains("sampling_box")) {
    *sampling_box = ParseBox(obj.at("sampling_box"), dim, name + ".sampling_box");
  }
  return set;
}

json BoxJson(const Box& box) {
  json out = json::array();
  for (const auto& [lo, hi] : box.intervals) out.push_back({lo, hi});
  return out;
}

json SetJson(const BasicOpenSet& set, const Box& sampling_box) {
  json list = json::array();
  for (const Polynomial& p : set.constraints) list.push_back(p.ToString());
  json out = {{"constraints", list}};
  if (!sampling_box.intervals.empty()) out["sampling_box"] = BoxJson(sampling_box);
  return out;
}

}  // namespace

ProblemFile ParseProblem(const json& doc) {
  if (!doc.is_object()) throw ProblemError("problem file must be a JSON object");
  ProblemFile file;
  const json& version = Field(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kProblemSchemaVersion) {
    throw ProblemError("unsupported schema_version (expected " +
                       std::to_string(kProblemSchemaVersion) + ")");
  }
  ProblemInstance& inst = file.instance;
  inst.name = doc.value("name", std::string("unnamed"));
  const json& dim = Field(doc, "dimension", "");
  if (!dim.is_number_integer() || dim.get<int>() <= 0) {
    throw ProblemError("'dimension' must be a positive integer");
  }
  const int n = dim.get<int>();
  inst.dimension = n;
  const json& dyn = Field(doc, "dynamics", "");
  if (!dyn.is_array() || static_cast<int>(dyn.size()) != n) {
    throw ProblemError("'dynamics' must list " + std::to_string(n) + " polynomials");
  }
  for (size_t i = 0; i < dyn.size(); ++i) {
    inst.f.push_back(ParseField(dyn[i], n, "dynamics[" + std::to_string(i) + "]"));
  }
  inst.safe.h = ParseField(Field(Field(doc, "safe", ""), "h", "safe."), n, "safe.h");
  inst.initial = ParseSet(Field(doc, "initial", ""), n, "initial", &inst.initial_box);
  inst.target = ParseSet(Field(doc, "target", ""), n, "target", &inst.target_box);
  inst.bounding_box = ParseBox(Field(doc, "bounding_box", ""), n, "bounding_box");
  try {
    inst.Validate();
  } catch (const std::exception& e) {
    throw ProblemError(e.what());
  }

  if (doc.contains("defaults")) {
    const json& d = doc.at("defaults");
    if (!d.is_object()) throw ProblemError("'defaults' must be an object");
    try {
      if (d.contains("method")) {
        const std::string m = d.at("method").get<std::string>();
        ParseMethodKind(m);
        file.defaults.method = m;
      }
      if (d.contains("beta")) file.defaults.beta = d.at("beta").get<double>();
      if (d.contains("alpha_m")) {
        const std::string m = d.at("alpha_m").get<std::string>();
        ParsePolynomial(m, n);
        file.defaults.alpha_m = m;
      }
      if (d.contains("degrees")) file.defaults.degrees = d.at("degrees").get<std::vector<int>>();
    } catch (const ProblemError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProblemError(std::string("'defaults': ") + e.what());
    }
  }
  return file;
}

ProblemFile LoadProblem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProblemError("invalid JSON in '" + path + "': " + e.what());
  }
  return ParseProblem(doc);
}

json SerializeProblem(const ProblemFile& file) {
  const ProblemInstance& inst = file.instance;
  json dyn = json::array();
  for (const Polynomial& p : inst.f) dyn.push_back(p.ToString());
  json doc = {
      {"schema_version", file.schema_version},
      {"name", inst.name},
      {"dimension", inst.dimension},
      {"dynamics", dyn},
      {"safe", {{"h", inst.safe.h.ToString()}}},
      {"initial", SetJson(inst.initial, inst.initial_box)},
      {"target", SetJson(inst.target, inst.target_box)},
      {"bounding_box", BoxJson(inst.bounding_box)},
  };
  json d = json::object();
  if (file.defaults.method) d["method"] = *file.defaults.method;
  if (file.defaults.beta) d["beta"] = *file.defaults.beta;
  if (file.defaults.alpha_m) d["alpha_m"] = *file.defaults.alpha_m;
  if (file.defaults.degrees) d["degrees"] = *file.defaults.degrees;
  if (!d.empty()) doc["defaults"] = d;
  return doc;
}

bool SameInstance(const ProblemInstance& a, const ProblemInstance& b) {
  auto same_box = [](const Box& x, const Box& y) { return x.intervals == y.intervals; };
  return a.name == b.name && a.dimension == b.dimension && a.f == b.f &&
         a.safe.h == b.safe.h && a.initial.constraints == b.initial.constraints &&
         a.target.constraints == b.target.constraints &&
         same_box(a.bounding_box, b.bounding_box) && same_box(a.initial_box, b.initial_box) &&
         same_box(a.target_box, b.target_box);
}

}  // namespace reachavoid
