#include <string>

#include "doctest.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/problem_io.h"

using namespace reachavoid;
using nlohmann::json;

namespace {

json MinimalDoc() {
  return json::parse(R"({
    "schema_version": 1,
    "name": "toy",
    "dimension": 2,
    "dynamics": ["-x1", "-x2"],
    "safe": {"h": "x1^2 + x2^2 - 1"},
    "initial": {"constraints": ["(x1 - 0.5)^2 + x2^2 - 0.01"]},
    "target": {"constraints": ["x1^2 + x2^2 - 0.04"]},
    "bounding_box": [[-1, 1], [-1, 1]],
    "defaults": {"method": "exp", "beta": 0.5, "degrees": [4, 6]}
  })");
}

std::string ErrorOf(const json& doc) {
  try {
    ParseProblem(doc);
  } catch (const ProblemError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("fixture files round-trip") {
  for (const std::string& name : SuiteNames()) {
    const ProblemFile file = LoadProblem(std::string(FIXTURE_DIR) + "/" + name + ".json");
    CHECK_MESSAGE(SameInstance(file.instance, FixtureInstance(name)), name);
    const ProblemFile again = ParseProblem(SerializeProblem(file));
    CHECK_MESSAGE(SameInstance(again.instance, file.instance), name);
    CHECK(SerializeProblem(again) == SerializeProblem(file));
  }
}

TEST_CASE("minimal document with defaults") {
  const ProblemFile file = ParseProblem(MinimalDoc());
  CHECK(file.instance.name == "toy");
  CHECK(file.instance.dimension == 2);
  CHECK(file.defaults.method == "exp");
  CHECK(file.defaults.beta == 0.5);
  REQUIRE(file.defaults.degrees.has_value());
  CHECK(*file.defaults.degrees == std::vector<int>{4, 6});
  CHECK_FALSE(file.defaults.alpha_m.has_value());
  const ProblemFile again = ParseProblem(SerializeProblem(file));
  CHECK(again.defaults.beta == 0.5);
}

TEST_CASE("malformed documents name the offending field") {
  json doc = MinimalDoc();
  doc.erase("safe");
  CHECK(ErrorOf(doc).find("safe") != std::string::npos);

  doc = MinimalDoc();
  doc["dynamics"] = {"-x1"};
  CHECK(ErrorOf(doc).find("dynamics") != std::string::npos);

  doc = MinimalDoc();
  doc["initial"]["constraints"] = {"x1 +* 2"};
  CHECK(ErrorOf(doc).find("initial") != std::string::npos);

  doc = MinimalDoc();
  doc["bounding_box"] = {{1, -1}, {-1, 1}};
  CHECK(ErrorOf(doc).find("bounding_box") != std::string::npos);

  doc = MinimalDoc();
  doc["schema_version"] = 7;
  CHECK(ErrorOf(doc).find("schema_version") != std::string::npos);

  doc = MinimalDoc();
  doc["dimension"] = 0;
  CHECK(ErrorOf(doc).find("dimension") != std::string::npos);

  doc = MinimalDoc();
  doc["defaults"]["method"] = "nosuch";
  CHECK(ErrorOf(doc).find("defaults") != std::string::npos);

  // A variable beyond the dimension.
  doc = MinimalDoc();
  doc["safe"]["h"] = "x3^2 - 1";
  CHECK(ErrorOf(doc).find("safe") != std::string::npos);

  CHECK(ErrorOf(json::array()) != "");
  CHECK_THROWS_AS(LoadProblem("/nonexistent/problem.json"), ProblemError);
}
