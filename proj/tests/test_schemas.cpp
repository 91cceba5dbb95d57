// Validates every artifact the command-line tool emits against the schema
// files shipped in schemas/. The checker below implements the draft-07
// subset those schemas use: type, enum, numeric and length bounds, items,
// properties/required/additionalProperties, and $ref (internal definitions
// and sibling schema files).

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kSchemaNames[] = {
    "manifest.schema.json",       "instance.schema.json",
    "strategy.schema.json",       "run_report.schema.json",
    "ground_report.schema.json",  "validate_report.schema.json",
    "witness_report.schema.json", "claim1_report.schema.json",
    "optimize_trace.schema.json", "code_tables.schema.json",
};

class SchemaChecker {
 public:
  explicit SchemaChecker(std::string dir) : dir_(std::move(dir)) {}

  std::vector<std::string> validate(const std::string& schema_name, const json& value) {
    std::vector<std::string> errors;
    const json& schema = load(schema_name);
    check(schema, schema, value, "$", errors);
    return errors;
  }

  const json& load(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    std::ifstream in(dir_ + "/" + name);
    REQUIRE_MESSAGE(in.good(), "cannot open schema ", name);
    json parsed = json::parse(in);
    return cache_.emplace(name, std::move(parsed)).first->second;
  }

 private:
  static bool matches_type(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "number") return value.is_number();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
  }

  void check(const json& schema, const json& root, const json& value, const std::string& path,
             std::vector<std::string>& errors) {
    if (schema.contains("$ref")) {
      const std::string ref = schema["$ref"].get<std::string>();
      const std::string prefix = "#/definitions/";
      if (ref.rfind(prefix, 0) == 0) {
        const std::string name = ref.substr(prefix.size());
        REQUIRE_MESSAGE(root.contains("definitions"), "missing definitions for ", ref);
        check(root["definitions"].at(name), root, value, path, errors);
      } else {
        const json& external = load(ref);
        check(external, external, value, path, errors);
      }
      return;
    }

    if (schema.contains("type")) {
      const json& type = schema["type"];
      bool ok = false;
      if (type.is_string()) {
        ok = matches_type(value, type.get<std::string>());
      } else {
        for (const json& t : type) ok = ok || matches_type(value, t.get<std::string>());
      }
      if (!ok) {
        errors.push_back(path + ": expected type " + type.dump());
        return;
      }
    }

    if (schema.contains("enum")) {
      bool ok = false;
      for (const json& candidate : schema["enum"]) ok = ok || (value == candidate);
      if (!ok) errors.push_back(path + ": value " + value.dump() + " not in enum");
    }

    if (value.is_number()) {
      if (schema.contains("minimum") && value.get<double>() < schema["minimum"].get<double>()) {
        errors.push_back(path + ": below minimum");
      }
      if (schema.contains("maximum") && value.get<double>() > schema["maximum"].get<double>()) {
        errors.push_back(path + ": above maximum");
      }
    }

    if (value.is_string()) {
      const auto length = value.get<std::string>().size();
      if (schema.contains("minLength") && length < schema["minLength"].get<size_t>()) {
        errors.push_back(path + ": shorter than minLength");
      }
      if (schema.contains("maxLength") && length > schema["maxLength"].get<size_t>()) {
        errors.push_back(path + ": longer than maxLength");
      }
    }

    if (value.is_array()) {
      if (schema.contains("minItems") && value.size() < schema["minItems"].get<size_t>()) {
        errors.push_back(path + ": fewer than minItems elements");
      }
      if (schema.contains("maxItems") && value.size() > schema["maxItems"].get<size_t>()) {
        errors.push_back(path + ": more than maxItems elements");
      }
      if (schema.contains("items")) {
        for (size_t i = 0; i < value.size(); ++i) {
          check(schema["items"], root, value[i], path + "[" + std::to_string(i) + "]", errors);
        }
      }
    }

    if (value.is_object()) {
      if (schema.contains("required")) {
        for (const json& key : schema["required"]) {
          if (!value.contains(key.get<std::string>())) {
            errors.push_back(path + ": missing required field " + key.dump());
          }
        }
      }
      const json empty = json::object();
      const json& properties = schema.contains("properties") ? schema["properties"] : empty;
      for (const auto& item : value.items()) {
        if (properties.contains(item.key())) {
          check(properties[item.key()], root, item.value(), path + "." + item.key(), errors);
        } else if (schema.contains("additionalProperties") &&
                   schema["additionalProperties"].is_boolean() &&
                   !schema["additionalProperties"].get<bool>()) {
          errors.push_back(path + ": unexpected field " + item.key());
        }
      }
    }
  }

  std::string dir_;
  std::map<std::string, json> cache_;
};

SchemaChecker& checker() {
  static SchemaChecker instance(QMIP_SCHEMA_DIR);
  return instance;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(QMIP_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "qmip_schema_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return (work_dir() / name).string(); }

json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open ", path);
  return json::parse(in);
}

void expect_valid(const std::string& schema, const std::string& path) {
  const std::vector<std::string> errors = checker().validate(schema, load_json(path));
  for (const std::string& e : errors) MESSAGE(path, " vs ", schema, ": ", e);
  CHECK(errors.empty());
}

// One-qubit instance with the excited-state projector as its only term;
// small enough that extraction and optimization stay quick.
void write_projector_instance(const std::string& path) {
  std::ofstream out(path);
  out << R"({"n":1,"k":1,"terms":[{"qubits":[0],)"
      << R"("matrix":[[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}]})" << "\n";
}

}  // namespace

TEST_CASE("published schemas parse and declare draft-07") {
  for (const char* name : kSchemaNames) {
    const json& schema = checker().load(name);
    CHECK(schema["$schema"] == "http://json-schema.org/draft-07/schema#");
    CHECK(schema["$id"] == name);
    CHECK(schema["type"] == "object");
  }
}

TEST_CASE("the checker rejects structural violations") {
  json doc;
  doc["report"] = {{"p_test1", 0.5}, {"p_test2", 1.0}, {"p_overall", 0.75}, {"mode", "exact"}};
  doc["manifest"] = {{"tool_version", "1.0.0"},
                     {"command_line", "qmip run"},
                     {"inputs", json::array({{{"path", "a.json"},
                                              {"digest_fnv1a64", "0123456789abcdef"}}})},
                     {"seed", nullptr},
                     {"timestamp", "2026-01-01T00:00:00Z"},
                     {"outputs", json::array()}};
  CHECK(checker().validate("run_report.schema.json", doc).empty());

  json extra = doc;
  extra["report"]["surprise"] = 1;
  CHECK_FALSE(checker().validate("run_report.schema.json", extra).empty());

  json missing = doc;
  missing["report"].erase("p_test1");
  CHECK_FALSE(checker().validate("run_report.schema.json", missing).empty());

  json bad_mode = doc;
  bad_mode["report"]["mode"] = "banana";
  CHECK_FALSE(checker().validate("run_report.schema.json", bad_mode).empty());

  json bad_shots = doc;
  bad_shots["report"]["mode"] = "sample";
  bad_shots["report"]["shots"] = 0;
  CHECK_FALSE(checker().validate("run_report.schema.json", bad_shots).empty());

  json bad_digest = doc;
  bad_digest["manifest"]["inputs"][0]["digest_fnv1a64"] = "short";
  CHECK_FALSE(checker().validate("run_report.schema.json", bad_digest).empty());

  json bad_seed = doc;
  bad_seed["manifest"]["seed"] = "seven";
  CHECK_FALSE(checker().validate("run_report.schema.json", bad_seed).empty());

  json wrong_top = json::array();
  CHECK_FALSE(checker().validate("run_report.schema.json", wrong_top).empty());
}

TEST_CASE("generated artifacts validate against their schemas") {
  REQUIRE(run_cli("gen epr-chain --n 3 --out " + path_of("i3.json")) == 0);
  expect_valid("instance.schema.json", path_of("i3.json"));

  REQUIRE(run_cli("gen random --n 2 --k 2 --m 2 --seed 4 --out " + path_of("ir.json")) == 0);
  expect_valid("instance.schema.json", path_of("ir.json"));

  REQUIRE(run_cli("strategy honest --instance " + path_of("i3.json") + " --out " +
                  path_of("s3.json")) == 0);
  expect_valid("strategy.schema.json", path_of("s3.json"));

  REQUIRE(run_cli("validate " + path_of("i3.json") + " --out " + path_of("v.json")) == 0);
  expect_valid("validate_report.schema.json", path_of("v.json"));

  REQUIRE(run_cli("ground " + path_of("i3.json") + " --witness --out " + path_of("g.json")) ==
          0);
  expect_valid("ground_report.schema.json", path_of("g.json"));

  REQUIRE(run_cli("run --instance " + path_of("i3.json") + " --strategy " + path_of("s3.json") +
                  " --mode exact --out " + path_of("re.json")) == 0);
  expect_valid("run_report.schema.json", path_of("re.json"));

  REQUIRE(run_cli("run --instance " + path_of("i3.json") + " --strategy " + path_of("s3.json") +
                  " --mode sample --shots 200 --seed 3 --out " + path_of("rs.json")) == 0);
  expect_valid("run_report.schema.json", path_of("rs.json"));

  write_projector_instance(path_of("p1.json"));
  REQUIRE(run_cli("strategy honest --instance " + path_of("p1.json") + " --out " +
                  path_of("sp1.json")) == 0);
  expect_valid("strategy.schema.json", path_of("sp1.json"));

  REQUIRE(run_cli("extract --instance " + path_of("p1.json") + " --strategy " +
                  path_of("sp1.json") + " --out " + path_of("w.json")) == 0);
  expect_valid("witness_report.schema.json", path_of("w.json"));

  REQUIRE(run_cli("diagnose claim1 --strategy " + path_of("sp1.json") +
                  " --qubit 0 --set 0 --out " + path_of("c.json")) == 0);
  expect_valid("claim1_report.schema.json", path_of("c.json"));

  REQUIRE(run_cli("optimize --instance " + path_of("p1.json") +
                  " --restarts 1 --sweeps 2 --seed 1 --out " + path_of("t.json") +
                  " --strategy-out " + path_of("bs.json")) == 0);
  expect_valid("optimize_trace.schema.json", path_of("t.json"));
  expect_valid("strategy.schema.json", path_of("bs.json"));

  REQUIRE(run_cli("code tables --out " + path_of("ct.json")) == 0);
  expect_valid("code_tables.schema.json", path_of("ct.json"));
}

TEST_CASE("reports printed to standard output validate too") {
  const std::string instance = path_of("i3.json");
  if (!fs::exists(instance)) {
    REQUIRE(run_cli("gen epr-chain --n 3 --out " + instance) == 0);
  }
  const std::string command = std::string(QMIP_CLI_PATH) + " ground " + instance + " > " +
                              path_of("stdout_ground.json") + " 2>/dev/null";
  const int status = std::system(command.c_str());
  REQUIRE((WIFEXITED(status) && WEXITSTATUS(status) == 0));
  expect_valid("ground_report.schema.json", path_of("stdout_ground.json"));
}
