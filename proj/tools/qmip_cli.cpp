// Command-line front end. Everything substantive happens behind the C API in
// qmip.h; this file only parses arguments, moves bytes between files and the
// library, and wraps analysis payloads in a run manifest.
//
// Exit codes: 0 success, 1 validation or I/O failure, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmip.h"

namespace {

using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scope guards for the C allocations.
struct CString {
  char* value = nullptr;
  ~CString() { qmip_string_free(value); }
  std::string str() const { return value == nullptr ? std::string() : std::string(value); }
};

struct InstanceHandle {
  qmip_instance* handle = nullptr;
  ~InstanceHandle() { qmip_instance_free(handle); }
};

struct StrategyHandle {
  qmip_strategy* handle = nullptr;
  ~StrategyHandle() { qmip_strategy_free(handle); }
};

void check(qmip_status status) {
  if (status != QMIP_OK) throw std::runtime_error(qmip_last_error());
}

std::string read_file(const std::string& path) {
  CString contents;
  check(qmip_read_file(path.c_str(), &contents.value));
  return contents.str();
}

void write_file(const std::string& path, const std::string& contents) {
  check(qmip_write_file_atomic(path.c_str(), contents.c_str()));
}

std::string digest(const std::string& bytes) {
  CString hex;
  check(qmip_digest_hex64(bytes.data(), bytes.size(), &hex.value));
  return hex.str();
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

// Everything the run manifest records besides the timestamp. Identical
// manifests give bit-identical payloads, so reports are reproducible.
struct Manifest {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
};

ojson manifest_json(const Manifest& manifest) {
  ojson j;
  j["tool_version"] = qmip_version();
  j["command_line"] = manifest.command_line;
  ojson inputs = ojson::array();
  for (const auto& [path, hex] : manifest.inputs) {
    ojson entry;
    entry["path"] = path;
    entry["digest_fnv1a64"] = hex;
    inputs.push_back(std::move(entry));
  }
  j["inputs"] = std::move(inputs);
  if (manifest.seed.has_value()) {
    j["seed"] = *manifest.seed;
  } else {
    j["seed"] = nullptr;
  }
  j["timestamp"] = iso_timestamp();
  j["outputs"] = manifest.outputs;
  return j;
}

// Shifts the continuation lines of an embedded pretty-printed block so the
// composed document stays consistently indented.
std::string indent_block(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    out += c;
    if (c == '\n') out += "  ";
  }
  return out;
}

// A report document: the payload as produced by the library (its float
// formatting preserved verbatim) plus the manifest.
std::string compose_report(const std::string& payload, const Manifest& manifest) {
  std::string doc = "{\n  \"report\": ";
  doc += indent_block(payload);
  doc += ",\n  \"manifest\": ";
  doc += indent_block(manifest_json(manifest).dump(2));
  doc += "\n}";
  return doc;
}

void emit_report(const std::string& payload, const Manifest& manifest,
                 const std::string& out_path) {
  const std::string doc = compose_report(payload, manifest);
  if (out_path.empty()) {
    std::cout << doc << "\n";
  } else {
    write_file(out_path, doc + "\n");
  }
}

// Instance and strategy files are bare artifacts (no manifest wrapper) so
// they feed straight back into the other subcommands.
void emit_artifact(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload << "\n";
  } else {
    write_file(out_path, payload + "\n");
  }
}

void load_instance(const std::string& path, Manifest& manifest, InstanceHandle& out) {
  const std::string bytes = read_file(path);
  manifest.inputs.emplace_back(path, digest(bytes));
  check(qmip_instance_parse(bytes.c_str(), &out.handle));
}

void load_strategy(const std::string& path, Manifest& manifest, StrategyHandle& out) {
  const std::string bytes = read_file(path);
  manifest.inputs.emplace_back(path, digest(bytes));
  check(qmip_strategy_parse(bytes.c_str(), &out.handle));
}

std::vector<int> parse_set(const std::string& text) {
  std::vector<int> set;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    try {
      size_t used = 0;
      const int value = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      set.push_back(value);
    } catch (const std::exception&) {
      throw UsageError("--set expects comma-separated qubit indices, got '" + text + "'");
    }
    pos = comma + 1;
  }
  return set;
}

void write_run_csv(const std::string& payload, const std::string& path) {
  const nlohmann::json report = nlohmann::json::parse(payload);
  std::string csv = "p_test1,p_test2,p_overall,mode,shots,seed,std_error\n";
  csv += format_number(report.at("p_test1").get<double>()) + ",";
  csv += format_number(report.at("p_test2").get<double>()) + ",";
  csv += format_number(report.at("p_overall").get<double>()) + ",";
  csv += report.at("mode").get<std::string>() + ",";
  csv += report.contains("shots") ? std::to_string(report["shots"].get<long long>()) : "";
  csv += ",";
  csv += report.contains("seed") ? std::to_string(report["seed"].get<std::uint64_t>()) : "";
  csv += ",";
  csv += report.contains("std_error") ? format_number(report["std_error"].get<double>()) : "";
  csv += "\n";
  write_file(path, csv);
}

void write_claim1_csv(const std::string& payload, const std::string& path) {
  const nlohmann::json report = nlohmann::json::parse(payload);
  std::string csv = "label,value\n";
  const auto& per_prover = report.at("per_prover");
  for (size_t t = 0; t < per_prover.size(); ++t) {
    csv += "prover_" + std::to_string(t) + "," +
           format_number(per_prover[t].get<double>()) + "\n";
  }
  csv += "mean," + format_number(report.at("mean").get<double>()) + "\n";
  csv += "aggregate," +
         format_number(report.at("aggregate").at("value").get<double>()) + "\n";
  write_file(path, csv);
}

void write_optimize_csv(const std::string& payload, const std::string& path) {
  const nlohmann::json trace = nlohmann::json::parse(payload);
  std::string csv = "restart,sweep,value\n";
  for (const auto& entry : trace.at("per_restart")) {
    const int restart = entry.at("restart").get<int>();
    const auto& values = entry.at("sweep_values");
    for (size_t s = 0; s < values.size(); ++s) {
      csv += std::to_string(restart) + "," + std::to_string(s + 1) + "," +
             format_number(values[s].get<double>()) + "\n";
    }
  }
  write_file(path, csv);
}

std::string join_command_line(int argc, char** argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("QMIP_THREADS")) {
    qmip_set_threads(std::atoi(threads));
  }

  CLI::App app{"Exact simulator of the five-prover verification protocol for "
               "k-local Hamiltonians"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qmip_version()));

  Manifest manifest;
  manifest.command_line = join_command_line(argc, argv);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate Hamiltonian instances");
  gen->require_subcommand(1);
  int chain_n = 0;
  std::string gen_out;
  auto* gen_chain = gen->add_subcommand(
      "epr-chain", "Chain of projectors onto the complement of adjacent EPR pairs");
  gen_chain->add_option("--n", chain_n, "Number of qubits")->required();
  gen_chain->add_option("--out", gen_out, "Output instance file");
  gen_chain->callback([&] {
    InstanceHandle instance;
    check(qmip_gen_epr_chain(chain_n, &instance.handle));
    CString text;
    check(qmip_instance_serialize(instance.handle, &text.value));
    emit_artifact(text.str(), gen_out);
  });

  int random_n = 0;
  int random_k = 0;
  int random_m = 0;
  std::uint64_t random_seed = 0;
  auto* gen_random = gen->add_subcommand(
      "random", "Random PSD projector-deficient terms on random qubit subsets");
  gen_random->add_option("--n", random_n, "Number of qubits")->required();
  gen_random->add_option("--k", random_k, "Qubits per term")->required();
  gen_random->add_option("--m", random_m, "Number of terms")->required();
  gen_random->add_option("--seed", random_seed, "Generator seed");
  gen_random->add_option("--out", gen_out, "Output instance file");
  gen_random->callback([&] {
    InstanceHandle instance;
    check(qmip_gen_random(random_n, random_k, random_m, random_seed, &instance.handle));
    CString text;
    check(qmip_instance_serialize(instance.handle, &text.value));
    emit_artifact(text.str(), gen_out);
  });

  // validate
  std::string validate_file;
  std::string validate_out;
  auto* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("file", validate_file, "Instance file")->required();
  validate->add_option("--out", validate_out, "Output report file");
  validate->callback([&] {
    InstanceHandle instance;
    load_instance(validate_file, manifest, instance);
    int n = 0;
    int k = 0;
    int m = 0;
    check(qmip_instance_counts(instance.handle, &n, &k, &m));
    ojson payload;
    payload["valid"] = true;
    payload["n"] = n;
    payload["k"] = k;
    payload["m"] = m;
    if (!validate_out.empty()) manifest.outputs.push_back(validate_out);
    emit_report(payload.dump(2), manifest, validate_out);
  });

  // ground
  std::string ground_file;
  std::string ground_out;
  bool ground_witness = false;
  auto* ground = app.add_subcommand("ground", "Dense ground-state energy");
  ground->add_option("file", ground_file, "Instance file")->required();
  ground->add_flag("--witness", ground_witness, "Include the ground-state amplitudes");
  ground->add_option("--out", ground_out, "Output report file");
  ground->callback([&] {
    InstanceHandle instance;
    load_instance(ground_file, manifest, instance);
    CString payload;
    check(qmip_ground(instance.handle, ground_witness ? 1 : 0, &payload.value));
    if (!ground_out.empty()) manifest.outputs.push_back(ground_out);
    emit_report(payload.str(), manifest, ground_out);
  });

  // strategy
  auto* strategy = app.add_subcommand("strategy", "Construct prover strategies");
  strategy->require_subcommand(1);
  std::string honest_instance;
  std::string honest_out;
  auto* strategy_honest = strategy->add_subcommand(
      "honest", "Encode the ground state qubit-wise into five shares");
  strategy_honest->add_option("--instance", honest_instance, "Instance file")->required();
  strategy_honest->add_option("--out", honest_out, "Output strategy file");
  strategy_honest->callback([&] {
    InstanceHandle instance;
    load_instance(honest_instance, manifest, instance);
    StrategyHandle honest;
    check(qmip_strategy_honest(instance.handle, &honest.handle));
    CString text;
    check(qmip_strategy_serialize(honest.handle, &text.value));
    emit_artifact(text.str(), honest_out);
  });

  // run and sample share all the machinery; sample just pins the mode.
  std::string run_instance;
  std::string run_strategy;
  std::string run_mode = "exact";
  long long run_shots = 0;
  std::uint64_t run_seed = 0;
  std::string run_out;
  std::string run_csv;
  auto* run = app.add_subcommand("run", "Evaluate protocol acceptance for a strategy");
  run->add_option("--instance", run_instance, "Instance file")->required();
  run->add_option("--strategy", run_strategy, "Strategy file")->required();
  run->add_option("--mode", run_mode, "exact or sample")
      ->check(CLI::IsMember({"exact", "sample"}));
  auto* run_shots_opt = run->add_option("--shots", run_shots, "Shots in sample mode");
  auto* run_seed_opt = run->add_option("--seed", run_seed, "Sampler seed");
  run->add_option("--out", run_out, "Output report file");
  run->add_option("--csv", run_csv, "Also write a flat CSV table");

  auto* sample = app.add_subcommand("sample", "Sampled protocol run (run --mode sample)");
  sample->add_option("--instance", run_instance, "Instance file")->required();
  sample->add_option("--strategy", run_strategy, "Strategy file")->required();
  auto* sample_shots_opt = sample->add_option("--shots", run_shots, "Number of shots");
  sample->add_option("--seed", run_seed, "Sampler seed");
  sample->add_option("--out", run_out, "Output report file");
  sample->add_option("--csv", run_csv, "Also write a flat CSV table");

  const auto run_protocol = [&](bool sampling, bool shots_given) {
    InstanceHandle instance;
    StrategyHandle prover_strategy;
    load_instance(run_instance, manifest, instance);
    load_strategy(run_strategy, manifest, prover_strategy);
    CString payload;
    if (sampling) {
      if (!shots_given) throw UsageError("sample mode requires --shots");
      manifest.seed = run_seed;
      check(qmip_run_sampled(instance.handle, prover_strategy.handle, run_shots, run_seed,
                             &payload.value));
    } else {
      check(qmip_run_exact(instance.handle, prover_strategy.handle, &payload.value));
    }
    if (!run_out.empty()) manifest.outputs.push_back(run_out);
    if (!run_csv.empty()) manifest.outputs.push_back(run_csv);
    emit_report(payload.str(), manifest, run_out);
    if (!run_csv.empty()) write_run_csv(payload.str(), run_csv);
  };
  run->callback([&] {
    const bool sampling = run_mode == "sample";
    if (!sampling && (run_shots_opt->count() > 0 || run_seed_opt->count() > 0)) {
      throw UsageError("--shots and --seed only apply to --mode sample");
    }
    run_protocol(sampling, run_shots_opt->count() > 0);
  });
  sample->callback([&] { run_protocol(true, sample_shots_opt->count() > 0); });

  // extract
  std::string extract_instance;
  std::string extract_strategy;
  std::string extract_out;
  auto* extract = app.add_subcommand("extract", "Extract a witness from a strategy");
  extract->add_option("--instance", extract_instance, "Instance file")->required();
  extract->add_option("--strategy", extract_strategy, "Strategy file")->required();
  extract->add_option("--out", extract_out, "Output witness file");
  extract->callback([&] {
    InstanceHandle instance;
    StrategyHandle prover_strategy;
    load_instance(extract_instance, manifest, instance);
    load_strategy(extract_strategy, manifest, prover_strategy);
    CString payload;
    check(qmip_extract(instance.handle, prover_strategy.handle, &payload.value));
    if (!extract_out.empty()) manifest.outputs.push_back(extract_out);
    emit_report(payload.str(), manifest, extract_out);
  });

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Strategy diagnostics");
  diagnose->require_subcommand(1);
  std::string claim1_strategy;
  int claim1_qubit = 0;
  std::string claim1_set;
  std::string claim1_out;
  std::string claim1_csv;
  auto* claim1 = diagnose->add_subcommand(
      "claim1", "Swap-out deviation per prover plus the averaged aggregate");
  claim1->add_option("--strategy", claim1_strategy, "Strategy file")->required();
  claim1->add_option("--qubit", claim1_qubit, "Logical qubit index")->required();
  claim1->add_option("--set", claim1_set, "Comma-separated covering set, e.g. \"0,1\"")
      ->required();
  claim1->add_option("--out", claim1_out, "Output report file");
  claim1->add_option("--csv", claim1_csv, "Also write a flat CSV table");
  claim1->callback([&] {
    StrategyHandle prover_strategy;
    load_strategy(claim1_strategy, manifest, prover_strategy);
    const std::vector<int> set = parse_set(claim1_set);
    CString payload;
    check(qmip_claim1(prover_strategy.handle, claim1_qubit, set.data(),
                      static_cast<int>(set.size()), &payload.value));
    if (!claim1_out.empty()) manifest.outputs.push_back(claim1_out);
    if (!claim1_csv.empty()) manifest.outputs.push_back(claim1_csv);
    emit_report(payload.str(), manifest, claim1_out);
    if (!claim1_csv.empty()) write_claim1_csv(payload.str(), claim1_csv);
  });

  // optimize
  std::string optimize_instance;
  int optimize_restarts = 1;
  int optimize_sweeps = 40;
  std::uint64_t optimize_seed = 0;
  std::string optimize_out;
  std::string optimize_csv;
  std::string optimize_strategy_out;
  auto* optimize = app.add_subcommand("optimize", "See-saw search for cheating strategies");
  optimize->add_option("--instance", optimize_instance, "Instance file")->required();
  optimize->add_option("--restarts", optimize_restarts, "Random restarts");
  optimize->add_option("--sweeps", optimize_sweeps, "Maximum sweeps per restart");
  optimize->add_option("--seed", optimize_seed, "Restart stream seed");
  optimize->add_option("--out", optimize_out, "Output trace file");
  optimize->add_option("--csv", optimize_csv, "Also write sweep values as CSV");
  optimize->add_option("--strategy-out", optimize_strategy_out,
                       "Also write the best strategy found");
  optimize->callback([&] {
    InstanceHandle instance;
    load_instance(optimize_instance, manifest, instance);
    manifest.seed = optimize_seed;
    CString payload;
    StrategyHandle best;
    qmip_strategy** best_out = optimize_strategy_out.empty() ? nullptr : &best.handle;
    check(qmip_optimize(instance.handle, optimize_restarts, optimize_sweeps, optimize_seed,
                        &payload.value, best_out));
    if (!optimize_out.empty()) manifest.outputs.push_back(optimize_out);
    if (!optimize_csv.empty()) manifest.outputs.push_back(optimize_csv);
    if (!optimize_strategy_out.empty()) manifest.outputs.push_back(optimize_strategy_out);
    emit_report(payload.str(), manifest, optimize_out);
    if (!optimize_csv.empty()) write_optimize_csv(payload.str(), optimize_csv);
    if (!optimize_strategy_out.empty()) {
      CString text;
      check(qmip_strategy_serialize(best.handle, &text.value));
      emit_artifact(text.str(), optimize_strategy_out);
    }
  });

  // code
  auto* code = app.add_subcommand("code", "Five-qubit code inspection");
  code->require_subcommand(1);
  std::string tables_out;
  auto* tables = code->add_subcommand(
      "tables", "Stabilizer generators, codewords, and syndrome corrections");
  tables->add_option("--out", tables_out, "Output report file");
  tables->callback([&] {
    CString payload;
    check(qmip_code_tables(&payload.value));
    if (!tables_out.empty()) manifest.outputs.push_back(tables_out);
    emit_report(payload.str(), manifest, tables_out);
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
