#include "qmip.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qmip/code5.hpp"
#include "qmip/extraction.hpp"
#include "qmip/hamiltonian.hpp"
#include "qmip/json_io.hpp"
#include "qmip/optimizer.hpp"
#include "qmip/protocol.hpp"
#include "qmip/strategy.hpp"

// The C boundary: opaque handles wrap the value types, every entry point
// funnels exceptions into status codes plus a thread-local message, and all
// JSON leaves through one writer so numeric formatting is uniform.

struct qmip_instance {
  qmip::HamiltonianInstance value;
};

struct qmip_strategy {
  qmip::ProverStrategy value;
};

namespace {

using ojson = nlohmann::ordered_json;

std::string& error_buffer() {
  thread_local std::string buffer;
  return buffer;
}

qmip_status set_error(qmip_status status, const std::string& message) {
  error_buffer() = message;
  return status;
}

// Runs the body and maps anything thrown onto a status code. Order matters:
// the more specific standard exceptions derive from logic_error.
template <typename Fn>
qmip_status guarded(Fn&& body) {
  try {
    body();
    error_buffer().clear();
    return QMIP_OK;
  } catch (const std::bad_alloc&) {
    return set_error(QMIP_ERROR_NO_MEMORY, "out of memory");
  } catch (const nlohmann::json::exception& e) {
    return set_error(QMIP_ERROR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(QMIP_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return set_error(QMIP_ERROR_OUT_OF_RANGE, e.what());
  } catch (const std::logic_error& e) {
    return set_error(QMIP_ERROR_LOGIC, e.what());
  } catch (const std::exception& e) {
    return set_error(QMIP_ERROR_INTERNAL, e.what());
  } catch (...) {
    return set_error(QMIP_ERROR_INTERNAL, "unknown error");
  }
}

qmip_status missing(const char* what) {
  return set_error(QMIP_ERROR_INVALID_ARGUMENT, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.data(), text.size() + 1);
  return out;
}

// Serializer matching the library's pretty JSON layout but printing floats
// with up to 17 significant digits, which round-trips doubles exactly and
// keeps equal inputs byte-identical.
void write_json(const ojson& value, std::string& out, int depth) {
  constexpr int kIndent = 2;
  switch (value.type()) {
    case ojson::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out.append(static_cast<size_t>(depth + 1) * kIndent, ' ');
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        write_json(it.value(), out, depth + 1);
      }
      out += '\n';
      out.append(static_cast<size_t>(depth) * kIndent, ' ');
      out += '}';
      return;
    }
    case ojson::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < value.size(); ++i) {
        if (i > 0) out += ",\n";
        out.append(static_cast<size_t>(depth + 1) * kIndent, ' ');
        write_json(value[i], out, depth + 1);
      }
      out += '\n';
      out.append(static_cast<size_t>(depth) * kIndent, ' ');
      out += ']';
      return;
    }
    case ojson::value_t::number_float: {
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw std::logic_error("json writer: non-finite number");
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += value.dump();  // strings, integers, booleans, null
      return;
  }
}

std::string dump_json(const ojson& value) {
  std::string out;
  write_json(value, out, 0);
  return out;
}

char* dump_to_cstring(const ojson& value) { return dup_string(dump_json(value)); }

ojson complex_json(const qmip::cdouble& z) { return ojson::array({z.real(), z.imag()}); }

ojson vector_json(const qmip::CVector& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

ojson matrix_json(const qmip::CMatrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Re-emit a library-serialized document through the 17-digit writer.
std::string reformat(const std::string& json_text) {
  return dump_json(ojson::parse(json_text));
}

ojson trace_json(const qmip::OptimizerTrace& trace, int restart) {
  ojson entry;
  entry["restart"] = restart;
  entry["final_value"] = trace.final_value;
  entry["converged"] = trace.converged;
  entry["num_sweeps"] = trace.sweep_values.size();
  entry["sweep_values"] = trace.sweep_values;
  return entry;
}

}  // namespace

extern "C" {

const char* qmip_version(void) { return "1.0.0"; }

const char* qmip_status_name(qmip_status status) {
  switch (status) {
    case QMIP_OK:
      return "ok";
    case QMIP_ERROR_INVALID_ARGUMENT:
      return "invalid_argument";
    case QMIP_ERROR_OUT_OF_RANGE:
      return "out_of_range";
    case QMIP_ERROR_PARSE:
      return "parse";
    case QMIP_ERROR_IO:
      return "io";
    case QMIP_ERROR_LOGIC:
      return "logic";
    case QMIP_ERROR_NO_MEMORY:
      return "no_memory";
    case QMIP_ERROR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* qmip_last_error(void) { return error_buffer().c_str(); }

void qmip_set_threads(int count) { Eigen::setNbThreads(count < 1 ? 0 : count); }

void qmip_string_free(char* text) { std::free(text); }

void qmip_instance_free(qmip_instance* instance) { delete instance; }

void qmip_strategy_free(qmip_strategy* strategy) { delete strategy; }

qmip_status qmip_read_file(const char* path, char** contents_out) {
  if (path == nullptr) return missing("qmip_read_file: path");
  if (contents_out == nullptr) return missing("qmip_read_file: contents_out");
  try {
    *contents_out = dup_string(qmip::read_file(path));
    error_buffer().clear();
    return QMIP_OK;
  } catch (const std::bad_alloc&) {
    return set_error(QMIP_ERROR_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(QMIP_ERROR_IO, e.what());
  }
}

qmip_status qmip_write_file_atomic(const char* path, const char* contents) {
  if (path == nullptr) return missing("qmip_write_file_atomic: path");
  if (contents == nullptr) return missing("qmip_write_file_atomic: contents");
  try {
    qmip::atomic_write_file(path, contents);
    error_buffer().clear();
    return QMIP_OK;
  } catch (const std::exception& e) {
    return set_error(QMIP_ERROR_IO, e.what());
  }
}

qmip_status qmip_digest_hex64(const char* bytes, size_t length, char** hex_out) {
  if (bytes == nullptr && length > 0) return missing("qmip_digest_hex64: bytes");
  if (hex_out == nullptr) return missing("qmip_digest_hex64: hex_out");
  return guarded([&] {
    const std::string_view view =
        length == 0 ? std::string_view() : std::string_view(bytes, length);
    *hex_out = dup_string(qmip::hex64(qmip::fnv1a64(view)));
  });
}

qmip_status qmip_instance_parse(const char* json_text, qmip_instance** instance_out) {
  if (json_text == nullptr) return missing("qmip_instance_parse: json_text");
  if (instance_out == nullptr) return missing("qmip_instance_parse: instance_out");
  return guarded([&] {
    // Surface malformed text as a parse error; the library folds it into its
    // shape diagnostics otherwise.
    [[maybe_unused]] const ojson probe = ojson::parse(json_text);
    *instance_out = new qmip_instance{qmip::parse_instance(json_text)};
  });
}

qmip_status qmip_instance_serialize(const qmip_instance* instance, char** json_out) {
  if (instance == nullptr) return missing("qmip_instance_serialize: instance");
  if (json_out == nullptr) return missing("qmip_instance_serialize: json_out");
  return guarded([&] {
    *json_out = dup_string(reformat(qmip::serialize_instance(instance->value)));
  });
}

qmip_status qmip_gen_epr_chain(int num_qubits, qmip_instance** instance_out) {
  if (instance_out == nullptr) return missing("qmip_gen_epr_chain: instance_out");
  return guarded([&] {
    *instance_out = new qmip_instance{qmip::gen_epr_chain(num_qubits)};
  });
}

qmip_status qmip_gen_random(int num_qubits, int locality, int num_terms, uint64_t seed,
                            qmip_instance** instance_out) {
  if (instance_out == nullptr) return missing("qmip_gen_random: instance_out");
  return guarded([&] {
    *instance_out = new qmip_instance{qmip::gen_random(num_qubits, locality, num_terms, seed)};
  });
}

qmip_status qmip_instance_counts(const qmip_instance* instance, int* num_qubits_out,
                                 int* locality_out, int* num_terms_out) {
  if (instance == nullptr) return missing("qmip_instance_counts: instance");
  if (num_qubits_out != nullptr) *num_qubits_out = instance->value.num_qubits();
  if (locality_out != nullptr) *locality_out = instance->value.locality();
  if (num_terms_out != nullptr) *num_terms_out = instance->value.num_terms();
  error_buffer().clear();
  return QMIP_OK;
}

qmip_status qmip_ground(const qmip_instance* instance, int include_witness, char** json_out) {
  if (instance == nullptr) return missing("qmip_ground: instance");
  if (json_out == nullptr) return missing("qmip_ground: json_out");
  return guarded([&] {
    const qmip::GroundResult result = qmip::ground(instance->value);
    ojson j;
    j["num_qubits"] = instance->value.num_qubits();
    j["num_terms"] = instance->value.num_terms();
    j["energy"] = result.energy;
    j["normalized_energy"] = result.energy / instance->value.num_terms();
    if (include_witness != 0) j["witness"] = vector_json(result.witness.amplitudes());
    *json_out = dump_to_cstring(j);
  });
}

qmip_status qmip_strategy_parse(const char* json_text, qmip_strategy** strategy_out) {
  if (json_text == nullptr) return missing("qmip_strategy_parse: json_text");
  if (strategy_out == nullptr) return missing("qmip_strategy_parse: strategy_out");
  return guarded([&] {
    [[maybe_unused]] const ojson probe = ojson::parse(json_text);
    *strategy_out = new qmip_strategy{qmip::parse_strategy(json_text)};
  });
}

qmip_status qmip_strategy_serialize(const qmip_strategy* strategy, char** json_out) {
  if (strategy == nullptr) return missing("qmip_strategy_serialize: strategy");
  if (json_out == nullptr) return missing("qmip_strategy_serialize: json_out");
  return guarded([&] {
    *json_out = dup_string(reformat(qmip::serialize_strategy(strategy->value)));
  });
}

qmip_status qmip_strategy_honest(const qmip_instance* instance, qmip_strategy** strategy_out) {
  if (instance == nullptr) return missing("qmip_strategy_honest: instance");
  if (strategy_out == nullptr) return missing("qmip_strategy_honest: strategy_out");
  return guarded([&] {
    const qmip::GroundResult result = qmip::ground(instance->value);
    *strategy_out = new qmip_strategy{qmip::honest(instance->value, result.witness)};
  });
}

qmip_status qmip_strategy_epr_cheat(int num_qubits, qmip_strategy** strategy_out) {
  if (strategy_out == nullptr) return missing("qmip_strategy_epr_cheat: strategy_out");
  return guarded([&] {
    *strategy_out = new qmip_strategy{qmip::epr_pair_cheat(num_qubits)};
  });
}

qmip_status qmip_strategy_perturb(const qmip_strategy* strategy, double theta, uint64_t seed,
                                  qmip_strategy** strategy_out) {
  if (strategy == nullptr) return missing("qmip_strategy_perturb: strategy");
  if (strategy_out == nullptr) return missing("qmip_strategy_perturb: strategy_out");
  return guarded([&] {
    *strategy_out = new qmip_strategy{qmip::perturb(strategy->value, theta, seed)};
  });
}

qmip_status qmip_run_exact(const qmip_instance* instance, const qmip_strategy* strategy,
                           char** report_json_out) {
  if (instance == nullptr) return missing("qmip_run_exact: instance");
  if (strategy == nullptr) return missing("qmip_run_exact: strategy");
  if (report_json_out == nullptr) return missing("qmip_run_exact: report_json_out");
  return guarded([&] {
    const qmip::AcceptanceReport report =
        qmip::accept_probability_exact(instance->value, strategy->value);
    ojson j;
    j["p_test1"] = report.p_test1;
    j["p_test2"] = report.p_test2;
    j["p_overall"] = report.p_overall;
    j["mode"] = "exact";
    *report_json_out = dump_to_cstring(j);
  });
}

qmip_status qmip_run_sampled(const qmip_instance* instance, const qmip_strategy* strategy,
                             long long shots, uint64_t seed, char** report_json_out) {
  if (instance == nullptr) return missing("qmip_run_sampled: instance");
  if (strategy == nullptr) return missing("qmip_run_sampled: strategy");
  if (report_json_out == nullptr) return missing("qmip_run_sampled: report_json_out");
  return guarded([&] {
    const qmip::AcceptanceReport report =
        qmip::accept_probability_sampled(instance->value, strategy->value, shots, seed);
    if (!report.sampled.has_value()) {
      throw std::logic_error("sampled run produced no sampling record");
    }
    ojson j;
    j["p_test1"] = report.p_test1;
    j["p_test2"] = report.p_test2;
    j["p_overall"] = report.p_overall;
    j["mode"] = "sample";
    j["shots"] = report.sampled->shots;
    j["seed"] = report.sampled->seed;
    j["std_error"] = report.sampled->std_error;
    *report_json_out = dump_to_cstring(j);
  });
}

qmip_status qmip_extract(const qmip_instance* instance, const qmip_strategy* strategy,
                         char** witness_json_out) {
  if (instance == nullptr) return missing("qmip_extract: instance");
  if (strategy == nullptr) return missing("qmip_extract: strategy");
  if (witness_json_out == nullptr) return missing("qmip_extract: witness_json_out");
  return guarded([&] {
    const qmip::ExtractionResult result =
        qmip::extract_witness(strategy->value, instance->value);
    ojson j;
    j["num_qubits"] = result.sigma.num_qubits();
    j["sigma"] = matrix_json(result.sigma.matrix());
    j["normalized_energy"] = result.normalized_energy;
    ojson diagnostics;
    diagnostics["trace"] = result.sigma.trace();
    diagnostics["steps"] = result.steps;
    j["diagnostics"] = std::move(diagnostics);
    *witness_json_out = dump_to_cstring(j);
  });
}

qmip_status qmip_claim1(const qmip_strategy* strategy, int qubit, const int* set,
                        int set_length, char** json_out) {
  if (strategy == nullptr) return missing("qmip_claim1: strategy");
  if (set == nullptr) return missing("qmip_claim1: set");
  if (json_out == nullptr) return missing("qmip_claim1: json_out");
  return guarded([&] {
    if (set_length < 1) throw std::invalid_argument("qmip_claim1: set must be non-empty");
    const std::vector<int> question_set(set, set + set_length);
    ojson j;
    j["qubit"] = qubit;
    j["set"] = question_set;
    ojson per_prover = ojson::array();
    double sum = 0.0;
    for (int t = 0; t < qmip::kNumProvers; ++t) {
      const double value = qmip::claim1_deviation(strategy->value, t, qubit, question_set);
      per_prover.push_back(value);
      sum += value;
    }
    j["per_prover"] = std::move(per_prover);
    j["mean"] = sum / qmip::kNumProvers;

    // The averaged view: the same deviation over every qubit, every covering
    // set of the strategy's arity, and every prover.
    const int n = strategy->value.layout().num_logical();
    const int arity = strategy->value.set_arity().value_or(set_length);
    double total = 0.0;
    long long count = 0;
    for (int i = 0; i < n; ++i) {
      for (const std::vector<int>& s : qmip::sorted_subsets(n, arity)) {
        if (std::find(s.begin(), s.end(), i) == s.end()) continue;
        for (int t = 0; t < qmip::kNumProvers; ++t) {
          total += qmip::claim1_deviation(strategy->value, t, i, s);
          ++count;
        }
      }
    }
    ojson aggregate;
    aggregate["value"] = count > 0 ? total / static_cast<double>(count) : 0.0;
    aggregate["num_terms"] = count;
    aggregate["set_arity"] = arity;
    j["aggregate"] = std::move(aggregate);
    *json_out = dump_to_cstring(j);
  });
}

qmip_status qmip_optimize(const qmip_instance* instance, int restarts, int sweeps,
                          uint64_t seed, char** trace_json_out,
                          qmip_strategy** best_strategy_out) {
  if (instance == nullptr) return missing("qmip_optimize: instance");
  if (trace_json_out == nullptr) return missing("qmip_optimize: trace_json_out");
  return guarded([&] {
    qmip::OptimizerConfig config;
    config.max_sweeps = sweeps;
    config.seed = seed;
    std::vector<qmip::OptimizerTrace> traces =
        qmip::restart_traces(instance->value, config, restarts);
    size_t best = 0;
    for (size_t r = 1; r < traces.size(); ++r) {
      if (traces[r].final_value > traces[best].final_value) best = r;
    }
    ojson j;
    j["restarts"] = restarts;
    j["sweeps"] = sweeps;
    j["seed"] = seed;
    j["tolerance"] = config.tolerance;
    j["best"] = trace_json(traces[best], static_cast<int>(best));
    ojson per_restart = ojson::array();
    for (size_t r = 0; r < traces.size(); ++r) {
      per_restart.push_back(trace_json(traces[r], static_cast<int>(r)));
    }
    j["per_restart"] = std::move(per_restart);
    const std::string text = dump_json(j);
    qmip_strategy* best_handle = nullptr;
    if (best_strategy_out != nullptr) {
      best_handle = new qmip_strategy{std::move(traces[best].final_strategy)};
    }
    try {
      *trace_json_out = dup_string(text);
    } catch (...) {
      delete best_handle;
      throw;
    }
    if (best_strategy_out != nullptr) *best_strategy_out = best_handle;
  });
}

qmip_status qmip_code_tables(char** json_out) {
  if (json_out == nullptr) return missing("qmip_code_tables: json_out");
  return guarded([&] {
    const qmip::FiveQubitCode& code = qmip::FiveQubitCode::instance();
    ojson j;
    j["physical_qubits"] = code.physical_qubits();
    j["stabilizer_generators"] = code.stabilizer_generators();
    j["logical_x"] = code.logical_x();
    j["logical_z"] = code.logical_z();
    ojson codewords;
    codewords["zero"] = vector_json(code.encoding_isometry().col(0));
    codewords["one"] = vector_json(code.encoding_isometry().col(1));
    j["codewords"] = std::move(codewords);
    ojson corrections = ojson::array();
    for (int s = 0; s < 16; ++s) {
      ojson entry;
      entry["syndrome"] = s;
      entry["correction"] = code.correction_labels()[static_cast<size_t>(s)];
      corrections.push_back(std::move(entry));
    }
    j["syndrome_corrections"] = std::move(corrections);
    *json_out = dump_to_cstring(j);
  });
}

}  // extern "C"
