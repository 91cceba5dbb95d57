#ifndef QMIP_H
#define QMIP_H

/* C interface to the five-prover verification simulator.
 *
 * Conventions:
 *   - Every fallible call returns a qmip_status; QMIP_OK means success.
 *     On failure qmip_last_error() holds a message for the calling thread
 *     until its next library call.
 *   - Objects come back through out-parameters as opaque handles owned by
 *     the caller; release them with the matching *_free function.
 *   - Strings returned through char** out-parameters are NUL-terminated,
 *     heap-allocated, and must be released with qmip_string_free.
 *   - JSON payloads serialize doubles with up to 17 significant digits, so
 *     values round-trip exactly and identical inputs give identical bytes.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qmip_status {
  QMIP_OK = 0,
  QMIP_ERROR_INVALID_ARGUMENT = 1, /* rejected input (bad value, bad shape) */
  QMIP_ERROR_OUT_OF_RANGE = 2,     /* index or size outside supported range */
  QMIP_ERROR_PARSE = 3,            /* malformed JSON text */
  QMIP_ERROR_IO = 4,               /* file could not be read or written */
  QMIP_ERROR_LOGIC = 5,            /* internal consistency check failed */
  QMIP_ERROR_NO_MEMORY = 6,
  QMIP_ERROR_INTERNAL = 7
} qmip_status;

/* Opaque handles. */
typedef struct qmip_instance qmip_instance;
typedef struct qmip_strategy qmip_strategy;

/* Library version as "major.minor.patch". Static storage; do not free. */
const char* qmip_version(void);

/* Stable name of a status code, e.g. "invalid_argument". Static storage. */
const char* qmip_status_name(qmip_status status);

/* Message from this thread's most recent failing call; empty string after a
 * success. The pointer stays valid until the thread's next library call. */
const char* qmip_last_error(void);

/* Cap on threads used by the linear-algebra backend. Values < 1 restore the
 * backend default. */
void qmip_set_threads(int count);

void qmip_string_free(char* text);
void qmip_instance_free(qmip_instance* instance);
void qmip_strategy_free(qmip_strategy* strategy);

/* --- artifact plumbing -------------------------------------------------- */

/* Reads a whole file into a fresh string. */
qmip_status qmip_read_file(const char* path, char** contents_out);

/* Writes via a temporary file in the same directory followed by a rename,
 * so readers never observe a half-written file. */
qmip_status qmip_write_file_atomic(const char* path, const char* contents);

/* 16-hex-digit FNV-1a fingerprint of a byte string, for run manifests. */
qmip_status qmip_digest_hex64(const char* bytes, size_t length, char** hex_out);

/* --- Hamiltonian instances ---------------------------------------------- */

qmip_status qmip_instance_parse(const char* json_text, qmip_instance** instance_out);
qmip_status qmip_instance_serialize(const qmip_instance* instance, char** json_out);

/* Chain of n-1 projectors onto the complement of an EPR pair on adjacent
 * qubits; frustrated for n >= 3. */
qmip_status qmip_gen_epr_chain(int num_qubits, qmip_instance** instance_out);

/* num_terms random rank-deficient PSD norm-1 terms on random k-subsets. */
qmip_status qmip_gen_random(int num_qubits, int locality, int num_terms, uint64_t seed,
                            qmip_instance** instance_out);

/* Basic shape; any out-parameter may be NULL. */
qmip_status qmip_instance_counts(const qmip_instance* instance, int* num_qubits_out,
                                 int* locality_out, int* num_terms_out);

/* Dense ground-state solve. JSON fields: num_qubits, num_terms, energy,
 * normalized_energy (energy/m), and with include_witness != 0 the ground
 * state as an array of [re, im] amplitude pairs. */
qmip_status qmip_ground(const qmip_instance* instance, int include_witness, char** json_out);

/* --- prover strategies --------------------------------------------------- */

qmip_status qmip_strategy_parse(const char* json_text, qmip_strategy** strategy_out);
qmip_status qmip_strategy_serialize(const qmip_strategy* strategy, char** json_out);

/* Ground state of the instance, each qubit encoded into five shares; every
 * question is answered with untouched registers. */
qmip_status qmip_strategy_honest(const qmip_instance* instance, qmip_strategy** strategy_out);

/* Two provers share one EPR pair and always return their half. */
qmip_status qmip_strategy_epr_cheat(int num_qubits, qmip_strategy** strategy_out);

/* Multiplies every question unitary by an independent exp(i*theta*G), G
 * random Hermitian of unit norm. theta = 0 copies the strategy. */
qmip_status qmip_strategy_perturb(const qmip_strategy* strategy, double theta, uint64_t seed,
                                  qmip_strategy** strategy_out);

/* --- protocol runs ------------------------------------------------------- */

/* Exact acceptance probabilities. JSON fields: p_test1, p_test2, p_overall,
 * mode ("exact"). */
qmip_status qmip_run_exact(const qmip_instance* instance, const qmip_strategy* strategy,
                           char** report_json_out);

/* Monte Carlo acceptance estimate, deterministic in the seed. JSON fields:
 * p_test1, p_test2, p_overall, mode ("sample"), shots, seed, std_error. */
qmip_status qmip_run_sampled(const qmip_instance* instance, const qmip_strategy* strategy,
                             long long shots, uint64_t seed, char** report_json_out);

/* --- extraction and diagnostics ------------------------------------------ */

/* Witness extraction by swap-out and decoding. JSON fields: num_qubits,
 * sigma (density matrix, rows of [re, im] pairs), normalized_energy, and a
 * diagnostics object (trace, steps). */
qmip_status qmip_extract(const qmip_instance* instance, const qmip_strategy* strategy,
                         char** witness_json_out);

/* Swap-out consistency diagnostic for one (qubit, set) question pair: the
 * squared deviation norm per prover plus their mean, and the same quantity
 * averaged over every qubit, covering set, and prover. JSON fields: qubit,
 * set, per_prover, mean, aggregate {value, num_terms, set_arity}. */
qmip_status qmip_claim1(const qmip_strategy* strategy, int qubit, const int* set,
                        int set_length, char** json_out);

/* --- optimizer ------------------------------------------------------------ */

/* See-saw search over strategies from `restarts` random starting points.
 * JSON fields: restarts, sweeps, seed, best {restart, final_value,
 * converged, sweep_values}, per_restart (same shape per entry). With
 * best_strategy_out non-NULL the best strategy is also returned as a
 * handle. */
qmip_status qmip_optimize(const qmip_instance* instance, int restarts, int sweeps,
                          uint64_t seed, char** trace_json_out,
                          qmip_strategy** best_strategy_out);

/* --- code tables ----------------------------------------------------------- */

/* The five-qubit code's tables. JSON fields: physical_qubits, stabilizer_
 * generators, logical_x, logical_z, codewords {zero, one}, and
 * syndrome_corrections as a 16-entry array of {syndrome, correction}. */
qmip_status qmip_code_tables(char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* QMIP_H */
