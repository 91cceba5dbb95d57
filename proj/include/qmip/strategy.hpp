#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmip/hamiltonian.hpp"
#include "qmip/qmath.hpp"

namespace qmip {

inline constexpr int kNumProvers = 5;

// Global qubit bookkeeping for the five prover registers: prover t owns a
// contiguous block [t*(n+aux), (t+1)*(n+aux)) holding his share of each
// logical qubit followed by his auxiliary qubits.
class RegisterLayout {
 public:
  explicit RegisterLayout(int num_logical, int aux_per_prover = 0);

  int num_logical() const { return num_logical_; }
  int aux_per_prover() const { return aux_per_prover_; }
  int qubits_per_prover() const { return num_logical_ + aux_per_prover_; }
  int total_qubits() const { return kNumProvers * qubits_per_prover(); }

  int share_index(int prover, int logical) const;
  int aux_index(int prover, int aux) const;
  std::vector<int> block(int prover) const;  // ascending global indices
  // Shares of the given logical qubits held by one prover, in list order.
  std::vector<int> share_indices(int prover, const std::vector<int>& logicals) const;

  friend bool operator==(const RegisterLayout&, const RegisterLayout&) = default;

 private:
  int num_logical_;
  int aux_per_prover_;
};

// A question addressed to a single prover.
struct ProverQuestion {
  enum class Kind { kSingleQubit, kQubitSet };
  Kind kind = Kind::kSingleQubit;
  int qubit = 0;          // kSingleQubit
  std::vector<int> set;   // kQubitSet, sorted distinct

  static ProverQuestion single(int qubit) { return {Kind::kSingleQubit, qubit, {}}; }
  static ProverQuestion qubit_set(std::vector<int> set) {
    return {Kind::kQubitSet, 0, std::move(set)};
  }
};

// A full strategy: the shared state plus one block unitary per (prover,
// question). Unitaries default to the identity; set questions may also be
// served by a rule so that the C(n,k) possible sets need not be materialized.
class ProverStrategy {
 public:
  // A rule returns the block matrix for (prover, set), or nullopt to fall
  // back to the identity. Explicitly stored matrices take precedence.
  using SetRule =
      std::function<std::optional<CMatrix>(int prover, const std::vector<int>& set)>;

  ProverStrategy(RegisterLayout layout, PureState shared_state,
                 std::optional<int> set_arity = std::nullopt);

  const RegisterLayout& layout() const { return layout_; }
  const PureState& shared_state() const { return shared_state_; }
  // Size of the set questions this strategy expects (the instance locality);
  // used when perturbing or serializing rule-based strategies.
  std::optional<int> set_arity() const { return set_arity_; }

  void set_single_unitary(int prover, int qubit, CMatrix block_matrix);
  void set_set_unitary(int prover, std::vector<int> set, CMatrix block_matrix);
  void set_set_rule(SetRule rule) { set_rule_ = std::move(rule); }

  // Effective block unitary for a question (identity when nothing is stored).
  CMatrix block_unitary(int prover, const ProverQuestion& question) const;
  // The same unitary as an operator on the global register.
  QubitOperator block_operator(int prover, const ProverQuestion& question) const;

  const std::map<std::pair<int, int>, CMatrix>& stored_singles() const {
    return stored_singles_;
  }
  const std::map<std::pair<int, std::vector<int>>, CMatrix>& stored_sets() const {
    return stored_sets_;
  }

  void validate_question(const ProverQuestion& question) const;

 private:
  RegisterLayout layout_;
  PureState shared_state_;
  std::optional<int> set_arity_;
  std::map<std::pair<int, int>, CMatrix> stored_singles_;
  std::map<std::pair<int, std::vector<int>>, CMatrix> stored_sets_;
  SetRule set_rule_;
};

struct Response {
  PureState state;                 // shared state after the prover's unitary
  std::vector<int> answer_qubits;  // global indices of the returned registers
};

Response respond(const ProverStrategy& strategy, int prover, const ProverQuestion& question);

// Honest strategy: encode each witness qubit into five shares, one per
// prover, and answer every question with untouched registers.
ProverStrategy honest(const HamiltonianInstance& instance, const PureState& witness);

// Two provers share a single EPR pair and always return their half, whatever
// the question; the rest hold fixed |0> qubits.
ProverStrategy epr_pair_cheat(int n);

// Multiplies every question unitary by an independent exp(i*theta*G) with G
// random Hermitian of unit norm; materializes rule-served set questions when
// the arity is known. theta = 0 returns an exact copy.
ProverStrategy perturb(const ProverStrategy& base, double theta, std::uint64_t seed);

// All sorted k-element subsets of {0..n-1}, in lexicographic order.
std::vector<std::vector<int>> sorted_subsets(int n, int k);

// JSON text representation (explicit unitaries only; rules do not serialize).
ProverStrategy parse_strategy(const std::string& text);
std::string serialize_strategy(const ProverStrategy& strategy);

}  // namespace qmip
