#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "qmip/hamiltonian.hpp"
#include "qmip/rng.hpp"
#include "qmip/strategy.hpp"

namespace qmip {

// Exact evaluation holds a dense state over all prover registers.
inline constexpr int kProtocolQubitGuard = 26;

// Verifier questions. The energy test sends every prover the support of one
// term; the code tests target the five shares of one logical qubit, either
// asking everyone for that qubit or sending one odd prover a set instead.
struct EnergyTest {
  int term = 0;
};
struct CodeTestMixed {
  int qubit = 0;
  std::vector<int> set;  // sorted k-set containing `qubit`
  int odd_prover = 0;
};
struct CodeTestAll {
  int qubit = 0;
};

struct Question {
  std::variant<EnergyTest, CodeTestMixed, CodeTestAll> variant;
};

void validate_question(const HamiltonianInstance& instance, const Question& question);

// The question one prover sees: energy tests send every prover the term's
// support, mixed code tests send the designated set to the odd prover and the
// bare qubit to everyone else, all-shares tests send the bare qubit to all.
ProverQuestion prover_question(const HamiltonianInstance& instance, const Question& question,
                               int prover);

// One draw from the verifier's question distribution: fair coin between the
// tests; term index uniform; code-test qubit uniform, then a fair coin
// between the all-shares and mixed branches, with the mixed set uniform among
// k-sets containing the qubit and the odd prover uniform.
Question sample_question(const HamiltonianInstance& instance, Rng& rng);

struct WeightedQuestion {
  Question question;
  double weight = 0.0;
  bool is_energy_test = false;
};

// The full (finite) question distribution; weights sum to one.
std::vector<WeightedQuestion> question_distribution(const HamiltonianInstance& instance);

struct SampledInfo {
  long long shots = 0;
  std::uint64_t seed = 0;
  double std_error = 0.0;
};

struct AcceptanceReport {
  double p_test1 = 0.0;
  double p_test2 = 0.0;
  double p_overall = 0.0;
  bool exact = true;
  std::optional<SampledInfo> sampled;
  std::optional<PromiseGap> gap;
};

// Shared question-evaluation machinery. Holds the per-term accept observables
// (the binary measurement pulled back through the five-qubit decoder) so that
// repeated evaluation against changing strategies stays cheap.
class AcceptanceEvaluator {
 public:
  AcceptanceEvaluator(HamiltonianInstance instance, RegisterLayout layout);

  const HamiltonianInstance& instance() const { return instance_; }
  const RegisterLayout& layout() const { return layout_; }

  // Block unitaries the provers apply for this question, in prover order.
  std::vector<QubitOperator> prover_operators(const ProverStrategy& strategy,
                                              const Question& question) const;
  // Accept-POVM element on the answer registers. Available for code tests and
  // for energy tests on at most two qubits (larger supports are evaluated by
  // the Kraus-contraction path inside success()).
  const QubitOperator& accept_povm(const Question& question) const;

  // Exact probability that the verifier accepts this question.
  double success(const ProverStrategy& strategy, const Question& question) const;

 private:
  double energy_success_by_contraction(const PureState& state, const EnergyTest& test) const;

  HamiltonianInstance instance_;
  RegisterLayout layout_;
  mutable std::map<std::pair<int, int>, QubitOperator> povm_cache_;
};

AcceptanceReport accept_probability_exact(const HamiltonianInstance& instance,
                                          const ProverStrategy& strategy);

// Monte Carlo realization of the protocol: per-shot question draw plus a
// Bernoulli accept draw at the question's exact success probability (the
// distribution of transcripts is identical to simulating the measurement
// outcome directly). Deterministic in the seed; per-shot substreams.
AcceptanceReport accept_probability_sampled(const HamiltonianInstance& instance,
                                            const ProverStrategy& strategy, long long shots,
                                            std::uint64_t seed);

}  // namespace qmip
