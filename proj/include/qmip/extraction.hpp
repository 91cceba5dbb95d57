#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmip/hamiltonian.hpp"
#include "qmip/qmath.hpp"
#include "qmip/strategy.hpp"

namespace qmip {

// Pure extended states carry two ancilla qubits per share; density-matrix
// evolution squares the cost, so it gets a much tighter ceiling.
inline constexpr int kExtendedQubitGuard = 26;
inline constexpr int kDensityQubitGuard = 12;

// The shared register adjoined, per prover t and logical qubit i, with a
// fresh EPR pair (R_i^t, Rbar_i^t). Ancillas follow the base register,
// pair-adjacent, prover-major: R_i^t at base + 2(t*n + i), its partner right
// after it.
class ExtendedState {
 public:
  ExtendedState(ProverStrategy strategy, PureState state);

  const ProverStrategy& strategy() const { return strategy_; }
  const RegisterLayout& layout() const { return strategy_.layout(); }
  const PureState& state() const { return state_; }

  int base_qubits() const { return layout().total_qubits(); }
  int total_qubits() const { return state_.num_qubits(); }
  int r_index(int prover, int logical) const;
  int rbar_index(int prover, int logical) const;

 private:
  ProverStrategy strategy_;
  PureState state_;
};

// Adjoin the EPR ancillas to the strategy's shared state.
ExtendedState extend(const ProverStrategy& strategy);

// One extraction step on the extended state: conjugate the swap of the
// prover's share register with its ancilla by the prover's question unitary.
// C uses the single-qubit unitary U_i, D the set unitary V_S, swapping out
// every qubit in T (T subset of S; empty T is the identity).
ExtendedState swap_out_C(const ExtendedState& ext, int prover, int qubit);
ExtendedState swap_out_D(const ExtendedState& ext, int prover, const std::vector<int>& swap_set,
                         const std::vector<int>& question_set);

// The same operators as explicit matrices on a prover's block followed by
// one ancilla qubit per logical qubit (dimension 2^(block + n)); used by the
// algebraic tests, which outgrow full extended states at n = 2.
CMatrix swap_out_c_matrix(const ProverStrategy& strategy, int prover, int qubit);
CMatrix swap_out_d_matrix(const ProverStrategy& strategy, int prover,
                          const std::vector<int>& swap_set,
                          const std::vector<int>& question_set);

// || (C_i^t - D_{i,S}^t) (x) Id applied to the extended state ||^2, in [0,4].
// Zero whenever the two question unitaries agree.
double claim1_deviation(const ProverStrategy& strategy, int prover, int qubit,
                        const std::vector<int>& question_set);

struct ExtractionResult {
  MixedState sigma;          // extracted witness on the logical qubits
  double normalized_energy;  // energy(sigma) / m
  std::vector<std::string> steps;
};

// Witness extraction: apply C_1..C_n for every prover, keep only the R
// ancillas, decode each share group. Evolves a density matrix prover by
// prover, adjoining each prover's R block maximally mixed (the traced-out
// EPR halves) and tracing the prover's block as soon as its swaps are done,
// so the peak register is base + n qubits. The prover order is immaterial
// (the C's act on disjoint blocks); it is a parameter so tests can prove it.
ExtractionResult extract_witness(const ProverStrategy& strategy,
                                 const HamiltonianInstance& instance,
                                 const std::vector<int>& prover_order = {0, 1, 2, 3, 4});

// The codespace-consistency map: conjugate rho by (x)_t X_t, project the
// five shares of the qubit onto the codespace, undo the X's. Each choice is
// the prover's single-qubit question for `qubit` or a set question whose set
// contains it. Trace non-increasing; the result is subnormalized.
MixedState apply_F(const ProverStrategy& strategy, const MixedState& rho, int qubit,
                   const std::vector<ProverQuestion>& choices);

}  // namespace qmip
