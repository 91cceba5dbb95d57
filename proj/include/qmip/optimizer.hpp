#pragma once

#include <cstdint>
#include <vector>

#include "qmip/hamiltonian.hpp"
#include "qmip/protocol.hpp"
#include "qmip/rng.hpp"
#include "qmip/strategy.hpp"

namespace qmip {

// How the unitary ascent picks its fallback step length. Every update first
// tries the full linearized maximizer (the infinite-step limit of the
// polar-projected gradient step, which never loses ground on this objective);
// when that stalls, backtracking halves a tangent-space step from 0.1 until
// ascent, while fixed-step tries the 0.1 step once. Updates commit only when
// they improve, so both rules keep the sweep values non-decreasing.
enum class StepRule { kFixedStep, kBacktracking };

struct OptimizerConfig {
  int max_sweeps = 40;
  // Stop once a full sweep improves acceptance by less than this.
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::kBacktracking;
  // Every unitary update is re-projected onto the unitary group; turning the
  // projection off is not supported and rejected by validation.
  bool unitarize_every_step = true;
  // Extra work qubits per prover block in the random initial strategies drawn
  // by restart_sweep. The default searches over exactly the share registers.
  int aux_per_prover = 0;
};

struct OptimizerTrace {
  // Exact acceptance recomputed after each completed sweep; non-decreasing
  // within 1e-9 (state steps never lower the quadratic form, unitary steps
  // only commit improvements).
  std::vector<double> sweep_values;
  ProverStrategy final_strategy;
  bool converged = false;
  double final_value = 0.0;
};

// Alternating ascent on protocol acceptance: the shared state moves to the
// top eigenvector of the strategy-conditioned acceptance operator (acceptance
// is a quadratic form in the state), then every question unitary takes a
// polar-projected gradient step. All block unitaries the question
// distribution can address are materialized from `initial` up front, so the
// search moves the full family. Requires every term support to have at most
// two qubits (the dense accept operators) and the register to fit the exact
// evaluator; deterministic given (initial, config).
OptimizerTrace optimize(const HamiltonianInstance& instance, const ProverStrategy& initial,
                        const OptimizerConfig& config);

// Runs optimize from num_restarts seeded random initial strategies, one
// trace per restart in restart order. Restart index r draws its initial from
// substream(config.seed, "restart", r), so trace r is independent of
// num_restarts.
std::vector<OptimizerTrace> restart_traces(const HamiltonianInstance& instance,
                                           const OptimizerConfig& config, int num_restarts);

// The best of restart_traces (ties break toward the earlier restart); the
// best over the first R restarts is therefore non-decreasing in R for a
// fixed seed.
OptimizerTrace restart_sweep(const HamiltonianInstance& instance, const OptimizerConfig& config,
                             int num_restarts);

// Haar-random initial point for the search: random shared state plus
// independent Haar block unitaries for every question the verifier can ask.
ProverStrategy random_strategy(const HamiltonianInstance& instance, const RegisterLayout& layout,
                               Rng& rng);

}  // namespace qmip
