#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qmip/hamiltonian.hpp"
#include "qmip/optimizer.hpp"
#include "qmip/protocol.hpp"
#include "qmip/strategy.hpp"
#include "test_support.hpp"

using namespace qmip;

namespace {

// Single qubit penalized for leaving |0>; satisfiable with ground energy 0,
// which the dense diagonalizer certifies below before any optimizer claim.
HamiltonianInstance excited_projector() {
  CMatrix h = CMatrix::Zero(2, 2);
  h(1, 1) = 1.0;
  return HamiltonianInstance(1, 1, {LocalTerm{{0}, h}});
}

void require_monotone(const std::vector<double>& values) {
  REQUIRE(!values.empty());
  for (std::size_t i = 1; i < values.size(); ++i) {
    CAPTURE(i);
    REQUIRE(values[i] >= values[i - 1] - 1e-9);
  }
}

void require_unitary_family(const ProverStrategy& s) {
  for (const auto& [key, u] : s.stored_singles()) {
    REQUIRE((u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).norm() <= 1e-10);
  }
  for (const auto& [key, u] : s.stored_sets()) {
    REQUIRE((u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).norm() <= 1e-10);
  }
}

// The trace's claimed objective must be the protocol acceptance of the
// strategy it hands back.
void require_value_matches_protocol(const HamiltonianInstance& instance,
                                    const OptimizerTrace& trace) {
  const AcceptanceReport report = accept_probability_exact(instance, trace.final_strategy);
  REQUIRE(std::abs(trace.final_value - report.p_overall) <= 1e-10);
}

}  // namespace

TEST_CASE("optimizer validates configuration and instance shape") {
  const HamiltonianInstance inst = excited_projector();
  Rng rng = substream(1, "init");
  const ProverStrategy init = random_strategy(inst, RegisterLayout(1), rng);

  OptimizerConfig cfg;
  cfg.max_sweeps = 0;
  CHECK_THROWS_AS(optimize(inst, init, cfg), std::invalid_argument);
  cfg.max_sweeps = 1;
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(optimize(inst, init, cfg), std::invalid_argument);
  cfg.tolerance = -1e-3;
  CHECK_THROWS_AS(optimize(inst, init, cfg), std::invalid_argument);
  cfg.tolerance = 1e-8;
  cfg.unitarize_every_step = false;
  CHECK_THROWS_AS(optimize(inst, init, cfg), std::invalid_argument);
  cfg.unitarize_every_step = true;
  CHECK_THROWS_AS(restart_sweep(inst, cfg, 0), std::invalid_argument);

  // Three-qubit supports have no dense accept operator, so the search must
  // refuse them instead of silently optimizing something else.
  const HamiltonianInstance wide = gen_random(3, 3, 1, 99);
  Rng wrng = substream(2, "init");
  const ProverStrategy winit = random_strategy(wide, RegisterLayout(3), wrng);
  CHECK_THROWS_AS(optimize(wide, winit, cfg), std::invalid_argument);

  // Layout/instance mismatches fail fast in both entry points.
  Rng mrng = substream(3, "init");
  CHECK_THROWS_AS(random_strategy(inst, RegisterLayout(2), mrng), std::invalid_argument);
  const HamiltonianInstance two = gen_epr_chain(2);
  Rng srng = substream(4, "init");
  const ProverStrategy foreign = random_strategy(two, RegisterLayout(2), srng);
  CHECK_THROWS_AS(optimize(inst, foreign, cfg), std::invalid_argument);
}

TEST_CASE("honest strategy on a satisfiable instance is a fixed point at acceptance 1") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  const GroundResult g = ground(inst);
  REQUIRE(g.energy <= 1e-9);  // satisfiability certificate, independent of the optimizer

  OptimizerConfig cfg;
  cfg.max_sweeps = 3;
  cfg.tolerance = 1e-9;
  const OptimizerTrace trace = optimize(inst, honest(inst, g.witness), cfg);

  REQUIRE(trace.converged);
  for (double v : trace.sweep_values) {
    REQUIRE(std::abs(v - 1.0) <= 1e-12);
  }
  require_monotone(trace.sweep_values);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("single-qubit search from a random start reaches the satisfiable optimum") {
  const HamiltonianInstance inst = excited_projector();
  REQUIRE(ground(inst).energy <= 1e-12);

  OptimizerConfig cfg;
  cfg.max_sweeps = 80;
  cfg.tolerance = 1e-12;
  cfg.seed = 5;
  Rng rng = substream(cfg.seed, "restart", std::uint64_t{0});
  const ProverStrategy init = random_strategy(inst, RegisterLayout(1), rng);
  const OptimizerTrace trace = optimize(inst, init, cfg);

  REQUIRE(trace.final_value >= 1.0 - 1e-6);
  REQUIRE(trace.converged);
  require_monotone(trace.sweep_values);
  require_unitary_family(trace.final_strategy);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("fixed-step rule also ascends monotonically") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 40;
  cfg.tolerance = 1e-12;
  cfg.seed = 5;
  cfg.step_rule = StepRule::kFixedStep;
  Rng rng = substream(cfg.seed, "restart", std::uint64_t{2});
  const OptimizerTrace trace = optimize(inst, random_strategy(inst, RegisterLayout(1), rng), cfg);

  require_monotone(trace.sweep_values);
  REQUIRE(trace.final_value >= 1.0 - 1e-6);
  require_unitary_family(trace.final_strategy);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("trace length respects the sweep budget and reports non-convergence") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 5;
  cfg.tolerance = 1e-12;
  cfg.seed = 5;
  Rng rng = substream(cfg.seed, "restart", std::uint64_t{0});
  const ProverStrategy init = random_strategy(inst, RegisterLayout(1), rng);
  const OptimizerTrace trace = optimize(inst, init, cfg);
  REQUIRE(trace.sweep_values.size() == 5);
  REQUIRE_FALSE(trace.converged);
  REQUIRE(trace.final_value == trace.sweep_values.back());

  // A tolerance larger than any possible improvement stops after one sweep.
  OptimizerConfig lax = cfg;
  lax.max_sweeps = 10;
  lax.tolerance = 2.0;
  Rng rng2 = substream(cfg.seed, "restart", std::uint64_t{0});
  const OptimizerTrace early =
      optimize(inst, random_strategy(inst, RegisterLayout(1), rng2), lax);
  REQUIRE(early.sweep_values.size() == 1);
  REQUIRE(early.converged);
}

TEST_CASE("one restart equals a single optimize call on the same seeded initial") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 25;
  cfg.tolerance = 1e-10;
  cfg.seed = 5;

  const OptimizerTrace via_restarts = restart_sweep(inst, cfg, 1);
  Rng rng = substream(cfg.seed, "restart", std::uint64_t{0});
  const OptimizerTrace direct =
      optimize(inst, random_strategy(inst, RegisterLayout(1), rng), cfg);

  REQUIRE(via_restarts.final_value == direct.final_value);
  REQUIRE(via_restarts.sweep_values == direct.sweep_values);
  REQUIRE(via_restarts.converged == direct.converged);
}

TEST_CASE("restart best value has the prefix property and is the max of its members") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 25;
  cfg.tolerance = 1e-10;
  cfg.seed = 5;

  std::vector<double> singles;
  for (std::uint64_t r = 0; r < 3; ++r) {
    Rng rng = substream(cfg.seed, "restart", r);
    singles.push_back(optimize(inst, random_strategy(inst, RegisterLayout(1), rng), cfg).final_value);
  }
  double best_so_far = 0.0;
  double prev = 0.0;
  for (int r = 1; r <= 3; ++r) {
    const double best = restart_sweep(inst, cfg, r).final_value;
    REQUIRE(best >= prev);
    best_so_far = std::max(best_so_far, singles[static_cast<std::size_t>(r - 1)]);
    REQUIRE(best == best_so_far);
    prev = best;
  }
}

TEST_CASE("restart sweeps are deterministic in the seed") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 20;
  cfg.tolerance = 1e-10;
  cfg.seed = 41;

  const OptimizerTrace a = restart_sweep(inst, cfg, 2);
  const OptimizerTrace b = restart_sweep(inst, cfg, 2);
  REQUIRE(a.sweep_values == b.sweep_values);
  REQUIRE(a.final_value == b.final_value);

  OptimizerConfig other = cfg;
  other.seed = 42;
  // Different seeds draw different initial strategies...
  Rng r41 = substream(cfg.seed, "restart", std::uint64_t{0});
  Rng r42 = substream(other.seed, "restart", std::uint64_t{0});
  const ProverStrategy s41 = random_strategy(inst, RegisterLayout(1), r41);
  const ProverStrategy s42 = random_strategy(inst, RegisterLayout(1), r42);
  REQUIRE((s41.shared_state().amplitudes() - s42.shared_state().amplitudes()).norm() > 1e-6);
  // ...and (for these seeds) land on distinguishable traces.
  const OptimizerTrace c = restart_sweep(inst, other, 2);
  CHECK(a.sweep_values != c.sweep_values);
}

TEST_CASE("satisfiable two-qubit chain reaches near-perfect acceptance") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  REQUIRE(ground(inst).energy <= 1e-9);

  OptimizerConfig cfg;
  cfg.max_sweeps = 60;
  cfg.tolerance = 1e-10;
  cfg.seed = 11;
  Rng rng = substream(cfg.seed, "restart", std::uint64_t{1});
  const ProverStrategy init = random_strategy(inst, RegisterLayout(2), rng);
  const OptimizerTrace trace = optimize(inst, init, cfg);

  REQUIRE(trace.final_value >= 1.0 - 1e-4);
  require_monotone(trace.sweep_values);
  require_unitary_family(trace.final_strategy);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("rule-served strategies materialize and improve from a poor start") {
  // The paired-EPR cheat serves its set questions through a rule and starts
  // at acceptance 23/160; the search must still be able to move every block.
  const HamiltonianInstance inst = gen_epr_chain(2);
  const ProverStrategy cheat = epr_pair_cheat(2);
  REQUIRE(std::abs(accept_probability_exact(inst, cheat).p_overall - 23.0 / 160.0) <= 1e-12);

  OptimizerConfig cfg;
  cfg.max_sweeps = 5;
  cfg.tolerance = 1e-10;
  const OptimizerTrace trace = optimize(inst, cheat, cfg);
  REQUIRE(trace.final_value >= 1.0 - 1e-4);
  require_monotone(trace.sweep_values);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("honest start on the frustrated chain holds its plateau") {
  const HamiltonianInstance inst = gen_epr_chain(3);
  const GroundResult g = ground(inst);
  const ProverStrategy init = honest(inst, g.witness);

  OptimizerConfig cfg;
  cfg.max_sweeps = 2;
  cfg.tolerance = 1e-9;
  const OptimizerTrace trace = optimize(inst, init, cfg);

  // Honest play on the ground state accepts with 1 - E0/(2m) = 7/8; the
  // search must never regress below a value it has already achieved.
  REQUIRE(trace.sweep_values.front() >= 0.875 - 1e-9);
  REQUIRE(trace.final_value <= 1.0 + 1e-12);
  require_monotone(trace.sweep_values);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("random starts on the frustrated chain stay far from perfect acceptance") {
  const HamiltonianInstance inst = gen_epr_chain(3);
  OptimizerConfig cfg;
  cfg.max_sweeps = 2;
  cfg.tolerance = 1e-7;
  cfg.seed = 3;
  const OptimizerTrace trace = restart_sweep(inst, cfg, 1);

  REQUIRE(trace.final_value < 1.0 - 1e-2);
  REQUIRE(trace.final_value > 0.45);  // the search does climb off the random floor
  require_monotone(trace.sweep_values);
  require_unitary_family(trace.final_strategy);
  require_value_matches_protocol(inst, trace);
}

TEST_CASE("ancilla-augmented restarts search the wider register") {
  const HamiltonianInstance inst = excited_projector();
  OptimizerConfig cfg;
  cfg.max_sweeps = 2;
  cfg.tolerance = 1e-9;
  cfg.seed = 9;
  cfg.aux_per_prover = 1;
  const OptimizerTrace trace = restart_sweep(inst, cfg, 1);

  REQUIRE(trace.final_strategy.layout().aux_per_prover() == 1);
  REQUIRE(trace.final_strategy.layout().qubits_per_prover() == 2);
  require_monotone(trace.sweep_values);
  require_value_matches_protocol(inst, trace);
}
