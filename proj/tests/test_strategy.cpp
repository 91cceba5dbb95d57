#include "qmip/strategy.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "qmip/code5.hpp"
#include "qmip/hamiltonian.hpp"
#include "qmip/qmath.hpp"
#include "qmip/rng.hpp"
#include "test_support.hpp"

using namespace qmip;

namespace {

double operator_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::JacobiSVD<CMatrix> svd(a - b);
  return svd.singularValues().maxCoeff();
}

PureState random_witness(int n, std::uint64_t seed) {
  Rng rng = substream(seed, "witness");
  CVector v = oracle::random_vector(static_cast<Eigen::Index>(1) << n, rng);
  v /= v.norm();
  return PureState(n, v);
}

bool same_strategy(const ProverStrategy& a, const ProverStrategy& b) {
  if (!(a.layout() == b.layout())) return false;
  if (a.set_arity() != b.set_arity()) return false;
  if ((a.shared_state().amplitudes() - b.shared_state().amplitudes()).cwiseAbs().maxCoeff() !=
      0.0) {
    return false;
  }
  if (a.stored_singles().size() != b.stored_singles().size()) return false;
  for (const auto& [key, matrix] : a.stored_singles()) {
    const auto it = b.stored_singles().find(key);
    if (it == b.stored_singles().end()) return false;
    if (testutil::max_abs_diff(matrix, it->second) != 0.0) return false;
  }
  if (a.stored_sets().size() != b.stored_sets().size()) return false;
  for (const auto& [key, matrix] : a.stored_sets()) {
    const auto it = b.stored_sets().find(key);
    if (it == b.stored_sets().end()) return false;
    if (testutil::max_abs_diff(matrix, it->second) != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("register layout indexing") {
  const RegisterLayout layout(3, 1);
  CHECK(layout.qubits_per_prover() == 4);
  CHECK(layout.total_qubits() == 20);
  CHECK(layout.share_index(0, 0) == 0);
  CHECK(layout.share_index(2, 1) == 9);
  CHECK(layout.aux_index(1, 0) == 7);
  CHECK(layout.block(1) == std::vector<int>{4, 5, 6, 7});
  CHECK(layout.share_indices(4, {0, 2}) == std::vector<int>{16, 18});
  CHECK_THROWS_AS(layout.share_index(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(layout.share_index(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(layout.aux_index(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(RegisterLayout(7), std::invalid_argument);  // 35 qubits
}

TEST_CASE("honest strategy over one qubit distributes the encoding") {
  const HamiltonianInstance inst(1, 1, {LocalTerm{{0}, CMatrix::Identity(2, 2)}});
  const ProverStrategy s = honest(inst, PureState::zero(1));
  CHECK(s.layout().total_qubits() == 5);
  CHECK(s.set_arity() == 1);
  CHECK(s.stored_singles().empty());
  CHECK(s.stored_sets().empty());
  const CVector expect = FiveQubitCode::instance().encode(PureState::zero(1)).amplitudes();
  CHECK((s.shared_state().amplitudes() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("honest shared state has maximally mixed single-qubit marginals") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  const ProverStrategy s = honest(inst, random_witness(2, 31));
  for (int q = 0; q < s.layout().total_qubits(); ++q) {
    const MixedState marginal = reduced_density(s.shared_state(), {q});
    CHECK(testutil::max_abs_diff(marginal.matrix(), 0.5 * CMatrix::Identity(2, 2)) < 1e-12);
  }
}

TEST_CASE("decoding the five shares of a qubit recovers the witness marginal") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  const PureState witness = random_witness(2, 77);
  const ProverStrategy s = honest(inst, witness);
  const auto& code = FiveQubitCode::instance();
  for (int i = 0; i < 2; ++i) {
    std::vector<int> shares;
    for (int t = 0; t < kNumProvers; ++t) shares.push_back(s.layout().share_index(t, i));
    const MixedState block = reduced_density(s.shared_state(), shares);
    const MixedState decoded = code.decode(block);
    const MixedState expect = reduced_density(witness, {i});
    CHECK(testutil::max_abs_diff(decoded.matrix(), expect.matrix()) < 1e-12);
  }
}

TEST_CASE("respond applies the stored unitary and reports answer registers") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  ProverStrategy s = honest(inst, random_witness(2, 12));

  // Honest: identity applied, state unchanged.
  const Response honest_resp = respond(s, 3, ProverQuestion::single(1));
  CHECK(honest_resp.answer_qubits == std::vector<int>{7});
  CHECK((honest_resp.state.amplitudes() - s.shared_state().amplitudes()).cwiseAbs().maxCoeff() <
        1e-14);

  // X on the answer share flips that qubit relative to honest.
  CMatrix x_on_first = oracle::kron(oracle::pauli('X'), oracle::pauli('I'));
  s.set_single_unitary(1, 0, x_on_first);
  const Response flipped = respond(s, 1, ProverQuestion::single(0));
  CHECK(flipped.answer_qubits == std::vector<int>{2});
  const CVector via_oracle =
      oracle::full_operator(oracle::pauli('X'), {2}, 10) * s.shared_state().amplitudes();
  CHECK((flipped.state.amplitudes() - via_oracle).cwiseAbs().maxCoeff() < 1e-12);

  // Set question answers list the shares in set order.
  const Response set_resp = respond(s, 2, ProverQuestion::qubit_set({0, 1}));
  CHECK(set_resp.answer_qubits == std::vector<int>{4, 5});
}

TEST_CASE("respond only touches the addressed prover block") {
  Rng rng = substream(5, "locality");
  const HamiltonianInstance inst = gen_epr_chain(2);
  ProverStrategy s = honest(inst, random_witness(2, 5));
  for (int t = 0; t < kNumProvers; ++t) {
    s.set_single_unitary(t, 0, random_unitary(4, rng));
    s.set_set_unitary(t, {0, 1}, random_unitary(4, rng));
  }
  for (int t = 0; t < kNumProvers; ++t) {
    for (const ProverQuestion& q :
         {ProverQuestion::single(0), ProverQuestion::qubit_set({0, 1})}) {
      const Response resp = respond(s, t, q);
      CHECK(std::abs(resp.state.amplitudes().norm() - 1.0) < 1e-12);
      for (int other = 0; other < kNumProvers; ++other) {
        if (other == t) continue;
        const MixedState before = reduced_density(s.shared_state(), s.layout().block(other));
        const MixedState after = reduced_density(resp.state, s.layout().block(other));
        CHECK(testutil::max_abs_diff(before.matrix(), after.matrix()) < 1e-12);
      }
    }
  }
}

TEST_CASE("epr pair cheat construction") {
  const ProverStrategy s = epr_pair_cheat(2);
  const RegisterLayout& layout = s.layout();

  // Exactly one ebit between provers 0 and 1: their first shares form an EPR
  // pair and everything else is |0>.
  const MixedState pair = reduced_density(
      s.shared_state(), {layout.share_index(0, 0), layout.share_index(1, 0)});
  CVector epr(4);
  epr << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  CHECK(testutil::max_abs_diff(pair.matrix(), epr * epr.adjoint()) < 1e-12);
  const MixedState rest = reduced_density(s.shared_state(), {layout.share_index(2, 0)});
  CHECK(std::abs(rest.matrix()(0, 0).real() - 1.0) < 1e-12);

  // Prover 0 returns the same physical half for every question: the answer
  // register always carries his EPR half, so its joint state with prover 1's
  // half is the same EPR pair for both questions.
  for (int i : {0, 1}) {
    const Response resp = respond(s, 0, ProverQuestion::single(i));
    const MixedState answer_with_partner = reduced_density(
        resp.state, {resp.answer_qubits[0], layout.share_index(1, 0)});
    CHECK(testutil::max_abs_diff(answer_with_partner.matrix(), epr * epr.adjoint()) < 1e-12);
  }

  // Set rule routes the half to the lowest asked qubit.
  const Response set_resp = respond(s, 1, ProverQuestion::qubit_set({1}));
  const MixedState joint = reduced_density(
      set_resp.state, {layout.share_index(0, 0), layout.share_index(1, 1)});
  CHECK(testutil::max_abs_diff(joint.matrix(), epr * epr.adjoint()) < 1e-12);
}

TEST_CASE("perturb at zero is an exact copy") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  const ProverStrategy base = honest(inst, random_witness(2, 41));
  const ProverStrategy same = perturb(base, 0.0, 9);
  CHECK(same_strategy(base, same));
}

TEST_CASE("perturb stays close to the base and is deterministic") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  const ProverStrategy base = honest(inst, random_witness(2, 42));
  const double theta = 1e-3;
  const ProverStrategy a = perturb(base, theta, 7);
  const ProverStrategy b = perturb(base, theta, 7);
  CHECK(same_strategy(a, b));
  CHECK_FALSE(same_strategy(a, perturb(base, theta, 8)));

  // All n*5 singles and all C(n,k)*5 sets are materialized.
  CHECK(a.stored_singles().size() == 10);
  CHECK(a.stored_sets().size() == 5);
  const CMatrix id = CMatrix::Identity(4, 4);
  for (const auto& [key, matrix] : a.stored_singles()) {
    CHECK(operator_distance(matrix, id) < 2 * theta);
    CHECK(testutil::max_abs_diff(matrix * matrix.adjoint(), id) < 1e-10);
  }
  for (const auto& [key, matrix] : a.stored_sets()) {
    CHECK(operator_distance(matrix, id) < 2 * theta);
  }
  CHECK_THROWS_AS(perturb(base, -0.1, 7), std::invalid_argument);
}

TEST_CASE("strategy JSON round trip") {
  Rng rng = substream(13, "strategy-json");
  const HamiltonianInstance inst = gen_epr_chain(2);
  ProverStrategy s = honest(inst, random_witness(2, 99));
  s.set_single_unitary(2, 1, random_unitary(4, rng));
  s.set_set_unitary(4, {0, 1}, random_unitary(4, rng));

  const ProverStrategy back = parse_strategy(serialize_strategy(s));
  CHECK(same_strategy(s, back));
  const ProverStrategy again = parse_strategy(serialize_strategy(back));
  CHECK(same_strategy(back, again));

  const ProverStrategy cheat = epr_pair_cheat(2);
  // Rules do not serialize; only layout, state and explicit singles survive.
  const ProverStrategy cheat_back = parse_strategy(serialize_strategy(cheat));
  CHECK((cheat_back.shared_state().amplitudes() - cheat.shared_state().amplitudes())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(cheat_back.stored_singles().size() == cheat.stored_singles().size());
}

TEST_CASE("strategy validation errors") {
  const RegisterLayout layout(2);
  ProverStrategy s(layout, PureState::zero(10));
  CHECK_THROWS_AS(ProverStrategy(layout, PureState::zero(9)), std::invalid_argument);
  CHECK_THROWS_AS(ProverStrategy(layout, PureState::zero(10), 3), std::invalid_argument);
  CHECK_THROWS_AS(s.set_single_unitary(0, 0, CMatrix::Identity(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(s.set_single_unitary(0, 0, 2.0 * CMatrix::Identity(4, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(s.set_single_unitary(5, 0, CMatrix::Identity(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(s.set_set_unitary(0, {1, 0}, CMatrix::Identity(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(s.set_set_unitary(0, {0, 0}, CMatrix::Identity(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(s.set_set_unitary(0, {}, CMatrix::Identity(4, 4)), std::invalid_argument);
  CHECK_THROWS_AS(respond(s, 0, ProverQuestion::single(2)), std::invalid_argument);
  CHECK_THROWS_AS(respond(s, 0, ProverQuestion::qubit_set({0, 2})), std::invalid_argument);
  CHECK_THROWS_AS(parse_strategy("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_strategy(R"({"n": 1})"), std::invalid_argument);

  ProverStrategy with_arity(layout, PureState::zero(10), 1);
  CHECK_THROWS_AS(respond(with_arity, 0, ProverQuestion::qubit_set({0, 1})),
                  std::invalid_argument);
}

TEST_CASE("subset enumeration") {
  CHECK(sorted_subsets(3, 2) ==
        std::vector<std::vector<int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(sorted_subsets(4, 1).size() == 4);
  CHECK(sorted_subsets(4, 4).size() == 1);
  CHECK(sorted_subsets(5, 2).size() == 10);
  CHECK_THROWS_AS(sorted_subsets(2, 3), std::invalid_argument);
}
