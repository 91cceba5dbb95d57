#include "qmip/hamiltonian.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "qmip/qmath.hpp"
#include "qmip/rng.hpp"
#include "test_support.hpp"

using namespace qmip;

namespace {

const std::string kSingleTermJson = R"({
  "n": 2,
  "k": 2,
  "terms": [
    {"qubits": [0, 1],
     "matrix": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]}
  ]
})";

PureState epr_state() {
  CVector v(4);
  v << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  return PureState(2, v);
}

// Independent route to the full 2^n matrix, used as the energy oracle.
CMatrix assemble_full(const HamiltonianInstance& instance) {
  const auto dim = static_cast<Eigen::Index>(1) << instance.num_qubits();
  CMatrix full = CMatrix::Zero(dim, dim);
  for (const LocalTerm& term : instance.terms()) {
    full += oracle::full_operator(term.matrix, term.qubits, instance.num_qubits());
  }
  return full;
}

bool instances_identical(const HamiltonianInstance& a, const HamiltonianInstance& b) {
  if (a.num_qubits() != b.num_qubits() || a.locality() != b.locality() ||
      a.num_terms() != b.num_terms()) {
    return false;
  }
  for (int j = 0; j < a.num_terms(); ++j) {
    const auto& ta = a.terms()[static_cast<size_t>(j)];
    const auto& tb = b.terms()[static_cast<size_t>(j)];
    if (ta.qubits != tb.qubits) return false;
    if (testutil::max_abs_diff(ta.matrix, tb.matrix) != 0.0) return false;
  }
  if (a.gap().has_value() != b.gap().has_value()) return false;
  if (a.gap() && (a.gap()->a != b.gap()->a || a.gap()->b != b.gap()->b)) return false;
  return true;
}

}  // namespace

TEST_CASE("well-formed single-term file parses") {
  const HamiltonianInstance inst = parse_instance(kSingleTermJson);
  CHECK(inst.num_qubits() == 2);
  CHECK(inst.locality() == 2);
  CHECK(inst.num_terms() == 1);
  CHECK(inst.terms()[0].qubits == std::vector<int>{0, 1});
  CHECK(inst.terms()[0].matrix(0, 0) == cdouble(1.0, 0.0));
}

TEST_CASE("validation errors name the offending term") {
  auto patched = [&](const std::string& from, const std::string& to) {
    std::string text = kSingleTermJson;
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  // Norm above one.
  CHECK_THROWS_WITH_AS(parse_instance(patched("[[1.0, 0.0]", "[[1.5, 0.0]")),
                       doctest::Contains("term 0"), std::invalid_argument);
  // Negative eigenvalue.
  CHECK_THROWS_WITH_AS(parse_instance(patched("[[1.0, 0.0]", "[[-0.5, 0.0]")),
                       doctest::Contains("positive semidefinite"), std::invalid_argument);
  // Support out of range.
  CHECK_THROWS_WITH_AS(parse_instance(patched("\"qubits\": [0, 1]", "\"qubits\": [0, 2]")),
                       doctest::Contains("out of range"), std::invalid_argument);
  // Unsorted support.
  CHECK_THROWS_WITH_AS(parse_instance(patched("\"qubits\": [0, 1]", "\"qubits\": [1, 0]")),
                       doctest::Contains("sorted"), std::invalid_argument);
  // Malformed JSON.
  CHECK_THROWS_WITH_AS(parse_instance("{ not json"), doctest::Contains("malformed"),
                       std::invalid_argument);
  // Non-Hermitian matrix.
  CHECK_THROWS_WITH_AS(parse_instance(patched("[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],",
                                              "[0.2, 0.0], [0.0, 0.0], [0.0, 0.0]],")),
                       doctest::Contains("Hermitian"), std::invalid_argument);
}

TEST_CASE("constructor rejects structural violations") {
  const CMatrix id2 = CMatrix::Identity(2, 2);
  const CMatrix id4 = CMatrix::Identity(4, 4);
  CHECK_THROWS_AS(HamiltonianInstance(2, 2, {}), std::invalid_argument);
  CHECK_THROWS_AS(HamiltonianInstance(2, 3, {LocalTerm{{0}, id2}}), std::invalid_argument);
  CHECK_THROWS_AS(HamiltonianInstance(2, 1, {LocalTerm{{0, 1}, id4}}), std::invalid_argument);
  CHECK_THROWS_AS(HamiltonianInstance(2, 2, {LocalTerm{{0, 0}, id4}}), std::invalid_argument);
  CHECK_THROWS_AS(HamiltonianInstance(2, 2, {LocalTerm{{0}, id4}}), std::invalid_argument);
  CHECK_THROWS_AS(
      HamiltonianInstance(2, 2, {LocalTerm{{0}, id2}}, PromiseGap{0.5, 0.2}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      HamiltonianInstance(2, 2, {LocalTerm{{0}, id2}}, PromiseGap{0.1, 1.5}),
      std::invalid_argument);
}

TEST_CASE("round trip through serialization is exact") {
  for (std::uint64_t seed : {7ull, 8ull}) {
    const HamiltonianInstance inst = gen_random(3, 2, 4, seed);
    const HamiltonianInstance back = parse_instance(serialize_instance(inst));
    CHECK(instances_identical(inst, back));
    const HamiltonianInstance again = parse_instance(serialize_instance(back));
    CHECK(instances_identical(back, again));
  }
  const HamiltonianInstance chain = gen_epr_chain(3);
  CHECK(instances_identical(chain, parse_instance(serialize_instance(chain))));
}

TEST_CASE("energy of the EPR projector term") {
  const HamiltonianInstance inst = gen_epr_chain(2);
  CHECK(energy(inst, epr_state()) == doctest::Approx(0.0).epsilon(1e-12));
  // <00|(Id - |EPR><EPR|)|00> = 1 - 1/2.
  CHECK(energy(inst, PureState::zero(2)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("energy matches the full-matrix oracle") {
  const HamiltonianInstance inst = gen_random(3, 2, 5, 11);
  const CMatrix full = assemble_full(inst);
  Rng rng = substream(99, "ham-energy");
  for (int trial = 0; trial < 4; ++trial) {
    CVector v = oracle::random_vector(8, rng);
    v /= v.norm();
    const PureState psi(3, v);
    const double via_oracle = (v.adjoint() * full * v)(0).real();
    CHECK(std::abs(energy(inst, psi) - via_oracle) < 1e-10);

    const CMatrix rho = oracle::random_density(8, rng);
    const double mixed_oracle = (full * rho).trace().real();
    CHECK(std::abs(energy(inst, MixedState(3, rho)) - mixed_oracle) < 1e-10);
  }
}

TEST_CASE("energy is linear in the state") {
  const HamiltonianInstance inst = gen_random(3, 2, 3, 5);
  Rng rng = substream(99, "ham-linear");
  const CMatrix rho1 = oracle::random_density(8, rng);
  const CMatrix rho2 = oracle::random_density(8, rng);
  const double lam = 0.3;
  const double mixed = energy(inst, MixedState(3, lam * rho1 + (1 - lam) * rho2));
  const double combo =
      lam * energy(inst, MixedState(3, rho1)) + (1 - lam) * energy(inst, MixedState(3, rho2));
  CHECK(std::abs(mixed - combo) < 1e-10);
}

TEST_CASE("ground state of a single EPR projector") {
  const GroundResult g = ground(gen_epr_chain(2));
  CHECK(std::abs(g.energy) < 1e-10);
  CHECK(fidelity(density(g.witness), density(epr_state())) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("three-qubit EPR chain is frustrated with ground energy one half") {
  const HamiltonianInstance inst = gen_epr_chain(3);
  const GroundResult g = ground(inst);
  // Oracle: dense diagonalization of the independently assembled 8x8 matrix.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(assemble_full(inst));
  CHECK(std::abs(g.energy - es.eigenvalues()(0)) < 1e-10);
  CHECK(g.energy > 0.0);
  // Frozen value: overlapping EPR projectors on a 3-qubit chain have minimal
  // energy exactly 1/2 (top eigenvalue 3/2 of the two-projector sum).
  CHECK(g.energy == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(energy(inst, g.witness) - g.energy) < 1e-9);
}

TEST_CASE("diagonal instance grounds at the all-zeros state") {
  CMatrix one = CMatrix::Zero(2, 2);
  one(1, 1) = 1.0;
  const HamiltonianInstance inst(2, 1, {LocalTerm{{0}, one}, LocalTerm{{1}, one}});
  const GroundResult g = ground(inst);
  CHECK(std::abs(g.energy) < 1e-12);
  CHECK(std::abs(std::abs(g.witness.amplitudes()(0)) - 1.0) < 1e-9);
}

TEST_CASE("chain generator layout") {
  CHECK(gen_epr_chain(2).num_terms() == 1);
  const HamiltonianInstance chain4 = gen_epr_chain(4);
  CHECK(chain4.num_terms() == 3);
  CHECK(chain4.locality() == 2);
  CHECK(chain4.terms()[0].qubits == std::vector<int>{0, 1});
  CHECK(chain4.terms()[1].qubits == std::vector<int>{1, 2});
  CHECK(chain4.terms()[2].qubits == std::vector<int>{2, 3});
  CHECK_THROWS_AS(gen_epr_chain(1), std::invalid_argument);
  CHECK(std::abs(ground(gen_epr_chain(2)).energy) < 1e-10);
  CHECK(ground(gen_epr_chain(4)).energy > 1e-3);
}

TEST_CASE("random generator is deterministic and valid") {
  const HamiltonianInstance a = gen_random(3, 2, 4, 7);
  const HamiltonianInstance b = gen_random(3, 2, 4, 7);
  CHECK(instances_identical(a, b));
  CHECK_FALSE(instances_identical(a, gen_random(3, 2, 4, 8)));
  for (const LocalTerm& term : a.terms()) {
    CHECK(static_cast<int>(term.qubits.size()) == 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(term.matrix, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    // Rank deficiency: smallest eigenvalue is numerically zero.
    CHECK(es.eigenvalues().minCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(gen_random(2, 3, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_random(3, 2, 0, 0), std::invalid_argument);
}

TEST_CASE("ground energy bounds energies of arbitrary states") {
  const HamiltonianInstance inst = gen_random(4, 2, 3, 21);
  const GroundResult g = ground(inst);
  CHECK(g.energy >= -1e-10);
  Rng rng = substream(99, "ham-bounds");
  for (int trial = 0; trial < 5; ++trial) {
    CVector v = oracle::random_vector(16, rng);
    v /= v.norm();
    const double e = energy(inst, PureState(4, v));
    CHECK(e >= g.energy - 1e-10);
    CHECK(e <= inst.num_terms() + 1e-10);
  }
}

TEST_CASE("guards and dimension checks") {
  CMatrix one = CMatrix::Zero(2, 2);
  one(1, 1) = 1.0;
  std::vector<LocalTerm> terms;
  for (int q = 0; q < 13; ++q) terms.push_back(LocalTerm{{q}, one});
  const HamiltonianInstance big(13, 1, terms);
  CHECK_THROWS_WITH_AS(ground(big), doctest::Contains("guard"), std::invalid_argument);
  const HamiltonianInstance small(2, 1, {LocalTerm{{0}, one}});
  CHECK_THROWS_AS(energy(small, PureState::zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(energy(small, MixedState::maximally_mixed(1)), std::invalid_argument);
}
