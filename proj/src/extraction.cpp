#include "qmip/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "qmip/code5.hpp"

namespace qmip {
namespace {

const CMatrix& swap_two() {
  static const CMatrix swap = [] {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
    return m;
  }();
  return swap;
}

// Permutation matrix exchanging qubits a and b of a q-qubit register.
CMatrix swap_matrix(int qubits, int a, int b) {
  const auto dim = static_cast<Eigen::Index>(1) << qubits;
  const auto bit_a = static_cast<Eigen::Index>(1) << (qubits - 1 - a);
  const auto bit_b = static_cast<Eigen::Index>(1) << (qubits - 1 - b);
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    Eigen::Index y = x & ~(bit_a | bit_b);
    if (x & bit_a) y |= bit_b;
    if (x & bit_b) y |= bit_a;
    m(y, x) = 1.0;
  }
  return m;
}

void check_prover(int prover) {
  if (prover < 0 || prover >= kNumProvers) {
    throw std::invalid_argument("extraction: prover index out of range");
  }
}

void check_logical(const RegisterLayout& layout, int qubit) {
  if (qubit < 0 || qubit >= layout.num_logical()) {
    throw std::invalid_argument("extraction: logical qubit index out of range");
  }
}

// swap_set must be a sorted subset of question_set, which itself must be a
// valid sorted set question on the layout.
void check_swap_sets(const ProverStrategy& strategy, const std::vector<int>& swap_set,
                     const std::vector<int>& question_set) {
  strategy.validate_question(ProverQuestion::qubit_set(question_set));
  for (size_t i = 0; i < swap_set.size(); ++i) {
    if (i > 0 && swap_set[i] <= swap_set[i - 1]) {
      throw std::invalid_argument("extraction: swap set must be sorted and distinct");
    }
    if (!std::binary_search(question_set.begin(), question_set.end(), swap_set[i])) {
      throw std::invalid_argument("extraction: swap set must be contained in the question set");
    }
  }
}

void apply_block(CVector& amps, int num_qubits, const CMatrix& matrix,
                 const std::vector<int>& targets) {
  if (matrix.isIdentity(0.0)) return;
  detail::apply_in_place(amps, num_qubits, matrix, targets);
}

}  // namespace

ExtendedState::ExtendedState(ProverStrategy strategy, PureState state)
    : strategy_(std::move(strategy)), state_(std::move(state)) {
  const int expected =
      strategy_.layout().total_qubits() + 2 * kNumProvers * strategy_.layout().num_logical();
  if (state_.num_qubits() != expected) {
    throw std::invalid_argument("extended state: register count does not match the layout");
  }
}

int ExtendedState::r_index(int prover, int logical) const {
  check_prover(prover);
  check_logical(layout(), logical);
  return base_qubits() + 2 * (prover * layout().num_logical() + logical);
}

int ExtendedState::rbar_index(int prover, int logical) const {
  return r_index(prover, logical) + 1;
}

ExtendedState extend(const ProverStrategy& strategy) {
  const RegisterLayout& layout = strategy.layout();
  const int total = layout.total_qubits() + 2 * kNumProvers * layout.num_logical();
  if (total > kExtendedQubitGuard) {
    throw std::invalid_argument("extend: extended register exceeds the exact-mode guard");
  }
  CVector epr(4);
  epr << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  const PureState pair(2, epr);
  PureState state = strategy.shared_state();
  for (int t = 0; t < kNumProvers; ++t) {
    for (int i = 0; i < layout.num_logical(); ++i) state = tensor(state, pair);
  }
  return ExtendedState(strategy, std::move(state));
}

ExtendedState swap_out_C(const ExtendedState& ext, int prover, int qubit) {
  check_prover(prover);
  check_logical(ext.layout(), qubit);
  const CMatrix u = ext.strategy().block_unitary(prover, ProverQuestion::single(qubit));
  const std::vector<int> block = ext.layout().block(prover);
  CVector v = ext.state().amplitudes();
  const int nq = ext.total_qubits();
  apply_block(v, nq, u, block);
  detail::apply_in_place(v, nq, swap_two(),
                         {ext.layout().share_index(prover, qubit), ext.r_index(prover, qubit)});
  apply_block(v, nq, u.adjoint(), block);
  return ExtendedState(ext.strategy(), PureState(nq, std::move(v)));
}

ExtendedState swap_out_D(const ExtendedState& ext, int prover, const std::vector<int>& swap_set,
                         const std::vector<int>& question_set) {
  check_prover(prover);
  check_swap_sets(ext.strategy(), swap_set, question_set);
  if (swap_set.empty()) return ext;
  const CMatrix v_s = ext.strategy().block_unitary(prover, ProverQuestion::qubit_set(question_set));
  const std::vector<int> block = ext.layout().block(prover);
  CVector v = ext.state().amplitudes();
  const int nq = ext.total_qubits();
  apply_block(v, nq, v_s, block);
  for (int i : swap_set) {
    detail::apply_in_place(v, nq, swap_two(),
                           {ext.layout().share_index(prover, i), ext.r_index(prover, i)});
  }
  apply_block(v, nq, v_s.adjoint(), block);
  return ExtendedState(ext.strategy(), PureState(nq, std::move(v)));
}

CMatrix swap_out_c_matrix(const ProverStrategy& strategy, int prover, int qubit) {
  check_prover(prover);
  check_logical(strategy.layout(), qubit);
  const int block = strategy.layout().qubits_per_prover();
  const int n = strategy.layout().num_logical();
  const CMatrix u = tensor(strategy.block_unitary(prover, ProverQuestion::single(qubit)),
                           CMatrix::Identity(1 << n, 1 << n));
  return u.adjoint() * swap_matrix(block + n, qubit, block + qubit) * u;
}

CMatrix swap_out_d_matrix(const ProverStrategy& strategy, int prover,
                          const std::vector<int>& swap_set,
                          const std::vector<int>& question_set) {
  check_prover(prover);
  check_swap_sets(strategy, swap_set, question_set);
  const int block = strategy.layout().qubits_per_prover();
  const int n = strategy.layout().num_logical();
  const auto dim = static_cast<Eigen::Index>(1) << (block + n);
  if (swap_set.empty()) return CMatrix::Identity(dim, dim);
  const CMatrix v = tensor(strategy.block_unitary(prover, ProverQuestion::qubit_set(question_set)),
                           CMatrix::Identity(1 << n, 1 << n));
  CMatrix swaps = CMatrix::Identity(dim, dim);
  for (int i : swap_set) swaps = swap_matrix(block + n, i, block + i) * swaps;
  return v.adjoint() * swaps * v;
}

double claim1_deviation(const ProverStrategy& strategy, int prover, int qubit,
                        const std::vector<int>& question_set) {
  check_logical(strategy.layout(), qubit);
  if (!std::binary_search(question_set.begin(), question_set.end(), qubit)) {
    throw std::invalid_argument("claim1_deviation: question set must contain the qubit");
  }
  const ExtendedState ext = extend(strategy);
  const CVector a = swap_out_C(ext, prover, qubit).state().amplitudes();
  const CVector b = swap_out_D(ext, prover, {qubit}, question_set).state().amplitudes();
  return (a - b).squaredNorm();
}

ExtractionResult extract_witness(const ProverStrategy& strategy,
                                 const HamiltonianInstance& instance,
                                 const std::vector<int>& prover_order) {
  const RegisterLayout& layout = strategy.layout();
  const int n = layout.num_logical();
  const int block = layout.qubits_per_prover();
  if (instance.num_qubits() != n) {
    throw std::invalid_argument("extract: instance does not match the strategy layout");
  }
  if (layout.total_qubits() + n > kDensityQubitGuard) {
    throw std::invalid_argument("extract: peak register exceeds the density-matrix guard");
  }
  {
    std::vector<int> sorted = prover_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> all(kNumProvers);
    std::iota(all.begin(), all.end(), 0);
    if (sorted != all) {
      throw std::invalid_argument("extract: prover order must be a permutation of the provers");
    }
  }

  ExtractionResult result{MixedState::maximally_mixed(n), 0.0, {}};

  // Register bookkeeping: label every qubit of the evolving density matrix.
  struct Reg {
    bool is_ancilla;
    int prover;
    int index;  // block position or logical qubit
  };
  std::vector<Reg> regs;
  for (int t = 0; t < kNumProvers; ++t) {
    for (int p = 0; p < block; ++p) regs.push_back({false, t, p});
  }
  auto position_of = [&regs](bool is_ancilla, int prover, int index) {
    for (size_t p = 0; p < regs.size(); ++p) {
      const Reg& r = regs[p];
      if (r.is_ancilla == is_ancilla && r.prover == prover && r.index == index) {
        return static_cast<int>(p);
      }
    }
    throw std::logic_error("extract: register lost during evolution");
  };

  MixedState rho = density(strategy.shared_state());
  for (const int t : prover_order) {
    // The prover's R ancillas enter maximally mixed: their EPR partners are
    // never touched, so tracing them out up front is exact.
    rho = tensor(rho, MixedState::maximally_mixed(n));
    for (int i = 0; i < n; ++i) regs.push_back({true, t, i});
    result.steps.push_back("adjoin mixed ancillas for prover " + std::to_string(t));

    std::vector<int> block_targets;
    for (int p = 0; p < block; ++p) block_targets.push_back(position_of(false, t, p));
    for (int i = 0; i < n; ++i) {
      const CMatrix u = strategy.block_unitary(t, ProverQuestion::single(i));
      const std::vector<int> pair = {position_of(false, t, i), position_of(true, t, i)};
      if (!u.isIdentity(0.0)) {
        rho = apply(QubitOperator(u, block_targets, true), rho);
        rho = apply(QubitOperator(swap_two(), pair, true), rho);
        rho = apply(QubitOperator(u.adjoint(), block_targets, true), rho);
      } else {
        rho = apply(QubitOperator(swap_two(), pair, true), rho);
      }
      result.steps.push_back("swap out qubit " + std::to_string(i) + " of prover " +
                             std::to_string(t));
    }

    std::vector<int> keep;
    for (size_t p = 0; p < regs.size(); ++p) {
      if (regs[p].is_ancilla || regs[p].prover != t) keep.push_back(static_cast<int>(p));
    }
    rho = partial_trace(rho, keep);
    std::vector<Reg> kept;
    for (int p : keep) kept.push_back(regs[static_cast<size_t>(p)]);
    regs = std::move(kept);
    result.steps.push_back("trace out prover " + std::to_string(t));
  }

  // Group the shares logical-qubit-major, provers ascending within a group,
  // then decode group by group.
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < kNumProvers; ++t) order.push_back(position_of(true, t, i));
  }
  rho = permute_qubits(rho, order);
  const auto& kraus = FiveQubitCode::instance().decoding_channel().kraus;
  for (int g = 0; g < n; ++g) {
    const auto before = static_cast<Eigen::Index>(1) << g;
    const auto after = static_cast<Eigen::Index>(1) << (5 * (n - g - 1));
    std::vector<CMatrix> full;
    full.reserve(kraus.size());
    for (const CMatrix& k : kraus) {
      full.push_back(tensor(CMatrix::Identity(before, before),
                            tensor(k, CMatrix::Identity(after, after))));
    }
    rho = apply_channel(full, rho);
    result.steps.push_back("decode logical qubit " + std::to_string(g));
  }

  if (std::abs(rho.trace() - 1.0) > 1e-9) {
    throw std::logic_error("extract: extracted state lost trace");
  }
  rho.validate_psd(-1e-8);
  result.sigma = std::move(rho);
  result.normalized_energy =
      energy(instance, result.sigma) / static_cast<double>(instance.num_terms());
  return result;
}

MixedState apply_F(const ProverStrategy& strategy, const MixedState& rho, int qubit,
                   const std::vector<ProverQuestion>& choices) {
  const RegisterLayout& layout = strategy.layout();
  check_logical(layout, qubit);
  if (rho.num_qubits() != layout.total_qubits()) {
    throw std::invalid_argument("apply_F: state does not match the strategy layout");
  }
  if (rho.num_qubits() > kDensityQubitGuard) {
    throw std::invalid_argument("apply_F: register exceeds the density-matrix guard");
  }
  if (static_cast<int>(choices.size()) != kNumProvers) {
    throw std::invalid_argument("apply_F: need one question choice per prover");
  }
  for (const ProverQuestion& q : choices) {
    strategy.validate_question(q);
    if (q.kind == ProverQuestion::Kind::kSingleQubit) {
      if (q.qubit != qubit) {
        throw std::invalid_argument("apply_F: single-qubit choice must ask for the qubit");
      }
    } else if (!std::binary_search(q.set.begin(), q.set.end(), qubit)) {
      throw std::invalid_argument("apply_F: set choice must contain the qubit");
    }
  }

  const int nq = rho.num_qubits();
  CMatrix m = rho.matrix();
  std::vector<CMatrix> ops(static_cast<size_t>(kNumProvers));
  for (int t = 0; t < kNumProvers; ++t) {
    ops[static_cast<size_t>(t)] = strategy.block_unitary(t, choices[static_cast<size_t>(t)]);
    if (ops[static_cast<size_t>(t)].isIdentity(0.0)) continue;
    detail::conjugate_in_place(m, nq, ops[static_cast<size_t>(t)], layout.block(t));
  }
  std::vector<int> shares;
  for (int t = 0; t < kNumProvers; ++t) shares.push_back(layout.share_index(t, qubit));
  detail::conjugate_in_place(m, nq, FiveQubitCode::instance().check_projector().matrix, shares);
  for (int t = 0; t < kNumProvers; ++t) {
    if (ops[static_cast<size_t>(t)].isIdentity(0.0)) continue;
    detail::conjugate_in_place(m, nq, ops[static_cast<size_t>(t)].adjoint().eval(),
                               layout.block(t));
  }
  return MixedState(nq, std::move(m), true);
}

}  // namespace qmip
