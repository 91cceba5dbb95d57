#include "qmip/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "qmip/code5.hpp"

namespace qmip {
namespace {

std::vector<std::vector<int>> sets_containing(int n, int k, int qubit) {
  std::vector<std::vector<int>> out;
  for (auto& s : sorted_subsets(n, k)) {
    if (std::binary_search(s.begin(), s.end(), qubit)) out.push_back(std::move(s));
  }
  return out;
}

double clamp_probability(double p) { return std::min(1.0, std::max(0.0, p)); }

// Memoization key: kind, primary index, set bitmask, odd prover.
using QuestionKey = std::tuple<int, int, std::uint64_t, int>;

QuestionKey question_key(const Question& q) {
  if (const auto* e = std::get_if<EnergyTest>(&q.variant)) return {0, e->term, 0, 0};
  if (const auto* m = std::get_if<CodeTestMixed>(&q.variant)) {
    std::uint64_t mask = 0;
    for (int i : m->set) mask |= 1ull << i;
    return {1, m->qubit, mask, m->odd_prover};
  }
  return {2, std::get<CodeTestAll>(q.variant).qubit, 0, 0};
}

// Observable on a group of five-share blocks whose expectation equals the
// probability of the accept outcome after decoding each block: the adjoint
// decoding channel applied factor-wise to accept = Id - H_j.
CMatrix pulled_back_accept(const CMatrix& accept, int groups) {
  if (groups > 2) {
    throw std::invalid_argument(
        "accept_povm: dense pullback is limited to terms on at most two qubits");
  }
  const auto& units = FiveQubitCode::instance().decode_adjoint_units();
  const auto dim = static_cast<Eigen::Index>(1) << groups;
  if (accept.rows() != dim) throw std::logic_error("pulled_back_accept: dimension mismatch");
  const auto out_dim = static_cast<Eigen::Index>(1) << (5 * groups);
  CMatrix out = CMatrix::Zero(out_dim, out_dim);
  if (groups == 1) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        out += accept(a, b) * units[static_cast<size_t>(2 * a + b)];
      }
    }
    return out;
  }
  if (groups == 2) {
    for (int a0 = 0; a0 < 2; ++a0) {
      for (int b0 = 0; b0 < 2; ++b0) {
        for (int a1 = 0; a1 < 2; ++a1) {
          for (int b1 = 0; b1 < 2; ++b1) {
            const cdouble coeff = accept(2 * a0 + a1, 2 * b0 + b1);
            if (std::abs(coeff) < 1e-300) continue;
            out += coeff * tensor(units[static_cast<size_t>(2 * a0 + b0)],
                                  units[static_cast<size_t>(2 * a1 + b1)]);
          }
        }
      }
    }
    return out;
  }
  throw std::logic_error("pulled_back_accept: unreachable");
}

}  // namespace

void validate_question(const HamiltonianInstance& instance, const Question& question) {
  const int n = instance.num_qubits();
  const int k = instance.locality();
  if (const auto* e = std::get_if<EnergyTest>(&question.variant)) {
    if (e->term < 0 || e->term >= instance.num_terms()) {
      throw std::invalid_argument("question: term index out of range");
    }
    return;
  }
  if (const auto* m = std::get_if<CodeTestMixed>(&question.variant)) {
    if (m->qubit < 0 || m->qubit >= n) {
      throw std::invalid_argument("question: qubit index out of range");
    }
    if (m->odd_prover < 0 || m->odd_prover >= kNumProvers) {
      throw std::invalid_argument("question: odd prover out of range");
    }
    if (static_cast<int>(m->set.size()) != k) {
      throw std::invalid_argument("question: mixed-test set must have exactly k qubits");
    }
    for (size_t a = 0; a < m->set.size(); ++a) {
      if (m->set[a] < 0 || m->set[a] >= n) {
        throw std::invalid_argument("question: set index out of range");
      }
      if (a > 0 && m->set[a] <= m->set[a - 1]) {
        throw std::invalid_argument("question: set must be sorted and distinct");
      }
    }
    if (!std::binary_search(m->set.begin(), m->set.end(), m->qubit)) {
      throw std::invalid_argument("question: mixed-test set must contain the tested qubit");
    }
    return;
  }
  const auto& all = std::get<CodeTestAll>(question.variant);
  if (all.qubit < 0 || all.qubit >= n) {
    throw std::invalid_argument("question: qubit index out of range");
  }
}

Question sample_question(const HamiltonianInstance& instance, Rng& rng) {
  // Draw order is part of the reproducibility contract: test coin, then the
  // indices of the chosen branch.
  if (rng.uniform() < 0.5) {
    return Question{EnergyTest{static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(instance.num_terms())))}};
  }
  const int i = static_cast<int>(
      rng.uniform_int(static_cast<std::uint64_t>(instance.num_qubits())));
  if (rng.uniform() < 0.5) {
    const auto sets = sets_containing(instance.num_qubits(), instance.locality(), i);
    const auto pick = rng.uniform_int(sets.size());
    const int odd = static_cast<int>(rng.uniform_int(kNumProvers));
    return Question{CodeTestMixed{i, sets[pick], odd}};
  }
  return Question{CodeTestAll{i}};
}

std::vector<WeightedQuestion> question_distribution(const HamiltonianInstance& instance) {
  std::vector<WeightedQuestion> out;
  const int n = instance.num_qubits();
  const int m = instance.num_terms();
  for (int j = 0; j < m; ++j) {
    out.push_back({Question{EnergyTest{j}}, 0.5 / m, true});
  }
  for (int i = 0; i < n; ++i) {
    const double per_qubit = 0.5 / n;
    out.push_back({Question{CodeTestAll{i}}, per_qubit * 0.5, false});
    const auto sets = sets_containing(n, instance.locality(), i);
    const double per_mixed = per_qubit * 0.5 / (static_cast<double>(sets.size()) * kNumProvers);
    for (const auto& s : sets) {
      for (int t = 0; t < kNumProvers; ++t) {
        out.push_back({Question{CodeTestMixed{i, s, t}}, per_mixed, false});
      }
    }
  }
  return out;
}

AcceptanceEvaluator::AcceptanceEvaluator(HamiltonianInstance instance, RegisterLayout layout)
    : instance_(std::move(instance)), layout_(layout) {
  if (layout_.num_logical() != instance_.num_qubits()) {
    throw std::invalid_argument("evaluator: layout does not match the instance");
  }
  if (layout_.total_qubits() > kProtocolQubitGuard) {
    throw std::invalid_argument("evaluator: exact mode is guarded to 26 total qubits");
  }
}

ProverQuestion prover_question(const HamiltonianInstance& instance, const Question& question,
                               int prover) {
  validate_question(instance, question);
  if (prover < 0 || prover >= kNumProvers) {
    throw std::out_of_range("prover_question: prover index out of range");
  }
  if (const auto* e = std::get_if<EnergyTest>(&question.variant)) {
    return ProverQuestion::qubit_set(instance.terms()[static_cast<size_t>(e->term)].qubits);
  }
  if (const auto* m = std::get_if<CodeTestMixed>(&question.variant)) {
    if (prover == m->odd_prover) return ProverQuestion::qubit_set(m->set);
    return ProverQuestion::single(m->qubit);
  }
  return ProverQuestion::single(std::get<CodeTestAll>(question.variant).qubit);
}

std::vector<QubitOperator> AcceptanceEvaluator::prover_operators(
    const ProverStrategy& strategy, const Question& question) const {
  std::vector<QubitOperator> ops;
  ops.reserve(kNumProvers);
  for (int t = 0; t < kNumProvers; ++t) {
    ops.push_back(strategy.block_operator(t, prover_question(instance_, question, t)));
  }
  return ops;
}

const QubitOperator& AcceptanceEvaluator::accept_povm(const Question& question) const {
  validate_question(instance_, question);
  std::pair<int, int> key;
  if (const auto* e = std::get_if<EnergyTest>(&question.variant)) {
    key = {0, e->term};
  } else if (const auto* m = std::get_if<CodeTestMixed>(&question.variant)) {
    key = {1, m->qubit};
  } else {
    key = {1, std::get<CodeTestAll>(question.variant).qubit};
  }
  const auto it = povm_cache_.find(key);
  if (it != povm_cache_.end()) return it->second;

  if (key.first == 0) {
    const LocalTerm& term = instance_.terms()[static_cast<size_t>(key.second)];
    const int groups = static_cast<int>(term.qubits.size());
    const auto dim = static_cast<Eigen::Index>(1) << groups;
    const CMatrix pulled = pulled_back_accept(CMatrix::Identity(dim, dim) - term.matrix, groups);
    std::vector<int> targets;
    for (int q : term.qubits) {
      for (int t = 0; t < kNumProvers; ++t) targets.push_back(layout_.share_index(t, q));
    }
    return povm_cache_.emplace(key, QubitOperator(pulled, std::move(targets))).first->second;
  }
  std::vector<int> shares;
  for (int t = 0; t < kNumProvers; ++t) shares.push_back(layout_.share_index(t, key.second));
  return povm_cache_
      .emplace(key, QubitOperator(FiveQubitCode::instance().check_projector().matrix,
                                  std::move(shares)))
      .first->second;
}

double AcceptanceEvaluator::success(const ProverStrategy& strategy,
                                    const Question& question) const {
  if (!(strategy.layout() == layout_)) {
    throw std::invalid_argument("evaluator: strategy uses a different register layout");
  }
  CVector state = strategy.shared_state().amplitudes();
  for (const QubitOperator& op : prover_operators(strategy, question)) {
    if (op.matrix().isIdentity(0.0)) continue;
    detail::apply_in_place(state, layout_.total_qubits(), op.matrix(), op.targets());
  }
  if (const auto* e = std::get_if<EnergyTest>(&question.variant)) {
    const auto& support = instance_.terms()[static_cast<size_t>(e->term)].qubits;
    if (static_cast<int>(support.size()) > 2) {
      return clamp_probability(
          energy_success_by_contraction(PureState(layout_.total_qubits(), state), *e));
    }
  }
  const QubitOperator& povm = accept_povm(question);
  return clamp_probability(
      detail::expectation_raw(state, layout_.total_qubits(), povm.matrix(), povm.targets())
          .real());
}

// Exact energy-test success for wide supports, without materializing the
// pulled-back observable: permute the share groups to the front, then decode
// group by group as a sum over Kraus branches, each contraction shrinking the
// state by a factor of 16.
double AcceptanceEvaluator::energy_success_by_contraction(const PureState& state,
                                                          const EnergyTest& test) const {
  const LocalTerm& term = instance_.terms()[static_cast<size_t>(test.term)];
  const int groups = static_cast<int>(term.qubits.size());
  const int total = layout_.total_qubits();

  std::vector<int> order;
  order.reserve(static_cast<size_t>(total));
  std::vector<char> is_share(static_cast<size_t>(total), 0);
  for (int q : term.qubits) {
    for (int t = 0; t < kNumProvers; ++t) {
      const int idx = layout_.share_index(t, q);
      order.push_back(idx);
      is_share[static_cast<size_t>(idx)] = 1;
    }
  }
  for (int q = 0; q < total; ++q) {
    if (!is_share[static_cast<size_t>(q)]) order.push_back(q);
  }
  CVector front = detail::permuted_vector(state.amplitudes(), total, order);

  const auto dim = static_cast<Eigen::Index>(1) << groups;
  const CMatrix accept = CMatrix::Identity(dim, dim) - term.matrix;
  const auto& kraus = FiveQubitCode::instance().decoding_channel().kraus;
  std::vector<int> decoded_targets(static_cast<size_t>(groups));
  std::iota(decoded_targets.begin(), decoded_targets.end(), 0);

  std::function<double(const CVector&, int, int)> recurse =
      [&](const CVector& v, int undecoded, int qubits_now) -> double {
    if (undecoded == 0) {
      return detail::expectation_raw(v, qubits_now, accept, decoded_targets).real();
    }
    const auto lead = static_cast<Eigen::Index>(1) << (5 * (undecoded - 1));
    const auto tail = v.size() / (lead * 32);
    double sum = 0.0;
    CVector next(v.size() / 16);
    for (const CMatrix& k : kraus) {
      for (Eigen::Index p = 0; p < lead; ++p) {
        Eigen::Map<const CMatrix> block(v.data() + p * 32 * tail, tail, 32);
        Eigen::Map<CMatrix> dst(next.data() + p * 2 * tail, tail, 2);
        dst.noalias() = block * k.transpose();
      }
      sum += recurse(next, undecoded - 1, qubits_now - 4);
    }
    return sum;
  };
  return recurse(front, groups, total);
}

AcceptanceReport accept_probability_exact(const HamiltonianInstance& instance,
                                          const ProverStrategy& strategy) {
  const AcceptanceEvaluator evaluator(instance, strategy.layout());
  double weighted_energy = 0.0;
  double weighted_code = 0.0;
  for (const WeightedQuestion& wq : question_distribution(instance)) {
    const double s = evaluator.success(strategy, wq.question);
    (wq.is_energy_test ? weighted_energy : weighted_code) += wq.weight * s;
  }
  AcceptanceReport report;
  report.p_test1 = clamp_probability(weighted_energy / 0.5);
  report.p_test2 = clamp_probability(weighted_code / 0.5);
  report.p_overall = (report.p_test1 + report.p_test2) / 2.0;
  report.exact = true;
  report.gap = instance.gap();
  return report;
}

AcceptanceReport accept_probability_sampled(const HamiltonianInstance& instance,
                                            const ProverStrategy& strategy, long long shots,
                                            std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sampler: need at least one shot");
  const AcceptanceEvaluator evaluator(instance, strategy.layout());
  std::map<QuestionKey, double> memo;

  long long energy_shots = 0, energy_accepts = 0;
  long long code_shots = 0, code_accepts = 0;
  for (long long s = 0; s < shots; ++s) {
    Rng rng = substream(seed, "shot", static_cast<std::uint64_t>(s));
    const Question q = sample_question(instance, rng);
    const QuestionKey key = question_key(q);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, evaluator.success(strategy, q)).first;
    const bool accept = rng.uniform() < it->second;
    const bool is_energy = std::holds_alternative<EnergyTest>(q.variant);
    (is_energy ? energy_shots : code_shots) += 1;
    if (accept) (is_energy ? energy_accepts : code_accepts) += 1;
  }

  AcceptanceReport report;
  report.exact = false;
  // Empirical branch rates; a branch that was never drawn reports zero.
  report.p_test1 = energy_shots > 0
                       ? static_cast<double>(energy_accepts) / static_cast<double>(energy_shots)
                       : 0.0;
  report.p_test2 = code_shots > 0
                       ? static_cast<double>(code_accepts) / static_cast<double>(code_shots)
                       : 0.0;
  const double p_hat = static_cast<double>(energy_accepts + code_accepts) /
                       static_cast<double>(shots);
  report.p_overall = p_hat;
  report.sampled = SampledInfo{
      shots, seed, std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(shots))};
  report.gap = instance.gap();
  return report;
}

}  // namespace qmip
