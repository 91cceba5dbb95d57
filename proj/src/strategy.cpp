#include "qmip/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "json_detail.hpp"
#include "qmip/code5.hpp"
#include "qmip/rng.hpp"

namespace qmip {
namespace {

void check_prover(int prover) {
  if (prover < 0 || prover >= kNumProvers) {
    throw std::invalid_argument("prover index out of range");
  }
}

void check_block_matrix(const CMatrix& m, int block_qubits, const std::string& what) {
  const auto dim = static_cast<Eigen::Index>(1) << block_qubits;
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument(what + ": matrix does not cover the prover block");
  }
  if ((m * m.adjoint() - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kConstructionTol) {
    throw std::invalid_argument(what + ": matrix is not unitary");
  }
}

void check_sorted_set(const std::vector<int>& set, int num_logical) {
  if (set.empty()) throw std::invalid_argument("set question: empty qubit set");
  for (size_t a = 0; a < set.size(); ++a) {
    if (set[a] < 0 || set[a] >= num_logical) {
      throw std::invalid_argument("set question: qubit index out of range");
    }
    if (a > 0 && set[a] <= set[a - 1]) {
      throw std::invalid_argument("set question: indices must be sorted and distinct");
    }
  }
}

std::uint64_t set_mask(const std::vector<int>& set) {
  std::uint64_t mask = 0;
  for (int q : set) mask |= 1ull << q;
  return mask;
}

// Permutation matrix exchanging two block-local qubits, as a full block matrix.
CMatrix block_swap(int block_qubits, int qa, int qb) {
  const auto dim = static_cast<Eigen::Index>(1) << block_qubits;
  CMatrix m = CMatrix::Zero(dim, dim);
  const int sa = block_qubits - 1 - qa;
  const int sb = block_qubits - 1 - qb;
  for (Eigen::Index x = 0; x < dim; ++x) {
    const auto ba = (static_cast<std::uint64_t>(x) >> sa) & 1u;
    const auto bb = (static_cast<std::uint64_t>(x) >> sb) & 1u;
    auto y = static_cast<std::uint64_t>(x);
    y &= ~((1ull << sa) | (1ull << sb));
    y |= bb << sa;
    y |= ba << sb;
    m(static_cast<Eigen::Index>(y), x) = 1.0;
  }
  return m;
}

}  // namespace

RegisterLayout::RegisterLayout(int num_logical, int aux_per_prover)
    : num_logical_(num_logical), aux_per_prover_(aux_per_prover) {
  if (num_logical_ < 1) throw std::invalid_argument("layout: need at least one logical qubit");
  if (aux_per_prover_ < 0) throw std::invalid_argument("layout: negative auxiliary count");
  if (total_qubits() > kMaxQubits) {
    throw std::invalid_argument("layout: register exceeds the dense-simulation limit");
  }
}

int RegisterLayout::share_index(int prover, int logical) const {
  check_prover(prover);
  if (logical < 0 || logical >= num_logical_) {
    throw std::invalid_argument("layout: logical qubit out of range");
  }
  return prover * qubits_per_prover() + logical;
}

int RegisterLayout::aux_index(int prover, int aux) const {
  check_prover(prover);
  if (aux < 0 || aux >= aux_per_prover_) {
    throw std::invalid_argument("layout: auxiliary qubit out of range");
  }
  return prover * qubits_per_prover() + num_logical_ + aux;
}

std::vector<int> RegisterLayout::block(int prover) const {
  check_prover(prover);
  std::vector<int> out(static_cast<size_t>(qubits_per_prover()));
  for (size_t q = 0; q < out.size(); ++q) {
    out[q] = prover * qubits_per_prover() + static_cast<int>(q);
  }
  return out;
}

std::vector<int> RegisterLayout::share_indices(int prover,
                                               const std::vector<int>& logicals) const {
  std::vector<int> out;
  out.reserve(logicals.size());
  for (int i : logicals) out.push_back(share_index(prover, i));
  return out;
}

ProverStrategy::ProverStrategy(RegisterLayout layout, PureState shared_state,
                               std::optional<int> set_arity)
    : layout_(layout), shared_state_(std::move(shared_state)), set_arity_(set_arity) {
  if (shared_state_.num_qubits() != layout_.total_qubits()) {
    throw std::invalid_argument("strategy: shared state does not cover the register layout");
  }
  if (set_arity_ && (*set_arity_ < 1 || *set_arity_ > layout_.num_logical())) {
    throw std::invalid_argument("strategy: set arity must lie in [1, n]");
  }
}

void ProverStrategy::set_single_unitary(int prover, int qubit, CMatrix block_matrix) {
  check_prover(prover);
  if (qubit < 0 || qubit >= layout_.num_logical()) {
    throw std::invalid_argument("strategy: logical qubit out of range");
  }
  check_block_matrix(block_matrix, layout_.qubits_per_prover(), "single unitary");
  stored_singles_[{prover, qubit}] = std::move(block_matrix);
}

void ProverStrategy::set_set_unitary(int prover, std::vector<int> set, CMatrix block_matrix) {
  check_prover(prover);
  check_sorted_set(set, layout_.num_logical());
  check_block_matrix(block_matrix, layout_.qubits_per_prover(), "set unitary");
  stored_sets_[{prover, std::move(set)}] = std::move(block_matrix);
}

void ProverStrategy::validate_question(const ProverQuestion& question) const {
  if (question.kind == ProverQuestion::Kind::kSingleQubit) {
    if (question.qubit < 0 || question.qubit >= layout_.num_logical()) {
      throw std::invalid_argument("question: qubit index out of range");
    }
    return;
  }
  check_sorted_set(question.set, layout_.num_logical());
  if (set_arity_ && static_cast<int>(question.set.size()) > *set_arity_) {
    throw std::invalid_argument("question: set larger than the declared arity");
  }
}

CMatrix ProverStrategy::block_unitary(int prover, const ProverQuestion& question) const {
  check_prover(prover);
  validate_question(question);
  if (question.kind == ProverQuestion::Kind::kSingleQubit) {
    const auto it = stored_singles_.find({prover, question.qubit});
    if (it != stored_singles_.end()) return it->second;
  } else {
    const auto it = stored_sets_.find({prover, question.set});
    if (it != stored_sets_.end()) return it->second;
    if (set_rule_) {
      if (auto m = set_rule_(prover, question.set)) {
        check_block_matrix(*m, layout_.qubits_per_prover(), "set rule");
        return *std::move(m);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(1) << layout_.qubits_per_prover();
  return CMatrix::Identity(dim, dim);
}

QubitOperator ProverStrategy::block_operator(int prover, const ProverQuestion& question) const {
  return QubitOperator(block_unitary(prover, question), layout_.block(prover), true);
}

Response respond(const ProverStrategy& strategy, int prover, const ProverQuestion& question) {
  const QubitOperator op = strategy.block_operator(prover, question);
  PureState state = apply(op, strategy.shared_state());
  std::vector<int> answers;
  if (question.kind == ProverQuestion::Kind::kSingleQubit) {
    answers.push_back(strategy.layout().share_index(prover, question.qubit));
  } else {
    answers = strategy.layout().share_indices(prover, question.set);
  }
  return Response{std::move(state), std::move(answers)};
}

ProverStrategy honest(const HamiltonianInstance& instance, const PureState& witness) {
  const int n = instance.num_qubits();
  if (witness.num_qubits() != n) {
    throw std::invalid_argument("honest: witness does not match the instance size");
  }
  const RegisterLayout layout(n);
  const auto& code = FiveQubitCode::instance();

  // Encode qubit by qubit; after expanding qubits 0..i-1 the original qubit i
  // sits at position 5i, and its five shares land at 5i..5i+4 in prover order.
  PureState state = witness;
  for (int i = 0; i < n; ++i) {
    state = expand_with_isometry(state, 5 * i, code.encoding_isometry());
  }
  // Regroup share-major -> prover-major: output qubit t*n+i takes input 5i+t.
  std::vector<int> order(static_cast<size_t>(5 * n));
  for (int t = 0; t < kNumProvers; ++t) {
    for (int i = 0; i < n; ++i) {
      order[static_cast<size_t>(t * n + i)] = 5 * i + t;
    }
  }
  return ProverStrategy(layout, permute_qubits(state, order), instance.locality());
}

ProverStrategy epr_pair_cheat(int n) {
  if (n < 2) throw std::invalid_argument("epr_pair_cheat: need at least two logical qubits");
  const RegisterLayout layout(n);
  const auto dim = static_cast<Eigen::Index>(1) << layout.total_qubits();
  CVector amps = CVector::Zero(dim);
  // One EPR pair between the first share qubit of provers 0 and 1.
  const int total = layout.total_qubits();
  const auto bit0 = 1ll << (total - 1 - layout.share_index(0, 0));
  const auto bit1 = 1ll << (total - 1 - layout.share_index(1, 0));
  amps(0) = 1.0 / std::sqrt(2.0);
  amps(bit0 + bit1) = 1.0 / std::sqrt(2.0);
  ProverStrategy strategy(layout, PureState(total, amps));

  // Provers 0 and 1 route the EPR half into whichever register is asked for;
  // everyone else plays along with fixed |0> answers.
  const int block_qubits = layout.qubits_per_prover();
  for (int t = 0; t < 2; ++t) {
    for (int i = 1; i < n; ++i) {
      strategy.set_single_unitary(t, i, block_swap(block_qubits, 0, i));
    }
  }
  strategy.set_set_rule([block_qubits](int prover, const std::vector<int>& set)
                            -> std::optional<CMatrix> {
    if (prover >= 2 || set[0] == 0) return std::nullopt;
    return block_swap(block_qubits, 0, set[0]);
  });
  return strategy;
}

ProverStrategy perturb(const ProverStrategy& base, double theta, std::uint64_t seed) {
  if (theta < 0.0) throw std::invalid_argument("perturb: magnitude must be non-negative");
  if (theta == 0.0) return base;

  const RegisterLayout& layout = base.layout();
  const int n = layout.num_logical();
  const int dim = 1 << layout.qubits_per_prover();
  ProverStrategy out = base;

  for (int t = 0; t < kNumProvers; ++t) {
    for (int i = 0; i < n; ++i) {
      Rng rng = substream(seed, "perturb-single", static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(i));
      const CMatrix g = random_hermitian_unit_norm(dim, rng);
      out.set_single_unitary(
          t, i, base.block_unitary(t, ProverQuestion::single(i)) * hermitian_exp_i(g, theta));
    }
  }

  // Sets: all k-subsets when the arity is known, otherwise just the ones the
  // base strategy stores explicitly.
  std::vector<std::pair<int, std::vector<int>>> set_keys;
  if (base.set_arity()) {
    for (int t = 0; t < kNumProvers; ++t) {
      for (auto& s : sorted_subsets(n, *base.set_arity())) set_keys.emplace_back(t, s);
    }
  } else {
    for (const auto& [key, unused] : base.stored_sets()) set_keys.push_back(key);
  }
  for (auto& [t, s] : set_keys) {
    Rng rng = substream(seed, "perturb-set", static_cast<std::uint64_t>(t), set_mask(s));
    const CMatrix g = random_hermitian_unit_norm(dim, rng);
    out.set_set_unitary(
        t, s, base.block_unitary(t, ProverQuestion::qubit_set(s)) * hermitian_exp_i(g, theta));
  }
  return out;
}

std::vector<std::vector<int>> sorted_subsets(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("sorted_subsets: need 0 <= k <= n");
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<size_t>(k));
  std::iota(current.begin(), current.end(), 0);
  if (k == 0) return {{}};
  while (true) {
    out.push_back(current);
    int pos = k - 1;
    while (pos >= 0 && current[static_cast<size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++current[static_cast<size_t>(pos)];
    for (int a = pos + 1; a < k; ++a) {
      current[static_cast<size_t>(a)] = current[static_cast<size_t>(a - 1)] + 1;
    }
  }
  return out;
}

ProverStrategy parse_strategy(const std::string& text) {
  using jsondetail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("strategy: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("shared_state")) {
    throw std::invalid_argument("strategy: expected an object with fields n, shared_state");
  }
  if (!j["n"].is_number_integer()) throw std::invalid_argument("strategy: n must be an integer");
  if (j.contains("r") && j["r"].get<int>() != kNumProvers) {
    throw std::invalid_argument("strategy: this simulator is fixed to five provers");
  }
  const int aux = j.value("aux", 0);
  const RegisterLayout layout(j["n"].get<int>(), aux);
  const CVector amps = jsondetail::vector_from_json(j["shared_state"], "strategy shared_state");
  std::optional<int> arity;
  if (j.contains("set_arity") && !j["set_arity"].is_null()) {
    arity = j["set_arity"].get<int>();
  }
  ProverStrategy strategy(layout, PureState(layout.total_qubits(), amps), arity);

  if (j.contains("single_unitaries")) {
    for (const json& e : j["single_unitaries"]) {
      if (!e.is_object() || !e.contains("prover") || !e.contains("qubit") ||
          !e.contains("matrix")) {
        throw std::invalid_argument("strategy: single unitary entries need prover, qubit, matrix");
      }
      strategy.set_single_unitary(e["prover"].get<int>(), e["qubit"].get<int>(),
                                  jsondetail::matrix_from_json(e["matrix"], "single unitary"));
    }
  }
  if (j.contains("set_unitaries")) {
    for (const json& e : j["set_unitaries"]) {
      if (!e.is_object() || !e.contains("prover") || !e.contains("qubits") ||
          !e.contains("matrix")) {
        throw std::invalid_argument("strategy: set unitary entries need prover, qubits, matrix");
      }
      strategy.set_set_unitary(e["prover"].get<int>(), e["qubits"].get<std::vector<int>>(),
                               jsondetail::matrix_from_json(e["matrix"], "set unitary"));
    }
  }
  return strategy;
}

std::string serialize_strategy(const ProverStrategy& strategy) {
  using jsondetail::json;
  json j;
  j["n"] = strategy.layout().num_logical();
  j["r"] = kNumProvers;
  j["aux"] = strategy.layout().aux_per_prover();
  if (strategy.set_arity()) j["set_arity"] = *strategy.set_arity();
  j["shared_state"] = jsondetail::vector_to_json(strategy.shared_state().amplitudes());
  json singles = json::array();
  for (const auto& [key, matrix] : strategy.stored_singles()) {
    singles.push_back(json{{"prover", key.first},
                           {"qubit", key.second},
                           {"matrix", jsondetail::matrix_to_json(matrix)}});
  }
  j["single_unitaries"] = std::move(singles);
  json sets = json::array();
  for (const auto& [key, matrix] : strategy.stored_sets()) {
    sets.push_back(json{{"prover", key.first},
                        {"qubits", key.second},
                        {"matrix", jsondetail::matrix_to_json(matrix)}});
  }
  j["set_unitaries"] = std::move(sets);
  return j.dump(2) + "\n";
}

}  // namespace qmip
