#include "qmip/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "json_detail.hpp"
#include "qmip/rng.hpp"

namespace qmip {
namespace {

std::string term_tag(size_t j) { return "term " + std::to_string(j); }

void validate_term(const LocalTerm& term, size_t j, int num_qubits, int locality) {
  const std::string tag = term_tag(j);
  if (term.qubits.empty()) throw std::invalid_argument(tag + ": empty qubit support");
  if (static_cast<int>(term.qubits.size()) > locality) {
    throw std::invalid_argument(tag + ": support larger than the declared locality");
  }
  for (size_t a = 0; a < term.qubits.size(); ++a) {
    if (term.qubits[a] < 0 || term.qubits[a] >= num_qubits) {
      throw std::invalid_argument(tag + ": qubit index out of range");
    }
    if (a > 0 && term.qubits[a] <= term.qubits[a - 1]) {
      throw std::invalid_argument(tag + ": qubit support must be sorted and distinct");
    }
  }
  const auto dim = static_cast<Eigen::Index>(1) << term.qubits.size();
  if (term.matrix.rows() != dim || term.matrix.cols() != dim) {
    throw std::invalid_argument(tag + ": matrix dimension does not match the support size");
  }
  if ((term.matrix - term.matrix.adjoint()).cwiseAbs().maxCoeff() > kInstanceTol) {
    throw std::invalid_argument(tag + ": matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(term.matrix, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -kInstanceTol) {
    throw std::invalid_argument(tag + ": matrix is not positive semidefinite (eigenvalue " +
                                std::to_string(lo) + ")");
  }
  if (hi > 1.0 + kInstanceTol) {
    throw std::invalid_argument(tag + ": operator norm " + std::to_string(hi) + " exceeds 1");
  }
}

double term_expectation_sum(const HamiltonianInstance& instance, const auto& state) {
  double total = 0.0;
  for (const LocalTerm& term : instance.terms()) {
    total += expectation(state, QubitOperator(term.matrix, term.qubits)).real();
  }
  return total;
}

}  // namespace

HamiltonianInstance::HamiltonianInstance(int num_qubits, int locality,
                                         std::vector<LocalTerm> terms,
                                         std::optional<PromiseGap> gap)
    : num_qubits_(num_qubits), locality_(locality), terms_(std::move(terms)), gap_(gap) {
  if (num_qubits_ < 1) throw std::invalid_argument("instance: need at least one qubit");
  if (locality_ < 1 || locality_ > num_qubits_) {
    throw std::invalid_argument("instance: locality must be between 1 and the qubit count");
  }
  if (terms_.empty()) throw std::invalid_argument("instance: need at least one term");
  for (size_t j = 0; j < terms_.size(); ++j) {
    validate_term(terms_[j], j, num_qubits_, locality_);
  }
  if (gap_) {
    if (!(gap_->a >= 0.0 && gap_->b <= 1.0 && gap_->a < gap_->b)) {
      throw std::invalid_argument("instance: promise gap must satisfy 0 <= a < b <= 1");
    }
  }
}

double energy(const HamiltonianInstance& instance, const PureState& state) {
  if (state.num_qubits() != instance.num_qubits()) {
    throw std::invalid_argument("energy: state qubit count does not match the instance");
  }
  return term_expectation_sum(instance, state);
}

double energy(const HamiltonianInstance& instance, const MixedState& state) {
  if (state.num_qubits() != instance.num_qubits()) {
    throw std::invalid_argument("energy: state qubit count does not match the instance");
  }
  return term_expectation_sum(instance, state);
}

GroundResult ground(const HamiltonianInstance& instance) {
  const int n = instance.num_qubits();
  if (n > 12) {
    throw std::invalid_argument("ground: dense diagonalization is guarded to 12 qubits");
  }
  const auto dim = static_cast<Eigen::Index>(1) << n;
  // Assemble the full matrix one column at a time by pushing basis vectors
  // through the local-term kernels; keeps this path independent of any
  // full-embedding helper used elsewhere.
  CMatrix full = CMatrix::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    CVector accum = CVector::Zero(dim);
    for (const LocalTerm& term : instance.terms()) {
      CVector basis = CVector::Zero(dim);
      basis(c) = 1.0;
      detail::apply_in_place(basis, n, term.matrix, term.qubits);
      accum += basis;
    }
    full.col(c) = accum;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(full);
  if (es.info() != Eigen::Success) throw std::runtime_error("ground: eigensolver failed");
  return GroundResult{es.eigenvalues()(0), PureState(n, es.eigenvectors().col(0))};
}

HamiltonianInstance gen_epr_chain(int n) {
  if (n < 2) throw std::invalid_argument("gen_epr_chain: need at least two qubits");
  CVector epr(4);
  epr << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  const CMatrix term_matrix = CMatrix::Identity(4, 4) - epr * epr.adjoint();
  std::vector<LocalTerm> terms;
  terms.reserve(static_cast<size_t>(n - 1));
  for (int j = 0; j + 1 < n; ++j) {
    terms.push_back(LocalTerm{{j, j + 1}, term_matrix});
  }
  return HamiltonianInstance(n, 2, std::move(terms));
}

HamiltonianInstance gen_random(int n, int k, int m, std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n || m < 1) {
    throw std::invalid_argument("gen_random: need 1 <= k <= n and m >= 1");
  }
  const auto dim = static_cast<Eigen::Index>(1) << k;
  std::vector<LocalTerm> terms;
  terms.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    Rng support_rng = substream(seed, "support", static_cast<std::uint64_t>(j));
    std::vector<int> pool(static_cast<size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int a = 0; a < k; ++a) {
      const auto pick = a + static_cast<int>(support_rng.uniform_int(
                                static_cast<std::uint64_t>(n - a)));
      std::swap(pool[static_cast<size_t>(a)], pool[static_cast<size_t>(pick)]);
    }
    std::vector<int> support(pool.begin(), pool.begin() + k);
    std::sort(support.begin(), support.end());

    // Rank-deficient PSD with operator norm exactly one: a Wishart matrix
    // from a short Ginibre block, scaled by its top eigenvalue.
    Rng term_rng = substream(seed, "term", static_cast<std::uint64_t>(j));
    CMatrix g(dim, dim - 1);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = term_rng.complex_normal();
    }
    CMatrix w = g * g.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(w, Eigen::EigenvaluesOnly);
    w /= es.eigenvalues().maxCoeff();
    terms.push_back(LocalTerm{std::move(support), 0.5 * (w + w.adjoint())});
  }
  return HamiltonianInstance(n, k, std::move(terms));
}

HamiltonianInstance parse_instance(const std::string& text) {
  using jsondetail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("instance: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("k") || !j.contains("terms")) {
    throw std::invalid_argument("instance: expected an object with fields n, k, terms");
  }
  if (!j["n"].is_number_integer() || !j["k"].is_number_integer() || !j["terms"].is_array()) {
    throw std::invalid_argument("instance: n and k must be integers and terms an array");
  }
  std::vector<LocalTerm> terms;
  terms.reserve(j["terms"].size());
  for (size_t idx = 0; idx < j["terms"].size(); ++idx) {
    const json& tj = j["terms"][idx];
    const std::string tag = term_tag(idx);
    if (!tj.is_object() || !tj.contains("qubits") || !tj.contains("matrix")) {
      throw std::invalid_argument(tag + ": expected an object with fields qubits, matrix");
    }
    if (!tj["qubits"].is_array()) throw std::invalid_argument(tag + ": qubits must be an array");
    LocalTerm term;
    for (const json& q : tj["qubits"]) {
      if (!q.is_number_integer()) {
        throw std::invalid_argument(tag + ": qubit indices must be integers");
      }
      term.qubits.push_back(q.get<int>());
    }
    term.matrix = jsondetail::matrix_from_json(tj["matrix"], tag);
    terms.push_back(std::move(term));
  }
  std::optional<PromiseGap> gap;
  if (j.contains("gap") && !j["gap"].is_null()) {
    const json& gj = j["gap"];
    if (!gj.is_object() || !gj.contains("a") || !gj.contains("b") || !gj["a"].is_number() ||
        !gj["b"].is_number()) {
      throw std::invalid_argument("instance: gap must be an object with numeric a, b");
    }
    gap = PromiseGap{gj["a"].get<double>(), gj["b"].get<double>()};
  }
  return HamiltonianInstance(j["n"].get<int>(), j["k"].get<int>(), std::move(terms), gap);
}

std::string serialize_instance(const HamiltonianInstance& instance) {
  using jsondetail::json;
  json j;
  j["n"] = instance.num_qubits();
  j["k"] = instance.locality();
  j["terms"] = json::array();
  for (const LocalTerm& term : instance.terms()) {
    json tj;
    tj["qubits"] = term.qubits;
    tj["matrix"] = jsondetail::matrix_to_json(term.matrix);
    j["terms"].push_back(std::move(tj));
  }
  if (instance.gap()) {
    j["gap"] = json{{"a", instance.gap()->a}, {"b", instance.gap()->b}};
  }
  return j.dump(2) + "\n";
}

}  // namespace qmip
