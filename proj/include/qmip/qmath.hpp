#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qmip/rng.hpp"

// Dense state-vector / density-matrix algebra on named qubit subsets.
//
// Conventions, used consistently across the library:
//   * qubit 0 is the most significant bit of the amplitude index, so for an
//     n-qubit register the basis index of |b0 b1 ... b_{n-1}> is
//     sum_q b_q * 2^(n-1-q);
//   * an operator's target list gives the global qubit identity of each of
//     its local qubits, targets[0] being the operator's own qubit 0 (most
//     significant);
//   * values are immutable: operations return new states.

namespace qmip {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Construction-time tolerance for norms, traces and unitarity.
inline constexpr double kConstructionTol = 1e-10;
// Tolerance for exact algebraic identities checked in tests.
inline constexpr double kAlgebraTol = 1e-12;
// Eigenvalue floor for positive-semidefiniteness checks.
inline constexpr double kPsdTol = -1e-9;
// Hard ceiling on dense register sizes (2^30 amplitudes is the last size
// that fits the address arithmetic and any realistic memory budget).
inline constexpr int kMaxQubits = 30;

class PureState {
 public:
  // Checks dim == 2^num_qubits and, unless subnormalized, | ||psi|| - 1 | <=
  // kConstructionTol. Subnormalized states (norm <= 1 + tol) arise from
  // projective operations and must be requested explicitly.
  PureState(int num_qubits, CVector amplitudes, bool subnormalized = false);

  static PureState computational_basis(int num_qubits, std::uint64_t index);
  static PureState zero(int num_qubits) { return computational_basis(num_qubits, 0); }

  int num_qubits() const { return num_qubits_; }
  std::int64_t dim() const { return amps_.size(); }
  const CVector& amplitudes() const { return amps_; }
  bool subnormalized() const { return subnormalized_; }
  double norm() const { return amps_.norm(); }
  cdouble inner(const PureState& other) const;  // <this|other>

 private:
  int num_qubits_;
  CVector amps_;
  bool subnormalized_;
};

class MixedState {
 public:
  // Checks squareness, dim == 2^num_qubits, Hermiticity within
  // kConstructionTol, trace 1 (or <= 1 for subnormalized) within
  // kConstructionTol, and for dim <= 64 positive semidefiniteness within
  // kPsdTol. Larger matrices skip the (cubic-cost) eigenvalue check at
  // construction; validate_psd() runs it on demand.
  MixedState(int num_qubits, CMatrix matrix, bool subnormalized = false);

  static MixedState maximally_mixed(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  std::int64_t dim() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }
  bool subnormalized() const { return subnormalized_; }
  double trace() const { return matrix_.trace().real(); }
  void validate_psd(double tol = kPsdTol) const;  // throws on violation

 private:
  int num_qubits_;
  CMatrix matrix_;
  bool subnormalized_;
};

class QubitOperator {
 public:
  // targets: distinct global qubit indices, one per operator qubit,
  // targets[0] most significant. With unitary = true the matrix is checked
  // to satisfy U U^dag = Id within kConstructionTol.
  QubitOperator(CMatrix matrix, std::vector<int> targets, bool unitary = false);

  const CMatrix& matrix() const { return matrix_; }
  const std::vector<int>& targets() const { return targets_; }
  int arity() const { return static_cast<int>(targets_.size()); }
  bool is_unitary() const { return unitary_; }

 private:
  CMatrix matrix_;
  std::vector<int> targets_;
  bool unitary_;
};

// (Op (x) Id) |psi>. Unitary ops preserve the normalization flag; other ops
// yield a subnormalized state (they must be contractions).
PureState apply(const QubitOperator& op, const PureState& state);
// (Op (x) Id) rho (Op (x) Id)^dag.
MixedState apply(const QubitOperator& op, const MixedState& state);

// Kronecker products; qubit indices of b shift upward by a.num_qubits().
PureState tensor(const PureState& a, const PureState& b);
MixedState tensor(const MixedState& a, const MixedState& b);
CMatrix tensor(const CMatrix& a, const CMatrix& b);

// Trace out every qubit not in `keep`. `keep` must be strictly ascending;
// kept qubits appear in the result in that order.
MixedState partial_trace(const MixedState& state, const std::vector<int>& keep);

MixedState density(const PureState& state);

// Reduced density matrix of `targets` (arbitrary order, which becomes the
// qubit order of the result). Equivalent to partial_trace of density(state)
// up to qubit reordering, but computed directly from the vector.
MixedState reduced_density(const PureState& state, const std::vector<int>& targets);

// <psi| Op (x) Id |psi> (no normalization applied).
cdouble expectation(const PureState& state, const QubitOperator& op);
// Tr[(Op (x) Id) rho].
cdouble expectation(const MixedState& state, const QubitOperator& op);

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2; symmetric, 1 iff equal.
double fidelity(const MixedState& a, const MixedState& b);
// 0.5 * ||a - b||_1.
double trace_distance(const MixedState& a, const MixedState& b);

// Reorder qubits: result qubit j is input qubit order[j]; `order` must be a
// permutation of 0..n-1.
PureState permute_qubits(const PureState& state, const std::vector<int>& order);
MixedState permute_qubits(const MixedState& state, const std::vector<int>& order);

// Replace qubit `qubit` by p = log2(rows) fresh qubits via an isometry
// W: C^2 -> C^(2^p) (W^dag W = Id_2, checked). The new qubits sit at
// positions qubit..qubit+p-1; later qubits shift up by p-1.
PureState expand_with_isometry(const PureState& state, int qubit, const CMatrix& isometry);

// Full-space channel application: rho' = sum_k K rho K^dag. All Kraus
// operators must share one shape (d_out x d_in) with d_in == state dim; the
// output register has log2(d_out) qubits. Completeness is not enforced here.
MixedState apply_channel(const std::vector<CMatrix>& kraus, const MixedState& state);

// Random operators for tests, perturbations and optimizer restarts.
CMatrix random_unitary(int dim, Rng& rng);                    // Haar
CMatrix random_hermitian_unit_norm(int dim, Rng& rng);        // GUE, ||.||_op = 1
CMatrix hermitian_exp_i(const CMatrix& hermitian, double theta);  // exp(i*theta*H)
PureState random_state(int num_qubits, Rng& rng);

namespace detail {

// In-place kernels on raw storage, shared by the value-typed operations above
// and by performance-sensitive module internals. `targets` follows the same
// convention as QubitOperator.
void apply_in_place(CVector& amps, int num_qubits, const CMatrix& op,
                    const std::vector<int>& targets);
// M <- (Op (x) Id) M, applied to every column (row-index qubits).
void apply_left_in_place(CMatrix& m, int num_qubits, const CMatrix& op,
                         const std::vector<int>& targets);
// rho <- (Op (x) Id) rho (Op (x) Id)^dag.
void conjugate_in_place(CMatrix& rho, int num_qubits, const CMatrix& op,
                        const std::vector<int>& targets);
CVector permuted_vector(const CVector& amps, int num_qubits, const std::vector<int>& order);
CMatrix permuted_density(const CMatrix& rho, int num_qubits, const std::vector<int>& order);
CMatrix reduced_density_raw(const CVector& amps, int num_qubits,
                            const std::vector<int>& targets);
cdouble expectation_raw(const CVector& amps, int num_qubits, const CMatrix& op,
                        const std::vector<int>& targets);
CMatrix partial_trace_raw(const CMatrix& rho, int num_qubits, const std::vector<int>& keep);

// Offset tables: offsets[a] = sum_j bit_j(a) << (num_qubits-1-qubits[j]),
// a running over 2^|qubits| local basis states (qubits[0] most significant);
// rest_offsets enumerates the complementary positions in ascending index
// order of the residual register.
std::vector<std::int64_t> target_offsets(int num_qubits, const std::vector<int>& qubits);
std::vector<std::int64_t> rest_offsets(int num_qubits, const std::vector<int>& qubits);

void check_targets(int num_qubits, const std::vector<int>& targets);

}  // namespace detail

}  // namespace qmip
