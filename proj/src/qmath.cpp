#include "qmip/qmath.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qmip {

namespace {


std::int64_t pow2(int n) { return std::int64_t{1} << n; }

int checked_num_qubits_for_dim(std::int64_t dim, const char* what) {
  if (dim <= 0) throw std::invalid_argument(std::string(what) + ": empty");
  int n = 0;
  while (pow2(n) < dim && n <= kMaxQubits) ++n;
  if (pow2(n) != dim)
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(dim) + " is not a power of two");
  return n;
}

void check_hermitian(const CMatrix& m, double tol, const char* what) {
  const auto d = m.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol)
        throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PureState / MixedState / QubitOperator
// ---------------------------------------------------------------------------

PureState::PureState(int num_qubits, CVector amplitudes, bool subnormalized)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)), subnormalized_(subnormalized) {
  if (num_qubits_ < 0 || num_qubits_ > kMaxQubits)
    throw std::invalid_argument("PureState: qubit count out of range");
  if (amps_.size() != pow2(num_qubits_))
    throw std::invalid_argument("PureState: amplitude vector has dimension " +
                                std::to_string(amps_.size()) + ", expected 2^" +
                                std::to_string(num_qubits_));
  const double n = amps_.norm();
  if (subnormalized_) {
    if (n > 1.0 + kConstructionTol)
      throw std::invalid_argument("PureState: subnormalized state has norm > 1");
  } else if (std::abs(n - 1.0) > kConstructionTol) {
    throw std::invalid_argument("PureState: state is not normalized (norm " +
                                std::to_string(n) + ")");
  }
}

PureState PureState::computational_basis(int num_qubits, std::uint64_t index) {
  if (num_qubits < 0 || num_qubits > kMaxQubits)
    throw std::invalid_argument("PureState: qubit count out of range");
  if (index >= static_cast<std::uint64_t>(pow2(num_qubits)))
    throw std::invalid_argument("PureState: basis index out of range");
  CVector v = CVector::Zero(pow2(num_qubits));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(num_qubits, std::move(v));
}

cdouble PureState::inner(const PureState& other) const {
  if (num_qubits_ != other.num_qubits_)
    throw std::invalid_argument("inner: qubit count mismatch");
  return amps_.dot(other.amps_);  // Eigen's dot conjugates the left argument
}

MixedState::MixedState(int num_qubits, CMatrix matrix, bool subnormalized)
    : num_qubits_(num_qubits), matrix_(std::move(matrix)), subnormalized_(subnormalized) {
  if (num_qubits_ < 0 || num_qubits_ > kMaxQubits)
    throw std::invalid_argument("MixedState: qubit count out of range");
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != pow2(num_qubits_))
    throw std::invalid_argument("MixedState: matrix must be square with dimension 2^" +
                                std::to_string(num_qubits_));
  check_hermitian(matrix_, kConstructionTol, "MixedState");
  const double tr = matrix_.trace().real();
  if (subnormalized_) {
    if (tr > 1.0 + kConstructionTol || tr < -kConstructionTol)
      throw std::invalid_argument("MixedState: subnormalized trace outside [0, 1]");
  } else if (std::abs(tr - 1.0) > kConstructionTol) {
    throw std::invalid_argument("MixedState: trace is not 1 (got " + std::to_string(tr) + ")");
  }
  if (matrix_.rows() <= 64) validate_psd();
}

MixedState MixedState::maximally_mixed(int num_qubits) {
  const auto d = pow2(num_qubits);
  return MixedState(num_qubits,
                    CMatrix::Identity(d, d) * (1.0 / static_cast<double>(d)));
}

void MixedState::validate_psd(double tol) const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < tol)
    throw std::invalid_argument("MixedState: matrix is not positive semidefinite (min eig " +
                                std::to_string(es.eigenvalues().minCoeff()) + ")");
}

QubitOperator::QubitOperator(CMatrix matrix, std::vector<int> targets, bool unitary)
    : matrix_(std::move(matrix)), targets_(std::move(targets)), unitary_(unitary) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("QubitOperator: matrix must be square");
  const int t = static_cast<int>(targets_.size());
  if (t == 0 || t > kMaxQubits || matrix_.rows() != pow2(t))
    throw std::invalid_argument("QubitOperator: matrix dimension does not match target count");
  std::vector<int> sorted = targets_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0) throw std::invalid_argument("QubitOperator: negative target index");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw std::invalid_argument("QubitOperator: duplicate target index");
  }
  if (unitary_) {
    const double err =
        (matrix_ * matrix_.adjoint() - CMatrix::Identity(matrix_.rows(), matrix_.rows()))
            .cwiseAbs()
            .maxCoeff();
    if (err > kConstructionTol)
      throw std::invalid_argument("QubitOperator: matrix flagged unitary is not unitary");
  }
}

// ---------------------------------------------------------------------------
// Index machinery
// ---------------------------------------------------------------------------

namespace detail {

void check_targets(int num_qubits, const std::vector<int>& targets) {
  std::vector<bool> seen(static_cast<std::size_t>(num_qubits), false);
  for (int q : targets) {
    if (q < 0 || q >= num_qubits)
      throw std::invalid_argument("target qubit " + std::to_string(q) + " out of range for " +
                                  std::to_string(num_qubits) + " qubits");
    if (seen[static_cast<std::size_t>(q)])
      throw std::invalid_argument("duplicate target qubit " + std::to_string(q));
    seen[static_cast<std::size_t>(q)] = true;
  }
}

std::vector<std::int64_t> target_offsets(int num_qubits, const std::vector<int>& qubits) {
  const int t = static_cast<int>(qubits.size());
  std::vector<std::int64_t> offs(static_cast<std::size_t>(pow2(t)), 0);
  for (std::int64_t a = 0; a < pow2(t); ++a) {
    std::int64_t off = 0;
    for (int j = 0; j < t; ++j) {
      if ((a >> (t - 1 - j)) & 1) off += pow2(num_qubits - 1 - qubits[static_cast<std::size_t>(j)]);
    }
    offs[static_cast<std::size_t>(a)] = off;
  }
  return offs;
}

std::vector<std::int64_t> rest_offsets(int num_qubits, const std::vector<int>& qubits) {
  std::vector<bool> in(static_cast<std::size_t>(num_qubits), false);
  for (int q : qubits) in[static_cast<std::size_t>(q)] = true;
  std::vector<int> rest;
  for (int q = 0; q < num_qubits; ++q) {
    if (!in[static_cast<std::size_t>(q)]) rest.push_back(q);
  }
  return target_offsets(num_qubits, rest);
}

namespace {

// Core kernel on a contiguous span. Routes contiguous-target applications
// through slab matrix products and everything else through a gather/GEMM/
// scatter pass; both do the arithmetic as dense products so Eigen's kernels
// carry the load.
void apply_span(cdouble* data, int num_qubits, const CMatrix& op,
                const std::vector<int>& targets) {
  const int t = static_cast<int>(targets.size());
  const std::int64_t dt = pow2(t);
  const std::int64_t dim = pow2(num_qubits);

  bool contiguous = true;
  for (int j = 1; j < t; ++j) {
    if (targets[static_cast<std::size_t>(j)] != targets[static_cast<std::size_t>(j - 1)] + 1)
      contiguous = false;
  }
  if (contiguous) {
    const int q0 = targets[0];
    const std::int64_t lo = pow2(num_qubits - q0 - t);
    const std::int64_t hi = pow2(q0);
    const CMatrix op_t = op.transpose();
    CMatrix tmp(lo, dt);
    for (std::int64_t h = 0; h < hi; ++h) {
      Eigen::Map<CMatrix> m(data + h * dt * lo, lo, dt);
      tmp.noalias() = m * op_t;
      m = tmp;
    }
    return;
  }

  const auto off_a = target_offsets(num_qubits, targets);
  const auto off_b = rest_offsets(num_qubits, targets);
  const std::int64_t dr = dim >> t;
  CMatrix m(dr, dt);
  for (std::int64_t a = 0; a < dt; ++a) {
    const std::int64_t oa = off_a[static_cast<std::size_t>(a)];
    for (std::int64_t b = 0; b < dr; ++b) {
      m(b, a) = data[oa + off_b[static_cast<std::size_t>(b)]];
    }
  }
  CMatrix r(dr, dt);
  r.noalias() = m * op.transpose();
  for (std::int64_t a = 0; a < dt; ++a) {
    const std::int64_t oa = off_a[static_cast<std::size_t>(a)];
    for (std::int64_t b = 0; b < dr; ++b) {
      data[oa + off_b[static_cast<std::size_t>(b)]] = r(b, a);
    }
  }
}

}  // namespace

void apply_in_place(CVector& amps, int num_qubits, const CMatrix& op,
                    const std::vector<int>& targets) {
  check_targets(num_qubits, targets);
  if (op.rows() != op.cols() || op.rows() != pow2(static_cast<int>(targets.size())))
    throw std::invalid_argument("apply: operator dimension does not match target count");
  apply_span(amps.data(), num_qubits, op, targets);
}

void apply_left_in_place(CMatrix& m, int num_qubits, const CMatrix& op,
                         const std::vector<int>& targets) {
  check_targets(num_qubits, targets);
  if (op.rows() != op.cols() || op.rows() != pow2(static_cast<int>(targets.size())))
    throw std::invalid_argument("apply: operator dimension does not match target count");
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    apply_span(m.data() + c * m.rows(), num_qubits, op, targets);
  }
}

void conjugate_in_place(CMatrix& rho, int num_qubits, const CMatrix& op,
                        const std::vector<int>& targets) {
  apply_left_in_place(rho, num_qubits, op, targets);  // Op rho
  CMatrix adj = rho.adjoint();                        // (Op rho)^dag
  apply_left_in_place(adj, num_qubits, op, targets);  // Op (Op rho)^dag
  rho = adj.adjoint();                                // Op rho Op^dag
}

CVector permuted_vector(const CVector& amps, int num_qubits, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != num_qubits)
    throw std::invalid_argument("permute: order must list every qubit exactly once");
  check_targets(num_qubits, order);
  const std::int64_t dim = amps.size();
  CVector out(dim);
  // shift[j]: bit position of source qubit order[j]; destination bit position
  // is num_qubits-1-j.
  std::vector<int> src_shift(order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    src_shift[j] = num_qubits - 1 - order[j];
  for (std::int64_t x = 0; x < dim; ++x) {
    std::int64_t y = 0;
    for (int j = 0; j < num_qubits; ++j) {
      y |= ((x >> src_shift[static_cast<std::size_t>(j)]) & 1) << (num_qubits - 1 - j);
    }
    out(y) = amps(x);
  }
  return out;
}

CMatrix permuted_density(const CMatrix& rho, int num_qubits, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != num_qubits)
    throw std::invalid_argument("permute: order must list every qubit exactly once");
  check_targets(num_qubits, order);
  const std::int64_t dim = rho.rows();
  std::vector<std::int64_t> map(static_cast<std::size_t>(dim));
  for (std::int64_t x = 0; x < dim; ++x) {
    std::int64_t y = 0;
    for (int j = 0; j < num_qubits; ++j) {
      y |= ((x >> (num_qubits - 1 - order[static_cast<std::size_t>(j)])) & 1)
           << (num_qubits - 1 - j);
    }
    map[static_cast<std::size_t>(x)] = y;
  }
  CMatrix out(dim, dim);
  for (std::int64_t c = 0; c < dim; ++c) {
    const std::int64_t mc = map[static_cast<std::size_t>(c)];
    for (std::int64_t r = 0; r < dim; ++r) {
      out(map[static_cast<std::size_t>(r)], mc) = rho(r, c);
    }
  }
  return out;
}

CMatrix reduced_density_raw(const CVector& amps, int num_qubits,
                            const std::vector<int>& targets) {
  check_targets(num_qubits, targets);
  const int t = static_cast<int>(targets.size());
  const std::int64_t dt = pow2(t);
  const std::int64_t dr = amps.size() >> t;
  const auto off_a = target_offsets(num_qubits, targets);
  const auto off_b = rest_offsets(num_qubits, targets);
  CMatrix m(dr, dt);
  for (std::int64_t a = 0; a < dt; ++a) {
    const std::int64_t oa = off_a[static_cast<std::size_t>(a)];
    for (std::int64_t b = 0; b < dr; ++b) {
      m(b, a) = amps(oa + off_b[static_cast<std::size_t>(b)]);
    }
  }
  CMatrix rho(dt, dt);
  rho.noalias() = m.adjoint() * m;        // rho(a', a) = sum_b conj(psi[a',b]) psi[a,b]
  return rho.conjugate().eval();          // rho(a, a') = sum_b psi[a,b] conj(psi[a',b])
}

cdouble expectation_raw(const CVector& amps, int num_qubits, const CMatrix& op,
                        const std::vector<int>& targets) {
  check_targets(num_qubits, targets);
  const int t = static_cast<int>(targets.size());
  if (op.rows() != op.cols() || op.rows() != pow2(t))
    throw std::invalid_argument("expectation: operator dimension does not match target count");
  const std::int64_t dt = pow2(t);
  const std::int64_t dr = amps.size() >> t;
  const auto off_a = target_offsets(num_qubits, targets);
  const auto off_b = rest_offsets(num_qubits, targets);
  CMatrix m(dr, dt);
  for (std::int64_t a = 0; a < dt; ++a) {
    const std::int64_t oa = off_a[static_cast<std::size_t>(a)];
    for (std::int64_t b = 0; b < dr; ++b) {
      m(b, a) = amps(oa + off_b[static_cast<std::size_t>(b)]);
    }
  }
  CMatrix w(dr, dt);
  w.noalias() = m * op.transpose();
  return (m.conjugate().cwiseProduct(w)).sum();
}

CMatrix partial_trace_raw(const CMatrix& rho, int num_qubits, const std::vector<int>& keep) {
  check_targets(num_qubits, keep);
  const int k = static_cast<int>(keep.size());
  const std::int64_t dk = pow2(k);
  const std::int64_t de = rho.rows() >> k;
  const auto off_k = target_offsets(num_qubits, keep);
  const auto off_e = rest_offsets(num_qubits, keep);
  CMatrix out = CMatrix::Zero(dk, dk);
  for (std::int64_t e = 0; e < de; ++e) {
    const std::int64_t oe = off_e[static_cast<std::size_t>(e)];
    for (std::int64_t b = 0; b < dk; ++b) {
      const std::int64_t ob = off_k[static_cast<std::size_t>(b)] + oe;
      for (std::int64_t a = 0; a < dk; ++a) {
        out(a, b) += rho(off_k[static_cast<std::size_t>(a)] + oe, ob);
      }
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

PureState apply(const QubitOperator& op, const PureState& state) {
  CVector amps = state.amplitudes();
  detail::apply_in_place(amps, state.num_qubits(), op.matrix(), op.targets());
  const bool sub = state.subnormalized() || !op.is_unitary();
  return PureState(state.num_qubits(), std::move(amps), sub);
}

MixedState apply(const QubitOperator& op, const MixedState& state) {
  CMatrix m = state.matrix();
  detail::conjugate_in_place(m, state.num_qubits(), op.matrix(), op.targets());
  const bool sub = state.subnormalized() || !op.is_unitary();
  return MixedState(state.num_qubits(), std::move(m), sub);
}

PureState tensor(const PureState& a, const PureState& b) {
  const std::int64_t da = a.dim(), db = b.dim();
  CVector out(da * db);
  for (std::int64_t i = 0; i < da; ++i) {
    out.segment(i * db, db) = a.amplitudes()(i) * b.amplitudes();
  }
  return PureState(a.num_qubits() + b.num_qubits(), std::move(out),
                   a.subnormalized() || b.subnormalized());
}

MixedState tensor(const MixedState& a, const MixedState& b) {
  const std::int64_t da = a.dim(), db = b.dim();
  CMatrix out(da * db, da * db);
  for (std::int64_t i = 0; i < da; ++i) {
    for (std::int64_t j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
    }
  }
  return MixedState(a.num_qubits() + b.num_qubits(), std::move(out),
                    a.subnormalized() || b.subnormalized());
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MixedState partial_trace(const MixedState& state, const std::vector<int>& keep) {
  for (std::size_t i = 1; i < keep.size(); ++i) {
    if (keep[i] <= keep[i - 1])
      throw std::invalid_argument("partial_trace: keep list must be strictly ascending");
  }
  CMatrix out = detail::partial_trace_raw(state.matrix(), state.num_qubits(), keep);
  return MixedState(static_cast<int>(keep.size()), std::move(out), state.subnormalized());
}

MixedState density(const PureState& state) {
  CMatrix m = state.amplitudes() * state.amplitudes().adjoint();
  return MixedState(state.num_qubits(), std::move(m), state.subnormalized());
}

MixedState reduced_density(const PureState& state, const std::vector<int>& targets) {
  CMatrix rho = detail::reduced_density_raw(state.amplitudes(), state.num_qubits(), targets);
  return MixedState(static_cast<int>(targets.size()), std::move(rho), state.subnormalized());
}

cdouble expectation(const PureState& state, const QubitOperator& op) {
  return detail::expectation_raw(state.amplitudes(), state.num_qubits(), op.matrix(),
                                 op.targets());
}

cdouble expectation(const MixedState& state, const QubitOperator& op) {
  detail::check_targets(state.num_qubits(), op.targets());
  const int t = op.arity();
  const std::int64_t dt = op.matrix().rows();
  const std::int64_t dr = state.dim() >> t;
  const auto off_a = detail::target_offsets(state.num_qubits(), op.targets());
  const auto off_b = detail::rest_offsets(state.num_qubits(), op.targets());
  cdouble sum = 0.0;
  for (std::int64_t a = 0; a < dt; ++a) {
    for (std::int64_t ap = 0; ap < dt; ++ap) {
      const cdouble o = op.matrix()(a, ap);
      if (o == cdouble{0.0, 0.0}) continue;
      cdouble acc = 0.0;
      for (std::int64_t b = 0; b < dr; ++b) {
        const std::int64_t ob = off_b[static_cast<std::size_t>(b)];
        acc += state.matrix()(off_a[static_cast<std::size_t>(ap)] + ob,
                              off_a[static_cast<std::size_t>(a)] + ob);
      }
      sum += o * acc;
    }
  }
  return sum;
}

double fidelity(const MixedState& a, const MixedState& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("fidelity: qubit count mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> ea(a.matrix());
  Eigen::VectorXd va = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  CMatrix sqrt_a = ea.eigenvectors() * va.asDiagonal() * ea.eigenvectors().adjoint();
  CMatrix m = sqrt_a * b.matrix() * sqrt_a;
  m = (m + m.adjoint()).eval() * 0.5;  // symmetrize rounding noise
  Eigen::SelfAdjointEigenSolver<CMatrix> em(m, Eigen::EigenvaluesOnly);
  double root_sum = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_sum * root_sum;
}

double trace_distance(const MixedState& a, const MixedState& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("trace_distance: qubit count mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

PureState permute_qubits(const PureState& state, const std::vector<int>& order) {
  CVector out = detail::permuted_vector(state.amplitudes(), state.num_qubits(), order);
  return PureState(state.num_qubits(), std::move(out), state.subnormalized());
}

MixedState permute_qubits(const MixedState& state, const std::vector<int>& order) {
  CMatrix out = detail::permuted_density(state.matrix(), state.num_qubits(), order);
  return MixedState(state.num_qubits(), std::move(out), state.subnormalized());
}

PureState expand_with_isometry(const PureState& state, int qubit, const CMatrix& isometry) {
  if (qubit < 0 || qubit >= state.num_qubits())
    throw std::invalid_argument("expand_with_isometry: qubit out of range");
  if (isometry.cols() != 2)
    throw std::invalid_argument("expand_with_isometry: isometry must have 2 columns");
  const std::int64_t dp = isometry.rows();
  int p = checked_num_qubits_for_dim(dp, "expand_with_isometry");
  const double err = (isometry.adjoint() * isometry - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  if (err > kConstructionTol)
    throw std::invalid_argument("expand_with_isometry: matrix is not an isometry");
  const std::int64_t pre_dim = pow2(qubit);
  const std::int64_t post_dim = pow2(state.num_qubits() - 1 - qubit);
  CVector out = CVector::Zero(state.dim() / 2 * dp);
  const CVector& in = state.amplitudes();
  for (std::int64_t pre = 0; pre < pre_dim; ++pre) {
    for (std::int64_t c = 0; c < dp; ++c) {
      auto seg = out.segment((pre * dp + c) * post_dim, post_dim);
      for (std::int64_t b = 0; b < 2; ++b) {
        seg += isometry(c, b) * in.segment((pre * 2 + b) * post_dim, post_dim);
      }
    }
  }
  return PureState(state.num_qubits() - 1 + p, std::move(out), state.subnormalized());
}

MixedState apply_channel(const std::vector<CMatrix>& kraus, const MixedState& state) {
  if (kraus.empty()) throw std::invalid_argument("apply_channel: empty Kraus list");
  const std::int64_t din = kraus.front().cols();
  const std::int64_t dout = kraus.front().rows();
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw std::invalid_argument("apply_channel: Kraus operators must share one shape");
  }
  if (din != state.dim())
    throw std::invalid_argument("apply_channel: Kraus input dimension does not match state");
  const int nq_out = checked_num_qubits_for_dim(dout, "apply_channel");
  CMatrix out = CMatrix::Zero(dout, dout);
  for (const auto& k : kraus) {
    out.noalias() += k * state.matrix() * k.adjoint();
  }
  return MixedState(nq_out, std::move(out), state.subnormalized());
}

// ---------------------------------------------------------------------------
// Random objects
// ---------------------------------------------------------------------------

CMatrix random_unitary(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const cdouble d = r(i, i);
    const cdouble phase = (std::abs(d) > 0.0) ? d / std::abs(d) : cdouble{1.0, 0.0};
    q.col(i) *= phase;
  }
  return q;
}

CMatrix random_hermitian_unit_norm(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
  }
  CMatrix h = (g + g.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (top > 0.0) h /= top;
  return h;
}

CMatrix hermitian_exp_i(const CMatrix& hermitian, double theta) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::exp(cdouble{0.0, theta * es.eigenvalues()(i)});
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

PureState random_state(int num_qubits, Rng& rng) {
  const std::int64_t dim = pow2(num_qubits);
  CVector v(dim);
  for (std::int64_t i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  v.normalize();
  return PureState(num_qubits, std::move(v));
}

}  // namespace qmip
