#include "qmip/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qmip {
namespace {

using detail::apply_in_place;
using detail::expectation_raw;

// Unitary passes per sweep; see the note in run().
constexpr int kUnitaryPasses = 3;

// A stored block unitary is addressed by (prover, kind, qubit, set); the
// payload mirrors ProverQuestion so map ordering is deterministic.
using UnitaryKey = std::tuple<int, int, int, std::vector<int>>;

UnitaryKey key_of(int prover, const ProverQuestion& q) {
  const bool single = q.kind == ProverQuestion::Kind::kSingleQubit;
  return {prover, single ? 0 : 1, single ? q.qubit : 0, q.set};
}

struct Atom {
  Question question;
  double weight = 0.0;
  std::array<ProverQuestion, kNumProvers> asks;
};

std::vector<Atom> build_atoms(const HamiltonianInstance& instance) {
  std::vector<Atom> atoms;
  for (const WeightedQuestion& wq : question_distribution(instance)) {
    Atom atom;
    atom.question = wq.question;
    atom.weight = wq.weight;
    for (int t = 0; t < kNumProvers; ++t) {
      atom.asks[static_cast<std::size_t>(t)] = prover_question(instance, wq.question, t);
    }
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

// Nearest unitary in Frobenius norm.
CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

void check_unitary(const CMatrix& u) {
  const std::int64_t d = u.rows();
  if ((u * u.adjoint() - CMatrix::Identity(d, d)).norm() > 1e-10) {
    throw std::logic_error("optimize: unitary drifted off the group after projection");
  }
}

// Alternating ascent engine. Acceptance is sum_q w_q <psi| B_q^dag P_q B_q
// |psi> with B_q the tensor of the five block unitaries the question
// addresses, so for fixed unitaries the best state is the top eigenvector of
// a Hermitian operator, and for a fixed state each unitary sees a smooth
// quadratic objective whose Euclidean gradient has the closed form used in
// gradient() below.
class SeeSaw {
 public:
  SeeSaw(const HamiltonianInstance& instance, const ProverStrategy& initial,
         const OptimizerConfig& config)
      : evaluator_(instance, initial.layout()),
        layout_(initial.layout()),
        config_(config),
        num_qubits_(layout_.total_qubits()),
        dim_(std::int64_t{1} << layout_.total_qubits()),
        psi_(initial.shared_state().amplitudes()),
        atoms_(build_atoms(instance)),
        fallback_rng_(substream(config.seed, "lanczos-fallback")) {
    for (const LocalTerm& term : instance.terms()) {
      if (term.qubits.size() > 2) {
        throw std::invalid_argument(
            "optimize: term supports of more than two qubits have no dense accept operator");
      }
    }
    for (int t = 0; t < kNumProvers; ++t) {
      blocks_[static_cast<std::size_t>(t)] = layout_.block(t);
    }
    // Materialize every block unitary the question distribution can address
    // (stored, rule-served or identity in the initial strategy) and invert
    // the map: which atoms does each unitary enter?
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      povms_.push_back(&evaluator_.accept_povm(atoms_[a].question));
      for (int t = 0; t < kNumProvers; ++t) {
        const ProverQuestion& ask = atoms_[a].asks[static_cast<std::size_t>(t)];
        UnitaryKey key = key_of(t, ask);
        unitaries_.try_emplace(key, initial.block_unitary(t, ask));
        users_[key].push_back(static_cast<int>(a));
      }
    }
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      std::array<const CMatrix*, kNumProvers> ops{};
      for (int t = 0; t < kNumProvers; ++t) {
        ops[static_cast<std::size_t>(t)] =
            &unitaries_.at(key_of(t, atoms_[a].asks[static_cast<std::size_t>(t)]));
      }
      atom_ops_.push_back(ops);
    }
    successes_.assign(atoms_.size(), 0.0);
    refresh_all_successes();
  }

  OptimizerTrace run() {
    std::vector<double> values;
    double prev = total();
    bool converged = false;
    for (int sweep = 0; sweep < config_.max_sweeps; ++sweep) {
      state_step();
      // The unitary updates are cheap next to the state step on large
      // registers, and letting them equilibrate against each other between
      // state moves escapes shallow coordinate-ascent plateaus measurably
      // better than a single pass.
      for (int pass = 0; pass < kUnitaryPasses; ++pass) unitary_sweep();
      const double value = total();
      if (!std::isfinite(value)) {
        throw std::logic_error("optimize: acceptance objective is not finite");
      }
      values.push_back(value);
      if (value - prev < config_.tolerance) {
        converged = true;
        break;
      }
      prev = value;
    }
    OptimizerTrace trace{std::move(values), export_strategy(), converged, 0.0};
    trace.final_value = trace.sweep_values.back();
    return trace;
  }

 private:
  // Applies the five block unitaries of atom `a` to v. `replaced_prover`
  // substitutes `replacement` for that prover's matrix (nullptr leaves the
  // prover out entirely, which the gradient needs).
  void apply_atom_ops(CVector& v, std::size_t a, int replaced_prover,
                      const CMatrix* replacement) const {
    for (int t = 0; t < kNumProvers; ++t) {
      const CMatrix* u =
          t == replaced_prover ? replacement : atom_ops_[a][static_cast<std::size_t>(t)];
      if (u == nullptr || u->isIdentity(0.0)) continue;
      apply_in_place(v, num_qubits_, *u, blocks_[static_cast<std::size_t>(t)]);
    }
  }

  void apply_atom_ops_adjoint(CVector& v, std::size_t a) const {
    for (int t = kNumProvers - 1; t >= 0; --t) {
      const CMatrix* u = atom_ops_[a][static_cast<std::size_t>(t)];
      if (u == nullptr || u->isIdentity(0.0)) continue;
      const CMatrix ua = u->adjoint();
      apply_in_place(v, num_qubits_, ua, blocks_[static_cast<std::size_t>(t)]);
    }
  }

  double success_of(std::size_t a) const {
    CVector v = psi_;
    apply_atom_ops(v, a, -1, nullptr);
    return expectation_raw(v, num_qubits_, povms_[a]->matrix(), povms_[a]->targets()).real();
  }

  void refresh_all_successes() {
    for (std::size_t a = 0; a < atoms_.size(); ++a) successes_[a] = success_of(a);
  }

  double total() const {
    double sum = 0.0;
    for (std::size_t a = 0; a < atoms_.size(); ++a) sum += atoms_[a].weight * successes_[a];
    return sum;
  }

  // y = sum_q w_q B_q^dag P_q B_q x.
  void matvec(const CVector& x, CVector& y) const {
    y.setZero(dim_);
    CVector tmp;
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      tmp = x;
      apply_atom_ops(tmp, a, -1, nullptr);
      apply_in_place(tmp, num_qubits_, povms_[a]->matrix(), povms_[a]->targets());
      apply_atom_ops_adjoint(tmp, a);
      y += atoms_[a].weight * tmp;
    }
  }

  void state_step() {
    if (dim_ <= 64) {
      // Small registers: assemble the acceptance operator column by column
      // and diagonalize, so the state update is exactly optimal.
      CMatrix m = CMatrix::Zero(dim_, dim_);
      CVector e = CVector::Zero(dim_);
      CVector col;
      for (std::int64_t j = 0; j < dim_; ++j) {
        e.setZero();
        e[j] = 1.0;
        matvec(e, col);
        m.col(j) = col;
      }
      Eigen::SelfAdjointEigenSolver<CMatrix> eig((m + m.adjoint()) / 2.0);
      psi_ = eig.eigenvectors().col(dim_ - 1).normalized();
    } else {
      lanczos_step();
    }
    refresh_all_successes();
  }

  // Rayleigh-Ritz ascent over warm-started Krylov spaces with full
  // reorthogonalization. The current state spans the first basis vector, so
  // the returned Ritz vector never has a smaller quadratic form: the step is
  // monotone even when the iteration budget stops it short of the exact top
  // eigenvector.
  void lanczos_step() {
    // Iteration budget shrinks with the register: on big registers the sweep
    // loop supplies the remaining convergence, and every intermediate Ritz
    // vector is already an improvement.
    const std::int64_t dim14 = std::int64_t{1} << 14;
    const int max_basis =
        static_cast<int>(std::min<std::int64_t>(dim_, dim_ > dim14 ? 12 : 32));
    const int max_outer = dim_ > dim14 ? 1 : 3;
    CVector v = psi_;
    double theta_prev = -std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < max_outer; ++outer) {
      std::vector<CVector> basis{v};
      std::vector<CVector> images;
      CMatrix proj = CMatrix::Zero(max_basis, max_basis);
      CVector ritz = v;
      double theta = 0.0;
      bool settled = false;
      int m = 0;
      while (m < max_basis) {
        images.emplace_back();
        matvec(basis[static_cast<std::size_t>(m)], images[static_cast<std::size_t>(m)]);
        for (int i = 0; i <= m; ++i) {
          proj(i, m) = basis[static_cast<std::size_t>(i)].dot(images[static_cast<std::size_t>(m)]);
          proj(m, i) = std::conj(proj(i, m));
        }
        ++m;
        const CMatrix small =
            (proj.topLeftCorner(m, m) + proj.topLeftCorner(m, m).adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(small);
        theta = eig.eigenvalues()(m - 1);
        const Eigen::VectorXcd y = eig.eigenvectors().col(m - 1);
        ritz.setZero(dim_);
        CVector image = CVector::Zero(dim_);
        for (int i = 0; i < m; ++i) {
          ritz += y[i] * basis[static_cast<std::size_t>(i)];
          image += y[i] * images[static_cast<std::size_t>(i)];
        }
        if ((image - theta * ritz).norm() <= 1e-9 * std::max(1.0, std::abs(theta))) {
          settled = true;
          break;
        }
        if (m == max_basis) break;
        CVector w = images[static_cast<std::size_t>(m - 1)];
        for (int pass = 0; pass < 2; ++pass) {
          for (int i = 0; i < m; ++i) {
            const CVector& b = basis[static_cast<std::size_t>(i)];
            w -= b.dot(w) * b;
          }
        }
        if (w.norm() < 1e-12) {
          // Krylov space closed under the operator; try a fresh direction
          // before giving up (only matters when the start lies in a small
          // invariant subspace).
          w.resize(dim_);
          for (std::int64_t j = 0; j < dim_; ++j) w[j] = fallback_rng_.complex_normal();
          for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < m; ++i) {
              const CVector& b = basis[static_cast<std::size_t>(i)];
              w -= b.dot(w) * b;
            }
          }
          if (w.norm() < 1e-12) {
            settled = true;
            break;
          }
        }
        basis.push_back(w.normalized());
      }
      v = ritz.normalized();
      if (settled || theta - theta_prev <= 1e-12) break;
      theta_prev = theta;
    }
    psi_ = v;
  }

  // Euclidean gradient of the local objective sum_{q in users} w_q s_q with
  // respect to this prover's block matrix: with x the state after the other
  // provers' blocks, y = (U x) and z = P y, the derivative of <y|P|y> in
  // conj(U_{ab}) is sum over the block's complement r of z[(a,r)] *
  // conj(x[(b,r)]), so a step along the returned matrix increases the value
  // to first order. Rescaled by the users' total weight so step lengths mean
  // the same thing on every instance.
  CMatrix gradient(const UnitaryKey& key, const std::vector<int>& user_atoms,
                   int prover) const {
    const std::int64_t bdim = std::int64_t{1} << layout_.qubits_per_prover();
    CMatrix g = CMatrix::Zero(bdim, bdim);
    const CMatrix& u = unitaries_.at(key);
    const std::vector<int>& block = blocks_[static_cast<std::size_t>(prover)];
    const auto toff = detail::target_offsets(num_qubits_, block);
    const auto roff = detail::rest_offsets(num_qubits_, block);
    CVector x;
    CVector z;
    for (int a : user_atoms) {
      x = psi_;
      apply_atom_ops(x, static_cast<std::size_t>(a), prover, nullptr);
      z = x;
      if (!u.isIdentity(0.0)) apply_in_place(z, num_qubits_, u, block);
      const QubitOperator* povm = povms_[static_cast<std::size_t>(a)];
      apply_in_place(z, num_qubits_, povm->matrix(), povm->targets());
      const double w = atoms_[static_cast<std::size_t>(a)].weight;
      for (const std::int64_t r : roff) {
        for (std::int64_t ai = 0; ai < bdim; ++ai) {
          const cdouble za = w * z[toff[static_cast<std::size_t>(ai)] + r];
          if (za == cdouble{0.0, 0.0}) continue;
          for (std::int64_t bi = 0; bi < bdim; ++bi) {
            g(ai, bi) += za * std::conj(x[toff[static_cast<std::size_t>(bi)] + r]);
          }
        }
      }
    }
    return g;
  }

  void unitary_sweep() {
    for (auto& [key, u] : unitaries_) {
      const std::vector<int>& user_atoms = users_.at(key);
      const int prover = std::get<0>(key);
      double w_total = 0.0;
      for (int a : user_atoms) w_total += atoms_[static_cast<std::size_t>(a)].weight;
      if (w_total <= 0.0) continue;
      CMatrix grad = gradient(key, user_atoms, prover);
      if (grad.norm() < 1e-13) continue;
      grad /= w_total;
      double old_local = 0.0;
      for (int a : user_atoms) {
        old_local +=
            atoms_[static_cast<std::size_t>(a)].weight * successes_[static_cast<std::size_t>(a)];
      }
      // The local objective is a positive semidefinite quadratic form in U,
      // so it dominates its own linearization: v(U') >= v(U) + 2 Re <U'-U, G>
      // for every U'. The unitary maximizing the linear term is the polar
      // factor of G itself (the infinite-step limit of polar(U + eta G)), so
      // that trial never loses ground and usually gains a lot; it is also the
      // only move that can leave a stationary point whose U^dag G is
      // Hermitian but not positive. When it stalls, fall back to short steps
      // along the tangent component U skew(U^dag G), the part of the gradient
      // the polar projection does not cancel, halving from 0.1 until ascent.
      std::vector<CMatrix> trials;
      trials.push_back(polar_unitary(grad));
      const CMatrix overlap = u.adjoint() * grad;
      const CMatrix tangent = u * ((overlap - overlap.adjoint()) / 2.0);
      if (tangent.norm() >= 1e-13) {
        const int halvings = config_.step_rule == StepRule::kBacktracking ? 6 : 1;
        double eta = 0.1;
        for (int h = 0; h < halvings; ++h, eta /= 2.0) {
          trials.push_back(polar_unitary(u + eta * tangent));
        }
      }
      std::vector<double> trial_succ(user_atoms.size());
      for (const CMatrix& trial : trials) {
        check_unitary(trial);
        double new_local = 0.0;
        for (std::size_t i = 0; i < user_atoms.size(); ++i) {
          const std::size_t a = static_cast<std::size_t>(user_atoms[i]);
          CVector v = psi_;
          apply_atom_ops(v, a, prover, &trial);
          trial_succ[i] =
              expectation_raw(v, num_qubits_, povms_[a]->matrix(), povms_[a]->targets()).real();
          new_local += atoms_[a].weight * trial_succ[i];
        }
        if (new_local > old_local) {
          u = trial;
          for (std::size_t i = 0; i < user_atoms.size(); ++i) {
            successes_[static_cast<std::size_t>(user_atoms[i])] = trial_succ[i];
          }
          break;
        }
      }
    }
  }

  ProverStrategy export_strategy() const {
    ProverStrategy out(layout_, PureState(num_qubits_, psi_.normalized()),
                       evaluator_.instance().locality());
    for (const auto& [key, u] : unitaries_) {
      const auto& [prover, kind, qubit, set] = key;
      if (kind == 0) {
        out.set_single_unitary(prover, qubit, u);
      } else {
        out.set_set_unitary(prover, set, u);
      }
    }
    return out;
  }

  AcceptanceEvaluator evaluator_;
  RegisterLayout layout_;
  OptimizerConfig config_;
  int num_qubits_;
  std::int64_t dim_;
  CVector psi_;
  std::vector<Atom> atoms_;
  Rng fallback_rng_;
  std::array<std::vector<int>, kNumProvers> blocks_;
  std::vector<const QubitOperator*> povms_;
  std::map<UnitaryKey, CMatrix> unitaries_;
  std::map<UnitaryKey, std::vector<int>> users_;
  std::vector<std::array<const CMatrix*, kNumProvers>> atom_ops_;
  std::vector<double> successes_;
};

}  // namespace

OptimizerTrace optimize(const HamiltonianInstance& instance, const ProverStrategy& initial,
                        const OptimizerConfig& config) {
  if (config.max_sweeps < 1) {
    throw std::invalid_argument("optimize: max_sweeps must be at least 1");
  }
  if (!(config.tolerance > 0.0)) {
    throw std::invalid_argument("optimize: tolerance must be positive");
  }
  if (!config.unitarize_every_step) {
    throw std::invalid_argument("optimize: disabling the unitary re-projection is not supported");
  }
  SeeSaw engine(instance, initial, config);
  return engine.run();
}

std::vector<OptimizerTrace> restart_traces(const HamiltonianInstance& instance,
                                           const OptimizerConfig& config, int num_restarts) {
  if (num_restarts < 1) {
    throw std::invalid_argument("restart_sweep: num_restarts must be at least 1");
  }
  std::vector<OptimizerTrace> traces;
  traces.reserve(static_cast<size_t>(num_restarts));
  for (int r = 0; r < num_restarts; ++r) {
    Rng rng = substream(config.seed, "restart", static_cast<std::uint64_t>(r));
    const RegisterLayout layout(instance.num_qubits(), config.aux_per_prover);
    traces.push_back(optimize(instance, random_strategy(instance, layout, rng), config));
  }
  return traces;
}

OptimizerTrace restart_sweep(const HamiltonianInstance& instance, const OptimizerConfig& config,
                             int num_restarts) {
  std::vector<OptimizerTrace> traces = restart_traces(instance, config, num_restarts);
  size_t best = 0;
  for (size_t r = 1; r < traces.size(); ++r) {
    if (traces[r].final_value > traces[best].final_value) best = r;
  }
  return std::move(traces[best]);
}

ProverStrategy random_strategy(const HamiltonianInstance& instance, const RegisterLayout& layout,
                               Rng& rng) {
  if (layout.num_logical() != instance.num_qubits()) {
    throw std::invalid_argument("random_strategy: layout does not match the instance");
  }
  ProverStrategy s(layout, random_state(layout.total_qubits(), rng), instance.locality());
  const int bdim = 1 << layout.qubits_per_prover();
  for (int t = 0; t < kNumProvers; ++t) {
    for (int i = 0; i < instance.num_qubits(); ++i) {
      s.set_single_unitary(t, i, random_unitary(bdim, rng));
    }
  }
  std::set<std::vector<int>> sets;
  for (const auto& subset : sorted_subsets(instance.num_qubits(), instance.locality())) {
    sets.insert(subset);
  }
  for (const LocalTerm& term : instance.terms()) sets.insert(term.qubits);
  for (int t = 0; t < kNumProvers; ++t) {
    for (const std::vector<int>& set : sets) {
      s.set_set_unitary(t, set, random_unitary(bdim, rng));
    }
  }
  return s;
}

}  // namespace qmip
