#include "qmip/code5.hpp"

#include <cmath>
#include <stdexcept>

namespace qmip {
namespace {

constexpr int kDim = 32;  // 2^5

std::array<CMatrix, 4> build_generators(const std::array<std::string, 4>& labels) {
  std::array<CMatrix, 4> out{};
  for (int j = 0; j < 4; ++j) out[j] = pauli_string_matrix(labels[j]);
  // Stabilizer generators must commute pairwise; catch typos in the tables.
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double diff = (out[a] * out[b] - out[b] * out[a]).cwiseAbs().maxCoeff();
      if (diff > kAlgebraTol) throw std::logic_error("code5: generators do not commute");
    }
  }
  return out;
}

CMatrix projector_product(const std::array<CMatrix, 4>& generators, unsigned syndrome) {
  CMatrix p = CMatrix::Identity(kDim, kDim);
  for (int j = 0; j < 4; ++j) {
    const double sign = ((syndrome >> j) & 1u) ? -1.0 : 1.0;
    p = 0.5 * (p + sign * (p * generators[j]));
  }
  return p;
}

CodespaceProjector build_check(const std::array<CMatrix, 4>& generators) {
  return CodespaceProjector(projector_product(generators, 0));
}

std::array<CMatrix, 16> build_syndrome_projectors(const std::array<CMatrix, 4>& generators) {
  std::array<CMatrix, 16> out{};
  CMatrix sum = CMatrix::Zero(kDim, kDim);
  for (unsigned s = 0; s < 16; ++s) {
    out[s] = projector_product(generators, s);
    sum += out[s];
  }
  if ((sum - CMatrix::Identity(kDim, kDim)).cwiseAbs().maxCoeff() > kAlgebraTol) {
    throw std::logic_error("code5: syndrome projectors do not resolve the identity");
  }
  return out;
}

CMatrix build_isometry(const std::array<CMatrix, 4>& generators, const CodespaceProjector& check) {
  // |0_L> is the projection of |00000> onto the codespace; the overlap is
  // real and positive for this code, which fixes the global phase.
  CVector zero_log = check.matrix.col(0);
  const double norm = zero_log.norm();
  if (norm < 1e-6) throw std::logic_error("code5: |00000> has no codespace component");
  zero_log /= norm;
  if (!(zero_log(0).real() > 0.0) || std::abs(zero_log(0).imag()) > kAlgebraTol) {
    throw std::logic_error("code5: unexpected phase for the logical zero state");
  }
  const CVector one_log = pauli_string_matrix("XXXXX") * zero_log;

  CMatrix w(kDim, 2);
  w.col(0) = zero_log;
  w.col(1) = one_log;
  if ((w.adjoint() * w - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > kConstructionTol) {
    throw std::logic_error("code5: encoding columns are not orthonormal");
  }
  for (const CMatrix& g : generators) {
    if ((g * w - w).cwiseAbs().maxCoeff() > kConstructionTol) {
      throw std::logic_error("code5: codewords are not stabilized");
    }
  }
  return w;
}

// Anticommutation pattern of a Pauli string against the generators, packed
// with generator j at bit j.
unsigned syndrome_of(const CMatrix& error, const std::array<CMatrix, 4>& generators) {
  unsigned s = 0;
  for (int j = 0; j < 4; ++j) {
    const CMatrix comm = generators[j] * error - error * generators[j];
    const CMatrix anti = generators[j] * error + error * generators[j];
    const bool commutes = comm.cwiseAbs().maxCoeff() <= kAlgebraTol;
    const bool anticommutes = anti.cwiseAbs().maxCoeff() <= kAlgebraTol;
    if (commutes == anticommutes) {
      throw std::logic_error("code5: error neither commutes nor anticommutes with a generator");
    }
    if (anticommutes) s |= 1u << j;
  }
  return s;
}

std::array<std::string, 16> build_correction_labels(const std::array<CMatrix, 4>& generators) {
  // Enumerate candidate corrections in tie-break order: identity first, then
  // qubit index ascending with X before Y before Z. Each of the 16 syndromes
  // must be claimed exactly once (distance 3 on five qubits leaves no slack),
  // so the order never actually breaks a tie; we still assert that.
  std::array<std::string, 16> labels{};
  std::array<bool, 16> seen{};
  auto claim = [&](const std::string& label) {
    const unsigned s = syndrome_of(pauli_string_matrix(label), generators);
    if (seen[s]) throw std::logic_error("code5: two weight<=1 corrections share a syndrome");
    seen[s] = true;
    labels[s] = label;
  };
  claim("IIIII");
  for (int q = 0; q < 5; ++q) {
    for (char p : {'X', 'Y', 'Z'}) {
      std::string label = "IIIII";
      label[static_cast<size_t>(q)] = p;
      claim(label);
    }
  }
  for (bool hit : seen) {
    if (!hit) throw std::logic_error("code5: syndrome with no weight<=1 correction");
  }
  return labels;
}

DecodingChannel build_decode(const CMatrix& isometry,
                             const std::array<CMatrix, 16>& syndrome_projectors,
                             const std::array<std::string, 16>& correction_labels) {
  std::vector<CMatrix> kraus;
  kraus.reserve(16);
  for (unsigned s = 0; s < 16; ++s) {
    // Project onto the syndrome subspace, undo the diagnosed error (every
    // weight<=1 Pauli is its own inverse), then strip the encoding.
    kraus.push_back(isometry.adjoint() * pauli_string_matrix(correction_labels[s]) *
                    syndrome_projectors[s]);
  }
  return DecodingChannel(std::move(kraus));
}

std::array<CMatrix, 4> build_adjoint_units(const DecodingChannel& decode) {
  std::array<CMatrix, 4> out{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      // sum_s K_s^dag |a><b| K_s = sum_s (row a of K_s)^dag (row b of K_s)
      CMatrix m = CMatrix::Zero(kDim, kDim);
      for (const CMatrix& k : decode.kraus) m.noalias() += k.row(a).adjoint() * k.row(b);
      out[2 * a + b] = m;
    }
  }
  return out;
}

}  // namespace

CMatrix pauli_matrix(char label) {
  CMatrix m(2, 2);
  switch (label) {
    case 'I':
      m << 1, 0, 0, 1;
      break;
    case 'X':
      m << 0, 1, 1, 0;
      break;
    case 'Y':
      m << 0, cdouble(0, -1), cdouble(0, 1), 0;
      break;
    case 'Z':
      m << 1, 0, 0, -1;
      break;
    default:
      throw std::invalid_argument("pauli_matrix: label must be one of I, X, Y, Z");
  }
  return m;
}

CMatrix pauli_string_matrix(const std::string& labels) {
  if (labels.empty()) throw std::invalid_argument("pauli_string_matrix: empty label string");
  CMatrix m = pauli_matrix(labels[0]);
  for (size_t i = 1; i < labels.size(); ++i) m = tensor(m, pauli_matrix(labels[i]));
  return m;
}

CodespaceProjector::CodespaceProjector(CMatrix m) : matrix(std::move(m)) {
  if (matrix.rows() != kDim || matrix.cols() != kDim) {
    throw std::invalid_argument("CodespaceProjector: expected a 32x32 matrix");
  }
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > kAlgebraTol ||
      (matrix * matrix - matrix).cwiseAbs().maxCoeff() > kAlgebraTol) {
    throw std::invalid_argument("CodespaceProjector: matrix is not a Hermitian projector");
  }
  if (std::abs(matrix.trace().real() - 2.0) > kAlgebraTol) {
    throw std::invalid_argument("CodespaceProjector: projector rank is not 2");
  }
}

DecodingChannel::DecodingChannel(std::vector<CMatrix> k) : kraus(std::move(k)) {
  if (kraus.size() != 16) throw std::invalid_argument("DecodingChannel: expected 16 Kraus operators");
  CMatrix sum = CMatrix::Zero(kDim, kDim);
  for (const CMatrix& op : kraus) {
    if (op.rows() != 2 || op.cols() != kDim) {
      throw std::invalid_argument("DecodingChannel: Kraus operators must be 2x32");
    }
    sum.noalias() += op.adjoint() * op;
  }
  if ((sum - CMatrix::Identity(kDim, kDim)).cwiseAbs().maxCoeff() > kAlgebraTol) {
    throw std::invalid_argument("DecodingChannel: Kraus operators are not trace preserving");
  }
}

FiveQubitCode::FiveQubitCode()
    : generator_labels_{{"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"}},
      generators_(build_generators(generator_labels_)),
      logical_x_("XXXXX"),
      logical_z_("ZZZZZ"),
      check_(build_check(generators_)),
      isometry_(build_isometry(generators_, check_)),
      syndrome_projectors_(build_syndrome_projectors(generators_)),
      correction_labels_(build_correction_labels(generators_)),
      decode_(build_decode(isometry_, syndrome_projectors_, correction_labels_)),
      adjoint_units_(build_adjoint_units(decode_)) {
  // The logical Z must act as Z on the code basis; this pins down the
  // |0_L>/|1_L> labelling rather than just the codespace.
  const CMatrix zl = pauli_string_matrix(logical_z_);
  CMatrix expect(2, 2);
  expect << 1, 0, 0, -1;
  if ((isometry_.adjoint() * zl * isometry_ - expect).cwiseAbs().maxCoeff() > kConstructionTol) {
    throw std::logic_error("code5: logical Z does not act diagonally on the code basis");
  }
}

const FiveQubitCode& FiveQubitCode::instance() {
  static const FiveQubitCode code;
  return code;
}

PureState FiveQubitCode::encode(const PureState& logical) const {
  if (logical.num_qubits() != 1) {
    throw std::invalid_argument("encode: expected a single-qubit state");
  }
  return PureState(5, isometry_ * logical.amplitudes());
}

MixedState FiveQubitCode::decode(const MixedState& physical) const {
  if (physical.num_qubits() != 5) {
    throw std::invalid_argument("decode: expected a five-qubit state");
  }
  return apply_channel(decode_.kraus, physical);
}

std::array<double, 16> FiveQubitCode::syndrome_distribution(const PureState& physical) const {
  return syndrome_distribution(density(physical));
}

std::array<double, 16> FiveQubitCode::syndrome_distribution(const MixedState& physical) const {
  if (physical.num_qubits() != 5) {
    throw std::invalid_argument("syndrome_distribution: expected a five-qubit state");
  }
  std::array<double, 16> out{};
  for (unsigned s = 0; s < 16; ++s) {
    out[s] = (syndrome_projectors_[s] * physical.matrix()).trace().real();
  }
  return out;
}

}  // namespace qmip
