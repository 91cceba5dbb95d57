#pragma once

#include <array>
#include <string>
#include <vector>

#include "qmip/qmath.hpp"

// The [[5,1,3]] stabilizer code used to share each witness qubit among the
// five provers. All tables are built once, numerically, from the generator
// strings and validated at construction; nothing here is hand-entered.

namespace qmip {

CMatrix pauli_matrix(char label);                          // I, X, Y, Z
CMatrix pauli_string_matrix(const std::string& labels);    // Kronecker product

// Rank-2 projector onto the codespace (the test-2 CHECK measurement).
struct CodespaceProjector {
  CMatrix matrix;  // 32x32; Hermitian idempotent of trace 2 (checked)
  explicit CodespaceProjector(CMatrix m);
};

// Error-correct-then-decode channel: measure the four stabilizer generators,
// apply the weight-<=1 Pauli correction for the observed syndrome, then
// invert the encoding isometry. One Kraus operator per syndrome.
struct DecodingChannel {
  std::vector<CMatrix> kraus;  // 16 operators, each 2x32; sum K^dag K = Id (checked)
  explicit DecodingChannel(std::vector<CMatrix> k);
};

class FiveQubitCode {
 public:
  // Shared immutable instance with all tables built.
  static const FiveQubitCode& instance();

  int physical_qubits() const { return 5; }
  const std::array<std::string, 4>& stabilizer_generators() const { return generator_labels_; }
  const std::array<CMatrix, 4>& generator_matrices() const { return generators_; }
  const std::string& logical_x() const { return logical_x_; }
  const std::string& logical_z() const { return logical_z_; }

  // 32x2 isometry [ |0_L>  |1_L> ]; global phase fixed by <00000|0_L> > 0.
  const CMatrix& encoding_isometry() const { return isometry_; }
  const CodespaceProjector& check_projector() const { return check_; }
  const DecodingChannel& decoding_channel() const { return decode_; }

  // Syndrome s (index packs bit j = anticommutes-with-generator-j as 2^j)
  // maps to a unique weight-<=1 correction: this code is perfect, so the
  // tie-break order (identity, then qubit index ascending with X before Y
  // before Z) never has to choose between two corrections of equal weight.
  const std::array<std::string, 16>& correction_labels() const { return correction_labels_; }
  const std::array<CMatrix, 16>& syndrome_projectors() const { return syndrome_projectors_; }

  PureState encode(const PureState& logical) const;    // 1 qubit -> 5 qubits
  MixedState decode(const MixedState& physical) const; // 5 qubits -> 1 qubit
  std::array<double, 16> syndrome_distribution(const PureState& physical) const;
  std::array<double, 16> syndrome_distribution(const MixedState& physical) const;

  // Adjoint decoding map applied to a single-qubit matrix unit |a><b|,
  // M_ab = sum_s K_s^dag |a><b| K_s, indexed as [2a + b]. Building blocks for
  // pulled-back observables on blocks of five shares.
  const std::array<CMatrix, 4>& decode_adjoint_units() const { return adjoint_units_; }

 private:
  FiveQubitCode();

  // Declaration order matters: each member is built from the ones above it.
  std::array<std::string, 4> generator_labels_;
  std::array<CMatrix, 4> generators_;
  std::string logical_x_;
  std::string logical_z_;
  CodespaceProjector check_;
  CMatrix isometry_;
  std::array<CMatrix, 16> syndrome_projectors_;
  std::array<std::string, 16> correction_labels_;
  DecodingChannel decode_;
  std::array<CMatrix, 4> adjoint_units_;
};

}  // namespace qmip
