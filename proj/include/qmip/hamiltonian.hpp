#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmip/qmath.hpp"

namespace qmip {

// Validation slack for instances that have been through a float round trip.
inline constexpr double kInstanceTol = 1e-9;

// One k-local term: a PSD matrix of operator norm at most one acting on the
// listed qubits (sorted, distinct; the first listed qubit indexes the most
// significant factor of the matrix).
struct LocalTerm {
  std::vector<int> qubits;
  CMatrix matrix;
};

struct PromiseGap {
  double a = 0.0;
  double b = 0.0;
};

class HamiltonianInstance {
 public:
  HamiltonianInstance(int num_qubits, int locality, std::vector<LocalTerm> terms,
                      std::optional<PromiseGap> gap = std::nullopt);

  int num_qubits() const { return num_qubits_; }
  int locality() const { return locality_; }
  int num_terms() const { return static_cast<int>(terms_.size()); }
  const std::vector<LocalTerm>& terms() const { return terms_; }
  const std::optional<PromiseGap>& gap() const { return gap_; }

 private:
  int num_qubits_;
  int locality_;
  std::vector<LocalTerm> terms_;
  std::optional<PromiseGap> gap_;
};

// Sum of term expectations; each term implicitly tensored with identity.
double energy(const HamiltonianInstance& instance, const PureState& state);
double energy(const HamiltonianInstance& instance, const MixedState& state);

struct GroundResult {
  double energy;
  PureState witness;
};

// Dense diagonalization; guarded to num_qubits <= 12.
GroundResult ground(const HamiltonianInstance& instance);

// Chain of n-1 projectors onto the complement of an EPR pair on adjacent
// qubits; frustrated (strictly positive ground energy) for n >= 3.
HamiltonianInstance gen_epr_chain(int n);

// m random rank-deficient PSD norm-1 terms on uniformly random k-subsets.
HamiltonianInstance gen_random(int n, int k, int m, std::uint64_t seed);

// JSON text representation: {"n", "k", "terms":[{"qubits", "matrix"}], "gap"?}
// with complex entries as [re, im] pairs, matrices row-major.
HamiltonianInstance parse_instance(const std::string& text);
std::string serialize_instance(const HamiltonianInstance& instance);

}  // namespace qmip
