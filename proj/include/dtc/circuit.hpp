#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dtc/linalg.hpp"
#include "dtc/modal.hpp"

namespace dtc {

struct Mode {
  std::string id;
  ModeSpec spec;
  bool operator==(const Mode&) const = default;
};

// Coefficient of n_a n_b in the Hamiltonian.
struct CouplingEdge {
  std::string a, b;
  double J = 0.0;
  bool operator==(const CouplingEdge&) const = default;
};

// -E_J cos(phi_a - phi_b + 2 pi Phi_channel)
struct LoopJunction {
  std::string a, b;
  double ej = 0.0;
  int channel = 1;
  bool operator==(const LoopJunction&) const = default;
};

struct CircuitSpec {
  std::vector<Mode> modes;
  std::vector<CouplingEdge> edges;
  std::vector<LoopJunction> loops;

  void validate() const;
  int index_of(const std::string& id) const;  // -1 when absent
  std::vector<int> dims() const;
  std::size_t dimension() const;
  std::vector<std::string> ids() const;
  bool operator==(const CircuitSpec&) const = default;
};

inline constexpr std::size_t kDefaultDimensionCap = 20000;

// H(Phi1, Phi2) = H0 + sum_c [cos(2 pi Phi_c) A_c + sin(2 pi Phi_c) B_c]
// in the product basis of single-mode eigenstates.
struct FluxSeparableHamiltonian {
  SpMat H0;
  std::array<SpMat, 2> A;
  std::array<SpMat, 2> B;
  std::vector<int> dims;
  std::vector<std::string> ids;
  std::vector<Vec> local_energies;
  std::array<bool, 2> channel_used{false, false};

  std::size_t dim() const { return static_cast<std::size_t>(H0.rows()); }
};

FluxSeparableHamiltonian assemble(const CircuitSpec& circuit,
                                  std::size_t cap = kDefaultDimensionCap);

// (cos 2 pi Phi, sin 2 pi Phi) after reducing Phi into [0, 1).
std::pair<double, double> flux_cos_sin(double flux);

SpMat evaluate(const FluxSeparableHamiltonian& parts, double flux1, double flux2);
Mat evaluate_dense(const FluxSeparableHamiltonian& parts, double flux1, double flux2);

CircuitSpec subsystem(const CircuitSpec& circuit, const std::vector<std::string>& mode_subset);

// Same circuit with every truncation reset (modes not listed keep theirs).
CircuitSpec with_dims(const CircuitSpec& circuit, const std::vector<std::pair<std::string, int>>& dims);

}  // namespace dtc
