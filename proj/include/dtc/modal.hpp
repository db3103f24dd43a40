#pragma once

#include <utility>
#include <vector>

#include "dtc/linalg.hpp"

namespace dtc {

enum class ModeKind { Transmon, Harmonic };

struct ModeSpec {
  ModeKind kind = ModeKind::Transmon;
  double ec = 0.0;  // GHz
  double ej = 0.0;  // GHz, transmon only
  double el = 0.0;  // GHz, harmonic only
  int dim = 3;      // levels kept in the composite space
  // Oscillator levels used to build the mode before projecting onto its
  // lowest `dim` eigenstates. 0 picks 2 dim + 1 for harmonic modes (the kept
  // levels are then exact) and, for transmons, the largest basis that still
  // cannot resolve the neighbouring cosine wells, 0.4 (pi / phi_zpf)^2.
  int basis_dim = 0;

  double ex() const { return kind == ModeKind::Transmon ? ej : el; }
  double phi_zpf() const;
  double n_zpf() const;
  int construction_dim() const;
  void validate() const;

  static ModeSpec transmon(double ec, double ej, int dim, int basis_dim = 0);
  static ModeSpec harmonic(double ec, double el, int dim, int basis_dim = 0);
  bool operator==(const ModeSpec&) const = default;
};

struct OperatorSet {
  Mat phi;
  CMat n;
  Mat cos_phi;
  Mat sin_phi;
  Mat lower;
};

// Operators of one mode restricted to its lowest `dim` eigenstates. The
// charge operator is stored as n = i * n_im with n_im real antisymmetric.
struct LocalMode {
  Vec energies;
  Mat phi;
  Mat n_im;
  Mat cos_phi;
  Mat sin_phi;
};

std::pair<Mat, Mat> build_ladder(int dim);
OperatorSet build_mode_operators(const ModeSpec& spec);
Mat mode_hamiltonian(const ModeSpec& spec, const OperatorSet& ops);
LocalMode local_mode(const ModeSpec& spec);

// Order of factors follows `dims`; index 0 is the most significant.
Mat embed(const Mat& op, std::size_t mode_index, const std::vector<int>& dims);
CMat embed(const CMat& op, std::size_t mode_index, const std::vector<int>& dims);

// Sparse Kronecker chain with the listed single-mode factors, identity elsewhere.
SpMat kron_chain(const std::vector<std::pair<std::size_t, const Mat*>>& factors,
                 const std::vector<int>& dims);

Vec transmon_charge_spectrum(double ec, double ej, int charge_cutoff = 30, int count = 5);

// Transition frequency from the lowest two eigenvalues of a single mode.
double mode_frequency(const ModeSpec& spec);

}  // namespace dtc
