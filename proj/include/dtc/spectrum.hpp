#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dtc/circuit.hpp"
#include "dtc/linalg.hpp"

namespace dtc {

struct Eigenpairs {
  Vec values;   // ascending
  Mat vectors;  // columns
};

Eigenpairs eigendecompose(const Mat& H, double symmetry_tol = 1e-10);

// Lowest k eigenpairs. Dense solve below `dense_limit`, ARPACK Lanczos above.
inline constexpr Eigen::Index kDenseLimit = 1500;
Eigenpairs lowest_eigenpairs(const SpMat& H, int k, Eigen::Index dense_limit = kDenseLimit);

using Label = std::vector<int>;
std::string label_string(const Label& l);

// Product states of single-mode eigenstates. In the assembled basis these are
// the canonical unit vectors, so the basis is independent of flux.
struct BareBasis {
  std::vector<int> dims;
  std::vector<Vec> local_energies;

  std::size_t size() const;
  std::size_t index(const Label& l) const;
  Label label(std::size_t index) const;
  double energy(const Label& l) const;
  Vec vector(const Label& l) const;
  bool contains(const Label& l) const;
};

BareBasis bare_basis(const FluxSeparableHamiltonian& parts);

struct LabeledState {
  Label label;
  double energy = 0.0;
  double overlap = 0.0;
  int eig_index = -1;
  bool ambiguous = false;  // runner-up overlap ties the winner
  Vec vector;
};

struct LabeledSpectrum {
  std::vector<LabeledState> entries;
  const LabeledState& at(const Label& l) const;
  const LabeledState* find(const Label& l) const;
};

inline constexpr double kOverlapFloor = 0.25;

LabeledSpectrum label_states(const Eigenpairs& eig, const BareBasis& bare,
                             const std::vector<Label>& wanted, double overlap_floor = kOverlapFloor,
                             const std::string& context = "");

// |00>, |01>, |10>, |11> for the given (first, second) mode indices, spectators 0.
std::array<Label, 4> computational_labels(const std::vector<int>& dims, int first, int second);

struct ZZResult {
  double flux1 = 0.0, flux2 = 0.0;
  double zeta = 0.0;  // GHz
  double E00 = 0.0, E01 = 0.0, E10 = 0.0, E11 = 0.0;
  double min_overlap = 0.0;
};

ZZResult zz_strength(const LabeledSpectrum& s, const std::array<Label, 4>& labels);

struct SpectrumOptions {
  int k = 40;
  double overlap_floor = kOverlapFloor;
  Eigen::Index dense_limit = kDenseLimit;
};

// Eigensolve and label one flux point.
LabeledSpectrum solve_point(const FluxSeparableHamiltonian& parts, const BareBasis& bare,
                            double flux1, double flux2, const std::vector<Label>& wanted,
                            const SpectrumOptions& opt = {});

struct SweepPoint {
  double flux1 = 0.0, flux2 = 0.0;
  LabeledSpectrum spectrum;
  std::optional<ZZResult> zz;
  std::string error;  // non-empty when the point failed
  bool ok() const { return error.empty(); }
};

struct SweepRequest {
  std::array<Label, 4> qubit_labels;
  std::vector<Label> extra_labels;
  SpectrumOptions options;
  int workers = 1;
};

// Index-ordered parallel map; fn(i) must be independent of execution order.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// channel 1 varies flux1 with flux2 held at `other`; channel 2 the reverse;
// channel 0 moves both fluxes together.
std::vector<SweepPoint> sweep_1d(const FluxSeparableHamiltonian& parts, int channel,
                                 const std::vector<double>& grid, const SweepRequest& req,
                                 double other = 0.0);

struct SweepMap {
  std::vector<double> grid1, grid2;
  std::vector<SweepPoint> points;  // row-major: index = i1 * grid2.size() + i2
  const SweepPoint& at(std::size_t i1, std::size_t i2) const { return points[i1 * grid2.size() + i2]; }
};

SweepMap sweep_2d(const FluxSeparableHamiltonian& parts, const std::vector<double>& grid1,
                  const std::vector<double>& grid2, const SweepRequest& req);

// Sign changes of zeta along a 1D sweep, refined by bisection.
struct ZeroCrossing {
  double flux = 0.0;
  double zeta = 0.0;
};
std::vector<ZeroCrossing> find_zz_zeros(const std::function<double(double)>& zeta_of_flux,
                                        const std::vector<double>& grid, double tol = 1e-7);

}  // namespace dtc
