#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dtc/circuit.hpp"
#include "dtc/linalg.hpp"
#include "dtc/pulse.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

enum class Method { Midpoint, RK4 };

struct PropagationConfig {
  double dt = 0.02;  // ns
  int stride = 25;
  Method method = Method::Midpoint;
  double drift_tol = 1e-6;
  // RK4 substeps keep 2 pi * (spectral half-width) * h below this.
  double rk4_phase = 0.02;
  void validate() const;
  bool operator==(const PropagationConfig&) const = default;
};

// Evolution of several initial states at once (one column each). Amplitudes
// are recorded against a fixed set of probe states, the idle dressed states.
struct Trajectory {
  std::vector<double> times;
  std::vector<CMat> amplitudes;  // per record: probes x columns
  std::vector<Vec> norms;        // per record: one entry per column
  CMat final_amplitudes;
  CMat final_state;              // propagator-native coordinates
  double max_norm_drift = 0.0;
};

// Full-space propagation. `probes` holds the probe states as columns.
Trajectory propagate(const FluxSeparableHamiltonian& parts, const PulsePair& pulses,
                     const CMat& psi0, const Mat& probes, const PropagationConfig& cfg);

// Adiabatic cell propagator for pulses that drive the listed flux channels
// with one shared waveform. Flux nodes sit at phi_idle + k * spacing; each cell
// spans two adjacent nodes and uses the orthonormalized union of their lowest
// `states` eigenvectors as a Galerkin basis.
struct CellOptions {
  double spacing = 0.01;
  int states = 24;
  Eigen::Index dense_limit = kDenseLimit;
  bool operator==(const CellOptions&) const = default;
};

class AdiabaticCells {
 public:
  AdiabaticCells(const FluxSeparableHamiltonian& parts, double phi_idle, std::array<bool, 2> driven,
                 double held_flux, const CellOptions& opt);

  // Builds any missing cells so that fluxes in [lo, hi] are covered.
  void ensure_range(double lo, double hi);
  void ensure_pulse(const PulseParams& p);

  const Eigenpairs& idle() const { return idle_; }
  double phi_idle() const { return phi_idle_; }
  const CellOptions& options() const { return opt_; }
  int cell_count() const { return static_cast<int>(cells_.size()); }

  // psi0 columns are coordinates in the idle eigenbasis (states x columns);
  // amplitudes are recorded against the same basis.
  Trajectory propagate(const PulseParams& p, const CMat& c0, const PropagationConfig& cfg) const;

 private:
  struct Node {
    Mat V;
  };
  struct Cell {
    Mat W;
    Mat H0, A, B;
    Mat Q;    // W^T V_idle
    Mat Up;   // W_{k+1}^T W_k, valid when the next cell exists
  };
  const Node& node(int k);
  void build_cell(int k);

  const FluxSeparableHamiltonian& parts_;
  double phi_idle_;
  std::array<bool, 2> driven_;
  double held_flux_;
  CellOptions opt_;
  SpMat H0_, A_, B_;
  Eigenpairs idle_;
  std::map<int, Node> nodes_;
  std::map<int, Cell> cells_;
};

double leakage(const CVec& psi_final, const Mat& computational);
double leakage_from_amplitudes(const CVec& computational_amplitudes);

// Population series per label for one column of a trajectory.
std::map<std::string, std::vector<double>> population_traces(
    const Trajectory& traj, int column, const std::map<std::string, int>& label_to_probe);

}  // namespace dtc
