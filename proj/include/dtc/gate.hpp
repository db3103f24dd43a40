#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dtc/circuit.hpp"
#include "dtc/dynamics.hpp"
#include "dtc/pulse.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

CMat extract_unitary(const std::array<CVec, 4>& final_states, const std::array<CVec, 4>& dressed);

struct PhaseCorrection {
  CMat U;
  std::array<double, 4> phi{};  // phi00, phi01, phi10, phi11
};

PhaseCorrection remove_single_qubit_phases(const CMat& U_raw);
double wrap_phase(double x);  // into (-pi, pi]
double conditional_phase_error(const std::array<double, 4>& phi);
double average_fidelity(const CMat& U);

struct GateResult {
  CMat U_raw;
  CMat U_corrected;
  std::array<double, 4> phi{};
  double conditional_phase = 0.0;  // phi11 - phi01 - phi10 + phi00, wrapped
  double delta_phi = 0.0;
  double fidelity = 0.0;
  std::array<double, 4> leakage{};  // per computational initial state
  double eps01 = 0.0, eps10 = 0.0, eps_leak = 0.0;
  Trajectory trajectory;
  std::map<std::string, int> probe_index;  // trace label -> probe row
};

enum class Backend { Auto, Full, Cells };

struct SimulatorOptions {
  Backend backend = Backend::Auto;
  std::size_t full_limit = 2000;  // Auto picks full-space propagation up to this size
  int idle_states = 40;           // probe states when propagating in full space
  CellOptions cells;
  bool operator==(const SimulatorOptions&) const = default;
};

// Everything a gate evaluation needs that does not depend on the pulse: the
// idle dressed basis and, for large systems, the adiabatic cells.
class GateSimulator {
 public:
  GateSimulator(const FluxSeparableHamiltonian& parts, int first_qubit, int second_qubit,
                double phi_idle, const SimulatorOptions& opt = {});

  GateResult run(const PulsePair& pulses, const PropagationConfig& cfg) const;

  double phi_idle() const { return phi_idle_; }
  Backend backend() const { return backend_; }
  const std::array<Label, 4>& computational() const { return comp_; }
  const LabeledSpectrum& idle_spectrum() const { return idle_labeled_; }
  const FluxSeparableHamiltonian& parts() const { return parts_; }
  // Pre-builds cells covering a pulse; no-op for full-space propagation.
  void prepare(const PulseParams& p) const;

 private:
  const FluxSeparableHamiltonian& parts_;
  double phi_idle_;
  Backend backend_;
  SimulatorOptions opt_;
  std::array<Label, 4> comp_;
  std::vector<std::pair<std::string, Label>> traced_;
  Eigenpairs idle_;
  LabeledSpectrum idle_labeled_;
  mutable std::unique_ptr<AdiabaticCells> cells_;
  mutable std::shared_mutex cells_mutex_;
};

GateResult evaluate_gate(const GateSimulator& sim, const PulsePair& pulses, const PropagationConfig& cfg);

struct CalibrationOptions {
  int restarts = 8;
  std::uint64_t seed = 20240611;
  double w_leak = 1.0;
  double w_phi = 1.0 / (kPi * kPi);
  int max_evals = 200;
  double simplex_tol = 1e-5;
  double success_cost = 1e-4;
  double step_amp = 0.02;
  double step_lambda = 0.2;
  int workers = 1;
  PropagationConfig propagation;
  bool operator==(const CalibrationOptions&) const = default;
};

struct RestartRecord {
  std::vector<double> start;
  std::vector<double> best_x;
  double best_cost = 0.0;
  int evaluations = 0;
  std::vector<double> history;  // best cost seen, after setup and after each iteration
};

struct CalibrationReport {
  PulseParams best;
  double best_cost = 0.0;
  std::vector<double> cost_history;
  GateResult final;
  int restarts = 0;
  int evaluations = 0;
  std::uint64_t seed = 0;
  int best_restart = -1;
  bool success = false;
  std::vector<RestartRecord> runs;
};

// Free parameters (phi_amp, lambda_2 .. lambda_n); lambda_1 absorbs the odd-sum constraint.
std::vector<double> pulse_to_free(const PulseParams& p);
PulseParams free_to_pulse(const PulseParams& base, const std::vector<double>& x);

double gate_cost(const GateResult& g, const CalibrationOptions& opt);

CalibrationReport calibrate(const GateSimulator& sim, const PulseParams& initial,
                            const CalibrationOptions& opt);

}  // namespace dtc
