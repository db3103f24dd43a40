#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dtc/device_io.hpp"
#include "dtc/dynamics.hpp"
#include "dtc/gate.hpp"
#include "dtc/pulse.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

struct GridSpec {
  double start = 0.2;
  double stop = 0.6;
  double step = 0.01;
  std::vector<double> points;  // explicit points override start/stop/step

  std::vector<double> values() const;
  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  std::string device;     // path, relative paths resolve against base_dir
  std::string subsystem;  // empty: full device
  std::map<std::string, int> truncation;

  int spectrum_k = 40;
  double overlap_floor = kOverlapFloor;
  std::vector<std::string> labels;  // spectrum command

  int sweep_channel = 0;  // 0: both fluxes together
  GridSpec grid1;
  GridSpec grid2;
  double other_flux = 0.3;

  std::optional<double> phi_idle;  // nullopt: locate the ZZ zero
  double idle_guess = 0.3;
  std::string idle_subsystem = "L";
  GridSpec idle_grid{0.2, 0.45, 0.01, {}};
  GridSpec work_grid{0.3, 0.7, 0.01, {}};

  PulsePair pulse = PulsePair::same(PulseParams{});
  std::string pulse_file;  // evolve / fidelity-report
  PropagationConfig propagation;
  SimulatorOptions simulator;
  CalibrationOptions calibration;

  int workers = 1;
  std::string output_dir = "out";
  std::uint64_t seed = 20240611;

  std::string base_dir = ".";  // not serialized

  void validate() const;
  std::string resolve(const std::string& path) const;
};

nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& origin = "<memory>");
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();
std::string config_hash(const RunConfig& c);

// Label syntax: "ab" for the qubit pair, or "ID=level,ID=level"; "" or "0" is the ground state.
Label parse_label(const std::string& text, const CircuitSpec& circuit,
                  const std::pair<std::string, std::string>& qubits);

struct PreparedSystem {
  Device device;
  FluxSeparableHamiltonian parts;
  int q1 = 0, q2 = 1;
  std::array<Label, 4> comp;
};

PreparedSystem prepare_system(const RunConfig& c, const std::string& subsystem);

struct IdleInfo {
  double phi_idle = 0.3;
  double zeta_idle = 0.0;
  std::vector<ZeroCrossing> zeros;
  double phi_work = 0.5;
  double zeta_work = 0.0;
};

// ZZ zero closest to the guess, and |zeta| maximum, from 1D sweeps of the subsystem.
IdleInfo locate_idle(const RunConfig& c);

}  // namespace dtc
