#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dtc/circuit.hpp"

namespace dtc {

struct Device {
  std::string name;
  CircuitSpec circuit;
  std::pair<std::string, std::string> qubits{"Q1", "Q2"};
  std::map<std::string, std::vector<std::string>> subsystems;

  // Sub-circuit keeping qubit ids that survive the cut.
  Device restrict_to(const std::string& subsystem_name) const;
};

nlohmann::json parse_json_file(const std::string& path);
Device parse_device(const nlohmann::json& j, const std::string& origin = "<memory>");
Device load_device(const std::string& path);
nlohmann::json device_to_json(const Device& d);

std::string default_device_path();
std::string default_pulse_path();
std::string data_path(const std::string& file);

}  // namespace dtc
