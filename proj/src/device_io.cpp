#include "dtc/device_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dtc {

using nlohmann::json;

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j[key].get<double>();
}

std::string text(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + ": missing string '" + key + "'");
  return j[key].get<std::string>();
}

int integer(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ConfigError(where + ": missing integer '" + key + "'");
  return j[key].get<int>();
}

}  // namespace

Device parse_device(const json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError(origin + ": device must be an object");
  if (j.value("schema", std::string()) != "dtc-device/1")
    throw ConfigError(origin + ": expected schema 'dtc-device/1'");
  Device d;
  d.name = j.value("name", std::string("device"));
  if (!j.contains("modes") || !j["modes"].is_array())
    throw ConfigError(origin + ": missing array 'modes'");
  for (std::size_t i = 0; i < j["modes"].size(); ++i) {
    const json& m = j["modes"][i];
    std::string where = origin + ": /modes/" + std::to_string(i);
    Mode mode;
    mode.id = text(m, "id", where);
    std::string kind = text(m, "kind", where);
    if (kind == "transmon") {
      mode.spec.kind = ModeKind::Transmon;
      mode.spec.ej = number(m, "E_J", where);
      if (m.contains("E_L")) throw ConfigError(where + ": transmon mode must not set E_L");
    } else if (kind == "harmonic") {
      mode.spec.kind = ModeKind::Harmonic;
      mode.spec.el = number(m, "E_L", where);
      if (m.contains("E_J")) throw ConfigError(where + ": harmonic mode must not set E_J");
    } else {
      throw ConfigError(where + ": unknown kind '" + kind + "'");
    }
    mode.spec.ec = number(m, "E_C", where);
    mode.spec.dim = integer(m, "dim", where);
    mode.spec.basis_dim = m.contains("basis_dim") ? integer(m, "basis_dim", where) : 0;
    d.circuit.modes.push_back(mode);
  }
  if (j.contains("edges")) {
    for (std::size_t i = 0; i < j["edges"].size(); ++i) {
      const json& e = j["edges"][i];
      std::string where = origin + ": /edges/" + std::to_string(i);
      d.circuit.edges.push_back({text(e, "a", where), text(e, "b", where), number(e, "J", where)});
    }
  }
  if (j.contains("loops")) {
    for (std::size_t i = 0; i < j["loops"].size(); ++i) {
      const json& l = j["loops"][i];
      std::string where = origin + ": /loops/" + std::to_string(i);
      d.circuit.loops.push_back({text(l, "a", where), text(l, "b", where), number(l, "E_J", where),
                                 integer(l, "channel", where)});
    }
  }
  if (j.contains("truncation")) {
    for (auto it = j["truncation"].begin(); it != j["truncation"].end(); ++it) {
      if (!it->is_number_integer())
        throw ConfigError(origin + ": /truncation/" + it.key() + " must be an integer");
      d.circuit = with_dims(d.circuit, {{it.key(), it->get<int>()}});
    }
  }
  if (j.contains("qubits")) {
    const json& q = j["qubits"];
    if (!q.is_array() || q.size() != 2) throw ConfigError(origin + ": 'qubits' must list two modes");
    d.qubits = {q[0].get<std::string>(), q[1].get<std::string>()};
  }
  if (j.contains("subsystems"))
    for (auto it = j["subsystems"].begin(); it != j["subsystems"].end(); ++it)
      d.subsystems[it.key()] = it->get<std::vector<std::string>>();

  try {
    d.circuit.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  for (const auto& q : {d.qubits.first, d.qubits.second})
    if (d.circuit.index_of(q) < 0) throw ConfigError(origin + ": unknown qubit mode '" + q + "'");
  for (const auto& [name, ids] : d.subsystems)
    for (const auto& id : ids)
      if (d.circuit.index_of(id) < 0)
        throw ConfigError(origin + ": subsystem '" + name + "' names unknown mode '" + id + "'");
  return d;
}

Device load_device(const std::string& path) { return parse_device(parse_json_file(path), path); }

json device_to_json(const Device& d) {
  json j;
  j["schema"] = "dtc-device/1";
  j["name"] = d.name;
  j["modes"] = json::array();
  for (const auto& m : d.circuit.modes) {
    json e{{"id", m.id}, {"E_C", m.spec.ec}, {"dim", m.spec.dim}};
    if (m.spec.kind == ModeKind::Transmon) {
      e["kind"] = "transmon";
      e["E_J"] = m.spec.ej;
    } else {
      e["kind"] = "harmonic";
      e["E_L"] = m.spec.el;
    }
    if (m.spec.basis_dim) e["basis_dim"] = m.spec.basis_dim;
    j["modes"].push_back(e);
  }
  j["edges"] = json::array();
  for (const auto& e : d.circuit.edges) j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"J", e.J}});
  j["loops"] = json::array();
  for (const auto& l : d.circuit.loops)
    j["loops"].push_back({{"a", l.a}, {"b", l.b}, {"E_J", l.ej}, {"channel", l.channel}});
  j["qubits"] = {d.qubits.first, d.qubits.second};
  j["subsystems"] = json::object();
  for (const auto& [k, v] : d.subsystems) j["subsystems"][k] = v;
  return j;
}

Device Device::restrict_to(const std::string& subsystem_name) const {
  auto it = subsystems.find(subsystem_name);
  if (it == subsystems.end()) throw ConfigError("unknown subsystem '" + subsystem_name + "'");
  Device out;
  out.name = name + "/" + subsystem_name;
  out.circuit = subsystem(circuit, it->second);
  std::vector<std::string> q;
  for (const auto& id : {qubits.first, qubits.second})
    if (out.circuit.index_of(id) >= 0) q.push_back(id);
  // A one-qubit cut measures ZZ between that qubit and the first cable mode.
  for (const auto& m : out.circuit.modes)
    if (q.size() < 2 && m.spec.kind == ModeKind::Harmonic) q.push_back(m.id);
  if (q.size() < 2) throw ConfigError("subsystem '" + subsystem_name + "' has no qubit pair");
  out.qubits = {q[0], q[1]};
  return out;
}

std::string data_path(const std::string& file) {
  if (const char* env = std::getenv("DTC_DATA_DIR")) return std::string(env) + "/" + file;
  return std::string(DTC_DATA_DIR) + "/" + file;
}

std::string default_device_path() { return data_path("default_device.json"); }
std::string default_pulse_path() { return data_path("calibrated_pulse.json"); }

}  // namespace dtc
