#include "dtc/run_config.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "dtc/report.hpp"

namespace dtc {

using nlohmann::json;

std::vector<double> GridSpec::values() const {
  if (!points.empty()) return points;
  std::vector<double> v;
  if (!(step > 0.0)) return v;
  for (long i = 0;; ++i) {
    double x = start + double(i) * step;
    if (x > stop + 1e-9 * step) break;
    v.push_back(x);
  }
  return v;
}

namespace {

json grid_to_json(const GridSpec& g) {
  if (!g.points.empty()) return {{"points", g.points}};
  return {{"start", g.start}, {"stop", g.stop}, {"step", g.step}};
}

GridSpec grid_from_json(const json& j, const GridSpec& fallback) {
  GridSpec g = fallback;
  if (j.contains("points")) {
    g.points = j["points"].get<std::vector<double>>();
    return g;
  }
  g.points.clear();
  g.start = j.value("start", g.start);
  g.stop = j.value("stop", g.stop);
  g.step = j.value("step", g.step);
  return g;
}

std::string method_name(Method m) { return m == Method::RK4 ? "rk4" : "midpoint"; }

Method method_from(const std::string& s) {
  if (s == "midpoint") return Method::Midpoint;
  if (s == "rk4") return Method::RK4;
  throw ConfigError("unknown propagation method '" + s + "' (midpoint, rk4)");
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Full:
      return "full";
    case Backend::Cells:
      return "cells";
    default:
      return "auto";
  }
}

Backend backend_from(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "full") return Backend::Full;
  if (s == "cells") return Backend::Cells;
  throw ConfigError("unknown backend '" + s + "' (auto, full, cells)");
}

}  // namespace

void RunConfig::validate() const {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (spectrum_k < 4) throw ConfigError("spectrum k must be >= 4");
  if (sweep_channel < 0 || sweep_channel > 2) throw ConfigError("sweep channel must be 0, 1 or 2");
  for (const auto* g : {&grid1, &grid2, &idle_grid, &work_grid})
    if (g->values().empty()) throw ConfigError("grid is empty");
  propagation.validate();
  pulse.validate();
  if (!std::filesystem::exists(resolve(device))) throw ConfigError("device file not found: " + resolve(device));
  if (!pulse_file.empty() && !std::filesystem::exists(resolve(pulse_file)))
    throw ConfigError("pulse file not found: " + resolve(pulse_file));
}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["schema"] = "dtc-run/1";
  j["device"] = c.device;
  j["subsystem"] = c.subsystem;
  j["truncation"] = c.truncation;
  j["spectrum"] = {{"k", c.spectrum_k}, {"overlap_floor", c.overlap_floor}, {"labels", c.labels}};
  j["sweep"] = {{"channel", c.sweep_channel},
                {"grid1", grid_to_json(c.grid1)},
                {"grid2", grid_to_json(c.grid2)},
                {"other_flux", c.other_flux}};
  j["idle"] = {{"phi_idle", c.phi_idle ? json(*c.phi_idle) : json("auto")},
               {"guess", c.idle_guess},
               {"subsystem", c.idle_subsystem},
               {"grid", grid_to_json(c.idle_grid)},
               {"work_grid", grid_to_json(c.work_grid)}};
  j["pulse"] = pulse_pair_to_json(c.pulse);
  j["pulse"]["file"] = c.pulse_file;
  const auto& p = c.propagation;
  j["propagation"] = {{"dt", p.dt},
                      {"stride", p.stride},
                      {"method", method_name(p.method)},
                      {"drift_tol", p.drift_tol},
                      {"rk4_phase", p.rk4_phase}};
  const auto& s = c.simulator;
  j["simulator"] = {{"backend", backend_name(s.backend)},
                    {"full_limit", s.full_limit},
                    {"idle_states", s.idle_states},
                    {"cell_spacing", s.cells.spacing},
                    {"cell_states", s.cells.states}};
  const auto& o = c.calibration;
  j["calibration"] = {{"restarts", o.restarts},     {"w_leak", o.w_leak},
                      {"w_phi", o.w_phi},           {"max_evals", o.max_evals},
                      {"simplex_tol", o.simplex_tol}, {"success_cost", o.success_cost},
                      {"step_amp", o.step_amp},     {"step_lambda", o.step_lambda}};
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

RunConfig run_config_from_json(const json& j, const std::string& origin) {
  RunConfig c = default_run_config();
  try {
    if (j.value("schema", std::string()) != "dtc-run/1")
      throw ConfigError("expected schema 'dtc-run/1'");
    c.device = j.value("device", c.device);
    c.subsystem = j.value("subsystem", c.subsystem);
    if (j.contains("truncation")) c.truncation = j["truncation"].get<std::map<std::string, int>>();
    if (j.contains("spectrum")) {
      const json& s = j["spectrum"];
      c.spectrum_k = s.value("k", c.spectrum_k);
      c.overlap_floor = s.value("overlap_floor", c.overlap_floor);
      if (s.contains("labels")) c.labels = s["labels"].get<std::vector<std::string>>();
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      c.sweep_channel = s.value("channel", c.sweep_channel);
      if (s.contains("grid1")) c.grid1 = grid_from_json(s["grid1"], c.grid1);
      if (s.contains("grid2")) c.grid2 = grid_from_json(s["grid2"], c.grid2);
      c.other_flux = s.value("other_flux", c.other_flux);
    }
    if (j.contains("idle")) {
      const json& s = j["idle"];
      if (s.contains("phi_idle")) {
        if (s["phi_idle"].is_number())
          c.phi_idle = s["phi_idle"].get<double>();
        else if (s["phi_idle"] != "auto")
          throw ConfigError("idle.phi_idle must be a number or \"auto\"");
      }
      c.idle_guess = s.value("guess", c.idle_guess);
      c.idle_subsystem = s.value("subsystem", c.idle_subsystem);
      if (s.contains("grid")) c.idle_grid = grid_from_json(s["grid"], c.idle_grid);
      if (s.contains("work_grid")) c.work_grid = grid_from_json(s["work_grid"], c.work_grid);
    }
    if (j.contains("pulse")) {
      const json& s = j["pulse"];
      if (s.contains("pulse")) c.pulse = pulse_pair_from_json(s);
      c.pulse_file = s.value("file", c.pulse_file);
    }
    if (j.contains("propagation")) {
      const json& s = j["propagation"];
      auto& p = c.propagation;
      p.dt = s.value("dt", p.dt);
      p.stride = s.value("stride", p.stride);
      p.method = method_from(s.value("method", method_name(p.method)));
      p.drift_tol = s.value("drift_tol", p.drift_tol);
      p.rk4_phase = s.value("rk4_phase", p.rk4_phase);
    }
    if (j.contains("simulator")) {
      const json& s = j["simulator"];
      auto& o = c.simulator;
      o.backend = backend_from(s.value("backend", backend_name(o.backend)));
      o.full_limit = s.value("full_limit", o.full_limit);
      o.idle_states = s.value("idle_states", o.idle_states);
      o.cells.spacing = s.value("cell_spacing", o.cells.spacing);
      o.cells.states = s.value("cell_states", o.cells.states);
    }
    if (j.contains("calibration")) {
      const json& s = j["calibration"];
      auto& o = c.calibration;
      o.restarts = s.value("restarts", o.restarts);
      o.w_leak = s.value("w_leak", o.w_leak);
      o.w_phi = s.value("w_phi", o.w_phi);
      o.max_evals = s.value("max_evals", o.max_evals);
      o.simplex_tol = s.value("simplex_tol", o.simplex_tol);
      o.success_cost = s.value("success_cost", o.success_cost);
      o.step_amp = s.value("step_amp", o.step_amp);
      o.step_lambda = s.value("step_lambda", o.step_lambda);
    }
    c.workers = j.value("workers", c.workers);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig c = run_config_from_json(parse_json_file(path), path);
  c.base_dir = std::filesystem::path(path).parent_path().string();
  if (c.base_dir.empty()) c.base_dir = ".";
  return c;
}

RunConfig default_run_config() {
  RunConfig c;
  c.device = default_device_path();
  return c;
}

std::string config_hash(const RunConfig& c) {
  // Worker count and output location do not change results.
  json j = run_config_to_json(c);
  j.erase("workers");
  j.erase("output_dir");
  std::uint64_t h = fnv1a(j.dump());
  std::string dev = c.resolve(c.device);
  if (std::filesystem::exists(dev)) h = fnv1a(read_text(dev), h);
  if (!c.pulse_file.empty() && std::filesystem::exists(c.resolve(c.pulse_file)))
    h = fnv1a(read_text(c.resolve(c.pulse_file)), h);
  return hex64(h);
}

Label parse_label(const std::string& text, const CircuitSpec& circuit,
                  const std::pair<std::string, std::string>& qubits) {
  const auto ids = circuit.ids();
  auto valid = [&] {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i)
      s += (i ? ", " : "") + ids[i] + "<" + std::to_string(circuit.modes[i].spec.dim);
    return s;
  };
  Label l(ids.size(), 0);
  auto set = [&](const std::string& id, int level) {
    int i = circuit.index_of(id);
    if (i < 0) throw ConfigError("label not found: unknown mode '" + id + "' in '" + text + "'; valid: " + valid());
    if (level < 0 || level >= circuit.modes[i].spec.dim)
      throw ConfigError("label not found: level " + std::to_string(level) + " of " + id + " is outside the truncation; valid: " + valid());
    l[i] = level;
  };
  if (text.empty() || text == "0") return l;
  if (text.size() == 2 && std::isdigit(static_cast<unsigned char>(text[0])) &&
      std::isdigit(static_cast<unsigned char>(text[1]))) {
    set(qubits.first, text[0] - '0');
    set(qubits.second, text[1] - '0');
    return l;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("label not found: malformed term '" + item + "'; use ID=level");
    int level = 0;
    try {
      level = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("label not found: malformed level in '" + item + "'");
    }
    set(item.substr(0, eq), level);
  }
  return l;
}

PreparedSystem prepare_system(const RunConfig& c, const std::string& subsystem) {
  PreparedSystem s;
  s.device = load_device(c.resolve(c.device));
  for (const auto& [id, d] : c.truncation) s.device.circuit = with_dims(s.device.circuit, {{id, d}});
  s.device.circuit.validate();
  if (!subsystem.empty()) s.device = s.device.restrict_to(subsystem);
  s.parts = assemble(s.device.circuit);
  s.q1 = s.device.circuit.index_of(s.device.qubits.first);
  s.q2 = s.device.circuit.index_of(s.device.qubits.second);
  s.comp = computational_labels(s.parts.dims, s.q1, s.q2);
  return s;
}

IdleInfo locate_idle(const RunConfig& c) {
  PreparedSystem sys = prepare_system(c, c.idle_subsystem);
  BareBasis bare = bare_basis(sys.parts);
  SpectrumOptions opt{c.spectrum_k, c.overlap_floor, kDenseLimit};
  std::vector<Label> wanted(sys.comp.begin(), sys.comp.end());
  auto zeta = [&](double f) { return zz_strength(solve_point(sys.parts, bare, f, f, wanted, opt), sys.comp).zeta; };

  IdleInfo info;
  info.zeros = find_zz_zeros(zeta, c.idle_grid.values(), 1e-7);
  if (info.zeros.empty()) throw NumericalError("no sign-changing ZZ zero found on the idle search grid");
  const ZeroCrossing* best = &info.zeros.front();
  for (const auto& z : info.zeros)
    if (std::abs(z.flux - c.idle_guess) < std::abs(best->flux - c.idle_guess)) best = &z;
  info.phi_idle = best->flux;
  info.zeta_idle = best->zeta;

  SweepRequest req{sys.comp, {}, opt, c.workers};
  auto pts = sweep_1d(sys.parts, 0, c.work_grid.values(), req);
  double best_abs = -1.0;
  for (const auto& p : pts)
    if (p.ok() && std::abs(p.zz->zeta) > best_abs) {
      best_abs = std::abs(p.zz->zeta);
      info.phi_work = p.flux1;
      info.zeta_work = p.zz->zeta;
    }
  if (best_abs < 0) throw NumericalError("work-point search failed at every grid point");
  return info;
}

}  // namespace dtc
