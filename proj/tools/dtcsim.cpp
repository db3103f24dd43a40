// dtcsim: command-line front end for spectra, ZZ maps and gate calibration.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dtc/device_io.hpp"
#include "dtc/gate.hpp"
#include "dtc/modal.hpp"
#include "dtc/report.hpp"
#include "dtc/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dtc;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  bool dry_run = false;
  std::function<void(RunConfig&)> tweak;  // command-specific overrides
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "Run configuration (JSON with comments)");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_flag("--svg", f.svg, "Also write SVG figures");
  sub->add_flag("--dry-run", f.dry_run, "Validate and print the plan without computing");
}

// start:stop:step or a comma-separated list.
GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  try {
    if (s.find(':') != std::string::npos) {
      std::stringstream ss(s);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c, ':');
      g.start = std::stod(a);
      g.stop = std::stod(b);
      g.step = c.empty() ? 0.01 : std::stod(c);
      return g;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) g.points.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw ConfigError("malformed grid '" + s + "'; use start:stop:step or a,b,c");
  }
  if (g.points.empty()) throw ConfigError("grid '" + s + "' is empty");
  return g;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string grid_summary(const std::vector<double>& g) {
  if (g.empty()) return "empty";
  return std::to_string(g.size()) + " points [" + fmt(g.front()) + ", " + fmt(g.back()) + "]";
}

class Run {
 public:
  Run(std::string command, const RunConfig& c)
      : command_(std::move(command)), hash_(config_hash(c)), seed_(c.seed), dir_(c.output_dir),
        start_(std::chrono::steady_clock::now()) {}

  const std::string& hash() const { return hash_; }
  std::string header(const std::vector<std::string>& extra = {}) const {
    std::vector<std::string> lines{"command=" + command_};
    lines.insert(lines.end(), extra.begin(), extra.end());
    return comment_header(hash_, lines);
  }
  std::string json_header() const {
    return "// dtcsim " + version() + " config_hash=" + hash_ + "\n// command=" + command_ + "\n";
  }

  std::string write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    std::string path = (fs::path(dir_) / name).string();
    write_text(path, content);
    outputs_.push_back(path);
    return path;
  }

  void finish() {
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m = make_manifest(command_, hash_, seed_, wall, outputs_);
    fs::create_directories(dir_);
    std::string path = (fs::path(dir_) / ("manifest_" + command_ + ".json")).string();
    write_text(path, json_header() + m.dump(2) + "\n");
    for (const auto& o : outputs_) std::cout << "wrote " << o << "\n";
    std::cout << "wrote " << path << "\n";
  }

 private:
  std::string command_, hash_;
  std::uint64_t seed_;
  std::string dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

RunConfig load_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? default_run_config() : load_run_config(f.config);
  if (f.config.empty()) c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (f.workers) c.workers = *f.workers;
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.tweak) f.tweak(c);
  return c;
}

std::string kind_name(ModeKind k) { return k == ModeKind::Transmon ? "transmon" : "harmonic"; }

// Pulses for evolve and fidelity-report: explicit file, then the config.
PulsePair load_pulses(const RunConfig& c, const std::string& flag_path) {
  std::string path = !flag_path.empty() ? flag_path : c.resolve(c.pulse_file);
  if (path.empty()) return c.pulse;
  json j = parse_json_file(path);
  try {
    PulsePair p = pulse_pair_from_json(j.contains("pulse_pair") ? j["pulse_pair"] : j);
    p.validate();
    return p;
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json gate_result_json(const GateResult& g) {
  auto mat = [](const CMat& U) {
    json rows = json::array();
    for (int i = 0; i < U.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < U.cols(); ++k) row.push_back({U(i, k).real(), U(i, k).imag()});
      rows.push_back(row);
    }
    return rows;
  };
  return {{"fidelity", g.fidelity},
          {"delta_phi", g.delta_phi},
          {"conditional_phase", g.conditional_phase},
          {"phases", g.phi},
          {"eps01", g.eps01},
          {"eps10", g.eps10},
          {"eps_leak", g.eps_leak},
          {"leakage", g.leakage},
          {"U_raw", mat(g.U_raw)},
          {"U_corrected", mat(g.U_corrected)}};
}

std::string gate_table(const GateResult& g) {
  std::ostringstream o;
  char buf[160];
  auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-22s %.12g\n", name, v);
    o << buf;
  };
  line("average_fidelity", g.fidelity);
  line("delta_phi_rad", g.delta_phi);
  line("conditional_phase_rad", g.conditional_phase);
  line("phi00_rad", g.phi[0]);
  line("phi01_rad", g.phi[1]);
  line("phi10_rad", g.phi[2]);
  line("phi11_rad", g.phi[3]);
  line("eps_swap_01", g.eps01);
  line("eps_swap_10", g.eps10);
  line("eps_leak", g.eps_leak);
  const char* names[4] = {"leakage_00", "leakage_01", "leakage_10", "leakage_11"};
  for (int k = 0; k < 4; ++k) line(names[k], g.leakage[k]);
  o << "|U_raw|\n";
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      std::snprintf(buf, sizeof buf, " %12.4e", std::abs(g.U_raw(i, k)));
      o << buf;
    }
    o << "\n";
  }
  return o.str();
}

std::vector<Label> spectrum_labels(const RunConfig& c, const PreparedSystem& s) {
  std::vector<std::string> text = c.labels;
  if (text.empty()) text = {"00", "01", "10", "11", "02", "20"};
  std::vector<Label> out;
  for (const auto& t : text) {
    Label l = parse_label(t, s.device.circuit, s.device.qubits);
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

std::string label_column(const Label& l, const PreparedSystem& s) {
  const auto& ids = s.device.circuit.ids();
  std::string name;
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] != 0) name += (name.empty() ? "" : ";") + ids[i] + "=" + std::to_string(l[i]);
  return "E_" + (name.empty() ? std::string("ground") : name);
}

// ---------------------------------------------------------------- commands

int cmd_validate(const CommonFlags& f) {
  RunConfig c = load_config(f);
  c.validate();
  Device d = load_device(c.resolve(c.device));
  std::cout << "device " << d.name << " (" << c.resolve(c.device) << ")\n";
  std::printf("%-6s %-9s %8s %9s %4s %12s %14s\n", "id", "kind", "Ec", "EJ/EL", "dim", "f01_GHz",
              "anharm_GHz");
  for (const auto& m : d.circuit.modes) {
    LocalMode lm = local_mode(m.spec);
    double f01 = lm.energies(1) - lm.energies(0);
    double anh = lm.energies.size() > 2 ? lm.energies(2) - 2 * lm.energies(1) + lm.energies(0) : 0.0;
    std::printf("%-6s %-9s %8.4f %9.4f %4d %12.6f %14.6f\n", m.id.c_str(), kind_name(m.spec.kind).c_str(),
                m.spec.ec, m.spec.ex(), m.spec.dim, f01, anh);
  }
  for (const auto& e : d.circuit.edges) std::cout << "edge " << e.a << "-" << e.b << " J=" << fmt(e.J) << "\n";
  for (const auto& l : d.circuit.loops)
    std::cout << "loop " << l.a << "-" << l.b << " ej=" << fmt(l.ej) << " channel=" << l.channel << "\n";
  std::cout << "qubits " << d.qubits.first << "," << d.qubits.second << "\n";
  for (const auto& [name, ids] : d.subsystems) {
    std::cout << "subsystem " << name << ":";
    for (const auto& id : ids) std::cout << " " << id;
    std::cout << "\n";
  }
  std::cout << "composite dimension " << d.circuit.dimension() << "\n";
  std::cout << "config_hash " << config_hash(c) << "\nok\n";
  return 0;
}

int cmd_spectrum(const CommonFlags& f, const std::string& subsystem) {
  RunConfig c = load_config(f);
  if (!subsystem.empty()) c.subsystem = subsystem == "full" ? "" : subsystem;
  c.validate();
  PreparedSystem s = prepare_system(c, c.subsystem);
  std::vector<Label> labels = spectrum_labels(c, s);
  std::vector<double> grid = c.grid1.values();
  if (f.dry_run) {
    std::cout << "plan: spectrum on " << (c.subsystem.empty() ? "full device" : c.subsystem) << " (dim "
              << s.parts.dim() << "), channel " << c.sweep_channel << ", grid " << grid_summary(grid) << ", "
              << labels.size() << " labels, k=" << c.spectrum_k << ", workers " << c.workers << "\n";
    return 0;
  }
  Run run("spectrum", c);
  SweepRequest req{s.comp, labels, {c.spectrum_k, c.overlap_floor, kDenseLimit}, c.workers};
  auto pts = sweep_1d(s.parts, c.sweep_channel, grid, req, c.other_flux);

  std::vector<std::string> cols{"flux1", "flux2"};
  for (const auto& l : labels) cols.push_back(label_column(l, s));
  cols.push_back("min_overlap");
  CsvTable t(cols);
  std::vector<Series> series(labels.size());
  std::vector<double> xs;
  int failed = 0;
  for (const auto& p : pts) {
    std::vector<double> row{p.flux1, p.flux2};
    double mo = 1.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const LabeledState* st = p.ok() ? p.spectrum.find(labels[k]) : nullptr;
      double e = st ? st->energy : std::nan("");
      if (st) mo = std::min(mo, st->overlap);
      row.push_back(e);
      series[k].y.push_back(e);
    }
    if (!p.ok()) {
      ++failed;
      mo = std::nan("");
      std::cerr << "warning: " << p.error << "\n";
    }
    row.push_back(mo);
    t.add_row(row);
    xs.push_back(c.sweep_channel == 2 ? p.flux2 : p.flux1);
  }
  std::string head = run.header({"subsystem=" + (c.subsystem.empty() ? std::string("full") : c.subsystem),
                                 "energies in GHz"});
  run.write("spectrum.csv", t.str(head));
  if (f.svg) {
    for (std::size_t k = 0; k < labels.size(); ++k) series[k].name = label_column(labels[k], s).substr(2);
    run.write("spectrum.svg", svg_lines(xs, series, "Labeled energies", "flux (Phi0)", "E (GHz)", false, head));
  }
  run.finish();
  if (failed == static_cast<int>(pts.size())) throw TrackingError("every sweep point failed");
  return 0;
}

std::vector<double> zz_row(const SweepPoint& p) {
  double nan = std::nan("");
  if (!p.ok() || !p.zz) return {p.flux1, p.flux2, nan, nan, nan, nan, nan, nan, nan};
  const ZZResult& z = *p.zz;
  return {z.flux1, z.flux2, z.zeta, std::log10(std::abs(z.zeta)), z.E00, z.E01, z.E10, z.E11, z.min_overlap};
}

const std::vector<std::string> kZZColumns{"flux1", "flux2", "zeta_GHz", "log10_abs_zeta", "E00",
                                          "E01",   "E10",   "E11",      "min_overlap"};

int cmd_zz(const CommonFlags& f, const std::string& mode, const std::string& subsystem) {
  RunConfig c = load_config(f);
  if (!subsystem.empty()) c.subsystem = subsystem == "full" ? "" : subsystem;
  if (mode != "1d" && mode != "2d") throw ConfigError("--mode must be 1d or 2d");
  c.validate();
  PreparedSystem s = prepare_system(c, c.subsystem);
  std::vector<double> g1 = c.grid1.values(), g2 = c.grid2.values();
  std::string where = c.subsystem.empty() ? "full device" : c.subsystem;
  if (f.dry_run) {
    std::cout << "plan: zz " << mode << " on " << where << " (dim " << s.parts.dim() << "), grid1 "
              << grid_summary(g1);
    if (mode == "2d") std::cout << " x grid2 " << grid_summary(g2);
    else std::cout << ", channel " << c.sweep_channel << ", other flux " << fmt(c.other_flux);
    std::cout << ", k=" << c.spectrum_k << ", workers " << c.workers << "\n";
    return 0;
  }
  Run run("zz", c);
  SweepRequest req{s.comp, {}, {c.spectrum_k, c.overlap_floor, kDenseLimit}, c.workers};
  std::string head = run.header({"mode=" + mode, "subsystem=" + (c.subsystem.empty() ? std::string("full") : c.subsystem),
                                 "zeta = E11 - E01 - E10 + E00 in GHz"});
  CsvTable t(kZZColumns);
  std::size_t failed = 0, total = 0;
  if (mode == "1d") {
    auto pts = sweep_1d(s.parts, c.sweep_channel, g1, req, c.other_flux);
    Series z{"log10|zeta/GHz|", {}};
    std::vector<double> xs;
    for (const auto& p : pts) {
      if (!p.ok()) {
        ++failed;
        std::cerr << "warning: " << p.error << "\n";
      }
      auto row = zz_row(p);
      t.add_row(row);
      xs.push_back(c.sweep_channel == 2 ? p.flux2 : p.flux1);
      z.y.push_back(std::abs(row[2]));
    }
    total = pts.size();
    run.write("zz_1d.csv", t.str(head));
    if (f.svg) run.write("zz_1d.svg", svg_lines(xs, {z}, "ZZ strength", "flux (Phi0)", "|zeta| (GHz)", true, head));
  } else {
    SweepMap m = sweep_2d(s.parts, g1, g2, req);
    std::vector<std::vector<double>> logz(g1.size(), std::vector<double>(g2.size()));
    std::vector<std::string> gcols{"flux1\\flux2"};
    for (double v : g2) gcols.push_back(fmt(v));
    CsvTable grid(gcols);
    for (std::size_t i = 0; i < g1.size(); ++i) {
      std::vector<double> grow{g1[i]};
      for (std::size_t k = 0; k < g2.size(); ++k) {
        const SweepPoint& p = m.at(i, k);
        if (!p.ok()) {
          ++failed;
          std::cerr << "warning: " << p.error << "\n";
        }
        auto row = zz_row(p);
        t.add_row(row);
        logz[i][k] = row[3];
        grow.push_back(row[3]);
      }
      grid.add_row(grow);
    }
    total = m.points.size();
    run.write("zz_2d.csv", t.str(head));
    run.write("zz_2d_grid.csv", grid.str(head + "# log10|zeta/GHz|, rows flux1, columns flux2\n"));
    if (f.svg)
      run.write("zz_2d.svg", svg_heatmap(g1, g2, logz, "log10 |zeta / GHz|", "flux1 (Phi0)", "flux2 (Phi0)", head));
  }
  run.finish();
  if (failed == total) throw TrackingError("every sweep point failed");
  return 0;
}

int cmd_pulse_preview(const CommonFlags& f, const std::string& pulse_path, double dt) {
  RunConfig c = load_config(f);
  c.validate();
  if (!(dt > 0)) throw ConfigError("--dt must be positive");
  PulsePair p = load_pulses(c, pulse_path);
  p.validate();
  const double T = p.duration();
  std::size_t n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  if (f.dry_run) {
    std::cout << "plan: pulse-preview T=" << fmt(T) << " ns, " << (n + 1) << " samples, order "
              << p.first.order() << "\n";
    return 0;
  }
  Run run("pulse-preview", c);
  CsvTable t({"t_ns", "flux1", "flux2"});
  std::vector<double> ts;
  Series a{"flux1", {}}, b{"flux2", {}};
  for (std::size_t i = 0; i <= n; ++i) {
    double tt = std::min(T, double(i) * dt);
    double f1 = waveform(p.channel(1), tt), f2 = waveform(p.channel(2), tt);
    t.add_row(std::vector<double>{tt, f1, f2});
    ts.push_back(tt);
    a.y.push_back(f1);
    b.y.push_back(f2);
  }
  std::string head = run.header({"flux in units of Phi0"});
  run.write("pulse.csv", t.str(head));
  if (f.svg) run.write("pulse.svg", svg_lines(ts, {a, b}, "Coupler flux pulse", "t (ns)", "flux (Phi0)", false, head));
  run.finish();
  return 0;
}

std::string describe_backend(const RunConfig& c, std::size_t dim) {
  Backend b = c.simulator.backend;
  if (b == Backend::Auto) b = dim <= c.simulator.full_limit ? Backend::Full : Backend::Cells;
  return b == Backend::Full ? "full-space" : "adiabatic cells";
}

int cmd_evolve(const CommonFlags& f, const std::string& pulse_path, const std::string& init) {
  RunConfig c = load_config(f);
  c.validate();
  PulsePair pulses = load_pulses(c, pulse_path);
  PreparedSystem s = prepare_system(c, c.subsystem);
  int column = -1;
  {
    Label l = parse_label(init, s.device.circuit, s.device.qubits);
    for (int k = 0; k < 4; ++k)
      if (s.comp[k] == l) column = k;
    if (column < 0) throw ConfigError("--init must be a computational state (00, 01, 10, 11)");
  }
  if (f.dry_run) {
    std::cout << "plan: evolve |" << init << "> on " << (c.subsystem.empty() ? "full device" : c.subsystem)
              << " (dim " << s.parts.dim() << ", " << describe_backend(c, s.parts.dim()) << "), T="
              << fmt(pulses.duration()) << " ns, dt=" << fmt(c.propagation.dt) << "\n";
    return 0;
  }
  Run run("evolve", c);
  GateSimulator sim(s.parts, s.q1, s.q2, pulses.first.phi_idle, c.simulator);
  GateResult g = sim.run(pulses, c.propagation);
  std::map<std::string, int> probes;
  for (const auto& [name, idx] : g.probe_index)
    if (name != "00") probes[name] = idx;
  auto traces = population_traces(g.trajectory, column, probes);

  std::vector<std::string> cols{"t_ns"};
  for (const auto& [name, _] : traces) cols.push_back("P" + name);
  cols.push_back("norm");
  CsvTable t(cols);
  std::vector<Series> series;
  for (const auto& [name, y] : traces) series.push_back({"P" + name, y});
  for (std::size_t r = 0; r < g.trajectory.times.size(); ++r) {
    std::vector<double> row{g.trajectory.times[r]};
    for (const auto& [_, y] : traces) row.push_back(y[r]);
    row.push_back(g.trajectory.norms[r](column));
    t.add_row(row);
  }
  std::string head = run.header({"initial state |" + init + ">", "populations of idle dressed states"});
  run.write("evolve.csv", t.str(head));
  if (f.svg)
    run.write("evolve.svg",
              svg_lines(g.trajectory.times, series, "Populations from |" + init + ">", "t (ns)", "P", true, head));
  std::cout << gate_table(g);
  run.finish();
  return 0;
}

struct CalibrateFlags {
  std::optional<double> duration;
  std::optional<int> order;
  std::optional<int> restarts;
  std::optional<double> w_leak, w_phi;
  std::optional<int> max_evals;
};

int cmd_calibrate(const CommonFlags& f, const CalibrateFlags& cf) {
  RunConfig c = load_config(f);
  if (cf.duration) c.pulse.first.duration = c.pulse.second.duration = *cf.duration;
  if (cf.restarts) c.calibration.restarts = *cf.restarts;
  if (cf.w_leak) c.calibration.w_leak = *cf.w_leak;
  if (cf.w_phi) c.calibration.w_phi = *cf.w_phi;
  if (cf.max_evals) c.calibration.max_evals = *cf.max_evals;
  if (cf.order) {
    if (*cf.order < 1) throw ConfigError("--order must be >= 1");
    if (c.pulse.first.order() != *cf.order) {
      std::vector<double> lam(*cf.order, 0.0);
      lam[0] = 1.0;
      c.pulse.first.lambdas = c.pulse.second.lambdas = lam;
    }
  }
  c.validate();
  if (c.calibration.restarts < 1) throw ConfigError("restarts must be >= 1");
  PreparedSystem s = prepare_system(c, c.subsystem);
  std::string where = c.subsystem.empty() ? "full device" : c.subsystem;
  if (f.dry_run) {
    std::cout << "plan: ";
    if (c.phi_idle) std::cout << "idle flux " << fmt(*c.phi_idle) << " from config";
    else std::cout << "locate idle zero on " << (c.idle_subsystem.empty() ? "full device" : c.idle_subsystem)
                   << " over " << grid_summary(c.idle_grid.values());
    std::cout << "; calibrate on " << where << " (dim " << s.parts.dim() << ", " << describe_backend(c, s.parts.dim())
              << "), T=" << fmt(c.pulse.first.duration) << " ns, order " << c.pulse.first.order() << ", "
              << c.calibration.restarts << " restarts x " << c.calibration.max_evals << " evaluations, seed "
              << c.seed << ", workers " << c.workers << "\n";
    return 0;
  }
  Run run("calibrate", c);
  PulseParams initial = c.pulse.first;
  json idle_json;
  if (c.phi_idle) {
    initial.phi_idle = *c.phi_idle;
    idle_json = {{"phi_idle", *c.phi_idle}, {"source", "config"}};
  } else {
    IdleInfo info = locate_idle(c);
    initial.phi_idle = info.phi_idle;
    initial.phi_amp = info.phi_work - info.phi_idle;
    std::fill(initial.lambdas.begin(), initial.lambdas.end(), 0.0);
    initial.lambdas[0] = 1.0;
    idle_json = {{"phi_idle", info.phi_idle}, {"zeta_idle_GHz", info.zeta_idle}, {"phi_work", info.phi_work},
                 {"zeta_work_GHz", info.zeta_work}, {"source", "zz-zero search on " + c.idle_subsystem}};
    std::cout << "idle flux " << fmt(info.phi_idle) << " (zeta " << fmt(info.zeta_idle) << " GHz), work flux "
              << fmt(info.phi_work) << " (zeta " << fmt(info.zeta_work) << " GHz)\n";
  }
  CalibrationOptions opt = c.calibration;
  opt.seed = c.seed;
  opt.workers = c.workers;
  opt.propagation = c.propagation;
  GateSimulator sim(s.parts, s.q1, s.q2, initial.phi_idle, c.simulator);
  CalibrationReport rep = calibrate(sim, initial, opt);

  json runs = json::array();
  for (const auto& r : rep.runs)
    runs.push_back({{"start", r.start}, {"best_x", r.best_x}, {"best_cost", r.best_cost}, {"evaluations", r.evaluations}});
  PulsePair best = PulsePair::same(rep.best);
  json pj = pulse_pair_to_json(best);
  pj["schema"] = "dtc-pulse/1";
  json report{{"schema", "dtc-calibration/1"},
              {"success", rep.success},
              {"best_cost", rep.best_cost},
              {"best_restart", rep.best_restart},
              {"restarts", rep.restarts},
              {"evaluations", rep.evaluations},
              {"seed", rep.seed},
              {"idle", idle_json},
              {"weights", {{"w_leak", opt.w_leak}, {"w_phi", opt.w_phi}}},
              {"pulse_pair", pj},
              {"final", gate_result_json(rep.final)},
              {"runs", runs}};
  run.write("calibration.json", run.json_header() + report.dump(2) + "\n");
  run.write("pulse.json", run.json_header() + pj.dump(2) + "\n");
  CsvTable hist({"iteration", "best_cost"});
  for (std::size_t i = 0; i < rep.cost_history.size(); ++i)
    hist.add_row(std::vector<double>{double(i), rep.cost_history[i]});
  run.write("cost_history.csv", hist.str(run.header({"best restart " + std::to_string(rep.best_restart)})));
  std::cout << gate_table(rep.final);
  std::cout << "best cost " << fmt(rep.best_cost) << (rep.success ? " (success)" : " (calibration failed)") << "\n";
  run.finish();
  return rep.success ? 0 : 4;
}

int cmd_fidelity_report(const CommonFlags& f, std::string pulse_path) {
  RunConfig c = load_config(f);
  c.validate();
  if (pulse_path.empty() && c.pulse_file.empty()) pulse_path = default_pulse_path();
  PulsePair pulses = load_pulses(c, pulse_path);
  PreparedSystem s = prepare_system(c, c.subsystem);
  if (f.dry_run) {
    std::cout << "plan: fidelity-report on " << (c.subsystem.empty() ? "full device" : c.subsystem) << " (dim "
              << s.parts.dim() << ", " << describe_backend(c, s.parts.dim()) << "), pulse T="
              << fmt(pulses.duration()) << " ns, idle " << fmt(pulses.first.phi_idle) << "\n";
    return 0;
  }
  Run run("fidelity-report", c);
  GateSimulator sim(s.parts, s.q1, s.q2, pulses.first.phi_idle, c.simulator);
  GateResult g = sim.run(pulses, c.propagation);
  std::string table = gate_table(g);
  std::cout << table;
  run.write("fidelity_report.txt", run.header() + table);
  json j = gate_result_json(g);
  j["pulse_pair"] = pulse_pair_to_json(pulses);
  run.write("fidelity_report.json", run.json_header() + j.dump(2) + "\n");
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtcsim: spectra, ZZ maps and CZ gate calibration for coupler circuits"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  CommonFlags f;
  std::string subsystem, mode = "2d", pulse_path, init = "11";
  double dt = 0.5;
  CalibrateFlags cf;

  auto* v = app.add_subcommand("validate", "Check a configuration and print derived mode parameters");
  add_common(v, f);
  auto* sp = app.add_subcommand("spectrum", "Labeled energies along a flux sweep");
  add_common(sp, f);
  sp->add_option("--subsystem", subsystem, "Subsystem name, or 'full'");
  auto* zz = app.add_subcommand("zz", "ZZ strength along a line or over a flux map");
  add_common(zz, f);
  zz->add_option("--mode", mode, "1d or 2d")->check(CLI::IsMember({"1d", "2d"}));
  zz->add_option("--subsystem", subsystem, "Subsystem name, or 'full'");
  auto* pp = app.add_subcommand("pulse-preview", "Sample a flux pulse");
  add_common(pp, f);
  pp->add_option("--pulse", pulse_path, "Pulse or calibration file");
  pp->add_option("--dt", dt, "Sample spacing in ns");
  auto* ev = app.add_subcommand("evolve", "Population dynamics under a pulse");
  add_common(ev, f);
  ev->add_option("--pulse", pulse_path, "Pulse or calibration file");
  ev->add_option("--init", init, "Initial computational state");
  auto* cal = app.add_subcommand("calibrate", "Optimize the pulse for a CZ gate");
  add_common(cal, f);
  cal->add_option("--duration", cf.duration, "Gate duration in ns");
  cal->add_option("--order", cf.order, "Number of Fourier coefficients");
  cal->add_option("--restarts", cf.restarts, "Simplex restarts");
  cal->add_option("--w-leak", cf.w_leak, "Weight of swap and leakage errors");
  cal->add_option("--w-phi", cf.w_phi, "Weight of the squared phase error");
  cal->add_option("--max-evals", cf.max_evals, "Cost evaluations per restart");
  auto* fr = app.add_subcommand("fidelity-report", "Evaluate a stored pulse");
  add_common(fr, f);
  fr->add_option("--pulse", pulse_path, "Pulse or calibration file (default: shipped calibrated pulse)");

  std::vector<std::string> grid1, grid2;
  std::optional<int> channel;
  std::optional<double> other;
  for (auto* s : {sp, zz}) {
    s->add_option("--grid", grid1, "Flux grid: start:stop:step or a,b,c")->expected(1);
    s->add_option("--channel", channel, "0: both fluxes, 1 or 2: one flux")->check(CLI::Range(0, 2));
    s->add_option("--other", other, "Flux of the channel that is held");
  }
  zz->add_option("--grid2", grid2, "Second flux grid for 2d maps")->expected(1);
  std::string labels;
  sp->add_option("--labels", labels, "Labels separated by ';' (\"11\" or \"Q1=1,Cb10=1\")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    f.tweak = [&](RunConfig& c) {
      if (!grid1.empty()) c.grid1 = parse_grid(grid1.front());
      if (!grid2.empty()) c.grid2 = parse_grid(grid2.front());
      if (channel) c.sweep_channel = *channel;
      if (other) c.other_flux = *other;
      if (!labels.empty()) c.labels = split(labels, ';');
    };
    if (*v) return cmd_validate(f);
    if (*sp) return cmd_spectrum(f, subsystem);
    if (*zz) return cmd_zz(f, mode, subsystem);
    if (*pp) return cmd_pulse_preview(f, pulse_path, dt);
    if (*ev) return cmd_evolve(f, pulse_path, init);
    if (*cal) return cmd_calibrate(f, cf);
    if (*fr) return cmd_fidelity_report(f, pulse_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
