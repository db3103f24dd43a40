#include "dtc/gate.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace dtc {

CMat extract_unitary(const std::array<CVec, 4>& final_states, const std::array<CVec, 4>& dressed) {
  CMat U(4, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) U(k, l) = dressed[k].dot(final_states[l]);  // conjugates dressed[k]
  return U;
}

PhaseCorrection remove_single_qubit_phases(const CMat& U_raw) {
  if (U_raw.rows() != 4 || U_raw.cols() != 4) throw ConfigError("gate matrix must be 4x4");
  PhaseCorrection out;
  for (int k = 0; k < 4; ++k) {
    if (std::abs(U_raw(k, k)) < 0.5) {
      std::ostringstream msg;
      msg << "diagonal entry " << k << " has magnitude " << std::abs(U_raw(k, k))
          << " < 0.5; gate is not phase-correctable";
      throw GateStructureError(msg.str());
    }
    out.phi[k] = std::arg(U_raw(k, k));
  }
  const auto& p = out.phi;
  CVec d(4);
  d << std::polar(1.0, -p[0]), std::polar(1.0, -p[1]), std::polar(1.0, -p[2]),
      std::polar(1.0, p[0] - p[1] - p[2]);
  out.U = d.asDiagonal() * U_raw;
  return out;
}

double wrap_phase(double x) {
  double y = std::fmod(x + kPi, 2.0 * kPi);
  if (y <= 0.0) y += 2.0 * kPi;
  return y - kPi;
}

double conditional_phase_error(const std::array<double, 4>& phi) {
  return wrap_phase(phi[3] - phi[1] - phi[2] + phi[0] - kPi);
}

double average_fidelity(const CMat& U) {
  if (U.rows() != 4 || U.cols() != 4) throw ConfigError("average_fidelity expects a 4x4 matrix");
  CVec id(4);
  id << 1.0, 1.0, 1.0, -1.0;
  cplx tr = (id.asDiagonal() * U).trace();  // U_id is real diagonal
  double tuu = (U.adjoint() * U).trace().real();
  return (std::norm(tr) + tuu) / 20.0;
}

namespace {

std::string qubit_pair_name(int a, int b) { return std::to_string(a) + std::to_string(b); }

}  // namespace

GateSimulator::GateSimulator(const FluxSeparableHamiltonian& parts, int first_qubit, int second_qubit,
                             double phi_idle, const SimulatorOptions& opt)
    : parts_(parts), phi_idle_(phi_idle), opt_(opt) {
  comp_ = computational_labels(parts.dims, first_qubit, second_qubit);
  backend_ = opt.backend;
  if (backend_ == Backend::Auto) backend_ = parts.dim() <= opt.full_limit ? Backend::Full : Backend::Cells;

  if (backend_ == Backend::Full) {
    int k = static_cast<int>(std::min<std::size_t>(opt.idle_states, parts.dim()));
    idle_ = lowest_eigenpairs(evaluate(parts, phi_idle, phi_idle), k, static_cast<Eigen::Index>(opt.full_limit));
  } else {
    cells_ = std::make_unique<AdiabaticCells>(parts, phi_idle, std::array<bool, 2>{true, true}, phi_idle,
                                              opt.cells);
    idle_ = cells_->idle();
  }

  std::vector<Label> wanted(comp_.begin(), comp_.end());
  const int traced[6][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 2}, {2, 0}};
  for (const auto& [a, b] : traced) {
    if (a >= parts.dims[first_qubit] || b >= parts.dims[second_qubit]) continue;
    Label l(parts.dims.size(), 0);
    l[first_qubit] = a;
    l[second_qubit] = b;
    traced_.push_back({qubit_pair_name(a, b), l});
    if (std::find(wanted.begin(), wanted.end(), l) == wanted.end()) wanted.push_back(l);
  }
  std::ostringstream ctx;
  ctx << "idle flux " << phi_idle;
  idle_labeled_ = label_states(idle_, bare_basis(parts), wanted, kOverlapFloor, ctx.str());
}

void GateSimulator::prepare(const PulseParams& p) const {
  if (backend_ != Backend::Cells) return;
  std::unique_lock lock(cells_mutex_);
  cells_->ensure_pulse(p);
}

GateResult GateSimulator::run(const PulsePair& pulses, const PropagationConfig& cfg) const {
  pulses.validate();
  if (pulses.channel(1).phi_idle != phi_idle_ || pulses.channel(2).phi_idle != phi_idle_)
    throw ConfigError("pulse idle flux differs from the simulator idle bias");

  GateResult r;
  std::array<int, 4> idx{};
  for (int k = 0; k < 4; ++k) idx[k] = idle_labeled_.at(comp_[k]).eig_index;
  for (const auto& [name, l] : traced_) r.probe_index[name] = idle_labeled_.at(l).eig_index;

  if (backend_ == Backend::Full) {
    CMat psi0(idle_.vectors.rows(), 4);
    for (int k = 0; k < 4; ++k) psi0.col(k) = idle_.vectors.col(idx[k]).cast<cplx>();
    r.trajectory = propagate(parts_, pulses, psi0, idle_.vectors, cfg);
  } else {
    bool both = parts_.channel_used[0] && parts_.channel_used[1];
    if (both && !pulses.synchronous && !(pulses.first == pulses.second))
      throw ConfigError("cell propagation needs synchronous pulses; use the full-space backend");
    const PulseParams& p = pulses.channel(1);
    prepare(p);
    CMat c0 = CMat::Zero(idle_.vectors.cols(), 4);
    for (int k = 0; k < 4; ++k) c0(idx[k], k) = 1.0;
    std::shared_lock lock(cells_mutex_);
    r.trajectory = cells_->propagate(p, c0, cfg);
  }

  const CMat& fa = r.trajectory.final_amplitudes;
  r.U_raw.resize(4, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) r.U_raw(k, l) = fa(idx[k], l);
  for (int l = 0; l < 4; ++l) r.leakage[l] = leakage_from_amplitudes(r.U_raw.col(l));
  r.eps01 = 1.0 - std::norm(r.U_raw(1, 1));
  r.eps10 = 1.0 - std::norm(r.U_raw(2, 2));
  r.eps_leak = 1.0 - std::norm(r.U_raw(3, 3));

  PhaseCorrection pc = remove_single_qubit_phases(r.U_raw);
  r.U_corrected = pc.U;
  r.phi = pc.phi;
  r.conditional_phase = wrap_phase(pc.phi[3] - pc.phi[1] - pc.phi[2] + pc.phi[0]);
  r.delta_phi = conditional_phase_error(pc.phi);
  r.fidelity = average_fidelity(pc.U);
  return r;
}

GateResult evaluate_gate(const GateSimulator& sim, const PulsePair& pulses, const PropagationConfig& cfg) {
  return sim.run(pulses, cfg);
}

}  // namespace dtc
