#include "dtc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dtc {

void PropagationConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("propagation dt must be positive");
  if (stride < 1) throw ConfigError("recording stride must be >= 1");
  if (!(rk4_phase > 0.0)) throw ConfigError("rk4_phase must be positive");
}

namespace {

void record(Trajectory& tr, double t, const CMat& amps, const CMat& psi, const Vec& norm0) {
  tr.times.push_back(t);
  tr.amplitudes.push_back(amps);
  Vec n = psi.colwise().norm().transpose();
  tr.norms.push_back(n);
  for (Eigen::Index j = 0; j < n.size(); ++j)
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(n(j) - norm0(j)));
}

void check_drift(const Trajectory& tr, const PropagationConfig& cfg) {
  if (tr.max_norm_drift > cfg.drift_tol) {
    std::ostringstream msg;
    msg << "norm drift " << tr.max_norm_drift << " exceeds " << cfg.drift_tol
        << "; reduce dt (currently " << cfg.dt << " ns)";
    throw AccuracyError(msg.str());
  }
}

// Gershgorin interval of a symmetric sparse matrix.
std::pair<double, double> gershgorin(const SpMat& h) {
  Vec lo = Vec::Zero(h.rows()), hi = Vec::Zero(h.rows()), rad = Vec::Zero(h.rows()), d = Vec::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (SpMat::InnerIterator it(h, k); it; ++it) {
      if (it.row() == it.col())
        d(it.row()) += it.value();
      else
        rad(it.row()) += std::abs(it.value());
    }
  lo = d - rad;
  hi = d + rad;
  return {lo.minCoeff(), hi.maxCoeff()};
}

}  // namespace

Trajectory propagate(const FluxSeparableHamiltonian& parts, const PulsePair& pulses,
                     const CMat& psi0, const Mat& probes, const PropagationConfig& cfg) {
  cfg.validate();
  pulses.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(parts.dim());
  if (psi0.rows() != n || probes.rows() != n)
    throw ConfigError("propagate: state dimension does not match the Hamiltonian");
  const PulseParams& p1 = pulses.channel(1);
  const PulseParams& p2 = pulses.channel(2);
  const double T = pulses.duration();
  auto flux_at = [&](double t) {
    t = std::clamp(t, 0.0, T);
    return std::pair<double, double>{waveform(p1, t), waveform(p2, t)};
  };

  Trajectory tr;
  Vec norm0 = psi0.colwise().norm().transpose();
  CMat psi = psi0;
  CMat pt = probes.transpose().cast<cplx>();
  record(tr, 0.0, pt * psi, psi, norm0);

  std::vector<Sample> steps = sample(p1, cfg.dt);
  if (cfg.method == Method::Midpoint) {
    double last1 = NAN, last2 = NAN;
    Mat V;
    Vec E;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      auto [f1, f2] = flux_at(s.t_mid);
      if (!(f1 == last1 && f2 == last2)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(evaluate_dense(parts, f1, f2));
        V = es.eigenvectors();
        E = es.eigenvalues();
        last1 = f1;
        last2 = f2;
      }
      const double h = s.t1 - s.t0;
      CVec ph(E.size());
      for (Eigen::Index k = 0; k < E.size(); ++k) ph(k) = std::polar(1.0, -kTwoPi * E(k) * h);
      CMat c = V.transpose().cast<cplx>() * psi;
      c = ph.asDiagonal() * c;
      psi = V.cast<cplx>() * c;
      if ((i + 1) % cfg.stride == 0 || i + 1 == steps.size()) record(tr, s.t1, pt * psi, psi, norm0);
    }
  } else {
    const cplx mi(0.0, -kTwoPi);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      auto [f1m, f2m] = flux_at(s.t_mid);
      auto [glo, ghi] = gershgorin(evaluate(parts, f1m, f2m));
      const double centre = 0.5 * (glo + ghi), half = 0.5 * (ghi - glo);
      const double span = s.t1 - s.t0;
      const int nsub = std::max(1, int(std::ceil(kTwoPi * half * span / cfg.rk4_phase)));
      const double h = span / nsub;
      auto rhs = [&](double t, const CMat& y) {
        auto [f1, f2] = flux_at(t);
        CMat out = parts.H0 * y - centre * y;
        if (parts.channel_used[0])
          out += flux_cos_sin(f1).first * (parts.A[0] * y) + flux_cos_sin(f1).second * (parts.B[0] * y);
        if (parts.channel_used[1])
          out += flux_cos_sin(f2).first * (parts.A[1] * y) + flux_cos_sin(f2).second * (parts.B[1] * y);
        return CMat(mi * out);
      };
      for (int j = 0; j < nsub; ++j) {
        double t = s.t0 + j * h;
        CMat k1 = rhs(t, psi);
        CMat k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1);
        CMat k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2);
        CMat k4 = rhs(t + h, psi + h * k3);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      psi *= std::polar(1.0, -kTwoPi * centre * span);
      if ((i + 1) % cfg.stride == 0 || i + 1 == steps.size()) record(tr, s.t1, pt * psi, psi, norm0);
    }
  }
  tr.final_state = psi;
  tr.final_amplitudes = tr.amplitudes.back();
  check_drift(tr, cfg);
  return tr;
}

AdiabaticCells::AdiabaticCells(const FluxSeparableHamiltonian& parts, double phi_idle,
                               std::array<bool, 2> driven, double held_flux, const CellOptions& opt)
    : parts_(parts), phi_idle_(phi_idle), driven_(driven), held_flux_(held_flux), opt_(opt) {
  if (!(opt.spacing > 0.0)) throw ConfigError("cell spacing must be positive");
  if (opt.states < 4) throw ConfigError("cell basis needs at least 4 states");
  if (static_cast<std::size_t>(2 * opt.states) > parts.dim())
    throw ConfigError("cell basis is larger than half the Hilbert space; use full propagation");
  H0_ = parts.H0;
  A_.resize(parts.H0.rows(), parts.H0.cols());
  B_.resize(parts.H0.rows(), parts.H0.cols());
  for (int c = 0; c < 2; ++c) {
    if (!parts.channel_used[c]) continue;
    if (driven[c]) {
      A_ += parts.A[c];
      B_ += parts.B[c];
    } else {
      H0_ += flux_cos_sin(held_flux).first * parts.A[c] + flux_cos_sin(held_flux).second * parts.B[c];
    }
  }
  const Node& n0 = node(0);
  SpMat h = H0_ + flux_cos_sin(phi_idle).first * A_ + flux_cos_sin(phi_idle).second * B_;
  idle_.vectors = n0.V;
  idle_.values = (n0.V.transpose() * (h * n0.V)).diagonal();
}

const AdiabaticCells::Node& AdiabaticCells::node(int k) {
  auto it = nodes_.find(k);
  if (it != nodes_.end()) return it->second;
  const double f = phi_idle_ + k * opt_.spacing;
  SpMat h = H0_ + flux_cos_sin(f).first * A_ + flux_cos_sin(f).second * B_;
  Eigenpairs e = lowest_eigenpairs(h, opt_.states, opt_.dense_limit);
  return nodes_.emplace(k, Node{std::move(e.vectors)}).first->second;
}

void AdiabaticCells::build_cell(int k) {
  if (cells_.count(k)) return;
  const Mat& va = node(k).V;
  const Mat& vb = node(k + 1).V;
  Mat both(va.rows(), va.cols() + vb.cols());
  both << va, vb;
  Eigen::HouseholderQR<Mat> qr(both);
  Cell c;
  c.W = qr.householderQ() * Mat::Identity(both.rows(), both.cols());
  auto proj = [&](const SpMat& m) {
    Mat r = c.W.transpose() * (m * c.W);
    return Mat(0.5 * (r + r.transpose()));
  };
  c.H0 = proj(H0_);
  c.A = proj(A_);
  c.B = proj(B_);
  c.Q = c.W.transpose() * idle_.vectors;
  cells_.emplace(k, std::move(c));
}

void AdiabaticCells::ensure_range(double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  int kmin = int(std::floor((lo - phi_idle_) / opt_.spacing));
  int kmax = int(std::floor((hi - phi_idle_) / opt_.spacing));
  kmin = std::min(kmin, -1);
  kmax = std::max(kmax, 0);
  for (int k = kmin; k <= kmax; ++k) build_cell(k);
  for (auto it = cells_.begin(); it != cells_.end(); ++it) {
    auto nx = std::next(it);
    if (nx == cells_.end() || nx->first != it->first + 1 || it->second.Up.size()) continue;
    it->second.Up = nx->second.W.transpose() * it->second.W;
  }
  // Nodes are only needed to build new cells; keep the two outermost.
  for (auto it = nodes_.begin(); it != nodes_.end();) {
    int k = it->first;
    bool edge = k == 0 || !cells_.count(k) || !cells_.count(k - 1);
    it = edge ? std::next(it) : nodes_.erase(it);
  }
}

void AdiabaticCells::ensure_pulse(const PulseParams& p) {
  if (p.phi_idle != phi_idle_) throw ConfigError("pulse idle flux differs from the cell origin");
  double lo = p.phi_idle, hi = p.phi_idle;
  for (int i = 0; i <= 4000; ++i) {
    double f = waveform(p, p.duration * i / 4000.0);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  const double pad = 0.5 * opt_.spacing;
  ensure_range(lo - pad, hi + pad);
}

Trajectory AdiabaticCells::propagate(const PulseParams& p, const CMat& c0,
                                     const PropagationConfig& cfg) const {
  cfg.validate();
  p.validate();
  if (cfg.method != Method::Midpoint) throw ConfigError("cell propagation supports the midpoint method only");
  if (p.phi_idle != phi_idle_) throw ConfigError("pulse idle flux differs from the cell origin");
  if (c0.rows() != opt_.states) throw ConfigError("cell propagation: initial state has wrong size");

  auto cell_at = [&](double f) -> std::pair<int, const Cell*> {
    int k = int(std::floor((f - phi_idle_) / opt_.spacing));
    auto it = cells_.find(k);
    if (it == cells_.end()) {
      std::ostringstream msg;
      msg << "flux " << f << " is outside the prepared cell range";
      throw ConfigError(msg.str());
    }
    return {k, &it->second};
  };

  std::vector<Sample> steps = sample(p, cfg.dt);
  Trajectory tr;
  Vec norm0 = c0.colwise().norm().transpose();
  tr.times.push_back(0.0);
  tr.amplitudes.push_back(c0);
  tr.norms.push_back(norm0);

  auto [g, cell] = cell_at(steps.front().flux);
  CMat c = cell->Q.cast<cplx>() * c0;
  double last = NAN;
  Mat V;
  Vec E;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    auto [gn, cn] = cell_at(s.flux);
    while (g < gn) {
      c = cells_.at(g).Up.cast<cplx>() * c;
      ++g;
    }
    while (g > gn) {
      c = cells_.at(g - 1).Up.transpose().cast<cplx>() * c;
      --g;
    }
    cell = cn;
    if (!(s.flux == last)) {
      Mat h = cell->H0 + flux_cos_sin(s.flux).first * cell->A + flux_cos_sin(s.flux).second * cell->B;
      Eigen::SelfAdjointEigenSolver<Mat> es(h);
      V = es.eigenvectors();
      E = es.eigenvalues();
      last = s.flux;
    }
    const double h = s.t1 - s.t0;
    CVec ph(E.size());
    for (Eigen::Index k = 0; k < E.size(); ++k) ph(k) = std::polar(1.0, -kTwoPi * E(k) * h);
    CMat w = V.transpose().cast<cplx>() * c;
    c = V.cast<cplx>() * (ph.asDiagonal() * w);
    if ((i + 1) % cfg.stride == 0 || i + 1 == steps.size())
      record(tr, s.t1, cell->Q.transpose().cast<cplx>() * c, c, norm0);
  }
  tr.final_state = c;
  tr.final_amplitudes = tr.amplitudes.back();
  check_drift(tr, cfg);
  return tr;
}

double leakage(const CVec& psi_final, const Mat& computational) {
  CVec a = computational.transpose().cast<cplx>() * psi_final;
  return leakage_from_amplitudes(a);
}

double leakage_from_amplitudes(const CVec& a) {
  return std::clamp(1.0 - a.squaredNorm(), 0.0, 1.0);
}

std::map<std::string, std::vector<double>> population_traces(
    const Trajectory& traj, int column, const std::map<std::string, int>& label_to_probe) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, idx] : label_to_probe) {
    if (traj.amplitudes.empty() || idx < 0 || idx >= traj.amplitudes.front().rows())
      throw TrackingError("population trace: label '" + name + "' has no probe state");
    auto& series = out[name];
    for (const auto& a : traj.amplitudes) series.push_back(std::norm(a(idx, column)));
  }
  return out;
}

}  // namespace dtc
