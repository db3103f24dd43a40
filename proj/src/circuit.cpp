#include "dtc/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dtc {

int CircuitSpec::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<int> CircuitSpec::dims() const {
  std::vector<int> d;
  d.reserve(modes.size());
  for (const auto& m : modes) d.push_back(m.spec.dim);
  return d;
}

std::size_t CircuitSpec::dimension() const {
  std::size_t n = 1;
  for (const auto& m : modes) n *= static_cast<std::size_t>(m.spec.dim);
  return n;
}

std::vector<std::string> CircuitSpec::ids() const {
  std::vector<std::string> out;
  for (const auto& m : modes) out.push_back(m.id);
  return out;
}

void CircuitSpec::validate() const {
  if (modes.empty()) throw ConfigError("circuit has no modes");
  std::set<std::string> seen;
  for (const auto& m : modes) {
    if (m.id.empty()) throw ConfigError("mode with empty identifier");
    if (!seen.insert(m.id).second) throw ConfigError("duplicate mode identifier '" + m.id + "'");
    try {
      m.spec.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("mode '" + m.id + "': " + e.what());
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : edges) {
    if (index_of(e.a) < 0 || index_of(e.b) < 0)
      throw ConfigError("edge references unknown mode (" + e.a + ", " + e.b + ")");
    if (e.a == e.b) throw ConfigError("edge connects mode '" + e.a + "' to itself");
    auto key = std::minmax(e.a, e.b);
    if (!pairs.insert({key.first, key.second}).second)
      throw ConfigError("duplicate edge (" + e.a + ", " + e.b + ")");
  }
  std::set<std::string> in_loop;
  for (const auto& l : loops) {
    int ia = index_of(l.a), ib = index_of(l.b);
    if (ia < 0 || ib < 0) throw ConfigError("loop references unknown mode (" + l.a + ", " + l.b + ")");
    if (l.a == l.b) throw ConfigError("loop joins mode '" + l.a + "' to itself");
    if (!(l.ej > 0.0)) throw ConfigError("loop junction E_J must be positive");
    if (l.channel != 1 && l.channel != 2) throw ConfigError("loop flux channel must be 1 or 2");
    if (modes[ia].spec.kind != ModeKind::Transmon || modes[ib].spec.kind != ModeKind::Transmon)
      throw ConfigError("loop junction must join two transmon coupler modes");
    if (!in_loop.insert(l.a).second || !in_loop.insert(l.b).second)
      throw ConfigError("a coupler mode may belong to only one loop");
  }
}

FluxSeparableHamiltonian assemble(const CircuitSpec& circuit, std::size_t cap) {
  circuit.validate();
  const std::size_t n = circuit.dimension();
  if (n > cap)
    throw DimensionOverflow("Hilbert-space dimension " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));

  FluxSeparableHamiltonian out;
  out.dims = circuit.dims();
  out.ids = circuit.ids();
  std::vector<LocalMode> local;
  for (const auto& m : circuit.modes) {
    local.push_back(local_mode(m.spec));
    out.local_energies.push_back(local.back().energies);
  }

  // Mode self-terms are diagonal in this basis.
  Vec diag = Vec::Zero(static_cast<Eigen::Index>(n));
  {
    std::vector<int> idx(out.dims.size(), 0);
    for (std::size_t k = 0; k < n; ++k) {
      double e = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) e += local[i].energies(idx[i]);
      diag(static_cast<Eigen::Index>(k)) = e;
      for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
        if (++idx[i] < out.dims[i]) break;
        idx[i] = 0;
      }
    }
  }
  out.H0.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
      t.emplace_back(static_cast<int>(k), static_cast<int>(k), diag(static_cast<Eigen::Index>(k)));
    out.H0.setFromTriplets(t.begin(), t.end());
  }

  // J n_a n_b with n = i n_im gives -J n_im_a n_im_b.
  for (const auto& e : circuit.edges) {
    std::size_t ia = circuit.index_of(e.a), ib = circuit.index_of(e.b);
    out.H0 += -e.J * kron_chain({{ia, &local[ia].n_im}, {ib, &local[ib].n_im}}, out.dims);
  }

  for (auto& m : out.A) m.resize(out.H0.rows(), out.H0.cols());
  for (auto& m : out.B) m.resize(out.H0.rows(), out.H0.cols());
  for (const auto& l : circuit.loops) {
    std::size_t ia = circuit.index_of(l.a), ib = circuit.index_of(l.b);
    const auto& a = local[ia];
    const auto& b = local[ib];
    SpMat cc = kron_chain({{ia, &a.cos_phi}, {ib, &b.cos_phi}}, out.dims);
    SpMat ss = kron_chain({{ia, &a.sin_phi}, {ib, &b.sin_phi}}, out.dims);
    SpMat sc = kron_chain({{ia, &a.sin_phi}, {ib, &b.cos_phi}}, out.dims);
    SpMat cs = kron_chain({{ia, &a.cos_phi}, {ib, &b.sin_phi}}, out.dims);
    int c = l.channel - 1;
    out.A[c] += -l.ej * (cc + ss);
    out.B[c] += l.ej * (sc - cs);
    out.channel_used[c] = true;
  }
  out.H0.makeCompressed();
  for (auto& m : out.A) m.makeCompressed();
  for (auto& m : out.B) m.makeCompressed();
  return out;
}

std::pair<double, double> flux_cos_sin(double flux) {
  const double r = flux - std::floor(flux);
  // Quarter fluxes are exact so that e.g. Phi = 0.25 drops A entirely.
  const double q = 4.0 * r;
  if (q == std::floor(q)) {
    static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
    const int k = static_cast<int>(q);
    return {c[k], s[k]};
  }
  return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

SpMat evaluate(const FluxSeparableHamiltonian& parts, double flux1, double flux2) {
  SpMat h = parts.H0;
  const double f[2] = {flux1, flux2};
  for (int c = 0; c < 2; ++c) {
    if (!parts.channel_used[c]) continue;
    auto [cs, sn] = flux_cos_sin(f[c]);
    h += cs * parts.A[c];
    h += sn * parts.B[c];
  }
  return h;
}

Mat evaluate_dense(const FluxSeparableHamiltonian& parts, double flux1, double flux2) {
  return Mat(evaluate(parts, flux1, flux2));
}

CircuitSpec subsystem(const CircuitSpec& circuit, const std::vector<std::string>& mode_subset) {
  if (mode_subset.empty()) throw ConfigError("subsystem: empty mode subset");
  std::set<std::string> keep(mode_subset.begin(), mode_subset.end());
  for (const auto& id : keep)
    if (circuit.index_of(id) < 0) throw ConfigError("subsystem: unknown mode '" + id + "'");
  CircuitSpec out;
  for (const auto& m : circuit.modes)
    if (keep.count(m.id)) out.modes.push_back(m);
  for (const auto& e : circuit.edges)
    if (keep.count(e.a) && keep.count(e.b)) out.edges.push_back(e);
  for (const auto& l : circuit.loops) {
    bool a = keep.count(l.a) > 0, b = keep.count(l.b) > 0;
    if (a != b)
      throw StructuralError("subsystem cut splits the loop junction (" + l.a + ", " + l.b + ")");
    if (a) out.loops.push_back(l);
  }
  return out;
}

CircuitSpec with_dims(const CircuitSpec& circuit, const std::vector<std::pair<std::string, int>>& dims) {
  CircuitSpec out = circuit;
  for (const auto& [id, d] : dims) {
    int i = out.index_of(id);
    if (i < 0) throw ConfigError("truncation override for unknown mode '" + id + "'");
    out.modes[i].spec.dim = d;
  }
  return out;
}

}  // namespace dtc
