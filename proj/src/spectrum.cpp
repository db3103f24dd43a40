#include "dtc/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace dtc {

std::string label_string(const Label& l) {
  std::string s = "|";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(l[i]);
  }
  return s + ">";
}

std::size_t BareBasis::size() const {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

bool BareBasis::contains(const Label& l) const {
  if (l.size() != dims.size()) return false;
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] < 0 || l[i] >= dims[i]) return false;
  return true;
}

std::size_t BareBasis::index(const Label& l) const {
  if (!contains(l)) throw TrackingError("label " + label_string(l) + " is outside the truncation");
  std::size_t k = 0;
  for (std::size_t i = 0; i < l.size(); ++i) k = k * dims[i] + static_cast<std::size_t>(l[i]);
  return k;
}

Label BareBasis::label(std::size_t index) const {
  Label l(dims.size());
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    l[i] = static_cast<int>(index % dims[i]);
    index /= dims[i];
  }
  return l;
}

double BareBasis::energy(const Label& l) const {
  if (!contains(l)) throw TrackingError("label " + label_string(l) + " is outside the truncation");
  double e = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) e += local_energies[i](l[i]);
  return e;
}

Vec BareBasis::vector(const Label& l) const {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(size()));
  v(static_cast<Eigen::Index>(index(l))) = 1.0;
  return v;
}

BareBasis bare_basis(const FluxSeparableHamiltonian& parts) {
  return BareBasis{parts.dims, parts.local_energies};
}

const LabeledState* LabeledSpectrum::find(const Label& l) const {
  for (const auto& e : entries)
    if (e.label == l) return &e;
  return nullptr;
}

const LabeledState& LabeledSpectrum::at(const Label& l) const {
  if (const auto* e = find(l)) return *e;
  throw TrackingError("label " + label_string(l) + " not present in spectrum");
}

LabeledSpectrum label_states(const Eigenpairs& eig, const BareBasis& bare,
                             const std::vector<Label>& wanted, double overlap_floor,
                             const std::string& context) {
  if (static_cast<std::size_t>(eig.vectors.rows()) != bare.size())
    throw ValidationError("label_states: eigenvectors and bare basis differ in dimension");
  const Eigen::Index m = eig.vectors.cols();

  struct Cand {
    double p;
    std::size_t w;
    Eigen::Index j;
  };
  std::vector<Cand> cands;
  std::vector<std::pair<double, double>> best_two(wanted.size(), {0.0, 0.0});
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    const Eigen::Index row = static_cast<Eigen::Index>(bare.index(wanted[w]));
    for (Eigen::Index j = 0; j < m; ++j) {
      double p = eig.vectors(row, j) * eig.vectors(row, j);
      if (p <= 0.0) continue;
      cands.push_back({p, w, j});
      auto& bt = best_two[w];
      if (p > bt.first) {
        bt.second = bt.first;
        bt.first = p;
      } else if (p > bt.second) {
        bt.second = p;
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.w != b.w) return a.w < b.w;
    return a.j < b.j;
  });

  std::vector<Eigen::Index> assigned(wanted.size(), -1);
  std::vector<double> score(wanted.size(), 0.0);
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (const auto& c : cands) {
    if (assigned[c.w] >= 0 || used[c.j]) continue;
    assigned[c.w] = c.j;
    score[c.w] = c.p;
    used[c.j] = 1;
  }

  LabeledSpectrum out;
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    if (assigned[w] < 0 || score[w] < overlap_floor) {
      std::ostringstream msg;
      msg << "tracking lost" << (context.empty() ? "" : " at " + context) << " for label "
          << label_string(wanted[w]) << " (best overlap " << score[w] << ", floor "
          << overlap_floor << ")";
      throw TrackingError(msg.str());
    }
    LabeledState s;
    s.label = wanted[w];
    s.eig_index = static_cast<int>(assigned[w]);
    s.energy = eig.values(assigned[w]);
    s.overlap = score[w];
    s.ambiguous = best_two[w].first - best_two[w].second < 1e-6;
    s.vector = eig.vectors.col(assigned[w]);
    out.entries.push_back(std::move(s));
  }
  return out;
}

std::array<Label, 4> computational_labels(const std::vector<int>& dims, int first, int second) {
  if (first < 0 || second < 0 || first == second || first >= int(dims.size()) ||
      second >= int(dims.size()))
    throw ConfigError("computational_labels: invalid qubit mode indices");
  std::array<Label, 4> out;
  for (int k = 0; k < 4; ++k) {
    Label l(dims.size(), 0);
    l[first] = k >> 1;
    l[second] = k & 1;
    out[k] = l;
  }
  return out;
}

ZZResult zz_strength(const LabeledSpectrum& s, const std::array<Label, 4>& labels) {
  ZZResult r;
  const auto& e00 = s.at(labels[0]);
  const auto& e01 = s.at(labels[1]);
  const auto& e10 = s.at(labels[2]);
  const auto& e11 = s.at(labels[3]);
  r.E00 = e00.energy;
  r.E01 = e01.energy;
  r.E10 = e10.energy;
  r.E11 = e11.energy;
  r.zeta = (r.E11 - r.E01) - (r.E10 - r.E00);
  r.min_overlap = std::min({e00.overlap, e01.overlap, e10.overlap, e11.overlap});
  return r;
}

LabeledSpectrum solve_point(const FluxSeparableHamiltonian& parts, const BareBasis& bare,
                            double flux1, double flux2, const std::vector<Label>& wanted,
                            const SpectrumOptions& opt) {
  SpMat h = evaluate(parts, flux1, flux2);
  int k = static_cast<int>(std::min<std::size_t>(opt.k, parts.dim()));
  Eigenpairs eig = lowest_eigenpairs(h, k, opt.dense_limit);
  std::ostringstream ctx;
  ctx.precision(6);
  ctx << "flux (" << flux1 << ", " << flux2 << ")";
  return label_states(eig, bare, wanted, opt.overlap_floor, ctx.str());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(fail_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

SweepPoint run_point(const FluxSeparableHamiltonian& parts, const BareBasis& bare, double f1,
                     double f2, const SweepRequest& req) {
  SweepPoint p;
  p.flux1 = f1;
  p.flux2 = f2;
  std::vector<Label> wanted(req.qubit_labels.begin(), req.qubit_labels.end());
  for (const auto& l : req.extra_labels)
    if (std::find(wanted.begin(), wanted.end(), l) == wanted.end()) wanted.push_back(l);
  try {
    p.spectrum = solve_point(parts, bare, f1, f2, wanted, req.options);
    ZZResult z = zz_strength(p.spectrum, req.qubit_labels);
    z.flux1 = f1;
    z.flux2 = f2;
    p.zz = z;
  } catch (const NumericalError& e) {
    p.error = e.what();
  }
  return p;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("sweep grid must be strictly increasing");
}

}  // namespace

std::vector<SweepPoint> sweep_1d(const FluxSeparableHamiltonian& parts, int channel,
                                 const std::vector<double>& grid, const SweepRequest& req,
                                 double other) {
  check_grid(grid);
  if (channel < 0 || channel > 2) throw ConfigError("sweep channel must be 0, 1 or 2");
  BareBasis bare = bare_basis(parts);
  std::vector<SweepPoint> out(grid.size());
  parallel_for(grid.size(), req.workers, [&](std::size_t i) {
    double f = grid[i];
    double f1 = channel == 2 ? other : f;
    double f2 = channel == 1 ? other : f;
    out[i] = run_point(parts, bare, f1, f2, req);
  });
  return out;
}

SweepMap sweep_2d(const FluxSeparableHamiltonian& parts, const std::vector<double>& grid1,
                  const std::vector<double>& grid2, const SweepRequest& req) {
  check_grid(grid1);
  check_grid(grid2);
  BareBasis bare = bare_basis(parts);
  SweepMap map;
  map.grid1 = grid1;
  map.grid2 = grid2;
  map.points.resize(grid1.size() * grid2.size());
  parallel_for(map.points.size(), req.workers, [&](std::size_t k) {
    std::size_t i1 = k / grid2.size(), i2 = k % grid2.size();
    map.points[k] = run_point(parts, bare, grid1[i1], grid2[i2], req);
  });
  return map;
}

std::vector<ZeroCrossing> find_zz_zeros(const std::function<double(double)>& zeta_of_flux,
                                        const std::vector<double>& grid, double tol) {
  check_grid(grid);
  std::vector<double> z(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) z[i] = zeta_of_flux(grid[i]);
  std::vector<ZeroCrossing> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (z[i] == 0.0) {
      out.push_back({grid[i], 0.0});
      continue;
    }
    if (i + 1 >= grid.size() || z[i + 1] == 0.0 || (z[i] > 0) == (z[i + 1] > 0)) continue;
    double a = grid[i], b = grid[i + 1], za = z[i];
    double m = 0.5 * (a + b), zm = zeta_of_flux(m);
    while (b - a > tol && zm != 0.0) {
      if ((zm > 0) == (za > 0)) {
        a = m;
        za = zm;
      } else {
        b = m;
      }
      m = 0.5 * (a + b);
      zm = zeta_of_flux(m);
    }
    out.push_back({m, zm});
  }
  return out;
}

}  // namespace dtc
