#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "dtc/circuit.hpp"
#include "dtc/device_io.hpp"
#include "oracles.hpp"

using namespace dtc;

namespace {

Vec spectrum(const Mat& h) { return Eigen::SelfAdjointEigenSolver<Mat>(h, Eigen::EigenvaluesOnly).eigenvalues(); }

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

CircuitSpec uniform_dims(const CircuitSpec& c, int d) {
  std::vector<std::pair<std::string, int>> v;
  for (const auto& m : c.modes) v.push_back({m.id, d});
  return with_dims(c, v);
}

CircuitSpec toy3(bool coupled) {
  CircuitSpec c;
  c.modes.push_back({"a", ModeSpec::transmon(0.3, 13.0, 3)});
  c.modes.push_back({"b", ModeSpec::transmon(0.3, 14.0, 3)});
  c.modes.push_back({"r", ModeSpec::harmonic(0.55, 4.4, 3)});
  if (coupled) {
    c.edges.push_back({"a", "r", 0.2});
    c.edges.push_back({"a", "b", -0.05});
    c.loops.push_back({"a", "b", 1.5, 1});
  }
  return c;
}

const Device& device() {
  static Device d = load_device(default_device_path());
  return d;
}

}  // namespace

TEST(DefaultDevice, Topology) {
  const CircuitSpec& c = device().circuit;
  ASSERT_EQ(c.modes.size(), 8u);
  std::vector<std::string> order{"Q1", "Q2", "Cb10", "Cb11", "Cp1A", "Cp1B", "Cp2A", "Cp2B"};
  EXPECT_EQ(c.ids(), order);
  std::set<std::pair<std::string, std::string>> want{{"Q1", "Cp1A"},   {"Cp1A", "Cp1B"}, {"Cb10", "Cp1B"},
                                                     {"Cb11", "Cp1B"}, {"Cb10", "Cp2A"}, {"Cb11", "Cp2A"},
                                                     {"Cp2A", "Cp2B"}, {"Q2", "Cp2B"}};
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : c.edges) got.insert({e.a, e.b});
  EXPECT_EQ(got, want);
  EXPECT_EQ(c.loops.size(), 2u);
  std::map<std::string, double> cable11;
  for (const auto& e : c.edges)
    if (e.a == "Cb11") cable11[e.b] = e.J;
  EXPECT_DOUBLE_EQ(cable11["Cp1B"], 0.025);
  EXPECT_DOUBLE_EQ(cable11["Cp2A"], -0.025);
}

TEST(Assemble, SymmetricAndPeriodic) {
  auto parts = assemble(uniform_dims(device().circuit, 2));
  const double f1 = 0.3125, f2 = -0.4375;
  Mat h = evaluate_dense(parts, f1, f2);
  EXPECT_EQ(h, Mat(h.transpose()));
  EXPECT_EQ(h, evaluate_dense(parts, f1 + 1.0, f2));
  EXPECT_EQ(h, evaluate_dense(parts, f1, f2 - 2.0));
  Mat g = evaluate_dense(parts, 0.3, 0.41);
  EXPECT_LT(max_abs(g - evaluate_dense(parts, 1.3, 0.41)), 1e-12);
  for (const SpMat* m : {&parts.H0, &parts.A[0], &parts.A[1], &parts.B[0], &parts.B[1]})
    EXPECT_EQ(Mat(*m), Mat(Mat(*m).transpose()));
}

TEST(Assemble, QuarterFluxCoefficients) {
  auto parts = assemble(uniform_dims(device().circuit, 2));
  EXPECT_EQ(evaluate_dense(parts, 0, 0), Mat(parts.H0 + parts.A[0] + parts.A[1]));
  EXPECT_EQ(evaluate_dense(parts, 0.25, 0), Mat(parts.H0 + parts.B[0] + parts.A[1]));
  EXPECT_EQ(evaluate_dense(parts, 0.5, 0.75), Mat(parts.H0 - parts.A[0] - parts.B[1]));
}

TEST(Assemble, MatchesDirectConstruction) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Device L = device().restrict_to("L");
  auto cases = {toy3(true), L.circuit, uniform_dims(device().circuit, 2)};
  for (const CircuitSpec& c : cases) {
    auto parts = assemble(c);
    for (int k = 0; k < 2; ++k) {
      const double f1 = u(rng), f2 = u(rng);
      Mat lib = evaluate_dense(parts, f1, f2);
      Mat ref = oracle::direct_hamiltonian(c, f1, f2);
      EXPECT_LT(max_abs(lib - ref), 1e-12 * std::max(1.0, max_abs(ref))) << c.modes.size();
      EXPECT_LT((spectrum(lib) - spectrum(ref)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Assemble, UncoupledSpectrumIsSumOfLocal) {
  CircuitSpec c = toy3(false);
  std::vector<double> sums;
  std::vector<Vec> e;
  for (const auto& m : c.modes) e.push_back(local_mode(m.spec).energies);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) sums.push_back(e[0](i) + e[1](j) + e[2](k));
  std::sort(sums.begin(), sums.end());
  Vec got = spectrum(evaluate_dense(assemble(c), 0.17, 0.0));
  for (int i = 0; i < 27; ++i) EXPECT_NEAR(got(i), sums[i], 1e-10);
}

TEST(Assemble, DimensionCap) {
  CircuitSpec c = uniform_dims(device().circuit, 4);
  EXPECT_THROW(assemble(c), DimensionOverflow);
  EXPECT_THROW(assemble(uniform_dims(device().circuit, 2), 100), DimensionOverflow);
}

TEST(Assemble, RejectsInvalidCircuits) {
  CircuitSpec c = toy3(true);
  c.edges.push_back({"a", "a", 0.1});
  EXPECT_THROW(assemble(c), ConfigError);
  c = toy3(true);
  c.edges.push_back({"a", "r", 0.1});
  EXPECT_THROW(assemble(c), ConfigError);
  c = toy3(true);
  c.loops[0].b = "zz";
  EXPECT_THROW(assemble(c), ConfigError);
  c = toy3(true);
  c.loops[0].ej = 0.0;
  EXPECT_THROW(assemble(c), ConfigError);
}

TEST(Assemble, ReorderingKeepsSpectrum) {
  CircuitSpec c = toy3(true);
  CircuitSpec p = c;
  std::reverse(p.modes.begin(), p.modes.end());
  Vec a = spectrum(evaluate_dense(assemble(c), 0.37, 0.0));
  Vec b = spectrum(evaluate_dense(assemble(p), 0.37, 0.0));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Assemble, LoopTermsActOnOwnCoupler) {
  CircuitSpec c = uniform_dims(device().circuit, 2);
  auto parts = assemble(c);
  std::array<std::set<int>, 2> own{std::set<int>{c.index_of("Cp1A"), c.index_of("Cp1B")},
                                   std::set<int>{c.index_of("Cp2A"), c.index_of("Cp2B")}};
  const int n = static_cast<int>(c.modes.size());
  for (int ch = 0; ch < 2; ++ch)
    for (const SpMat* m : {&parts.A[ch], &parts.B[ch]})
      for (int k = 0; k < m->outerSize(); ++k)
        for (SpMat::InnerIterator it(*m, k); it; ++it) {
          if (it.value() == 0.0) continue;
          for (int mode = 0; mode < n; ++mode) {
            if (own[ch].count(mode)) continue;
            const int bit = n - 1 - mode;  // all dims are 2
            EXPECT_EQ((it.row() >> bit) & 1, (it.col() >> bit) & 1);
          }
        }
}

TEST(Assemble, MirrorRelabeling) {
  // Q1 <-> Q2 and DTC1 <-> DTC2 with the flux channels exchanged describe the
  // same circuit, so the spectrum at (f2, f1) must match the original at (f1, f2).
  CircuitSpec c = uniform_dims(device().circuit, 2);
  std::map<std::string, std::string> swap{{"Q1", "Q2"},     {"Q2", "Q1"},     {"Cp1A", "Cp2B"}, {"Cp1B", "Cp2A"},
                                          {"Cp2A", "Cp1B"}, {"Cp2B", "Cp1A"}, {"Cb10", "Cb10"}, {"Cb11", "Cb11"}};
  CircuitSpec m;
  std::vector<std::string> order{"Q1", "Q2", "Cb10", "Cb11", "Cp1A", "Cp1B", "Cp2A", "Cp2B"};
  for (const auto& id : order) m.modes.push_back({id, c.modes[c.index_of(swap[id])].spec});
  for (const auto& e : c.edges) m.edges.push_back({swap[e.a], swap[e.b], e.J});
  for (const auto& l : c.loops) m.loops.push_back({swap[l.a], swap[l.b], l.ej, 3 - l.channel});
  auto pc = assemble(c), pm = assemble(m);
  for (auto [f1, f2] : {std::pair{0.3, 0.5}, std::pair{0.12, 0.43}}) {
    Vec a = spectrum(evaluate_dense(pc, f1, f2));
    Vec b = spectrum(evaluate_dense(pm, f2, f1));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
  // Flipping the sign of both cable-11 couplings is a parity gauge on that mode.
  CircuitSpec g = c;
  for (auto& e : g.edges)
    if (e.a == "Cb11" || e.b == "Cb11") e.J = -e.J;
  Vec a = spectrum(evaluate_dense(pc, 0.31, 0.47));
  Vec b = spectrum(evaluate_dense(assemble(g), 0.31, 0.47));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Subsystem, AllModesIsIdentity) {
  const CircuitSpec& c = device().circuit;
  EXPECT_EQ(subsystem(c, c.ids()), c);
}

TEST(Subsystem, LeftSystem) {
  CircuitSpec s = subsystem(device().circuit, {"Q1", "Cp1A", "Cp1B", "Cb10"});
  EXPECT_EQ(s.modes.size(), 4u);
  ASSERT_EQ(s.edges.size(), 3u);
  EXPECT_EQ(s.loops.size(), 1u);
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : s.edges) got.insert({e.a, e.b});
  std::set<std::pair<std::string, std::string>> want{{"Q1", "Cp1A"}, {"Cp1A", "Cp1B"}, {"Cb10", "Cp1B"}};
  EXPECT_EQ(got, want);
}

TEST(Subsystem, SplittingLoopFails) {
  EXPECT_THROW(subsystem(device().circuit, {"Q1", "Cp1A", "Cb10"}), StructuralError);
  EXPECT_THROW(subsystem(device().circuit, {}), ConfigError);
  EXPECT_THROW(subsystem(device().circuit, {"Q1", "nope"}), ConfigError);
}

TEST(Subsystem, NamedSubsystemsOfDevice) {
  Device L = device().restrict_to("L");
  EXPECT_EQ(L.circuit.modes.size(), 4u);
  EXPECT_EQ(L.qubits.first, "Q1");
  EXPECT_THROW(device().restrict_to("X"), ConfigError);
}

TEST(WithDims, OverridesAndRejectsUnknown) {
  CircuitSpec c = with_dims(device().circuit, {{"Q1", 5}});
  EXPECT_EQ(c.modes[0].spec.dim, 5);
  EXPECT_THROW(with_dims(device().circuit, {{"Q9", 3}}), ConfigError);
}
