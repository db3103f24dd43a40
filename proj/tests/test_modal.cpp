#include <gtest/gtest.h>

#include <cmath>

#include "dtc/modal.hpp"
#include "oracles.hpp"

using namespace dtc;

namespace {

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

}  // namespace

TEST(Ladder, DimTwo) {
  auto [lower, raise] = build_ladder(2);
  Mat expect(2, 2);
  expect << 0, 1, 0, 0;
  EXPECT_EQ(lower, expect);
  EXPECT_EQ(raise, Mat(expect.transpose()));
}

TEST(Ladder, NumberOperator) {
  auto [lower, raise] = build_ladder(4);
  Mat num = raise * lower;
  Mat expect = Eigen::Vector4d(0, 1, 2, 3).asDiagonal();
  EXPECT_LT((num - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(Mat(num.diagonal().asDiagonal()), num);
}

TEST(Ladder, CommutatorCorner) {
  auto [lower, raise] = build_ladder(5);
  Mat c = commutator(lower, raise);
  Mat expect = Mat::Identity(5, 5);
  expect(4, 4) = -4.0;
  EXPECT_LT((c - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(c(4, 4), -4.0);
}

TEST(Ladder, RejectsZero) { EXPECT_THROW(build_ladder(0), InvalidDimension); }

TEST(ModeSpec, Validation) {
  EXPECT_THROW(ModeSpec::transmon(0.0, 10.0, 3).validate(), ConfigError);
  EXPECT_THROW(ModeSpec::transmon(0.2, 10.0, 1).validate(), InvalidDimension);
  EXPECT_THROW(ModeSpec::harmonic(0.2, 0.0, 3).validate(), ConfigError);
  ModeSpec mixed = ModeSpec::transmon(0.2, 10.0, 3);
  mixed.el = 1.0;
  EXPECT_THROW(mixed.validate(), ConfigError);
  EXPECT_NO_THROW(ModeSpec::harmonic(0.2, 1.0, 2).validate());
}

TEST(ModeSpec, ZeroPointProduct) {
  for (double ec : {0.1, 0.22, 0.6})
    for (double ex : {1.0, 4.4, 13.0}) {
      EXPECT_NEAR(ModeSpec::transmon(ec, ex, 3).phi_zpf() * ModeSpec::transmon(ec, ex, 3).n_zpf(), 0.5, 1e-15);
      EXPECT_NEAR(ModeSpec::harmonic(ec, ex, 3).phi_zpf(), std::pow(2 * ec / ex, 0.25), 1e-15);
    }
}

TEST(Operators, TrigIdentity) {
  for (auto spec : {ModeSpec::transmon(0.25, 12.5, 8), ModeSpec::harmonic(0.5, 4.0, 8)}) {
    OperatorSet ops = build_mode_operators(spec);
    Mat id = ops.cos_phi * ops.cos_phi + ops.sin_phi * ops.sin_phi;
    EXPECT_LT((id - Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Operators, Structure) {
  OperatorSet ops = build_mode_operators(ModeSpec::transmon(0.3, 14.0, 7));
  EXPECT_EQ(ops.phi, Mat(ops.phi.transpose()));
  EXPECT_EQ(ops.n.real().cwiseAbs().maxCoeff(), 0.0);
  Mat n_im = ops.n.imag();
  EXPECT_EQ(n_im, Mat(-n_im.transpose()));
  EXPECT_LT(commutator(ops.cos_phi, ops.sin_phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(commutator(ops.cos_phi, ops.phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(commutator(ops.sin_phi, ops.phi).cwiseAbs().maxCoeff(), 1e-12);
  for (const Mat* m : {&ops.phi, &ops.cos_phi, &ops.sin_phi, &ops.lower}) {
    EXPECT_EQ(m->rows(), 7);
    EXPECT_EQ(m->cols(), 7);
  }
}

TEST(Operators, PhaseChargeCommutator) {
  for (int d : {3, 6, 12}) {
    OperatorSet ops = build_mode_operators(ModeSpec::transmon(0.22, 11.0, d));
    CMat phi = ops.phi.cast<cplx>();
    CMat c = phi * ops.n - ops.n * phi;
    CMat upper = c.topLeftCorner(d - 1, d - 1);
    EXPECT_LT((upper - cplx(0, 1) * CMat::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(c(d - 1, d - 1).imag(), -(d - 1), 1e-12);
  }
}

TEST(Operators, HarmonicGaps) {
  ModeSpec spec = ModeSpec::harmonic(0.25, 2.0, 20);
  Vec e = Eigen::SelfAdjointEigenSolver<Mat>(mode_hamiltonian(spec, build_mode_operators(spec))).eigenvalues();
  for (int k = 0; k < 3; ++k) EXPECT_NEAR((e(k + 1) - e(k)) / 2.0, 1.0, 1e-9);
}

TEST(Operators, HarmonicLocalModeKeepsFrequency) {
  // With the default construction basis the kept levels are exact.
  ModeSpec spec = ModeSpec::harmonic(0.55, 4.4, 3);
  LocalMode lm = local_mode(spec);
  const double w = std::sqrt(8 * 0.55 * 4.4);
  EXPECT_NEAR(lm.energies(1) - lm.energies(0), w, 1e-9 * w);
  EXPECT_NEAR(lm.energies(2) - lm.energies(1), w, 1e-9 * w);
  EXPECT_NEAR(mode_frequency(spec), w, 1e-9 * w);
}

TEST(Operators, TransmonMatchesChargeBasis) {
  ModeSpec spec = ModeSpec::transmon(0.25, 12.5, 15);
  Vec ho = Eigen::SelfAdjointEigenSolver<Mat>(mode_hamiltonian(spec, build_mode_operators(spec))).eigenvalues();
  Vec ch = transmon_charge_spectrum(0.25, 12.5);
  EXPECT_NEAR((ho(1) - ho(0)) / (ch(1) - ch(0)), 1.0, 1e-3);
}

TEST(Operators, TransmonConvergence) {
  for (int d : {20, 25, 30}) {
    auto levels = [](int dim) {
      ModeSpec s = ModeSpec::transmon(0.22, 11.0, dim);
      return Vec(Eigen::SelfAdjointEigenSolver<Mat>(mode_hamiltonian(s, build_mode_operators(s)))
                     .eigenvalues()
                     .head(3));
    };
    Vec a = levels(d), b = levels(d + 5);
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(a(k) - b(k)) / std::abs(b(k)), 1e-6) << d;
  }
}

TEST(ChargeBasis, DiagonalLimit) {
  Vec e = transmon_charge_spectrum(0.25, 0.0, 30, 3);
  EXPECT_NEAR(e(0), 0.0, 1e-14);
  EXPECT_NEAR(e(1), 1.0, 1e-14);
  EXPECT_NEAR(e(2), 1.0, 1e-14);
}

TEST(ChargeBasis, Asymptotics) {
  Vec e = transmon_charge_spectrum(0.25, 12.5);
  const double f01 = e(1) - e(0);
  EXPECT_NEAR(f01 / (std::sqrt(8 * 12.5 * 0.25) - 0.25), 1.0, 0.02);
  const double alpha = (e(2) - e(1)) - f01;
  EXPECT_NEAR(alpha / -0.25, 1.0, 0.15);
}

TEST(ChargeBasis, MatchesIndependentOracle) {
  Vec lib = transmon_charge_spectrum(0.3, 14.0, 30, 4);
  Vec ref = oracle::charge_levels(0.3, 14.0, 30, 4);
  EXPECT_LT((lib - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CrossBasis, LowestLevelsAgree) {
  for (double ratio : {30.0, 50.0, 80.0}) {
    const double ec = 0.2;
    ModeSpec spec = ModeSpec::transmon(ec, ratio * ec, 15);
    Vec ho = Eigen::SelfAdjointEigenSolver<Mat>(mode_hamiltonian(spec, build_mode_operators(spec))).eigenvalues();
    Vec ch = transmon_charge_spectrum(ec, ratio * ec);
    for (int k = 1; k < 3; ++k) EXPECT_NEAR((ho(k) - ho(0)) / (ch(k) - ch(0)), 1.0, 1e-3) << ratio;
    LocalMode lm = local_mode(ModeSpec::transmon(ec, ratio * ec, 3));
    for (int k = 1; k < 3; ++k)
      EXPECT_NEAR((lm.energies(k) - lm.energies(0)) / (ch(k) - ch(0)), 1.0, 1e-3) << ratio;
  }
}

TEST(LocalMode, DefaultBasisAvoidsNeighbouringWells) {
  // An oversized oscillator basis resolves copies of the well at phi = 2 pi.
  EXPECT_THROW(local_mode(ModeSpec::transmon(0.2, 6.0, 4, 40)), NumericalError);
  for (double ratio : {30.0, 50.0, 80.0}) EXPECT_NO_THROW(local_mode(ModeSpec::transmon(0.2, 0.2 * ratio, 4)));
  EXPECT_EQ(ModeSpec::harmonic(0.5, 4.0, 3).construction_dim(), 7);
}

TEST(LocalMode, MatchesDirectConstruction) {
  ModeSpec spec = ModeSpec::transmon(0.3, 13.0, 4);
  LocalMode lm = local_mode(spec);
  oracle::DirectMode dm = oracle::direct_mode(spec);
  EXPECT_LT((lm.energies - dm.energies).cwiseAbs().maxCoeff(), 1e-10);
  Mat n = dm.U.transpose() * dm.n_im * dm.U;
  EXPECT_LT((lm.n_im - n).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Embed, Identity) {
  std::vector<int> dims{2, 3, 4};
  for (std::size_t i = 0; i < dims.size(); ++i)
    EXPECT_EQ(embed(Mat(Mat::Identity(dims[i], dims[i])), i, dims), Mat::Identity(24, 24));
}

TEST(Embed, DisjointModesCommute) {
  std::vector<int> dims{3, 2, 2};
  Mat A = Mat::Random(3, 3), B = Mat::Random(2, 2);
  Mat a = embed(A, 0, dims), b = embed(B, 1, dims);
  EXPECT_LT((a * b - b * a).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Embed, TraceMultiplies) {
  std::vector<int> dims{3, 4, 2};
  Mat A = Mat::Random(4, 4);
  EXPECT_NEAR(embed(A, 1, dims).trace(), A.trace() * 6, 1e-12);
}

TEST(Embed, Errors) {
  std::vector<int> dims{3, 4};
  EXPECT_THROW(embed(Mat(Mat::Identity(3, 3)), 2, dims), InvalidDimension);
  EXPECT_THROW(embed(Mat(Mat::Identity(3, 3)), 1, dims), InvalidDimension);
}

TEST(Embed, SparseChainMatchesDense) {
  std::vector<int> dims{2, 3, 2};
  Mat A = Mat::Random(2, 2), C = Mat::Random(2, 2);
  SpMat s = kron_chain({{0, &A}, {2, &C}}, dims);
  Mat dense = embed(A, 0, dims) * embed(C, 2, dims);
  EXPECT_LT((Mat(s) - dense).cwiseAbs().maxCoeff(), 1e-14);
}
