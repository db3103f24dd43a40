#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dtc/linalg.hpp"
#include "dtc/pulse.hpp"

using namespace dtc;

namespace {

PulseParams shaped() {
  PulseParams p;
  p.phi_idle = 0.31;
  p.phi_amp = 0.19;
  p.lambdas = normalize({1.3, -0.2, 0.4, 0.05});
  p.duration = 350.0;
  return p;
}

}  // namespace

TEST(Waveform, PeakAndBoundaries) {
  PulseParams p = shaped();
  EXPECT_NEAR(waveform(p, p.duration / 2), p.phi_idle + p.phi_amp, 1e-12);
  EXPECT_NEAR(waveform(p, 0.0), p.phi_idle, 1e-12);
  EXPECT_NEAR(waveform(p, p.duration), p.phi_idle, 1e-12);
}

TEST(Waveform, EvenAboutMidpoint) {
  PulseParams p = shaped();
  for (double t : {0.0, 1.7, 40.0, 123.4, 174.9})
    EXPECT_NEAR(waveform(p, t), waveform(p, p.duration - t), 1e-14);
}

TEST(Waveform, DerivativeVanishes) {
  PulseParams p = shaped();
  for (double t : {0.0, p.duration / 2, p.duration}) EXPECT_NEAR(waveform_derivative(p, t), 0.0, 1e-12);
  // finite-difference check away from the stationary points
  const double h = 1e-4, t = 97.0;
  EXPECT_NEAR(waveform_derivative(p, t), (waveform(p, t + h) - waveform(p, t - h)) / (2 * h), 1e-9);
}

TEST(Waveform, DomainError) {
  PulseParams p = shaped();
  EXPECT_THROW(waveform(p, -1e-9), DomainError);
  EXPECT_THROW(waveform(p, p.duration + 1e-9), DomainError);
}

TEST(Waveform, ExcursionBound) {
  PulseParams p = shaped();
  const double bound = excursion_bound(p);
  for (int i = 0; i <= 1000; ++i) EXPECT_LE(std::abs(waveform(p, p.duration * i / 1000.0) - p.phi_idle), bound + 1e-15);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize({1.0}), std::vector<double>{1.0});
  EXPECT_EQ(normalize({2.0, 0.5}), (std::vector<double>{1.0, 0.25}));
  EXPECT_THROW(normalize({0.0, 1.0}), NormalizationError);
  auto l = normalize({0.7, 0.3, 0.9});
  EXPECT_NEAR(l[0] + l[2], 1.0, 1e-15);
}

TEST(Validate, Rules) {
  PulseParams p;
  EXPECT_NO_THROW(p.validate());
  p.lambdas = {0.5, 0.0, 0.0};
  EXPECT_THROW(p.validate(), NormalizationError);
  p = PulseParams{};
  p.duration = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PulseParams{};
  p.lambdas.clear();
  EXPECT_THROW(p.validate(), ConfigError);
  p = PulseParams{};
  p.phi_idle = 0.9;
  p.phi_amp = 0.2;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Sample, Midpoints) {
  PulseParams p;
  p.duration = 1.0;
  auto s = sample(p, 0.5);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0].t_mid, 0.25);
  EXPECT_DOUBLE_EQ(s[1].t_mid, 0.75);
  EXPECT_THROW(sample(p, 0.0), ConfigError);
  EXPECT_THROW(sample(p, 2.0), ConfigError);
}

TEST(Sample, LastStepLandsOnDuration) {
  PulseParams p;
  p.duration = 1.0;
  auto s = sample(p, 0.3);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.back().t1, 1.0);
  EXPECT_NEAR(s.back().t0, 0.9, 1e-15);
}

TEST(Sample, ConstantPulse) {
  PulseParams p;
  p.phi_amp = 0.0;
  for (const auto& x : sample(p, 7.0)) EXPECT_EQ(x.flux, p.phi_idle);
}

TEST(Sample, HalvingRefines) {
  PulseParams p = shaped();
  auto coarse = sample(p, 1.0), fine = sample(p, 0.5);
  std::set<double> edges;
  for (const auto& x : fine) edges.insert(x.t0);
  for (const auto& x : coarse) EXPECT_TRUE(edges.count(x.t0));
  double peak = 0.0;
  for (const auto& x : fine) peak = std::max(peak, x.flux);
  EXPECT_NEAR(peak, p.phi_idle + p.phi_amp, 1e-5);
}

TEST(PulsePair, ChannelsAndJson) {
  PulsePair a = PulsePair::same(shaped());
  EXPECT_EQ(&a.channel(2), &a.first);
  PulsePair b = a;
  b.synchronous = false;
  b.second.phi_amp = 0.1;
  EXPECT_EQ(&b.channel(2), &b.second);
  for (const PulsePair& p : {a, b}) EXPECT_EQ(pulse_pair_from_json(pulse_pair_to_json(p)), p);
  b.second.duration = 300;
  EXPECT_THROW(b.validate(), ConfigError);
  EXPECT_THROW(pulse_from_json(nlohmann::json{{"phi_idle", 0.3}}), ConfigError);
}
