#include "dtc/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtc/linalg.hpp"

namespace dtc {

void PulseParams::validate() const {
  if (!(duration > 0.0)) throw ConfigError("pulse duration must be positive");
  if (lambdas.empty()) throw ConfigError("pulse order must be >= 1");
  double odd = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); k += 2) odd += lambdas[k];
  if (std::abs(odd - 1.0) > 1e-12)
    throw NormalizationError("odd lambda coefficients must sum to 1 (got " + std::to_string(odd) + ")");
  if (std::abs(phi_idle) > 1.0 || std::abs(phi_idle + phi_amp) > 1.0)
    throw ConfigError("pulse flux must stay within [-1, 1]");
  if (std::abs(phi_idle) + excursion_bound(*this) > 1.0 + 1e-12) {
    // The bound is loose, so only reject when the sampled peak really escapes.
    double peak = 0.0;
    for (int i = 0; i <= 2000; ++i)
      peak = std::max(peak, std::abs(waveform(*this, duration * i / 2000.0)));
    if (peak > 1.0) throw ConfigError("pulse flux leaves [-1, 1]");
  }
}

double waveform(const PulseParams& p, double t) {
  if (!(t >= 0.0 && t <= p.duration))
    throw DomainError("waveform evaluated at t = " + std::to_string(t) + " outside [0, T]");
  const double x = (t - 0.5 * p.duration) / p.duration;
  double s = 0.0;
  for (std::size_t k = 0; k < p.lambdas.size(); ++k)
    s += p.lambdas[k] * (1.0 - std::cos(kTwoPi * double(k + 1) * x));
  return p.phi_idle + p.phi_amp - 0.5 * p.phi_amp * s;
}

double waveform_derivative(const PulseParams& p, double t) {
  if (!(t >= 0.0 && t <= p.duration))
    throw DomainError("waveform derivative evaluated outside [0, T]");
  const double x = (t - 0.5 * p.duration) / p.duration;
  double s = 0.0;
  for (std::size_t k = 0; k < p.lambdas.size(); ++k) {
    double w = kTwoPi * double(k + 1) / p.duration;
    s += p.lambdas[k] * w * std::sin(kTwoPi * double(k + 1) * x);
  }
  return -0.5 * p.phi_amp * s;
}

std::vector<double> normalize(const std::vector<double>& raw) {
  double odd = 0.0;
  for (std::size_t k = 0; k < raw.size(); k += 2) odd += raw[k];
  if (odd == 0.0) throw NormalizationError("lambda coefficients have no odd component; pulse cannot return to idle");
  std::vector<double> out(raw);
  for (auto& v : out) v /= odd;
  return out;
}

std::vector<Sample> sample(const PulseParams& p, double dt) {
  if (!(dt > 0.0) || dt > p.duration) throw ConfigError("sample: require 0 < dt <= T");
  const auto n = static_cast<std::size_t>(std::ceil(p.duration / dt - 1e-12));
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t0 = double(i) * dt;
    double t1 = (i + 1 == n) ? p.duration : double(i + 1) * dt;
    double tm = 0.5 * (t0 + t1);
    out.push_back({t0, t1, tm, waveform(p, tm)});
  }
  return out;
}

double excursion_bound(const PulseParams& p) {
  double s = 0.0;
  for (double l : p.lambdas) s += std::abs(l);
  return std::abs(p.phi_amp) * s;
}

void PulsePair::validate() const {
  first.validate();
  if (!synchronous) {
    second.validate();
    if (second.duration != first.duration) throw ConfigError("pulse durations must be equal");
  }
}

nlohmann::json pulse_to_json(const PulseParams& p) {
  return {{"phi_idle", p.phi_idle}, {"phi_amp", p.phi_amp}, {"lambdas", p.lambdas}, {"duration_ns", p.duration}};
}

PulseParams pulse_from_json(const nlohmann::json& j) {
  PulseParams p;
  try {
    p.phi_idle = j.at("phi_idle").get<double>();
    p.phi_amp = j.at("phi_amp").get<double>();
    p.lambdas = j.at("lambdas").get<std::vector<double>>();
    p.duration = j.at("duration_ns").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pulse: ") + e.what());
  }
  return p;
}

nlohmann::json pulse_pair_to_json(const PulsePair& p) {
  nlohmann::json j{{"synchronous", p.synchronous}, {"pulse", pulse_to_json(p.first)}};
  if (!p.synchronous) j["pulse2"] = pulse_to_json(p.second);
  return j;
}

PulsePair pulse_pair_from_json(const nlohmann::json& j) {
  PulsePair p;
  p.synchronous = j.value("synchronous", true);
  p.first = pulse_from_json(j.at("pulse"));
  p.second = p.synchronous ? p.first : pulse_from_json(j.at("pulse2"));
  return p;
}

}  // namespace dtc
