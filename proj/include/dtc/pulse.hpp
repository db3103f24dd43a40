#pragma once

#include <utility>
#include <vector>

#include "json.hpp"

namespace dtc {

// Phi(t) = phi_idle + phi_amp - (phi_amp / 2) sum_k lambda_k [1 - cos(2 k pi (t - T/2) / T)]
struct PulseParams {
  double phi_idle = 0.3;
  double phi_amp = 0.2;
  std::vector<double> lambdas{1.0, 0.0, 0.0};
  double duration = 350.0;  // ns

  int order() const { return static_cast<int>(lambdas.size()); }
  void validate() const;
  bool operator==(const PulseParams&) const = default;
};

double waveform(const PulseParams& p, double t);
double waveform_derivative(const PulseParams& p, double t);

std::vector<double> normalize(const std::vector<double>& raw);

struct Sample {
  double t0, t1, t_mid, flux;
};
std::vector<Sample> sample(const PulseParams& p, double dt);

// Upper bound on |Phi(t) - phi_idle| from the coefficients alone.
double excursion_bound(const PulseParams& p);

// Both couplers share one pulse unless `synchronous` is false.
struct PulsePair {
  PulseParams first;
  PulseParams second;
  bool synchronous = true;

  static PulsePair same(const PulseParams& p) { return {p, p, true}; }
  const PulseParams& channel(int c) const { return (c == 2 && !synchronous) ? second : first; }
  double duration() const { return first.duration; }
  void validate() const;
  bool operator==(const PulsePair&) const = default;
};

nlohmann::json pulse_to_json(const PulseParams& p);
PulseParams pulse_from_json(const nlohmann::json& j);
nlohmann::json pulse_pair_to_json(const PulsePair& p);
PulsePair pulse_pair_from_json(const nlohmann::json& j);

}  // namespace dtc
