#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "dtc/gate.hpp"

namespace dtc {

std::vector<double> pulse_to_free(const PulseParams& p) {
  std::vector<double> x{p.phi_amp};
  for (std::size_t k = 1; k < p.lambdas.size(); ++k) x.push_back(p.lambdas[k]);
  return x;
}

PulseParams free_to_pulse(const PulseParams& base, const std::vector<double>& x) {
  if (x.size() != base.lambdas.size()) throw ConfigError("free parameter vector has wrong length");
  PulseParams p = base;
  p.phi_amp = x[0];
  double odd_rest = 0.0;
  for (std::size_t k = 1; k < p.lambdas.size(); ++k) {
    p.lambdas[k] = x[k];
    if (k % 2 == 0) odd_rest += x[k];
  }
  p.lambdas[0] = 1.0 - odd_rest;
  return p;
}

double gate_cost(const GateResult& g, const CalibrationOptions& opt) {
  return opt.w_leak * (g.eps01 + g.eps10 + g.eps_leak) + opt.w_phi * g.delta_phi * g.delta_phi;
}

namespace {

constexpr double kPenalty = 10.0;

struct Objective {
  const GateSimulator* sim;
  const PulseParams* base;
  const CalibrationOptions* opt;
  int evaluations = 0;
  double best_f = INFINITY;
  std::vector<double> best_x;

  double operator()(const std::vector<double>& x) {
    ++evaluations;
    double f = kPenalty;
    try {
      PulseParams p = free_to_pulse(*base, x);
      p.validate();
      f = gate_cost(sim->run(PulsePair::same(p), opt->propagation), *opt);
    } catch (const Error&) {
      // Invalid or numerically unusable pulses are steered away from, not fatal.
    }
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    return f;
  }
};

double gsl_trampoline(const gsl_vector* v, void* params) {
  auto* obj = static_cast<Objective*>(params);
  std::vector<double> x(v->size);
  for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
  return (*obj)(x);
}

RestartRecord run_simplex(const GateSimulator& sim, const PulseParams& base, const CalibrationOptions& opt,
                          const std::vector<double>& start) {
  Objective obj{&sim, &base, &opt};
  const std::size_t n = start.size();
  gsl_multimin_function fn{&gsl_trampoline, n, &obj};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, start[i]);
    gsl_vector_set(step, i, i == 0 ? opt.step_amp : opt.step_lambda);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);

  RestartRecord rec;
  rec.start = start;
  // The simplex's own best vertex is not reported before the first iteration,
  // so the record tracks the best point evaluated so far.
  rec.history.push_back(obj.best_f);
  while (obj.evaluations < opt.max_evals) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    rec.history.push_back(obj.best_f);
    if (obj.best_f < 0.01 * opt.success_cost) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.simplex_tol) == GSL_SUCCESS) break;
  }
  rec.best_cost = obj.best_f;
  rec.best_x = obj.best_x.empty() ? start : obj.best_x;
  rec.evaluations = obj.evaluations;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return rec;
}

}  // namespace

CalibrationReport calibrate(const GateSimulator& sim, const PulseParams& initial, const CalibrationOptions& opt) {
  if (opt.restarts < 1) throw ConfigError("calibration needs at least one restart");
  if (opt.max_evals < 1) throw ConfigError("calibration needs max_evals >= 1");
  initial.validate();
  gsl_set_error_handler_off();

  // Restart 0 starts from the initial guess; the rest are jittered from it
  // with generators seeded independently per restart index.
  const std::vector<double> x0 = pulse_to_free(initial);
  std::vector<std::vector<double>> starts;
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> s = x0;
    if (r > 0) {
      std::seed_seq seq{static_cast<std::uint64_t>(opt.seed), static_cast<std::uint64_t>(r)};
      std::mt19937_64 rng(seq);
      auto unit = [&] { return double(rng() >> 11) * 0x1.0p-53; };  // [0, 1)
      s[0] *= 0.85 + 0.3 * unit();
      for (std::size_t i = 1; i < s.size(); ++i) s[i] += 0.3 * (unit() - 0.5);
    }
    starts.push_back(s);
  }

  // Cells are shared; build the largest plausible range before fanning out so
  // worker threads rarely contend on the builder lock.
  for (const auto& s : starts) {
    try {
      sim.prepare(free_to_pulse(initial, s));
    } catch (const ConfigError&) {
    }
  }

  std::vector<RestartRecord> runs(starts.size());
  parallel_for(starts.size(), std::max(1, opt.workers),
               [&](std::size_t r) { runs[r] = run_simplex(sim, initial, opt, starts[r]); });

  CalibrationReport rep;
  rep.restarts = opt.restarts;
  rep.seed = opt.seed;
  rep.runs = runs;
  rep.best_restart = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    rep.evaluations += runs[r].evaluations;
    if (runs[r].best_cost < runs[rep.best_restart].best_cost) rep.best_restart = static_cast<int>(r);
  }
  const RestartRecord& best = runs[rep.best_restart];
  rep.best = free_to_pulse(initial, best.best_x);
  rep.cost_history = best.history;
  rep.final = sim.run(PulsePair::same(rep.best), opt.propagation);
  rep.best_cost = gate_cost(rep.final, opt);
  rep.success = rep.best_cost < opt.success_cost;
  return rep;
}

}  // namespace dtc
