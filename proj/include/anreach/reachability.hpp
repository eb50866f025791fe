#pragma once

// Psi(eps) over a time grid, the fixed-point iteration for the deviation
// bound, and reach-tube assembly.

#include <optional>
#include <string>
#include <vector>

#include "anreach/agent_network.hpp"
#include "anreach/envelope.hpp"
#include "anreach/ode.hpp"
#include "anreach/pontryagin.hpp"

namespace anreach {

struct GridSpec {
  double dt = 0.04;

  /// {0, dt, 2 dt, ...} below horizon, plus the horizon itself.
  std::vector<double> times(double horizon) const;
};

enum class Scale { Mass, Unit };

std::string_view to_string(Scale s);
std::optional<Scale> parse_scale(std::string_view s);

struct PsiConfig {
  Scale scale = Scale::Mass;
  double step = 0.0;  // extremal solver step, 0 selects horizon / 3000
  int threads = 0;    // 0 leaves the OpenMP default
};

struct ExtremalRecord {
  std::size_t state;
  double time;
  double nominal;  // pi^0
  double min;
  double max;
  double deviation() const;
};

struct PsiEvaluation {
  double value = 0.0;
  std::vector<ExtremalRecord> records;  // ordered by (time, state)
  std::size_t solves = 0;
  std::size_t argmax = 0;  // index into records
};

PsiEvaluation evaluate_psi(const Envelope& env, const GridSpec& grid, double eps, const PsiConfig& cfg);
/// Single-threaded reference with the same results.
PsiEvaluation evaluate_psi_serial(const Envelope& env, const GridSpec& grid, double eps, const PsiConfig& cfg);

struct FixedPointConfig {
  double eta = 1e-3;
  int max_iter = 50;
  Scale scale = Scale::Mass;
  IntegratorConfig integrator;  // nominal trajectory
  double solver_step = 0.0;
  int threads = 0;
};

enum class TubeStatus { Certified, FailedEpsPrime, MaxIterations };

std::string_view to_string(TubeStatus s);

struct ReachTube {
  TubeStatus status = TubeStatus::MaxIterations;
  double eps_star = 0.0;  // meaningful when Certified
  std::vector<double> iterates;
  std::vector<double> psi_values;
  std::vector<double> times;
  std::vector<std::string> state_names;
  std::vector<std::vector<double>> nominal;  // [time][state]
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
  double eps_prime = 0.0;
  std::size_t solves = 0;
  double wall_time_s = 0.0;
  std::string message;
};

ReachTube fixed_point_bound(const AgentNetwork& an, const GridSpec& grid, const FixedPointConfig& cfg);

/// Max over grid points and states of outflow + inflow rate at the widest
/// admissible rates; bounds the sup norm of the Kolmogorov drift for
/// distributions.
double lambda_bound(const Envelope& env, double eps);

struct RefinementStep {
  double dt;
  TubeStatus status;
  double eps_star;
  std::optional<double> relative_change;  // against the previous step
};

std::vector<RefinementStep> refine_grid(const AgentNetwork& an, const FixedPointConfig& cfg,
                                        const std::vector<double>& dt_sequence);

}  // namespace anreach
