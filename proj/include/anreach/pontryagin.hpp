#pragma once

// Extremal solver for the envelope's Markov decision problem: backward costate
// under the bang-bang rule, forward distribution under the extracted control.

#include <cstdint>
#include <span>
#include <vector>

#include "anreach/envelope.hpp"
#include "anreach/ode.hpp"

namespace anreach {

enum class Direction { Min, Max };

std::string_view to_string(Direction d);

struct TargetSpec {
  std::vector<double> weights;  // per state
  double time = 0.0;
  Direction direction = Direction::Max;

  static TargetSpec indicator(std::size_t num_states, std::size_t state, double time, Direction direction);
};

struct SolverConfig {
  double step = 0.0;  // 0 selects horizon / 3000
  bool record = true;
};

struct ExtremalSolution {
  double value = 0.0;
  std::vector<double> final_distribution;
  /// Recorded only when SolverConfig::record is set.
  Trajectory costate;
  Trajectory distribution;
  /// Control per integration step: step_times[s] is the start of step s and
  /// controls[s * m + i] the value of uncertainty i on that step.
  std::vector<double> step_times;
  std::vector<double> controls;
  /// Per uncertainty: min |psi_i| over steps whose sign agrees with both
  /// neighbours (infinity when there are none).
  std::vector<double> switching_margin;
  std::vector<std::size_t> switches;
};

std::vector<double> costate_rhs(const Envelope& env, double t, std::span<const double> p, double eps);

inline double bang_bang_rule(double psi, double bound) { return psi >= 0.0 ? bound : -bound; }

/// xi / (t_hat * n * c1 * c2).
double switching_tolerance(double xi, double t_hat, std::size_t n, double c1, double c2);
/// Same with n = number of uncertainties, c1 = max |k_i| over the grid and
/// c2 = 2 * max bound at eps.
double switching_tolerance(const Envelope& env, double xi, double t_hat, double eps);

/// Rates tabulated at the half steps of a fixed-step integration over
/// [0, t_hat]; shared read-only by every solve at that horizon.
class ExtremalKernel {
 public:
  ExtremalKernel(const Envelope& env, double t_hat, double eps, double step);

  std::size_t steps() const { return steps_; }
  double step() const { return h_; }
  double t_hat() const { return t_hat_; }

  /// Distribution at t_hat with every uncertainty held at zero.
  std::vector<double> nominal_distribution() const;

  ExtremalSolution solve(std::span<const double> weights, Direction direction, bool record) const;

  /// Distribution at t_hat under a per-step control sign (-1, 0, +1 times
  /// the bound), laid out steps x uncertainties.
  std::vector<double> forward(std::span<const std::int8_t> signs) const;

 private:
  void costate_derivative(std::size_t half, std::span<const double> p, std::span<double> dp) const;
  void forward_derivative(std::span<const double> rates, std::span<const double> pi, std::span<double> dpi) const;
  void step_rates(std::size_t half, std::span<const std::int8_t> signs, std::span<double> rates) const;
  std::vector<double> integrate_forward(std::span<const std::int8_t> signs, std::vector<double>* trace) const;

  const Envelope& env_;
  std::size_t n_states_, n_trans_, n_unc_;
  std::size_t steps_;
  double t_hat_, h_;
  std::vector<std::size_t> from_, to_;        // per transition
  std::vector<std::size_t> term_trans_;       // per uncertainty
  std::vector<double> base_;                  // half x transitions
  std::vector<double> k_;                     // half x uncertainties
  std::vector<double> kb_;                    // half x uncertainties, k_i * bound_i
  std::vector<double> spread_;                // half x transitions, sum of kb_ per transition
  std::vector<double> bounds_;
};

/// Checks envelope nonnegativity at eps, then solves on a fresh kernel.
ExtremalSolution solve_extremal(const Envelope& env, const TargetSpec& target, double eps,
                                const SolverConfig& cfg);

}  // namespace anreach
