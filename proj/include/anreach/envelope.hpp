#pragma once

// Affine-in-uncertainty rate representation of the decoupled atomic chain.
//
// Each transition B -> C carries a base coefficient k(t) and terms k_i(t) u_i.
// Every uncertainty u_i appears under exactly one transition and every k_i is
// nonnegative on the grid, so the extremal problem is solved by a bang-bang
// control (see pontryagin.hpp).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anreach/agent_network.hpp"
#include "anreach/expr.hpp"
#include "anreach/ode.hpp"

namespace anreach {

/// zeta / (sigma_min - zeta); throws BoundExceedsDenominator unless
/// 0 <= zeta < sigma_min.
double reciprocal_bound(double sigma_min, double zeta);

/// Symbolic uncertainty bound: factor * eps^eps_power * prod_j rec_j(eps)^power_j,
/// where rec_j(eps) = reciprocal_bound(sigma_min_j, scale_j * eps).
struct Bound {
  struct Reciprocal {
    double scale;
    double sigma_min;
    unsigned power;
    friend bool operator==(const Reciprocal&, const Reciprocal&) = default;
  };

  double factor = 0.0;
  unsigned eps_power = 0;
  std::vector<Reciprocal> reciprocal;

  static Bound constant(double value) { return {value, 0, {}}; }
  static Bound eps(double factor = 1.0, unsigned power = 1) { return {factor, power, {}}; }
  static Bound reciprocal_of(double scale, double sigma_min) { return {1.0, 0, {{scale, sigma_min, 1}}}; }

  double at(double eps) const;
  /// Largest eps for which at(eps) is finite (infinity without reciprocal factors).
  double eps_limit() const;
  std::string to_string() const;

  friend Bound operator*(const Bound& a, const Bound& b);
  friend bool operator==(const Bound&, const Bound&) = default;
};

enum class UncertaintyKind { Parameter, StateDeviation, Product, Reciprocal };

std::string_view to_string(UncertaintyKind kind);

/// One base deviation: an original parameter deviation, a state deviation,
/// or the relative deviation of a reciprocal denominator.
struct BaseDeviation {
  enum class Source { Parameter, State, Reciprocal };
  std::string name;
  Source source;
  std::size_t index;  // parameter, state, or reciprocal index
};

struct Uncertainty {
  std::string name;
  UncertaintyKind kind;
  Bound bound;
  /// Monomial over base deviations this uncertainty stands for.
  std::vector<std::pair<std::size_t, unsigned>> source;
  double sign = 1.0;  // -1 when the coefficient was negated
  bool duplicated = false;
};

struct EnvelopeTerm {
  std::size_t uncertainty;
  std::size_t coeff;
};

struct EnvelopeTransition {
  std::size_t from;
  std::size_t to;
  std::size_t base;  // coefficient index
  std::vector<EnvelopeTerm> terms;
};

/// Denominator sigma(V) = c + sum a_mu V_mu of a reciprocal deviation.
struct ReciprocalInfo {
  std::vector<std::pair<std::size_t, double>> terms;  // (state index, coefficient)
  double constant = 0.0;
  double sigma_min = 0.0;
  std::vector<double> nominal;  // sigma along V^0 on the envelope grid
};

class Envelope {
 public:
  std::size_t num_states() const { return state_names_.size(); }
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<double>& initial_distribution() const { return pi0_; }
  double mass() const { return mass_; }
  double horizon() const { return grid_.back(); }

  const std::vector<EnvelopeTransition>& transitions() const { return transitions_; }
  const std::vector<Uncertainty>& uncertainties() const { return uncertainties_; }
  const std::vector<BaseDeviation>& base_deviations() const { return base_; }
  const std::vector<ReciprocalInfo>& reciprocals() const { return reciprocals_; }

  const std::vector<double>& grid() const { return grid_; }
  std::size_t num_coefficients() const { return labels_.size(); }
  const std::string& coefficient_label(std::size_t c) const { return labels_[c]; }
  double coefficient(std::size_t c, std::size_t grid_index) const {
    return table_[grid_index * labels_.size() + c];
  }
  /// Linear interpolation of all coefficients at t.
  void coefficients_at(double t, std::span<double> out) const;

  std::vector<double> bounds_at(double eps) const;
  /// Smallest eps at which some bound diverges (reciprocal factors).
  double eps_limit() const;

  /// Description of the first (transition, grid point) where
  /// base - sum coeff * bound < 0, if any.
  std::optional<std::string> nonnegativity_violation(double eps) const;
  void check_nonnegative(double eps) const;

  /// base(t) + sum_i coeff_i(t) u_i for every transition; throws
  /// UncertaintyOutOfBounds when |u_i| exceeds its bound at eps.
  std::vector<RateEntry> evaluate_rates(double t, std::span<const double> u, double eps) const;

  /// Envelope uncertainty values that reproduce the original rates at grid
  /// point `grid_index` for original deviations (u_params, u_states).
  std::vector<double> realize(std::size_t grid_index, std::span<const double> u_params,
                              std::span<const double> u_states) const;

  /// One line per transition base and per term.
  std::string dump(double eps) const;

 private:
  friend class EnvelopeBuilder;

  std::vector<std::string> state_names_;
  std::vector<double> pi0_;
  double mass_ = 1.0;
  std::vector<double> grid_;
  std::vector<std::string> labels_;
  std::vector<double> table_;  // grid x coefficients
  std::vector<EnvelopeTransition> transitions_;
  std::vector<Uncertainty> uncertainties_;
  std::vector<BaseDeviation> base_;
  std::vector<ReciprocalInfo> reciprocals_;
};

/// Assembles an Envelope directly; also usable for chains not induced by an
/// agent network.
class EnvelopeBuilder {
 public:
  EnvelopeBuilder(std::vector<std::string> state_names, std::vector<double> pi0, double mass,
                  std::vector<double> grid);

  std::size_t add_coefficient(std::vector<double> values_on_grid, std::string label);
  std::size_t add_constant(double value);
  std::size_t add_base_deviation(BaseDeviation base);
  std::size_t add_reciprocal(ReciprocalInfo info);
  std::size_t add_uncertainty(Uncertainty u);
  void add_transition(std::size_t from, std::size_t to, std::size_t base, std::vector<EnvelopeTerm> terms);

  /// Checks that every uncertainty sits under exactly one transition and
  /// every term coefficient is nonnegative on the grid.
  Envelope build() &&;

 private:
  Envelope env_;
  std::vector<std::vector<double>> columns_;
};

/// Shift-expands every transition rate around (V^0, kappa), replaces
/// reciprocal denominators by a relative deviation, introduces product
/// uncertainties, duplicates shared uncertainties per transition and
/// normalizes coefficient signs.
Envelope build_envelope(const AgentNetwork& an, const Trajectory& nominal);

}  // namespace anreach
