#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "anreach/expr.hpp"

namespace anreach {

struct Transition {
  SymbolId from;
  SymbolId to;
};

struct Reaction {
  std::vector<Transition> transitions;  // multiset of atomic transitions
  RateExpr rate;
};

/// Per-state counts indexed like AgentNetwork::states.
struct Stoichiometry {
  std::vector<int> consumed;
  std::vector<int> produced;
};

/// Constant, or a piecewise-linear table of (time, value) points.
class ParamFunction {
 public:
  ParamFunction() = default;
  static ParamFunction constant(double value);
  static ParamFunction table(std::vector<std::pair<double, double>> points);

  double operator()(double t) const;
  double min_on(double t0, double t1) const;
  bool is_constant() const { return points_.empty(); }
  double constant_value() const { return value_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  double value_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

struct Parameter {
  SymbolId symbol;
  ParamFunction nominal;
  double bound = 0.0;  // |u_alpha(t)| <= bound
};

struct AgentNetwork {
  SymbolTable symbols;
  std::vector<SymbolId> states;
  std::vector<Parameter> parameters;
  std::vector<Reaction> reactions;
  std::vector<double> initial;  // per state
  double horizon = 0.0;

  SymbolId add_state(const std::string& name, double initial_value);
  SymbolId add_parameter(const std::string& name, ParamFunction nominal, double bound);
  void add_reaction(std::vector<Transition> transitions, RateExpr rate);

  std::size_t num_states() const { return states.size(); }
  /// Position of a state symbol in `states`; throws UnknownSymbol.
  std::size_t state_index(SymbolId s) const;
  bool is_state(SymbolId s) const;
  std::vector<std::string> state_names() const;
  SymbolId symbol(const std::string& name) const;
};

enum class Severity { Error, Warning };

enum class DiagnosticCode {
  BoundExceedsNominal,
  UnknownSymbol,
  NotDivisible,
  NonPositiveInitial,
  NonPositiveHorizon,
  EmptyReaction,
  InvalidParameterFunction,
  InvalidDenominator,
  MixedDenominators,
  RatePositivityUnverified,
  PositivityFloorBreached,
};

struct Diagnostic {
  Severity severity;
  DiagnosticCode code;
  std::string message;
};

std::string_view to_string(DiagnosticCode code);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Structural checks, then (if those pass) positivity of the nominal solution
/// and of the transition rates along it. Never throws.
std::vector<Diagnostic> validate(const AgentNetwork& an);

Stoichiometry stoichiometry(const AgentNetwork& an, const Reaction& r);

/// F_B(V, kappa(t) + u_K) for every state; `u_params` is indexed like
/// AgentNetwork::parameters.
std::vector<double> global_drift(const AgentNetwork& an, double t, std::span<const double> V,
                                 std::span<const double> u_params);

using TransitionRates = std::map<std::pair<std::size_t, std::size_t>, RateExpr>;

/// r_{B,C} = sum_j Theta_j / V_B over reactions containing B -> C (with
/// multiplicity); keys are state indices, identically zero rates are pruned.
TransitionRates transition_rates(const AgentNetwork& an);

struct RateEntry {
  std::size_t from;
  std::size_t to;
  double value;
};

/// Evaluates every rate at (V, kappa(t) + u_K).
std::vector<RateEntry> evaluate_transition_rates(const AgentNetwork& an, const TransitionRates& rates,
                                                 double t, std::span<const double> V,
                                                 std::span<const double> u_params);

/// f_B = -sum_C r_{B,C} pi_B + sum_C r_{C,B} pi_C.
std::vector<double> kolmogorov_drift(std::span<const RateEntry> rates, std::span<const double> pi);

struct InitialDistribution {
  std::vector<double> pi0;
  double mass;
};

InitialDistribution normalize_initial(const AgentNetwork& an);

/// Dense assignment with states, parameters (nominal + deviation) filled.
std::vector<double> state_assignment(const AgentNetwork& an, double t, std::span<const double> V,
                                     std::span<const double> u_params);

}  // namespace anreach
