#include "anreach/agent_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "anreach/error.hpp"
#include "anreach/ode.hpp"

namespace anreach {

ParamFunction ParamFunction::constant(double value) {
  ParamFunction f;
  f.value_ = value;
  return f;
}

ParamFunction ParamFunction::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidModel, "empty parameter table");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first)) {
      throw Error(ErrorCode::InvalidModel, "parameter table times must be strictly increasing");
    }
  }
  ParamFunction f;
  if (points.size() == 1) {
    f.value_ = points.front().second;
    return f;
  }
  f.points_ = std::move(points);
  return f;
}

double ParamFunction::operator()(double t) const {
  if (points_.empty()) return value_;
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

double ParamFunction::min_on(double t0, double t1) const {
  if (points_.empty()) return value_;
  double m = std::min((*this)(t0), (*this)(t1));
  for (const auto& [t, v] : points_)
    if (t > t0 && t < t1) m = std::min(m, v);
  return m;
}

SymbolId AgentNetwork::add_state(const std::string& name, double initial_value) {
  const SymbolId s = symbols.intern(name, SymbolKind::State);
  states.push_back(s);
  initial.push_back(initial_value);
  return s;
}

SymbolId AgentNetwork::add_parameter(const std::string& name, ParamFunction nominal, double bound) {
  const SymbolId s = symbols.intern(name, SymbolKind::Parameter);
  parameters.push_back({s, std::move(nominal), bound});
  return s;
}

void AgentNetwork::add_reaction(std::vector<Transition> transitions, RateExpr rate) {
  reactions.push_back({std::move(transitions), std::move(rate)});
}

std::size_t AgentNetwork::state_index(SymbolId s) const {
  auto it = std::find(states.begin(), states.end(), s);
  if (it == states.end()) {
    throw Error(ErrorCode::UnknownSymbol, "symbol id " + std::to_string(s) + " is not a state");
  }
  return static_cast<std::size_t>(it - states.begin());
}

bool AgentNetwork::is_state(SymbolId s) const {
  return std::find(states.begin(), states.end(), s) != states.end();
}

std::vector<std::string> AgentNetwork::state_names() const {
  std::vector<std::string> out;
  for (SymbolId s : states) out.push_back(symbols.name(s));
  return out;
}

SymbolId AgentNetwork::symbol(const std::string& name) const {
  auto s = symbols.find(name);
  if (!s) throw Error(ErrorCode::UnknownSymbol, "unknown symbol '" + name + "'");
  return *s;
}

std::string_view to_string(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::BoundExceedsNominal: return "BoundExceedsNominal";
    case DiagnosticCode::UnknownSymbol: return "UnknownSymbol";
    case DiagnosticCode::NotDivisible: return "NotDivisible";
    case DiagnosticCode::NonPositiveInitial: return "NonPositiveInitial";
    case DiagnosticCode::NonPositiveHorizon: return "NonPositiveHorizon";
    case DiagnosticCode::EmptyReaction: return "EmptyReaction";
    case DiagnosticCode::InvalidParameterFunction: return "InvalidParameterFunction";
    case DiagnosticCode::InvalidDenominator: return "InvalidDenominator";
    case DiagnosticCode::MixedDenominators: return "MixedDenominators";
    case DiagnosticCode::RatePositivityUnverified: return "RatePositivityUnverified";
    case DiagnosticCode::PositivityFloorBreached: return "PositivityFloorBreached";
  }
  return "Unknown";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

bool is_parameter(const AgentNetwork& an, SymbolId s) {
  return std::any_of(an.parameters.begin(), an.parameters.end(),
                     [s](const Parameter& p) { return p.symbol == s; });
}

std::string joined_name(const AgentNetwork& an, SymbolId s) {
  return s < an.symbols.size() ? an.symbols.name(s) : "#" + std::to_string(s);
}

}  // namespace

std::vector<Diagnostic> validate(const AgentNetwork& an) {
  std::vector<Diagnostic> out;
  auto error = [&](DiagnosticCode c, std::string msg) {
    out.push_back({Severity::Error, c, std::move(msg)});
  };

  if (!(an.horizon > 0.0)) error(DiagnosticCode::NonPositiveHorizon, "horizon must be positive");
  if (an.initial.size() != an.states.size()) {
    error(DiagnosticCode::NonPositiveInitial, "initial condition does not cover every state");
  }
  for (std::size_t i = 0; i < an.states.size() && i < an.initial.size(); ++i) {
    if (!(an.initial[i] > 0.0)) {
      error(DiagnosticCode::NonPositiveInitial,
            "initial value of state '" + an.symbols.name(an.states[i]) + "' must be strictly positive");
    }
  }

  const double T = an.horizon > 0.0 ? an.horizon : 0.0;
  for (const auto& p : an.parameters) {
    const auto& name = an.symbols.name(p.symbol);
    if (!p.nominal.is_constant()) {
      const auto& pts = p.nominal.points();
      if (pts.front().first > 0.0 || pts.back().first < T) {
        error(DiagnosticCode::InvalidParameterFunction,
              "parameter table of '" + name + "' does not cover [0, horizon]");
      }
    }
    const double lo = p.nominal.min_on(0.0, T);
    if (!(lo > 0.0)) {
      error(DiagnosticCode::InvalidParameterFunction,
            "nominal value of '" + name + "' must stay strictly positive");
    }
    if (p.bound < 0.0) {
      error(DiagnosticCode::BoundExceedsNominal, "bound of '" + name + "' must be nonnegative");
    } else if (p.bound > 0.0 && p.bound >= lo) {
      std::ostringstream os;
      os << "bound " << p.bound << " of '" << name
         << "' must be strictly below the minimum nominal value " << lo
         << " (admissible uncertainties keep parameters positive)";
      error(DiagnosticCode::BoundExceedsNominal, os.str());
    }
  }

  bool structural_ok = true;
  for (std::size_t j = 0; j < an.reactions.size(); ++j) {
    const auto& r = an.reactions[j];
    const std::string tag = "reaction " + std::to_string(j);
    if (r.transitions.empty()) {
      error(DiagnosticCode::EmptyReaction, tag + " has no transitions");
      structural_ok = false;
    }
    for (const auto& tr : r.transitions) {
      for (SymbolId s : {tr.from, tr.to}) {
        if (!an.is_state(s)) {
          error(DiagnosticCode::UnknownSymbol, tag + " references undeclared state '" + joined_name(an, s) + "'");
          structural_ok = false;
        }
      }
    }
    for (SymbolId s : r.rate.symbols()) {
      if (!an.is_state(s) && !is_parameter(an, s)) {
        error(DiagnosticCode::UnknownSymbol, tag + " rate references undeclared symbol '" + joined_name(an, s) + "'");
        structural_ok = false;
      }
    }
    if (r.rate.denominator) {
      const auto& d = *r.rate.denominator;
      bool ok = d.constant >= 0.0 && !d.terms.empty();
      for (const auto& [s, a] : d.terms) ok = ok && an.is_state(s) && a > 0.0;
      if (!ok) {
        error(DiagnosticCode::InvalidDenominator,
              tag + " denominator must be an affine form in states with positive coefficients");
        structural_ok = false;
      }
      for (const auto& p : an.parameters) {
        if (r.rate.numerator.max_degree_in(p.symbol) > 1) {
          error(DiagnosticCode::InvalidDenominator,
                tag + " has a denominator and a parameter exponent above 1");
          structural_ok = false;
        }
      }
    }
  }

  if (structural_ok) {
    try {
      (void)transition_rates(an);
    } catch (const Error& e) {
      error(e.code() == ErrorCode::MixedDenominators ? DiagnosticCode::MixedDenominators
                                                     : DiagnosticCode::NotDivisible,
            e.what());
      structural_ok = false;
    }
  }

  if (!structural_ok || has_errors(out)) return out;

  try {
    const auto nominal = nominal_trajectory(an, IntegratorConfig{});
    const auto rates = transition_rates(an);
    const std::vector<double> zero(an.parameters.size(), 0.0);
    bool warned = false;
    for (std::size_t i = 0; i < nominal.trajectory.size() && !warned; ++i) {
      const auto entries = evaluate_transition_rates(an, rates, nominal.trajectory.times()[i],
                                                     nominal.trajectory.value(i), zero);
      for (const auto& e : entries) {
        if (!(e.value >= 0.0)) {
          out.push_back({Severity::Warning, DiagnosticCode::RatePositivityUnverified,
                         "rate " + an.symbols.name(an.states[e.from]) + "->" +
                             an.symbols.name(an.states[e.to]) + " is negative on the nominal solution"});
          warned = true;
          break;
        }
      }
    }
  } catch (const Error& e) {
    error(DiagnosticCode::PositivityFloorBreached, e.what());
  }
  return out;
}

Stoichiometry stoichiometry(const AgentNetwork& an, const Reaction& r) {
  Stoichiometry s{std::vector<int>(an.num_states(), 0), std::vector<int>(an.num_states(), 0)};
  for (const auto& tr : r.transitions) {
    ++s.consumed[an.state_index(tr.from)];
    ++s.produced[an.state_index(tr.to)];
  }
  return s;
}

std::vector<double> state_assignment(const AgentNetwork& an, double t, std::span<const double> V,
                                     std::span<const double> u_params) {
  auto values = make_assignment(an.symbols.size());
  for (std::size_t i = 0; i < an.states.size(); ++i) values[an.states[i]] = V[i];
  for (std::size_t a = 0; a < an.parameters.size(); ++a) {
    const auto& p = an.parameters[a];
    values[p.symbol] = p.nominal(t) + (u_params.empty() ? 0.0 : u_params[a]);
  }
  return values;
}

std::vector<double> global_drift(const AgentNetwork& an, double t, std::span<const double> V,
                                 std::span<const double> u_params) {
  const auto values = state_assignment(an, t, V, u_params);
  std::vector<double> dV(an.num_states(), 0.0);
  for (const auto& r : an.reactions) {
    const double theta = eval(r.rate, values);
    for (const auto& tr : r.transitions) {
      dV[an.state_index(tr.from)] -= theta;
      dV[an.state_index(tr.to)] += theta;
    }
  }
  return dV;
}

TransitionRates transition_rates(const AgentNetwork& an) {
  TransitionRates rates;
  for (const auto& r : an.reactions) {
    for (const auto& tr : r.transitions) {
      if (tr.from == tr.to) continue;
      const std::size_t b = an.state_index(tr.from);
      const std::size_t c = an.state_index(tr.to);
      RateExpr piece{divide_by_state(r.rate.numerator, tr.from), r.rate.denominator};
      auto [it, inserted] = rates.try_emplace({b, c}, piece);
      if (!inserted) {
        if (it->second.denominator != piece.denominator) {
          throw Error(ErrorCode::MixedDenominators,
                      "transition " + an.symbols.name(tr.from) + "->" + an.symbols.name(tr.to) +
                          " sums rates with different denominators");
        }
        it->second.numerator += piece.numerator;
      }
    }
  }
  std::erase_if(rates, [](const auto& kv) { return kv.second.numerator.is_zero(); });
  return rates;
}

std::vector<RateEntry> evaluate_transition_rates(const AgentNetwork& an, const TransitionRates& rates,
                                                 double t, std::span<const double> V,
                                                 std::span<const double> u_params) {
  const auto values = state_assignment(an, t, V, u_params);
  std::vector<RateEntry> out;
  out.reserve(rates.size());
  for (const auto& [key, expr] : rates) out.push_back({key.first, key.second, eval(expr, values)});
  return out;
}

std::vector<double> kolmogorov_drift(std::span<const RateEntry> rates, std::span<const double> pi) {
  std::vector<double> f(pi.size(), 0.0);
  for (const auto& r : rates) {
    if (r.from == r.to) continue;
    const double flow = r.value * pi[r.from];
    f[r.from] -= flow;
    f[r.to] += flow;
  }
  return f;
}

InitialDistribution normalize_initial(const AgentNetwork& an) {
  double mass = 0.0;
  for (double v : an.initial) mass += v;
  std::vector<double> pi0(an.initial.size());
  for (std::size_t i = 0; i < pi0.size(); ++i) pi0[i] = an.initial[i] / mass;
  return {std::move(pi0), mass};
}

}  // namespace anreach
