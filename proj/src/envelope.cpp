#include "anreach/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "anreach/error.hpp"

namespace anreach {

double reciprocal_bound(double sigma_min, double zeta) {
  if (!(zeta >= 0.0) || !(zeta < sigma_min)) {
    std::ostringstream os;
    os << "denominator deviation " << zeta << " must lie in [0, " << sigma_min << ")";
    throw Error(ErrorCode::BoundExceedsDenominator, os.str());
  }
  return zeta / (sigma_min - zeta);
}

double Bound::at(double eps) const {
  double b = factor;
  for (unsigned k = 0; k < eps_power; ++k) b *= eps;
  for (const auto& r : reciprocal) {
    const double rec = reciprocal_bound(r.sigma_min, r.scale * eps);
    for (unsigned k = 0; k < r.power; ++k) b *= rec;
  }
  return b;
}

double Bound::eps_limit() const {
  double lim = std::numeric_limits<double>::infinity();
  for (const auto& r : reciprocal)
    if (r.scale > 0.0) lim = std::min(lim, r.sigma_min / r.scale);
  return lim;
}

std::string Bound::to_string() const {
  std::ostringstream os;
  os.precision(6);
  os << factor;
  if (eps_power == 1) os << "*eps";
  if (eps_power > 1) os << "*eps^" << eps_power;
  for (const auto& r : reciprocal) {
    os << "*rec(" << r.scale << "*eps; " << r.sigma_min << ")";
    if (r.power > 1) os << "^" << r.power;
  }
  return os.str();
}

Bound operator*(const Bound& a, const Bound& b) {
  Bound out{a.factor * b.factor, a.eps_power + b.eps_power, a.reciprocal};
  for (const auto& r : b.reciprocal) {
    auto it = std::find_if(out.reciprocal.begin(), out.reciprocal.end(), [&](const Bound::Reciprocal& x) {
      return x.scale == r.scale && x.sigma_min == r.sigma_min;
    });
    if (it != out.reciprocal.end()) {
      it->power += r.power;
    } else {
      out.reciprocal.push_back(r);
    }
  }
  return out;
}

std::string_view to_string(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::Parameter: return "parameter";
    case UncertaintyKind::StateDeviation: return "state";
    case UncertaintyKind::Product: return "product";
    case UncertaintyKind::Reciprocal: return "reciprocal";
  }
  return "?";
}

void Envelope::coefficients_at(double t, std::span<double> out) const {
  const std::size_t nc = labels_.size();
  const double* row_lo = nullptr;
  const double* row_hi = nullptr;
  double w = 0.0;
  if (t <= grid_.front()) {
    row_lo = row_hi = table_.data();
  } else if (t >= grid_.back()) {
    row_lo = row_hi = table_.data() + (grid_.size() - 1) * nc;
  } else {
    const auto hi = static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), t) - grid_.begin());
    const std::size_t lo = hi - 1;
    w = (t - grid_[lo]) / (grid_[hi] - grid_[lo]);
    row_lo = table_.data() + lo * nc;
    row_hi = table_.data() + hi * nc;
  }
  for (std::size_t c = 0; c < nc; ++c) out[c] = (1.0 - w) * row_lo[c] + w * row_hi[c];
}

std::vector<double> Envelope::bounds_at(double eps) const {
  std::vector<double> b(uncertainties_.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = uncertainties_[i].bound.at(eps);
  return b;
}

double Envelope::eps_limit() const {
  double lim = std::numeric_limits<double>::infinity();
  for (const auto& u : uncertainties_) lim = std::min(lim, u.bound.eps_limit());
  return lim;
}

std::optional<std::string> Envelope::nonnegativity_violation(double eps) const {
  if (!(eps < eps_limit())) {
    std::ostringstream os;
    os << "eps " << eps << " reaches the reciprocal limit " << eps_limit() << "; choose a smaller eps cap";
    return os.str();
  }
  const auto b = bounds_at(eps);
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    for (const auto& tr : transitions_) {
      const double base = coefficient(tr.base, g);
      double low = base;
      for (const auto& term : tr.terms) low -= coefficient(term.coeff, g) * b[term.uncertainty];
      if (low < -1e-14 * std::max(1.0, std::abs(base))) {
        std::ostringstream os;
        os << "rate " << state_names_[tr.from] << "->" << state_names_[tr.to] << " can reach " << low
           << " at t=" << grid_[g] << " for eps=" << eps << "; choose a smaller eps cap";
        return os.str();
      }
    }
  }
  return std::nullopt;
}

void Envelope::check_nonnegative(double eps) const {
  if (auto msg = nonnegativity_violation(eps)) throw Error(ErrorCode::EnvelopeNonnegativityViolated, *msg);
}

std::vector<RateEntry> Envelope::evaluate_rates(double t, std::span<const double> u, double eps) const {
  if (u.size() != uncertainties_.size()) {
    throw Error(ErrorCode::InvalidArgument, "uncertainty vector has the wrong size");
  }
  const auto b = bounds_at(eps);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > b[i] * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream os;
      os << uncertainties_[i].name << " = " << u[i] << " exceeds its bound " << b[i];
      throw Error(ErrorCode::UncertaintyOutOfBounds, os.str());
    }
  }
  std::vector<double> k(labels_.size());
  coefficients_at(t, k);
  std::vector<RateEntry> out;
  out.reserve(transitions_.size());
  for (const auto& tr : transitions_) {
    double r = k[tr.base];
    for (const auto& term : tr.terms) r += k[term.coeff] * u[term.uncertainty];
    out.push_back({tr.from, tr.to, r});
  }
  return out;
}

std::vector<double> Envelope::realize(std::size_t grid_index, std::span<const double> u_params,
                                      std::span<const double> u_states) const {
  std::vector<double> base(base_.size());
  for (std::size_t j = 0; j < base_.size(); ++j) {
    const auto& b = base_[j];
    switch (b.source) {
      case BaseDeviation::Source::Parameter: base[j] = u_params[b.index]; break;
      case BaseDeviation::Source::State: base[j] = u_states[b.index]; break;
      case BaseDeviation::Source::Reciprocal: {
        const auto& rec = reciprocals_[b.index];
        double delta = 0.0;
        for (const auto& [s, a] : rec.terms) delta += a * u_states[s];
        const double sigma = rec.nominal[grid_index];
        base[j] = -delta / (sigma + delta);
        break;
      }
    }
  }
  std::vector<double> u(uncertainties_.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double v = uncertainties_[i].sign;
    for (const auto& [j, e] : uncertainties_[i].source)
      for (unsigned k = 0; k < e; ++k) v *= base[j];
    u[i] = v;
  }
  return u;
}

std::string Envelope::dump(double eps) const {
  std::ostringstream os;
  os.precision(8);
  os << "# envelope: " << transitions_.size() << " transitions, " << uncertainties_.size()
     << " uncertainties, eps = " << eps << "\n";
  for (const auto& tr : transitions_) {
    os << state_names_[tr.from] << " -> " << state_names_[tr.to] << "  base = " << labels_[tr.base] << "\n";
    for (const auto& term : tr.terms) {
      const auto& u = uncertainties_[term.uncertainty];
      os << "  + (" << labels_[term.coeff] << ") * " << u.name << "  [" << to_string(u.kind)
         << (u.duplicated ? ", duplicated" : "") << "]  |u| <= " << u.bound.to_string();
      try {
        os << " = " << u.bound.at(eps);
      } catch (const Error&) {
        os << " = inf";
      }
      os << "\n";
    }
  }
  return os.str();
}

EnvelopeBuilder::EnvelopeBuilder(std::vector<std::string> state_names, std::vector<double> pi0, double mass,
                                 std::vector<double> grid) {
  if (grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "envelope grid needs at least two points");
  if (pi0.size() != state_names.size()) throw Error(ErrorCode::InvalidArgument, "initial distribution size mismatch");
  env_.state_names_ = std::move(state_names);
  env_.pi0_ = std::move(pi0);
  env_.mass_ = mass;
  env_.grid_ = std::move(grid);
}

std::size_t EnvelopeBuilder::add_coefficient(std::vector<double> values_on_grid, std::string label) {
  if (values_on_grid.size() != env_.grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "coefficient does not match the envelope grid");
  }
  for (double v : values_on_grid)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "coefficient '" + label + "' is not finite");
  columns_.push_back(std::move(values_on_grid));
  env_.labels_.push_back(std::move(label));
  return columns_.size() - 1;
}

std::size_t EnvelopeBuilder::add_constant(double value) {
  std::ostringstream os;
  os.precision(12);
  os << value;
  return add_coefficient(std::vector<double>(env_.grid_.size(), value), os.str());
}

std::size_t EnvelopeBuilder::add_base_deviation(BaseDeviation base) {
  env_.base_.push_back(std::move(base));
  return env_.base_.size() - 1;
}

std::size_t EnvelopeBuilder::add_reciprocal(ReciprocalInfo info) {
  env_.reciprocals_.push_back(std::move(info));
  return env_.reciprocals_.size() - 1;
}

std::size_t EnvelopeBuilder::add_uncertainty(Uncertainty u) {
  env_.uncertainties_.push_back(std::move(u));
  return env_.uncertainties_.size() - 1;
}

void EnvelopeBuilder::add_transition(std::size_t from, std::size_t to, std::size_t base,
                                     std::vector<EnvelopeTerm> terms) {
  const std::size_t n = env_.state_names_.size();
  if (from >= n || to >= n || from == to) throw Error(ErrorCode::InvalidArgument, "invalid transition endpoints");
  env_.transitions_.push_back({from, to, base, std::move(terms)});
}

Envelope EnvelopeBuilder::build() && {
  std::vector<int> uses(env_.uncertainties_.size(), 0);
  for (const auto& tr : env_.transitions_) {
    for (const auto& term : tr.terms) {
      if (term.uncertainty >= uses.size() || term.coeff >= columns_.size()) {
        throw Error(ErrorCode::InvalidArgument, "term references an unknown uncertainty or coefficient");
      }
      ++uses[term.uncertainty];
      for (double v : columns_[term.coeff]) {
        if (v < 0.0) {
          throw Error(ErrorCode::SignChangingCoefficient,
                      "coefficient of " + env_.uncertainties_[term.uncertainty].name + " is negative");
        }
      }
    }
  }
  for (std::size_t i = 0; i < uses.size(); ++i) {
    if (uses[i] != 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "uncertainty " + env_.uncertainties_[i].name + " must affect exactly one transition");
    }
  }
  const std::size_t nc = columns_.size();
  env_.table_.assign(env_.grid_.size() * nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t g = 0; g < env_.grid_.size(); ++g) env_.table_[g * nc + c] = columns_[c][g];
  return std::move(env_);
}

namespace {

enum class Sign { Zero, Positive, Negative, Mixed };

Sign classify(const std::vector<double>& values) {
  bool pos = false, neg = false;
  for (double v : values) {
    pos = pos || v > 0.0;
    neg = neg || v < 0.0;
  }
  if (pos && neg) return Sign::Mixed;
  if (pos) return Sign::Positive;
  if (neg) return Sign::Negative;
  return Sign::Zero;
}

struct Occurrence {
  std::size_t transition;
  Polynomial coeff;
};

}  // namespace

Envelope build_envelope(const AgentNetwork& an, const Trajectory& nominal) {
  SymbolTable symbols = an.symbols;
  const auto rates = transition_rates(an);
  const auto& grid = nominal.times();

  std::set<SymbolId> uncertain_params;
  for (const auto& p : an.parameters)
    if (p.bound > 0.0) uncertain_params.insert(p.symbol);

  struct Denominator {
    AffineForm form;
    SymbolId inverse;
    SymbolId deviation;
  };
  std::vector<Denominator> denominators;

  struct Expanded {
    std::size_t from, to;
    std::map<Exponents, Polynomial> groups;  // by deviation exponents
  };
  std::vector<Expanded> expanded;

  for (const auto& [key, expr] : rates) {
    std::set<SymbolId> shifted = uncertain_params;
    for (SymbolId s : expr.numerator.symbols())
      if (an.is_state(s)) shifted.insert(s);
    Polynomial p = shift_expand(expr.numerator, shifted, symbols);

    if (expr.denominator) {
      for (const auto& [s, a] : expr.denominator->terms) {
        if (!an.is_state(s)) {
          throw Error(ErrorCode::NonAffineDenominatorUncertainty,
                      "denominator symbol '" + symbols.name(s) + "' is not a state");
        }
      }
      auto it = std::find_if(denominators.begin(), denominators.end(),
                             [&](const Denominator& d) { return d.form == *expr.denominator; });
      if (it == denominators.end()) {
        const auto k = std::to_string(denominators.size());
        Denominator d{*expr.denominator, symbols.intern("inv_sigma" + k, SymbolKind::Nominal),
                      symbols.intern("u_rec" + k, SymbolKind::Deviation)};
        denominators.push_back(d);
        it = denominators.end() - 1;
      }
      // 1 / (sigma0 + delta) = (1 / sigma0) (1 + u_rec)
      const Polynomial relative({{1.0, {{it->inverse, 1}}}, {1.0, {{it->inverse, 1}, {it->deviation, 1}}}});
      p = p * relative;
    }

    Expanded e{key.first, key.second, {}};
    for (const auto& m : p.monomials()) {
      auto [dev, rest] = split_deviation(m, symbols);
      e.groups[dev] += Polynomial(std::vector<Monomial>{rest});
    }
    expanded.push_back(std::move(e));
  }

  // Nominal-valued symbols along the grid.
  std::vector<std::vector<double>> sigma_nominal(denominators.size(), std::vector<double>(grid.size()));
  std::vector<std::vector<double>> assignments(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto values = make_assignment(symbols.size());
    const auto V = nominal.value(g);
    for (const auto& p : an.parameters) values[p.symbol] = p.nominal(grid[g]);
    for (SymbolId s = 0; s < symbols.size(); ++s) {
      const auto& info = symbols.info(s);
      if (info.kind != SymbolKind::Nominal || !info.origin) continue;
      const SymbolId o = *info.origin;
      if (an.is_state(o)) {
        values[s] = V[an.state_index(o)];
      } else {
        values[s] = values[o];
      }
    }
    std::vector<double> state_values = make_assignment(symbols.size());
    for (std::size_t i = 0; i < an.states.size(); ++i) state_values[an.states[i]] = V[i];
    for (std::size_t k = 0; k < denominators.size(); ++k) {
      const double sigma = denominators[k].form.eval(state_values);
      if (!(sigma > 0.0)) {
        throw Error(ErrorCode::NonPositiveDenominator, "denominator vanishes on the nominal solution");
      }
      sigma_nominal[k][g] = sigma;
      values[denominators[k].inverse] = 1.0 / sigma;
    }
    assignments[g] = std::move(values);
  }

  auto tabulate = [&](const Polynomial& p) {
    std::vector<double> v(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) v[g] = p.eval(assignments[g]);
    return v;
  };

  const auto pi = normalize_initial(an);
  EnvelopeBuilder builder(an.state_names(), pi.pi0, pi.mass, grid);

  std::vector<std::size_t> reciprocal_index;
  for (std::size_t k = 0; k < denominators.size(); ++k) {
    ReciprocalInfo info;
    info.constant = denominators[k].form.constant;
    for (const auto& [s, a] : denominators[k].form.terms) info.terms.emplace_back(an.state_index(s), a);
    info.nominal = sigma_nominal[k];
    info.sigma_min = *std::min_element(info.nominal.begin(), info.nominal.end());
    reciprocal_index.push_back(builder.add_reciprocal(std::move(info)));
  }

  // Base deviations and their bounds.
  std::map<SymbolId, std::size_t> base_of;
  std::vector<Bound> base_bound;
  std::vector<UncertaintyKind> base_kind;
  auto base_index = [&](SymbolId s) -> std::size_t {
    if (auto it = base_of.find(s); it != base_of.end()) return it->second;
    BaseDeviation b{symbols.name(s), BaseDeviation::Source::Parameter, 0};
    const auto& info = symbols.info(s);
    auto d = std::find_if(denominators.begin(), denominators.end(),
                          [s](const Denominator& x) { return x.deviation == s; });
    if (d != denominators.end()) {
      const auto k = static_cast<std::size_t>(d - denominators.begin());
      b.source = BaseDeviation::Source::Reciprocal;
      b.index = reciprocal_index[k];
      double scale = 0.0;
      for (const auto& term : d->form.terms) scale += std::abs(term.second);
      const double smin = *std::min_element(sigma_nominal[k].begin(), sigma_nominal[k].end());
      base_bound.push_back(Bound::reciprocal_of(scale, smin));
      base_kind.push_back(UncertaintyKind::Reciprocal);
    } else if (info.origin && an.is_state(*info.origin)) {
      b.source = BaseDeviation::Source::State;
      b.index = an.state_index(*info.origin);
      base_bound.push_back(Bound::eps());
      base_kind.push_back(UncertaintyKind::StateDeviation);
    } else if (info.origin) {
      const SymbolId o = *info.origin;
      auto p = std::find_if(an.parameters.begin(), an.parameters.end(),
                            [o](const Parameter& x) { return x.symbol == o; });
      if (p == an.parameters.end()) {
        throw Error(ErrorCode::UnknownSymbol, "deviation '" + symbols.name(s) + "' has no parameter");
      }
      b.index = static_cast<std::size_t>(p - an.parameters.begin());
      base_bound.push_back(Bound::constant(p->bound));
      base_kind.push_back(UncertaintyKind::Parameter);
    } else {
      throw Error(ErrorCode::UnknownSymbol, "deviation '" + symbols.name(s) + "' has no origin");
    }
    const std::size_t idx = builder.add_base_deviation(std::move(b));
    base_of.emplace(s, idx);
    return idx;
  };

  // Primary uncertainties in order of first appearance.
  std::vector<Exponents> keys;
  std::map<Exponents, std::vector<Occurrence>> occurrences;
  for (std::size_t t = 0; t < expanded.size(); ++t) {
    for (const auto& [dev, poly] : expanded[t].groups) {
      if (dev.empty() || poly.is_zero()) continue;
      auto& occ = occurrences[dev];
      if (occ.empty()) keys.push_back(dev);
      occ.push_back({t, poly});
    }
  }

  std::vector<std::vector<EnvelopeTerm>> terms(expanded.size());
  for (const auto& key : keys) {
    std::vector<std::pair<std::size_t, unsigned>> source;
    std::string name;
    Bound bound = Bound::constant(1.0);
    unsigned degree = 0;
    for (const auto& [s, e] : key) {
      const std::size_t j = base_index(s);
      source.emplace_back(j, e);
      for (unsigned k = 0; k < e; ++k) {
        if (!name.empty()) name += "*";
        name += symbols.name(s);
        bound = bound * base_bound[j];
      }
      degree += e;
    }
    const UncertaintyKind kind = degree >= 2 ? UncertaintyKind::Product : base_kind[source.front().first];

    std::vector<std::pair<const Occurrence*, std::vector<double>>> live;
    for (const auto& occ : occurrences[key]) {
      auto values = tabulate(occ.coeff);
      if (classify(values) != Sign::Zero) live.emplace_back(&occ, std::move(values));
    }
    const bool duplicated = live.size() >= 2;
    for (auto& [occ, values] : live) {
      const auto& e = expanded[occ->transition];
      std::string uname = name;
      if (duplicated) uname += "[" + an.state_names()[e.from] + "->" + an.state_names()[e.to] + "]";
      Polynomial coeff = occ->coeff;
      double sign = 1.0;
      switch (classify(values)) {
        case Sign::Mixed:
          throw Error(ErrorCode::SignChangingCoefficient,
                      "coefficient of " + uname + " in rate " + an.state_names()[e.from] + "->" +
                          an.state_names()[e.to] + " changes sign on the nominal solution");
        case Sign::Negative:
          sign = -1.0;
          uname = "-" + uname;
          coeff = coeff.scaled(-1.0);
          for (double& v : values) v = -v;
          break;
        default:
          break;
      }
      const std::size_t c = builder.add_coefficient(std::move(values), to_string(coeff, symbols));
      const std::size_t u = builder.add_uncertainty({uname, kind, bound, source, sign, duplicated});
      terms[occ->transition].push_back({u, c});
    }
  }

  for (std::size_t t = 0; t < expanded.size(); ++t) {
    const auto& e = expanded[t];
    auto it = e.groups.find(Exponents{});
    const Polynomial base = it == e.groups.end() ? Polynomial{} : it->second;
    const std::size_t c = builder.add_coefficient(tabulate(base), to_string(base, symbols));
    builder.add_transition(e.from, e.to, c, std::move(terms[t]));
  }
  return std::move(builder).build();
}

}  // namespace anreach
