#include "anreach/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anreach/error.hpp"

namespace anreach {

SymbolId SymbolTable::intern(std::string_view name, SymbolKind kind,
                             std::optional<SymbolId> origin) {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) {
    if (symbols_[it->second].kind != kind) {
      throw Error(ErrorCode::InvalidModel,
                  "symbol '" + std::string(name) + "' declared twice with different kinds");
    }
    return it->second;
  }
  const auto id = static_cast<SymbolId>(symbols_.size());
  symbols_.push_back({std::string(name), kind, origin});
  by_name_.emplace(std::string(name), id);
  return id;
}

std::optional<SymbolId> SymbolTable::find(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

SymbolId SymbolTable::nominal_of(SymbolId x) {
  if (auto it = nominal_.find(x); it != nominal_.end()) return it->second;
  const SymbolId id = intern(name(x) + "^0", SymbolKind::Nominal, x);
  nominal_.emplace(x, id);
  return id;
}

SymbolId SymbolTable::deviation_of(SymbolId x) {
  if (auto it = deviation_.find(x); it != deviation_.end()) return it->second;
  const SymbolId id = intern("u_" + name(x), SymbolKind::Deviation, x);
  deviation_.emplace(x, id);
  return id;
}

unsigned Monomial::degree() const {
  unsigned d = 0;
  for (const auto& [s, e] : exponents) d += e;
  return d;
}

unsigned Monomial::exponent_of(SymbolId s) const {
  auto it = std::lower_bound(exponents.begin(), exponents.end(), s,
                             [](const auto& pe, SymbolId v) { return pe.first < v; });
  return (it != exponents.end() && it->first == s) ? it->second : 0U;
}

namespace {

Exponents normalized(Exponents e) {
  std::sort(e.begin(), e.end());
  Exponents out;
  for (const auto& [s, k] : e) {
    if (k == 0) continue;
    if (!out.empty() && out.back().first == s) {
      out.back().second += k;
    } else {
      out.emplace_back(s, k);
    }
  }
  return out;
}

Exponents multiply_exponents(const Exponents& a, const Exponents& b) {
  Exponents out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<Monomial> merge(std::map<Exponents, double>& acc) {
  std::vector<Monomial> out;
  out.reserve(acc.size());
  for (auto& [e, c] : acc) {
    if (c != 0.0) out.push_back({c, e});
  }
  return out;
}

double lookup(std::span<const double> values, SymbolId s) {
  if (s >= values.size() || std::isnan(values[s])) {
    throw Error(ErrorCode::UnassignedSymbol, "symbol id " + std::to_string(s) + " has no value");
  }
  return values[s];
}

}  // namespace

Polynomial::Polynomial(std::vector<Monomial> monomials) {
  std::map<Exponents, double> acc;
  for (auto& m : monomials) {
    if (!std::isfinite(m.coeff)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite polynomial coefficient");
    }
    acc[normalized(std::move(m.exponents))] += m.coeff;
  }
  monomials_ = merge(acc);
}

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<Monomial>{Monomial{c, {}}}); }

Polynomial Polynomial::variable(SymbolId s, double coeff) {
  return Polynomial(std::vector<Monomial>{Monomial{coeff, {{s, 1}}}});
}

std::set<SymbolId> Polynomial::symbols() const {
  std::set<SymbolId> out;
  for (const auto& m : monomials_)
    for (const auto& [s, e] : m.exponents) out.insert(s);
  return out;
}

unsigned Polynomial::min_degree_in(SymbolId s) const {
  if (monomials_.empty()) return 0;
  unsigned d = std::numeric_limits<unsigned>::max();
  for (const auto& m : monomials_) d = std::min(d, m.exponent_of(s));
  return d;
}

unsigned Polynomial::max_degree_in(SymbolId s) const {
  unsigned d = 0;
  for (const auto& m : monomials_) d = std::max(d, m.exponent_of(s));
  return d;
}

double Polynomial::eval(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& m : monomials_) {
    double term = m.coeff;
    for (const auto& [s, e] : m.exponents) {
      const double v = lookup(values, s);
      for (unsigned k = 0; k < e; ++k) term *= v;
    }
    sum += term;
  }
  return sum;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  std::map<Exponents, double> acc;
  for (const auto& m : monomials_) acc[m.exponents] += m.coeff;
  for (const auto& m : other.monomials_) acc[m.exponents] += m.coeff;
  monomials_ = merge(acc);
  return *this;
}

Polynomial Polynomial::scaled(double factor) const {
  Polynomial out = *this;
  if (factor == 0.0) return Polynomial();
  for (auto& m : out.monomials_) m.coeff *= factor;
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::map<Exponents, double> acc;
  for (const auto& ma : a.monomials_)
    for (const auto& mb : b.monomials_)
      acc[multiply_exponents(ma.exponents, mb.exponents)] += ma.coeff * mb.coeff;
  Polynomial out;
  out.monomials_ = merge(acc);
  return out;
}

double AffineForm::eval(std::span<const double> values) const {
  double sum = constant;
  for (const auto& [s, a] : terms) sum += a * lookup(values, s);
  return sum;
}

std::set<SymbolId> RateExpr::symbols() const {
  auto out = numerator.symbols();
  if (denominator)
    for (const auto& [s, a] : denominator->terms) out.insert(s);
  return out;
}

std::vector<double> make_assignment(std::size_t size) {
  return std::vector<double>(size, std::numeric_limits<double>::quiet_NaN());
}

double eval(const RateExpr& expr, std::span<const double> values) {
  const double num = expr.numerator.eval(values);
  if (!expr.denominator) return num;
  const double den = expr.denominator->eval(values);
  if (!(den > 0.0)) {
    throw Error(ErrorCode::NonPositiveDenominator,
                "denominator evaluates to " + std::to_string(den));
  }
  return num / den;
}

double eval(const RateExpr& expr, const std::map<SymbolId, double>& values) {
  SymbolId max_id = 0;
  for (const auto& [s, v] : values) max_id = std::max(max_id, s);
  auto dense = make_assignment(values.empty() ? 0 : max_id + 1);
  for (const auto& [s, v] : values) dense[s] = v;
  return eval(expr, dense);
}

Polynomial divide_by_state(const Polynomial& p, SymbolId state) {
  std::vector<Monomial> out;
  out.reserve(p.monomials().size());
  for (const auto& m : p.monomials()) {
    Monomial q = m;
    auto it = std::find_if(q.exponents.begin(), q.exponents.end(),
                           [state](const auto& pe) { return pe.first == state; });
    if (it == q.exponents.end()) {
      throw Error(ErrorCode::NotDivisible,
                  "monomial has no factor of symbol id " + std::to_string(state));
    }
    if (--it->second == 0) q.exponents.erase(it);
    out.push_back(std::move(q));
  }
  return Polynomial(std::move(out));
}

Polynomial multiply_by_symbol(const Polynomial& p, SymbolId s) { return p * Polynomial::variable(s); }

Polynomial shift_expand(const Polynomial& p, const std::set<SymbolId>& shifted,
                        SymbolTable& symbols) {
  Polynomial result;
  for (const auto& m : p.monomials()) {
    Polynomial term = Polynomial::constant(m.coeff);
    for (const auto& [s, e] : m.exponents) {
      Polynomial factor = shifted.contains(s)
                              ? Polynomial::variable(symbols.nominal_of(s)) +
                                    Polynomial::variable(symbols.deviation_of(s))
                              : Polynomial::variable(s);
      for (unsigned k = 0; k < e; ++k) term = term * factor;
    }
    result += term;
  }
  return result;
}

std::pair<Exponents, Monomial> split_deviation(const Monomial& m, const SymbolTable& symbols) {
  Exponents dev;
  Monomial rest{m.coeff, {}};
  for (const auto& [s, e] : m.exponents) {
    const auto k = symbols.kind(s);
    if (k == SymbolKind::Deviation || k == SymbolKind::ProductDeviation) {
      dev.emplace_back(s, e);
    } else {
      rest.exponents.emplace_back(s, e);
    }
  }
  return {std::move(dev), std::move(rest)};
}

std::string to_string(const Polynomial& p, const SymbolTable& symbols) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& m : p.monomials()) {
    double c = m.coeff;
    if (!first) {
      os << (c < 0 ? " - " : " + ");
      c = std::abs(c);
    } else if (c < 0) {
      os << "-";
      c = -c;
    }
    first = false;
    const bool unit = (c == 1.0 && !m.exponents.empty());
    if (!unit) os << c;
    bool need_dot = !unit;
    for (const auto& [s, e] : m.exponents) {
      if (need_dot) os << "*";
      os << symbols.name(s);
      if (e > 1) os << "^" << e;
      need_dot = true;
    }
  }
  return os.str();
}

std::string to_string(const RateExpr& r, const SymbolTable& symbols) {
  std::string out = "(" + to_string(r.numerator, symbols) + ")";
  if (r.denominator) {
    std::ostringstream os;
    os.precision(12);
    os << " / (" << r.denominator->constant;
    for (const auto& [s, a] : r.denominator->terms) os << " + " << a << "*" << symbols.name(s);
    os << ")";
    out += os.str();
  }
  return out;
}

}  // namespace anreach
