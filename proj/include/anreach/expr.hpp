#pragma once

// Sparse multivariate polynomials over interned symbols, affine denominators,
// and the rate expressions built from them.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace anreach {

using SymbolId = std::uint32_t;

enum class SymbolKind {
  State,
  Parameter,
  Nominal,           // time function evaluated along the nominal solution
  Deviation,         // bounded uncertainty u_x
  ProductDeviation,  // fresh uncertainty replacing a product of deviations
};

struct SymbolInfo {
  std::string name;
  SymbolKind kind;
  /// Symbol this one was derived from (nominal and deviation symbols).
  std::optional<SymbolId> origin;
};

/// Interned symbol ids with a side table of names and kinds.
class SymbolTable {
 public:
  /// Returns the existing id when `name` is already interned with the same kind.
  SymbolId intern(std::string_view name, SymbolKind kind,
                  std::optional<SymbolId> origin = std::nullopt);
  std::optional<SymbolId> find(std::string_view name) const;
  const SymbolInfo& info(SymbolId id) const { return symbols_.at(id); }
  const std::string& name(SymbolId id) const { return symbols_.at(id).name; }
  SymbolKind kind(SymbolId id) const { return symbols_.at(id).kind; }
  std::size_t size() const { return symbols_.size(); }

  /// Nominal counterpart x^0 of x, created on first use.
  SymbolId nominal_of(SymbolId x);
  /// Deviation counterpart u_x of x, created on first use.
  SymbolId deviation_of(SymbolId x);

 private:
  std::vector<SymbolInfo> symbols_;
  std::unordered_map<std::string, SymbolId> by_name_;
  std::map<SymbolId, SymbolId> nominal_;
  std::map<SymbolId, SymbolId> deviation_;
};

/// Sorted by symbol id, no zero exponents.
using Exponents = std::vector<std::pair<SymbolId, unsigned>>;

struct Monomial {
  double coeff = 0.0;
  Exponents exponents;

  unsigned degree() const;
  unsigned exponent_of(SymbolId s) const;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Canonical sparse polynomial: monomials merged, zero coefficients dropped,
/// ordered by exponent vector.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Monomial> monomials);

  static Polynomial constant(double c);
  static Polynomial variable(SymbolId s, double coeff = 1.0);

  const std::vector<Monomial>& monomials() const { return monomials_; }
  bool is_zero() const { return monomials_.empty(); }
  std::set<SymbolId> symbols() const;
  /// Minimum exponent of `s` over all monomials (0 for the zero polynomial).
  unsigned min_degree_in(SymbolId s) const;
  unsigned max_degree_in(SymbolId s) const;

  /// Values indexed by symbol id; NaN marks an unassigned symbol.
  double eval(std::span<const double> values) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial scaled(double factor) const;

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<Monomial> monomials_;
};

/// c + sum_mu a_mu * x_mu.
struct AffineForm {
  double constant = 0.0;
  std::vector<std::pair<SymbolId, double>> terms;  // sorted by symbol id

  double eval(std::span<const double> values) const;
  friend bool operator==(const AffineForm&, const AffineForm&) = default;
};

struct RateExpr {
  Polynomial numerator;
  std::optional<AffineForm> denominator;

  std::set<SymbolId> symbols() const;
  friend bool operator==(const RateExpr&, const RateExpr&) = default;
};

/// Dense assignment vector of `size` entries, all unassigned.
std::vector<double> make_assignment(std::size_t size);

/// numerator / denominator at `values`; throws UnassignedSymbol or
/// NonPositiveDenominator.
double eval(const RateExpr& expr, std::span<const double> values);
double eval(const RateExpr& expr, const std::map<SymbolId, double>& values);

/// Decrements the exponent of `state` in every monomial; throws NotDivisible
/// when some monomial lacks the factor.
Polynomial divide_by_state(const Polynomial& p, SymbolId state);
Polynomial multiply_by_symbol(const Polynomial& p, SymbolId s);

/// Substitutes x <- x^0 + u_x for every x in `shifted` and expands.
Polynomial shift_expand(const Polynomial& p, const std::set<SymbolId>& shifted,
                        SymbolTable& symbols);

/// Splits the deviation factors (Deviation / ProductDeviation kinds) off a
/// monomial: returns (deviation exponents, remaining monomial).
std::pair<Exponents, Monomial> split_deviation(const Monomial& m, const SymbolTable& symbols);

std::string to_string(const Polynomial& p, const SymbolTable& symbols);
std::string to_string(const RateExpr& r, const SymbolTable& symbols);

}  // namespace anreach
