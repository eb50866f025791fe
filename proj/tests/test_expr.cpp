#include <doctest.h>

#include <cmath>

#include "anreach/error.hpp"
#include "anreach/expr.hpp"

using namespace anreach;

namespace {

struct Sir {
  SymbolTable table;
  SymbolId S = table.intern("S", SymbolKind::State);
  SymbolId I = table.intern("I", SymbolKind::State);
  SymbolId beta = table.intern("beta", SymbolKind::Parameter);
};

Polynomial mono(double c, Exponents e) { return Polynomial(std::vector<Monomial>{Monomial{c, std::move(e)}}); }

}  // namespace

TEST_CASE("symbol interning is idempotent and kind-checked") {
  SymbolTable t;
  const auto a = t.intern("A", SymbolKind::State);
  CHECK(t.intern("A", SymbolKind::State) == a);
  CHECK_THROWS_AS(t.intern("A", SymbolKind::Parameter), Error);
  const auto a0 = t.nominal_of(a);
  CHECK(t.nominal_of(a) == a0);
  CHECK(t.kind(a0) == SymbolKind::Nominal);
  CHECK(t.info(t.deviation_of(a)).origin == a);
  CHECK(t.find("missing") == std::nullopt);
}

TEST_CASE("polynomials are canonical") {
  Sir m;
  const auto p = mono(2.0, {{m.S, 1}}) + mono(-2.0, {{m.S, 1}});
  CHECK(p.is_zero());
  const auto q = Polynomial::variable(m.S) * Polynomial::variable(m.I) + Polynomial::variable(m.I) * Polynomial::variable(m.S);
  REQUIRE(q.monomials().size() == 1);
  CHECK(q.monomials()[0].coeff == 2.0);
  CHECK(q.max_degree_in(m.S) == 1);
  CHECK(q == q.scaled(1.0));
}

TEST_CASE("eval of a mass-action rate") {
  Sir m;
  const RateExpr r{Polynomial::variable(m.S) * Polynomial::variable(m.I), std::nullopt};
  CHECK(eval(r, std::map<SymbolId, double>{{m.S, 4.0}, {m.I, 1.0}}) == doctest::Approx(4.0));
}

TEST_CASE("eval of a processor-sharing rate") {
  SymbolTable t;
  const auto q1 = t.intern("Q_1", SymbolKind::State);
  const auto q2 = t.intern("Q_2", SymbolKind::State);
  const auto alpha = t.intern("alpha_1", SymbolKind::Parameter);
  const double phi1 = 1.0 / 3.0, phi2 = 2.0 / 3.0;
  const RateExpr r{mono(phi1, {{q1, 1}, {alpha, 1}}), AffineForm{0.0, {{q1, phi1}, {q2, phi2}}}};
  CHECK(eval(r, std::map<SymbolId, double>{{q1, 0.8}, {q2, 0.8}, {alpha, 3.0}}) == doctest::Approx(1.0));
}

TEST_CASE("eval errors") {
  Sir m;
  const RateExpr r{Polynomial::variable(m.S) * Polynomial::variable(m.I), std::nullopt};
  try {
    eval(r, std::map<SymbolId, double>{{m.S, 4.0}});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnassignedSymbol);
  }
  const RateExpr d{Polynomial::variable(m.S), AffineForm{0.0, {{m.I, 1.0}}}};
  try {
    eval(d, std::map<SymbolId, double>{{m.S, 1.0}, {m.I, 0.0}});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDenominator);
  }
}

TEST_CASE("divide_by_state") {
  Sir m;
  const auto p = mono(1.0, {{m.S, 1}, {m.I, 1}}) + mono(3.0, {{m.S, 2}});
  const auto q = divide_by_state(p, m.S);
  CHECK(q == mono(1.0, {{m.I, 1}}) + mono(3.0, {{m.S, 1}}));
  CHECK(multiply_by_symbol(q, m.S) == p);
  try {
    divide_by_state(p, m.I);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotDivisible);
  }
}

TEST_CASE("shift_expand of a bilinear term") {
  Sir m;
  const auto p = mono(1.0, {{m.S, 1}, {m.I, 1}});
  const auto x = shift_expand(p, {m.S, m.I}, m.table);
  CHECK(x.monomials().size() == 4);
  const auto s0 = *m.table.find("S^0"), i0 = *m.table.find("I^0");
  const auto us = *m.table.find("u_S"), ui = *m.table.find("u_I");
  auto v = make_assignment(m.table.size());
  v[s0] = 4.0;
  v[i0] = 1.0;
  v[us] = 0.25;
  v[ui] = -0.5;
  CHECK(x.eval(v) == doctest::Approx(4.25 * 0.5));

  std::size_t with_dev = 0;
  for (const auto& mon : x.monomials()) {
    const auto [dev, rest] = split_deviation(mon, m.table);
    with_dev += dev.empty() ? 0 : 1;
    for (const auto& [s, e] : rest.exponents) CHECK(m.table.kind(s) == SymbolKind::Nominal);
  }
  CHECK(with_dev == 3);
}

TEST_CASE("shift_expand leaves unshifted symbols alone") {
  Sir m;
  const auto p = mono(2.0, {{m.beta, 1}, {m.I, 2}});
  const auto x = shift_expand(p, {m.I}, m.table);
  // beta (I0 + uI)^2 has three monomials
  CHECK(x.monomials().size() == 3);
  CHECK(x.max_degree_in(m.beta) == 1);
}

TEST_CASE("to_string renders rates") {
  Sir m;
  const RateExpr r{mono(1.0, {{m.beta, 1}, {m.I, 1}}), std::nullopt};
  const auto s = to_string(r, m.table);
  CHECK(s.find("beta") != std::string::npos);
  CHECK(s.find("I") != std::string::npos);
}
