#include "anreach/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "anreach/error.hpp"

namespace anreach {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in " + where);
  }
}

const json& required(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "' in " + where);
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, where + " must be a number");
  return j.get<double>();
}

SymbolId resolve(const SymbolTable& symbols, const std::string& name) {
  auto s = symbols.find(name);
  if (!s) throw Error(ErrorCode::UnknownSymbol, "undeclared symbol '" + name + "'");
  return *s;
}

}  // namespace

json polynomial_to_json(const Polynomial& p, const SymbolTable& symbols) {
  json out = json::array();
  for (const auto& m : p.monomials()) {
    json vars = json::object();
    for (const auto& [s, e] : m.exponents) vars[symbols.name(s)] = e;
    out.push_back({{"coeff", m.coeff}, {"vars", vars}});
  }
  return out;
}

Polynomial polynomial_from_json(const json& j, const SymbolTable& symbols) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "polynomial must be a list of monomials");
  std::vector<Monomial> monomials;
  for (const auto& m : j) {
    reject_unknown_keys(m, {"coeff", "vars"}, "monomial");
    Monomial mono{number(required(m, "coeff", "monomial"), "coeff"), {}};
    if (auto it = m.find("vars"); it != m.end()) {
      if (!it->is_object()) throw Error(ErrorCode::ParseError, "monomial vars must be an object");
      for (const auto& [name, e] : it->items()) {
        if (!e.is_number_unsigned()) {
          throw Error(ErrorCode::ParseError, "exponent of '" + name + "' must be a nonnegative integer");
        }
        mono.exponents.emplace_back(resolve(symbols, name), e.get<unsigned>());
      }
    }
    monomials.push_back(std::move(mono));
  }
  return Polynomial(std::move(monomials));
}

json affine_to_json(const AffineForm& a, const SymbolTable& symbols) {
  json terms = json::object();
  for (const auto& [s, c] : a.terms) terms[symbols.name(s)] = c;
  return {{"const", a.constant}, {"terms", terms}};
}

AffineForm affine_from_json(const json& j, const SymbolTable& symbols) {
  reject_unknown_keys(j, {"const", "terms"}, "denominator");
  AffineForm a;
  if (auto it = j.find("const"); it != j.end()) a.constant = number(*it, "denominator const");
  const auto& terms = required(j, "terms", "denominator");
  if (!terms.is_object()) throw Error(ErrorCode::ParseError, "denominator terms must be an object");
  for (const auto& [name, c] : terms.items()) a.terms.emplace_back(resolve(symbols, name), number(c, name));
  std::sort(a.terms.begin(), a.terms.end());
  return a;
}

AgentNetwork model_from_json(const json& j) {
  reject_unknown_keys(j, {"states", "params", "reactions", "init", "horizon"}, "model");
  AgentNetwork an;

  const auto& states = required(j, "states", "model");
  if (!states.is_array()) throw Error(ErrorCode::ParseError, "states must be a list of names");
  for (const auto& s : states) {
    if (!s.is_string()) throw Error(ErrorCode::ParseError, "state names must be strings");
    if (an.symbols.find(s.get<std::string>())) {
      throw Error(ErrorCode::ParseError, "duplicate state '" + s.get<std::string>() + "'");
    }
    an.add_state(s.get<std::string>(), 0.0);
  }

  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, "params must be an object");
    for (const auto& [name, spec] : it->items()) {
      reject_unknown_keys(spec, {"nominal", "bound"}, "parameter '" + name + "'");
      if (an.symbols.find(name)) throw Error(ErrorCode::ParseError, "duplicate symbol '" + name + "'");
      const auto& nominal = required(spec, "nominal", "parameter '" + name + "'");
      ParamFunction f;
      if (nominal.is_number()) {
        f = ParamFunction::constant(nominal.get<double>());
      } else if (nominal.is_array()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : nominal) {
          if (!p.is_array() || p.size() != 2) {
            throw Error(ErrorCode::ParseError, "nominal table of '" + name + "' needs [t, v] pairs");
          }
          pts.emplace_back(number(p[0], "time"), number(p[1], "value"));
        }
        f = ParamFunction::table(std::move(pts));
      } else {
        throw Error(ErrorCode::ParseError, "nominal of '" + name + "' must be a number or a table");
      }
      double bound = 0.0;
      if (auto b = spec.find("bound"); b != spec.end()) bound = number(*b, "bound of '" + name + "'");
      an.add_parameter(name, std::move(f), bound);
    }
  }

  const auto& reactions = required(j, "reactions", "model");
  if (!reactions.is_array()) throw Error(ErrorCode::ParseError, "reactions must be a list");
  for (const auto& r : reactions) {
    reject_unknown_keys(r, {"transitions", "rate"}, "reaction");
    std::vector<Transition> transitions;
    for (const auto& tr : required(r, "transitions", "reaction")) {
      if (!tr.is_array() || tr.size() != 2 || !tr[0].is_string() || !tr[1].is_string()) {
        throw Error(ErrorCode::ParseError, "transition must be a [from, to] pair of state names");
      }
      transitions.push_back({resolve(an.symbols, tr[0].get<std::string>()),
                             resolve(an.symbols, tr[1].get<std::string>())});
      for (SymbolId s : {transitions.back().from, transitions.back().to}) {
        if (!an.is_state(s)) {
          throw Error(ErrorCode::UnknownSymbol, "transition endpoint '" + an.symbols.name(s) + "' is not a state");
        }
      }
    }
    const auto& rate = required(r, "rate", "reaction");
    reject_unknown_keys(rate, {"poly", "denom"}, "rate");
    RateExpr expr{polynomial_from_json(required(rate, "poly", "rate"), an.symbols), std::nullopt};
    if (auto d = rate.find("denom"); d != rate.end() && !d->is_null()) {
      expr.denominator = affine_from_json(*d, an.symbols);
    }
    an.add_reaction(std::move(transitions), std::move(expr));
  }

  const auto& init = required(j, "init", "model");
  if (!init.is_object()) throw Error(ErrorCode::ParseError, "init must be an object");
  for (const auto& [name, v] : init.items()) {
    const SymbolId s = resolve(an.symbols, name);
    if (!an.is_state(s)) throw Error(ErrorCode::UnknownSymbol, "init names non-state '" + name + "'");
    an.initial[an.state_index(s)] = number(v, "init of '" + name + "'");
  }
  an.horizon = number(required(j, "horizon", "model"), "horizon");
  return an;
}

json model_to_json(const AgentNetwork& an) {
  json j;
  j["states"] = an.state_names();
  json params = json::object();
  for (const auto& p : an.parameters) {
    json nominal;
    if (p.nominal.is_constant()) {
      nominal = p.nominal.constant_value();
    } else {
      nominal = json::array();
      for (const auto& [t, v] : p.nominal.points()) nominal.push_back({t, v});
    }
    params[an.symbols.name(p.symbol)] = {{"nominal", nominal}, {"bound", p.bound}};
  }
  j["params"] = params;
  json reactions = json::array();
  for (const auto& r : an.reactions) {
    json transitions = json::array();
    for (const auto& tr : r.transitions) transitions.push_back({an.symbols.name(tr.from), an.symbols.name(tr.to)});
    json rate = {{"poly", polynomial_to_json(r.rate.numerator, an.symbols)}};
    if (r.rate.denominator) rate["denom"] = affine_to_json(*r.rate.denominator, an.symbols);
    reactions.push_back({{"transitions", transitions}, {"rate", rate}});
  }
  j["reactions"] = reactions;
  json init = json::object();
  for (std::size_t i = 0; i < an.states.size(); ++i) init[an.symbols.name(an.states[i])] = an.initial[i];
  j["init"] = init;
  j["horizon"] = an.horizon;
  return j;
}

AgentNetwork parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return model_from_json(j);
}

AgentNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace anreach
