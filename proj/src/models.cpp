#include "anreach/models.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "anreach/error.hpp"

namespace anreach::models {

namespace {

Polynomial product(double coeff, std::vector<SymbolId> vars) {
  Exponents e;
  for (SymbolId s : vars) e.emplace_back(s, 1);
  return Polynomial(std::vector<Monomial>{Monomial{coeff, std::move(e)}});
}

}  // namespace

AgentNetwork basic_sirs(double beta_nominal, double beta_bound, double horizon) {
  AgentNetwork an;
  const SymbolId S = an.add_state("S", 4.0);
  const SymbolId I = an.add_state("I", 1.0);
  const SymbolId R = an.add_state("R", 1.0);
  const SymbolId beta = an.add_parameter("beta", ParamFunction::constant(beta_nominal), beta_bound);
  an.add_reaction({{S, I}, {I, I}}, {product(1.0, {S, I}), std::nullopt});
  an.add_reaction({{I, R}}, {product(1.0, {beta, I}), std::nullopt});
  an.add_reaction({{R, S}}, {product(1.0, {R}), std::nullopt});
  an.horizon = horizon;
  return an;
}

AgentNetwork multiclass_sirs(int classes, double bound) {
  if (classes < 1) throw Error(ErrorCode::InvalidArgument, "SIRS needs at least one class");
  AgentNetwork an;
  std::vector<SymbolId> S, I, R;
  for (int nu = 1; nu <= classes; ++nu) {
    const auto k = std::to_string(nu);
    S.push_back(an.add_state("S_" + k, 4.0 + 0.1 * (nu - 1)));
    I.push_back(an.add_state("I_" + k, 1.0));
    R.push_back(an.add_state("R_" + k, 1.0));
  }
  for (int nu = 0; nu < classes; ++nu) {
    for (int mu = 0; mu < classes; ++mu) {
      const SymbolId a = an.add_parameter("alpha_" + std::to_string(nu + 1) + "_" + std::to_string(mu + 1),
                                          ParamFunction::constant(1.0), bound);
      an.add_reaction({{S[nu], I[nu]}, {I[mu], I[mu]}}, {product(1.0, {a, S[nu], I[mu]}), std::nullopt});
    }
  }
  for (int nu = 0; nu < classes; ++nu) {
    const auto k = std::to_string(nu + 1);
    const SymbolId b = an.add_parameter("beta_" + k, ParamFunction::constant(2.0), bound);
    an.add_reaction({{I[nu], R[nu]}}, {product(1.0, {b, I[nu]}), std::nullopt});
  }
  for (int nu = 0; nu < classes; ++nu) {
    const auto k = std::to_string(nu + 1);
    const SymbolId g = an.add_parameter("gamma_" + k, ParamFunction::constant(3.0), bound);
    an.add_reaction({{R[nu], S[nu]}}, {product(1.0, {g, R[nu]}), std::nullopt});
  }
  an.horizon = 3.0;
  return an;
}

AgentNetwork gps_queue(int classes, double bound) {
  if (classes < 1) throw Error(ErrorCode::InvalidArgument, "GPS needs at least one class");
  AgentNetwork an;
  std::vector<SymbolId> Q, D;
  for (int nu = 1; nu <= classes; ++nu) {
    Q.push_back(an.add_state("Q_" + std::to_string(nu), 0.8));
    D.push_back(an.add_state("D_" + std::to_string(nu), 0.2));
  }
  AffineForm share;
  std::vector<double> phi;
  for (int nu = 1; nu <= classes; ++nu) {
    phi.push_back(2.0 * nu / (classes * (classes + 1.0)));
    share.terms.emplace_back(Q[nu - 1], phi.back());
  }
  std::sort(share.terms.begin(), share.terms.end());
  for (int nu = 0; nu < classes; ++nu) {
    const SymbolId a = an.add_parameter("alpha_" + std::to_string(nu + 1), ParamFunction::constant(3.0), bound);
    an.add_reaction({{Q[nu], D[nu]}}, {product(phi[nu], {a, Q[nu]}), share});
  }
  for (int nu = 0; nu < classes; ++nu) {
    const SymbolId b = an.add_parameter("beta_" + std::to_string(nu + 1), ParamFunction::constant(4.0), 0.0);
    an.add_reaction({{D[nu], Q[nu]}}, {product(1.0, {b, D[nu]}), std::nullopt});
  }
  an.horizon = 3.0;
  return an;
}

AgentNetwork from_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "example must look like sirs:D[:bound] or gps:D[:bound]");
  }
  int classes = 0;
  double bound = 0.05;
  try {
    classes = std::stoi(parts[1]);
    if (parts.size() == 3) bound = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse example '" + spec + "'");
  }
  if (parts[0] == "sirs") return multiclass_sirs(classes, bound);
  if (parts[0] == "gps") return gps_queue(classes, bound);
  throw Error(ErrorCode::InvalidArgument, "unknown example family '" + parts[0] + "'");
}

}  // namespace anreach::models
