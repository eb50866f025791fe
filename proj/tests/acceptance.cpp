// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anreach/models.hpp"
#include "anreach/reachability.hpp"
#include "helpers.hpp"

using namespace anreach;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string describe(const ReachTube& t) {
  if (t.status == TubeStatus::Certified) return fmt(t.eps_star);
  std::string s(to_string(t.status));
  if (!t.iterates.empty()) s += " (last iterate " + fmt(t.iterates.back(), 4) + ")";
  return s;
}

ReachTube bound(const AgentNetwork& an, double dt, double eta, Scale scale = Scale::Mass) {
  FixedPointConfig cfg;
  cfg.eta = eta;
  cfg.scale = scale;
  return fixed_point_bound(an, GridSpec{dt}, cfg);
}

bool within(const ReachTube& t, double expected, double tol) {
  return t.status == TubeStatus::Certified && std::abs(t.eps_star - expected) <= tol * expected;
}

bool nondecreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k + 1 < v.size(); ++k)
    if (v[k] < v[k - 1]) return false;
  return true;
}

Envelope envelope_of(const AgentNetwork& an) { return build_envelope(an, nominal_trajectory(an, {}).trajectory); }

std::map<std::pair<std::size_t, std::size_t>, double> by_pair(const std::vector<RateEntry>& r) {
  std::map<std::pair<std::size_t, std::size_t>, double> m;
  for (const auto& e : r) m[{e.from, e.to}] += e.value;
  return m;
}

// SIRS tubes shared by criteria 1 and 2, keyed by (D, bound, scale).
struct SirsRuns {
  std::map<std::tuple<int, double, Scale>, ReachTube> tubes;
  const ReachTube& get(int D, double b, Scale s) {
    const auto key = std::make_tuple(D, b, s);
    auto it = tubes.find(key);
    if (it == tubes.end()) it = tubes.emplace(key, bound(models::multiclass_sirs(D, b), 0.04, 1e-3, s)).first;
    return it->second;
  }
};

Outcome criterion1(SirsRuns& runs) {
  const std::map<double, std::vector<double>> expected{{0.05, {0.147, 0.183, 0.224}}, {0.03, {0.097, 0.137, 0.182}}};
  bool reproduced = false;
  std::string detail;
  for (const Scale scale : {Scale::Mass, Scale::Unit}) {
    bool all = true;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(scale)) + ":";
    for (const auto& [b, want] : expected) {
      for (int D = 1; D <= 3; ++D) {
        const auto& t = runs.get(D, b, scale);
        all = all && within(t, want[D - 1], 0.10);
        detail += " D=" + std::to_string(D) + ",b=" + fmt(b, 2) + " " + describe(t) + " vs " + fmt(want[D - 1], 3);
      }
    }
    reproduced = reproduced || all;
  }
  if (reproduced) return {true, detail};

  // Downgrade: finite, certified and monotone in D and in the bound, in the frozen mode.
  bool downgrade = true;
  for (const double b : {0.03, 0.05})
    for (int D = 1; D <= 3; ++D) downgrade = downgrade && runs.get(D, b, Scale::Mass).status == TubeStatus::Certified;
  if (downgrade) {
    for (int D = 1; D <= 3; ++D) {
      downgrade = downgrade && runs.get(D, 0.03, Scale::Mass).eps_star <= runs.get(D, 0.05, Scale::Mass).eps_star;
      if (D > 1)
        for (const double b : {0.03, 0.05})
          downgrade = downgrade && runs.get(D - 1, b, Scale::Mass).eps_star <= runs.get(D, b, Scale::Mass).eps_star;
    }
  }
  return {false, (downgrade ? "downgrade holds; " : "downgrade fails (mass mode gives no certificate); ") + detail};
}

Outcome criterion2(SirsRuns& runs) {
  const auto& a = runs.get(1, 0.05, Scale::Mass);
  const auto b = bound(models::multiclass_sirs(1, 0.05), 0.03, 1e-3);
  std::string detail = "dt=0.04 " + describe(a) + ", dt=0.03 " + describe(b);
  if (a.status != TubeStatus::Certified || b.status != TubeStatus::Certified) return {false, detail};
  const double rel = std::abs(a.eps_star - b.eps_star) / a.eps_star;
  return {rel <= 0.03, detail + ", relative change " + fmt(rel, 3)};
}

Outcome criterion3(std::vector<ReachTube>& gps) {
  const std::map<double, std::vector<double>> expected{{0.05, {0.00713, 0.00512}}, {0.03, {0.00493, 0.00317}}};
  bool pass = true;
  std::string detail;
  for (const auto& [b, want] : expected) {
    for (int D = 2; D <= 3; ++D) {
      gps.push_back(bound(models::gps_queue(D, b), 0.04, 1e-5));
      const auto& t = gps.back();
      const bool ok = within(t, want[D - 2], 0.15);
      pass = pass && ok;
      detail += std::string(detail.empty() ? "" : ", ") + "D=" + std::to_string(D) + ",b=" + fmt(b, 2) + " " +
                describe(t) + " vs " + fmt(want[D - 2], 3);
      if (t.status == TubeStatus::Certified) detail += " (" + fmt(100.0 * (t.eps_star / want[D - 2] - 1.0), 2) + "%)";
    }
  }
  return {pass, detail};
}

Outcome criterion4() {
  const auto two = testing::toy_chain({"A", "B"}, {1.0, 0.0}, 1.0, {{0, 1, 1.0, 0.5}});
  const double hi = solve_extremal(two, TargetSpec::indicator(2, 1, 1.0, Direction::Max), 0.0, {0.0, false}).value;
  const double lo = solve_extremal(two, TargetSpec::indicator(2, 1, 1.0, Direction::Min), 0.0, {0.0, false}).value;
  const double e2 = std::max(std::abs(hi - (1.0 - std::exp(-1.5))), std::abs(lo - (1.0 - std::exp(-0.5))));

  const auto three = testing::toy_chain({"A", "B", "C"}, {1.0, 0.0, 0.0}, 3.0,
                                        {{0, 1, 1.0, 0.5}, {1, 2, 3.0, 0.0}, {2, 0, 1.0, 0.0}});
  double e3 = 0.0;
  for (const auto dir : {Direction::Max, Direction::Min}) {
    for (std::size_t s = 0; s < 3; ++s) {
      const double v = solve_extremal(three, TargetSpec::indicator(3, s, 3.0, dir), 0.0, {0.0, false}).value;
      e3 = std::max(e3, std::abs(v - testing::cycle_single_switch_best(s, dir == Direction::Max)));
    }
  }
  return {e2 <= 1e-6 && e3 <= 1e-5, "two-state error " + fmt(e2, 3) + ", three-state error " + fmt(e3, 3)};
}

Outcome criterion5() {
  const double b = 0.01;
  const auto an = models::multiclass_sirs(2, b);
  const auto tube = bound(an, 0.04, 1e-3);
  if (tube.status != TubeStatus::Certified) return {false, "SIRS D=2, b=0.01 not certified: " + describe(tube)};

  const double T = an.horizon;
  const int pieces = 10;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::size_t violations = 0;
  double worst = 0.0;
  for (int sample = 0; sample < 200; ++sample) {
    std::vector<std::vector<double>> u(pieces, std::vector<double>(an.parameters.size()));
    for (auto& piece : u)
      for (std::size_t k = 0; k < piece.size(); ++k)
        piece[k] = an.parameters[k].bound * (sample % 2 == 0 ? unit(rng) : (unit(rng) >= 0.0 ? 1.0 : -1.0));
    const OdeRhs rhs = [&](double t, std::span<const double> V, std::span<double> dV) {
      const auto k = std::min<std::size_t>(pieces - 1, static_cast<std::size_t>(t / T * pieces));
      const auto F = global_drift(an, t, V, u[k]);
      std::copy(F.begin(), F.end(), dV.begin());
    };
    IntegratorConfig cfg;
    cfg.step = T / 3000.0;
    const auto traj = integrate(rhs, an.initial, 0.0, T, cfg);
    for (std::size_t i = 0; i < tube.times.size(); ++i) {
      const auto V = traj.at(tube.times[i]);
      for (std::size_t s = 0; s < V.size(); ++s) {
        worst = std::max(worst, std::abs(V[s] - tube.nominal[i][s]));
        if (V[s] < tube.lower[i][s] || V[s] > tube.upper[i][s]) ++violations;
      }
    }
  }
  return {violations == 0, "SIRS D=2, b=0.01, eps_star " + fmt(tube.eps_star) + ", worst deviation " + fmt(worst, 4) +
                               ", violations " + std::to_string(violations)};
}

Outcome criterion6(const std::vector<ReachTube>& gps, SirsRuns& runs) {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& name) {
    if (!ok) failed.push_back(name);
  };
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // conservation and containment on the two envelope families
  for (const auto& an : {models::multiclass_sirs(2, 0.05), models::gps_queue(2, 0.05)}) {
    const auto nominal = nominal_trajectory(an, {});
    const Envelope env = build_envelope(an, nominal.trajectory);
    const auto rates = transition_rates(an);
    const double eps = 0.01;
    const auto bounds = env.bounds_at(eps);
    std::uniform_int_distribution<std::size_t> pick(0, env.grid().size() - 1);
    double drift_sum = 0.0, contain = 0.0;
    bool inside = true;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t g = pick(rng);
      const double t = env.grid()[g];
      std::vector<double> up(an.parameters.size()), us(an.num_states());
      for (std::size_t k = 0; k < up.size(); ++k) up[k] = an.parameters[k].bound * unit(rng);
      for (auto& x : us) x = eps * unit(rng);
      auto V = nominal.trajectory.at(t);
      for (std::size_t s = 0; s < V.size(); ++s) V[s] += us[s];
      const auto u = env.realize(g, up, us);
      for (std::size_t i = 0; i < u.size(); ++i) inside = inside && std::abs(u[i]) <= bounds[i] * (1.0 + 1e-12) + 1e-15;
      const auto envelope_rates = env.evaluate_rates(t, u, eps);
      const auto want = by_pair(evaluate_transition_rates(an, rates, t, V, up));
      const auto got = by_pair(envelope_rates);
      for (const auto& [key, value] : want) {
        const auto it = got.find(key);
        contain = std::max(contain, it == got.end() ? 1.0 : std::abs(it->second - value) / std::max(1.0, std::abs(value)));
      }
      std::vector<double> pi(env.num_states());
      for (auto& x : pi) x = 0.5 * (1.0 + unit(rng));
      const auto f = kolmogorov_drift(envelope_rates, pi);
      drift_sum = std::max(drift_sum, std::abs(std::accumulate(f.begin(), f.end(), 0.0)));
    }
    check(drift_sum <= 1e-9, "conservation");
    check(inside && contain <= 1e-10, "containment");
  }

  const auto env = envelope_of(models::multiclass_sirs(1, 0.05));
  const double eps = 0.05;
  const auto b = env.bounds_at(eps);
  const std::size_t m = b.size(), n = env.num_states();
  for (const auto dir : {Direction::Min, Direction::Max}) {
    const std::vector<double> w{0.0, 1.0, 0.5};
    const auto sol = solve_extremal(env, {w, 3.0, dir}, eps, {});
    bool bang = true;
    for (std::size_t s = 0; s < sol.step_times.size(); ++s)
      for (std::size_t i = 0; i < m; ++i) bang = bang && std::abs(std::abs(sol.controls[s * m + i]) - b[i]) <= 1e-15;
    check(bang, "bang-bang range");
    const auto p = sol.costate.at(3.0);
    const double sgn = dir == Direction::Max ? 1.0 : -1.0;
    bool terminal = true;
    for (std::size_t s = 0; s < n; ++s) terminal = terminal && std::abs(p[s] - sgn * w[s]) <= 1e-12;
    check(terminal, "costate terminal condition");
    const double mass = std::accumulate(sol.final_distribution.begin(), sol.final_distribution.end(), 0.0);
    check(std::abs(mass - 1.0) <= 1e-9, "probability conservation");
  }

  const double psi05 = evaluate_psi(env, GridSpec{0.04}, 0.05, {}).value;
  const double psi10 = evaluate_psi(env, GridSpec{0.04}, 0.10, {}).value;
  check(psi05 <= psi10, "Psi monotonicity");

  bool iterates = true;
  for (const auto& t : gps) iterates = iterates && nondecreasing(t.iterates);
  for (const auto& [key, t] : runs.tubes) iterates = iterates && nondecreasing(t.iterates);
  check(iterates, "iterate monotonicity");

  std::string detail = "Psi(0.05)=" + fmt(psi05, 4) + " <= Psi(0.10)=" + fmt(psi10, 4);
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

Outcome criterion7() {
  // logistic growth has the closed form x(t) = 1 / (1 + 9 e^{-t}) from 0.1
  const OdeRhs rhs = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * (1.0 - x[0]); };
  auto error = [&](double h) {
    IntegratorConfig cfg;
    cfg.step = h;
    const std::vector<double> x0{0.1};
    const auto tr = integrate(rhs, x0, 0.0, 4.0, cfg);
    return std::abs(tr.value(tr.size() - 1, 0) - 1.0 / (1.0 + 9.0 * std::exp(-4.0)));
  };
  const double order = std::log2(error(0.2) / error(0.1));
  return {order >= 3.7 && order <= 4.3, "empirical order " + fmt(order, 4)};
}

}  // namespace

int main() {
  SirsRuns runs;
  std::vector<ReachTube> gps;
  const std::vector<std::function<Outcome()>> criteria{
      [&] { return criterion1(runs); }, [&] { return criterion2(runs); }, [&] { return criterion3(gps); },
      [] { return criterion4(); },      [] { return criterion5(); },      [&] { return criterion6(gps, runs); },
      [] { return criterion7(); },
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
