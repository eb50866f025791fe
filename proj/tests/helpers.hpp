#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "anreach/envelope.hpp"
#include "anreach/ode.hpp"

namespace anreach::testing {

struct ChainEdge {
  std::size_t from, to;
  double rate;
  double bound = 0.0;  // > 0 adds one uncertainty on this edge
};

/// Homogeneous chain with constant rates and at most one uncertainty per edge.
inline Envelope toy_chain(std::vector<std::string> names, std::vector<double> pi0, double horizon,
                          const std::vector<ChainEdge>& edges) {
  EnvelopeBuilder b(std::move(names), std::move(pi0), 1.0, {0.0, horizon});
  for (const auto& e : edges) {
    const auto base = b.add_constant(e.rate);
    std::vector<EnvelopeTerm> terms;
    if (e.bound > 0.0) {
      const auto c = b.add_constant(1.0);
      const auto u = b.add_uncertainty({"u_" + std::to_string(e.from) + std::to_string(e.to),
                                        UncertaintyKind::Parameter, Bound::constant(e.bound), {}, 1.0, false});
      terms.push_back({u, c});
    }
    b.add_transition(e.from, e.to, base, std::move(terms));
  }
  return std::move(b).build();
}

/// Kolmogorov RK4 integration of the envelope chain under a control u(t),
/// independent of the extremal kernel.
inline std::vector<double> simulate_chain(const Envelope& env, double eps, double t0, double t1,
                                          std::vector<double> pi, const std::function<std::vector<double>(double)>& u,
                                          double step) {
  auto rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    const auto rates = env.evaluate_rates(t, u(t), eps);
    const auto f = kolmogorov_drift(rates, x);
    std::copy(f.begin(), f.end(), dx.begin());
  };
  IntegratorConfig cfg;
  cfg.step = step;
  const auto traj = integrate(rhs, pi, t0, t1, cfg);
  const auto last = traj.value(traj.size() - 1);
  return {last.begin(), last.end()};
}

/// Cycle A -(a)-> B -(3)-> C -(1)-> A tabulated at durations 3 j / grid by a
/// fine RK4 independent of the solver.
inline std::vector<std::vector<double>> cycle_path(std::vector<double> pi, double a, int grid) {
  auto f = [&](const std::vector<double>& x) {
    return std::vector<double>{-a * x[0] + x[2], a * x[0] - 3.0 * x[1], 3.0 * x[1] - x[2]};
  };
  auto add = [](const std::vector<double>& x, const std::vector<double>& k, double c) {
    return std::vector<double>{x[0] + c * k[0], x[1] + c * k[1], x[2] + c * k[2]};
  };
  const int sub = 15;
  const double h = 3.0 / grid / sub;
  std::vector<std::vector<double>> out{pi};
  for (int j = 0; j < grid; ++j) {
    for (int s = 0; s < sub; ++s) {
      const auto k1 = f(pi);
      const auto k2 = f(add(pi, k1, h / 2));
      const auto k3 = f(add(pi, k2, h / 2));
      const auto k4 = f(add(pi, k3, h));
      for (int i = 0; i < 3; ++i) pi[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    out.push_back(pi);
  }
  return out;
}

/// Extreme pi_target(3) of the cycle started in A over controls a = 1 +- 0.5
/// with at most one switch, searched on 2000 switch times.
inline double cycle_single_switch_best(std::size_t target, bool maximize) {
  const int grid = 2000;
  const double sgn = maximize ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const double first : {1.5, 0.5}) {
    const auto head = cycle_path({1.0, 0.0, 0.0}, first, grid);
    // pi(3) = P(3 - tau) head(tau), P assembled from unit vectors
    std::vector<std::vector<std::vector<double>>> tail;
    for (int e = 0; e < 3; ++e) {
      std::vector<double> unit(3, 0.0);
      unit[e] = 1.0;
      tail.push_back(cycle_path(unit, 2.0 - first, grid));
    }
    for (int j = 0; j <= grid; ++j) {
      double v = 0.0;
      for (int e = 0; e < 3; ++e) v += tail[e][grid - j][target] * head[j][e];
      best = std::max(best, sgn * v);
    }
  }
  return sgn * best;
}

}  // namespace anreach::testing
