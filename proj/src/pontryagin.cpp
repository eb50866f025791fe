#include "anreach/pontryagin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anreach/error.hpp"

namespace anreach {

std::string_view to_string(Direction d) { return d == Direction::Min ? "min" : "max"; }

TargetSpec TargetSpec::indicator(std::size_t num_states, std::size_t state, double time, Direction direction) {
  if (state >= num_states) throw Error(ErrorCode::InvalidArgument, "target state out of range");
  TargetSpec t;
  t.weights.assign(num_states, 0.0);
  t.weights[state] = 1.0;
  t.time = time;
  t.direction = direction;
  return t;
}

std::vector<double> costate_rhs(const Envelope& env, double t, std::span<const double> p, double eps) {
  std::vector<double> k(env.num_coefficients());
  env.coefficients_at(t, k);
  const auto b = env.bounds_at(eps);
  std::vector<double> dp(env.num_states(), 0.0);
  for (const auto& tr : env.transitions()) {
    const double d = p[tr.from] - p[tr.to];
    double rate = k[tr.base];
    for (const auto& term : tr.terms) {
      const double psi = -d * k[term.coeff];
      rate += k[term.coeff] * bang_bang_rule(psi, b[term.uncertainty]);
    }
    dp[tr.from] += d * rate;
  }
  return dp;
}

double switching_tolerance(double xi, double t_hat, std::size_t n, double c1, double c2) {
  const double denom = t_hat * static_cast<double>(n) * c1 * c2;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return xi / denom;
}

double switching_tolerance(const Envelope& env, double xi, double t_hat, double eps) {
  double c1 = 0.0;
  for (std::size_t g = 0; g < env.grid().size(); ++g)
    for (const auto& tr : env.transitions())
      for (const auto& term : tr.terms) c1 = std::max(c1, std::abs(env.coefficient(term.coeff, g)));
  double c2 = 0.0;
  for (double b : env.bounds_at(eps)) c2 = std::max(c2, 2.0 * b);
  return switching_tolerance(xi, t_hat, env.uncertainties().size(), c1, c2);
}

ExtremalKernel::ExtremalKernel(const Envelope& env, double t_hat, double eps, double step)
    : env_(env),
      n_states_(env.num_states()),
      n_trans_(env.transitions().size()),
      n_unc_(env.uncertainties().size()),
      t_hat_(t_hat) {
  if (!(t_hat > 0.0) || t_hat > env.horizon() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "target time " + std::to_string(t_hat) + " outside (0, horizon]");
  }
  const double h = step > 0.0 ? step : env.horizon() / 3000.0;
  steps_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_hat / h)));
  h_ = t_hat / static_cast<double>(steps_);

  from_.resize(n_trans_);
  to_.resize(n_trans_);
  term_trans_.assign(n_unc_, 0);
  for (std::size_t j = 0; j < n_trans_; ++j) {
    const auto& tr = env.transitions()[j];
    from_[j] = tr.from;
    to_[j] = tr.to;
    for (const auto& term : tr.terms) term_trans_[term.uncertainty] = j;
  }

  bounds_ = env.bounds_at(eps);
  const auto& bounds = bounds_;
  const std::size_t halves = 2 * steps_ + 1;
  base_.resize(halves * n_trans_);
  k_.assign(halves * n_unc_, 0.0);
  kb_.assign(halves * n_unc_, 0.0);
  spread_.assign(halves * n_trans_, 0.0);
  std::vector<double> c(env.num_coefficients());
  for (std::size_t j = 0; j < halves; ++j) {
    const double t = j + 1 == halves ? t_hat : 0.5 * h_ * static_cast<double>(j);
    env.coefficients_at(t, c);
    for (std::size_t r = 0; r < n_trans_; ++r) {
      const auto& tr = env.transitions()[r];
      base_[j * n_trans_ + r] = c[tr.base];
      for (const auto& term : tr.terms) {
        k_[j * n_unc_ + term.uncertainty] = c[term.coeff];
        kb_[j * n_unc_ + term.uncertainty] = c[term.coeff] * bounds[term.uncertainty];
        spread_[j * n_trans_ + r] += c[term.coeff] * bounds[term.uncertainty];
      }
    }
  }
}

void ExtremalKernel::costate_derivative(std::size_t half, std::span<const double> p, std::span<double> dp) const {
  std::fill(dp.begin(), dp.end(), 0.0);
  const double* base = base_.data() + half * n_trans_;
  // Under the bang-bang rule each term contributes -|p_B - p_C| k_i b_i.
  const double* spread = spread_.data() + half * n_trans_;
  for (std::size_t r = 0; r < n_trans_; ++r) {
    const double d = p[from_[r]] - p[to_[r]];
    dp[from_[r]] += d * base[r] - std::abs(d) * spread[r];
  }
}

void ExtremalKernel::step_rates(std::size_t half, std::span<const std::int8_t> signs, std::span<double> rates) const {
  const double* base = base_.data() + half * n_trans_;
  const double* kb = kb_.data() + half * n_unc_;
  std::copy(base, base + n_trans_, rates.begin());
  for (std::size_t i = 0; i < n_unc_; ++i)
    if (signs[i] != 0) rates[term_trans_[i]] += static_cast<double>(signs[i]) * kb[i];
}

void ExtremalKernel::forward_derivative(std::span<const double> rates, std::span<const double> pi,
                                        std::span<double> dpi) const {
  std::fill(dpi.begin(), dpi.end(), 0.0);
  for (std::size_t r = 0; r < n_trans_; ++r) {
    const double flow = rates[r] * pi[from_[r]];
    dpi[from_[r]] -= flow;
    dpi[to_[r]] += flow;
  }
}

std::vector<double> ExtremalKernel::integrate_forward(std::span<const std::int8_t> signs,
                                                      std::vector<double>* trace) const {
  const std::size_t n = n_states_;
  std::vector<double> pi = env_.initial_distribution();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<double> r0(n_trans_), r1(n_trans_), r2(n_trans_);
  if (trace) {
    trace->assign((steps_ + 1) * n, 0.0);
    std::copy(pi.begin(), pi.end(), trace->begin());
  }
  const std::vector<std::int8_t> zero(n_unc_, 0);
  for (std::size_t s = 0; s < steps_; ++s) {
    const auto sg = signs.empty() ? std::span<const std::int8_t>(zero) : signs.subspan(s * n_unc_, n_unc_);
    step_rates(2 * s, sg, r0);
    step_rates(2 * s + 1, sg, r1);
    step_rates(2 * s + 2, sg, r2);
    forward_derivative(r0, pi, k1);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = pi[k] + 0.5 * h_ * k1[k];
    forward_derivative(r1, tmp, k2);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = pi[k] + 0.5 * h_ * k2[k];
    forward_derivative(r1, tmp, k3);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = pi[k] + h_ * k3[k];
    forward_derivative(r2, tmp, k4);
    for (std::size_t k = 0; k < n; ++k) {
      pi[k] += h_ / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      if (!std::isfinite(pi[k])) throw Error(ErrorCode::NonFiniteDerivative, "distribution became non-finite");
      if (pi[k] < -1e-9) {
        throw Error(ErrorCode::PositivityFloorBreached,
                    "probability of " + env_.state_names()[k] + " fell below zero at t=" +
                        std::to_string(h_ * static_cast<double>(s + 1)));
      }
    }
    if (trace) std::copy(pi.begin(), pi.end(), trace->begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
  }
  return pi;
}

std::vector<double> ExtremalKernel::nominal_distribution() const { return integrate_forward({}, nullptr); }

std::vector<double> ExtremalKernel::forward(std::span<const std::int8_t> signs) const {
  if (signs.size() != steps_ * n_unc_) throw Error(ErrorCode::InvalidArgument, "control signs have the wrong size");
  return integrate_forward(signs, nullptr);
}

ExtremalSolution ExtremalKernel::solve(std::span<const double> weights, Direction direction, bool record) const {
  const std::size_t n = n_states_;
  if (weights.size() != n) throw Error(ErrorCode::InvalidArgument, "target weights have the wrong size");

  // Backward costate, stored at step points 0..steps.
  std::vector<double> p((steps_ + 1) * n);
  const double sign = direction == Direction::Max ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) p[steps_ * n + k] = sign * weights[k];
  std::vector<double> cur(p.begin() + static_cast<std::ptrdiff_t>(steps_ * n), p.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double dt = -h_;
  for (std::size_t s = steps_; s > 0; --s) {
    costate_derivative(2 * s, cur, k1);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = cur[k] + 0.5 * dt * k1[k];
    costate_derivative(2 * s - 1, tmp, k2);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = cur[k] + 0.5 * dt * k2[k];
    costate_derivative(2 * s - 1, tmp, k3);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = cur[k] + dt * k3[k];
    costate_derivative(2 * s - 2, tmp, k4);
    for (std::size_t k = 0; k < n; ++k) cur[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    std::copy(cur.begin(), cur.end(), p.begin() + static_cast<std::ptrdiff_t>((s - 1) * n));
  }

  // Control per step from psi at the step midpoint.
  std::vector<std::int8_t> signs(steps_ * n_unc_);
  std::vector<double> psi_abs(steps_ * n_unc_);
  for (std::size_t s = 0; s < steps_; ++s) {
    const double* k = k_.data() + (2 * s + 1) * n_unc_;
    for (std::size_t i = 0; i < n_unc_; ++i) {
      const std::size_t r = term_trans_[i];
      const double dp = 0.5 * (p[s * n + to_[r]] + p[(s + 1) * n + to_[r]]) -
                        0.5 * (p[s * n + from_[r]] + p[(s + 1) * n + from_[r]]);
      const double psi = dp * k[i];
      signs[s * n_unc_ + i] = psi >= 0.0 ? 1 : -1;
      psi_abs[s * n_unc_ + i] = std::abs(psi);
    }
  }

  ExtremalSolution sol;
  std::vector<double> trace;
  sol.final_distribution = integrate_forward(signs, record ? &trace : nullptr);
  sol.value = 0.0;
  for (std::size_t k = 0; k < n; ++k) sol.value += weights[k] * sol.final_distribution[k];

  sol.switching_margin.assign(n_unc_, std::numeric_limits<double>::infinity());
  sol.switches.assign(n_unc_, 0);
  for (std::size_t i = 0; i < n_unc_; ++i) {
    for (std::size_t s = 0; s < steps_; ++s) {
      const auto here = signs[s * n_unc_ + i];
      const bool left = s == 0 || signs[(s - 1) * n_unc_ + i] == here;
      const bool right = s + 1 == steps_ || signs[(s + 1) * n_unc_ + i] == here;
      if (!left) ++sol.switches[i];
      if (left && right) sol.switching_margin[i] = std::min(sol.switching_margin[i], psi_abs[s * n_unc_ + i]);
    }
  }

  if (record) {
    std::vector<double> times(steps_ + 1);
    for (std::size_t s = 0; s <= steps_; ++s) times[s] = s == steps_ ? t_hat_ : h_ * static_cast<double>(s);
    sol.costate = Trajectory(times, std::move(p), n);
    sol.distribution = Trajectory(times, std::move(trace), n);
    sol.step_times.assign(times.begin(), times.end() - 1);
    sol.controls.resize(steps_ * n_unc_);
    for (std::size_t j = 0; j < signs.size(); ++j)
      sol.controls[j] = static_cast<double>(signs[j]) * bounds_[j % n_unc_];
  }
  return sol;
}

ExtremalSolution solve_extremal(const Envelope& env, const TargetSpec& target, double eps, const SolverConfig& cfg) {
  env.check_nonnegative(eps);
  ExtremalKernel kernel(env, target.time, eps, cfg.step);
  return kernel.solve(target.weights, target.direction, cfg.record);
}

}  // namespace anreach
