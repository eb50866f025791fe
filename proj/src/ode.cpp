#include "anreach/ode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "anreach/agent_network.hpp"
#include "anreach/error.hpp"

namespace anreach {

Trajectory::Trajectory(std::vector<double> times, std::vector<double> values, std::size_t dim)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim) {
  if (times_.empty() || values_.size() != times_.size() * dim_) {
    throw Error(ErrorCode::InvalidArgument, "trajectory storage does not match its grid");
  }
}

void Trajectory::at(double t, std::span<double> out) const {
  if (t <= times_.front()) {
    std::copy_n(values_.begin(), dim_, out.begin());
    return;
  }
  if (t >= times_.back()) {
    std::copy_n(values_.end() - static_cast<std::ptrdiff_t>(dim_), dim_, out.begin());
    return;
  }
  const auto hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) -
                                           times_.begin());
  const std::size_t lo = hi - 1;
  if (times_[lo] == t) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(lo * dim_), dim_, out.begin());
    return;
  }
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  for (std::size_t k = 0; k < dim_; ++k) {
    out[k] = (1.0 - w) * values_[lo * dim_ + k] + w * values_[hi * dim_ + k];
  }
}

std::vector<double> Trajectory::at(double t) const {
  std::vector<double> out(dim_);
  at(t, out);
  return out;
}

double Trajectory::at(double t, std::size_t component) const {
  std::vector<double> out(dim_);
  at(t, out);
  return out[component];
}

void Trajectory::write_csv(std::ostream& os, const std::vector<std::string>& names) const {
  os << "t";
  for (const auto& n : names) os << "," << n;
  os << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    os << times_[i];
    for (std::size_t k = 0; k < dim_; ++k) os << "," << values_[i * dim_ + k];
    os << "\n";
  }
}

namespace {

void check_state(std::span<const double> x, double t, const IntegratorConfig& cfg) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) {
      throw Error(ErrorCode::NonFiniteDerivative,
                  "non-finite state component " + std::to_string(k) + " at t=" + std::to_string(t));
    }
    if (cfg.monitor_positivity && x[k] < cfg.positivity_floor) {
      throw Error(ErrorCode::PositivityFloorBreached,
                  "component " + std::to_string(k) + " = " + std::to_string(x[k]) +
                      " fell below the floor at t=" + std::to_string(t));
    }
  }
}

}  // namespace

Trajectory integrate(const OdeRhs& rhs, std::span<const double> x0, double t_start, double t_end,
                     const IntegratorConfig& cfg) {
  const double span = std::abs(t_end - t_start);
  if (!(span > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty integration span");
  const double h = cfg.step > 0.0 ? cfg.step : span / 3000.0;
  if (h > span * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "step exceeds the integration span");
  }
  const double dir = t_end > t_start ? 1.0 : -1.0;
  auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-9));
  steps = std::max<std::size_t>(steps, 1);

  const std::size_t n = x0.size();
  std::vector<double> times(steps + 1);
  std::vector<double> values((steps + 1) * n);
  std::vector<double> x(x0.begin(), x0.end()), k1(n), k2(n), k3(n), k4(n), tmp(n);

  check_state(x, t_start, cfg);
  times[0] = t_start;
  std::copy(x.begin(), x.end(), values.begin());

  auto finite_or_throw = [](std::span<const double> d, double t) {
    for (double v : d)
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteDerivative, "rhs not finite at t=" + std::to_string(t));
  };

  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t_start + dir * h * static_cast<double>(s);
    const double t_next = (s + 1 == steps) ? t_end : t_start + dir * h * static_cast<double>(s + 1);
    const double dt = t_next - t;
    rhs(t, x, k1);
    finite_or_throw(k1, t);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + 0.5 * dt * k1[k];
    rhs(t + 0.5 * dt, tmp, k2);
    finite_or_throw(k2, t);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + 0.5 * dt * k2[k];
    rhs(t + 0.5 * dt, tmp, k3);
    finite_or_throw(k3, t);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + dt * k3[k];
    rhs(t_next, tmp, k4);
    finite_or_throw(k4, t);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    check_state(x, t_next, cfg);
    times[s + 1] = t_next;
    std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
  }

  if (dir < 0.0) {
    std::reverse(times.begin(), times.end());
    for (std::size_t i = 0, j = steps; i < j; ++i, --j) {
      std::swap_ranges(values.begin() + static_cast<std::ptrdiff_t>(i * n),
                       values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n),
                       values.begin() + static_cast<std::ptrdiff_t>(j * n));
    }
  }
  return Trajectory(std::move(times), std::move(values), n);
}

NominalSolution nominal_trajectory(const AgentNetwork& an, const IntegratorConfig& cfg,
                                   double t_end) {
  const double horizon = t_end > 0.0 ? t_end : an.horizon;
  IntegratorConfig c = cfg;
  c.monitor_positivity = true;
  if (c.step <= 0.0) c.step = an.horizon / 3000.0;
  const std::vector<double> no_deviation(an.parameters.size(), 0.0);
  auto rhs = [&](double t, std::span<const double> V, std::span<double> dV) {
    const auto f = global_drift(an, t, V, no_deviation);
    std::copy(f.begin(), f.end(), dV.begin());
  };
  Trajectory traj = integrate(rhs, an.initial, 0.0, horizon, c);
  double eps_prime = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (double v : traj.value(i)) eps_prime = std::min(eps_prime, v);
  return {std::move(traj), eps_prime};
}

}  // namespace anreach
