#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace anreach {

struct AgentNetwork;

/// Dense solution on an increasing time grid; queries between grid points
/// interpolate linearly.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<double> values, std::size_t dim);

  std::size_t size() const { return times_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& times() const { return times_; }
  double t_start() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::span<const double> value(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t component) const { return values_[i * dim_ + component]; }

  void at(double t, std::span<double> out) const;
  std::vector<double> at(double t) const;
  double at(double t, std::size_t component) const;

  /// Header `t,<names...>`, 17 significant digits.
  void write_csv(std::ostream& os, const std::vector<std::string>& names) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;  // row-major, size() x dim()
  std::size_t dim_ = 0;
};

struct IntegratorConfig {
  double step = 0.0;  // 0 selects span / 3000
  double positivity_floor = 1e-9;
  bool monitor_positivity = false;
};

using OdeRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

/// Classical RK4 at fixed step from t_start to t_end (backward when
/// t_end < t_start). Uniform steps except possibly the last one.
Trajectory integrate(const OdeRhs& rhs, std::span<const double> x0, double t_start, double t_end,
                     const IntegratorConfig& cfg);

struct NominalSolution {
  Trajectory trajectory;
  /// min over grid points and states of V^0.
  double eps_prime;
};

/// Integrates the global drift with zero uncertainty over [0, horizon], with
/// positivity monitoring.
NominalSolution nominal_trajectory(const AgentNetwork& an, const IntegratorConfig& cfg,
                                   double t_end = -1.0);

}  // namespace anreach
