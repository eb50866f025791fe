#include "anreach/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace anreach {

void write_extremal_csv(std::ostream& os, const Envelope& env, const ExtremalSolution& sol) {
  const auto& names = env.state_names();
  const auto& unc = env.uncertainties();
  os << "t";
  for (const auto& n : names) os << ",p_" << n;
  for (const auto& n : names) os << ",pi_" << n;
  for (const auto& u : unc) os << "," << u.name;
  os << "\n" << std::setprecision(17);
  const std::size_t m = unc.size();
  const std::size_t steps = sol.step_times.size();
  for (std::size_t s = 0; s < sol.costate.size(); ++s) {
    os << sol.costate.times()[s];
    for (double v : sol.costate.value(s)) os << "," << v;
    for (double v : sol.distribution.value(s)) os << "," << v;
    const std::size_t row = steps == 0 ? 0 : std::min(s, steps - 1);
    for (std::size_t i = 0; i < m; ++i) os << "," << (steps == 0 ? 0.0 : sol.controls[row * m + i]);
    os << "\n";
  }
}

nlohmann::json extremal_summary(const Envelope& env, const TargetSpec& target, double eps,
                                const ExtremalSolution& sol) {
  nlohmann::json margin = nlohmann::json::object();
  nlohmann::json switches = nlohmann::json::object();
  for (std::size_t i = 0; i < env.uncertainties().size(); ++i) {
    const auto& name = env.uncertainties()[i].name;
    const double mg = sol.switching_margin[i];
    margin[name] = std::isfinite(mg) ? nlohmann::json(mg) : nlohmann::json(nullptr);
    switches[name] = sol.switches[i];
  }
  return {{"value", sol.value},
          {"direction", std::string(to_string(target.direction))},
          {"time", target.time},
          {"eps", eps},
          {"switching_margin", margin},
          {"switches", switches}};
}

void write_tube_csv(std::ostream& os, const ReachTube& tube) {
  os << "t";
  for (const auto& n : tube.state_names) os << ",lower_" << n;
  for (const auto& n : tube.state_names) os << ",upper_" << n;
  os << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < tube.lower.size(); ++i) {
    os << tube.times[i];
    for (double v : tube.lower[i]) os << "," << v;
    for (double v : tube.upper[i]) os << "," << v;
    os << "\n";
  }
}

nlohmann::json tube_summary(const ReachTube& tube) {
  nlohmann::json j = {{"status", std::string(to_string(tube.status))},
                      {"eps_star", tube.status == TubeStatus::Certified ? nlohmann::json(tube.eps_star)
                                                                       : nlohmann::json(nullptr)},
                      {"iterates", tube.iterates},
                      {"solves", tube.solves},
                      {"wall_time_s", tube.wall_time_s}};
  if (!tube.message.empty()) j["message"] = tube.message;
  return j;
}

}  // namespace anreach
