#include "anreach/reachability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "anreach/error.hpp"

#ifdef ANREACH_HAVE_OPENMP
#include <omp.h>
#endif

namespace anreach {

std::vector<double> GridSpec::times(double horizon) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  std::vector<double> t;
  for (std::size_t l = 0;; ++l) {
    const double x = dt * static_cast<double>(l);
    if (!(x < horizon * (1.0 - 1e-12))) break;
    t.push_back(x);
  }
  t.push_back(horizon);
  return t;
}

std::string_view to_string(Scale s) { return s == Scale::Mass ? "mass" : "unit"; }

std::optional<Scale> parse_scale(std::string_view s) {
  if (s == "mass") return Scale::Mass;
  if (s == "unit") return Scale::Unit;
  return std::nullopt;
}

std::string_view to_string(TubeStatus s) {
  switch (s) {
    case TubeStatus::Certified: return "Certified";
    case TubeStatus::FailedEpsPrime: return "FailedEpsPrime";
    case TubeStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

double ExtremalRecord::deviation() const { return std::max(max - nominal, nominal - min); }

namespace {

struct Slot {
  std::vector<ExtremalRecord> records;
};

void solve_time(const Envelope& env, double t_hat, double eps, const PsiConfig& cfg, Slot& slot) {
  const ExtremalKernel kernel(env, t_hat, eps, cfg.step);
  const auto nominal = kernel.nominal_distribution();
  const std::size_t n = env.num_states();
  std::vector<double> w(n, 0.0);
  slot.records.clear();
  for (std::size_t a = 0; a < n; ++a) {
    w[a] = 1.0;
    const double lo = kernel.solve(w, Direction::Min, false).value;
    const double hi = kernel.solve(w, Direction::Max, false).value;
    w[a] = 0.0;
    slot.records.push_back({a, t_hat, nominal[a], lo, hi});
  }
}

PsiEvaluation reduce(std::vector<Slot>& slots, const Envelope& env, Scale scale) {
  PsiEvaluation out;
  double best = 0.0;
  for (auto& s : slots) {
    for (auto& r : s.records) {
      const double d = r.deviation();
      if (d > best) {
        best = d;
        out.argmax = out.records.size();
      }
      out.records.push_back(r);
    }
  }
  out.solves = 2 * out.records.size();
  out.value = (scale == Scale::Mass ? env.mass() : 1.0) * best;
  return out;
}

}  // namespace

PsiEvaluation evaluate_psi_serial(const Envelope& env, const GridSpec& grid, double eps, const PsiConfig& cfg) {
  const auto times = grid.times(env.horizon());
  std::vector<Slot> slots(times.size() - 1);
  for (std::size_t j = 1; j < times.size(); ++j) solve_time(env, times[j], eps, cfg, slots[j - 1]);
  return reduce(slots, env, cfg.scale);
}

PsiEvaluation evaluate_psi(const Envelope& env, const GridSpec& grid, double eps, const PsiConfig& cfg) {
#ifdef ANREACH_HAVE_OPENMP
  const auto times = grid.times(env.horizon());
  const auto tasks = static_cast<std::ptrdiff_t>(times.size() - 1);
  std::vector<Slot> slots(times.size() - 1);
  std::exception_ptr failure;
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
  // Longest horizons first so the dynamic schedule balances well.
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < tasks; ++k) {
    const auto j = static_cast<std::size_t>(tasks - k);
    try {
      solve_time(env, times[j], eps, cfg, slots[j - 1]);
    } catch (...) {
#pragma omp critical(anreach_psi_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(slots, env, cfg.scale);
#else
  return evaluate_psi_serial(env, grid, eps, cfg);
#endif
}

double lambda_bound(const Envelope& env, double eps) {
  const auto b = env.bounds_at(eps);
  const std::size_t n = env.num_states();
  double lambda = 0.0;
  std::vector<double> activity(n);
  for (std::size_t g = 0; g < env.grid().size(); ++g) {
    std::fill(activity.begin(), activity.end(), 0.0);
    for (const auto& tr : env.transitions()) {
      double r = env.coefficient(tr.base, g);
      for (const auto& term : tr.terms) r += std::abs(env.coefficient(term.coeff, g)) * b[term.uncertainty];
      activity[tr.from] += r;
      activity[tr.to] += r;
    }
    lambda = std::max(lambda, *std::max_element(activity.begin(), activity.end()));
  }
  return lambda;
}

ReachTube fixed_point_bound(const AgentNetwork& an, const GridSpec& grid, const FixedPointConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
  const auto start = std::chrono::steady_clock::now();

  const auto nominal = nominal_trajectory(an, cfg.integrator);
  const Envelope env = build_envelope(an, nominal.trajectory);

  ReachTube tube;
  tube.state_names = an.state_names();
  tube.eps_prime = nominal.eps_prime;
  tube.times = grid.times(an.horizon);
  for (double t : tube.times) tube.nominal.push_back(nominal.trajectory.at(t));

  const double cap = std::min(cfg.scale == Scale::Mass ? nominal.eps_prime : nominal.eps_prime / env.mass(),
                              env.eps_limit());
  const PsiConfig pcfg{cfg.scale, cfg.solver_step, cfg.threads};

  double eps = 0.0;
  tube.iterates.push_back(eps);
  bool done = false;
  for (int k = 0; k < cfg.max_iter && !done; ++k) {
    if (eps >= cap) {
      std::ostringstream os;
      os << "iterate " << eps << " reached the positivity cap " << cap;
      tube.status = TubeStatus::FailedEpsPrime;
      tube.message = os.str();
      done = true;
      break;
    }
    if (auto violation = env.nonnegativity_violation(eps)) {
      tube.status = TubeStatus::FailedEpsPrime;
      tube.message = *violation;
      done = true;
      break;
    }
    const auto psi = evaluate_psi(env, grid, eps, pcfg);
    tube.solves += psi.solves;
    tube.psi_values.push_back(psi.value);
    const double next = psi.value + cfg.eta;
    tube.iterates.push_back(next);
    // Psi(eps) < eps already certifies eps.
    if (next < eps || psi.value < eps) {
      tube.status = TubeStatus::Certified;
      tube.eps_star = eps;
      done = true;
      break;
    }
    eps = next;
  }
  if (!done) {
    tube.status = TubeStatus::MaxIterations;
    tube.message = "no certificate after " + std::to_string(cfg.max_iter) + " iterations";
  }

  if (tube.status == TubeStatus::Certified) {
    for (const auto& v : tube.nominal) {
      std::vector<double> lo(v.size()), hi(v.size());
      for (std::size_t b = 0; b < v.size(); ++b) {
        lo[b] = v[b] - tube.eps_star;
        hi[b] = v[b] + tube.eps_star;
      }
      tube.lower.push_back(std::move(lo));
      tube.upper.push_back(std::move(hi));
    }
  }
  tube.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tube;
}

std::vector<RefinementStep> refine_grid(const AgentNetwork& an, const FixedPointConfig& cfg,
                                        const std::vector<double>& dt_sequence) {
  for (std::size_t i = 1; i < dt_sequence.size(); ++i) {
    if (!(dt_sequence[i] < dt_sequence[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid spacings must be strictly decreasing");
    }
  }
  std::vector<RefinementStep> out;
  for (double dt : dt_sequence) {
    const auto tube = fixed_point_bound(an, GridSpec{dt}, cfg);
    RefinementStep step{dt, tube.status, tube.eps_star, std::nullopt};
    if (!out.empty() && out.back().eps_star > 0.0) {
      step.relative_change = std::abs(step.eps_star - out.back().eps_star) / out.back().eps_star;
    }
    out.push_back(step);
  }
  return out;
}

}  // namespace anreach
