#include <benchmark/benchmark.h>

#include "anreach/models.hpp"
#include "anreach/reachability.hpp"

namespace {

using namespace anreach;

// range(0) selects the model: 0 = SIRS D=2, 1 = GPS D=3.
const Envelope& envelope(std::int64_t which) {
  static const Envelope sirs = [] {
    const auto an = models::multiclass_sirs(2, 0.05);
    return build_envelope(an, nominal_trajectory(an, {}).trajectory);
  }();
  static const Envelope gps = [] {
    const auto an = models::gps_queue(3, 0.05);
    return build_envelope(an, nominal_trajectory(an, {}).trajectory);
  }();
  return which == 0 ? sirs : gps;
}

double eps_for(std::int64_t which) { return which == 0 ? 0.05 : 0.005; }

void BM_PsiSerial(benchmark::State& state) {
  const auto& env = envelope(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_psi_serial(env, GridSpec{0.04}, eps_for(state.range(0)), {}).value);
  }
}

void BM_PsiParallel(benchmark::State& state) {
  const auto& env = envelope(state.range(0));
  PsiConfig cfg;
  cfg.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_psi(env, GridSpec{0.04}, eps_for(state.range(0)), cfg).value);
  }
}

}  // namespace

BENCHMARK(BM_PsiSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsiParallel)->ArgsProduct({{0, 1}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
