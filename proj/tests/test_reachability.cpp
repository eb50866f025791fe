#include <doctest.h>

#include <cmath>

#include "anreach/error.hpp"
#include "anreach/models.hpp"
#include "anreach/reachability.hpp"
#include "helpers.hpp"

using namespace anreach;

namespace {

Envelope envelope_of(const AgentNetwork& an) { return build_envelope(an, nominal_trajectory(an, {}).trajectory); }

const GridSpec kCoarse{0.5};

}  // namespace

TEST_CASE("grid times") {
  const auto t = GridSpec{0.04}.times(3.0);
  CHECK(t.size() == 76);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 3.0);
  const auto u = GridSpec{0.03}.times(3.0);
  REQUIRE(u.size() >= 2);
  CHECK(u[u.size() - 2] == doctest::Approx(2.97));
  CHECK(u.back() == 3.0);
  CHECK(GridSpec{5.0}.times(3.0) == std::vector<double>{0.0, 3.0});
  CHECK_THROWS_AS(GridSpec{0.0}.times(3.0), Error);
}

TEST_CASE("scale names") {
  CHECK(parse_scale("mass") == Scale::Mass);
  CHECK(parse_scale("unit") == Scale::Unit);
  CHECK_FALSE(parse_scale("other").has_value());
  CHECK(to_string(TubeStatus::FailedEpsPrime) == "FailedEpsPrime");
}

TEST_CASE("Psi vanishes without uncertainty") {
  const auto env = envelope_of(models::multiclass_sirs(1, 0.0));
  const auto psi = evaluate_psi(env, GridSpec{0.04}, 0.0, {});
  CHECK(psi.value == 0.0);
  CHECK(psi.solves == 2 * 3 * 75);
  CHECK(psi.records.size() == 3 * 75);
}

TEST_CASE("Psi is monotone in eps and scales with the mass") {
  const auto env = envelope_of(models::multiclass_sirs(1, 0.05));
  const auto a = evaluate_psi(env, kCoarse, 0.05, {});
  const auto b = evaluate_psi(env, kCoarse, 0.10, {});
  CHECK(a.value > 0.0);
  CHECK(a.value <= b.value);
  PsiConfig unit;
  unit.scale = Scale::Unit;
  const auto c = evaluate_psi(env, kCoarse, 0.05, unit);
  CHECK(a.value == doctest::Approx(env.mass() * c.value));
  const auto& r = a.records[a.argmax];
  CHECK(env.mass() * r.deviation() == doctest::Approx(a.value));
  for (const auto& rec : a.records) {
    CHECK(rec.min <= rec.nominal + 1e-12);
    CHECK(rec.nominal <= rec.max + 1e-12);
  }
}

TEST_CASE("serial and parallel Psi agree exactly") {
  const auto env = envelope_of(models::gps_queue(2, 0.05));
  PsiConfig cfg;
  cfg.threads = 2;
  const auto par = evaluate_psi(env, GridSpec{0.25}, 0.01, cfg);
  const auto ser = evaluate_psi_serial(env, GridSpec{0.25}, 0.01, cfg);
  CHECK(par.value == ser.value);
  CHECK(par.argmax == ser.argmax);
  REQUIRE(par.records.size() == ser.records.size());
  for (std::size_t i = 0; i < par.records.size(); ++i) {
    CHECK(par.records[i].min == ser.records[i].min);
    CHECK(par.records[i].max == ser.records[i].max);
  }
}

TEST_CASE("fixed point certifies GPS") {
  FixedPointConfig cfg;
  cfg.eta = 1e-4;
  const auto tube = fixed_point_bound(models::gps_queue(2, 0.05), GridSpec{0.2}, cfg);
  REQUIRE(tube.status == TubeStatus::Certified);
  CHECK(tube.eps_star > 0.0);
  CHECK(tube.eps_star < tube.eps_prime);
  for (std::size_t k = 1; k + 1 < tube.iterates.size(); ++k) CHECK(tube.iterates[k] >= tube.iterates[k - 1]);
  CHECK(tube.psi_values.back() < tube.eps_star + cfg.eta);
  REQUIRE(tube.lower.size() == tube.times.size());
  for (std::size_t i = 0; i < tube.times.size(); ++i)
    for (std::size_t s = 0; s < tube.state_names.size(); ++s) {
      CHECK(tube.upper[i][s] - tube.lower[i][s] == doctest::Approx(2.0 * tube.eps_star));
      CHECK(tube.nominal[i][s] == doctest::Approx(0.5 * (tube.upper[i][s] + tube.lower[i][s])));
    }
}

TEST_CASE("fixed point without uncertainty") {
  FixedPointConfig cfg;
  cfg.eta = 1e-3;
  const auto tube = fixed_point_bound(models::multiclass_sirs(1, 0.0), kCoarse, cfg);
  REQUIRE(tube.status == TubeStatus::Certified);
  CHECK(tube.eps_star == doctest::Approx(cfg.eta));
  CHECK(tube.iterates.front() == 0.0);
}

TEST_CASE("iteration limits and failures are reported") {
  FixedPointConfig cfg;
  cfg.max_iter = 1;
  const auto tube = fixed_point_bound(models::gps_queue(2, 0.05), kCoarse, cfg);
  CHECK(tube.status == TubeStatus::MaxIterations);
  CHECK(tube.lower.empty());
  CHECK(tube.message.find("1 iterations") != std::string::npos);

  FixedPointConfig big;
  big.eta = 2.0;
  const auto fail = fixed_point_bound(models::multiclass_sirs(1, 0.05), kCoarse, big);
  CHECK(fail.status == TubeStatus::FailedEpsPrime);
  CHECK_FALSE(fail.message.empty());

  FixedPointConfig bad;
  bad.eta = 0.0;
  CHECK_THROWS_AS(fixed_point_bound(models::gps_queue(1, 0.05), kCoarse, bad), Error);
}

TEST_CASE("lambda bound") {
  for (int D = 1; D <= 3; ++D) {
    const auto env = envelope_of(models::multiclass_sirs(D, 0.05));
    const double lambda = lambda_bound(env, 0.0);
    CHECK(lambda > 0.0);
    CHECK(lambda <= 6.0 * D);
    CHECK(lambda_bound(env, 0.05) >= lambda);
  }
  const auto idle = testing::toy_chain({"A", "B"}, {1.0, 0.0}, 1.0, {{0, 1, 0.0, 0.0}});
  CHECK(lambda_bound(idle, 0.0) == 0.0);
  // A -2-> B -3-> A: B carries 3 out and 2 in
  const auto pair = testing::toy_chain({"A", "B"}, {1.0, 0.0}, 1.0, {{0, 1, 2.0, 0.0}, {1, 0, 3.0, 0.0}});
  CHECK(lambda_bound(pair, 0.0) == doctest::Approx(5.0));
  const auto doubled = testing::toy_chain({"A", "B"}, {1.0, 0.0}, 1.0, {{0, 1, 4.0, 0.0}, {1, 0, 6.0, 0.0}});
  CHECK(lambda_bound(doubled, 0.0) == doctest::Approx(10.0));
}

TEST_CASE("grid refinement") {
  FixedPointConfig cfg;
  cfg.eta = 1e-4;
  const auto steps = refine_grid(models::gps_queue(2, 0.05), cfg, {0.5, 0.25});
  REQUIRE(steps.size() == 2);
  CHECK_FALSE(steps[0].relative_change.has_value());
  REQUIRE(steps[1].relative_change.has_value());
  CHECK(*steps[1].relative_change >= 0.0);
  CHECK(steps[1].eps_star >= steps[0].eps_star * 0.5);
  CHECK_THROWS_AS(refine_grid(models::gps_queue(1, 0.05), cfg, {0.25, 0.5}), Error);
  CHECK_THROWS_AS(refine_grid(models::gps_queue(1, 0.05), cfg, {0.25, 0.25}), Error);
}
