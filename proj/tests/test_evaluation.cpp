#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "csal/evaluation.hpp"
#include "csal/problems.hpp"

using namespace csal;

TEST_CASE("excess risk of a constant classifier has a closed form") {
  // g == 1 on the default ramp: regret (2x-1)+ integrates to 1/4
  auto p = make_ramp(1);
  std::mt19937_64 rng(12);
  auto est = excess_risk([](std::span<const double>) { return 1; }, p,
                         100000, rng);
  CHECK(est.samples == 100000);
  CHECK(est.se > 5e-4);
  CHECK(est.se < 2e-3);
  CHECK(std::abs(est.mean - 0.25) < 5 * est.se);

  // the Bayes rule itself has zero regret, exactly
  auto bayes = excess_risk([&p](std::span<const double> x) {
    return p.bayes_label(x);
  }, p, 2000, rng);
  CHECK(bayes.mean == 0.0);
  CHECK(bayes.se == 0.0);
}

TEST_CASE("classification excess risk matches the converted cost risk") {
  auto lp = make_classification_ramp(1);
  auto p = convert_classification(lp);
  auto g = [](std::span<const double> x) { return x[0] < 0.7 ? 1 : 2; };

  std::mt19937_64 r1(77), r2(77);  // identical streams, identical points
  auto cs = excess_risk(g, p, 50000, r1);
  auto cl = classification_excess_risk(g, lp, 50000, r2);
  // regrets agree pointwise, so with matched streams the estimates coincide
  CHECK(cs.mean == doctest::Approx(cl.mean).epsilon(1e-12));

  // analytic value: this split only errs on [0.5, 0.7), where the regret
  // is 1.2x - 0.6; the integral is 0.024
  std::mt19937_64 r3(5);
  auto fine = classification_excess_risk(g, lp, 200000, r3);
  CHECK(std::abs(fine.mean - 0.024) < 5 * fine.se);
}

TEST_CASE("rate fit recovers an exact power law") {
  std::vector<double> budgets{100, 200, 400, 800};
  std::vector<double> risks;
  for (double b : budgets) risks.push_back(10.0 / b);  // slope -1 exactly

  auto fit = rate_fit(budgets, risks);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(10.0)).epsilon(1e-10));
  CHECK(fit.slope_se == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(fit.points_used == 4);
  CHECK(fit.points_dropped == 0);

  // different exponent, different scale
  for (std::size_t i = 0; i < budgets.size(); ++i)
    risks[i] = 3.0 * std::pow(budgets[i], -2.0 / 3);
  fit = rate_fit(budgets, risks);
  CHECK(fit.slope == doctest::Approx(-2.0 / 3).epsilon(1e-12));
}

TEST_CASE("rate fit drops non-positive risks and demands three points") {
  std::vector<double> budgets{10, 20, 40, 80, 160};
  std::vector<double> risks{0.1, 0.0, -0.5, 0.05, 0.025};
  auto fit = rate_fit(budgets, risks);
  CHECK(fit.points_used == 3);
  CHECK(fit.points_dropped == 2);
  CHECK(fit.slope < 0);

  std::vector<double> b3{10, 20, 30};
  std::vector<double> r3{0.1, 0.0, 0.0};
  CHECK_THROWS_AS(rate_fit(b3, r3), std::invalid_argument);
}

TEST_CASE("plug-in depth rule at the standard geometry (frozen)") {
  auto geom1 = standard_geometry(1);
  std::vector<std::uint32_t> expected{3, 3, 4, 4, 4, 5, 5};
  std::uint64_t n = 512;
  for (std::uint32_t want : expected) {
    CHECK(passive_depth(n, 1.0, geom1) == want);
    n *= 2;
  }
  // d=2: log(4096) / (4 * log(2)/2) = 6
  CHECK(passive_depth(4096, 1.0, standard_geometry(2)) == 6);
  CHECK_THROWS_AS(passive_depth(0, 1.0, geom1), std::invalid_argument);
}

TEST_CASE("plug-in classifier: unseen cells default to label 1") {
  PassiveClassifier g;
  g.dim = 1;
  g.depth = 2;
  g.cell_labels = {{1, 2}, {2, 1}, {4, 2}};  // cell 3 of 4 left empty
  CHECK(g(std::array<double, 1>{0.1}) == 2);
  CHECK(g(std::array<double, 1>{0.3}) == 1);
  CHECK(g(std::array<double, 1>{0.6}) == 1);  // empty cell
  CHECK(g(std::array<double, 1>{0.9}) == 2);
  CHECK_THROWS_AS(g(std::array<double, 1>{1.2}), std::invalid_argument);
}

TEST_CASE("passive baseline labels cells by average sampled cost") {
  // constant costs, zero noise: every populated cell picks the cheap label
  auto p = make_constant_gap(1, {0.8, 0.2}).with_noise(NoiseModel::kZeroNoise);
  std::mt19937_64 rng(8);
  auto g = passive_baseline(2000, p, rng);
  CHECK(g.depth == passive_depth(2000, 1.0, standard_geometry(1)));
  int found = 0;
  for (const auto& [idx, label] : g.cell_labels) {
    CHECK(label == 2);
    ++found;
  }
  CHECK(found > 0);

  std::mt19937_64 r2(21);
  auto est = excess_risk([&g](std::span<const double> x) { return g(x); }, p,
                         5000, r2);
  CHECK(est.mean == 0.0);
}

TEST_CASE("bootstrap slope interval is deterministic in the seed") {
  std::vector<double> budgets{128, 256, 512, 1024};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::vector<std::vector<double>> risks;
  for (double b : budgets) {
    std::vector<double> reps;
    for (int r = 0; r < 10; ++r) reps.push_back(jitter(rng) * 20.0 / b);
    risks.push_back(reps);
  }

  auto a = bootstrap_slope_ci(budgets, risks, 500, 42);
  auto b = bootstrap_slope_ci(budgets, risks, 500, 42);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.resamples == 500);
  CHECK(a.lo <= a.hi);
  // the interval brackets the true slope for this gentle jitter
  CHECK(a.lo < -0.8);
  CHECK(a.hi > -1.2);

  auto c = bootstrap_slope_ci(budgets, risks, 500, 43);
  CHECK((c.lo != a.lo || c.hi != a.hi));
}

TEST_CASE("classified mass: closed form when available, sampling otherwise") {
  auto p = make_ramp(1);
  BoundParams bp = make_bound_params(100, 2, 1.0, 1.0, standard_geometry(1));
  LearnerState s;
  s.params = bp;
  auto kids = children(root_cell(1));
  ClassifiedCell cc;
  cc.cell = kids[0];
  cc.label = 1;
  cc.record = make_record(2);
  s.classified.push_back(cc);

  CHECK(classified_mass(s, p, 7) == doctest::Approx(0.5).epsilon(1e-12));

  Problem no_form = p;
  no_form.box_mass_fn = {};
  double est = classified_mass(s, no_form, 7);
  CHECK(std::abs(est - 0.5) < 0.05);
}

TEST_CASE("single active replicate fills the row schema") {
  auto p = make_ramp(1).with_noise(NoiseModel::kZeroNoise);
  auto row = active_replicate(p, default_learner_params(p, 500), 3, 99, 20000);
  CHECK(row.budget == 500);
  CHECK(row.replicate == 3);
  CHECK(row.seed == 99);
  CHECK(row.queries_total == 500);
  CHECK(row.excess_risk == 0.0);  // noise-free symmetric ramp is solved exactly
  CHECK(row.queries_per_label.size() == 2);
  CHECK(row.queries_per_label[0] >= row.queries_total / 2);  // both labels
  CHECK(row.max_depth >= 1);
  CHECK(row.classified_mass >= 0.0);
  CHECK(row.classified_mass <= 1.0);

  auto again = active_replicate(p, default_learner_params(p, 500), 3, 99,
                                20000);
  CHECK(again.excess_risk == row.excess_risk);
  CHECK(again.classified_mass == row.classified_mass);
  CHECK(again.max_depth == row.max_depth);
}

TEST_CASE("sweeps are reproducible and scheduling-independent") {
  auto p = make_ramp(1, 0.0, -1.0, 1.0 / 3).with_noise(NoiseModel::kZeroNoise);
  auto base = default_learner_params(p, 0);

  SweepOptions opt;
  opt.budgets = {64, 128, 256};
  opt.replicates = 2;
  opt.num_eval = 2000;
  opt.base_seed = 1000;
  opt.bootstrap = 200;
  opt.threads = 1;

  auto serial = run_sweep(p, base, opt);
  REQUIRE(serial.active_rows.size() == 6);
  REQUIRE(serial.passive_rows.size() == 6);
  REQUIRE(serial.active_summary.size() == 3);

  // seeds form the documented enumeration: base + task index, actives first
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(serial.active_rows[i].seed == 1000 + i);
    CHECK(serial.passive_rows[i].seed == 1006 + i);
  }
  for (const auto& s : serial.active_summary) {
    CHECK(s.replicates == 2);
    CHECK(s.tau0 > 0.0);
    CHECK(s.regime == "tau<tau0");  // tau = 0 here
  }
  CHECK(serial.active_fit.points_used == 3);

  opt.threads = 4;
  auto parallel = run_sweep(p, base, opt);
  REQUIRE(parallel.active_rows.size() == serial.active_rows.size());
  for (std::size_t i = 0; i < serial.active_rows.size(); ++i) {
    CHECK(parallel.active_rows[i].seed == serial.active_rows[i].seed);
    CHECK(parallel.active_rows[i].excess_risk ==
          serial.active_rows[i].excess_risk);
    CHECK(parallel.passive_rows[i].excess_risk ==
          serial.passive_rows[i].excess_risk);
  }
  CHECK(parallel.active_fit.slope == serial.active_fit.slope);
  CHECK(parallel.active_ci.lo == serial.active_ci.lo);
  CHECK(parallel.passive_ci.hi == serial.passive_ci.hi);
}
