#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "csal/confidence.hpp"
#include "csal/errors.hpp"

using namespace csal;

namespace {
BoundParams params_for(std::uint64_t n, int M, double alpha, double L, int d) {
  return make_bound_params(n, M, alpha, L, standard_geometry(d));
}
}  // namespace

TEST_CASE("deviation width against frozen closed-form values") {
  // sqrt(ln(2 n^3 M) / (2 count)), 30-digit reference values
  auto p = params_for(10, 2, 1.0, 1.0, 1);
  CHECK(v_bound(5, p) == doctest::Approx(0.910716730937893096).epsilon(1e-14));

  auto p2 = params_for(100, 2, 1.0, 1.0, 1);
  CHECK(v_bound(100, p2) == doctest::Approx(0.275697342380046935).epsilon(1e-14));

  auto p3 = params_for(500, 2, 1.0, 1.0, 1);
  CHECK(v_bound(1, p3) == doctest::Approx(3.16465785325890055).epsilon(1e-14));

  CHECK(v_bound(0, p) == kInf);
  // decreasing in count
  double prev = kInf;
  for (std::uint64_t c = 1; c < 100; ++c) {
    double v = v_bound(c, p2);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("bias term against frozen closed-form values") {
  // L * (nu2 * rho^h)^alpha
  auto p = params_for(100, 2, 1.0, 1.0, 1);
  CHECK(b_h(3, p) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(b_h(0, p) == doctest::Approx(1.0).epsilon(1e-14));

  auto p2 = params_for(100, 2, 0.5, 1.0, 2);
  CHECK(b_h(2, p2) == doctest::Approx(0.840896415253714543).epsilon(1e-14));

  // linear in L
  auto pL = params_for(100, 2, 1.0, 2.0, 1);
  CHECK(b_h(3, pL) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("refinement inequality thresholds (frozen)") {
  // d=1, alpha=1, L=1, n=100, M=2: v_bound(c) <= 2*b_h first holds at
  // c=8 for depth 1 and c=487 for depth 4.
  auto p = params_for(100, 2, 1.0, 1.0, 1);
  CHECK(v_bound(7, p) > 2 * b_h(1, p));
  CHECK(v_bound(8, p) <= 2 * b_h(1, p));
  CHECK(v_bound(486, p) > 2 * b_h(4, p));
  CHECK(v_bound(487, p) <= 2 * b_h(4, p));
}

TEST_CASE("record updates: running mean and clipped bounds") {
  auto p = params_for(100, 2, 1.0, 1.0, 1);
  auto rec = make_record(2);
  CHECK(rec.count == 0);
  CHECK(rec.labels.size() == 2);
  CHECK(rec.labels[0].lower == -kInf);
  CHECK(rec.labels[0].upper == kInf);

  std::vector<int> cand{1, 2};
  std::vector<double> costs{0.2, 0.9};
  record_costs(rec, costs, cand, p, 3);
  CHECK(rec.count == 1);
  CHECK(rec.labels[0].mean == 0.2);
  CHECK(rec.labels[1].mean == 0.9);
  double w1 = v_bound(1, p) + b_h(3, p);
  CHECK(rec.labels[0].lower == doctest::Approx(0.2 - w1).epsilon(1e-14));
  CHECK(rec.labels[0].upper == doctest::Approx(0.2 + w1).epsilon(1e-14));

  record_costs(rec, std::vector<double>{0.4, 0.7}, cand, p, 3);
  record_costs(rec, std::vector<double>{0.9, 0.8}, cand, p, 3);
  CHECK(rec.count == 3);
  CHECK(rec.labels[0].mean == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rec.labels[1].mean == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("bounds only tighten under long random streams") {
  auto p = params_for(1000, 3, 1.0, 1.0, 2);
  auto rec = make_record(3);
  std::vector<int> cand{1, 2, 3};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double prev_lo[3] = {-kInf, -kInf, -kInf};
  double prev_up[3] = {kInf, kInf, kInf};
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> costs{unif(rng), unif(rng), unif(rng)};
    record_costs(rec, costs, cand, p, 4);
    for (int j = 0; j < 3; ++j) {
      CHECK(rec.labels[j].lower >= prev_lo[j]);
      CHECK(rec.labels[j].upper <= prev_up[j]);
      prev_lo[j] = rec.labels[j].lower;
      prev_up[j] = rec.labels[j].upper;
    }
  }
}

TEST_CASE("zero-noise streams keep lower <= truth <= upper") {
  auto p = params_for(200, 2, 1.0, 1.0, 1);
  auto rec = make_record(2);
  std::vector<int> cand{1, 2};
  for (int k = 0; k < 300; ++k) {
    record_costs(rec, std::vector<double>{0.3, 0.6}, cand, p, 2);
    CHECK(rec.labels[0].lower <= 0.3);
    CHECK(rec.labels[0].upper >= 0.3);
    CHECK(rec.labels[1].lower <= 0.6);
    CHECK(rec.labels[1].upper >= 0.6);
    CHECK(rec.labels[0].lower <= rec.labels[0].upper);
  }
}

TEST_CASE("non-candidate labels are untouched") {
  auto p = params_for(100, 3, 1.0, 1.0, 1);
  auto rec = make_record(3);
  std::vector<int> cand{1, 3};
  record_costs(rec, std::vector<double>{0.1, 0.5, 0.9}, cand, p, 0);
  CHECK(rec.count == 1);
  CHECK(rec.labels[1].mean == 0.0);
  CHECK(rec.labels[1].lower == -kInf);
  CHECK(rec.labels[1].upper == kInf);
  CHECK(rec.labels[0].upper < kInf);
  CHECK(rec.labels[2].upper < kInf);
}

TEST_CASE("inheritance copies bounds verbatim and resets counts") {
  auto p = params_for(100, 2, 1.0, 1.0, 1);
  auto rec = make_record(2);
  std::vector<int> cand{1, 2};
  for (int k = 0; k < 10; ++k)
    record_costs(rec, std::vector<double>{0.25, 0.75}, cand, p, 1);
  auto child = inherit_record(rec);
  CHECK(child.count == 0);
  for (int j = 0; j < 2; ++j) {
    CHECK(child.labels[j].lower == rec.labels[j].lower);
    CHECK(child.labels[j].upper == rec.labels[j].upper);
    CHECK(child.labels[j].mean == 0.0);
  }
}

TEST_CASE("costs outside [0,1] violate the oracle contract") {
  auto p = params_for(100, 2, 1.0, 1.0, 1);
  auto rec = make_record(2);
  std::vector<int> cand{1, 2};
  CHECK_THROWS_AS(
      record_costs(rec, std::vector<double>{1.2, 0.5}, cand, p, 0),
      OracleError);
  CHECK_THROWS_AS(
      record_costs(rec, std::vector<double>{0.5, -0.01}, cand, p, 0),
      OracleError);
  // a bad value in a non-candidate slot is not a violation
  std::vector<int> only1{1};
  CHECK_NOTHROW(record_costs(rec, std::vector<double>{0.5, 7.0}, only1, p, 0));
}

TEST_CASE("untouched record arithmetic stays on the extended reals") {
  auto rec = make_record(2);
  double min_up = std::min(rec.labels[0].upper, rec.labels[1].upper);
  double min_lo = std::min(rec.labels[0].lower, rec.labels[1].lower);
  CHECK(min_up == kInf);
  CHECK(min_lo == -kInf);
  CHECK(min_up - min_lo == kInf);  // gap of an untouched cell
}
