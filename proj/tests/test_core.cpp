#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "anisograd/core.hpp"
#include "test_util.hpp"

using namespace anisograd;

TEST_CASE("weighted_norm basics") {
  CHECK(weighted_norm({3, 4}, DiagMetric({1, 1})) == doctest::Approx(5.0));
  CHECK(weighted_norm({0, 0, 0}, DiagMetric({2, 5, 9})) == doctest::Approx(0.0));
  CHECK(weighted_norm({1, 1}, DiagMetric({4, 9})) == doctest::Approx(std::sqrt(13.0)));
  CHECK_THROWS(weighted_norm({1, 2, 3}, DiagMetric({1, 1})));
}

TEST_CASE("weighted_norm with unit metric equals euclidean norm") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int rep = 0; rep < 50; ++rep) {
    Vec w(7);
    for (auto& x : w) x = u(rng);
    double wn = weighted_norm(w, DiagMetric(Vec(7, 1.0)));
    CHECK(wn == doctest::Approx(norm2(w)).epsilon(1e-12));
  }
}

TEST_CASE("DiagMetric rejects nonpositive entries") {
  CHECK_THROWS(DiagMetric({1.0, 0.0}));
  CHECK_THROWS(DiagMetric({-2.0}));
  CHECK_THROWS(DiagMetric({1.0, std::numeric_limits<double>::infinity()}));
}

TEST_CASE("box_diameters") {
  auto d1 = box_diameters(BoxSet::box({-1, -1}, {1, 1}));
  CHECK(d1.d_inf == doctest::Approx(2.0));
  CHECK(d1.d_2 == doctest::Approx(2.0 * std::sqrt(2.0)));

  auto d2 = box_diameters(BoxSet::box({0, 0}, {1, 3}));
  CHECK(d2.d_inf == doctest::Approx(3.0));
  CHECK(d2.d_2 == doctest::Approx(std::sqrt(10.0)));

  // hypercube identity D_2 = sqrt(d) * D_inf
  for (int dim : {1, 4, 123}) {
    auto dc = box_diameters(BoxSet::hypercube(dim, 0.7));
    CHECK(dc.d_inf == doctest::Approx(1.4));
    CHECK(dc.d_2 == doctest::Approx(1.4 * std::sqrt((double)dim)));
  }

  CHECK_THROWS(box_diameters(BoxSet::unbounded(3)));
}

TEST_CASE("box diameter ordering D_inf <= D_2 <= sqrt(d) D_inf") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 100; ++rep) {
    int dim = 1 + (int)(rng() % 6);
    Vec lo(dim), hi(dim);
    for (int j = 0; j < dim; ++j) {
      double a = u(rng), b = u(rng);
      lo[j] = std::min(a, b);
      hi[j] = std::max(a, b);
    }
    auto d = box_diameters(BoxSet::box(lo, hi));
    CHECK(d.d_inf <= d.d_2 + 1e-12);
    CHECK(d.d_2 <= std::sqrt((double)dim) * d.d_inf + 1e-12);
  }
}

TEST_CASE("BoxSet validation and membership") {
  CHECK_THROWS(BoxSet::box({1.0}, {0.0}));
  auto b = BoxSet::box({-1, 0}, {1, 2});
  CHECK(b.contains({0, 1}));
  CHECK(b.contains({1, 2}));
  CHECK(!b.contains({1.1, 1}));
  CHECK(b.contains({1.1, 1}, 0.2));
  CHECK(BoxSet::unbounded(2).contains({1e9, -1e9}));
}

TEST_CASE("project basics") {
  auto b = BoxSet::box({-1, -1}, {1, 1});
  DiagMetric m({3, 1});

  // member of the set projects to itself
  auto p0 = project(b, DiagMetric({5, 0.1}), {0.5, 0.5});
  CHECK(p0[0] == doctest::Approx(0.5));
  CHECK(p0[1] == doctest::Approx(0.5));

  // exterior point clips per coordinate whatever the metric
  auto p1 = project(b, m, {2, -4});
  CHECK(p1[0] == doctest::Approx(1.0));
  CHECK(p1[1] == doctest::Approx(-1.0));

  // unbounded set: identity
  auto p2 = project(BoxSet::unbounded(2), m, {7, -9});
  CHECK(p2[0] == doctest::Approx(7.0));
  CHECK(p2[1] == doctest::Approx(-9.0));
}

TEST_CASE("project matches brute-force grid minimization of the metric objective") {
  // one random 3-D triple against a genuine 200-per-axis grid refined twice
  std::mt19937_64 rng(333);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_real_distribution<double> ul(0.1, 5.0);

  Vec lo(3), hi(3), lam(3), w(3);
  for (int j = 0; j < 3; ++j) {
    double a = u(rng), b = u(rng);
    lo[j] = std::min(a, b) - 0.1;
    hi[j] = std::max(a, b) + 0.1;
    lam[j] = ul(rng);
    w[j] = u(rng) * 2.0;  // often exterior
  }
  Vec got = project(BoxSet::box(lo, hi), DiagMetric(lam), w);
  Vec oracle = testutil::grid_argmin(lo, hi, lam, w, 200, 3);
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(got[j] - oracle[j]) <= 1e-4);
}

TEST_CASE("project is idempotent and lands inside the box") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-4, 4);
  std::uniform_real_distribution<double> ul(0.05, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    int dim = 1 + (int)(rng() % 5);
    Vec lo(dim), hi(dim), lam(dim), w(dim);
    for (int j = 0; j < dim; ++j) {
      double a = u(rng), b = u(rng);
      lo[j] = std::min(a, b);
      hi[j] = std::max(a, b);
      lam[j] = ul(rng);
      w[j] = u(rng);
    }
    auto box = BoxSet::box(lo, hi);
    DiagMetric m(lam);
    Vec p = project(box, m, w);
    CHECK(box.contains(p));
    Vec pp = project(box, m, p);
    for (int j = 0; j < dim; ++j) CHECK(pp[j] == p[j]);  // exact idempotence
  }
}

TEST_CASE("projection variational inequality <z - pw, Lambda (w - pw)> <= 0") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> ul(0.1, 8.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int dim = 4;
  Vec lo(dim), hi(dim), lam(dim), w(dim);
  for (int j = 0; j < dim; ++j) {
    double a = u(rng), b = u(rng);
    lo[j] = std::min(a, b);
    hi[j] = std::max(a, b);
    lam[j] = ul(rng);
    w[j] = u(rng) * 3.0;
  }
  auto box = BoxSet::box(lo, hi);
  DiagMetric m(lam);
  Vec pw = project(box, m, w);

  // scale of the inner-product terms, for a relative slack
  double scale = 0.0;
  for (int j = 0; j < dim; ++j)
    scale += lam[j] * (std::fabs(w[j]) + std::fabs(hi[j]) + std::fabs(lo[j])) *
             (hi[j] - lo[j] + std::fabs(w[j]));
  for (int rep = 0; rep < 1000; ++rep) {
    double ip = 0.0;
    for (int j = 0; j < dim; ++j) {
      double z = lo[j] + (hi[j] - lo[j]) * unit(rng);
      ip += (z - pw[j]) * lam[j] * (w[j] - pw[j]);
    }
    CHECK(ip <= 1e-12 * scale);
  }
}

TEST_CASE("step_size rules") {
  CHECK(step_size(StepSchedule::constant(0.1), 57) == doctest::Approx(0.1));
  CHECK(step_size(StepSchedule::inverse_sqrt(1.0), 3) == doctest::Approx(0.5));
  CHECK(step_size(StepSchedule::inverse_sqrt(1.0), 0) == doctest::Approx(1.0));
  CHECK(step_size(StepSchedule::cosine(1.0, 10), 5) == doctest::Approx(0.5));
  CHECK(step_size(StepSchedule::cosine(1.0, 10), 0) == doctest::Approx(1.0));
  // clamped past the horizon
  CHECK(step_size(StepSchedule::cosine(1.0, 10), 10) == doctest::Approx(0.0));
  CHECK(step_size(StepSchedule::cosine(1.0, 10), 25) == doctest::Approx(0.0));

  auto s5 = StepSchedule::capped_inverse_sqrt(0.25, 10.0);
  CHECK(step_size(s5, 0) == doctest::Approx(0.25));       // cap active early
  CHECK(step_size(s5, 10000 - 1) == doctest::Approx(0.1));  // decay active late
  CHECK_THROWS(step_size(StepSchedule::constant(1.0), -1));
  CHECK_THROWS(StepSchedule::constant(0.0));
  CHECK_THROWS(StepSchedule::cosine(1.0, 0));
}

TEST_CASE("mix_seed is deterministic and spreads tuples") {
  CHECK(mix_seed(1, 2, 3, 4) == mix_seed(1, 2, 3, 4));
  CHECK(mix_seed(1, 2, 3, 4) != mix_seed(1, 2, 3, 5));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0) != mix_seed(1));
}
