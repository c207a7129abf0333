#include <cmath>
#include <random>

#include "doctest.h"
#include "msle/error.hpp"
#include "msle/measure.hpp"

using namespace msle;
using doctest::Approx;

namespace {
const cplx I(0.0, 1.0);

ProbabilityMeasure two_atoms() { return ProbabilityMeasure::equal_weights({-1.0, 1.0}); }
}  // namespace

TEST_CASE("cauchy transform values") {
  auto d0 = ProbabilityMeasure::point_mass(0.0);
  CHECK(std::abs(cauchy_transform(d0, I) - (-2.0 * I)) < 1e-15);
  CHECK(std::abs(cauchy_transform(two_atoms(), I) - (-1.0 * I)) < 1e-15);
  CHECK(std::abs(cauchy_transform(two_atoms(), 2.0 * I) - (-0.8 * I)) < 1e-15);
  CHECK_THROWS_AS(cauchy_transform(d0, cplx(1.0, 0.0)), DomainError);
  CHECK_THROWS_AS(cauchy_transform(d0, cplx(1.0, -1.0)), DomainError);
}

TEST_CASE("cauchy transform derivative values") {
  auto d0 = ProbabilityMeasure::point_mass(0.0);
  CHECK(std::abs(cauchy_transform_deriv(d0, I) - cplx(2.0, 0.0)) < 1e-15);
  CHECK(cauchy_transform_deriv_real(d0, 2.0) == Approx(-0.5));
  CHECK(cauchy_transform_deriv_real(two_atoms(), 3.0) == Approx(-0.3125));
  CHECK_THROWS_AS(cauchy_transform_deriv_real(ProbabilityMeasure::uniform(0, 1), 0.5), DomainError);
}

TEST_CASE("closed-form transforms match fine discretisations") {
  // Midpoint sums converge to the closed forms at O(1/n^2) away from the support.
  auto u = ProbabilityMeasure::uniform(-1.0, 2.0);
  auto sc = ProbabilityMeasure::semicircle(0.5, 2.0);
  for (cplx z : {cplx(0.3, 1.5), cplx(-3.0, 0.7), cplx(4.0, 2.0)}) {
    CHECK(std::abs(cauchy_transform(u, z) - cauchy_transform(discretize(u, 4000), z)) < 1e-6);
    CHECK(std::abs(cauchy_transform(sc, z) - cauchy_transform(discretize(sc, 4000), z)) < 1e-5);
  }
}

TEST_CASE("herglotz bound and derivative consistency") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(-4, 4), im(0.05, 3);
  const ProbabilityMeasure ms[] = {ProbabilityMeasure::point_mass(0.3), two_atoms(),
                                   ProbabilityMeasure::uniform(-1, 1),
                                   ProbabilityMeasure::semicircle(0, 2),
                                   ProbabilityMeasure::atomic({-2, 0, 1.5}, {0.2, 0.5, 0.3})};
  int cases = 0;
  for (int it = 0; it < 25; ++it) {
    for (const auto& m : ms) {
      const cplx z(re(rng), im(rng));
      const cplx M = cauchy_transform(m, z);
      CHECK(M.imag() < 0.0);
      CHECK(std::abs(M) <= 2.0 / z.imag() * (1 + 1e-12));
      const double h = 1e-4;
      const cplx fd = (cauchy_transform(m, z + h) - cauchy_transform(m, z - h)) / (2 * h);
      const cplx d = cauchy_transform_deriv(m, z);
      CHECK(std::abs(fd - d) <= 1e-6 * std::abs(d) + 1e-9);
      const cplx fd2 = (cauchy_transform_deriv(m, z + h) - cauchy_transform_deriv(m, z - h)) / (2 * h);
      CHECK(std::abs(fd2 - cauchy_transform_deriv2(m, z)) <= 1e-5 * std::abs(fd2) + 1e-8);
      ++cases;
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("log potential differentiates to the transform") {
  const ProbabilityMeasure ms[] = {ProbabilityMeasure::point_mass(0.3), two_atoms(),
                                   ProbabilityMeasure::uniform(-1, 1),
                                   ProbabilityMeasure::semicircle(0.2, 2)};
  for (const auto& m : ms) {
    for (double x : {m.support().hi + 0.3, m.support().hi + 2.0, m.support().hi + 10.0}) {
      const double h = 1e-5;
      const double fd = (log_potential_real(m, x + h) - log_potential_real(m, x - h)) / (2 * h);
      CHECK(fd == Approx(cauchy_transform_real(m, x)).epsilon(1e-7));
    }
  }
}

TEST_CASE("atomic construction rules") {
  CHECK_THROWS_AS(ProbabilityMeasure::atomic({1, 0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(ProbabilityMeasure::atomic({0, 1}, {0.5, 0.4}), DomainError);
  CHECK_THROWS_AS(ProbabilityMeasure::atomic({0, 1}, {1.0, 0.0}), DomainError);
  auto m = ProbabilityMeasure::atomic({0, 1}, {0.5, 0.5 + 5e-10});
  double s = m.weights()[0] + m.weights()[1];
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("discretize examples") {
  auto one = discretize(ProbabilityMeasure::point_mass(0.0), 1);
  REQUIRE(one.atoms().size() == 1);
  CHECK(one.atoms()[0] == 0.0);
  CHECK(one.weights()[0] == 1.0);

  auto u = discretize(ProbabilityMeasure::uniform(0.0, 1.0), 2);
  CHECK(u.atoms()[0] == Approx(0.25));
  CHECK(u.atoms()[1] == Approx(0.75));
  CHECK(u.weights()[0] == Approx(0.5));

  auto p = discretize(ProbabilityMeasure::point_mass(0.0), 4);
  REQUIRE(p.atoms().size() == 4);
  CHECK(p.atoms()[0] == Approx(-1.0 / 16));
  CHECK(p.atoms()[3] == Approx(1.0 / 16));
  CHECK(p.atoms()[2] - p.atoms()[1] == Approx(p.atoms()[1] - p.atoms()[0]));
  CHECK(levy_distance(p, ProbabilityMeasure::point_mass(0.0)) <= 0.25);

  CHECK_THROWS_AS(discretize(ProbabilityMeasure::point_mass(0.0), 0), DomainError);
}

TEST_CASE("discretize converges in transform distance") {
  const cplx pts[] = {cplx(0, 1), cplx(1, 1), cplx(-2, 0.5), cplx(0.5, 3), cplx(3, 2)};
  for (const auto& target : {ProbabilityMeasure::point_mass(0.0), ProbabilityMeasure::uniform(-1, 1)}) {
    double prev = 1e300;
    for (std::size_t n = 4; n <= 256; n *= 2) {
      const double d = transform_distance(discretize(target, n), target, pts);
      CHECK(d <= prev);
      prev = d;
    }
    CHECK(prev < 1e-3);
  }
}

TEST_CASE("discretize cdf distance") {
  auto u = ProbabilityMeasure::uniform(-1, 1);
  for (std::size_t n : {5u, 20u, 100u}) {
    CHECK(kolmogorov_distance(discretize(u, n), u) <= 1.0 / n + 1.0 / (n * n));
  }
  auto a = ProbabilityMeasure::atomic({-1, 0, 2}, {0.25, 0.5, 0.25});
  auto da = discretize(a, 8);
  for (std::size_t k = 1; k < da.atoms().size(); ++k) CHECK(da.atoms()[k] > da.atoms()[k - 1]);
}

TEST_CASE("moments from transform") {
  auto m0 = moments_from_transform(transform_of(ProbabilityMeasure::point_mass(0.0)), 2, 10.0);
  CHECK(m0[0] == Approx(1.0));
  CHECK(std::abs(m0[1]) < 1e-10);
  CHECK(std::abs(m0[2]) < 1e-10);
  auto m1 = moments_from_transform(transform_of(two_atoms()), 2, 10.0);
  CHECK(m1[0] == Approx(1.0));
  CHECK(std::abs(m1[1]) < 1e-10);
  CHECK(m1[2] == Approx(1.0));
  // Semicircle of radius 4: the time-1 law of the point-mass flow.
  auto m2 = moments_from_transform(transform_of(ProbabilityMeasure::semicircle(0, 4)), 2, 20.0);
  CHECK(m2[0] == Approx(1.0));
  CHECK(std::abs(m2[1]) < 1e-9);
  CHECK(m2[2] == Approx(4.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2), w(0.1, 1);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> xs(1 + it * 2), ws(xs.size());
    double sum = 0.0;
    for (auto& x : xs) x = u(rng);
    std::sort(xs.begin(), xs.end());
    for (auto& v : ws) sum += (v = w(rng));
    for (auto& v : ws) v /= sum;
    auto m = ProbabilityMeasure::atomic(xs, ws);
    auto got = moments_from_transform(transform_of(m), 4, default_moment_radius(m));
    for (int k = 0; k <= 4; ++k) CHECK(std::abs(got[k] - m.moment(k)) <= 1e-8);
  }
  CHECK_THROWS_AS(moments_from_transform(transform_of(ProbabilityMeasure::uniform(-5, 5)), 2, 4.0),
                  NumericalError);
}

TEST_CASE("transform distance") {
  auto d0 = ProbabilityMeasure::point_mass(0.0);
  const cplx pts[] = {cplx(0, 2)};
  CHECK(transform_distance(d0, d0, pts) == 0.0);
  CHECK(transform_distance(d0, ProbabilityMeasure::equal_weights({-0.01, 0.01}), pts) <= 1e-3);
  const cplx one[] = {I};
  // |2/i - 2/(i - 1)| = |1 - i|.
  CHECK(transform_distance(d0, ProbabilityMeasure::point_mass(1.0), one) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(transform_distance(d0, d0, std::span<const cplx>{}), DomainError);
}

TEST_CASE("json round trip") {
  const ProbabilityMeasure ms[] = {ProbabilityMeasure::atomic({-0.1, 1.0 / 3}, {0.25, 0.75}),
                                   ProbabilityMeasure::point_mass(0.1),
                                   ProbabilityMeasure::uniform(-1, 2),
                                   ProbabilityMeasure::semicircle(0.5, 2)};
  for (const auto& m : ms) {
    auto back = ProbabilityMeasure::from_json(nlohmann::json::parse(m.to_json().dump()));
    CHECK(back.kind() == m.kind());
    CHECK(back.first_param() == m.first_param());
    CHECK(back.second_param() == m.second_param());
    CHECK(std::vector<double>(back.atoms().begin(), back.atoms().end()) ==
          std::vector<double>(m.atoms().begin(), m.atoms().end()));
  }
}

TEST_CASE("semicircle moments and cdf") {
  auto sc = ProbabilityMeasure::semicircle(0, 2);
  CHECK(sc.moment(2) == Approx(1.0));
  CHECK(sc.cdf(0) == Approx(0.5));
  CHECK(sc.cdf(-2) == 0.0);
  CHECK(sc.cdf(2) == 1.0);
  CHECK(sc.quantile(0.5) == Approx(0.0).epsilon(1e-9));
}
