#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "msle/error.hpp"
#include "msle/rng.hpp"
#include "msle/sde.hpp"

using namespace msle;
using doctest::Approx;

namespace {

SdeConfig two_particle(double kappa) {
  SdeConfig c;
  c.kappa = kappa;
  c.x0 = {-1.0, 1.0};
  c.t_max = 1.0;
  return c;
}

}  // namespace

TEST_CASE("partition function") {
  CHECK(partition_function(std::vector<double>{0, 2}, 2) == Approx(2.0));
  CHECK(partition_function(std::vector<double>{0, 1, 3}, 4) == Approx(2.449490).epsilon(1e-6));
  CHECK(partition_function(std::vector<double>{5}, 3) == 1.0);
  CHECK_THROWS_AS(partition_function(std::vector<double>{1, 0}, 2), DomainError);
}

TEST_CASE("drift examples") {
  SdeConfig c = two_particle(2);
  auto a = drift(std::vector<double>{-1, 1}, c.validated());
  CHECK(a[0] == Approx(-1.0));
  CHECK(a[1] == Approx(1.0));

  c.lambdas = {1.0, 0.0};
  auto b = drift(std::vector<double>{-1, 1}, c.validated());
  CHECK(b[0] == Approx(-1.0));
  CHECK(b[1] == Approx(1.0));

  SdeConfig one;
  one.x0 = {0.0};
  one.theta = 2.0;
  CHECK(drift(std::vector<double>{0.0}, one.validated())[0] == 0.0);

  SdeConfig th = two_particle(2);
  th.theta = 3.0;
  auto d = drift(std::vector<double>{-1, 1}, th.validated());
  CHECK(d[0] == Approx(-1.0 + 3.0));
  CHECK(d[1] == Approx(1.0 - 3.0));
}

TEST_CASE("drift from log partition equals drift") {
  SdeConfig c = two_particle(2);
  auto a = drift_from_log_partition(std::vector<double>{-1, 1}, c.validated());
  CHECK(a[0] == Approx(-1.0));
  CHECK(a[1] == Approx(1.0));

  SdeConfig s;
  s.kappa = 4;
  s.x0 = {0, 1, 3};
  auto cfg = s.validated();
  auto x = drift(std::vector<double>{0, 1, 3}, cfg);
  auto y = drift_from_log_partition(std::vector<double>{0, 1, 3}, cfg);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(x[k] - y[k]) <= 1e-10);

  SdeConfig single;
  single.x0 = {0.0};
  CHECK(drift_from_log_partition(std::vector<double>{0.0}, single.validated())[0] == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3), lam(0.05, 1), kap(0.5, 4);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 2 + it % 7;
    std::vector<double> v(n), l(n);
    for (auto& e : v) e = u(rng);
    std::sort(v.begin(), v.end());
    bool distinct = true;
    for (std::size_t k = 1; k < n; ++k) distinct = distinct && v[k] - v[k - 1] > 1e-3;
    if (!distinct) continue;
    double sum = 0;
    for (auto& e : l) sum += (e = lam(rng));
    for (auto& e : l) e /= sum;
    SdeConfig r;
    r.kappa = kap(rng);
    r.x0 = v;
    r.lambdas = l;
    double ls = 0;
    for (auto e : r.lambdas) ls += e;
    r.lambdas.back() += 1.0 - ls;
    auto cfg2 = r.validated();
    auto p = drift(v, cfg2), q = drift_from_log_partition(v, cfg2);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-10 * (1 + std::abs(p[k])));
  }
}

TEST_CASE("drift rejects near collisions") {
  SdeConfig c = two_particle(2);
  CHECK_THROWS_AS(drift(std::vector<double>{0.0, 1e-13}, c.validated()), NumericalError);
  CHECK_THROWS_AS(drift(std::vector<double>{1.0, 0.0}, c.validated()), NumericalError);
}

TEST_CASE("config validation") {
  SdeConfig c = two_particle(5);
  CHECK_THROWS_AS(c.validated(), DomainError);
  c = two_particle(2);
  c.x0 = {1.0, 1.0};
  CHECK_THROWS_AS(c.validated(), DomainError);
  c = two_particle(2);
  c.lambdas = {0.5, 0.6};
  CHECK_THROWS_AS(c.validated(), DomainError);
  c = two_particle(2);
  c.dt_base = 0;
  CHECK_THROWS_AS(c.validated(), DomainError);
  auto back = SdeConfig::from_json(two_particle(3).to_json());
  CHECK(back.kappa == 3.0);
  CHECK(back.x0 == std::vector<double>{-1.0, 1.0});
}

TEST_CASE("deterministic two-particle gap") {
  SdeConfig c = two_particle(0);
  c.dt_base = 1e-4;
  auto p = simulate(c);
  auto last = p.row(p.size() - 1);
  CHECK(std::abs(last[1] - last[0] - std::sqrt(12.0)) <= 1e-3);
  auto m = empirical_measure(p, 1.0);
  CHECK(m.atoms()[0] == Approx(-std::sqrt(3.0)).epsilon(1e-3));
  CHECK(m.atoms()[1] == Approx(std::sqrt(3.0)).epsilon(1e-3));
  CHECK(m.weights()[0] == Approx(0.5));

  c.scheme = Scheme::Heun;
  auto q = simulate(c);
  auto lq = q.row(q.size() - 1);
  CHECK(std::abs(lq[1] - lq[0] - std::sqrt(12.0)) <= 1e-8);
}

TEST_CASE("empirical measure at t = 0 and a frozen single particle") {
  SdeConfig c = two_particle(2);
  auto p = simulate(c);
  auto m = empirical_measure(p, 0.0);
  CHECK(m.atoms()[0] == -1.0);
  CHECK(m.atoms()[1] == 1.0);

  SdeConfig one;
  one.kappa = 0;
  one.x0 = {0.0};
  one.t_max = 5;
  auto q = simulate(one);
  auto e = empirical_measure(q, 5.0);
  REQUIRE(e.atoms().size() == 1);
  CHECK(e.atoms()[0] == 0.0);
  CHECK_THROWS_AS(empirical_measure(q, 6.0), DomainError);
}

TEST_CASE("single particle is scaled brownian motion") {
  SdeConfig c;
  c.kappa = 4;
  c.x0 = {0.0};
  c.dt_base = 0.05;
  double s2 = 0, s1 = 0;
  const int seeds = 4000;
  for (int s = 0; s < seeds; ++s) {
    c.seed = derive_seed(99, s);
    auto p = simulate(c, RecordPolicy{{1.0}});
    const double v = p.row(p.size() - 1)[0];
    s1 += v;
    s2 += v * v;
  }
  const double var = (s2 - s1 * s1 / seeds) / (seeds - 1);
  CHECK(std::abs(var - 4.0) <= 0.3);
}

TEST_CASE("close start does not collide and ordering holds") {
  SdeConfig c;
  c.kappa = 2;
  c.x0 = {0.0, 1e-6};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    c.seed = seed;
    auto p = simulate(c);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.row(i)[1] > p.row(i)[0]);
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  SdeConfig c;
  c.kappa = 3;
  c.x0 = {-1, 0, 0.5, 2};
  c.seed = 42;
  auto a = simulate(c), b = simulate(c);
  std::ostringstream x, y;
  a.write_csv(x);
  b.write_csv(y);
  CHECK(x.str() == y.str());
  c.seed = 43;
  std::ostringstream z;
  simulate(c).write_csv(z);
  CHECK(x.str() != z.str());
  CHECK(x.str().rfind("t,V1,V2,V3,V4\n", 0) == 0);
}

TEST_CASE("observation policy lands on requested times") {
  SdeConfig c;
  c.kappa = 2;
  c.x0 = {-1, 1};
  auto p = simulate(c, RecordPolicy{{0.25, 0.5, 1.0}});
  REQUIRE(p.size() == 4);
  CHECK(p.times()[1] == 0.25);
  CHECK(p.times()[3] == 1.0);
  CHECK_THROWS_AS(simulate(c, RecordPolicy{{2.0}}), DomainError);
}

TEST_CASE("center of mass is a martingale") {
  SdeConfig c;
  c.kappa = 4;
  c.x0 = {-1, -0.2, 0.4, 1.5};
  c.dt_base = 1e-3;
  const double start = (c.x0[0] + c.x0[1] + c.x0[2] + c.x0[3]) / 4;
  const int seeds = 2000;
  double s1 = 0, s2 = 0;
  for (int s = 0; s < seeds; ++s) {
    c.seed = derive_seed(5, s);
    auto p = simulate(c, RecordPolicy{{1.0}});
    auto r = p.row(p.size() - 1);
    const double cm = (r[0] + r[1] + r[2] + r[3]) / 4;
    s1 += cm;
    s2 += cm * cm;
  }
  const double mean = s1 / seeds;
  const double se = std::sqrt((s2 - s1 * s1 / seeds) / (seeds - 1) / seeds);
  CHECK(std::abs(mean - start) < 3 * se);
}

TEST_CASE("driving paths validation and interpolation") {
  auto p = DrivingPaths::from_samples({0.0, 1.0}, {{-1.0, 1.0}, {-2.0, 3.0}});
  std::vector<double> v(2);
  p.values_at(0.5, v);
  CHECK(v[0] == Approx(-1.5));
  CHECK(v[1] == Approx(2.0));
  CHECK(p.lambdas()[0] == 0.5);
  CHECK_THROWS_AS(DrivingPaths::from_samples({0.0, 1.0}, {{-1.0, 1.0}, {2.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(DrivingPaths::from_samples({0.5}, {{0.0}}), DomainError);
}
