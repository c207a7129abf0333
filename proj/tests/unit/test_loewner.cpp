#include <cmath>
#include <sstream>

#include "doctest.h"
#include "msle/error.hpp"
#include "msle/loewner.hpp"
#include "msle/sde.hpp"

using namespace msle;
using doctest::Approx;

namespace {

const cplx I(0.0, 1.0);

// A single driver held at 0: g_t(z) = sqrt(z^2 + 4t), slit [0, 2i sqrt(t)].
DrivingPaths constant_driver(double t_end = 1.0) {
  return DrivingPaths::from_samples({0.0, t_end}, {{0.0}, {0.0}});
}

DrivingPaths two_deterministic() {
  SdeConfig c;
  c.kappa = 0;
  c.x0 = {-1.0, 1.0};
  c.dt_base = 1e-3;
  return simulate(c);
}

}  // namespace

TEST_CASE("constant driving closed form") {
  auto p = constant_driver();
  auto r = flow_map(p, 3.0 * I, 1.0);
  REQUIRE(r.alive());
  CHECK(std::abs(r.value - std::sqrt(5.0) * I) <= 1e-6);
  auto z = cplx(0.7, 0.4);
  auto r2 = flow_map(p, z, 0.6);
  REQUIRE(r2.alive());
  CHECK(std::abs(r2.value - std::sqrt(z * z + 2.4)) <= 1e-8);
}

TEST_CASE("swallowing on the slit") {
  auto p = constant_driver();
  auto r = flow_map(p, I, 1.0);
  CHECK_FALSE(r.alive());
  CHECK(r.swallow_time == Approx(0.25).epsilon(4e-3));
  auto l = lifetime(p, I);
  REQUIRE(l.has_value());
  CHECK(std::abs(*l - 0.25) <= 1e-3);

  auto short_paths = constant_driver(0.2);
  CHECK_FALSE(lifetime(short_paths, cplx(1, 1)).has_value());
  CHECK_FALSE(lifetime(p, 1e3 * I).has_value());
}

TEST_CASE("identity at time zero and domain errors") {
  auto p = two_deterministic();
  auto z = cplx(0.3, 0.2);
  auto r = flow_map(p, z, 0.0);
  REQUIRE(r.alive());
  CHECK(r.value == z);
  CHECK_THROWS_AS(flow_map(p, cplx(0.3, 0.0), 0.5), DomainError);
  CHECK_THROWS_AS(flow_map(p, I, 2.0), DomainError);
}

TEST_CASE("hulls are monotone") {
  auto p = constant_driver();
  for (double t : {0.3, 0.5, 1.0}) CHECK_FALSE(flow_map(p, I, t).alive());
  CHECK(flow_map(p, I, 0.2).alive());
}

TEST_CASE("tips of the straight slit") {
  auto p = constant_driver();
  auto tips = trace_tips(p, 1.0, 1e-6);
  REQUIRE(tips.size() == 1);
  CHECK(std::abs(tips[0] - 2.0 * I) <= 1e-3);
  auto quarter = trace_tips(p, 0.25, 1e-6);
  CHECK(std::abs(quarter[0] - I) <= 1e-3);
  // Halving the lift moves the tip by a comparable amount or less.
  auto finer = trace_tips(p, 1.0, 5e-7);
  CHECK(std::abs(finer[0] - 2.0 * I) <= std::abs(tips[0] - 2.0 * I) + 1e-9);
  CHECK_THROWS_AS(trace_tips(p, 1.0, 0.0), DomainError);
}

TEST_CASE("two symmetric slits") {
  auto p = two_deterministic();
  auto tips = trace_tips(p, 0.5, 1e-6);
  REQUIRE(tips.size() == 2);
  CHECK(std::abs(tips[0] + std::conj(tips[1])) <= 1e-6);
  CHECK(tips[0].real() < 0);
  CHECK(tips[1].imag() > 0);
}

TEST_CASE("half-plane capacity") {
  auto p = constant_driver();
  CHECK(hcap_coefficient(p, 0.0) == 0.0);
  CHECK(std::abs(hcap_coefficient(p, 1.0) - 2.0) <= 1e-4 * 2);
  auto q = two_deterministic();
  CHECK(std::abs(hcap_coefficient(q, 0.5) - 1.0) <= 1e-4 * 1.5);

  SdeConfig c;
  c.kappa = 3;
  c.x0 = {-1, 0, 2};
  c.lambdas = {0.2, 0.3, 0.5};
  c.seed = 8;
  auto r = simulate(c);
  for (double t : {0.25, 1.0}) CHECK(std::abs(hcap_coefficient(r, t) - 2 * t) <= 1e-4 * (1 + t));
}

TEST_CASE("forward then reverse returns the start") {
  SdeConfig c;
  c.kappa = 2;
  c.x0 = {-1, 0, 1};
  c.seed = 3;
  auto p = simulate(c);
  for (cplx z : {cplx(0, 1), cplx(0.5, 1.5), cplx(-2, 1)}) {
    auto f = flow_map(p, z, 1.0);
    REQUIRE(f.alive());
    CHECK(std::abs(reverse_flow(p, f.value, 1.0) - z) <= 1e-6);
  }
}

TEST_CASE("conformality proxy") {
  auto p = two_deterministic();
  const cplx z(0.2, 1.0);
  auto diff = [&](double h) {
    return (flow_map(p, z + h, 1.0).value - flow_map(p, z - h, 1.0).value) / (2 * h);
  };
  const cplx d1 = diff(1e-4), d2 = diff(5e-5);
  CHECK(std::abs(d1) > 0.0);
  CHECK(std::abs(d1 - d2) <= 1e-4);
}

TEST_CASE("csv exports") {
  auto p = constant_driver();
  std::vector<double> ts{0.25, 1.0};
  auto hist = tip_history(p, ts);
  std::ostringstream os;
  write_tips_csv(os, hist);
  CHECK(os.str().rfind("k,t,re,im\n", 0) == 0);
  std::vector<double> re{0.0}, im{0.5, 3.0};
  auto grid = lifetime_grid(p, re, im);
  std::ostringstream ls;
  write_lifetime_csv(ls, grid);
  CHECK(ls.str().find("inf") != std::string::npos);
  CHECK(ls.str().rfind("re,im,lifetime\n", 0) == 0);
}
