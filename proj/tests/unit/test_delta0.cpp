#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "msle/delta0.hpp"
#include "msle/error.hpp"

using namespace msle;
using namespace msle::delta0;
using doctest::Approx;

namespace {
const cplx I(0.0, 1.0);
}

TEST_CASE("lambert w values") {
  CHECK(lambert_w0(0.0) == cplx(0.0, 0.0));
  CHECK(std::abs(lambert_w0(std::numbers::e) - 1.0) <= 1e-14);
  CHECK(lambert_w0(1.0).real() == Approx(0.5671433).epsilon(1e-6));
  CHECK(lambert_w0(0.25).real() == Approx(0.203888).epsilon(1e-6));
  CHECK(std::abs(lambert_w0(-1.0 / std::numbers::e) + 1.0) <= 1e-7);
  CHECK_THROWS_AS(lambert_w0(-1.0), DomainError);
}

TEST_CASE("lambert w against reference values") {
  // Reference digits from an independent arbitrary-precision evaluation.
  struct Case {
    cplx z, w;
  };
  const Case cases[] = {
      {{-1, 0.01}, {-0.312163727371070173, 1.330312146152901834}},
      {{0.3, 2}, {0.719958830947021101, 0.671396757889281316}},
      {{-0.36, 1e-6}, {-0.806084315560367123, 0.0000115468901137797512}},
      {{10, -50}, {2.829732847077433992, -1.025668142217177641}},
      {{-5, 0.1}, {0.850394787493146466, 1.960137129089816039}},
  };
  for (const auto& c : cases) CHECK(std::abs(lambert_w0(c.z) - c.w) <= 1e-13);
}

TEST_CASE("lambert w round trip off the cut") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int it = 0; it < 1000; ++it) {
    const double scale = std::pow(10.0, 3 * u(rng));
    cplx z(scale * u(rng), scale * u(rng));
    if (z.imag() == 0.0 && z.real() < -1.0 / std::numbers::e) continue;
    const cplx w = lambert_w0(z);
    CHECK(std::abs(w * std::exp(w) - z) <= 1e-13 * (1.0 + std::abs(z)));
    CHECK(in_principal_range(w));
  }
}

TEST_CASE("branch conventions") {
  CHECK(std::abs(sqrt_upper_half(-1.0).value - I) < 1e-15);
  CHECK(std::abs(sqrt_right_half(-4.0).value - 2.0 * I) < 1e-15);
  CHECK(sqrt_right_half(cplx(-4.0, -1e-300)).value.real() >= 0.0);
}

TEST_CASE("oracle transform") {
  CHECK(std::abs(oracle_transform(I, 0.0) + 2.0 * I) <= 1e-15);
  CHECK(std::abs(oracle_transform(4.0 * I, 1.0) + (std::sqrt(2.0) - 1.0) * I) <= 1e-12);
  CHECK(std::abs(oracle_transform(3.52621 * I, 1.0) + 0.451539 * I) <= 1e-5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> re(-6, 6), im(0.01, 5), tt(0, 4);
  for (int it = 0; it < 200; ++it) {
    const cplx z(re(rng), im(rng));
    const cplx m = oracle_transform(z, tt(rng));
    CHECK(m.imag() < 0.0);
    CHECK(std::abs(m) <= 2.0 / z.imag() * (1 + 1e-12));
  }
}

TEST_CASE("oracle maps") {
  auto m = oracle_maps(4.0 * I, 1.0);
  CHECK(std::abs(m.h - 4.42929 * I) <= 1e-5);
  CHECK(std::abs(m.g - 3.52621 * I) <= 1e-5);
  // Frozen to full precision.
  CHECK(std::abs(m.h - 4.42928662549832045 * I) <= 1e-13);
  CHECK(std::abs(m.g - 3.52620666292083050 * I) <= 1e-13);

  const cplx z(0.4, 0.9);
  auto z0 = oracle_maps(z, 0.0);
  CHECK(z0.h == z);
  CHECK(z0.g == z);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> re(-4, 4), im(0.05, 4), tt(0.01, 3);
  for (int it = 0; it < 100; ++it) {
    const cplx w(re(rng), im(rng));
    const double t = tt(rng);
    auto a = oracle_maps(w, t);
    auto b = oracle_maps(2.0 * w, 4.0 * t);
    CHECK(std::abs(b.h - 2.0 * a.h) <= 1e-10 * (1 + std::abs(a.h)));
    CHECK(std::abs(b.g - 2.0 * a.g) <= 1e-10 * (1 + std::abs(a.g)));
    CHECK(a.h.imag() > 0.0);
    if (a.g.imag() > 1e-3) {
      CHECK(std::abs(2.0 / a.h - oracle_transform(a.g, t)) <= 1e-10);
    }
  }
}

TEST_CASE("intervals") {
  auto a = oracle_intervals(1.0);
  CHECK(a.support.lo == -4.0);
  CHECK(a.support.hi == 4.0);
  CHECK(a.footprint.hi == Approx(3.297442).epsilon(1e-6));
  auto b = oracle_intervals(4.0);
  CHECK(b.support.hi == 8.0);
  CHECK(b.footprint.hi == Approx(2.0 * a.footprint.hi));
  auto c = oracle_intervals(0.25);
  CHECK(c.support.hi == 2.0);
  CHECK(c.footprint.hi == Approx(std::sqrt(std::numbers::e)));
  CHECK_THROWS_AS(oracle_intervals(0.0), DomainError);
}

TEST_CASE("burgers residual of the closed form") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-3, 3), im(0.5, 3), tt(0.2, 3);
  const double h = 1e-4;
  for (int it = 0; it < 50; ++it) {
    const cplx z(re(rng), im(rng));
    const double t = tt(rng);
    const cplx mt = (oracle_transform(z, t + h) - oracle_transform(z, t - h)) / (2 * h);
    const cplx mz = (oracle_transform(z + h, t) - oracle_transform(z - h, t)) / (2 * h);
    CHECK(std::abs(mt + 2.0 * oracle_transform(z, t) * mz) <= 1e-5);
  }
}

TEST_CASE("boundary map at the footprint edge") {
  for (double t : {0.25, 1.0, 4.0}) {
    const double x = 2.0 * std::sqrt(std::numbers::e * t);
    auto m = oracle_maps(cplx(x, 1e-8), t);
    CHECK(std::abs(m.g.real() - 4.0 * std::sqrt(t)) <= 1e-3);
  }
}
