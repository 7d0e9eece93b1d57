#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helpers.hpp"
#include "polariton/errors.hpp"
#include "polariton/grid.hpp"

using namespace polariton;
using polariton::testing::random_field;
using polariton::testing::rel_diff;

TEST_CASE("grid: unit lattice when L = pi") {
  const auto g = make_grid(1, 8, std::numbers::pi);
  CHECK(g->spacing() == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
  const auto k = g->axis_wavenumbers();
  REQUIRE(k.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(k[i] == doctest::Approx(i - 4.0).epsilon(1e-15));
  // FFT order keeps the Nyquist mode on the negative side
  CHECK(g->mode_offset(4) == -4);
  CHECK(g->mode_offset(3) == 3);
}

TEST_CASE("grid: two-dimensional N = 4 box") {
  const auto g = make_grid(2, 4, 1.0);
  CHECK(g->size() == 16);
  const auto k = g->axis_wavenumbers();
  const double pi = std::numbers::pi;
  const std::array<double, 4> expected{-2 * pi, -pi, 0.0, pi};
  for (int i = 0; i < 4; ++i) CHECK(k[i] == doctest::Approx(expected[i]));
}

TEST_CASE("grid: bad construction arguments") {
  CHECK_THROWS_AS(make_grid(1, 7, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(1, 8, 0.0), ConfigError);
  CHECK_THROWS_AS(make_grid(1, 8, -1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(4, 8, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 64, 1.0, 1000), ConfigError);
}

TEST_CASE("gaussian initial data") {
  const auto g = make_grid(1, 256, 10.0);
  CHECK(gaussian_initial(g, 0.0).values().abs().maxCoeff() == 0.0);
  const Field u = gaussian_initial(g, 1.0);
  CHECK(u.values()[128] == Complex(1.0, 0.0));  // x = 0
  CHECK(u.values().imag().abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(gaussian_initial(g, -1.0), ConfigError);

  // continuum value of int e^{-x^2} dx = sqrt(pi), via adaptive quadrature
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double x) { return std::exp(-x * x); }, -std::numeric_limits<double>::infinity(),
      std::numeric_limits<double>::infinity());
  CHECK(std::abs(std::sqrt(integral) - std::pow(std::numbers::pi, 0.25)) < 1e-14);
  CHECK(std::abs(l2_norm_physical(u) - std::sqrt(integral)) < 1e-12);
  CHECK(std::abs(sobolev_norm(u, 0.0) - std::sqrt(integral)) < 1e-12);
}

TEST_CASE("sobolev norm of a Gaussian at s = 1") {
  // Oracle: (1/2pi) int (1 + k^2) |u^(k)|^2 dk with u^(k) = sqrt(2 pi) e^{-k^2/2}.
  const double oracle2 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double k) { return (1.0 + k * k) * std::exp(-k * k); },
      -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  const double frozen = 1.6305461589167827;  // sqrt(3 sqrt(pi) / 2)
  CHECK(std::abs(std::sqrt(oracle2) - frozen) < 1e-14);

  const auto g = make_grid(1, 256, 10.0);
  CHECK(std::abs(sobolev_norm(gaussian_initial(g, 1.0), 1.0) - frozen) < 1e-12);
  CHECK(sobolev_norm(Field::zeros(g), 2.0) == 0.0);
}

TEST_CASE("spectral transform") {
  SUBCASE("constant field lands on the DC mode") {
    const auto g = make_grid(2, 8, 1.5);
    const Complex c(0.3, -1.2);
    const Field u(g, ComplexArray::Constant(static_cast<Eigen::Index>(g->size()), c));
    const Field uh = spectral_transform(u, TransformDirection::forward);
    const std::array<int, 2> zero{0, 0};
    const auto dc = g->mode_index(zero);
    CHECK(std::abs(uh.values()[static_cast<Eigen::Index>(dc)] - c * 9.0) < 1e-13);
    double rest = 0.0;
    for (Eigen::Index j = 0; j < uh.values().size(); ++j) {
      if (j != static_cast<Eigen::Index>(dc)) rest = std::max(rest, std::abs(uh.values()[j]));
    }
    CHECK(rest < 1e-13);
  }

  SUBCASE("single lattice mode") {
    const auto g = make_grid(1, 32, 2.0);
    const auto x = g->axis_coordinates();
    const int m0 = 3;
    const double k0 = std::numbers::pi / 2.0 * m0;
    ComplexArray v(32);
    for (int j = 0; j < 32; ++j) v[j] = std::exp(Complex(0.0, k0 * x[j]));
    const Field uh = spectral_transform(Field(g, v), TransformDirection::forward);
    for (int j = 0; j < 32; ++j) {
      const double expected = g->mode_offset(j) == m0 ? 4.0 : 0.0;
      CHECK(std::abs(uh.values()[j] - expected) < 1e-12);
    }
  }

  SUBCASE("roundtrip on every supported shape") {
    const std::array<std::array<int, 2>, 6> shapes{{{1, 8}, {1, 256}, {1, 250}, {2, 16}, {2, 64}, {3, 16}}};
    for (const auto& [n, N] : shapes) {
      const auto g = make_grid(n, N, 6.0);
      const Field u = random_field(g, 100 + static_cast<unsigned>(N));
      const Field back = spectral_transform(spectral_transform(u, TransformDirection::forward),
                                            TransformDirection::inverse);
      CHECK(rel_diff(back.values(), u.values()) < 1e-13);
    }
  }

  SUBCASE("representation tag must match direction") {
    const auto g = make_grid(1, 16, 1.0);
    const Field u = Field::zeros(g);
    CHECK_THROWS_AS(spectral_transform(u, TransformDirection::inverse), ConfigError);
    const Field uh = spectral_transform(u, TransformDirection::forward);
    CHECK_THROWS_AS(spectral_transform(uh, TransformDirection::forward), ConfigError);
  }
}

TEST_CASE("norm properties on random fields") {
  for (int n = 1; n <= 3; ++n) {
    const auto g = make_grid(n, n == 3 ? 16 : 64, 6.0);
    for (unsigned seed = 1; seed <= 4; ++seed) {
      const Field u = random_field(g, seed);
      CHECK(std::abs(sobolev_norm(u, 0.0) / l2_norm_physical(u) - 1.0) < 1e-12);
      double previous = 0.0;
      for (double s : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double value = sobolev_norm(u, s);
        CHECK(value >= previous);
        previous = value;
      }
    }
  }
}

TEST_CASE("free propagation") {
  const auto g = make_grid(1, 128, 8.0);
  const Field u = random_field(g, 42);

  CHECK(rel_diff(free_propagate(u, 0.0).values(), u.values()) < 1e-15);
  for (double t : {0.1, 0.83, 5.0}) {
    for (double s : {0.0, 1.0, 2.0}) {
      CHECK(std::abs(sobolev_norm(free_propagate(u, t), s) / sobolev_norm(u, s) - 1.0) < 1e-12);
    }
  }
  const Field once = free_propagate(u, 0.7);
  const Field twice = free_propagate(free_propagate(u, 0.3), 0.4);
  CHECK(rel_diff(twice.values(), once.values()) < 1e-12);

  // eigenfunction: e^{i k0 x} picks up e^{-i k0^2 t}
  const auto x = g->axis_coordinates();
  const double k0 = 5 * std::numbers::pi / 8.0;
  ComplexArray v(128);
  for (int j = 0; j < 128; ++j) v[j] = std::exp(Complex(0.0, k0 * x[j]));
  const double t = 0.37;
  const Field moved = free_propagate(Field(g, v), t);
  CHECK(polariton::testing::max_abs_diff(moved.values(), v * std::exp(Complex(0.0, -k0 * k0 * t))) < 1e-12);
}

TEST_CASE("field arithmetic checks compatibility") {
  const auto a = make_grid(1, 16, 1.0);
  const auto b = make_grid(1, 16, 2.0);
  Field u = gaussian_initial(a, 1.0);
  CHECK_THROWS_AS(u += gaussian_initial(b, 1.0), ConfigError);
  const Field w = u + u;
  CHECK(polariton::testing::max_abs_diff(w.values(), 2.0 * u.values()) == 0.0);
  ComplexArray bad = u.values();
  bad[0] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(Field(a, bad), NumericalError);
}
