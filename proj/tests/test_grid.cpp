#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kslab/grid.hpp"

using namespace kslab;

namespace {
constexpr double pi = std::numbers::pi;

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}
}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid validation rejects bad parameters with pinned messages") {
  CHECK_THROWS_WITH(make_grid(3, 16), "dim must be 1 or 2");
  CHECK_THROWS_WITH(make_grid(1, 15), "n must be even");
  CHECK_THROWS_WITH(make_grid(1, 6), "n must be at least 8");
  CHECK_THROWS_WITH(make_grid(1, 16, -1.0), "length must be positive");
  const Grid g = make_grid(2, 16);
  CHECK(g.length == doctest::Approx(2.0 * pi));
  CHECK(g.points() == 256);
  CHECK(g.spacing() == doctest::Approx(2.0 * pi / 16.0));
}

TEST_CASE("spectral derivative is exact on resolved trigonometric polynomials") {
  const Grid g = make_grid(1, 32);
  const Field f = sample(g, [](const std::array<double, 2>& x) {
    return 2.0 + std::cos(3.0 * x[0]) - 0.5 * std::sin(5.0 * x[0]);
  });
  const Field df = derivative(f, {1, 0});
  const Field df_exact = sample(g, [](const std::array<double, 2>& x) {
    return -3.0 * std::sin(3.0 * x[0]) - 2.5 * std::cos(5.0 * x[0]);
  });
  CHECK(max_abs_diff(df, df_exact) < 1e-12);

  const Field d2f = derivative(f, {2, 0});
  const Field d2f_exact = sample(g, [](const std::array<double, 2>& x) {
    return -9.0 * std::cos(3.0 * x[0]) + 12.5 * std::sin(5.0 * x[0]);
  });
  CHECK(max_abs_diff(d2f, d2f_exact) < 1e-11);
}

TEST_CASE("mixed partial derivatives are exact and commute in 2D") {
  const Grid g = make_grid(2, 24);
  const Field f = sample(g, [](const std::array<double, 2>& x) {
    return std::sin(2.0 * x[0]) * std::cos(3.0 * x[1]);
  });
  const Field dxy = derivative(f, {1, 1});
  const Field exact = sample(g, [](const std::array<double, 2>& x) {
    return 2.0 * std::cos(2.0 * x[0]) * (-3.0 * std::sin(3.0 * x[1]));
  });
  CHECK(max_abs_diff(dxy, exact) < 1e-12);

  const Field dx_then_y = derivative(derivative(f, {1, 0}), {0, 1});
  const Field dy_then_x = derivative(derivative(f, {0, 1}), {1, 0});
  CHECK(max_abs_diff(dx_then_y, dy_then_x) < 1e-12);
}

TEST_CASE("integral of any spectral derivative vanishes on the torus") {
  const Grid g = make_grid(1, 64);
  const Field f = sample(g, [](const std::array<double, 2>& x) {
    return 1.3 + 0.7 * std::cos(x[0]) + 0.2 * std::sin(7.0 * x[0]) - 0.05 * std::cos(13.0 * x[0]);
  });
  for (int order = 1; order <= 3; ++order) {
    const Field d = derivative(f, {order, 0});
    CHECK(std::abs(integrate(d)) < 1e-12);
  }
}

TEST_CASE("derivative error of exp(sin x) decays spectrally with resolution") {
  auto err_at = [](int n) {
    const Grid g = make_grid(1, n);
    const Field f = sample(g, [](const std::array<double, 2>& x) { return std::exp(std::sin(x[0])); });
    const Field df = derivative(f, {1, 0});
    const Field exact = sample(g, [](const std::array<double, 2>& x) {
      return std::cos(x[0]) * std::exp(std::sin(x[0]));
    });
    double m = 0.0;
    for (std::size_t i = 0; i < df.values.size(); ++i)
      m = std::max(m, std::abs(df.values[i] - exact.values[i]));
    return m;
  };
  const double e8 = err_at(8);
  const double e12 = err_at(12);  // non-power-of-two path
  const double e16 = err_at(16);
  const double e32 = err_at(32);
  CHECK(e12 < 0.1 * e8);
  CHECK(e16 < 0.1 * e12);
  CHECK(e16 < 1e-4);
  CHECK(e32 < 1e-12);
}

TEST_CASE("rectangle quadrature is exact for resolved trigonometric polynomials") {
  const Grid g = make_grid(1, 16);
  const Field f = sample(g, [](const std::array<double, 2>& x) {
    return 0.75 + std::cos(5.0 * x[0]) - 2.0 * std::sin(7.0 * x[0]);
  });
  CHECK(integrate(f) == doctest::Approx(0.75 * 2.0 * pi).epsilon(1e-13));

  const Grid g2 = make_grid(2, 16);
  const Field f2 = sample(g2, [](const std::array<double, 2>& x) {
    return 0.5 + std::sin(x[0]) * std::cos(2.0 * x[1]);
  });
  CHECK(integrate(f2) == doctest::Approx(0.5 * 4.0 * pi * pi).epsilon(1e-13));
}

TEST_CASE("two-thirds dealiasing keeps |k| <= n/3 and removes the rest") {
  const Grid g = make_grid(1, 24);  // keeps |k| <= 8, removes |k| >= 9
  const Field f = sample(g, [](const std::array<double, 2>& x) {
    return std::cos(8.0 * x[0]) + 0.5 * std::cos(9.0 * x[0]);
  });
  const Field fd = dealias(f);
  const Field kept = sample(g, [](const std::array<double, 2>& x) { return std::cos(8.0 * x[0]); });
  CHECK(max_abs_diff(fd, kept) < 1e-12);
}

TEST_CASE("odd-order derivatives zero the Nyquist mode, even orders keep it") {
  const Grid g = make_grid(1, 16);
  const Field f = sample(g, [](const std::array<double, 2>& x) { return std::cos(8.0 * x[0]); });
  const Field df = derivative(f, {1, 0});
  double m = 0.0;
  for (double v : df.values) m = std::max(m, std::abs(v));
  CHECK(m < 1e-12);  // the lone Nyquist mode has no signed partner

  const Field d2f = derivative(f, {2, 0});
  const Field exact = sample(g, [](const std::array<double, 2>& x) { return -64.0 * std::cos(8.0 * x[0]); });
  CHECK(max_abs_diff(d2f, exact) < 1e-9);
}

TEST_CASE("reduce returns sup, inf, sup_abs with first-occurrence indices") {
  const Grid g = make_grid(1, 16);
  Field f = make_field(g, 1, 0.0);
  f.values[3] = 2.0;
  f.values[9] = 2.0;   // tie: index 3 must win
  f.values[5] = -4.0;
  const ReduceResult s = reduce(f, Reduce::sup);
  CHECK(s.value == 2.0);
  CHECK(s.index == 3);
  const ReduceResult i = reduce(f, Reduce::inf);
  CHECK(i.value == -4.0);
  CHECK(i.index == 5);
  const ReduceResult a = reduce(f, Reduce::sup_abs);
  CHECK(a.value == 4.0);
  CHECK(a.index == 5);
}

TEST_CASE("non-power-of-two sizes use the chirp-z path and stay exact") {
  const Grid g = make_grid(1, 20);
  const Field f = sample(g, [](const std::array<double, 2>& x) { return std::cos(3.0 * x[0]); });
  const Field df = derivative(f, {1, 0});
  const Field exact = sample(g, [](const std::array<double, 2>& x) { return -3.0 * std::sin(3.0 * x[0]); });
  CHECK(max_abs_diff(df, exact) < 1e-12);

  const Grid g2 = make_grid(2, 12);
  const Field f2 = sample(g2, [](const std::array<double, 2>& x) {
    return std::sin(x[0] + 2.0 * x[1]);
  });
  CHECK(max_abs_diff(inverse(forward(f2)), f2) < 1e-13);
}

TEST_CASE("gradient, divergence, laplacian are mutually consistent") {
  const Grid g = make_grid(2, 32);
  const Field phi = sample(g, [](const std::array<double, 2>& x) {
    return std::sin(x[0]) * std::cos(x[1]);
  });
  const Field grad = gradient(phi);
  CHECK(grad.components == 2);
  const Field div_grad = divergence(grad);
  const Field lap = laplacian(phi);
  CHECK(max_abs_diff(div_grad, lap) < 1e-11);
  const Field minus_two_phi = sample(g, [](const std::array<double, 2>& x) {
    return -2.0 * std::sin(x[0]) * std::cos(x[1]);
  });
  CHECK(max_abs_diff(lap, minus_two_phi) < 1e-11);
}

TEST_CASE("spectral tail fraction separates resolved from marginal fields") {
  const Grid g = make_grid(1, 64);
  const Field smooth = sample(g, [](const std::array<double, 2>& x) { return std::exp(std::cos(x[0])); });
  CHECK(spectral_tail_fraction(smooth) < 1e-12);
  const Field marginal = sample(g, [](const std::array<double, 2>& x) { return std::cos(30.0 * x[0]); });
  CHECK(spectral_tail_fraction(marginal) > 0.99);
}

TEST_CASE("nonfinite values are detected") {
  const Grid g = make_grid(1, 8);
  Field f = make_field(g);
  CHECK_FALSE(has_nonfinite(f));
  f.values[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK(has_nonfinite(f));
}

}  // TEST_SUITE
