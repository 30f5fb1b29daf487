#include <doctest.h>

#include <cmath>
#include <cstring>

#include "kslab/timestep.hpp"

using namespace kslab;

namespace {

State smooth_state(const Grid& g) {
  State s;
  s.rho = sample(g, [](const std::array<double, 2>& x) {
    return 1.0 + 0.4 * std::cos(x[0]);
  });
  s.c = sample(g, [](const std::array<double, 2>& x) {
    return 1.0 + 0.3 * std::sin(x[0]);
  });
  return s;
}

double state_max_diff(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rho.values.size(); ++i)
    m = std::max(m, std::abs(a.rho.values[i] - b.rho.values[i]));
  for (std::size_t i = 0; i < a.c.values.size(); ++i)
    m = std::max(m, std::abs(a.c.values[i] - b.c.values[i]));
  return m;
}

}  // namespace

TEST_SUITE("timestep") {

TEST_CASE("rk4 shows fourth-order convergence on the coupled system") {
  const Grid g = make_grid(1, 32);
  ModelConfig cfg;
  cfg.D_rho = 0.1;
  cfg.D_c = 0.05;
  cfg.k.kind = CoeffKind::power;  // k(c) = c
  const State s0 = smooth_state(g);
  const double T = 0.08;

  auto run = [&](double dt) {
    State s = s0;
    const int steps = static_cast<int>(std::round(T / dt));
    for (int i = 0; i < steps; ++i) s = step_rk4(s, cfg, dt);
    return s;
  };
  const State ref = run(T / 256.0);
  const double e1 = state_max_diff(run(T / 8.0), ref);
  const double e2 = state_max_diff(run(T / 16.0), ref);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.7);
  CHECK(order < 4.3);
}

TEST_CASE("imex equals rk4 bitwise when the chemical does not diffuse") {
  const Grid g = make_grid(1, 32);
  ModelConfig cfg;
  cfg.D_rho = 0.02;
  cfg.k.kind = CoeffKind::power;
  const State s0 = smooth_state(g);
  const State a = step_rk4(s0, cfg, 1e-3);
  const State b = step_imex(s0, cfg, 1e-3);
  CHECK(std::memcmp(a.rho.values.data(), b.rho.values.data(),
                    a.rho.values.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.c.values.data(), b.c.values.data(),
                    a.c.values.size() * sizeof(double)) == 0);
}

TEST_CASE("imex reproduces the exact heat semigroup when only diffusion acts") {
  const Grid g = make_grid(1, 64);
  ModelConfig cfg;
  cfg.D_c = 2.0;
  State s;
  s.rho = make_field(g, 1, 0.0);  // no cells: c evolves by pure diffusion
  s.c = sample(g, [](const std::array<double, 2>& x) {
    return 1.0 + 0.5 * std::cos(x[0]) + 0.25 * std::sin(3.0 * x[0]);
  });
  const double dt = 0.1;  // explicit RK4 would need dt < 2.79/(2*32^2) ~ 1.4e-3
  const State s1 = step_imex(s, cfg, dt);
  const Field exact = sample(g, [dt](const std::array<double, 2>& x) {
    return 1.0 + 0.5 * std::exp(-2.0 * dt) * std::cos(x[0]) +
           0.25 * std::exp(-2.0 * 9.0 * dt) * std::sin(3.0 * x[0]);
  });
  double m = 0.0;
  for (std::size_t i = 0; i < exact.values.size(); ++i)
    m = std::max(m, std::abs(s1.c.values[i] - exact.values[i]));
  CHECK(m < 1e-12);
}

TEST_CASE("imex stays stable and accurate far beyond the explicit diffusion limit") {
  const Grid g = make_grid(1, 64);
  ModelConfig cfg;
  cfg.D_c = 10.0;
  cfg.k.kind = CoeffKind::power;
  const State s0 = smooth_state(g);
  const double dt = 5e-3;  // ~75x the explicit viscous bound for D_c = 10
  State s = s0;
  for (int i = 0; i < 20; ++i) s = step_imex(s, cfg, dt);
  CHECK_FALSE(has_nonfinite(s.rho));
  CHECK_FALSE(has_nonfinite(s.c));

  State fine = s0;  // imex reference at much smaller dt
  for (int i = 0; i < 2000; ++i) fine = step_imex(fine, cfg, dt / 100.0);
  CHECK(state_max_diff(s, fine) < 1e-8);
}

TEST_CASE("imex converges at fourth order with stiff diffusion active") {
  const Grid g = make_grid(1, 32);
  ModelConfig cfg;
  cfg.D_rho = 0.02;
  cfg.D_c = 1.0;
  cfg.k.kind = CoeffKind::power;
  const State s0 = smooth_state(g);
  const double T = 0.08;
  auto run = [&](double dt) {
    State s = s0;
    const int steps = static_cast<int>(std::round(T / dt));
    for (int i = 0; i < steps; ++i) s = step_imex(s, cfg, dt);
    return s;
  };
  const State ref = run(T / 256.0);
  const double e1 = state_max_diff(run(T / 8.0), ref);
  const double e2 = state_max_diff(run(T / 16.0), ref);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.6);
  CHECK(order < 4.4);
}

TEST_CASE("cfl controller combines transport and viscous limits") {
  const Grid g = make_grid(1, 256);
  ModelConfig cfg;
  State s;
  s.rho = make_field(g, 1, 1.0);
  // |grad c|_inf = 10 exactly at the resolved mode
  s.c = sample(g, [](const std::array<double, 2>& x) { return 10.0 * std::sin(x[0]); });
  StepperConfig sc;
  sc.cfl_number = 0.4;

  SUBCASE("pure transport") {
    const CflResult r = cfl_dt(s, cfg, sc);
    CHECK(r.dt_transport == doctest::Approx(0.4 * g.spacing() / 10.0).epsilon(1e-12));
    CHECK(std::isinf(r.dt_viscous));
    CHECK(r.dt == doctest::Approx(r.dt_transport));
    CHECK_FALSE(r.clamped_to_min);
  }

  SUBCASE("viscous bound binds for explicit diffusion") {
    cfg.D_c = 50.0;
    const CflResult r = cfl_dt(s, cfg, sc);
    const double k_max = 128.0;
    CHECK(r.dt_viscous == doctest::Approx(0.4 * 2.79 / (50.0 * k_max * k_max)).epsilon(1e-12));
    CHECK(r.dt == doctest::Approx(r.dt_viscous));
  }

  SUBCASE("imex ignores the chemical diffusivity in the viscous cap") {
    cfg.D_c = 50.0;
    sc.scheme = Scheme::imex;
    const CflResult r = cfl_dt(s, cfg, sc);
    CHECK(std::isinf(r.dt_viscous));
    CHECK(r.dt == doctest::Approx(r.dt_transport));
  }

  SUBCASE("dt_min clamp raises a warning flag") {
    sc.dt_min = 1e-2;
    sc.dt_max = 1.0;
    const CflResult r = cfl_dt(s, cfg, sc);
    CHECK(r.dt == 1e-2);
    CHECK(r.clamped_to_min);
  }
}

TEST_CASE("mass and incompressibility survive many steps") {
  const Grid g = make_grid(2, 24);
  ModelConfig cfg;
  cfg.dim = 2;
  cfg.include_fluid = true;
  cfg.D_rho = 0.05;
  cfg.D_u = 0.02;
  cfg.phi = sample(g, [](const std::array<double, 2>& x) { return std::cos(x[1]); });
  State s;
  s.rho = sample(g, [](const std::array<double, 2>& x) {
    return 1.0 + 0.3 * std::cos(x[0]) * std::sin(x[1]);
  });
  s.c = sample(g, [](const std::array<double, 2>& x) {
    return 1.0 + 0.2 * std::sin(x[0]);
  });
  const Field psi = sample(g, [](const std::array<double, 2>& x) {
    return 0.1 * std::sin(x[0]) * std::sin(x[1]);
  });
  const Field gpsi = gradient(psi);
  Field u = make_field(g, 2);
  for (std::size_t i = 0; i < g.points(); ++i) {
    u.at(0, i) = -gpsi.at(1, i);
    u.at(1, i) = gpsi.at(0, i);
  }
  s.u = u;

  const double mass0 = integrate(s.rho);
  for (int i = 0; i < 100; ++i) s = step_rk4(s, cfg, 2e-3);
  CHECK(std::abs(integrate(s.rho) - mass0) < 1e-12);
  const Field div_u = divergence(*s.u);
  double m = 0.0;
  for (double v : div_u.values) m = std::max(m, std::abs(v));
  CHECK(m < 1e-11);
  CHECK(s.t == doctest::Approx(0.2));
}

}  // TEST_SUITE
