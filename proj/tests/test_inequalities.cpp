#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "kslab/inequalities.hpp"

using namespace kslab;

TEST_SUITE("inequalities") {

TEST_CASE("integer partitions enumerate every decomposition once") {
  const auto p3 = integer_partitions(3);
  REQUIRE(p3.size() == 3);
  CHECK(p3[0] == std::vector<int>{3});
  CHECK(p3[1] == std::vector<int>{2, 1});
  CHECK(p3[2] == std::vector<int>{1, 1, 1});
  CHECK(integer_partitions(4).size() == 5);
  CHECK(integer_partitions(5).size() == 7);
}

TEST_CASE("weighted interpolation quantity matches a frozen closed-form value") {
  const Grid g = make_grid(1, 128);
  const Field f = sample(g, [](const std::array<double, 2>& x) { return 2.0 + std::sin(x[0]); });
  // l = 1, m = 2, gamma = 1: integral cos^4 x / (2+sin x)^3
  CHECK(gns_I(f, 1, 2, 1.0, 0.0) == doctest::Approx(0.390674805841056).epsilon(1e-11));
  // l = m: integral |grad^m|^2 / g^gamma, here integral sin^2/(2+sin)
  const double direct = gns_I(f, 2, 2, 1.0, 0.0);
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double x = g.coord(i);
    acc += std::sin(x) * std::sin(x) / (2.0 + std::sin(x));
  }
  CHECK(direct == doctest::Approx(acc * g.spacing()).epsilon(1e-12));
}

TEST_CASE("Hoelder factorisation step holds with constant exactly one") {
  const Grid g = make_grid(1, 256);
  int checked = 0;
  for (int s = 0; s < 25; ++s) {
    const Field f = random_positive_trig(g, 16, 0.2, 7000 + static_cast<std::uint64_t>(s));
    for (const int m : {3, 4, 5}) {
      for (const auto& part : integer_partitions(m)) {
        for (const double gamma : {0.5, 1.0}) {
          const HolderCheck hc = holder_step_check(f, part, m, gamma, 0.0);
          CHECK(hc.ratio <= 1.0 + 1e-9);
          if (part.size() == 1) CHECK(hc.ratio == doctest::Approx(1.0).epsilon(1e-13));
          ++checked;
        }
      }
    }
  }
  CHECK(checked == 25 * (3 + 5 + 7) * 2);
  const Field f = random_positive_trig(g, 8, 0.3, 1);
  CHECK_THROWS(holder_step_check(f, {2, 2}, 3, 1.0, 0.0));  // parts must sum to m
}

TEST_CASE("chain rung ratios are finite and the m = 2 chain has no interior rung") {
  const Grid g = make_grid(1, 256);
  const Field f = random_positive_trig(g, 12, 0.25, 42);
  const ChainCheck c2 = gns_chain_check(f, 2, 1.0, 0.0);
  CHECK(c2.rungs.empty());
  CHECK(c2.worst_ratio == 0.0);

  const ChainCheck c5 = gns_chain_check(f, 5, 1.0, 0.0);
  REQUIRE(c5.rungs == std::vector<int>{2, 3, 4});
  for (double r : c5.ratios) {
    CHECK(r > 0.0);
    CHECK(std::isfinite(r));
  }
}

TEST_CASE("surveyed chain constants dominate fresh samples from the same corpus") {
  ConstantTable table;
  survey_constants(table, 1, 256, 12, 9000);
  for (int s = 0; s < 12; ++s) {
    const Field f = random_positive_trig(make_grid(1, 256), 24, 0.2, 9000 + static_cast<std::uint64_t>(s));
    const ChainCheck cc = gns_chain_check(f, 4, 1.0, 0.0);
    for (std::size_t i = 0; i < cc.rungs.size(); ++i) {
      const auto bound = table.get(chain_key(4, 1.0, 1, cc.rungs[i]));
      REQUIRE(bound.has_value());
      CHECK(cc.ratios[i] <= *bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("second-order chain: identity exact, displayed step fails, repairs hold") {
  const Grid g = make_grid(1, 128);
  const Field c = sample(g, [](const std::array<double, 2>& x) { return 2.0 + std::sin(x[0]); });
  const M2ChainCheck r = m2_chain_check(c, 0.0);
  CHECK(r.A == doctest::Approx(0.390674805841).epsilon(1e-10));
  CHECK(r.B == doctest::Approx(0.260449870561).epsilon(1e-10));
  // 1D: H = B, so the exact identity B = 2A - 2H forces B = (2/3) A
  CHECK(r.H == doctest::Approx(r.B).epsilon(1e-10));
  CHECK(std::abs(r.B - 2.0 / 3.0 * r.A) < 1e-12);
  CHECK(std::abs(r.identity_residual) < 1e-12);
  CHECK_FALSE(r.first_step_holds);  // 2A <= B would need B >= 2A, but B = (2/3)A
  CHECK(r.second_step_holds);
  CHECK(r.young_rhs == doctest::Approx(0.876680880720).epsilon(1e-10));
  CHECK(r.repaired_holds);
  CHECK(r.A <= r.cauchy_rhs);

  // the failure is structural: every nonconstant positive sample rejects step one
  const Grid gf = make_grid(1, 512);
  for (int s = 0; s < 10; ++s) {
    const Field f = random_positive_trig(gf, 10, 0.3, 500 + static_cast<std::uint64_t>(s));
    const M2ChainCheck rr = m2_chain_check(f, 0.0);
    CHECK_FALSE(rr.first_step_holds);
    CHECK(rr.second_step_holds);
    CHECK(std::abs(rr.identity_residual) < 1e-8 * std::max(1.0, std::abs(rr.A)));
  }

  // the residual is pure discretisation error: it collapses under refinement
  const M2ChainCheck coarse =
      m2_chain_check(random_positive_trig(make_grid(1, 128), 10, 0.3, 500), 0.0);
  const M2ChainCheck fine = m2_chain_check(random_positive_trig(gf, 10, 0.3, 500), 0.0);
  CHECK(std::abs(fine.identity_residual) < std::abs(coarse.identity_residual) / 100.0);

  // 2D: the Hessian cross term is genuinely distinct, identity still exact
  const Grid g2 = make_grid(2, 64);
  const Field c2 = sample(g2, [](const std::array<double, 2>& x) {
    return 2.0 + 0.5 * std::sin(x[0]) * std::cos(x[1]) + 0.3 * std::cos(x[0]);
  });
  const M2ChainCheck r2 = m2_chain_check(c2, 0.0);
  CHECK(std::abs(r2.identity_residual) < 1e-10);
  CHECK(std::abs(r2.H - r2.B) > 1e-3);  // H = B is special to one dimension
  CHECK_FALSE(r2.first_step_holds);
  CHECK(r2.second_step_holds);
}

TEST_CASE("Hardy variant ratios match the frozen discrete oracle") {
  const Grid g = make_grid(1, 512);
  auto gaussian = [&](double width) {
    return sample(g, [width](const std::array<double, 2>& x) {
      double d = std::fmod(std::abs(x[0]), 2.0 * std::numbers::pi);
      if (d > std::numbers::pi) d = 2.0 * std::numbers::pi - d;
      return std::exp(-d * d / (2.0 * width * width));
    });
  };
  CHECK(hardy_variant_check(gaussian(0.1), {0.0, 0.0}).ratio ==
        doctest::Approx(1.221785396857).epsilon(1e-9));
  CHECK(hardy_variant_check(gaussian(0.3), {0.0, 0.0}).ratio ==
        doctest::Approx(1.304118002339).epsilon(1e-9));
  CHECK(hardy_variant_check(gaussian(1.0), {0.0, 0.0}).ratio ==
        doctest::Approx(1.379744791385).epsilon(1e-9));
  const Field bump = sample(g, [](const std::array<double, 2>& x) {
    return std::pow((1.0 + std::cos(x[0])) / 2.0, 8.0);
  });
  CHECK(hardy_variant_check(bump, {0.0, 0.0}).ratio ==
        doctest::Approx(1.337219163608).epsilon(1e-9));
}

TEST_CASE("weighted sup bound produces finite ratios and zero for constants") {
  const Grid g = make_grid(1, 256);
  const Field f = random_positive_trig(g, 12, 0.2, 77);
  const LinftyCheck lc = linfty_weighted_check(f, 1, 1.0, 0.0);
  CHECK(lc.lhs > 0.0);
  CHECK(lc.rhs > 0.0);
  CHECK(std::isfinite(lc.ratio));

  const Field cst = make_field(g, 1, 1.5);
  const LinftyCheck lc0 = linfty_weighted_check(cst, 1, 1.0, 0.0);
  CHECK(lc0.lhs == 0.0);
}

TEST_CASE("constant table round-trips through its text format") {
  ConstantTable t;
  t.set("chain m=3 gamma=1 d=1 l=2", 1.2345678901234567);
  t.record_max("chain m=3 gamma=1 d=1 l=2", 0.5);  // smaller: keeps old
  t.record_max("hardy d=1", 1.5);
  const std::string path = "/tmp/kslab_table_test.txt";
  t.save(path);
  const ConstantTable u = ConstantTable::load(path);
  REQUIRE(u.get("chain m=3 gamma=1 d=1 l=2").has_value());
  CHECK(*u.get("chain m=3 gamma=1 d=1 l=2") == 1.2345678901234567);
  CHECK(*u.get("hardy d=1") == 1.5);
  CHECK_FALSE(u.get("missing").has_value());
  std::remove(path.c_str());

  CHECK_THROWS(ConstantTable::load("/nonexistent/table.txt"));
}

TEST_CASE("random corpus is deterministic, positive, and seed-sensitive") {
  const Grid g = make_grid(1, 64);
  const Field a = random_positive_trig(g, 8, 0.2, 123);
  const Field b = random_positive_trig(g, 8, 0.2, 123);
  const Field c = random_positive_trig(g, 8, 0.2, 124);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(reduce(a, Reduce::inf).value == doctest::Approx(0.2).epsilon(1e-14));
}

}  // TEST_SUITE
