#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "sweep/dynsys.hpp"
#include "sweep/errors.hpp"
#include "sweep/predict.hpp"

using namespace sweep;
using doctest::Approx;

TEST_SUITE("predict") {
  TEST_CASE("rho_K reference values") {
    const EcologyParams p = testing::hard_params();
    CHECK(rho_K(p, 0.0, 10000) == 0.0);
    CHECK(rho_K(p, testing::weak_r(10000), 10000) == Approx(0.632121).epsilon(1e-6));
    CHECK(rho_K(p, 1.0, 1'000'000'000'000) > 0.999999);
    CHECK_THROWS_AS(rho_K(p, 1.5, 100), ParameterError);
  }

  TEST_CASE("soft prediction with equal proportions is that proportion for every r") {
    for (double r : {0.0, 0.1, 0.5, 1.0})
      CHECK(predict_soft(testing::soft_params(), r, Vec4(0.3, 0.3, 0.2, 0.2)).p_ab1_limit == Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("soft prediction without recombination keeps the mutant proportion") {
    const SweepPrediction s = predict_soft(testing::soft_params(), 0.0, Vec4(0.5, 0.1, 0.1, 0.3));
    CHECK(s.p_ab1_limit == Approx(0.25));
    CHECK(*s.F_limit == 0.0);
    CHECK(s.fixation_prob == 1.0);
  }

  TEST_CASE("soft prediction without residents is the mutant proportion") {
    CHECK(predict_soft(testing::soft_params(), 0.7, Vec4(0.0, 0.0, 0.1, 0.3)).p_ab1_limit == Approx(0.25));
  }

  TEST_CASE("soft prediction matches the long-time four-type flow") {
    const Vec4 z(0.5, 0.1, 0.1, 0.3);
    for (double r : {0.05, 0.3, 1.0}) {
      DenseState d;
      d.n = z;
      const double flow = integrate_lv4(testing::soft_params(), r, d, 200.0).back().state.p_ab1();
      CHECK(std::abs(predict_soft(testing::soft_params(), r, z).p_ab1_limit - flow) <= 1e-5);
    }
  }

  TEST_CASE("soft prediction moves toward the resident proportion as r grows") {
    const Vec4 z(0.5, 0.1, 0.1, 0.3);
    double prev = predict_soft(testing::soft_params(), 0.0, z).p_ab1_limit;
    for (double r : {0.1, 0.2, 0.4, 0.8, 1.0}) {
      const double now = predict_soft(testing::soft_params(), r, z).p_ab1_limit;
      CHECK(now >= prev);
      CHECK(now <= 0.5 / 0.6);
      prev = now;
    }
  }

  TEST_CASE("hard prediction reference values") {
    const EcologyParams p = testing::hard_params();
    CHECK(predict_hard(p, 0.0, 10000, 0.5, Regime::HardWeak).p_ab1_limit == 1.0);
    CHECK(predict_hard(p, 0.3, 10000, 0.37, Regime::HardStrong).p_ab1_limit == 0.37);
    const SweepPrediction w = predict_hard(p, testing::weak_r(10000), 10000, 0.5, Regime::HardWeak);
    CHECK(w.p_ab1_limit == Approx(0.683939).epsilon(1e-6));
    CHECK(w.fixation_prob == Approx(0.5));
    CHECK(*w.r_log_K == Approx(0.5));
    CHECK_THROWS_AS(predict_hard(p, 0.1, 100, 0.5, Regime::Soft), RegimeError);
    CHECK_THROWS_AS(predict_hard(p, 0.1, 100, 1.5, Regime::HardWeak), ParameterError);
    EcologyParams no_invasion = p;
    no_invasion.C(1, 0) = 3.0;
    CHECK_THROWS_AS(predict_hard(no_invasion, 0.1, 100, 0.5, Regime::HardWeak), RegimeError);
  }

  TEST_CASE("property: weak regime approaches the strong regime") {
    Rng rng(21);
    const EcologyParams p = testing::hard_params();
    for (int it = 0; it < 5000; ++it) {
      const double r = rng.uniform();
      const auto K = static_cast<std::int64_t>(2 + rng.below(1'000'000));
      const double frac = rng.uniform();
      const SweepPrediction w = predict_hard(p, r, K, frac, Regime::HardWeak);
      const double strong = predict_hard(p, r, K, frac, Regime::HardStrong).p_ab1_limit;
      REQUIRE(std::abs(w.p_ab1_limit - strong) <= (1.0 - *w.rho_K) * std::abs(1.0 - frac) + 1e-15);
      REQUIRE(w.p_ab1_limit >= 0.0);
      REQUIRE(w.p_ab1_limit <= 1.0);
    }
  }

  TEST_CASE("property: soft predictions lie in [0, 1]") {
    Rng rng(22);
    for (int it = 0; it < 200; ++it) {
      const Vec4 z(rng.uniform(), rng.uniform(), rng.uniform() + 0.01, rng.uniform());
      const double v = predict_soft(testing::soft_params(), rng.uniform(), z).p_ab1_limit;
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}
