#include "doctest.h"

#include "support.hpp"
#include "sweep/errors.hpp"
#include "sweep/model.hpp"

using namespace sweep;
using doctest::Approx;

TEST_SUITE("model") {
  TEST_CASE("death rates on hand-evaluated states") {
    EcologyParams p;
    CHECK(death_rates(p, {10, 0.0}, PopState{}).isZero());

    p.D_A = 1.0;
    p.C << 1.0, 0.0, 1.0, 1.0;
    const Vec4 d = death_rates(p, {10, 0.0}, PopState{10, 0, 0, 0});
    CHECK(d(0) == Approx(20.0));
    CHECK(d(1) == 0.0);

    EcologyParams q;
    q.D_a = 0.0;
    q.C << 1.0, 0.0, 2.0, 0.0;
    const Vec4 e = death_rates(q, {4, 0.0}, PopState{2, 0, 1, 0});
    CHECK(e(2) == Approx(1.0));
    CHECK(e(3) == 0.0);
  }

  TEST_CASE("birth rates on hand-evaluated states") {
    EcologyParams p;
    p.f_A = 2.0;
    const Vec4 b = birth_rates(p, {1, 0.0}, PopState{3, 0, 0, 0});
    CHECK(b(0) == Approx(6.0));
    CHECK(b.tail<3>().isZero());

    EcologyParams q;
    const Vec4 c = birth_rates(q, {1, 1.0}, PopState{1, 0, 0, 1});
    for (int i = 0; i < 4; ++i) CHECK(c(i) == Approx(0.5));

    CHECK(birth_rates(q, {1, 1.0}, PopState{}).isZero());
  }

  TEST_CASE("derived ecology on hand-evaluated parameters") {
    EcologyParams p;
    p.f_A = 3.0;
    p.D_A = 1.0;
    p.f_a = 3.0;
    p.D_a = 1.0;
    p.C << 1.0, 1.0, 0.5, 1.0;
    const DerivedEcology e = derived_ecology(p);
    CHECK(e.nbar_a == Approx(2.0));
    CHECK(e.nbar_A == Approx(2.0));
    CHECK(e.S_aA == Approx(1.0));

    EcologyParams z;
    z.f_A = 1.0;
    z.D_A = 1.0;
    const DerivedEcology ez = derived_ecology(z);
    CHECK(ez.nbar_A == 0.0);
    CHECK_FALSE(ez.assumption1_ok);

    EcologyParams bad;
    bad.C(1, 1) = 0.0;
    CHECK_THROWS_AS(derived_ecology(bad), ParameterError);
  }

  TEST_CASE("working parameter sets satisfy assumption 1") {
    const DerivedEcology s = derived_ecology(testing::soft_params());
    CHECK(s.assumption1_ok);
    CHECK(s.nbar_A == Approx(1.0));
    CHECK(s.nbar_a == Approx(2.0));
    CHECK(s.S_aA == Approx(1.5));
    CHECK(s.S_Aa == Approx(-0.8));
    const DerivedEcology h = derived_ecology(testing::hard_params());
    CHECK(h.assumption1_ok);
    CHECK(h.S_aA / testing::hard_params().f_a == Approx(0.5));
  }

  TEST_CASE("linkage disequilibrium on small states") {
    CHECK(linkage_disequilibrium({1, 0, 1, 0}) == 0.0);
    CHECK(linkage_disequilibrium({1, 0, 0, 1}) == 1.0);
    CHECK(linkage_disequilibrium({0, 1, 1, 0}) == -1.0);
  }

  TEST_CASE("parameter validation names the violated constraint") {
    EcologyParams p;
    p.f_A = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), "f_A > 0", ParameterError);
    EcologyParams q;
    q.C(0, 1) = -0.1;
    CHECK_THROWS_AS(q.validate(), ParameterError);
    CHECK_THROWS_AS((ScalingParams{0, 0.0}.validate()), ParameterError);
    CHECK_THROWS_AS((ScalingParams{10, 1.5}.validate()), ParameterError);
    CHECK_NOTHROW((ScalingParams{1, 1.0}.validate()));
  }

  TEST_CASE("hard-sweep start and scaled initial states") {
    const PopState s = hard_sweep_initial(testing::hard_params(), 1000, 0.3);
    CHECK(s.n_Ab1 == 300);
    CHECK(s.n_Ab2 == 700);
    CHECK(s.n_ab1 == 1);
    CHECK(s.n_ab2 == 0);
    const PopState z = scaled_initial(Vec4(0.3, 0.3, 0.2, 0.2), 2000);
    CHECK(z == PopState{600, 600, 400, 400});
    CHECK(mutant_threshold(10000, 0.1) == 1000);
    const ResidentBand band = resident_band(testing::hard_params(), 1000, 0.1);
    CHECK(band.lo == Approx(800.0));
    CHECK(band.hi == Approx(1200.0));
    CHECK(band.contains(800));
    CHECK_FALSE(band.contains(1201));
  }

  TEST_CASE("property: births nonnegative and conserved per selected allele") {
    Rng rng(11);
    for (int it = 0; it < 100000; ++it) {
      const EcologyParams p = testing::random_params(rng);
      const double r = it % 7 == 0 ? 1.0 : rng.uniform();
      const PopState s = testing::random_state(rng, it % 3 == 0 ? 5 : 100000);
      if (s.total() == 0) continue;
      const Vec4 b = birth_rates(p, {1000, r}, s);
      REQUIRE((b.array() >= 0.0).all());
      REQUIRE(testing::close_rel(b(0) + b(1), p.f_A * static_cast<double>(s.n_A()), 1e-12));
      REQUIRE(testing::close_rel(b(2) + b(3), p.f_a * static_cast<double>(s.n_a()), 1e-12));
    }
  }

  TEST_CASE("property: linkage disequilibrium equals the proportion gap form") {
    Rng rng(12);
    for (int it = 0; it < 100000; ++it) {
      const PopState s = testing::random_state(rng, it % 2 == 0 ? 10 : 1000000);
      if (s.n_A() < 1 || s.n_a() < 1) continue;
      const double nA = static_cast<double>(s.n_A()), na = static_cast<double>(s.n_a());
      const double gap = nA * na * (static_cast<double>(s.n_Ab1) / nA - static_cast<double>(s.n_ab1) / na);
      REQUIRE(std::abs(linkage_disequilibrium(s) - gap) <= 1e-12 * nA * na);
    }
  }

  TEST_CASE("property: assumption 1 from equilibria agrees with the raw inequality") {
    Rng rng(13);
    int both = 0;
    for (int it = 0; it < 20000; ++it) {
      const EcologyParams p = testing::random_params(rng);
      const bool a = derived_ecology(p).assumption1_ok;
      REQUIRE(a == assumption1_raw(p));
      both += a;
    }
    CHECK(both > 100);
  }

  TEST_CASE("property: death rates are nonnegative and vanish on empty types") {
    Rng rng(14);
    for (int it = 0; it < 1000; ++it) {
      const EcologyParams p = testing::random_params(rng);
      const PopState s = testing::random_state(rng, 1000);
      const Vec4 d = death_rates(p, {500, 0.0}, s);
      CHECK((d.array() >= 0.0).all());
      for (int t = 0; t < 4; ++t)
        if (s[t] == 0) CHECK(d(t) == 0.0);
    }
  }
}
