#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"
#include "sweep/errors.hpp"
#include "sweep/ssa.hpp"
#include "sweep/stats.hpp"

using namespace sweep;
using doctest::Approx;

namespace {

SimConfig hard_config(std::int64_t K, std::uint64_t seed) {
  SimConfig c;
  c.initial_state = hard_sweep_initial(testing::hard_params(), K, 0.5);
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("ssa") {
  TEST_CASE("empty initial state is absorbed immediately") {
    SimConfig c;
    const SweepOutcome o = run_sweep(testing::hard_params(), {100, 0.0}, c).outcome;
    CHECK(o.status == SweepStatus::BothExtinct);
    CHECK_FALSE(o.fixed);
    CHECK(o.events_used == 0);
  }

  TEST_CASE("same seed gives bit-identical runs") {
    SimConfig c = hard_config(500, 42);
    c.record_mode = RecordMode::FullEvents;
    const SweepRun a = run_sweep(testing::hard_params(), {500, 0.2}, c);
    const SweepRun b = run_sweep(testing::hard_params(), {500, 0.2}, c);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
      CHECK(a.trajectory[i].t == b.trajectory[i].t);
      CHECK(a.trajectory[i].state == b.trajectory[i].state);
    }
    CHECK(a.outcome.t_final == b.outcome.t_final);
    CHECK(a.outcome.status == b.outcome.status);
  }

  TEST_CASE("every event changes one count by one") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SimConfig c = hard_config(300, seed);
      c.record_mode = RecordMode::FullEvents;
      const SweepRun run = run_sweep(testing::hard_params(), {300, 0.3}, c);
      REQUIRE(static_cast<std::int64_t>(run.trajectory.size()) == run.outcome.events_used + 1);
      for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
        const Vec4 d = run.trajectory[i].state.as_vector() - run.trajectory[i - 1].state.as_vector();
        REQUIRE(d.cwiseAbs().sum() == 1.0);
        REQUIRE(run.trajectory[i].t >= run.trajectory[i - 1].t);
      }
    }
  }

  TEST_CASE("outcome invariants hold on many runs") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const SweepOutcome o = run_sweep(testing::hard_params(), {200, 0.1}, hard_config(200, seed)).outcome;
      REQUIRE(o.p_ab1_final.has_value() == o.fixed);
      if (o.fixed) {
        REQUIRE(o.t_ext.has_value());
        REQUIRE(o.n_a_final >= 1);
        REQUIRE(*o.p_ab1_final >= 0.0);
        REQUIRE(*o.p_ab1_final <= 1.0);
      } else {
        REQUIRE(o.status == SweepStatus::Lost);
      }
      if (o.t_eps_hit && o.t_ext) REQUIRE(*o.t_eps_hit <= *o.t_ext);
    }
  }

  TEST_CASE("sampled trajectory carries the last event forward") {
    SimConfig full = hard_config(200, 9);
    full.record_mode = RecordMode::FullEvents;
    SimConfig sampled = full;
    sampled.record_mode = RecordMode::Sampled;
    sampled.sample_dt = 0.25;
    const SweepRun f = run_sweep(testing::hard_params(), {200, 0.5}, full);
    const SweepRun s = run_sweep(testing::hard_params(), {200, 0.5}, sampled);
    REQUIRE(!s.trajectory.empty());
    for (const TrajectoryPoint& p : s.trajectory) {
      auto it = std::upper_bound(f.trajectory.begin(), f.trajectory.end(), p.t,
                                 [](double t, const TrajectoryPoint& q) { return t < q.t; });
      REQUIRE(it != f.trajectory.begin());
      CHECK((it - 1)->state == p.state);
    }
    CHECK(s.trajectory.back().t <= s.outcome.t_final);
  }

  TEST_CASE("max_events truncation is an explicit outcome") {
    SimConfig c = hard_config(1000, 1);
    c.max_events = 10;
    const SweepOutcome o = run_sweep(testing::hard_params(), {1000, 0.0}, c).outcome;
    CHECK(o.status == SweepStatus::Truncated);
    CHECK(o.truncated());
    CHECK(o.events_used == 10);
  }

  TEST_CASE("config validation") {
    SimConfig c = hard_config(100, 0);
    c.epsilon = 0.001;
    CHECK_THROWS_AS(run_sweep(testing::hard_params(), {100, 0.0}, c), ParameterError);
    c.epsilon = 0.1;
    c.max_events = 0;
    CHECK_THROWS_AS(run_sweep(testing::hard_params(), {100, 0.0}, c), ParameterError);
    c.max_events = 100;
    c.record_mode = RecordMode::Sampled;
    CHECK_THROWS_AS(run_sweep(testing::hard_params(), {100, 0.0}, c), ParameterError);
  }

  TEST_CASE("observer can stop a run and stop_at_eps_hit ends at the threshold") {
    const auto stopped = run_sweep_observed(testing::hard_params(), {500, 0.0}, hard_config(500, 3),
                                            [](double, const PopState&, const PopState&, int) { return false; });
    CHECK(stopped.outcome.status == SweepStatus::Stopped);
    CHECK(stopped.outcome.events_used == 1);

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SimConfig c = hard_config(500, seed);
      c.stop_at_eps_hit = true;
      const SweepOutcome o = run_sweep(testing::hard_params(), {500, 0.0}, c).outcome;
      if (o.status == SweepStatus::EpsHit) {
        CHECK(o.final_state.n_a() == 50);
        CHECK(*o.t_eps_hit == o.t_final);
      } else {
        CHECK(o.status == SweepStatus::Lost);
      }
    }
  }

  TEST_CASE("trajectory CSV has the documented header and round-trip times") {
    std::ostringstream os;
    write_trajectory_csv(os, {{0.1, {1, 2, 3, 4}}});
    CHECK(os.str() == "t,n_Ab1,n_Ab2,n_ab1,n_ab2\n0.1,1,2,3,4\n");
  }

  TEST_CASE("monomorphic a-population stays near its equilibrium") {
    EcologyParams p;
    p.f_a = 2.0;
    p.D_a = 1.0;
    p.C << 1.0, 1.0, 1.0, 1.0;
    const std::int64_t K = 1000;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SimConfig c;
      c.initial_state = {0, 0, 1000, 0};
      c.seed = replicate_seed(77, seed);
      c.t_end = 50.0;
      double integral = 0.0, t_prev = 0.0;
      const auto add = [&](double a, double b, std::int64_t n) {
        const double lo = std::max(a, 10.0), hi = std::min(b, 50.0);
        if (hi > lo) integral += (hi - lo) * static_cast<double>(n) / K;
      };
      const SweepRun run = run_sweep_observed(p, {K, 0.0}, c, [&](double t, const PopState& before, const PopState&, int) {
        add(t_prev, t, before.total());
        t_prev = t;
        return true;
      });
      REQUIRE(run.outcome.status == SweepStatus::TimeLimit);
      add(t_prev, 50.0, run.outcome.final_state.total());
      const double avg = integral / 40.0;
      CHECK(avg >= 0.9);
      CHECK(avg <= 1.1);
    }
  }

  TEST_CASE("soft sweep fixes with high probability") {
    const FixationEstimate est = fixation_frequency(testing::soft_params(), {1000, 0.1},
                                                    scaled_initial(Vec4(0.3, 0.3, 0.2, 0.2), 1000), 200, 5);
    CHECK(est.n_truncated == 0);
    CHECK(est.estimate >= 0.99);
  }

  TEST_CASE("hard sweep fixation frequency matches S_aA / f_a") {
    const FixationEstimate est = fixation_frequency(testing::hard_params(), {1000, 0.1},
                                                    hard_sweep_initial(testing::hard_params(), 1000, 0.5), 2000, 6);
    CHECK(est.n_valid == 2000);
    CHECK(std::abs(est.estimate - 0.5) <= 0.04);
    CHECK(est.ci.contains(est.estimate));
  }

  TEST_CASE("fixation frequency does not depend on r_K") {
    const PopState init = hard_sweep_initial(testing::hard_params(), 500, 0.5);
    const FixationEstimate a = fixation_frequency(testing::hard_params(), {500, 0.0}, init, 1500, 21);
    const FixationEstimate b = fixation_frequency(testing::hard_params(), {500, 0.5}, init, 1500, 22);
    const double se = std::sqrt(a.estimate * (1 - a.estimate) / 1500 + b.estimate * (1 - b.estimate) / 1500);
    CHECK(std::abs(a.estimate - b.estimate) <= 2.58 * se);
  }

  TEST_CASE("law of T_eps is the same for every r_K") {
    auto hitting_times = [](double r, std::uint64_t base) {
      std::vector<double> out;
      for (std::uint64_t i = 0; out.size() < 500; ++i) {
        SimConfig c = hard_config(1000, replicate_seed(base, i));
        c.stop_at_eps_hit = true;
        const SweepOutcome o = run_sweep(testing::hard_params(), {1000, r}, c).outcome;
        if (o.t_eps_hit) out.push_back(*o.t_eps_hit);
      }
      return out;
    };
    const auto t0 = hitting_times(0.0, 31), t5 = hitting_times(0.5, 32), t1 = hitting_times(1.0, 33);
    CHECK(ks_two_sample(t0, t5).p_value > 0.01);
    CHECK(ks_two_sample(t0, t1).p_value > 0.01);
    CHECK(ks_two_sample(t5, t1).p_value > 0.01);
  }

  TEST_CASE("sweep duration scales like log K") {
    const double S = 1.0;
    for (std::int64_t K : {1000, 10000}) {
      std::vector<double> ratios;
      const int want = K == 1000 ? 200 : 40;
      for (std::uint64_t i = 0; static_cast<int>(ratios.size()) < want; ++i) {
        const SweepOutcome o =
            run_sweep(testing::hard_params(), {K, 0.1}, hard_config(K, replicate_seed(40 + K, i))).outcome;
        if (o.fixed && o.t_eps_hit) ratios.push_back(*o.t_eps_hit / std::log(static_cast<double>(K)));
      }
      const double m = median(ratios);
      CHECK(m >= 0.5 / S);
      CHECK(m <= 2.0 / S);
    }
  }
}
