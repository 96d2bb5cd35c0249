/* test_policies.cpp -- placement rules per policy, criticality tracker,
   adaptive weight threshold, and both molding branches */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "taosched/machine.hpp"
#include "taosched/policies.hpp"
#include "taosched/types.hpp"

using namespace taosched;

namespace {

TaoNode make_node(TaskType type, int hint, int crit) {
  TaoNode n;
  n.id = 0;
  n.type = type;
  n.resource_hint = hint;
  n.criticality = crit;
  return n;
}

bool in_cluster(const MachineModel& m, CoreId core, int cluster_idx) {
  return m.cluster_of(core) == cluster_idx;
}

}  // namespace

TEST_CASE("named configurations carry the right spec and molding flag") {
  CHECK(policy_config_from_name("homogeneous").spec == PolicySpec::Homogeneous);
  CHECK(!policy_config_from_name("homogeneous").molding);
  CHECK(policy_config_from_name("crit-aware").spec == PolicySpec::CritAware);
  CHECK(!policy_config_from_name("crit-aware").molding);
  CHECK(policy_config_from_name("crit-ptt").spec == PolicySpec::CritPtt);
  CHECK(policy_config_from_name("crit-ptt").molding);
  CHECK(policy_config_from_name("weight").spec == PolicySpec::Weight);
  CHECK(policy_config_from_name("weight").molding);
  CHECK(policy_config_from_name("mold").spec == PolicySpec::Homogeneous);
  CHECK(policy_config_from_name("mold").molding);
  CHECK_THROWS_AS(policy_config_from_name("best-effort"), ConfigError);
  CHECK(canonical_policy_names() ==
        std::vector<std::string>{"homogeneous", "crit-aware", "crit-ptt", "weight", "mold"});
  PolicyConfig defaults;
  CHECK(defaults.tun.init_weight_threshold == doctest::Approx(1.5));
  CHECK(defaults.tun.threshold_history_weight == doctest::Approx(6.0));
  CHECK(defaults.tun.ewma_old_weight == doctest::Approx(4.0));
}

TEST_CASE("criticality tracker follows schedule/finish windows") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg;
  SchedulerState st(m, cfg);
  CHECK(st.max_running_criticality() == 0);
  st.task_scheduled(3);
  st.task_scheduled(5);
  st.task_scheduled(3);
  CHECK(st.max_running_criticality() == 5);
  st.task_finished(5);
  CHECK(st.max_running_criticality() == 3);
  st.task_finished(3);
  CHECK(st.max_running_criticality() == 3);
  st.task_finished(3);
  CHECK(st.max_running_criticality() == 0);
}

TEST_CASE("load counters track per-cluster width sums") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg;
  SchedulerState st(m, cfg);
  st.add_load(0, 2);
  st.add_load(1, 4);
  CHECK(st.total_load() == 6);
  CHECK(st.cluster_load(0) == 2);
  CHECK(st.cluster_load(1) == 4);
  st.remove_load(1, 4);
  CHECK(st.total_load() == 2);
  CHECK(st.cluster_load(1) == 0);
}

TEST_CASE("criticality-aware splits critical vs non-critical across clusters") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("crit-aware");
  SchedulerState st(m, cfg);
  Rng rng(1);
  st.task_scheduled(7);  // tracker now reads 7
  WakeupContext ctx;

  auto crit9 = make_node(TaskType::Matmul, 1, 9);
  auto crit2 = make_node(TaskType::Matmul, 1, 2);
  auto crit7 = make_node(TaskType::Matmul, 1, 7);
  for (int i = 0; i < 200; ++i) {
    PlacementResult hi = choose_core(crit9, ctx, st, cfg, rng);
    CHECK(hi.critical);
    CHECK(hi.to_big);
    CHECK(in_cluster(m, hi.target_core, m.big_cluster()));
    CHECK(hi.max_running_crit == 7);

    PlacementResult lo = choose_core(crit2, ctx, st, cfg, rng);
    CHECK(!lo.critical);
    CHECK(!lo.to_big);
    CHECK(in_cluster(m, lo.target_core, m.little_cluster()));

    // a tie with the tracker counts as critical
    PlacementResult tie = choose_core(crit7, ctx, st, cfg, rng);
    CHECK(tie.critical);
    CHECK(in_cluster(m, tie.target_core, m.big_cluster()));
  }
}

TEST_CASE("criticality-aware spreads uniformly inside the chosen cluster") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("crit-aware");
  SchedulerState st(m, cfg);
  Rng rng(5);
  WakeupContext ctx;
  auto node = make_node(TaskType::Sort, 1, 1);
  st.task_scheduled(9);  // everything below is non-critical
  std::vector<int> counts(static_cast<size_t>(m.core_count()), 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    counts[static_cast<size_t>(choose_core(node, ctx, st, cfg, rng).target_core)]++;
  for (CoreId c = 0; c < m.core_count(); ++c) {
    if (in_cluster(m, c, m.little_cluster())) {
      CHECK(counts[static_cast<size_t>(c)] > 2100);  // 2500 expected per LITTLE core
      CHECK(counts[static_cast<size_t>(c)] < 2900);
    } else {
      CHECK(counts[static_cast<size_t>(c)] == 0);
    }
  }
}

TEST_CASE("criticality-PTT sends critical tasks to the measured best core") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("crit-ptt");
  SchedulerState st(m, cfg);
  Rng rng(2);
  WakeupContext ctx;
  auto node = make_node(TaskType::Matmul, 1, 5);

  SUBCASE("cold table explores randomly over every core") {
    std::vector<int> counts(static_cast<size_t>(m.core_count()), 0);
    for (int i = 0; i < 10000; ++i)
      counts[static_cast<size_t>(choose_core(node, ctx, st, cfg, rng).target_core)]++;
    for (CoreId c = 0; c < m.core_count(); ++c) {
      CHECK(counts[static_cast<size_t>(c)] > 1000);  // 1250 expected
      CHECK(counts[static_cast<size_t>(c)] < 1500);
    }
  }
  SUBCASE("warm table pins the argmin core") {
    st.ptt().table(TaskType::Matmul).record(1, 1, 150.0);
    st.ptt().table(TaskType::Matmul).record(5, 1, 200.0);
    for (int i = 0; i < 50; ++i) {
      PlacementResult r = choose_core(node, ctx, st, cfg, rng);
      CHECK(r.critical);
      CHECK(r.target_core == 1);
    }
    // non-critical stays random even with a warm table
    st.task_scheduled(50);
    bool off_best = false;
    for (int i = 0; i < 200; ++i)
      off_best |= choose_core(node, ctx, st, cfg, rng).target_core != 1;
    CHECK(off_best);
  }
}

TEST_CASE("weight placement compares the measured ratio against the threshold") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("weight");
  Rng rng(3);
  WakeupContext ctx;
  auto node = make_node(TaskType::Matmul, 1, 1);

  SUBCASE("ratio 2.4 beats threshold 1.5, goes big, threshold rises") {
    SchedulerState st(m, cfg);
    st.ptt().table(TaskType::Matmul).record(0, 1, 240.0);  // LITTLE leader
    st.ptt().table(TaskType::Matmul).record(4, 1, 100.0);  // big leader
    PlacementResult r = choose_core(node, ctx, st, cfg, rng);
    CHECK(r.to_big);
    CHECK(in_cluster(m, r.target_core, m.big_cluster()));
    CHECK(st.weight_threshold() == doctest::Approx((2.4 + 6.0 * 1.5) / 7.0));  // 1.6286
  }
  SUBCASE("ratio 1.0 stays LITTLE, threshold falls") {
    SchedulerState st(m, cfg);
    st.ptt().table(TaskType::Matmul).record(0, 1, 100.0);
    st.ptt().table(TaskType::Matmul).record(4, 1, 100.0);
    PlacementResult r = choose_core(node, ctx, st, cfg, rng);
    CHECK(!r.to_big);
    CHECK(in_cluster(m, r.target_core, m.little_cluster()));
    CHECK(st.weight_threshold() == doctest::Approx((1.0 + 6.0 * 1.5) / 7.0));  // 1.4286
  }
  SUBCASE("cold table explores and leaves the threshold untouched") {
    SchedulerState st(m, cfg);
    for (int i = 0; i < 100; ++i) {
      choose_core(node, ctx, st, cfg, rng);
      CHECK(st.weight_threshold() == doctest::Approx(1.5));
    }
  }
}

TEST_CASE("threshold updates are convex combinations") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg;
  SchedulerState st(m, cfg);
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    double old = st.weight_threshold();
    double ratio = 0.2 + rng.uniform01() * 4.0;
    st.observe_weight(ratio);
    double next = st.weight_threshold();
    CHECK(next >= std::min(ratio, old) - 1e-12);
    CHECK(next <= std::max(ratio, old) + 1e-12);
    CHECK(next == doctest::Approx((ratio + 6.0 * old) / 7.0));
  }
}

TEST_CASE("measured weight prefers the task width and falls back across widths") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg;
  SchedulerState st(m, cfg);
  CHECK(!measured_weight(st.ptt(), TaskType::Sort, m, 1).has_value());

  auto& tbl = st.ptt().table(TaskType::Sort);
  tbl.record(0, 2, 440.0);
  tbl.record(4, 2, 200.0);
  // width 1 is cold, so the width-2 cells answer for prefer_width 1
  auto r = measured_weight(st.ptt(), TaskType::Sort, m, 1);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(2.2));

  tbl.record(2, 1, 330.0);
  tbl.record(6, 1, 300.0);
  r = measured_weight(st.ptt(), TaskType::Sort, m, 1);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(1.1));  // now the preferred width answers

  // ratios use the fastest measured leader on each side
  tbl.record(3, 1, 990.0);
  tbl.record(5, 1, 900.0);
  r = measured_weight(st.ptt(), TaskType::Sort, m, 1);
  CHECK(*r == doctest::Approx(1.1));
}

TEST_CASE("homogeneous keeps the first successor local and spreads the rest") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("homogeneous");
  SchedulerState st(m, cfg);
  Rng rng(17);
  auto node = make_node(TaskType::Copy, 1, 1);
  WakeupContext first{3, 0};
  for (int i = 0; i < 20; ++i) CHECK(choose_core(node, first, st, cfg, rng).target_core == 3);
  WakeupContext second{3, 1};
  bool moved = false;
  for (int i = 0; i < 200; ++i) {
    CoreId c = choose_core(node, second, st, cfg, rng).target_core;
    CHECK(c >= 0);
    CHECK(c < m.core_count());
    moved |= c != 3;
  }
  CHECK(moved);
}

TEST_CASE("molding disabled always returns the cluster-capped hint") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("homogeneous");
  SchedulerState st(m, cfg);
  CHECK(choose_width(make_node(TaskType::Sort, 1, 1), 0, st, cfg) == 1);
  CHECK(choose_width(make_node(TaskType::Sort, 4, 1), 5, st, cfg) == 4);
  CHECK(choose_width(make_node(TaskType::Sort, 8, 1), 2, st, cfg) == 4);  // capped
}

TEST_CASE("load-based molding grows into idle cores and never shrinks") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("mold");
  auto node = make_node(TaskType::Sort, 1, 1);

  SUBCASE("idle target cluster fills to full width") {
    SchedulerState st(m, cfg);
    st.add_load(1, 2);  // 2 of 8 cores busy, all of them elsewhere
    CHECK(choose_width(node, 0, st, cfg) == 4);
  }
  SUBCASE("partially busy target cluster fills the remaining slack") {
    SchedulerState st(m, cfg);
    st.add_load(0, 2);
    CHECK(choose_width(node, 0, st, cfg) == 2);
    st.add_load(0, 1);
    CHECK(choose_width(node, 0, st, cfg) == 1);  // slack 1
  }
  SUBCASE("a wide hint is kept even when slack is smaller") {
    SchedulerState st(m, cfg);
    st.add_load(0, 3);
    CHECK(choose_width(make_node(TaskType::Sort, 4, 1), 0, st, cfg) == 4);
  }
}

TEST_CASE("history-based molding follows the time-times-width comparison") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("mold");
  auto saturate = [](SchedulerState& st) {
    st.add_load(0, 4);
    st.add_load(1, 4);
  };
  auto node = make_node(TaskType::Matmul, 1, 1);

  SUBCASE("widens when the recorded cost is cheaper") {
    SchedulerState st(m, cfg);
    saturate(st);
    st.ptt().table(TaskType::Matmul).record(0, 1, 100.0);
    st.ptt().table(TaskType::Matmul).record(0, 4, 20.0);  // 20*4 = 80 < 100
    CHECK(choose_width(node, 0, st, cfg) == 4);
  }
  SUBCASE("keeps the width when the candidate cost is not lower") {
    SchedulerState st(m, cfg);
    saturate(st);
    st.ptt().table(TaskType::Matmul).record(0, 1, 100.0);
    st.ptt().table(TaskType::Matmul).record(0, 4, 30.0);  // 30*4 = 120 >= 100
    CHECK(choose_width(node, 0, st, cfg) == 1);
  }
  SUBCASE("unmeasured candidates are skipped") {
    SchedulerState st(m, cfg);
    saturate(st);
    st.ptt().table(TaskType::Matmul).record(0, 1, 100.0);
    CHECK(choose_width(node, 0, st, cfg) == 1);  // only the current width known
  }
  SUBCASE("candidates read the row of the leader the task would land on") {
    SchedulerState st(m, cfg);
    saturate(st);
    st.ptt().table(TaskType::Matmul).record(5, 1, 100.0);
    st.ptt().table(TaskType::Matmul).record(4, 4, 20.0);  // leader of core 5 at width 4
    CHECK(choose_width(node, 5, st, cfg) == 4);

    SchedulerState st2(m, cfg);
    saturate(st2);
    st2.ptt().table(TaskType::Matmul).record(5, 1, 100.0);
    st2.ptt().table(TaskType::Matmul).record(0, 4, 20.0);  // other cluster's leader
    CHECK(choose_width(node, 5, st2, cfg) == 1);
  }
  SUBCASE("cold table plus full load is the identity") {
    SchedulerState st(m, cfg);
    saturate(st);
    CHECK(choose_width(node, 3, st, cfg) == 1);
    CHECK(choose_width(make_node(TaskType::Matmul, 4, 1), 3, st, cfg) == 4);
  }
  SUBCASE("cost-symmetric variant compares against cost at the current width") {
    auto wide = make_node(TaskType::Matmul, 4, 1);
    SchedulerState st(m, cfg);
    saturate(st);
    st.ptt().table(TaskType::Matmul).record(0, 4, 30.0);
    st.ptt().table(TaskType::Matmul).record(0, 1, 100.0);
    // literal rule: budget is the raw 30us, nothing narrows
    CHECK(choose_width(wide, 0, st, cfg) == 4);
    PolicyConfig sym = cfg;
    sym.mold_cost_symmetric = true;
    // symmetric rule: budget 30*4 = 120 > 100, so width 1 wins
    CHECK(choose_width(wide, 0, st, sym) == 1);
  }
}

TEST_CASE("strictly increasing cost curves never widen") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("mold");
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    SchedulerState st(m, cfg);
    st.add_load(0, 4);
    st.add_load(1, 4);
    CoreId target = rng.uniform_int(0, m.core_count() - 1);
    // cost(w) = time(w) * w strictly increasing in w
    double cost = 10.0 + rng.uniform01() * 90.0;
    for (int w = 1; w <= 4; w *= 2) {
      st.ptt().table(TaskType::Sort).record(leader_core(target, w), w, cost / w);
      cost *= 1.05 + rng.uniform01();
    }
    for (int cur : {1, 2, 4}) {
      int w = choose_width(make_node(TaskType::Sort, cur, 1), target, st, cfg);
      CHECK(w <= cur);
      CHECK(is_pow2(w));
    }
  }
}

TEST_CASE("molded widths are always supported and stay inside the cluster") {
  MachineModel m = default_hikey_like();
  PolicyConfig cfg = policy_config_from_name("weight");
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    SchedulerState st(m, cfg);
    int busy = rng.uniform_int(0, 10);
    for (int i = 0; i < busy; ++i) st.add_load(rng.uniform_int(0, 1), rng.uniform_int(1, 4));
    int cells = rng.uniform_int(0, 8);
    for (int i = 0; i < cells; ++i) {
      int w = 1 << rng.uniform_int(0, 2);
      st.ptt().table(TaskType::Sort).record(leader_core(rng.uniform_int(0, 7), w), w,
                                            1.0 + rng.uniform01() * 200.0);
    }
    CoreId target = rng.uniform_int(0, m.core_count() - 1);
    int hint = 1 << rng.uniform_int(0, 3);
    int w = choose_width(make_node(TaskType::Sort, hint, 1), target, st, cfg);
    CHECK(is_pow2(w));
    int ci = m.cluster_of(target);
    CHECK(w <= m.max_place_width(ci));
    Place p{leader_core(target, w), w};
    CHECK(m.cluster_of(p.leader) == ci);
    CHECK(m.cluster_of(p.end() - 1) == ci);
  }
}
