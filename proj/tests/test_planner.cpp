#include <gtest/gtest.h>

#include <random>

#include "sre/planner.hpp"
#include "support/random_instance.hpp"

using namespace sre;

namespace {

PlanningInstance::Column col(int site, int device, double cost, std::vector<int> tps,
                             DeviceKind kind = DeviceKind::ris) {
  PlanningInstance::Column c;
  c.site_id = site;
  c.device = device;
  c.kind = kind;
  c.cost = cost;
  c.tps = std::move(tps);
  return c;
}

PlanningInstance make(int n_tp, std::vector<std::uint8_t> bs, int K, std::vector<PlanningInstance::Column> cols) {
  PlanningInstance inst;
  inst.tp_count = n_tp;
  inst.bs_delta = std::move(bs);
  inst.K = K;
  inst.columns = std::move(cols);
  return inst;
}

std::vector<std::pair<int, int>> picks(const Plan& p) {
  std::vector<std::pair<int, int>> out;
  for (const auto& i : p.installs) out.emplace_back(i.site_id, i.device);
  return out;
}

}  // namespace

TEST(Feasibility, UncoveredPointIsReported) {
  const auto inst = make(2, {1, 0}, 1, {});
  const auto rep = check_feasibility(inst);
  EXPECT_FALSE(rep.feasible);
  EXPECT_EQ(rep.uncoverable, std::vector<int>{1});
}

TEST(Feasibility, BsOnlyIsFeasible) {
  const auto inst = make(3, {1, 1, 1}, 1, {});
  EXPECT_TRUE(check_feasibility(inst).feasible);
  const Plan p = plan_min_cost(inst);
  EXPECT_EQ(p.proof, Optimality::optimal);
  EXPECT_TRUE(p.installs.empty());
  EXPECT_EQ(p.total_cost, 0.0);
}

TEST(Feasibility, SiteCountedOnceAcrossDevices) {
  // BS plus one site with two devices: enough for K=2, not for K=3.
  auto inst = make(1, {1}, 2, {col(4, 0, 1.0, {0}), col(4, 1, 2.0, {0})});
  EXPECT_TRUE(check_feasibility(inst).feasible);
  inst.K = 3;
  const auto rep = check_feasibility(inst);
  EXPECT_FALSE(rep.feasible);
  EXPECT_EQ(rep.uncoverable, std::vector<int>{0});
  const Plan p = plan_min_cost(inst);
  EXPECT_EQ(p.proof, Optimality::infeasible);
  EXPECT_EQ(p.uncoverable, std::vector<int>{0});
}

TEST(Planner, PicksCheaperOption) {
  const auto inst = make(1, {0}, 1, {col(1, 0, 3.0, {0}, DeviceKind::ncr), col(2, 0, 1.0, {0})});
  const Plan p = plan_min_cost(inst);
  ASSERT_EQ(p.installs.size(), 1u);
  EXPECT_EQ(p.installs[0].site_id, 2);
  EXPECT_DOUBLE_EQ(p.total_cost, 1.0);
}

TEST(Planner, SingleInstall) {
  const auto inst = make(1, {0}, 1, {col(7, 0, 1.75, {0})});
  const Plan p = plan_min_cost(inst);
  ASSERT_EQ(p.installs.size(), 1u);
  EXPECT_DOUBLE_EQ(p.total_cost, 1.75);
  EXPECT_EQ(p.coverage_count, std::vector<int>{1});
}

TEST(Planner, TieBreakFewerInstalls) {
  // Two unit devices or one device of cost 2.
  const auto inst = make(2, {0, 0}, 1, {col(1, 0, 1.0, {0}), col(2, 0, 1.0, {1}), col(3, 0, 2.0, {0, 1})});
  EXPECT_EQ(picks(plan_min_cost(inst)), (std::vector<std::pair<int, int>>{{3, 0}}));
  EXPECT_EQ(picks(brute_force_plan(inst)), (std::vector<std::pair<int, int>>{{3, 0}}));
}

TEST(Planner, TieBreakFewerNcrs) {
  const auto inst = make(1, {0}, 1, {col(1, 0, 1.0, {0}, DeviceKind::ncr), col(2, 0, 1.0, {0})});
  EXPECT_EQ(picks(plan_min_cost(inst)), (std::vector<std::pair<int, int>>{{2, 0}}));
}

TEST(Planner, TieBreakSmallestSiteIds) {
  const auto inst = make(1, {0}, 1, {col(9, 0, 1.0, {0}), col(5, 0, 1.0, {0}), col(6, 0, 1.0, {0})});
  EXPECT_EQ(picks(plan_min_cost(inst)), (std::vector<std::pair<int, int>>{{5, 0}}));
}

TEST(Planner, OneDevicePerSite) {
  // K=2 at one point: two devices at the same site do not count twice.
  const auto inst = make(1, {0}, 2, {col(1, 0, 1.0, {0}), col(1, 1, 1.0, {0}), col(2, 0, 5.0, {0})});
  const Plan p = plan_min_cost(inst);
  ASSERT_EQ(p.proof, Optimality::optimal);
  EXPECT_EQ(picks(p), (std::vector<std::pair<int, int>>{{1, 0}, {2, 0}}));
  EXPECT_DOUBLE_EQ(p.total_cost, 6.0);
}

TEST(Planner, BsCountsTowardK) {
  const auto inst = make(1, {1}, 2, {col(1, 0, 1.0, {0})});
  const Plan p = plan_min_cost(inst);
  EXPECT_EQ(p.installs.size(), 1u);
  EXPECT_EQ(p.coverage_count, std::vector<int>{2});
}

TEST(BruteForce, EmptyCatalog) {
  const auto inst = make(2, {1, 1}, 1, {});
  const Plan p = brute_force_plan(inst);
  EXPECT_EQ(p.proof, Optimality::optimal);
  EXPECT_EQ(p.total_cost, 0.0);
}

TEST(BruteForce, SizeGuard) {
  PlanningInstance inst = make(1, {0}, 1, {});
  for (int j = 0; j < 25; ++j) inst.columns.push_back(col(j, 0, 1.0, {0}));
  EXPECT_THROW(brute_force_plan(inst), SizeGuardError);
}

TEST(Instance, RejectsBadInput) {
  EXPECT_THROW(plan_min_cost(make(1, {0}, 0, {})), std::invalid_argument);
  EXPECT_THROW(plan_min_cost(make(1, {0}, 1, {col(1, 0, 0.0, {0})})), std::invalid_argument);
  EXPECT_THROW(plan_min_cost(make(1, {0}, 1, {col(1, 0, 1.0, {3})})), std::invalid_argument);
  EXPECT_THROW(plan_min_cost(make(1, {0}, 1, {col(1, 0, 1.0, {0}), col(1, 0, 2.0, {0})})), std::invalid_argument);
}

TEST(Planner, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(20240611);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const PlanningInstance inst = fixtures::random_instance(rng);
    const Plan bf = brute_force_plan(inst);
    const Plan bb = plan_min_cost(inst);
    ASSERT_EQ(bf.proof, bb.proof) << "trial " << trial;
    if (bf.proof != Optimality::optimal) continue;
    ++feasible;
    EXPECT_EQ(cost_units(bf.total_cost), cost_units(bb.total_cost)) << "trial " << trial;
    EXPECT_EQ(picks(bf), picks(bb)) << "trial " << trial;
  }
  EXPECT_GE(feasible, 100);
}

TEST(Planner, SameResultWithoutPreprocessing) {
  std::mt19937_64 rng(77);
  PlannerOptions raw;
  raw.preprocess = false;
  for (int trial = 0; trial < 100; ++trial) {
    const PlanningInstance inst = fixtures::random_instance(rng, 16, 40);
    const Plan a = plan_min_cost(inst);
    const Plan b = plan_min_cost(inst, raw);
    ASSERT_EQ(a.proof, b.proof);
    EXPECT_EQ(picks(a), picks(b)) << "trial " << trial;
  }
}

TEST(Planner, ThreadCountDoesNotChangePlan) {
  std::mt19937_64 rng(5);
  PlannerOptions par;
  par.threads = 4;
  for (int trial = 0; trial < 50; ++trial) {
    const PlanningInstance inst = fixtures::random_instance(rng, 20, 40);
    EXPECT_EQ(picks(plan_min_cost(inst)), picks(plan_min_cost(inst, par)));
  }
}

TEST(Planner, CostMonotoneInK) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    PlanningInstance inst = fixtures::random_instance(rng);
    inst.K = 1;
    const Plan p1 = plan_min_cost(inst);
    inst.K = 2;
    const Plan p2 = plan_min_cost(inst);
    if (p2.proof == Optimality::optimal) {
      ASSERT_EQ(p1.proof, Optimality::optimal);
      EXPECT_LE(cost_units(p1.total_cost), cost_units(p2.total_cost));
    }
  }
}

TEST(Planner, CostMonotoneWhenEntriesTurnOff) {
  // Dropping coverage entries is what raising the threshold does.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const PlanningInstance inst = fixtures::random_instance(rng);
    PlanningInstance tighter = inst;
    for (auto& c : tighter.columns) {
      std::vector<int> keep;
      for (int t : c.tps)
        if (u(rng) < 0.8) keep.push_back(t);
      c.tps = keep;
    }
    const Plan a = plan_min_cost(inst);
    const Plan b = plan_min_cost(tighter);
    if (b.proof == Optimality::optimal) {
      ASSERT_EQ(a.proof, Optimality::optimal);
      EXPECT_LE(cost_units(a.total_cost), cost_units(b.total_cost));
    }
  }
}

TEST(Planner, NcrCountNonIncreasingInNcrPrice) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const PlanningInstance base = fixtures::random_instance(rng, 14, 30);
    int prev = 1 << 30;
    for (double scale : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      PlanningInstance inst = base;
      for (auto& c : inst.columns)
        if (c.kind == DeviceKind::ncr) c.cost *= scale;
      const Plan p = plan_min_cost(inst);
      if (p.proof != Optimality::optimal) break;
      EXPECT_LE(p.ncr_count(), prev) << "trial " << trial << " scale " << scale;
      prev = p.ncr_count();
    }
  }
}

TEST(Planner, PlanInvariants) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const PlanningInstance inst = fixtures::random_instance(rng, 30, 60);
    const Plan p = plan_min_cost(inst);
    if (p.proof != Optimality::optimal) continue;
    double sum = 0.0;
    std::vector<int> sites;
    for (const auto& i : p.installs) {
      sum += i.cost;
      sites.push_back(i.site_id);
    }
    EXPECT_DOUBLE_EQ(sum, p.total_cost);
    EXPECT_TRUE(std::adjacent_find(sites.begin(), sites.end()) == sites.end());
    for (int t = 0; t < inst.tp_count; ++t) EXPECT_GE(p.coverage_count[static_cast<std::size_t>(t)], inst.K);
  }
}
