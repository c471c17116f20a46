#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <gtest/gtest.h>

#include "test_common.hpp"

using namespace lineopt;
using testing_util::all_slots;

namespace {

// Slot-by-slot production tally for a stage, written without the hours table.
double tally_annual(const ProblemCatalog& c, const StageState& st) {
  double total = 0.0;
  int wd = c.calendar.first_weekday;
  for (int day = 0; day < c.calendar.total_days(); ++day, wd = (wd + 1) % 7) {
    for (int k = 0; k < kSlotsPerDay; ++k) {
      for (const auto& shop : {st.first, st.second}) {
        if (c.shift(shop.shift_id).weekly_pattern[wd * kSlotsPerDay + k]) total += 0.5 * c.rate(shop.rate_id);
      }
    }
  }
  return total;
}

ProblemCatalog two_shift_catalog() {
  ProblemCatalog c;
  c.shifts.push_back({1, weekly_pattern_from_blocks(0x1f, {{12, 28}})});  // 40 h
  c.shifts.push_back({2, weekly_pattern_from_blocks(0x7f, {{0, 48}})});   // 168 h
  c.rates = {{1, 50.0}};
  c.nominal_rate_id = 1;
  c.monthly_targets.fill(30000.0);
  return c;
}

}  // namespace

TEST(StageIndexer, SizesPerDevMode) {
  const auto c = default_catalog();
  EXPECT_EQ(build_indexer(c, DevMode::yes_dev).size(), 5625u);
  EXPECT_EQ(build_indexer(c, DevMode::no_dev).size(), 225u);
}

TEST(StageIndexer, OrderedBijection) {
  const auto c = default_catalog();
  for (auto mode : {DevMode::no_dev, DevMode::yes_dev}) {
    const StageIndexer idx(c, mode);
    std::set<std::array<int, 4>> seen;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& s = idx.state(i);
      ASSERT_EQ(idx.index_of(s), i);
      seen.insert({s.first.shift_id, s.first.rate_id, s.second.shift_id, s.second.rate_id});
      if (mode == DevMode::no_dev) {
        EXPECT_EQ(s.first.rate_id, c.nominal_rate_id);
        EXPECT_EQ(s.second.rate_id, c.nominal_rate_id);
      }
      if (i > 0) {
        ASSERT_LE(idx.ideal_output(i - 1), idx.ideal_output(i));
        if (idx.ideal_output(i - 1) == idx.ideal_output(i)) {
          const auto& p = idx.state(i - 1);
          EXPECT_LT(std::tie(p.first.shift_id, p.first.rate_id, p.second.shift_id, p.second.rate_id),
                    std::tie(s.first.shift_id, s.first.rate_id, s.second.shift_id, s.second.rate_id));
        }
      }
    }
    EXPECT_EQ(seen.size(), idx.size());
  }
}

TEST(StageIndexer, FirstStateHasMinimalIdealOutput) {
  const auto c = default_catalog();
  const StageIndexer idx(c, DevMode::yes_dev);
  double lo = 1e300;
  for (std::size_t i = 0; i < idx.size(); ++i) lo = std::min(lo, idx.ideal_output(i));
  EXPECT_EQ(idx.ideal_output(0), lo);
  EXPECT_EQ(idx.index_of({{99, 1}, {1, 1}}), std::nullopt);
}

TEST(Estimate, ZeroForIdleShops) {
  auto c = testing_util::always_on_catalog();
  c.shifts.push_back({2, all_slots(false)});
  const auto e = estimate_production(c, 1, {{2, 1}, {2, 3}});
  EXPECT_EQ(e.annual, 0.0);
}

TEST(Estimate, SingleShopDirectProduct) {
  auto c = testing_util::always_on_catalog();
  c.calendar = Calendar::aligned_weeks();
  c.shifts.push_back({2, weekly_pattern_from_blocks(0x1f, {{12, 44}})});  // 320 h per 4 weeks
  c.shifts.push_back({3, all_slots(false)});
  const auto e = estimate_production(c, 2, {{2, 2}, {3, 2}});
  for (double m : e.monthly) EXPECT_DOUBLE_EQ(m, 16000.0);
  EXPECT_DOUBLE_EQ(e.annual, 12 * 16000.0);
}

TEST(Estimate, MatchesSlotTallyAndIsStageSymmetric) {
  const auto c = default_catalog();
  const StageIndexer idx(c, DevMode::yes_dev);
  const ProductionEstimator est(c);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto& st = idx.state(uniform_index(rng, idx.size()));
    const auto e = est.estimate(1, st);
    double sum = 0.0;
    for (double m : e.monthly) sum += m;
    EXPECT_DOUBLE_EQ(e.annual, sum);
    EXPECT_NEAR(e.annual, tally_annual(c, st), 1e-6);
    EXPECT_EQ(est.estimate(3, st).annual, e.annual);
  }
}

TEST(ReduceSpace, UnreducedSizes) {
  const auto c = default_catalog();
  EXPECT_EQ(reduce_space(c, 1.0, DevMode::yes_dev).total_size(), 177978515625ULL);
  EXPECT_EQ(reduce_space(c, 1.0, DevMode::no_dev).total_size(), 11390625ULL);
  EXPECT_FALSE(reduce_space(c, 1.0, DevMode::no_dev).reduced);
}

TEST(ReduceSpace, EqualsBruteForceFilter) {
  const auto c = default_catalog();
  for (auto mode : {DevMode::no_dev, DevMode::yes_dev}) {
    const StageIndexer idx(c, mode);
    for (double eps : {0.015, 0.02, 0.025, 0.05}) {
      const auto r = reduce_space(c, idx, eps);
      std::vector<std::size_t> expected;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double ratio = tally_annual(c, idx.state(i)) / 360000.0;
        if (ratio >= 1.0 - eps - 1e-12 && ratio <= 1.0 + eps + 1e-12) expected.push_back(i);
      }
      for (int k = 0; k < kStages; ++k) {
        EXPECT_EQ(r.stages[k].indexer_index, expected) << r.label() << " stage " << k + 1;
        EXPECT_TRUE(std::is_sorted(r.stages[k].indexer_index.begin(), r.stages[k].indexer_index.end()));
      }
    }
  }
}

TEST(ReduceSpace, ToyCatalogHandFilter) {
  const auto c = two_shift_catalog();
  // annual estimates: 40h shop ~ 104k, 168h shop ~ 438k; target 360000
  const auto r = reduce_space(c, 0.5, DevMode::no_dev);
  const StageIndexer idx(c, DevMode::no_dev);
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double p = tally_annual(c, idx.state(i));
    if (p >= 0.5 * 360000 && p <= 1.5 * 360000) expected.push_back(i);
  }
  ASSERT_FALSE(expected.empty());
  EXPECT_EQ(r.stages[0].indexer_index, expected);
}

TEST(ReduceSpace, InfeasibleMarginIsAnError) {
  const auto c = two_shift_catalog();
  EXPECT_THROW(reduce_space(c, 0.001, DevMode::no_dev), InfeasibleMarginError);
  EXPECT_THROW(reduce_space(c, 0.0, DevMode::no_dev), std::invalid_argument);
}

TEST(ReduceSpace, ConfigTripleRoundTrip) {
  const auto c = default_catalog();
  const auto r = reduce_space(c, 0.025, DevMode::yes_dev);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Triple t{uniform_index(rng, r.stages[0].size()), uniform_index(rng, r.stages[1].size()),
             uniform_index(rng, r.stages[2].size())};
    EXPECT_EQ(r.triple_of(r.config_of(t)), t);
  }
  EXPECT_EQ(r.label(), "2.5%-yesDev");
}

TEST(ReduceSpace, JsonRoundTrip) {
  const auto c = default_catalog();
  const auto r = reduce_space(c, 0.02, DevMode::no_dev);
  const auto back = space_from_json(space_to_json(r));
  EXPECT_EQ(back.total_size(), r.total_size());
  for (int k = 0; k < kStages; ++k) {
    EXPECT_EQ(back.stages[k].indexer_index, r.stages[k].indexer_index);
    EXPECT_EQ(back.stages[k].states, r.stages[k].states);
    EXPECT_EQ(back.stages[k].annual_estimate, r.stages[k].annual_estimate);
  }
  const auto doc = space_to_json(r);
  EXPECT_EQ(doc.at("total_size").get<std::uint64_t>(), r.total_size());
  const std::string path = testing::TempDir() + "space_roundtrip.json";
  save_space(r, path);
  EXPECT_EQ(load_space(path).total_size(), r.total_size());
  std::remove(path.c_str());
}

TEST(FreeStageBound, SimulatedProductionNeverExceedsEstimate) {
  const auto c = default_catalog();
  const ProductionEstimator est(c);
  for (auto mode : {DevMode::no_dev, DevMode::yes_dev}) {
    const TwelveBodySpace space(c, mode);
    Rng rng(mode == DevMode::no_dev ? 1 : 2);
    for (int i = 0; i < 200; ++i) {
      const auto config = random_config(space, rng);
      double bound = 1e300;
      for (int k = 0; k < kStages; ++k) {
        bound = std::min(bound, est.estimate(k + 1, {config.shops[2 * k], config.shops[2 * k + 1]}).annual);
      }
      EXPECT_LE(static_cast<double>(simulate(c, config).annual_production()), bound) << config.to_string();
    }
  }
}

TEST(Pgco, SingleRootSingleBranchEvaluatesOneTriple) {
  const auto c = default_catalog();
  const auto r = reduce_space(c, 0.02, DevMode::no_dev);
  int calls = 0;
  const auto res = pgco_search(r, 1, 1, [&](const LineConfig& x) {
    ++calls;
    return evaluate(c, x);
  });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(res.explored, 1u);
  const auto order = order_by_closeness(r.stages[0], r.annual_target);
  EXPECT_EQ(res.best_triple[0], order[0]);
}

TEST(Pgco, FullForestEqualsExhaustiveSearch) {
  const auto c = default_catalog();
  const auto r = reduce_space(c, 0.015, DevMode::no_dev);
  CostCache cache(c);
  auto eval = [&](const LineConfig& x) {
    CostValue v;
    v.total = cache(x);
    return v;
  };
  const auto res = pgco_search(r, r.stages[0].size(), std::max(r.stages[1].size(), r.stages[2].size()), eval);
  EXPECT_EQ(res.explored, r.total_size());
  const auto bf = brute_force(ThreeBodySpace(r), eval);
  EXPECT_EQ(res.cost.total, bf.cost.total);
}

TEST(Pgco, ModerateForestContainsGlobalOptimumOnSmallSpace) {
  const auto c = default_catalog();
  const auto r = reduce_space(c, 0.015, DevMode::no_dev);
  CostCache cache(c);
  auto eval = [&](const LineConfig& x) {
    CostValue v;
    v.total = cache(x);
    return v;
  };
  const auto bf = brute_force(ThreeBodySpace(r), eval);
  const auto res = pgco_search(r, 5, 5, eval);
  EXPECT_EQ(res.explored, 125u);
  EXPECT_EQ(res.cost.total, bf.cost.total);
}

TEST(OrderByCloseness, TiesKeepIndexOrder) {
  StageOptions o;
  o.annual_estimate = {5.0, 5.0, 5.0, 5.0};
  o.states.resize(4);
  o.indexer_index = {0, 1, 2, 3};
  const auto order = order_by_closeness(o, 1.0);
  EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2, 3}));
  o.annual_estimate = {9.0, 1.0, 4.0, 6.0};
  EXPECT_EQ(order_by_closeness(o, 5.0), (std::vector<std::size_t>{2, 3, 0, 1}));
}
