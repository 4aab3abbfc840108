#include <gtest/gtest.h>

#include "sre/costs.hpp"

using namespace sre;

TEST(Costs, ReferenceRis) {
  const CostParams p;
  EXPECT_EQ(ris_cost(100 * 100, p), 1.0);
  EXPECT_EQ(ris_cost(0, p), 0.4);
  EXPECT_DOUBLE_EQ(ris_cost(150 * 150, p), 1.75);
  EXPECT_THROW(ris_cost(-1, p), std::invalid_argument);
}

TEST(Costs, ReferenceNcr) {
  const CostParams p;
  EXPECT_EQ(ncr_cost(55.0, p), 3.0);
  EXPECT_EQ(ncr_cost(0.0, p), 0.8);
  EXPECT_DOUBLE_EQ(ncr_cost(38.0, p), 2.32);
  EXPECT_THROW(ncr_cost(-1.0, p), std::invalid_argument);
}

TEST(Costs, PriceRatio) {
  const CostParams p;
  EXPECT_EQ(ncr_cost(55.0, p) / ris_cost(10000, p), 3.0);
}

TEST(Costs, AffineAndMonotone) {
  const CostParams p;
  for (long m = 0; m < 40000; m += 997) {
    EXPECT_LE(ris_cost(m, p), ris_cost(m + 1, p));
    EXPECT_NEAR(ris_cost(m + 500, p) - ris_cost(m, p), 500 * p.ris_per_atom, 1e-12);
  }
  for (double g = 0; g < 90; g += 1.5) EXPECT_LE(ncr_cost(g, p), ncr_cost(g + 0.5, p));
}

TEST(Costs, RejectsNegativeParams) {
  CostParams p;
  p.ris_per_atom = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.ncr_price_ratio = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Catalog, OrderAndLabels) {
  const auto cat = build_catalog({50, 100}, {38, 55}, CostParams{});
  ASSERT_EQ(cat.size(), 4u);
  EXPECT_EQ(cat[0].label(), "RIS-50x50");
  EXPECT_EQ(cat[1].label(), "RIS-100x100");
  EXPECT_EQ(cat[2].label(), "NCR-38dB");
  EXPECT_EQ(cat[3].label(), "NCR-55dB");
  EXPECT_EQ(cat[1].cost, 1.0);
  EXPECT_EQ(cat[3].cost, 3.0);
  EXPECT_EQ(cat[0].elements(), 2500);
  EXPECT_TRUE(cat[2].is_ncr());
}

TEST(Catalog, PriceRatioOverride) {
  CostParams p;
  p.ncr_price_ratio = 1.5;
  const auto cat = build_catalog({100}, {55, 70}, p);
  EXPECT_EQ(cat[1].cost, 1.5);
  EXPECT_EQ(cat[2].cost, 1.5);
  EXPECT_THROW(build_catalog({0}, {}, CostParams{}), std::invalid_argument);
}
