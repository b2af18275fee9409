#include <gtest/gtest.h>

#include "eipw/verify.hpp"
#include "support.hpp"

using namespace eipw;
using eipw::testing::data_path;
using eipw::testing::load;
using eipw::testing::read_file;

namespace {

std::vector<ReferenceRow> rows() { return parse_reference_csv(read_file(data_path("reference_results.csv"))); }

}  // namespace

TEST(Calibration, WaterPricesFromCostColumns) {
  const EconomicParams e = load("eip1.json").economics;
  for (const auto& row : rows()) {
    const ImpliedEconomics k = back_calculate(row, e, 6);
    EXPECT_GE(k.freshwater_price, 0.49) << row.model;
    EXPECT_LE(k.freshwater_price, 0.53) << row.model;
    EXPECT_GE(k.discharge_price, 0.49) << row.model;
    EXPECT_LE(k.discharge_price, 0.53) << row.model;
  }
  const ImpliedEconomics anchor = back_calculate(rows()[0], e, 6);
  EXPECT_NEAR(anchor.freshwater_price, 0.507, 0.001);
}

TEST(Calibration, AnnualizationFromPipelineColumn) {
  const EconomicParams e = load("eip1.json").economics;
  const auto all = rows();
  const ImpliedEconomics anchor = back_calculate(all[0], e, 6);
  EXPECT_GE(anchor.annualization, 0.08);
  EXPECT_LE(anchor.annualization, 0.11);
  double mean = 0.0;
  for (const auto& row : all) mean += back_calculate(row, e, 6).annualization / static_cast<double>(all.size());
  EXPECT_GE(mean, 0.08);
  EXPECT_LE(mean, 0.11);
  // The shipped defaults sit next to the implied values.
  EXPECT_NEAR(annualization_factor(e.interest, e.economic_life), anchor.annualization, 0.005);
  EXPECT_NEAR(e.freshwater_price, anchor.freshwater_price, 0.01);
}

TEST(Calibration, RejectsDegenerateRows) {
  ReferenceRow row;
  EXPECT_THROW(back_calculate(row, EconomicParams{}, 6), std::invalid_argument);
}
