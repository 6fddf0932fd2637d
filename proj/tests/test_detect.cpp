#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "blindrec/channel.hpp"
#include "blindrec/codebook.hpp"
#include "blindrec/detect.hpp"
#include "blindrec/rng.hpp"

using namespace blindrec;
using channel::RealMatrix;
using detect::DetectConfig;
using gf2::BitMatrix;

namespace {

RealMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  RealMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
  return m;
}

RealMatrix gaussian(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
  std::normal_distribution<double> d(1.0, sigma);
  RealMatrix m(rows, cols);
  for (auto& v : m.data()) v = d(rng);
  return m;
}

}  // namespace

TEST(DetectErrors, ThresholdIsInclusivePerSegment) {
  const auto y = from_rows({{0.05, 0.06, 0.28, 0.29}, {-0.05, 1.0, -0.28, -0.3}});
  const auto mask = detect::detect_errors(y, DetectConfig{.t1 = 0.05, .t2 = 0.28}, 2).mask;
  EXPECT_EQ(mask, BitMatrix::from_strings({"1010", "1010"}));
  // A magnitude of 0.1 is flagged in the parity part but not in the message part.
  const auto y2 = from_rows({{0.1, 0.1}});
  EXPECT_EQ(detect::detect_errors(y2, DetectConfig{.t1 = 0.05, .t2 = 0.28}, 1).mask, BitMatrix::from_strings({"01"}));
}

TEST(DetectErrors, RejectsBadConfig) {
  const auto y = from_rows({{1.0, 1.0, 1.0}});
  EXPECT_THROW(detect::detect_errors(y, DetectConfig{.t1 = -1.0}, 1), std::invalid_argument);
  EXPECT_THROW(detect::detect_errors(y, DetectConfig{}, 0), std::invalid_argument);
  EXPECT_THROW(detect::detect_errors(y, DetectConfig{}, 3), std::invalid_argument);
  EXPECT_THROW(detect::detect_errors(y, DetectConfig{.target_clean = 1}, 2), std::invalid_argument);
}

TEST(DetectErrors, MaskGrowsWithThresholds) {
  Rng rng(3);
  const auto y = gaussian(200, 40, 0.7, rng);
  std::size_t prev = 0;
  for (double t : {0.0, 0.05, 0.1, 0.3, 0.6, 1.0}) {
    const auto cfg = DetectConfig{.t1 = t, .t2 = t};
    std::size_t flagged = 0;
    const auto mask = detect::detect_errors(y, cfg, 20).mask;
    for (std::size_t i = 0; i < mask.rows(); ++i) flagged += mask.row_vector(i).weight();
    EXPECT_GE(flagged, prev);
    prev = flagged;
    EXPECT_EQ(detect::count_clean(y, cfg, 20), detect::select_clean(BitMatrix(200, 40), detect::detect_errors(y, cfg, 20)).indexes.size());
  }
}

TEST(DetectErrors, FlagRateMatchesGaussianProbability) {
  Rng rng(5);
  const double sigma = std::sqrt(0.5);
  const auto y = gaussian(2000, 100, sigma, rng);
  const double t = 0.28;
  const auto mask = detect::detect_errors(y, DetectConfig{.t1 = t, .t2 = t}, 50).mask;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < mask.rows(); ++i) flagged += mask.row_vector(i).weight();
  // P(|Y| <= t) for Y ~ N(1, sigma^2).
  auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - 1.0) / (sigma * std::sqrt(2.0))); };
  const double p = cdf(t) - cdf(-t);
  const double cells = 2e5;
  EXPECT_NEAR(static_cast<double>(flagged), cells * p, 4 * std::sqrt(cells * p * (1 - p)));
}

TEST(SelectClean, KeepsUnflaggedRowsInOrder) {
  const auto x = BitMatrix::from_strings({"100", "010", "001", "111"});
  const detect::ErrorMask mask{BitMatrix::from_strings({"000", "010", "000", "001"})};
  const auto sel = detect::select_clean(x, mask);
  EXPECT_EQ(sel.indexes, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(sel.rows, BitMatrix::from_strings({"100", "001"}));
  EXPECT_THROW(detect::select_clean(x, detect::ErrorMask{BitMatrix(3, 3)}), std::invalid_argument);
}

TEST(SelectClean, NothingSelectedWhenEveryRowFlagged) {
  const detect::ErrorMask mask{BitMatrix::from_strings({"100", "001"})};
  const auto sel = detect::select_clean(BitMatrix(2, 3), mask);
  EXPECT_TRUE(sel.indexes.empty());
  EXPECT_EQ(sel.rows.rows(), 0u);
}

TEST(SelectClean, CleanRowsHaveFewerBitErrors) {
  const auto code = codebook::load_fixture(std::string(BLINDREC_FIXTURE_DIR) + "/wifi_648_r12.alist");
  Rng rng(7);
  const auto cw = codebook::encode(BitMatrix::random(3000, code.k, rng), code);
  const auto soft = channel::transmit(cw, channel::ChannelModel(0.1), 11);
  const auto hard = channel::hard_decision(soft);
  const auto mask = detect::detect_errors(soft, DetectConfig{.t1 = 0.05, .t2 = 0.28}, code.k);
  const auto sel = detect::select_clean(hard, mask);
  ASSERT_GT(sel.indexes.size(), 10u);
  auto errors_in = [&](const std::vector<std::size_t>& rows) {
    std::size_t e = 0;
    for (auto i : rows) {
      auto r = hard.row_vector(i);
      r ^= cw.row_vector(i);
      e += r.weight();
    }
    return static_cast<double>(e) / static_cast<double>(rows.size() * code.n);
  };
  std::vector<std::size_t> all(hard.rows());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_LT(errors_in(sel.indexes), errors_in(all));
}

TEST(Target, DefaultRule) {
  EXPECT_EQ(DetectConfig{}.resolved_target(50), 70u);
  EXPECT_EQ(DetectConfig{}.resolved_target(324), 324u + 33u);
  EXPECT_EQ(DetectConfig{.target_clean = 99}.resolved_target(50), 99u);
}

TEST(AdaptT1, UnchangedWhenAlreadyOnTarget) {
  Rng rng(13);
  const auto y = gaussian(300, 30, 0.5, rng);
  DetectConfig cfg{.t1 = 0.2, .t2 = 0.1};
  cfg.target_clean = detect::count_clean(y, cfg, 10);
  ASSERT_GE(cfg.target_clean, 10u);
  const auto res = detect::adapt_t1(y, cfg, 10);
  EXPECT_EQ(res.config.t1, 0.2);
  EXPECT_EQ(res.clean_count, cfg.target_clean);
  EXPECT_TRUE(res.feasible);
}

TEST(AdaptT1, InfeasibleTargetReportsZeroThreshold) {
  Rng rng(17);
  const auto y = gaussian(40, 30, 0.5, rng);
  const auto res = detect::adapt_t1(y, DetectConfig{.t1 = 0.3, .t2 = 0.0, .target_clean = 41}, 10);
  EXPECT_FALSE(res.feasible);
  EXPECT_EQ(res.config.t1, 0.0);
  EXPECT_EQ(res.clean_count, 40u);
}

TEST(AdaptT1, FindsLargestThresholdMeetingTarget) {
  Rng rng(19);
  for (double sigma : {0.3, 0.5, 0.8}) {
    const auto y = gaussian(1000, 60, sigma, rng);
    const DetectConfig cfg{.t1 = 0.05, .t2 = 0.05, .target_clean = 200};
    const auto res = detect::adapt_t1(y, cfg, 20);
    ASSERT_TRUE(res.feasible);
    EXPECT_GE(res.clean_count, 200u);
    EXPECT_EQ(res.clean_count, detect::count_clean(y, res.config, 20));
    // Continuous data: ties are absent, so the count lands on the target.
    EXPECT_EQ(res.clean_count, 200u);
    auto above = res.config;
    above.t1 = res.config.t1 * (1 + 1e-6) + 1e-9;
    EXPECT_LT(detect::count_clean(y, above, 20), 200u);
    EXPECT_EQ(res.config.t2, 0.05);
  }
}

TEST(AdaptT1, ScaledConfigSelectsSameRowsOnScaledValues) {
  Rng rng(23);
  const auto y = gaussian(200, 30, 0.6, rng);
  RealMatrix llr = y;
  for (auto& v : llr.data()) v *= 4.0;
  const DetectConfig cfg{.t1 = 0.1, .t2 = 0.3};
  EXPECT_EQ(detect::detect_errors(y, cfg, 10).mask, detect::detect_errors(llr, cfg.scaled(4.0), 10).mask);
}
