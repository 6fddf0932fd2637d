#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "blindrec/channel.hpp"
#include "blindrec/codebook.hpp"
#include "blindrec/recovery.hpp"
#include "blindrec/rng.hpp"
#include "hp_oracle.hpp"
#include "oracle.hpp"

using namespace blindrec;
using gf2::BitMatrix;
using gf2::BitVector;
using recovery::DualWordTable;
using recovery::GevConfig;

namespace {

const std::string kFixtures = BLINDREC_FIXTURE_DIR;

BitMatrix codewords(const codebook::CodeSpec& code, std::size_t m, Rng& rng) {
  return codebook::encode(BitMatrix::random(m, code.k, rng), code);
}

BitMatrix flip(BitMatrix x, double pe, Rng& rng) {
  std::bernoulli_distribution b(pe);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (b(rng)) x.flip(i, j);
  return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Formulas, ThresholdMatchesHighPrecision) {
  for (std::size_t m : {50u, 200u, 2000u, 10000u})
    for (double pe : {0.0, 1e-4, 1e-3, 0.01, 0.0786, 0.2, 0.49})
      for (std::size_t w : {1u, 3u, 10u, 51u, 200u}) {
        const double ref = static_cast<double>(hp::threshold(m, pe, w));
        EXPECT_LT(rel(recovery::threshold_T(m, pe, w), ref), 1e-9) << m << " " << pe << " " << w;
      }
}

TEST(Formulas, SampleBoundMatchesHighPrecision) {
  for (double pe : {1e-4, 1e-3, 2e-3, 0.01, 0.05})
    for (std::size_t w : {1u, 5u, 20u, 51u}) {
      const auto ref = hp::sample_bound(pe, w);
      const auto expect = static_cast<std::size_t>(boost::multiprecision::floor(ref)) + 1;
      EXPECT_EQ(recovery::sample_bound_M(pe, w), expect) << pe << " " << w;
      EXPECT_GT(static_cast<double>(recovery::sample_bound_M(pe, w)), static_cast<double>(ref));
    }
}

TEST(Formulas, LogReliabilityMatchesHighPrecision) {
  for (std::size_t m : {100u, 2000u})
    for (double pe : {1e-3, 0.05, 0.3})
      for (std::size_t w : {2u, 30u})
        for (std::size_t d : {0u, 1u, 17u, 50u}) {
          const double ref = static_cast<double>(hp::log_reliability(m, pe, w, d));
          EXPECT_LT(rel(recovery::log_reliability(m, pe, w, d), ref), 1e-9) << m << " " << pe << " " << w << " " << d;
        }
}

TEST(Formulas, NoiselessAnchors) {
  // pe = 0 gives x = 1, so T = M/4 - 3 sqrt(M)/4.
  EXPECT_DOUBLE_EQ(recovery::threshold_T(400, 0.0, 7), 85.0);
  EXPECT_DOUBLE_EQ(recovery::threshold_T(100, 0.0, 1), 25.0 - 7.5);
  EXPECT_EQ(recovery::sample_bound_M(0.0, 10), 10u);  // 3^2 = 9, strictly above
  EXPECT_EQ(recovery::log_reliability(50, 0.0, 4, 0), 0.0);
  EXPECT_EQ(recovery::log_reliability(50, 0.0, 4, 1), -std::numeric_limits<double>::infinity());
}

TEST(Formulas, HalfCrossoverGivesHalfM) {
  EXPECT_NEAR(recovery::threshold_T(2000, 0.5, 12), 1000.0, 1e-9);
  EXPECT_THROW(recovery::sample_bound_M(0.5, 3), std::invalid_argument);
  EXPECT_THROW(recovery::sample_bound_M(0.01, 0), std::invalid_argument);
  EXPECT_THROW(recovery::sample_bound_M(-0.1, 2), std::invalid_argument);
  EXPECT_THROW(recovery::sample_bound_M(0.49, 5000), std::overflow_error);
}

TEST(Formulas, ThresholdDecreasesWithReliability) {
  double prev = -1;
  for (std::size_t w = 1; w < 200; w += 7) {
    const double t = recovery::threshold_T(1000, 0.01, w);
    EXPECT_GT(t, prev);
    EXPECT_LE(t, 500.0);
    prev = t;
  }
}

TEST(Formulas, LogReliabilityDecreasesInSyndromeWeight) {
  for (std::size_t d = 1; d <= 100; ++d)
    EXPECT_LT(recovery::log_reliability(100, 0.01, 10, d), recovery::log_reliability(100, 0.01, 10, d - 1));
  EXPECT_THROW(recovery::log_reliability(10, 0.01, 3, 11), std::invalid_argument);
}

TEST(Syndromes, CounterAgreesWithRowwiseCount) {
  Rng rng(41);
  const auto x = BitMatrix::random(300, 130, rng);
  recovery::SyndromeCounter counter(x);
  EXPECT_EQ(counter.rows(), 300u);
  for (int t = 0; t < 50; ++t) {
    const auto h = BitMatrix::random(1, 130, rng).row_vector(0);
    EXPECT_EQ(counter.weight(h), recovery::syndrome_weight(h, x));
  }
  EXPECT_EQ(counter.weight(BitVector(130)), 0u);
}

TEST(Candidates, NoiselessCandidatesAreDualWords) {
  Rng rng(43);
  const auto code = codebook::load_fixture(kFixtures + "/bch_15_7.cyclic");
  const auto x = codewords(code, 40, rng);
  const auto set = recovery::candidates_from_pivots(x, code.k);
  ASSERT_TRUE(set.has_value());
  EXPECT_EQ(set->words.rows(), code.n - code.k);
  EXPECT_EQ(gf2::rank_of(set->words), code.n - code.k);
  for (std::size_t j = 0; j < set->words.rows(); ++j) {
    EXPECT_TRUE(codebook::is_dual_word(set->words.row_vector(j), code));
    EXPECT_EQ(recovery::syndrome_weight(set->words.row_vector(j), x), 0u);
    for (std::size_t c = code.k; c < code.n; ++c) EXPECT_EQ(set->words.get(j, c), c == code.k + j);
  }
}

TEST(Candidates, RankDeficientLeadingBlock) {
  const auto code = codebook::make_cyclic(7, "1101");
  Rng rng(47);
  EXPECT_FALSE(recovery::candidates_from_pivots(codewords(code, 3, rng), code.k).has_value());
  EXPECT_FALSE(recovery::candidates_from_pivots(BitMatrix(20, 7), code.k).has_value());
  EXPECT_THROW(recovery::candidates_from_pivots(BitMatrix(20, 7), 7), std::invalid_argument);
}

TEST(Table, KeepsDescendingReliability) {
  DualWordTable table(6, 3);
  EXPECT_EQ(table.offer({BitVector::unit(6, 0), -5.0, 1, 0}), DualWordTable::Offer::inserted);
  EXPECT_EQ(table.offer({BitVector::unit(6, 1), -1.0, 1, 0}), DualWordTable::Offer::inserted);
  EXPECT_EQ(table.offer({BitVector::unit(6, 2), -3.0, 1, 0}), DualWordTable::Offer::inserted);
  ASSERT_TRUE(table.full());
  std::vector<double> lr;
  for (const auto& e : table.entries()) lr.push_back(e.log_reliability);
  EXPECT_EQ(lr, (std::vector<double>{-1.0, -3.0, -5.0}));
}

TEST(Table, RejectsDependentWords) {
  DualWordTable table(4, 3);
  table.offer({BitVector::from_string("1100"), -1, 2, 0});
  table.offer({BitVector::from_string("0110"), -1, 2, 0});
  EXPECT_EQ(table.offer({BitVector::from_string("1010"), -0.5, 2, 0}), DualWordTable::Offer::dependent);
  EXPECT_EQ(table.offer({BitVector(4), 0.0, 0, 0}), DualWordTable::Offer::dependent);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_THROW(table.offer({BitVector(5), 0, 0, 0}), std::invalid_argument);
}

TEST(Table, EvictsWeakestOnlyForBetterIndependentWord) {
  DualWordTable table(4, 2);
  table.offer({BitVector::from_string("1000"), -1.0, 1, 0});
  table.offer({BitVector::from_string("0100"), -4.0, 1, 0});
  EXPECT_EQ(table.offer({BitVector::from_string("0010"), -9.0, 1, 0}), DualWordTable::Offer::not_better);
  // Depends on the strongest entry alone, so it cannot replace the weakest.
  EXPECT_EQ(table.offer({BitVector::from_string("1000"), -0.5, 1, 0}), DualWordTable::Offer::dependent);
  // Depends on both entries together: replacing the weakest keeps the rank.
  EXPECT_EQ(table.offer({BitVector::from_string("1100"), -2.0, 2, 0}), DualWordTable::Offer::replaced);
  EXPECT_EQ(table.entries().back().word.to_string(), "1100");
  EXPECT_EQ(gf2::rank_of(table.as_matrix()), 2u);
}

TEST(Table, RandomOffersStayIndependentAndSorted) {
  Rng rng(53);
  DualWordTable table(20, 8);
  std::normal_distribution<double> lr(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    table.offer({BitMatrix::random(1, 20, rng).row_vector(0), lr(rng), 0, 0});
    ASSERT_EQ(gf2::rank_of(table.size() ? table.as_matrix() : BitMatrix(1, 20)), table.size());
    for (std::size_t i = 1; i < table.size(); ++i)
      ASSERT_GE(table.entries()[i - 1].log_reliability, table.entries()[i].log_reliability);
  }
  EXPECT_TRUE(table.full());
}

TEST(Gev, HammingRowSpaceEqualsDualSpace) {
  const auto code = codebook::load_fixture(kFixtures + "/hamming_7_4.cyclic");
  Rng rng(59);
  const auto x = codewords(code, 30, rng);
  GevConfig cfg{.n = 7, .k = 4, .n_ge = 1, .sigma2 = 0.01};
  const auto rep = recovery::gev_recover(x, cfg, rng);
  ASSERT_TRUE(rep.success);
  std::vector<std::uint64_t> rows;
  for (std::size_t i = 0; i < rep.recovered_h.rows(); ++i) rows.push_back(oracle::to_mask(rep.recovered_h.row_vector(i)));
  EXPECT_EQ(oracle::span(rows), oracle::dual_space(oracle::unpack(code.generator), 7));
}

TEST(Gev, NoiselessCyclicHundredFiftyRecoversEveryTrial) {
  const auto code = codebook::load_fixture(kFixtures + "/cyclic_100_50.cyclic");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto x = codewords(code, 200, rng);
    GevConfig cfg{.n = 100, .k = 50, .n_ge = 1, .sigma2 = 1.0, .m_rows = 200, .assumed_pe = 0.0};
    const auto rep = recovery::gev_recover(x, cfg, rng);
    ASSERT_TRUE(rep.success) << rep.reason;
    EXPECT_FALSE(rep.start_failure);
    EXPECT_EQ(rep.recovered_h.rows(), 50u);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_TRUE(codebook::is_dual_word(rep.recovered_h.row_vector(i), code));
  }
}

TEST(Gev, RoundsNeverShrinkTable) {
  const auto code = codebook::load_fixture(kFixtures + "/cyclic_100_50.cyclic");
  Rng rng(61);
  const auto x = flip(codewords(code, 2000, rng), 3e-3, rng);
  GevConfig cfg{.n = 100, .k = 50, .n_ge = 10, .sigma2 = channel::sigma2_for_crossover(3e-3)};
  const auto rep = recovery::gev_recover(x, cfg, rng);
  ASSERT_EQ(rep.per_round.size(), 10u);
  for (std::size_t r = 1; r < rep.per_round.size(); ++r) EXPECT_GE(rep.per_round[r].table_size, rep.per_round[r - 1].table_size);
  for (std::size_t i = 0; i < rep.recovered_h.rows(); ++i) EXPECT_TRUE(codebook::is_dual_word(rep.recovered_h.row_vector(i), code));
}

TEST(Gev, RefreshKeepsFullRankBlock) {
  Rng rng(67);
  const auto code = codebook::load_fixture(kFixtures + "/bch_15_7.cyclic");
  const auto x1t = codewords(code, 60, rng).column_range(0, code.k).transpose();
  auto st = gf2::gjetp_reduce(x1t);
  ASSERT_EQ(st.rank(), code.k);
  for (int r = 0; r < 50; ++r) {
    recovery::detail::refresh_pivots(st, rng);
    ASSERT_EQ(gf2::mat_mul(st.transition, x1t), st.echelon);
    const auto inv = oracle::inverse(oracle::select_columns(oracle::unpack(x1t), st.pivot_cols));
    ASSERT_TRUE(inv.has_value());
    ASSERT_EQ(oracle::unpack(st.transition), *inv);
  }
}

TEST(Gev, TooFewRowsIsStartFailure) {
  const auto code = codebook::make_cyclic(7, "1101");
  Rng rng(71);
  GevConfig cfg{.n = 7, .k = 4};
  const auto rep = recovery::gev_recover(BitMatrix(10, 7), cfg, rng);
  EXPECT_TRUE(rep.start_failure);
  EXPECT_FALSE(rep.success);
  EXPECT_EQ(rep.recovered_h.rows(), 0u);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(Gev, PureNoiseYieldsNoTable) {
  Rng rng(73);
  const auto x = BitMatrix::random(500, 100, rng);
  GevConfig cfg{.n = 100, .k = 50, .n_ge = 3, .sigma2 = channel::sigma2_for_crossover(0.01)};
  const auto rep = recovery::gev_recover(x, cfg, rng);
  EXPECT_FALSE(rep.success);
  EXPECT_EQ(rep.recovered_h.rows(), 0u);
  EXPECT_EQ(rep.reason, "dual word table incomplete");
}

TEST(Gev, VerificationUsesEveryObservation) {
  Rng rng(61);
  const auto code = codebook::load_fixture(kFixtures + "/cyclic_100_50.cyclic");
  const auto clean = codewords(code, 1000, rng);
  std::vector<std::size_t> first(56);
  std::iota(first.begin(), first.end(), 0);
  const BitMatrix clean_subset = clean.select_rows(first);
  BitMatrix noisy_subset = clean_subset;
  for (std::size_t i = 0; i < noisy_subset.rows(); i += 4) noisy_subset.flip(i, i % 50);
  const GevConfig cfg{.n = 100, .k = 50, .n_ge = 1, .sigma2 = 1.0, .assumed_pe = 1e-3};

  // The pivot rows satisfy every candidate, so the subset alone cannot reject them.
  DualWordTable own(100, 50);
  (void)recovery::gev_rounds(noisy_subset, cfg, own, rng);
  std::size_t false_words = 0;
  for (const auto& e : own.entries()) false_words += !codebook::is_dual_word(e.word, code);
  EXPECT_GT(false_words, 0u);

  DualWordTable full(100, 50);
  (void)recovery::gev_rounds(noisy_subset, clean, cfg, full, rng);
  for (const auto& e : full.entries()) EXPECT_TRUE(codebook::is_dual_word(e.word, code));
  EXPECT_LT(full.size(), 50u);

  DualWordTable good(100, 50);
  (void)recovery::gev_rounds(clean_subset, clean, cfg, good, rng);
  EXPECT_TRUE(good.full());
  EXPECT_THROW((void)recovery::gev_rounds(clean_subset, clean.column_range(0, 99), cfg, good, rng), std::invalid_argument);
}

TEST(Gev, ConfigValidation) {
  Rng rng(79);
  EXPECT_THROW(recovery::gev_recover(BitMatrix(10, 7), GevConfig{.n = 8, .k = 4}, rng), std::invalid_argument);
  EXPECT_THROW(recovery::gev_recover(BitMatrix(10, 7), GevConfig{.n = 7, .k = 7}, rng), std::invalid_argument);
  EXPECT_THROW(recovery::gev_recover(BitMatrix(10, 7), GevConfig{.n = 7, .k = 4, .n_ge = 0}, rng), std::invalid_argument);
  EXPECT_THROW(recovery::gev_recover(BitMatrix(10, 7), GevConfig{.n = 7, .k = 4, .m_rows = 11}, rng), std::invalid_argument);
}

TEST(Gev, SameSeedSameTable) {
  const auto code = codebook::load_fixture(kFixtures + "/cyclic_100_50.cyclic");
  Rng data(83);
  const auto x = flip(codewords(code, 1000, data), 2e-3, data);
  GevConfig cfg{.n = 100, .k = 50, .n_ge = 5, .sigma2 = channel::sigma2_for_crossover(2e-3)};
  Rng a(5), b(5);
  EXPECT_EQ(recovery::gev_recover(x, cfg, a).recovered_h, recovery::gev_recover(x, cfg, b).recovered_h);
}
