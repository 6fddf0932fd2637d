#pragma once

// Gaussian elimination with verification (GEV).
//
// Each elimination round inverts a k x k block of received message parts,
// turns the inverse into n-k candidate dual words h_j = (p_j^T, e_j), and
// keeps those whose syndrome weight over all observations stays under the
// detection threshold. Accepted words live in a reliability-ordered table of
// at most n-k linearly independent entries.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindrec/channel.hpp"
#include "blindrec/gf2.hpp"
#include "blindrec/rng.hpp"

namespace blindrec::recovery {

using gf2::BitMatrix;
using gf2::BitVector;

// ---------------------------------------------------------------------------
// Detection statistics

namespace detail {

/// (1 - 2 pe)^w and 1 - (1 - 2 pe)^w, the latter without cancellation.
struct Bias {
  double x;
  double one_minus_x;
};

inline Bias bias(double pe, std::size_t weight) {
  const double y = static_cast<double>(weight) * std::log1p(-2.0 * pe);
  return {std::exp(y), -std::expm1(y)};
}

inline void check_pe(double pe, const char* who) {
  if (!(pe >= 0.0 && pe < 0.5)) throw std::invalid_argument(std::string(who) + ": need 0 <= pe < 0.5");
}

}  // namespace detail

/// Smallest M strictly above (3 (sqrt(1 - x^2) + 1) / x)^2 with x = (1-2pe)^|h|,
/// the sample size that puts the threshold three deviations from both means.
inline std::size_t sample_bound_M(double pe, std::size_t weight) {
  detail::check_pe(pe, "sample_bound_M");
  if (weight == 0) throw std::invalid_argument("sample_bound_M: weight must be positive");
  const auto [x, omx] = detail::bias(pe, weight);
  const double one_minus_x2 = omx * (1.0 + x);
  const double root = 3.0 * (std::sqrt(one_minus_x2) + 1.0) / x;
  const double bound = root * root;
  if (!std::isfinite(bound) || bound >= static_cast<double>(std::numeric_limits<std::size_t>::max() / 2))
    throw std::overflow_error("sample_bound_M: bound too large");
  return static_cast<std::size_t>(std::floor(bound)) + 1;
}

/// Syndrome-weight threshold T_h separating dual words from random words.
inline double threshold_T(std::size_t m_rows, double pe, std::size_t weight) {
  if (!(pe >= 0.0 && pe <= 0.5)) throw std::invalid_argument("threshold_T: need 0 <= pe <= 0.5");
  const double m = static_cast<double>(m_rows);
  const auto [x, omx] = detail::bias(pe, weight);
  const double one_minus_x2 = omx * (1.0 + x);
  return 0.5 * m * (1.0 - 0.5 * x) + 0.75 * std::sqrt(m) * (std::sqrt(one_minus_x2) - 1.0);
}

/// Log of the probability that a word of weight |h| with syndrome weight d
/// is a true dual word:
///   (M-d) log((1 + x)/2) + d log((1 - x)/2).
/// Returns -infinity when the event is impossible (pe = 0, d > 0).
inline double log_reliability(std::size_t m_rows, double pe, std::size_t weight, std::size_t d) {
  detail::check_pe(pe, "log_reliability");
  if (d > m_rows) throw std::invalid_argument("log_reliability: syndrome weight exceeds row count");
  const auto [x, omx] = detail::bias(pe, weight);
  const double log_agree = std::log1p(x) - std::numbers::ln2;
  const double n_agree = static_cast<double>(m_rows - d);
  if (d == 0) return n_agree * log_agree;
  if (omx <= 0.0) return -std::numeric_limits<double>::infinity();
  return n_agree * log_agree + static_cast<double>(d) * (std::log(omx) - std::numbers::ln2);
}

// ---------------------------------------------------------------------------
// Syndromes

/// Hamming weight of h X^T, evaluated row by row.
inline std::size_t syndrome_weight(const BitVector& h, const BitMatrix& observations) {
  if (h.size() != observations.cols()) throw std::invalid_argument("syndrome_weight: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < observations.rows(); ++i) d += gf2::dot(observations.row(i), h.words()) ? 1 : 0;
  return d;
}

/// Batch syndrome weights: keeps X^T so each query costs |h| column XORs.
class SyndromeCounter {
 public:
  explicit SyndromeCounter(const BitMatrix& observations)
      : columns_(observations.transpose()), scratch_(columns_.stride(), 0) {}

  [[nodiscard]] std::size_t rows() const noexcept { return columns_.cols(); }

  std::size_t weight(const BitVector& h) {
    if (h.size() != columns_.rows()) throw std::invalid_argument("SyndromeCounter: length mismatch");
    std::fill(scratch_.begin(), scratch_.end(), gf2::Word{0});
    for (std::size_t j = h.next_set(0); j < h.size(); j = h.next_set(j + 1)) gf2::xor_into(scratch_, columns_.row(j));
    return gf2::popcount(scratch_);
  }

 private:
  BitMatrix columns_;
  std::vector<gf2::Word> scratch_;
};

// ---------------------------------------------------------------------------
// Candidate generation

/// Candidate dual words for a full-rank pivot state of X1^T (k x M).
/// Row j of the result is (p_j^T, e_j) with p_j = R1^{-1} r_{2,j} and
/// R1^{-1} = transition^T.
inline BitMatrix candidates_from_state(const BitMatrix& observations, std::size_t k, const gf2::PivotState& state) {
  const std::size_t n = observations.cols();
  if (state.rank() != k) throw std::invalid_argument("candidates_from_state: pivot state is not full rank");
  const BitMatrix r2t = observations.select_rows(state.pivot_cols).column_range(k, n - k).transpose();
  const BitMatrix pt = gf2::mat_mul(r2t, state.transition);  // (n-k) x k
  BitMatrix words(n - k, n);
  for (std::size_t j = 0; j < n - k; ++j) {
    const auto src = pt.row(j);
    auto dst = words.row(j);
    std::copy(src.begin(), src.end(), dst.begin());
    // k-bit prefix may spill into the tail word; re-mask then place e_j.
    if (k % gf2::kWordBits != 0) dst[k / gf2::kWordBits] &= gf2::tail_mask(k);
    words.set(j, k + j, true);
  }
  return words;
}

struct CandidateSet {
  BitMatrix words;          ///< (n-k) x n
  gf2::PivotState pivots;   ///< reduction of X1^T
};

/// Splits X into (X1, X2), reduces X1^T and forms the n-k candidates.
/// Returns nullopt when the first k columns have rank below k.
inline std::optional<CandidateSet> candidates_from_pivots(const BitMatrix& observations, std::size_t k) {
  if (k == 0 || k >= observations.cols()) throw std::invalid_argument("candidates_from_pivots: need 0 < k < n");
  if (observations.rows() < k) return std::nullopt;
  gf2::PivotState st = gf2::gjetp_reduce(observations.column_range(0, k).transpose());
  if (st.rank() < k) return std::nullopt;
  BitMatrix words = candidates_from_state(observations, k, st);
  return CandidateSet{std::move(words), std::move(st)};
}

// ---------------------------------------------------------------------------
// Dual word table

struct DualWordEntry {
  BitVector word;
  double log_reliability = 0.0;
  std::size_t weight = 0;
  std::size_t syndrome_weight = 0;
};

/// At most `capacity` linearly independent words, ordered by descending
/// log-reliability. When full, a better candidate displaces the weakest
/// entry only if it is independent of all the others.
class DualWordTable {
 public:
  enum class Offer { inserted, replaced, dependent, not_better };

  DualWordTable(std::size_t n, std::size_t capacity) : n_(n), capacity_(capacity), tracker_(n, capacity) {
    if (capacity == 0 || capacity > n) throw std::invalid_argument("DualWordTable: capacity must lie in [1, n]");
  }

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] bool full() const noexcept { return entries_.size() == capacity_; }
  [[nodiscard]] const std::vector<DualWordEntry>& entries() const noexcept { return entries_; }

  Offer offer(DualWordEntry e) {
    if (e.word.size() != n_) throw std::invalid_argument("DualWordTable: word length mismatch");
    if (!full()) {
      if (!tracker_.try_insert(e.word)) return Offer::dependent;
      insert_sorted(std::move(e));
      return Offer::inserted;
    }
    if (!(e.log_reliability > entries_.back().log_reliability)) return Offer::not_better;
    gf2::EchelonTracker rest(n_, capacity_);
    for (std::size_t i = 0; i + 1 < entries_.size(); ++i) rest.try_insert(entries_[i].word);
    if (!rest.try_insert(e.word)) return Offer::dependent;
    entries_.pop_back();
    insert_sorted(std::move(e));
    tracker_ = std::move(rest);
    return Offer::replaced;
  }

  [[nodiscard]] BitMatrix as_matrix() const {
    BitMatrix m(0, n_);
    for (const auto& e : entries_) m.push_row(e.word);
    return m;
  }

 private:
  void insert_sorted(DualWordEntry e) {
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), e.log_reliability,
                                [](double v, const DualWordEntry& x) { return v > x.log_reliability; });
    entries_.insert(pos, std::move(e));
  }

  std::size_t n_;
  std::size_t capacity_;
  gf2::EchelonTracker tracker_;
  std::vector<DualWordEntry> entries_;
};

// ---------------------------------------------------------------------------
// GEV

struct GevConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t n_ge = 1;
  double sigma2 = 1.0;
  /// Expected observation count; 0 accepts whatever is passed in.
  std::size_t m_rows = 0;
  /// Crossover probability used for verification instead of the one implied
  /// by sigma2 (models a mis-specified noise level).
  std::optional<double> assumed_pe{};

  [[nodiscard]] double pe() const { return assumed_pe ? *assumed_pe : channel::crossover_probability(sigma2); }

  void validate(const BitMatrix& observations) const {
    if (n_ge < 1) throw std::invalid_argument("GevConfig: n_ge must be at least 1");
    if (!(k > 0 && k < n)) throw std::invalid_argument("GevConfig: need 0 < k < n");
    if (observations.cols() != n) throw std::invalid_argument("GevConfig: observation length differs from n");
    if (m_rows != 0 && observations.rows() != m_rows) throw std::invalid_argument("GevConfig: observation count differs from m_rows");
  }
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t table_size = 0;
};

/// Table state after one outer iteration of a multi-stage scheme.
struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t table_size = 0;
  double elapsed_ms = 0.0;
  BitMatrix words;
  std::string note;
};

struct RecoveryReport {
  BitMatrix recovered_h;
  bool success = false;
  bool start_failure = false;
  std::size_t rounds_used = 0;
  std::vector<RoundRecord> per_round;
  std::vector<IterationRecord> iterations;
  std::string reason;
  double wall_ms = 0.0;
};

struct GevRunStats {
  bool rank_failure = false;
  std::size_t rounds = 0;
  std::size_t offered = 0;
  std::vector<RoundRecord> per_round;
};

namespace detail {

/// Walks every pivot slot once, swapping in a uniformly chosen column that
/// keeps the set independent. Slots with no such column are left alone.
inline void refresh_pivots(gf2::PivotState& st, Rng& rng) {
  const std::size_t slots = st.rank();
  for (std::size_t x = 0; x < slots; ++x) {
    const std::size_t out_col = st.pivot_cols[x];
    const auto row = st.echelon.row(x);
    const std::size_t options = gf2::popcount(row) - 1;
    if (options == 0) continue;
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, options - 1)(rng);
    std::size_t in_col = 0;
    for (std::size_t w = 0; w < row.size(); ++w) {
      gf2::Word bits = row[w];
      if (w == out_col / gf2::kWordBits) bits &= ~(gf2::Word{1} << (out_col % gf2::kWordBits));
      const auto c = static_cast<std::size_t>(std::popcount(bits));
      if (pick >= c) {
        pick -= c;
        continue;
      }
      for (; pick > 0; --pick) bits &= bits - 1;
      in_col = w * gf2::kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
      break;
    }
    gf2::replace_one_column_in_place(st, out_col, in_col);
  }
}

}  // namespace detail

/// Runs the GEV rounds, offering verified candidates to `table`. Candidates
/// come from `elimination` (the selected rows X_s); syndromes and thresholds
/// use every row of `verification` (X). Round 1 reduces X_s1^T from scratch;
/// each later round derives a new full-rank block through single-column
/// replacements.
inline GevRunStats gev_rounds(const BitMatrix& elimination, const BitMatrix& verification, const GevConfig& cfg,
                              DualWordTable& table, Rng& rng) {
  cfg.validate(verification);
  if (elimination.cols() != cfg.n) throw std::invalid_argument("GevConfig: observation length differs from n");
  GevRunStats stats;
  const std::size_t k = cfg.k;
  const std::size_t m = verification.rows();
  if (elimination.rows() < k) {
    stats.rank_failure = true;
    return stats;
  }
  gf2::PivotState st = gf2::gjetp_reduce(elimination.column_range(0, k).transpose());
  if (st.rank() < k) {
    stats.rank_failure = true;
    return stats;
  }
  const double pe = cfg.pe();
  SyndromeCounter syndromes(verification);
  for (std::size_t round = 1; round <= cfg.n_ge; ++round) {
    if (round > 1) detail::refresh_pivots(st, rng);
    const BitMatrix words = candidates_from_state(elimination, k, st);
    for (std::size_t j = 0; j < words.rows(); ++j) {
      BitVector h = words.row_vector(j);
      const std::size_t w = h.weight();
      const std::size_t d = syndromes.weight(h);
      if (static_cast<double>(d) > threshold_T(m, pe, w)) continue;
      ++stats.offered;
      table.offer({std::move(h), log_reliability(m, pe, w, d), w, d});
    }
    stats.per_round.push_back({round, table.size()});
    stats.rounds = round;
  }
  return stats;
}

inline GevRunStats gev_rounds(const BitMatrix& observations, const GevConfig& cfg, DualWordTable& table, Rng& rng) {
  return gev_rounds(observations, observations, cfg, table, rng);
}

inline RecoveryReport gev_recover(const BitMatrix& observations, const GevConfig& cfg, Rng& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  DualWordTable table(cfg.n, cfg.n - cfg.k);
  const GevRunStats stats = gev_rounds(observations, cfg, table, rng);
  RecoveryReport rep;
  rep.recovered_h = table.as_matrix();
  rep.success = table.full();
  rep.start_failure = stats.rank_failure;
  rep.rounds_used = stats.rounds;
  rep.per_round = stats.per_round;
  if (stats.rank_failure) {
    rep.reason = "no k x k full-rank block among the observations";
  } else if (!rep.success) {
    rep.reason = "dual word table incomplete";
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rep.iterations.push_back({1, table.size(), rep.wall_ms, rep.recovered_h, {}});
  return rep;
}

}  // namespace blindrec::recovery
