#pragma once

// Reference recovery algorithms used for comparison with GEV:
//   bfs_recover               exhaustive search over all 2^n words
//   canteaut_chabaud          information-set search on an n x n block
//   revised_canteaut_chabaud  same after peeling off the null space of X^T
//   yu_recover                low-weight words of a sampled systematic dual

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "blindrec/gf2.hpp"
#include "blindrec/recovery.hpp"
#include "blindrec/rng.hpp"

namespace blindrec::baselines {

using gf2::BitMatrix;
using gf2::BitVector;
using gf2::Word;

struct BaselineResult {
  /// Distinct candidate dual words in original coordinates.
  std::vector<BitVector> words;
  bool start_failure = false;
  std::string reason;
  std::size_t rounds = 0;
  double wall_ms = 0.0;
};

namespace detail {

class WordSet {
 public:
  explicit WordSet(std::size_t n) : n_(n) {}
  void add(const BitVector& v) {
    if (v.is_zero()) return;
    std::vector<Word> key(v.words().begin(), v.words().end());
    if (seen_.insert(key).second) words_.push_back(v);
  }
  void add_words(std::span<const Word> w) { add(BitVector(n_, w)); }
  std::vector<BitVector> take() { return std::move(words_); }

 private:
  std::size_t n_;
  std::set<std::vector<Word>> seen_;
  std::vector<BitVector> words_;
};

class Stopwatch {
 public:
  [[nodiscard]] double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute force

inline constexpr std::size_t kBfsMaxLength = 24;

/// Every nonzero h whose syndrome weight passes threshold_T(M, pe, |h|).
/// Words are visited in Gray-code order so each step costs one column XOR.
inline BaselineResult bfs_recover(const BitMatrix& observations, double pe) {
  const detail::Stopwatch clock;
  const std::size_t n = observations.cols();
  if (n > kBfsMaxLength)
    throw std::invalid_argument("bfs_recover: n = " + std::to_string(n) + " exceeds the brute-force guard of " +
                                std::to_string(kBfsMaxLength));
  if (!(pe >= 0.0 && pe <= 0.5)) throw std::invalid_argument("bfs_recover: need 0 <= pe <= 0.5");
  BaselineResult res;
  if (observations.rows() == 0) return res;
  const std::size_t m = observations.rows();
  const BitMatrix columns = observations.transpose();
  std::vector<double> limit(n + 1);
  for (std::size_t w = 0; w <= n; ++w) limit[w] = recovery::threshold_T(m, pe, w);

  std::vector<Word> syndrome(columns.stride(), 0);
  BitVector h(n);
  std::size_t weight = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto j = static_cast<std::size_t>(std::countr_zero(i));
    h.flip(j);
    weight = h.get(j) ? weight + 1 : weight - 1;
    gf2::xor_into(syndrome, columns.row(j));
    if (static_cast<double>(gf2::popcount(syndrome)) <= limit[weight]) res.words.push_back(h);
  }
  res.rounds = 1;
  res.wall_ms = clock.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Canteaut-Chabaud family

struct CcConfig {
  std::size_t n_ge = 1;
  std::size_t p = 1;
  std::size_t l = 20;
  /// Upper bound on window collisions examined per round.
  std::size_t max_collisions = 1'000'000;

  void validate() const {
    if (n_ge < 1) throw std::invalid_argument("CcConfig: n_ge must be at least 1");
    if (p != 1 && p != 2) throw std::invalid_argument("CcConfig: p must be 1 or 2");
    if (l < 1 || l > 64) throw std::invalid_argument("CcConfig: l must lie in [1, 64]");
  }
};

/// Weight threshold M/2 - sqrt(M n ln2 / 2) for the information-set search.
inline double cc_threshold(std::size_t m_rows, std::size_t n) {
  const double m = static_cast<double>(m_rows);
  return 0.5 * m - std::sqrt(m * static_cast<double>(n) * std::numbers::ln2 / 2.0);
}

namespace detail {

struct Subset {
  std::uint64_t key;
  std::uint32_t a;
  std::uint32_t b;  ///< equals `a` for singletons; kNone for the empty set
};

inline constexpr std::uint32_t kNone = 0xFFFFFFFFu;

inline std::vector<Subset> subsets(std::span<const std::size_t> rows, std::span<const std::uint64_t> keys, std::size_t p) {
  std::vector<Subset> out{{0, kNone, kNone}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto a = static_cast<std::uint32_t>(rows[i]);
    out.push_back({keys[a], a, a});
    if (p == 2)
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        const auto b = static_cast<std::uint32_t>(rows[j]);
        out.push_back({keys[a] ^ keys[b], a, b});
      }
  }
  return out;
}

inline void add_subset(BitVector& h, const Subset& s) {
  if (s.a == kNone) return;
  h.flip(s.a);
  if (s.b != s.a) h.flip(s.b);
}

/// One search round on a full-row-rank state `st` (r x M, pivot columns form
/// the identity). Finds row combinations with at most p rows from each half
/// of a random split that vanish on a random window of l non-pivot columns,
/// keeps those of weight below `threshold`, and maps them through
/// h' = h * transition * lift.
inline void stern_round(const gf2::PivotState& st, const BitMatrix& lift, double threshold, const CcConfig& cfg,
                        Rng& rng, WordSet& out) {
  const std::size_t r = st.rank();
  const std::size_t m = st.echelon.cols();
  std::vector<char> is_pivot(m, 0);
  for (auto c : st.pivot_cols) is_pivot[c] = 1;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < m; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  if (free_cols.empty() || r == 0) return;
  const std::size_t l = std::min(cfg.l, free_cols.size());
  for (std::size_t i = 0; i < l; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, free_cols.size() - 1)(rng);
    std::swap(free_cols[i], free_cols[j]);
  }
  std::vector<std::uint64_t> keys(r, 0);
  for (std::size_t row = 0; row < r; ++row) {
    const auto bits = st.echelon.row(row);
    for (std::size_t i = 0; i < l; ++i)
      if (gf2::test_bit(bits, free_cols[i])) keys[row] |= std::uint64_t{1} << i;
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t half = r / 2;
  const auto left = subsets(std::span(order).first(half), keys, cfg.p);
  const auto right = subsets(std::span(order).subspan(half), keys, cfg.p);

  std::unordered_multimap<std::uint64_t, std::size_t> index;
  index.reserve(right.size());
  for (std::size_t i = 0; i < right.size(); ++i) index.emplace(right[i].key, i);

  const BitMatrix map = gf2::mat_mul(st.transition, lift);
  std::vector<Word> acc(st.echelon.stride());
  std::size_t collisions = 0;
  for (const Subset& s : left) {
    auto [lo, hi] = index.equal_range(s.key);
    for (auto it = lo; it != hi; ++it) {
      const Subset& t = right[it->second];
      if (s.a == kNone && t.a == kNone) continue;
      if (++collisions > cfg.max_collisions) return;
      BitVector h(r);
      add_subset(h, s);
      add_subset(h, t);
      std::fill(acc.begin(), acc.end(), Word{0});
      for (std::size_t i = h.next_set(0); i < r; i = h.next_set(i + 1)) gf2::xor_into(acc, st.echelon.row(i));
      if (static_cast<double>(gf2::popcount(acc)) >= threshold) continue;
      BitVector dual(map.cols());
      for (std::size_t i = h.next_set(0); i < r; i = h.next_set(i + 1)) gf2::xor_into(dual.words(), map.row(i));
      out.add(dual);
    }
  }
}

/// Swaps one random pivot for a random non-pivot column, retrying up to
/// 10 * r times; returns false when every attempt was rejected.
inline bool change_one_position(gf2::PivotState& st, Rng& rng) {
  const std::size_t r = st.rank();
  const std::size_t m = st.echelon.cols();
  if (r == 0 || r == m) return false;
  std::vector<char> is_pivot(m, 0);
  for (auto c : st.pivot_cols) is_pivot[c] = 1;
  std::uniform_int_distribution<std::size_t> pick_slot(0, r - 1);
  std::uniform_int_distribution<std::size_t> pick_col(0, m - 1);
  for (std::size_t attempt = 0; attempt < 10 * r; ++attempt) {
    const std::size_t x = pick_slot(rng);
    std::size_t mu = pick_col(rng);
    while (is_pivot[mu]) mu = pick_col(rng);
    if (gf2::replace_one_column_in_place(st, st.pivot_cols[x], mu)) return true;
  }
  return false;
}

/// Fresh reduction of `y` with its columns visited in random order.
inline gf2::PivotState shuffled_reduction(const BitMatrix& y, Rng& rng) {
  std::vector<std::size_t> perm(y.cols());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  gf2::PivotState st = gf2::gjetp_reduce(y.select_columns(perm));
  BitMatrix echelon(st.echelon.rows(), y.cols());
  for (std::size_t i = 0; i < st.echelon.rows(); ++i) {
    const auto src = st.echelon.row(i);
    for (std::size_t q = 0; q < perm.size(); ++q)
      if (gf2::test_bit(src, q)) echelon.set(i, perm[q], true);
  }
  for (auto& c : st.pivot_cols) c = perm[c];
  st.echelon = std::move(echelon);
  return st;
}

/// Shared search loop over N_GE rounds on a full-row-rank state.
inline void search_rounds(gf2::PivotState st, const BitMatrix& source, const BitMatrix& lift, double threshold,
                          const CcConfig& cfg, Rng& rng, WordSet& out, std::size_t& rounds) {
  for (std::size_t round = 1; round <= cfg.n_ge; ++round) {
    if (round > 1 && !change_one_position(st, rng)) st = shuffled_reduction(source, rng);
    stern_round(st, lift, threshold, cfg, rng, out);
    rounds = round;
  }
}

}  // namespace detail

/// Requires rank(X) = n; otherwise reports a start failure.
inline BaselineResult canteaut_chabaud(const BitMatrix& observations, double pe, const CcConfig& cfg, Rng& rng) {
  (void)pe;
  cfg.validate();
  const detail::Stopwatch clock;
  const std::size_t n = observations.cols();
  BaselineResult res;
  if (observations.rows() < n) {
    res.start_failure = true;
    res.reason = "fewer observations than n";
    res.wall_ms = clock.ms();
    return res;
  }
  const BitMatrix y = observations.transpose();  // n x M
  gf2::PivotState st = gf2::gjetp_reduce(y);
  if (st.rank() < n) {
    res.start_failure = true;
    res.reason = "no n x n full-rank block: rank " + std::to_string(st.rank());
    res.wall_ms = clock.ms();
    return res;
  }
  detail::WordSet found(n);
  detail::search_rounds(std::move(st), y, BitMatrix::identity(n), cc_threshold(observations.rows(), n), cfg, rng, found,
                        res.rounds);
  res.words = found.take();
  res.wall_ms = clock.ms();
  return res;
}

/// Emits the null space of X^T exactly, then searches the rank-n_s remainder.
inline BaselineResult revised_canteaut_chabaud(const BitMatrix& observations, double pe, const CcConfig& cfg, Rng& rng) {
  (void)pe;
  cfg.validate();
  const detail::Stopwatch clock;
  const std::size_t n = observations.cols();
  BaselineResult res;
  detail::WordSet found(n);
  if (observations.rows() == 0) {
    for (std::size_t j = 0; j < n; ++j) found.add(BitVector::unit(n, j));
    res.words = found.take();
    return res;
  }
  const BitMatrix y = observations.transpose();  // n x M
  const gf2::PivotState top = gf2::gjetp_reduce(y);
  const std::size_t ns = top.rank();
  for (std::size_t i = ns; i < n; ++i) found.add(top.transition.row_vector(i));

  if (ns > 0) {
    std::vector<std::size_t> head(ns);
    std::iota(head.begin(), head.end(), 0);
    const BitMatrix xs = top.echelon.select_rows(head);
    const BitMatrix q1 = top.transition.select_rows(head);
    gf2::PivotState st{xs, BitMatrix::identity(ns), top.pivot_cols};
    detail::search_rounds(std::move(st), xs, q1, cc_threshold(observations.rows(), n), cfg, rng, found, res.rounds);
  }
  res.words = found.take();
  res.wall_ms = clock.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Yu's scheme

struct YuConfig {
  /// Rows sampled per outer round; 0 uses every row.
  std::size_t m_c = 0;
  std::size_t n_c1 = 10;
  std::size_t n_c2 = 1;
  std::size_t p = 2;
  /// Heaviest word examined; 0 selects max(8, n / 20).
  std::size_t max_weight = 0;

  void validate() const {
    if (n_c1 < 1 || n_c2 < 1) throw std::invalid_argument("YuConfig: iteration counts must be at least 1");
    if (p < 1 || p > 2) throw std::invalid_argument("YuConfig: p must be 1 or 2");
  }
};

namespace detail {

/// H'_sys of the row space of `sample`: one row per non-pivot position c,
/// e_c plus the pivot positions whose reduced row has a one in column c.
inline BitMatrix systematic_dual(const gf2::PivotState& st, std::size_t n) {
  std::vector<char> is_pivot(n, 0);
  for (auto c : st.pivot_cols) is_pivot[c] = 1;
  BitMatrix h(n - st.rank(), n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (is_pivot[c]) continue;
    h.set(row, c, true);
    for (std::size_t r = 0; r < st.rank(); ++r)
      if (st.echelon.get(r, c)) h.set(row, st.pivot_cols[r], true);
    ++row;
  }
  return h;
}

}  // namespace detail

inline BaselineResult yu_recover(const BitMatrix& observations, double pe, const YuConfig& cfg, Rng& rng) {
  cfg.validate();
  const detail::Stopwatch clock;
  const std::size_t n = observations.cols();
  const std::size_t m = observations.rows();
  const std::size_t max_weight = cfg.max_weight != 0 ? cfg.max_weight : std::max<std::size_t>(8, n / 20);
  BaselineResult res;
  detail::WordSet found(n);
  recovery::SyndromeCounter syndromes(observations);

  std::vector<std::size_t> rows(m);
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t outer = 1; outer <= cfg.n_c2; ++outer) {
    res.rounds = outer;
    const std::size_t mc = cfg.m_c == 0 ? m : std::min(cfg.m_c, m);
    for (std::size_t i = 0; i < mc; ++i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(i, m - 1)(rng);
      std::swap(rows[i], rows[j]);
    }
    const gf2::PivotState sys = gf2::gjetp_reduce(observations.select_rows(std::span(rows).first(mc)));
    if (sys.rank() == 0 || sys.rank() == n) continue;
    const BitMatrix h_sys = detail::systematic_dual(sys, n);

    for (std::size_t inner = 0; inner < cfg.n_c1; ++inner) {
      const gf2::PivotState info = detail::shuffled_reduction(h_sys, rng);
      const std::size_t r = info.rank();
      auto consider = [&](const BitVector& w) {
        const std::size_t wt = w.weight();
        if (wt == 0 || wt > max_weight) return;
        if (static_cast<double>(syndromes.weight(w)) <= recovery::threshold_T(m, pe, wt)) found.add(w);
      };
      for (std::size_t a = 0; a < r; ++a) {
        const BitVector va = info.echelon.row_vector(a);
        consider(va);
        if (cfg.p == 2)
          for (std::size_t b = a + 1; b < r; ++b) {
            BitVector vab = va;
            gf2::xor_into(vab.words(), info.echelon.row(b));
            consider(vab);
          }
      }
    }
  }
  res.words = found.take();
  res.wall_ms = clock.ms();
  return res;
}

}  // namespace blindrec::baselines
