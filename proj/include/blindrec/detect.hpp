#pragma once

// Soft-value error detection and codeword selection.
//
// A position is flagged when its magnitude is at or below the threshold for
// its part of the word: t1 over the k message positions, t2 over the n-k
// parity positions. The detector works on raw channel values and on LLRs
// alike; callers scale the thresholds to match.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blindrec/channel.hpp"
#include "blindrec/gf2.hpp"

namespace blindrec::detect {

using channel::RealMatrix;
using gf2::BitMatrix;

struct DetectConfig {
  double t1 = 0.05;
  double t2 = 0.28;
  /// Clean-row count sought by adapt_t1; 0 selects k + max(20, ceil(0.1 k)).
  std::size_t target_clean = 0;
  /// Retune t1 every iteration before selecting.
  bool adaptive = false;

  [[nodiscard]] std::size_t resolved_target(std::size_t k) const {
    if (target_clean != 0) return target_clean;
    return k + std::max<std::size_t>(20, (k + 9) / 10);
  }

  void validate(std::size_t k) const {
    if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw std::invalid_argument("DetectConfig: thresholds must be non-negative");
    if (target_clean != 0 && target_clean < k) throw std::invalid_argument("DetectConfig: target_clean must be at least k");
  }

  /// Same thresholds expressed for values multiplied by `factor`.
  [[nodiscard]] DetectConfig scaled(double factor) const {
    DetectConfig c = *this;
    c.t1 *= factor;
    c.t2 *= factor;
    return c;
  }
};

struct ErrorMask {
  BitMatrix mask;
};

inline void check_split(std::size_t k, std::size_t n) {
  if (!(k > 0 && k < n)) throw std::invalid_argument("detect: need 0 < k < n");
}

inline ErrorMask detect_errors(const RealMatrix& values, const DetectConfig& cfg, std::size_t k) {
  check_split(k, values.cols());
  cfg.validate(k);
  ErrorMask out{BitMatrix(values.rows(), values.cols())};
  for (std::size_t i = 0; i < values.rows(); ++i) {
    const auto r = values.row(i);
    auto dst = out.mask.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double t = j < k ? cfg.t1 : cfg.t2;
      if (std::abs(r[j]) <= t) dst[j / gf2::kWordBits] |= gf2::Word{1} << (j % gf2::kWordBits);
    }
  }
  return out;
}

inline ErrorMask detect_errors(const channel::SoftBlock& soft, const DetectConfig& cfg, std::size_t k) {
  return detect_errors(soft.values, cfg, k);
}

struct Selection {
  BitMatrix rows;
  std::vector<std::size_t> indexes;
};

/// Keeps the observation rows whose mask row is all zero, in order.
inline Selection select_clean(const BitMatrix& observations, const ErrorMask& mask) {
  if (observations.rows() != mask.mask.rows() || observations.cols() != mask.mask.cols())
    throw std::invalid_argument("select_clean: shape mismatch");
  Selection s;
  for (std::size_t i = 0; i < mask.mask.rows(); ++i) {
    const auto r = mask.mask.row(i);
    if (std::all_of(r.begin(), r.end(), [](gf2::Word w) { return w == 0; })) s.indexes.push_back(i);
  }
  s.rows = observations.select_rows(s.indexes);
  return s;
}

struct AdaptResult {
  DetectConfig config{};
  std::size_t clean_count = 0;
  /// False when even t1 = 0 leaves fewer clean rows than the target.
  bool feasible = true;
};

namespace detail {

struct RowMinima {
  std::vector<double> message;  ///< min |value| over positions < k
  std::vector<double> parity;   ///< min |value| over positions >= k
  double max_abs = 0.0;
};

inline RowMinima row_minima(const RealMatrix& values, std::size_t k) {
  RowMinima m;
  m.message.resize(values.rows(), std::numeric_limits<double>::infinity());
  m.parity.resize(values.rows(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    const auto r = values.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double a = std::abs(r[j]);
      m.max_abs = std::max(m.max_abs, a);
      double& slot = j < k ? m.message[i] : m.parity[i];
      slot = std::min(slot, a);
    }
  }
  return m;
}

inline std::size_t clean_count(const RowMinima& m, double t1, double t2) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < m.message.size(); ++i)
    if (m.message[i] > t1 && m.parity[i] > t2) ++c;
  return c;
}

}  // namespace detail

/// Clean-row count for the given thresholds, without building a mask.
inline std::size_t count_clean(const RealMatrix& values, const DetectConfig& cfg, std::size_t k) {
  check_split(k, values.cols());
  return detail::clean_count(detail::row_minima(values, k), cfg.t1, cfg.t2);
}

/// Bisects t1 (t2 fixed) for the largest threshold that still leaves at
/// least the target number of clean rows.
inline AdaptResult adapt_t1(const RealMatrix& values, const DetectConfig& cfg, std::size_t k) {
  check_split(k, values.cols());
  cfg.validate(k);
  const std::size_t target = cfg.resolved_target(k);
  const detail::RowMinima m = detail::row_minima(values, k);

  AdaptResult res{cfg, detail::clean_count(m, cfg.t1, cfg.t2), true};
  if (res.clean_count == target) return res;

  const std::size_t at_zero = detail::clean_count(m, 0.0, cfg.t2);
  if (at_zero < target) {
    res.config.t1 = 0.0;
    res.clean_count = at_zero;
    res.feasible = false;
    return res;
  }
  double lo = 0.0;
  double hi = m.max_abs;
  if (detail::clean_count(m, hi, cfg.t2) >= target) {
    lo = hi;
  } else {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::clean_count(m, mid, cfg.t2) >= target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  res.config.t1 = lo;
  res.clean_count = detail::clean_count(m, lo, cfg.t2);
  return res;
}

inline AdaptResult adapt_t1(const channel::SoftBlock& soft, const DetectConfig& cfg, std::size_t k) {
  return adapt_t1(soft.values, cfg, k);
}

}  // namespace blindrec::detect
