#pragma once

// Sum-product decoding against a partially recovered parity-check matrix, and
// the two outer loops that alternate decoding with GEV:
//   DAR      decode every word with H', re-run GEV on the decoded words.
//   EDCSDAR  same, but GEV only sees the rows that pass soft-value error
//            detection, and detection runs on the decoder's posteriors.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindrec/channel.hpp"
#include "blindrec/detect.hpp"
#include "blindrec/gf2.hpp"
#include "blindrec/recovery.hpp"
#include "blindrec/rng.hpp"

namespace blindrec::decode {

using channel::RealMatrix;
using gf2::BitMatrix;
using gf2::BitVector;

inline constexpr double kLlrClip = 30.0;

/// The dual words recovered so far, as rows.
struct PartialParity {
  BitMatrix rows;

  [[nodiscard]] std::size_t count() const noexcept { return rows.rows(); }
  [[nodiscard]] std::size_t length() const noexcept { return rows.cols(); }
};

struct BpResult {
  std::vector<double> llr;
  BitVector bits;
  std::size_t iterations = 0;
  bool satisfied = false;
};

/// Flooding sum-product decoder on the Tanner graph of a fixed H'.
class BpDecoder {
 public:
  explicit BpDecoder(const PartialParity& h) : n_(h.length()) {
    check_start_.push_back(0);
    for (std::size_t c = 0; c < h.count(); ++c) {
      const auto r = h.rows.row(c);
      for (std::size_t w = 0; w < r.size(); ++w) {
        for (gf2::Word x = r[w]; x != 0; x &= x - 1)
          edge_var_.push_back(static_cast<std::uint32_t>(w * gf2::kWordBits + std::countr_zero(x)));
      }
      check_start_.push_back(edge_var_.size());
    }
    var_start_.assign(n_ + 1, 0);
    for (auto v : edge_var_) ++var_start_[v + 1];
    for (std::size_t v = 0; v < n_; ++v) var_start_[v + 1] += var_start_[v];
    var_edges_.resize(edge_var_.size());
    std::vector<std::size_t> fill(var_start_.begin(), var_start_.end() - 1);
    for (std::size_t e = 0; e < edge_var_.size(); ++e) var_edges_[fill[edge_var_[e]]++] = static_cast<std::uint32_t>(e);
  }

  [[nodiscard]] std::size_t length() const noexcept { return n_; }
  [[nodiscard]] std::size_t checks() const noexcept { return check_start_.size() - 1; }

  /// Decodes one word given its channel LLRs (positive favors bit 0).
  [[nodiscard]] BpResult decode(std::span<const double> channel_llr, std::size_t iters) const {
    if (channel_llr.size() != n_) throw std::invalid_argument("BpDecoder: LLR length mismatch");
    BpResult out;
    out.llr.assign(channel_llr.begin(), channel_llr.end());
    out.bits = hard(out.llr);
    out.satisfied = satisfied(out.bits);
    if (checks() == 0 || out.satisfied) return out;

    const std::size_t edges = edge_var_.size();
    std::vector<double> c2v(edges, 0.0);
    std::vector<double> v2c(edges, 0.0);
    std::vector<double> prefix;
    const double tmax = std::tanh(0.5 * kLlrClip);

    for (std::size_t it = 1; it <= iters; ++it) {
      for (std::size_t v = 0; v < n_; ++v) {
        double total = channel_llr[v];
        for (std::size_t i = var_start_[v]; i < var_start_[v + 1]; ++i) total += c2v[var_edges_[i]];
        for (std::size_t i = var_start_[v]; i < var_start_[v + 1]; ++i) {
          const std::uint32_t e = var_edges_[i];
          v2c[e] = std::tanh(0.5 * std::clamp(total - c2v[e], -kLlrClip, kLlrClip));
        }
      }
      for (std::size_t c = 0; c + 1 < check_start_.size(); ++c) {
        const std::size_t b = check_start_[c];
        const std::size_t e_end = check_start_[c + 1];
        prefix.resize(e_end - b + 1);
        prefix[0] = 1.0;
        for (std::size_t e = b; e < e_end; ++e) prefix[e - b + 1] = prefix[e - b] * v2c[e];
        double suffix = 1.0;
        for (std::size_t e = e_end; e-- > b;) {
          const double t = std::clamp(prefix[e - b] * suffix, -tmax, tmax);
          c2v[e] = 2.0 * std::atanh(t);
          suffix *= v2c[e];
        }
      }
      for (std::size_t v = 0; v < n_; ++v) {
        double total = channel_llr[v];
        for (std::size_t i = var_start_[v]; i < var_start_[v + 1]; ++i) total += c2v[var_edges_[i]];
        out.llr[v] = std::clamp(total, -kLlrClip, kLlrClip);
      }
      out.bits = hard(out.llr);
      out.iterations = it;
      out.satisfied = satisfied(out.bits);
      if (out.satisfied) break;
    }
    return out;
  }

 private:
  [[nodiscard]] BitVector hard(std::span<const double> llr) const {
    BitVector b(n_);
    for (std::size_t j = 0; j < n_; ++j)
      if (llr[j] < 0.0) b.set(j, true);
    return b;
  }

  [[nodiscard]] bool satisfied(const BitVector& bits) const {
    for (std::size_t c = 0; c + 1 < check_start_.size(); ++c) {
      bool par = false;
      for (std::size_t e = check_start_[c]; e < check_start_[c + 1]; ++e) par ^= bits.get(edge_var_[e]);
      if (par) return false;
    }
    return true;
  }

  std::size_t n_;
  std::vector<std::size_t> check_start_;
  std::vector<std::uint32_t> edge_var_;
  std::vector<std::size_t> var_start_;
  std::vector<std::uint32_t> var_edges_;
};

inline BpResult bp_decode(std::span<const double> channel_llr, const PartialParity& h, std::size_t iters) {
  return BpDecoder(h).decode(channel_llr, iters);
}

struct DecodedBlock {
  RealMatrix posterior;
  BitMatrix bits;
};

/// Decodes every row of `channel_llr` against H'.
inline DecodedBlock decode_block(const RealMatrix& channel_llr, const PartialParity& h, std::size_t iters) {
  const BpDecoder dec(h);
  DecodedBlock out{RealMatrix(channel_llr.rows(), channel_llr.cols()), BitMatrix(channel_llr.rows(), channel_llr.cols())};
  for (std::size_t i = 0; i < channel_llr.rows(); ++i) {
    BpResult r = dec.decode(channel_llr.row(i), iters);
    std::copy(r.llr.begin(), r.llr.end(), out.posterior.row(i).begin());
    out.bits.set_row(i, r.bits);
  }
  return out;
}

struct DarConfig {
  recovery::GevConfig gev{};
  std::size_t n_iter = 5;
  std::size_t bp_iters = 20;
  /// Present for EDCSDAR. Thresholds are in channel-value units.
  std::optional<detect::DetectConfig> detect{};

  void validate() const {
    if (n_iter < 1) throw std::invalid_argument("DarConfig: n_iter must be at least 1");
    if (bp_iters < 1) throw std::invalid_argument("DarConfig: bp_iters must be at least 1");
  }
};

namespace detail {

/// Bookkeeping shared by both outer loops.
class OuterLoop {
 public:
  OuterLoop(const DarConfig& cfg, std::size_t n)
      : table_(n, cfg.gev.n - cfg.gev.k), t0_(std::chrono::steady_clock::now()) {}

  recovery::DualWordTable& table() noexcept { return table_; }

  /// Records the table after an iteration; returns false when the loop
  /// should stop (table full, or two consecutive iterations without gain).
  bool record(std::size_t iteration, std::string note = {}) {
    const std::size_t size = table_.size();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    report_.iterations.push_back({iteration, size, ms, table_.as_matrix(), std::move(note)});
    report_.per_round.push_back({iteration, size});
    stall_ = size > last_size_ ? 0 : stall_ + 1;
    last_size_ = size;
    return !table_.full() && stall_ < 2;
  }

  recovery::RecoveryReport finish(std::string reason = {}) {
    report_.recovered_h = table_.as_matrix();
    report_.success = table_.full();
    report_.rounds_used = report_.iterations.size();
    report_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    if (!reason.empty()) {
      report_.reason = std::move(reason);
    } else if (!report_.success) {
      report_.reason = "dual word table incomplete";
    }
    return std::move(report_);
  }

  void mark_start_failure() { report_.start_failure = true; }

 private:
  recovery::DualWordTable table_;
  recovery::RecoveryReport report_;
  std::size_t last_size_ = 0;
  std::size_t stall_ = 0;
  std::chrono::steady_clock::time_point t0_;
};

inline constexpr const char* kNeedsOneWord = "DAR requires at least one recovered dual word";

}  // namespace detail

/// Decoding-aided recovery. Iteration 1 is plain GEV on the hard decisions;
/// each later iteration decodes all words from their channel LLRs with the
/// current table as H' and runs GEV on the decoded words.
inline recovery::RecoveryReport dar_recover(const channel::SoftBlock& soft, const DarConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.detect) throw std::invalid_argument("dar_recover: detection config present, use edcsdar_recover");
  detail::OuterLoop loop(cfg, soft.values.cols());
  const BitMatrix x = channel::hard_decision(soft);
  const auto first = recovery::gev_rounds(x, cfg.gev, loop.table(), rng);
  if (first.rank_failure) loop.mark_start_failure();
  bool go = loop.record(1);
  if (loop.table().size() == 0) return loop.finish(first.rank_failure ? "no k x k full-rank block among the observations" : detail::kNeedsOneWord);

  const RealMatrix channel_llr = channel::llr(soft);
  for (std::size_t it = 2; go && it <= cfg.n_iter; ++it) {
    const DecodedBlock dec = decode_block(channel_llr, {loop.table().as_matrix()}, cfg.bp_iters);
    recovery::gev_rounds(dec.bits, cfg.gev, loop.table(), rng);
    go = loop.record(it);
  }
  return loop.finish();
}

/// Error detection, codeword selection and decoding-aided recovery. Works in
/// the LLR domain throughout; thresholds t are applied as 2t / sigma^2.
inline recovery::RecoveryReport edcsdar_recover(const channel::SoftBlock& soft, const DarConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!cfg.detect) throw std::invalid_argument("edcsdar_recover: detection config required");
  const std::size_t k = cfg.gev.k;
  const double scale = 2.0 / soft.model.sigma2();
  const detect::DetectConfig base = cfg.detect->scaled(scale);

  detail::OuterLoop loop(cfg, soft.values.cols());
  const RealMatrix channel_llr = channel::llr(soft);
  RealMatrix posterior;
  bool go = true;
  for (std::size_t it = 1; go && it <= cfg.n_iter; ++it) {
    const RealMatrix& work = it == 1 ? channel_llr : posterior;
    detect::DetectConfig dc = base;
    if (dc.adaptive) dc = detect::adapt_t1(work, base, k).config;
    const BitMatrix hard = channel::hard_decision(work);
    const detect::Selection sel = detect::select_clean(hard, detect::detect_errors(work, dc, k));

    std::string note;
    if (sel.rows.rows() < k) {
      note = "selection below k rows: " + std::to_string(sel.rows.rows());
      if (it == 1) loop.mark_start_failure();
    } else {
      const auto stats = recovery::gev_rounds(sel.rows, hard, cfg.gev, loop.table(), rng);
      if (stats.rank_failure) {
        note = "selected rows lack a k x k full-rank block";
        if (it == 1) loop.mark_start_failure();
      }
    }
    go = loop.record(it, note);
    if (it == 1 && loop.table().size() == 0) return loop.finish(note.empty() ? detail::kNeedsOneWord : note);
    if (go && it < cfg.n_iter) posterior = decode_block(channel_llr, {loop.table().as_matrix()}, cfg.bp_iters).posterior;
  }
  return loop.finish();
}

}  // namespace blindrec::decode
