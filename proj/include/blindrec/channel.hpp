#pragma once

// BPSK over AWGN: modulation, noise, hard decisions and LLRs.
// Bit 0 maps to +1 and bit 1 to -1; positive LLRs favor bit 0.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "blindrec/gf2.hpp"
#include "blindrec/rng.hpp"

namespace blindrec::channel {

/// Crossover probability of hard-decision BPSK: 0.5 * erfc(1 / sqrt(2 sigma^2)).
inline double crossover_probability(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("crossover_probability: variance must be positive");
  return 0.5 * std::erfc(1.0 / std::sqrt(2.0 * sigma2));
}

/// Inverse of crossover_probability, by bisection on log(sigma^2).
inline double sigma2_for_crossover(double pe) {
  if (!(pe > 0.0 && pe < 0.5)) throw std::invalid_argument("sigma2_for_crossover: need 0 < pe < 0.5");
  double lo = std::log(1e-6);
  double hi = std::log(1e6);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (crossover_probability(std::exp(mid)) < pe) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

class ChannelModel {
 public:
  explicit ChannelModel(double sigma2) : sigma2_(sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("ChannelModel: variance must be positive");
  }
  [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
  /// N0 = 2 sigma^2
  [[nodiscard]] double n0() const noexcept { return 2.0 * sigma2_; }
  [[nodiscard]] double pe() const { return crossover_probability(sigma2_); }

 private:
  double sigma2_;
};

/// Row-major real matrix.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] double& at(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }

  friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SoftBlock {
  RealMatrix values;
  ChannelModel model;
};

/// y = b + w with b = +1/-1 for bit 0/1 and w ~ N(0, sigma^2), driven
/// entirely by `seed`.
inline SoftBlock transmit(const gf2::BitMatrix& codewords, const ChannelModel& model, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(model.sigma2()));
  RealMatrix y(codewords.rows(), codewords.cols());
  for (std::size_t i = 0; i < codewords.rows(); ++i) {
    const auto bits = codewords.row(i);
    auto out = y.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (gf2::test_bit(bits, j) ? -1.0 : 1.0) + noise(rng);
  }
  return {std::move(y), model};
}

/// Sign rule: bit 0 if value >= 0, else 1. Works on soft values and LLRs alike.
inline gf2::BitMatrix hard_decision(const RealMatrix& values) {
  gf2::BitMatrix x(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    const auto r = values.row(i);
    auto dst = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j] < 0.0) dst[j / gf2::kWordBits] |= gf2::Word{1} << (j % gf2::kWordBits);
  }
  return x;
}

inline gf2::BitMatrix hard_decision(const SoftBlock& soft) { return hard_decision(soft.values); }

/// LLR = 4y/N0 = 2y/sigma^2.
inline RealMatrix llr(const SoftBlock& soft) {
  const double scale = 2.0 / soft.model.sigma2();
  RealMatrix out(soft.values.rows(), soft.values.cols());
  auto src = soft.values.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = scale * src[i];
  return out;
}

}  // namespace blindrec::channel
