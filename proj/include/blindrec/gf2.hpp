#pragma once

// Dense bit-packed linear algebra over GF(2).
//
// Rows are packed little-endian into 64-bit words: bit j of a row lives in
// word j / 64 at position j % 64. Bits past `cols` in the last word of a row
// are kept zero by every mutating operation.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blindrec::gf2 {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) noexcept { return (bits + kWordBits - 1) / kWordBits; }

constexpr Word tail_mask(std::size_t bits) noexcept {
  const std::size_t r = bits % kWordBits;
  return r == 0 ? ~Word{0} : (Word{1} << r) - 1;
}

inline bool parity(Word w) noexcept { return (std::popcount(w) & 1) != 0; }

/// Parity of the bitwise AND of two equally sized packed rows.
inline bool dot(std::span<const Word> a, std::span<const Word> b) noexcept {
  Word acc = 0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc ^= a[i] & b[i];
  return parity(acc);
}

inline std::size_t popcount(std::span<const Word> a) noexcept {
  std::size_t c = 0;
  for (Word w : a) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

inline void xor_into(std::span<Word> dst, std::span<const Word> src) noexcept {
  const std::size_t n = std::min(dst.size(), src.size());
  for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

inline bool test_bit(std::span<const Word> row, std::size_t j) noexcept {
  return ((row[j / kWordBits] >> (j % kWordBits)) & 1U) != 0;
}

/// A packed bit vector of fixed length.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_(words_for(size), 0) {}
  BitVector(std::size_t size, std::span<const Word> words) : size_(size), words_(words.begin(), words.end()) {
    if (words_.size() != words_for(size)) throw std::invalid_argument("BitVector: word count does not match size");
    if (!words_.empty()) words_.back() &= tail_mask(size_);
  }

  /// Parses a string of '0'/'1' characters; position 0 is the first character.
  static BitVector from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t j = 0; j < bits.size(); ++j) {
      if (bits[j] == '1') {
        v.set(j, true);
      } else if (bits[j] != '0') {
        throw std::invalid_argument("BitVector: expected only '0' and '1'");
      }
    }
    return v;
  }

  static BitVector unit(std::size_t size, std::size_t j) {
    BitVector v(size);
    v.set(j, true);
    return v;
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::span<const Word> words() const noexcept { return words_; }
  [[nodiscard]] std::span<Word> words() noexcept { return words_; }

  [[nodiscard]] bool get(std::size_t j) const {
    check(j);
    return test_bit(words_, j);
  }
  void set(std::size_t j, bool value) {
    check(j);
    const Word m = Word{1} << (j % kWordBits);
    if (value) {
      words_[j / kWordBits] |= m;
    } else {
      words_[j / kWordBits] &= ~m;
    }
  }
  void flip(std::size_t j) {
    check(j);
    words_[j / kWordBits] ^= Word{1} << (j % kWordBits);
  }

  [[nodiscard]] std::size_t weight() const noexcept { return popcount(words_); }
  [[nodiscard]] bool is_zero() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
  }

  /// Index of the lowest set bit at or after `from`, or size() if none.
  [[nodiscard]] std::size_t next_set(std::size_t from) const noexcept {
    if (from >= size_) return size_;
    std::size_t w = from / kWordBits;
    Word cur = words_[w] & (~Word{0} << (from % kWordBits));
    while (true) {
      if (cur != 0) return std::min(size_, w * kWordBits + static_cast<std::size_t>(std::countr_zero(cur)));
      if (++w == words_.size()) return size_;
      cur = words_[w];
    }
  }

  BitVector& operator^=(const BitVector& other) {
    if (other.size_ != size_) throw std::invalid_argument("BitVector: length mismatch");
    xor_into(words_, other.words_);
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

  [[nodiscard]] std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t j = 0; j < size_; ++j)
      if (test_bit(words_, j)) s[j] = '1';
    return s;
  }

 private:
  void check(std::size_t j) const {
    if (j >= size_) throw std::out_of_range("BitVector: index out of range");
  }

  std::size_t size_ = 0;
  std::vector<Word> words_;
};

/// Dot product over GF(2) of two vectors of equal length.
inline bool dot(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return dot(a.words(), b.words());
}

/// Dense row-major bit matrix. Zero-row matrices are permitted and represent
/// an empty set of row vectors; every matrix has at least one column.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * stride_, 0) {
    if (cols == 0) throw std::invalid_argument("BitMatrix: column count must be positive");
  }

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  static BitMatrix from_strings(const std::vector<std::string>& rows) {
    if (rows.empty()) throw std::invalid_argument("BitMatrix: no rows given");
    BitMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw std::invalid_argument("BitMatrix: ragged rows");
      m.set_row(i, BitVector::from_string(rows[i]));
    }
    return m;
  }

  static BitMatrix from_rows(std::span<const BitVector> rows, std::size_t cols) {
    BitMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) m.set_row(i, rows[i]);
    return m;
  }

  template <class Rng>
  static BitMatrix random(std::size_t rows, std::size_t cols, Rng& rng) {
    BitMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      auto r = m.row(i);
      for (auto& w : r) w = static_cast<Word>(rng());
      r.back() &= tail_mask(cols);
    }
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }

  [[nodiscard]] std::span<Word> row(std::size_t i) noexcept { return {data_.data() + i * stride_, stride_}; }
  [[nodiscard]] std::span<const Word> row(std::size_t i) const noexcept { return {data_.data() + i * stride_, stride_}; }

  [[nodiscard]] bool get(std::size_t i, std::size_t j) const {
    check(i, j);
    return test_bit(row(i), j);
  }
  void set(std::size_t i, std::size_t j, bool value) {
    check(i, j);
    const Word m = Word{1} << (j % kWordBits);
    Word& w = data_[i * stride_ + j / kWordBits];
    w = value ? (w | m) : (w & ~m);
  }
  void flip(std::size_t i, std::size_t j) {
    check(i, j);
    data_[i * stride_ + j / kWordBits] ^= Word{1} << (j % kWordBits);
  }

  /// row(dst) ^= row(src)
  void xor_row(std::size_t dst, std::size_t src) noexcept { xor_into(row(dst), row(src)); }
  /// Same, restricted to words from `first_word` on.
  void xor_row_from(std::size_t dst, std::size_t src, std::size_t first_word) noexcept {
    Word* d = data_.data() + dst * stride_;
    const Word* s = data_.data() + src * stride_;
    for (std::size_t w = first_word; w < stride_; ++w) d[w] ^= s[w];
  }
  void swap_rows(std::size_t a, std::size_t b) noexcept {
    if (a == b) return;
    std::swap_ranges(row(a).begin(), row(a).end(), row(b).begin());
  }

  [[nodiscard]] BitVector row_vector(std::size_t i) const { return BitVector(cols_, row(i)); }
  void set_row(std::size_t i, const BitVector& v) {
    if (v.size() != cols_) throw std::invalid_argument("BitMatrix: row length mismatch");
    std::copy(v.words().begin(), v.words().end(), row(i).begin());
  }
  [[nodiscard]] BitVector column(std::size_t j) const {
    BitVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      if (test_bit(row(i), j)) v.set(i, true);
    return v;
  }

  /// Appends a row; the matrix must already have the right column count.
  void push_row(const BitVector& v) {
    if (v.size() != cols_) throw std::invalid_argument("BitMatrix: row length mismatch");
    data_.insert(data_.end(), v.words().begin(), v.words().end());
    ++rows_;
  }

  [[nodiscard]] BitMatrix transpose() const {
    if (rows_ == 0) throw std::invalid_argument("transpose: matrix has no rows");
    BitMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto r = row(i);
      const Word bit = Word{1} << (i % kWordBits);
      const std::size_t wi = i / kWordBits;
      for (std::size_t w = 0; w < stride_; ++w) {
        Word x = r[w];
        while (x != 0) {
          const std::size_t j = w * kWordBits + static_cast<std::size_t>(std::countr_zero(x));
          t.data_[j * t.stride_ + wi] |= bit;
          x &= x - 1;
        }
      }
    }
    return t;
  }

  [[nodiscard]] BitMatrix select_rows(std::span<const std::size_t> idx) const {
    BitMatrix m(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= rows_) throw std::out_of_range("select_rows: index out of range");
      std::copy(row(idx[i]).begin(), row(idx[i]).end(), m.row(i).begin());
    }
    return m;
  }

  [[nodiscard]] BitMatrix select_columns(std::span<const std::size_t> idx) const {
    if (idx.empty()) throw std::invalid_argument("select_columns: empty selection");
    BitMatrix m(rows_, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      if (idx[c] >= cols_) throw std::out_of_range("select_columns: index out of range");
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto src = row(i);
      auto dst = m.row(i);
      for (std::size_t c = 0; c < idx.size(); ++c)
        if (test_bit(src, idx[c])) dst[c / kWordBits] |= Word{1} << (c % kWordBits);
    }
    return m;
  }

  /// Columns [first, first + count).
  [[nodiscard]] BitMatrix column_range(std::size_t first, std::size_t count) const {
    std::vector<std::size_t> idx(count);
    for (std::size_t c = 0; c < count; ++c) idx[c] = first + c;
    return select_columns(idx);
  }

  [[nodiscard]] bool is_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](Word w) { return w == 0; });
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  void check(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw std::out_of_range("BitMatrix: index out of range");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> data_;
};

/// GF(2) product. Row i of the result is the XOR of the rows of `b` selected
/// by the set bits of row i of `a`.
inline BitMatrix mat_mul(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("mat_mul: dimension mismatch");
  BitMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    auto dst = out.row(i);
    for (std::size_t w = 0; w < ar.size(); ++w) {
      Word x = ar[w];
      while (x != 0) {
        const std::size_t l = w * kWordBits + static_cast<std::size_t>(std::countr_zero(x));
        xor_into(dst, b.row(l));
        x &= x - 1;
      }
    }
  }
  return out;
}

/// m · v for a column vector v.
inline BitVector mat_vec(const BitMatrix& m, const BitVector& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
  BitVector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (dot(m.row(i), v.words())) out.set(i, true);
  return out;
}

/// Result of Gauss-Jordan elimination with transition tracking.
///
/// `transition · original == echelon`. Row r of `echelon` carries the pivot
/// of column `pivot_cols[r]`, and every pivot column is a unit column. Rows
/// at index >= pivot_cols.size() are zero.
struct PivotState {
  BitMatrix echelon;
  BitMatrix transition;
  std::vector<std::size_t> pivot_cols;

  [[nodiscard]] std::size_t rank() const noexcept { return pivot_cols.size(); }
};

/// Reduced row-echelon form of `m` along with the accumulated row operations.
/// Pivots are taken left to right, choosing the first row (top-down) with a
/// set bit. Elimination stops once every row has a pivot.
inline PivotState gjetp_reduce(const BitMatrix& m) {
  PivotState st{m, BitMatrix::identity(m.rows() == 0 ? 1 : m.rows()), {}};
  if (m.rows() == 0) return st;
  const std::size_t rows = m.rows();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < rows; ++col) {
    const std::size_t w = col / kWordBits;
    const Word bit = Word{1} << (col % kWordBits);
    std::size_t piv = rank;
    while (piv < rows && (st.echelon.row(piv)[w] & bit) == 0) ++piv;
    if (piv == rows) continue;
    st.echelon.swap_rows(rank, piv);
    st.transition.swap_rows(rank, piv);
    // Rows below `rank` vanish left of `col`, so the pivot row does too.
    for (std::size_t z = 0; z < rows; ++z) {
      if (z != rank && (st.echelon.row(z)[w] & bit) != 0) {
        st.echelon.xor_row_from(z, rank, w);
        st.transition.xor_row(z, rank);
      }
    }
    st.pivot_cols.push_back(col);
    ++rank;
  }
  return st;
}

inline std::size_t rank_of(const BitMatrix& m) { return gjetp_reduce(m).rank(); }

/// Swaps pivot column `out_col` for `in_col` in place using row XORs only.
/// Returns false, leaving `state` untouched, when the new column set would be
/// dependent. Requires a state of full row rank.
inline bool replace_one_column_in_place(PivotState& state, std::size_t out_col, std::size_t in_col) {
  const std::size_t cols = state.echelon.cols();
  if (out_col >= cols || in_col >= cols) throw std::out_of_range("replace_one_column: column index out of range");
  if (state.rank() != state.echelon.rows())
    throw std::invalid_argument("replace_one_column: state must have full row rank");
  const auto it = std::find(state.pivot_cols.begin(), state.pivot_cols.end(), out_col);
  if (it == state.pivot_cols.end()) throw std::invalid_argument("replace_one_column: outgoing column is not a pivot");
  if (std::find(state.pivot_cols.begin(), state.pivot_cols.end(), in_col) != state.pivot_cols.end())
    throw std::invalid_argument("replace_one_column: incoming column is already a pivot");

  const auto x = static_cast<std::size_t>(it - state.pivot_cols.begin());
  const std::size_t w = in_col / kWordBits;
  const Word bit = Word{1} << (in_col % kWordBits);
  if ((state.echelon.row(x)[w] & bit) == 0) return false;
  for (std::size_t z = 0; z < state.echelon.rows(); ++z) {
    if (z != x && (state.echelon.row(z)[w] & bit) != 0) {
      state.echelon.xor_row(z, x);
      state.transition.xor_row(z, x);
    }
  }
  *it = in_col;
  return true;
}

/// Value-returning form of replace_one_column_in_place; nullopt on rejection.
inline std::optional<PivotState> replace_one_column(const PivotState& state, const BitMatrix& original, std::size_t out_col,
                                                    std::size_t in_col) {
  if (original.rows() != state.echelon.rows() || original.cols() != state.echelon.cols())
    throw std::invalid_argument("replace_one_column: state does not match original");
  PivotState next = state;
  if (!replace_one_column_in_place(next, out_col, in_col)) return std::nullopt;
  return next;
}

/// Incremental linear-independence test for column vectors of a fixed length.
///
/// Keeps a transition matrix D such that D · [accepted vectors] is in column
/// echelon form with pivots in rows 0..count-1. A new vector v is independent
/// iff D·v has a nonzero entry at or below row `count`.
class EchelonTracker {
 public:
  EchelonTracker() = default;
  explicit EchelonTracker(std::size_t length, std::size_t capacity)
      : length_(length), capacity_(std::min(capacity, length)), transition_(BitMatrix::identity(length)) {
    if (length == 0) throw std::invalid_argument("EchelonTracker: length must be positive");
  }
  explicit EchelonTracker(std::size_t length) : EchelonTracker(length, length) {}

  [[nodiscard]] std::size_t length() const noexcept { return length_; }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::size_t count() const noexcept { return basis_.size(); }
  [[nodiscard]] const BitMatrix& transition() const noexcept { return transition_; }

  /// Basis Q' as a length × count matrix (columns are reduced vectors).
  [[nodiscard]] BitMatrix basis() const {
    BitMatrix q(length_, std::max<std::size_t>(1, basis_.size()));
    for (std::size_t c = 0; c < basis_.size(); ++c)
      for (std::size_t i = basis_[c].next_set(0); i < length_; i = basis_[c].next_set(i + 1)) q.set(i, c, true);
    return q;
  }

  /// Whether `v` would be accepted, without changing the tracker.
  [[nodiscard]] bool is_independent(const BitVector& v) const {
    check(v);
    const BitVector q = mat_vec(transition_, v);
    return q.next_set(count()) < length_;
  }

  /// Accepts `v` iff it is independent of the vectors accepted so far.
  bool try_insert(const BitVector& v) {
    check(v);
    if (count() >= capacity_) throw std::length_error("EchelonTracker: capacity reached");
    BitVector q = mat_vec(transition_, v);
    const std::size_t j = count();
    const std::size_t d = q.next_set(j);
    if (d >= length_) return false;
    if (d != j) {
      transition_.swap_rows(j, d);
      const bool qd = q.get(d);
      q.set(d, q.get(j));
      q.set(j, qd);
    }
    for (std::size_t i = q.next_set(j + 1); i < length_; i = q.next_set(i + 1)) {
      transition_.xor_row(i, j);
      q.set(i, false);
    }
    basis_.push_back(std::move(q));
    return true;
  }

 private:
  void check(const BitVector& v) const {
    if (v.size() != length_) throw std::invalid_argument("EchelonTracker: vector length mismatch");
  }

  std::size_t length_ = 0;
  std::size_t capacity_ = 0;
  BitMatrix transition_;
  std::vector<BitVector> basis_;
};

}  // namespace blindrec::gf2
