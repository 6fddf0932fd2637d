#pragma once

// Ground-truth linear block codes: construction, alist I/O and encoding.
//
// Every CodeSpec is held in systematic coordinates: the generator is
// (I_k, P) and the message occupies positions 0..k-1. When a loaded parity
// matrix needs its columns reordered to reach that form, the reordering is
// kept in `column_order` and undone on serialization.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blindrec/gf2.hpp"

namespace blindrec::codebook {

using gf2::BitMatrix;
using gf2::BitVector;

class CodeError : public std::runtime_error {
 public:
  enum class Kind { malformed, index_out_of_range, rank_deficient, not_a_divisor, io };
  CodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct CodeSpec {
  std::string name;
  std::size_t n = 0;
  std::size_t k = 0;
  BitMatrix generator;  ///< k x n, left block I_k
  BitMatrix parity;     ///< (n-k) x n, full rank, parity * generator^T = 0
  /// Position p in code coordinates corresponds to source column column_order[p].
  std::vector<std::size_t> column_order;
  /// Generator polynomial (lowest degree first) for cyclic codes, else empty.
  std::string generator_poly;

  [[nodiscard]] std::size_t redundancy() const noexcept { return n - k; }
};

// ---------------------------------------------------------------------------
// Polynomials over GF(2), coefficient i is the coefficient of x^i.

namespace poly {

using Poly = std::vector<std::uint8_t>;

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline int degree(Poly p) {
  trim(p);
  return static_cast<int>(p.size()) - 1;
}

inline Poly from_string(std::string_view bits) {
  Poly p;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("polynomial: expected only '0' and '1'");
    p.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  trim(p);
  return p;
}

inline std::string to_string(Poly p) {
  trim(p);
  std::string s;
  for (auto c : p) s.push_back(static_cast<char>('0' + c));
  return s.empty() ? "0" : s;
}

/// x^n + 1
inline Poly x_pow_plus_one(std::size_t n) {
  Poly p(n + 1, 0);
  p[0] = 1;
  p[n] = 1;
  return p;
}

inline Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] ^= b[j];
  trim(r);
  return r;
}

/// Remainder of a / b.
inline Poly mod(Poly a, Poly b) {
  trim(a);
  trim(b);
  if (b.empty()) throw std::invalid_argument("polynomial: division by zero");
  const std::size_t db = b.size() - 1;
  while (!a.empty() && a.size() - 1 >= db) {
    const std::size_t shift = a.size() - 1 - db;
    for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] ^= b[j];
    trim(a);
  }
  return a;
}

}  // namespace poly

// ---------------------------------------------------------------------------

/// Code with systematic generator (I_k, P) for a given k x (n-k) block P.
inline CodeSpec make_systematic(const BitMatrix& p_block, std::string name = "systematic") {
  const std::size_t k = p_block.rows();
  const std::size_t r = p_block.cols();
  if (k == 0) throw std::invalid_argument("make_systematic: empty message dimension");
  const std::size_t n = k + r;
  CodeSpec code;
  code.name = std::move(name);
  code.n = n;
  code.k = k;
  code.generator = BitMatrix(k, n);
  code.parity = BitMatrix(r, n);
  for (std::size_t i = 0; i < k; ++i) {
    code.generator.set(i, i, true);
    for (std::size_t j = 0; j < r; ++j) {
      if (p_block.get(i, j)) {
        code.generator.set(i, k + j, true);
        code.parity.set(j, i, true);
      }
    }
  }
  for (std::size_t j = 0; j < r; ++j) code.parity.set(j, k + j, true);
  code.column_order.resize(n);
  std::iota(code.column_order.begin(), code.column_order.end(), std::size_t{0});
  return code;
}

/// Cyclic code of length n generated by `generator_poly`.
///
/// Codeword position j carries the coefficient of x^(n-1-j), so the message
/// sits in positions 0..k-1 and row i of G is x^(n-1-i) + (x^(n-1-i) mod g).
inline CodeSpec make_cyclic(std::size_t n, const poly::Poly& generator_poly) {
  poly::Poly g = generator_poly;
  poly::trim(g);
  const int deg = poly::degree(g);
  if (deg < 1 || static_cast<std::size_t>(deg) >= n)
    throw CodeError(CodeError::Kind::not_a_divisor, "make_cyclic: generator degree must lie in [1, n)");
  if (!poly::mod(poly::x_pow_plus_one(n), g).empty())
    throw CodeError(CodeError::Kind::not_a_divisor, "make_cyclic: generator does not divide x^n + 1");
  const std::size_t r = static_cast<std::size_t>(deg);
  const std::size_t k = n - r;
  BitMatrix p_block(k, r);
  for (std::size_t i = 0; i < k; ++i) {
    poly::Poly mono(n - i, 0);
    mono.back() = 1;  // x^(n-1-i)
    const poly::Poly rem = poly::mod(mono, g);
    for (std::size_t t = 0; t < rem.size(); ++t)
      if (rem[t] != 0) p_block.set(i, n - 1 - t - k, true);
  }
  CodeSpec code = make_systematic(p_block, "cyclic(" + std::to_string(n) + "," + std::to_string(k) + ")");
  code.generator_poly = poly::to_string(g);
  return code;
}

inline CodeSpec make_cyclic(std::size_t n, std::string_view generator_bits) {
  return make_cyclic(n, poly::from_string(generator_bits));
}

/// Builds a systematic CodeSpec around an arbitrary full-rank parity matrix,
/// permuting columns so that the last n-k positions are information-free.
inline CodeSpec systematize(const BitMatrix& h, std::string name) {
  const std::size_t m = h.rows();
  const std::size_t n = h.cols();
  if (m == 0 || m >= n) throw CodeError(CodeError::Kind::malformed, "systematize: need 0 < rows < cols");
  const gf2::PivotState red = gf2::gjetp_reduce(h);
  if (red.rank() != m) throw CodeError(CodeError::Kind::rank_deficient, "parity-check matrix is rank deficient");

  // Keep the identity order when the trailing block is already invertible.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (gf2::rank_of(h.column_range(n - m, m)) != m) {
    std::vector<bool> is_pivot(n, false);
    for (auto c : red.pivot_cols) is_pivot[c] = true;
    order.clear();
    for (std::size_t c = 0; c < n; ++c)
      if (!is_pivot[c]) order.push_back(c);
    for (auto c : red.pivot_cols) order.push_back(c);
  }

  const std::size_t k = n - m;
  const BitMatrix hp = h.select_columns(order);
  const BitMatrix b_inv = gf2::gjetp_reduce(hp.column_range(k, m)).transition;
  const BitMatrix pt = gf2::mat_mul(b_inv, hp.column_range(0, k));  // (n-k) x k

  CodeSpec code = make_systematic(pt.transpose(), std::move(name));
  code.parity = hp;
  code.column_order = std::move(order);
  return code;
}

// ---------------------------------------------------------------------------
// alist

namespace detail {

inline std::vector<long> parse_line_numbers(const std::string& line) {
  std::istringstream is(line);
  std::vector<long> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CodeError(CodeError::Kind::malformed, "alist: non-numeric token '" + tok + "'");
    }
  }
  return out;
}

}  // namespace detail

/// Parses an alist description: "n m", max degrees, column degrees, row
/// degrees, then n column lists and m row lists of 1-based indexes. Lists may
/// be zero-padded past their declared degree.
inline BitMatrix parse_alist(std::string_view text) {
  std::vector<std::vector<long>> lines;
  {
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
      auto nums = detail::parse_line_numbers(line);
      if (!nums.empty()) lines.push_back(std::move(nums));
    }
  }
  using K = CodeError::Kind;
  if (lines.size() < 4) throw CodeError(K::malformed, "alist: missing header lines");
  if (lines[0].size() != 2 || lines[1].size() != 2) throw CodeError(K::malformed, "alist: header must hold two counts");
  const long n = lines[0][0];
  const long m = lines[0][1];
  if (n <= 0 || m <= 0) throw CodeError(K::malformed, "alist: counts must be positive");
  const auto un = static_cast<std::size_t>(n);
  const auto um = static_cast<std::size_t>(m);
  if (lines.size() != 4 + un + um) throw CodeError(K::malformed, "alist: wrong number of adjacency lines");
  const auto& col_deg = lines[2];
  const auto& row_deg = lines[3];
  if (col_deg.size() != un || row_deg.size() != um) throw CodeError(K::malformed, "alist: degree list length mismatch");

  auto read_list = [&](const std::vector<long>& entries, long degree, long max_degree, long limit) {
    if (degree < 0 || degree > max_degree) throw CodeError(K::malformed, "alist: degree exceeds declared maximum");
    if (static_cast<long>(entries.size()) < degree) throw CodeError(K::malformed, "alist: adjacency list shorter than degree");
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < entries.size(); ++t) {
      const long v = entries[t];
      if (static_cast<long>(t) < degree) {
        if (v < 1 || v > limit) throw CodeError(K::index_out_of_range, "alist: index " + std::to_string(v) + " out of range");
        out.push_back(static_cast<std::size_t>(v - 1));
      } else if (v != 0) {
        throw CodeError(K::malformed, "alist: adjacency list longer than degree");
      }
    }
    return out;
  };

  BitMatrix h(um, un);
  for (std::size_t c = 0; c < un; ++c)
    for (auto r : read_list(lines[4 + c], col_deg[c], lines[1][0], m)) {
      if (h.get(r, c)) throw CodeError(K::malformed, "alist: repeated index in column list");
      h.set(r, c, true);
    }
  BitMatrix check(um, un);
  for (std::size_t r = 0; r < um; ++r)
    for (auto c : read_list(lines[4 + un + r], row_deg[r], lines[1][1], n)) check.set(r, c, true);
  if (!(check == h)) throw CodeError(K::malformed, "alist: row and column lists disagree");
  return h;
}

inline std::string write_alist(const BitMatrix& h) {
  const std::size_t m = h.rows();
  const std::size_t n = h.cols();
  std::vector<std::vector<std::size_t>> cols(n), rows(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (h.get(r, c)) {
        rows[r].push_back(c + 1);
        cols[c].push_back(r + 1);
      }
  auto max_size = [](const auto& lists) {
    std::size_t mx = 0;
    for (const auto& l : lists) mx = std::max(mx, l.size());
    return mx;
  };
  auto join = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != 0) s += ' ';
      s += std::to_string(v[i]);
    }
    return s + '\n';
  };
  std::string out = std::to_string(n) + ' ' + std::to_string(m) + '\n';
  out += std::to_string(max_size(cols)) + ' ' + std::to_string(max_size(rows)) + '\n';
  std::vector<std::size_t> deg;
  for (const auto& c : cols) deg.push_back(c.size());
  out += join(deg);
  deg.clear();
  for (const auto& r : rows) deg.push_back(r.size());
  out += join(deg);
  for (const auto& c : cols) out += join(c);
  for (const auto& r : rows) out += join(r);
  return out;
}

inline CodeSpec load_alist(std::string_view text, std::string name = "alist") {
  return systematize(parse_alist(text), std::move(name));
}

/// Parity matrix in the source column order.
inline BitMatrix source_parity(const CodeSpec& code) {
  BitMatrix h(code.parity.rows(), code.n);
  for (std::size_t r = 0; r < h.rows(); ++r)
    for (std::size_t p = 0; p < code.n; ++p)
      if (code.parity.get(r, p)) h.set(r, code.column_order[p], true);
  return h;
}

inline std::string to_alist(const CodeSpec& code) { return write_alist(source_parity(code)); }

// ---------------------------------------------------------------------------

inline BitMatrix encode(const BitMatrix& messages, const CodeSpec& code) {
  if (messages.cols() != code.k) throw std::invalid_argument("encode: message length does not match k");
  return gf2::mat_mul(messages, code.generator);
}

/// True iff h is orthogonal to every generator row.
inline bool is_dual_word(const BitVector& h, const CodeSpec& code) {
  if (h.size() != code.n) throw std::invalid_argument("is_dual_word: length mismatch");
  for (std::size_t i = 0; i < code.k; ++i)
    if (gf2::dot(code.generator.row(i), h.words())) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Fixture files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodeError(CodeError::Kind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses the ".cyclic" fixture format: '#' comments, then "n <length>" and
/// "generator <coefficients, lowest degree first>".
inline CodeSpec parse_cyclic_fixture(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t n = 0;
  std::string gen;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    ls >> key >> value;
    if (key == "n") {
      n = std::stoul(value);
    } else if (key == "generator") {
      gen = value;
    } else if (!key.empty()) {
      throw CodeError(CodeError::Kind::malformed, "cyclic fixture: unknown key '" + key + "'");
    }
  }
  if (n == 0 || gen.empty()) throw CodeError(CodeError::Kind::malformed, "cyclic fixture: need n and generator");
  return make_cyclic(n, gen);
}

/// Loads a fixture by file extension (.alist or .cyclic).
inline CodeSpec load_fixture(const std::string& path) {
  const std::string text = read_file(path);
  const auto slash = path.find_last_of('/');
  std::string stem = path.substr(slash == std::string::npos ? 0 : slash + 1);
  const auto dot = stem.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : stem.substr(dot);
  stem = stem.substr(0, dot);
  if (ext == ".alist") return load_alist(text, stem);
  if (ext == ".cyclic") {
    CodeSpec c = parse_cyclic_fixture(text);
    c.name = stem;
    return c;
  }
  throw CodeError(CodeError::Kind::io, "unknown fixture type: " + path);
}

}  // namespace blindrec::codebook
