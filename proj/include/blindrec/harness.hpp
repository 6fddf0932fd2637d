#pragma once

// Seeded Monte Carlo driver: scenario files, per-trial simulation, scoring
// against ground truth, and CSV output.
//
// Per-trial randomness is derived from (master_seed, noise_index,
// trial_index, purpose), so every algorithm in a scenario sees the same
// messages and noise for a given trial, and results do not depend on the
// number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "blindrec/baselines.hpp"
#include "blindrec/channel.hpp"
#include "blindrec/codebook.hpp"
#include "blindrec/decode.hpp"
#include "blindrec/detect.hpp"
#include "blindrec/gf2.hpp"
#include "blindrec/recovery.hpp"
#include "blindrec/rng.hpp"

namespace blindrec::harness {

using gf2::BitMatrix;
using gf2::BitVector;

enum class Algorithm { gev, dar, edcsdar, bfs, cc, rcc, yu };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gev: return "gev";
    case Algorithm::dar: return "dar";
    case Algorithm::edcsdar: return "edcsdar";
    case Algorithm::bfs: return "bfs";
    case Algorithm::cc: return "cc";
    case Algorithm::rcc: return "rcc";
    case Algorithm::yu: return "yu";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::gev, Algorithm::dar, Algorithm::edcsdar, Algorithm::bfs, Algorithm::cc, Algorithm::rcc,
                      Algorithm::yu})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct AlgorithmSpec {
  std::string label;
  Algorithm kind = Algorithm::gev;
  /// The algorithm is told sigma^2 times this factor.
  double sigma2_scale = 1.0;
  std::size_t n_ge = 1;
  std::size_t n_iter = 5;
  std::size_t bp_iters = 20;
  detect::DetectConfig detect{};
  baselines::CcConfig cc{};
  baselines::YuConfig yu{};

  [[nodiscard]] std::size_t iterations() const {
    return kind == Algorithm::dar || kind == Algorithm::edcsdar ? n_iter : 1;
  }
};

struct NoisePoint {
  double pe;
  double sigma2;
};

inline NoisePoint from_sigma2(double sigma2) { return {channel::crossover_probability(sigma2), sigma2}; }
inline NoisePoint from_pe(double pe) { return {pe, channel::sigma2_for_crossover(pe)}; }

struct Scenario {
  std::string name;
  std::string code;
  std::vector<NoisePoint> noise;
  std::size_t m_rows = 0;
  std::size_t trials = 1;
  std::uint64_t master_seed = 1;
  std::vector<AlgorithmSpec> algorithms;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("scenario: trials must be at least 1");
    if (m_rows < 1) throw std::invalid_argument("scenario: m_rows must be at least 1");
    if (noise.empty()) throw std::invalid_argument("scenario: no noise points");
    if (algorithms.empty()) throw std::invalid_argument("scenario: no algorithms");
  }
};

// ---------------------------------------------------------------------------
// Scenario files

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline AlgorithmSpec parse_algorithm_spec(const nlohmann::json& j) {
  AlgorithmSpec a;
  a.kind = parse_algorithm(j.at("algorithm").get<std::string>());
  a.label = to_string(a.kind);
  read_opt(j, "label", a.label);
  read_opt(j, "sigma2_scale", a.sigma2_scale);
  read_opt(j, "n_ge", a.n_ge);
  read_opt(j, "n_iter", a.n_iter);
  read_opt(j, "bp_iters", a.bp_iters);
  if (j.contains("detect")) {
    const auto& d = j.at("detect");
    read_opt(d, "t1", a.detect.t1);
    read_opt(d, "t2", a.detect.t2);
    read_opt(d, "target_clean", a.detect.target_clean);
    read_opt(d, "adaptive", a.detect.adaptive);
  }
  a.cc.n_ge = a.n_ge;
  if (j.contains("cc")) {
    const auto& c = j.at("cc");
    read_opt(c, "p", a.cc.p);
    read_opt(c, "l", a.cc.l);
  }
  if (j.contains("yu")) {
    const auto& y = j.at("yu");
    read_opt(y, "m_c", a.yu.m_c);
    read_opt(y, "n_c1", a.yu.n_c1);
    read_opt(y, "n_c2", a.yu.n_c2);
    read_opt(y, "p", a.yu.p);
    read_opt(y, "max_weight", a.yu.max_weight);
  }
  if (!(a.sigma2_scale > 0.0)) throw std::invalid_argument("scenario: sigma2_scale must be positive");
  return a;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  Scenario s;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  try {
    s.name = j.value("name", std::string("scenario"));
    s.code = j.at("code").get<std::string>();
    s.m_rows = j.at("m_rows").get<std::size_t>();
    detail::read_opt(j, "trials", s.trials);
    detail::read_opt(j, "master_seed", s.master_seed);
    if (j.contains("sigma2") == j.contains("pe")) throw std::invalid_argument("scenario: give exactly one of sigma2, pe");
    if (j.contains("sigma2"))
      for (double v : j.at("sigma2").get<std::vector<double>>()) s.noise.push_back(from_sigma2(v));
    else
      for (double v : j.at("pe").get<std::vector<double>>()) s.noise.push_back(from_pe(v));
    if (j.contains("algorithms")) {
      for (const auto& a : j.at("algorithms")) s.algorithms.push_back(detail::parse_algorithm_spec(a));
    } else {
      s.algorithms.push_back(detail::parse_algorithm_spec(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(codebook::read_file(path)); }

#ifdef BLINDREC_FIXTURE_DIR
inline constexpr const char* kDefaultFixtureDir = BLINDREC_FIXTURE_DIR;
#else
inline constexpr const char* kDefaultFixtureDir = "fixtures";
#endif

/// A path to a fixture file, or a bare fixture name looked up as
/// <dir>/<name>.alist or <dir>/<name>.cyclic.
inline std::filesystem::path resolve_fixture(const std::string& code, const std::filesystem::path& dir = kDefaultFixtureDir) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(code)) return code;
  for (const char* ext : {".alist", ".cyclic"}) {
    const fs::path p = dir / (code + ext);
    if (fs::is_regular_file(p)) return p;
  }
  throw codebook::CodeError(codebook::CodeError::Kind::io, "fixture not found: " + code);
}

// ---------------------------------------------------------------------------
// Scoring

enum class FailureReason { incomplete_table, false_dual_word, start_failure };

inline std::string to_string(FailureReason r) {
  switch (r) {
    case FailureReason::incomplete_table: return "incomplete_table";
    case FailureReason::false_dual_word: return "false_dual_word";
    case FailureReason::start_failure: return "start_failure";
  }
  return "?";
}

struct Score {
  bool success = false;
  std::optional<FailureReason> failure{};
  /// Rank of the true dual words among the returned words, capped at n-k.
  std::size_t recovered_count = 0;
  std::size_t false_words = 0;
};

/// Success iff n-k independent words were returned and all are dual words.
inline Score score_words(std::span<const BitVector> words, const codebook::CodeSpec& code, bool start_failure) {
  const std::size_t r = code.redundancy();
  Score s;
  gf2::EchelonTracker all(code.n, r);
  gf2::EchelonTracker good(code.n, r);
  std::size_t independent = 0;
  for (const BitVector& h : words) {
    const bool dual = codebook::is_dual_word(h, code);
    if (!dual) ++s.false_words;
    if (independent < r && all.try_insert(h)) ++independent;
    if (dual && s.recovered_count < r && good.try_insert(h)) ++s.recovered_count;
  }
  s.success = independent == r && s.false_words == 0;
  if (!s.success) {
    if (start_failure) {
      s.failure = FailureReason::start_failure;
    } else if (s.false_words > 0) {
      s.failure = FailureReason::false_dual_word;
    } else {
      s.failure = FailureReason::incomplete_table;
    }
  }
  return s;
}

inline std::vector<BitVector> rows_of(const BitMatrix& m) {
  std::vector<BitVector> v;
  v.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v.push_back(m.row_vector(i));
  return v;
}

// ---------------------------------------------------------------------------
// Trials

struct IterationScore {
  Score score;
  double elapsed_ms = 0.0;
};

struct TrialResult {
  bool success = false;
  std::optional<FailureReason> failure_reason{};
  std::size_t recovered_count = 0;
  double wall_ms = 0.0;
  /// One entry per outer iteration (a single entry for one-shot algorithms).
  std::vector<IterationScore> iterations;
};

enum class Purpose : std::uint64_t { messages = 0, noise = 1, algorithm = 2 };

/// Observations for one trial, shared by every algorithm of a scenario.
struct TrialData {
  channel::SoftBlock soft;
  BitMatrix hard;
};

inline TrialData simulate(const codebook::CodeSpec& code, std::size_t m_rows, double sigma2, std::uint64_t master,
                          std::size_t noise_index, std::size_t trial_index) {
  Rng msg_rng = make_rng(master, {noise_index, trial_index, static_cast<std::uint64_t>(Purpose::messages)});
  const BitMatrix messages = BitMatrix::random(m_rows, code.k, msg_rng);
  const BitMatrix codewords = codebook::encode(messages, code);
  channel::SoftBlock soft = channel::transmit(
      codewords, channel::ChannelModel(sigma2),
      derive_seed(master, {noise_index, trial_index, static_cast<std::uint64_t>(Purpose::noise)}));
  BitMatrix hard = channel::hard_decision(soft);
  return {std::move(soft), std::move(hard)};
}

/// Runs one algorithm on prepared observations. Only the observations and the
/// assumed noise level reach the algorithm; `code` is used for scoring.
inline TrialResult run_algorithm(const AlgorithmSpec& spec, const TrialData& data, const codebook::CodeSpec& code,
                                 std::uint64_t seed) {
  Rng rng(seed);
  const double assumed_sigma2 = data.soft.model.sigma2() * spec.sigma2_scale;
  const channel::ChannelModel assumed(assumed_sigma2);
  const double pe = assumed.pe();
  const std::size_t n = code.n;
  const std::size_t k = code.k;

  recovery::GevConfig gev{};
  gev.n = n;
  gev.k = k;
  gev.n_ge = spec.n_ge;
  gev.sigma2 = assumed_sigma2;
  gev.m_rows = data.hard.rows();

  TrialResult out;
  auto finish_iterations = [&](const std::vector<std::vector<BitVector>>& snapshots, const std::vector<double>& times,
                               bool start_failure, double wall) {
    for (std::size_t i = 0; i < spec.iterations(); ++i) {
      const std::size_t at = std::min(i, snapshots.size() - 1);
      out.iterations.push_back({score_words(snapshots[at], code, start_failure), times[at]});
    }
    const Score& last = out.iterations.back().score;
    out.success = last.success;
    out.failure_reason = last.failure;
    out.recovered_count = last.recovered_count;
    out.wall_ms = wall;
  };

  switch (spec.kind) {
    case Algorithm::gev: {
      const auto rep = recovery::gev_recover(data.hard, gev, rng);
      finish_iterations({rows_of(rep.recovered_h)}, {rep.wall_ms}, rep.start_failure, rep.wall_ms);
      break;
    }
    case Algorithm::dar:
    case Algorithm::edcsdar: {
      decode::DarConfig dc;
      dc.gev = gev;
      dc.n_iter = spec.n_iter;
      dc.bp_iters = spec.bp_iters;
      const channel::SoftBlock told{data.soft.values, assumed};
      recovery::RecoveryReport rep;
      if (spec.kind == Algorithm::dar) {
        rep = decode::dar_recover(told, dc, rng);
      } else {
        dc.detect = spec.detect;
        rep = decode::edcsdar_recover(told, dc, rng);
      }
      std::vector<std::vector<BitVector>> snaps;
      std::vector<double> times;
      for (const auto& it : rep.iterations) {
        snaps.push_back(rows_of(it.words));
        times.push_back(it.elapsed_ms);
      }
      finish_iterations(snaps, times, rep.start_failure, rep.wall_ms);
      break;
    }
    case Algorithm::bfs:
    case Algorithm::cc:
    case Algorithm::rcc:
    case Algorithm::yu: {
      baselines::BaselineResult r;
      if (spec.kind == Algorithm::bfs) {
        r = baselines::bfs_recover(data.hard, pe);
      } else if (spec.kind == Algorithm::cc) {
        r = baselines::canteaut_chabaud(data.hard, pe, spec.cc, rng);
      } else if (spec.kind == Algorithm::rcc) {
        r = baselines::revised_canteaut_chabaud(data.hard, pe, spec.cc, rng);
      } else {
        r = baselines::yu_recover(data.hard, pe, spec.yu, rng);
      }
      finish_iterations({r.words}, {r.wall_ms}, r.start_failure, r.wall_ms);
      break;
    }
  }
  return out;
}

/// Scenario with its ground-truth code loaded once.
struct Prepared {
  Scenario scenario;
  codebook::CodeSpec code;
};

inline Prepared prepare(Scenario s, const std::filesystem::path& fixture_dir = kDefaultFixtureDir) {
  s.validate();
  codebook::CodeSpec code = codebook::load_fixture(resolve_fixture(s.code, fixture_dir).string());
  for (const auto& a : s.algorithms)
    if (a.kind == Algorithm::bfs && code.n > baselines::kBfsMaxLength)
      throw std::invalid_argument("scenario: bfs needs n <= " + std::to_string(baselines::kBfsMaxLength));
  return {std::move(s), std::move(code)};
}

/// Results of every algorithm on one (noise point, trial).
inline std::vector<TrialResult> run_trial_all(const Prepared& p, std::size_t noise_index, std::size_t trial_index) {
  const Scenario& s = p.scenario;
  const TrialData data = simulate(p.code, s.m_rows, s.noise.at(noise_index).sigma2, s.master_seed, noise_index, trial_index);
  // Every algorithm gets the same seed, so paired comparisons differ only in configuration.
  const std::uint64_t seed =
      derive_seed(s.master_seed, {noise_index, trial_index, static_cast<std::uint64_t>(Purpose::algorithm)});
  std::vector<TrialResult> out;
  for (const AlgorithmSpec& spec : s.algorithms) out.push_back(run_algorithm(spec, data, p.code, seed));
  return out;
}

/// First algorithm of the scenario at its first noise point.
inline TrialResult run_trial(const Prepared& p, std::size_t trial_index) { return run_trial_all(p, 0, trial_index).front(); }

// ---------------------------------------------------------------------------
// Monte Carlo

struct CurveRow {
  double pe = 0.0;
  double sigma2 = 0.0;
  std::string algorithm;
  std::size_t iteration = 1;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double failure_prob = 0.0;
  double mean_recovered_frac = 0.0;
  double median_ms = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

/// Runs `jobs` independent tasks on up to `threads` workers; task i writes
/// only slot i, so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t jobs, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, jobs));
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// All trial results indexed [noise][trial][algorithm].
using TrialGrid = std::vector<std::vector<std::vector<TrialResult>>>;

inline TrialGrid run_grid(const Prepared& p, std::size_t threads) {
  const Scenario& s = p.scenario;
  TrialGrid grid(s.noise.size(), std::vector<std::vector<TrialResult>>(s.trials));
  parallel_for(s.noise.size() * s.trials, threads, [&](std::size_t job) {
    const std::size_t ni = job / s.trials;
    const std::size_t ti = job % s.trials;
    grid[ni][ti] = run_trial_all(p, ni, ti);
  });
  return grid;
}

/// With `timing` off the median_ms column is written as 0, so the output
/// depends only on the scenario and its seed.
inline std::vector<CurveRow> summarize(const Prepared& p, const TrialGrid& grid, bool timing = true) {
  const Scenario& s = p.scenario;
  const double r = static_cast<double>(p.code.redundancy());
  std::vector<CurveRow> rows;
  for (std::size_t ni = 0; ni < s.noise.size(); ++ni) {
    for (std::size_t a = 0; a < s.algorithms.size(); ++a) {
      for (std::size_t it = 0; it < s.algorithms[a].iterations(); ++it) {
        CurveRow row{s.noise[ni].pe, s.noise[ni].sigma2, s.algorithms[a].label, it + 1, s.trials, 0, 0.0, 0.0, 0.0};
        std::vector<double> times;
        double frac = 0.0;
        for (std::size_t ti = 0; ti < s.trials; ++ti) {
          const IterationScore& sc = grid[ni][ti][a].iterations.at(it);
          if (!sc.score.success) ++row.failures;
          frac += static_cast<double>(sc.score.recovered_count) / r;
          times.push_back(sc.elapsed_ms);
        }
        row.failure_prob = static_cast<double>(row.failures) / static_cast<double>(s.trials);
        row.mean_recovered_frac = frac / static_cast<double>(s.trials);
        row.median_ms = timing ? median(std::move(times)) : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline std::vector<CurveRow> monte_carlo(const Prepared& p, std::size_t threads = 1, bool timing = true) {
  return summarize(p, run_grid(p, threads), timing);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader = "pe,sigma2,algorithm,iteration,trials,failures,failure_prob,mean_recovered_frac,median_ms";

inline void emit_csv(std::span<const CurveRow> rows, std::ostream& os) {
  os << kCsvHeader << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows)
    os << r.pe << ',' << r.sigma2 << ',' << r.algorithm << ',' << r.iteration << ',' << r.trials << ',' << r.failures << ','
       << r.failure_prob << ',' << r.mean_recovered_frac << ',' << r.median_ms << '\n';
}

inline void emit_csv(std::span<const CurveRow> rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(rows, f);
  if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline std::vector<CurveRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: unexpected header");
  std::vector<CurveRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw std::invalid_argument("parse_csv: expected 9 fields");
    rows.push_back({std::stod(f[0]), std::stod(f[1]), f[2], std::stoul(f[3]), std::stoul(f[4]), std::stoul(f[5]),
                    std::stod(f[6]), std::stod(f[7]), std::stod(f[8])});
  }
  return rows;
}

}  // namespace blindrec::harness
