// Command-line front end: run scenario files, list them, check fixtures.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "blindrec/blindrec.hpp"

namespace fs = std::filesystem;
using namespace blindrec;

namespace {

#ifdef BLINDREC_SCENARIO_DIR
constexpr const char* kScenarioDir = BLINDREC_SCENARIO_DIR;
#else
constexpr const char* kScenarioDir = "scenarios";
#endif

std::vector<fs::path> files_with_ext(const fs::path& dir, std::initializer_list<const char*> exts) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (std::any_of(exts.begin(), exts.end(), [&](const char* x) { return ext == x; })) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int run(const std::string& file, const std::string& out, std::optional<std::uint64_t> seed, std::optional<std::size_t> trials,
        std::size_t threads, bool timing, const std::string& fixture_dir) {
  harness::Scenario s = harness::load_scenario(file);
  if (seed) s.master_seed = *seed;
  if (trials) s.trials = *trials;
  const harness::Prepared p = harness::prepare(std::move(s), fixture_dir);
  std::cerr << "scenario " << p.scenario.name << ": code " << p.code.name << " (" << p.code.n << "," << p.code.k << "), "
            << p.scenario.noise.size() << " noise points x " << p.scenario.trials << " trials, " << threads << " threads\n";
  const auto rows = harness::monte_carlo(p, threads, timing);
  if (out.empty()) {
    harness::emit_csv(rows, std::cout);
  } else {
    harness::emit_csv(rows, out);
    std::cerr << "wrote " << rows.size() << " rows to " << out << '\n';
  }
  return 0;
}

int list_scenarios(const std::string& dir) {
  for (const auto& path : files_with_ext(dir, {".json"})) {
    try {
      const auto s = harness::load_scenario(path.string());
      std::cout << path.filename().string() << "\t" << s.name << "\tcode=" << s.code << " M=" << s.m_rows
                << " trials=" << s.trials << " algorithms=";
      for (std::size_t i = 0; i < s.algorithms.size(); ++i) std::cout << (i ? "," : "") << s.algorithms[i].label;
      std::cout << '\n';
    } catch (const std::exception& e) {
      std::cout << path.filename().string() << "\tINVALID: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}

int verify_fixtures(const std::string& dir) {
  int bad = 0;
  for (const auto& path : files_with_ext(dir, {".alist", ".cyclic"})) {
    try {
      const auto code = codebook::load_fixture(path.string());
      const bool ok = gf2::rank_of(code.generator) == code.k && gf2::rank_of(code.parity) == code.n - code.k &&
                      gf2::mat_mul(code.parity, code.generator.transpose()).is_zero();
      std::cout << (ok ? "ok   " : "FAIL ") << path.filename().string() << "  n=" << code.n << " k=" << code.k << '\n';
      if (!ok) ++bad;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << path.filename().string() << "  " << e.what() << '\n';
      ++bad;
    }
  }
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind recovery of parity-check matrices from noisy observations"};
  app.require_subcommand(1);

  std::string fixture_dir = harness::kDefaultFixtureDir;
  app.add_option("--fixtures", fixture_dir, "Fixture directory");

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write failure-probability rows as CSV");
  std::string scenario_file;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  run_cmd->add_option("scenario", scenario_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "CSV output path (default: stdout)");
  run_cmd->add_option("--seed", seed, "Override the master seed");
  run_cmd->add_option("--trials", trials, "Override the trial count");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  bool no_timing = false;
  run_cmd->add_flag("--no-timing", no_timing, "Write 0 in median_ms so repeated runs give identical bytes");

  auto* list_cmd = app.add_subcommand("list-scenarios", "List scenario files");
  std::string scenario_dir = kScenarioDir;
  list_cmd->add_option("--dir", scenario_dir, "Scenario directory")->check(CLI::ExistingDirectory);

  auto* verify_cmd = app.add_subcommand("verify-fixtures", "Load every fixture and check its rank and H G^T = 0");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(scenario_file, out, seed, trials, threads, !no_timing, fixture_dir);
    if (*list_cmd) return list_scenarios(scenario_dir);
    if (*verify_cmd) return verify_fixtures(fixture_dir);
  } catch (const std::exception& e) {
    std::cerr << "recover: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
