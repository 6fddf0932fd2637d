// Writes the fixture files under fixtures/: cyclic codes as generator
// polynomials and the 802.11n n = 648 LDPC codes expanded from their base
// matrices (Z = 27) into alist form.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blindrec/codebook.hpp"

namespace {

using blindrec::gf2::BitMatrix;

constexpr std::size_t kLift = 27;
constexpr std::size_t kBaseCols = 24;

// Entry -1 is the zero block; s >= 0 is the identity cyclically shifted right by s.
constexpr std::array<std::array<int, kBaseCols>, 12> kRateHalf{{
    {0, -1, -1, -1, 0, 0, -1, -1, 0, -1, -1, 0, 1, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {22, 0, -1, -1, 17, -1, 0, 0, 12, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {6, -1, 0, -1, 10, -1, -1, -1, 24, -1, 0, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, -1, -1, 0, 20, -1, -1, -1, 25, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1},
    {23, -1, -1, -1, 3, -1, -1, -1, 0, -1, 9, 11, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1},
    {24, -1, 23, 1, 17, -1, 3, -1, 10, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1},
    {25, -1, -1, -1, 8, -1, -1, -1, 7, 18, -1, -1, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1},
    {13, 24, -1, -1, 0, -1, 8, -1, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1},
    {7, 20, -1, 16, 22, 10, -1, -1, 23, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1},
    {11, -1, -1, -1, 19, -1, -1, -1, 13, -1, 3, 17, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1},
    {25, -1, 8, -1, 23, 18, -1, 14, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0},
    {3, -1, -1, -1, 16, -1, -1, 2, 25, 5, -1, -1, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0},
}};

constexpr std::array<std::array<int, kBaseCols>, 4> kRateFiveSixths{{
    {17, 13, 8, 21, 9, 3, 18, 12, 10, 0, 4, 15, 19, 2, 5, 10, 26, 19, 13, 13, 1, 0, -1, -1},
    {3, 12, 11, 14, 11, 25, 5, 18, 0, 9, 2, 26, 26, 10, 24, 7, 14, 20, 4, 2, -1, 0, 0, -1},
    {22, 16, 4, 3, 10, 21, 12, 5, 21, 14, 19, 5, -1, 8, 5, 18, 11, 5, 5, 15, 0, -1, 0, 0},
    {7, 7, 14, 14, 4, 16, 16, 24, 24, 10, 1, 7, 15, 6, 10, 26, 8, 18, 21, 14, 1, -1, -1, 0},
}};

template <std::size_t R>
BitMatrix expand(const std::array<std::array<int, kBaseCols>, R>& base) {
  BitMatrix h(R * kLift, kBaseCols * kLift);
  for (std::size_t bi = 0; bi < R; ++bi)
    for (std::size_t bj = 0; bj < kBaseCols; ++bj) {
      const int s = base[bi][bj];
      if (s < 0) continue;
      for (std::size_t r = 0; r < kLift; ++r) h.set(bi * kLift + r, bj * kLift + (r + static_cast<std::size_t>(s)) % kLift, true);
    }
  return h;
}

struct CyclicFixture {
  const char* name;
  const char* comment;
  std::size_t n;
  std::string generator;  // coefficients, lowest degree first
};

std::string sparse_poly(std::size_t degree, std::initializer_list<std::size_t> powers) {
  std::string g(degree + 1, '0');
  for (auto p : powers) g[p] = '1';
  return g;
}

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  std::cout << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate code fixtures"};
  std::string out_dir = "fixtures";
  app.add_option("-o,--out", out_dir, "Output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    const std::vector<CyclicFixture> cyclic{
        {"hamming_7_4", "(7,4) Hamming code, g(x) = 1 + x + x^3", 7, sparse_poly(3, {0, 1, 3})},
        {"hamming_31_26", "(31,26) Hamming code, g(x) = 1 + x^2 + x^5", 31, sparse_poly(5, {0, 2, 5})},
        {"bch_15_7", "(15,7) BCH code, g(x) = 1 + x^4 + x^6 + x^7 + x^8", 15, sparse_poly(8, {0, 4, 6, 7, 8})},
        {"cyclic_100_50",
         "(100,50) cyclic code, g(x) = 1 + x^50.\n"
         "# x^100 + 1 = (x + 1)^4 (x^4 + x^3 + x^2 + x + 1)^4 Phi_25(x)^4 with deg Phi_25 = 20,\n"
         "# so 1 + x^50 is its only divisor of degree 50.",
         100, sparse_poly(50, {0, 50})},
    };
    for (const auto& c : cyclic) {
      blindrec::codebook::make_cyclic(c.n, c.generator);
      write(dir / (std::string(c.name) + ".cyclic"),
            std::string("# ") + c.comment + "\nn " + std::to_string(c.n) + "\ngenerator " + c.generator + "\n");
    }

    const auto hamming = blindrec::codebook::make_cyclic(7, cyclic.front().generator);
    write(dir / "hamming_7_4_h.alist", blindrec::codebook::write_alist(hamming.parity));

    const BitMatrix half = expand(kRateHalf);
    const BitMatrix five_sixths = expand(kRateFiveSixths);
    for (const auto& [name, h] : {std::pair{"wifi_648_r12", &half}, std::pair{"wifi_648_r56", &five_sixths}}) {
      const auto code = blindrec::codebook::load_alist(blindrec::codebook::write_alist(*h), name);
      std::cout << name << ": n=" << code.n << " k=" << code.k << '\n';
      write(dir / (std::string(name) + ".alist"), blindrec::codebook::write_alist(*h));
    }
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
