#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <vector>

#include "eda/problems.hpp"

using eda::ConcatTrap;
using eda::Genome;
using eda::NkLandscape;
using eda::OneMax;

namespace {

Genome gen(std::initializer_list<int> bits) {
  std::vector<std::uint8_t> v;
  for (const int b : bits) v.push_back(static_cast<std::uint8_t>(b));
  return Genome(std::move(v));
}

}  // namespace

TEST_CASE("onemax counts ones", "[problems]") {
  const OneMax p(5);
  REQUIRE(p.length() == 5);
  REQUIRE(p.optimum() == 5.0);
  REQUIRE(p.fitness(Genome::zeros(5)) == 0.0);
  REQUIRE(p.fitness(Genome::ones(5)) == 5.0);
  REQUIRE(p.fitness(gen({1, 0, 1, 1, 0})) == 3.0);
  REQUIRE_THROWS_AS(p.fitness(Genome::zeros(4)), std::invalid_argument);
  REQUIRE_THROWS_AS(OneMax(0), std::invalid_argument);
}

TEST_CASE("trap block values by unitation", "[problems]") {
  // Frozen value tables: all-ones scores k, otherwise k - (ones + 1), so the
  // all-zeros block sits exactly one below the optimum.
  const double k5[6] = {4, 3, 2, 1, 0, 5};  // indexed by number of ones
  for (int u = 0; u <= 5; ++u) {
    std::vector<std::uint8_t> block(5, 0);
    std::fill(block.begin(), block.begin() + u, std::uint8_t{1});
    REQUIRE(eda::trap_block_fitness(block.data(), 5) == k5[u]);
    // Placement inside the block must not matter.
    std::reverse(block.begin(), block.end());
    REQUIRE(eda::trap_block_fitness(block.data(), 5) == k5[u]);
  }
  const double k4[5] = {3, 2, 1, 0, 4};
  for (int u = 0; u <= 4; ++u) {
    std::vector<std::uint8_t> block(4, 0);
    std::fill(block.begin(), block.begin() + u, std::uint8_t{1});
    REQUIRE(eda::trap_block_fitness(block.data(), 4) == k4[u]);
  }
}

TEST_CASE("concatenated traps sum independent blocks", "[problems]") {
  const ConcatTrap p(5, 2);
  REQUIRE(p.length() == 10);
  REQUIRE(p.optimum() == 10.0);
  REQUIRE(p.fitness(Genome::ones(10)) == 10.0);
  REQUIRE(p.fitness(Genome::zeros(10)) == 8.0);  // two all-zero blocks at 4 each
  // First block solved (5), second block has two ones (2).
  REQUIRE(p.fitness(gen({1, 1, 1, 1, 1, 0, 1, 0, 1, 0})) == 7.0);
  REQUIRE_THROWS_AS(eda::concat_trap_fitness(Genome::zeros(7), 5), std::invalid_argument);
  REQUIRE_THROWS_AS(ConcatTrap(0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(ConcatTrap(5, 0), std::invalid_argument);
}

TEST_CASE("nk fitness follows the component tables", "[problems]") {
  // n=3, k=1 with a hand-built landscape; table index is (x_i, neighbor)
  // big-endian.
  const NkLandscape inst(
      3, 1, 0,
      {{1}, {2}, {0}},
      {{0.0, 0.1, 0.2, 0.3}, {0.4, 0.5, 0.6, 0.7}, {0.8, 0.85, 0.9, 0.95}});
  // x = (1,0,1): component 0 reads (x0,x1)=(1,0) -> 0.2; component 1 reads
  // (x1,x2)=(0,1) -> 0.5; component 2 reads (x2,x0)=(1,1) -> 0.95.
  REQUIRE(inst.fitness(gen({1, 0, 1})) == Catch::Approx((0.2 + 0.5 + 0.95) / 3.0).epsilon(1e-14));
  REQUIRE(inst.fitness(gen({0, 0, 0})) == Catch::Approx((0.0 + 0.4 + 0.8) / 3.0).epsilon(1e-14));
}

TEST_CASE("nk generation is valid and deterministic", "[problems]") {
  const auto a = NkLandscape::generate(10, 3, 42);
  const auto b = NkLandscape::generate(10, 3, 42);
  const auto c = NkLandscape::generate(10, 3, 43);
  REQUIRE(a.length() == 10);
  REQUIRE(a.k() == 3);
  bool any_diff = false;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& nb = a.neighbors(i);
    REQUIRE(nb.size() == 3);
    for (std::size_t x = 0; x < nb.size(); ++x) {
      REQUIRE(nb[x] < 10);
      REQUIRE(nb[x] != i);
      for (std::size_t y = x + 1; y < nb.size(); ++y) REQUIRE(nb[x] != nb[y]);
    }
    REQUIRE(a.table(i).size() == 16);
    for (const double t : a.table(i)) {
      REQUIRE(t >= 0.0);
      REQUIRE(t < 1.0);
    }
    REQUIRE(a.neighbors(i) == b.neighbors(i));
    REQUIRE(a.table(i) == b.table(i));
    if (a.table(i) != c.table(i)) any_diff = true;
  }
  REQUIRE(any_diff);
  REQUIRE_THROWS_AS(NkLandscape::generate(5, 5, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(NkLandscape::generate(0, 0, 1), std::invalid_argument);
}

TEST_CASE("nk serialization round-trips exactly", "[problems]") {
  const auto inst = NkLandscape::generate(8, 2, 7);
  std::stringstream ss;
  inst.save(ss);
  const auto loaded = NkLandscape::load(ss);
  REQUIRE(loaded.length() == 8);
  REQUIRE(loaded.k() == 2);
  REQUIRE(loaded.seed() == 7);
  for (std::size_t i = 0; i < 8; ++i) {
    REQUIRE(loaded.neighbors(i) == inst.neighbors(i));
    REQUIRE(loaded.table(i) == inst.table(i));  // bit-exact via 17 digits
  }
  eda::RandomSource rng(3);
  for (int t = 0; t < 20; ++t) {
    const Genome g = eda::random_genome(8, rng);
    REQUIRE(inst.fitness(g) == loaded.fitness(g));
  }

  std::stringstream bad("XX 3 1 0\n");
  REQUIRE_THROWS(NkLandscape::load(bad));
}

TEST_CASE("nk brute force matches independent enumeration", "[problems]") {
  const auto inst = NkLandscape::generate(12, 2, 3);
  const auto opt = eda::nk_brute_force_optimum(inst);

  // Independent enumeration in the opposite bit order, collecting every
  // maximizer and taking the lexicographically smallest.
  const std::size_t n = inst.length();
  double best = -1.0;
  std::vector<std::vector<std::uint8_t>> argmax;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i)
      bits[i] = static_cast<std::uint8_t>((v >> (n - 1 - i)) & 1u);
    const double f = inst.fitness(Genome(bits));
    if (f > best) {
      best = f;
      argmax.assign(1, bits);
    } else if (f == best) {
      argmax.push_back(bits);
    }
  }
  std::sort(argmax.begin(), argmax.end());
  REQUIRE(opt.fitness == best);
  REQUIRE(opt.genome.bits() == argmax.front());
}

TEST_CASE("nk brute force resolves exact ties lexicographically", "[problems]") {
  // Symmetric hand-built landscape: (0,0) and (1,1) both score 0.6.
  const NkLandscape inst(
      2, 1, 0,
      {{1}, {0}},
      {{0.6, 0.2, 0.3, 0.6}, {0.6, 0.3, 0.2, 0.6}});
  const auto opt = eda::nk_brute_force_optimum(inst);
  REQUIRE(opt.fitness == 0.6);
  REQUIRE(opt.genome == Genome::zeros(2));
  REQUIRE_THROWS_AS(eda::nk_brute_force_optimum(NkLandscape::generate(25, 2, 1)),
                    std::invalid_argument);
}
