#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "eda/selection.hpp"

using eda::EvaluatedGenome;
using eda::Genome;
using eda::Population;
using eda::RandomSource;
using eda::SelectionConfig;

namespace {

Population distinct_population(std::size_t n) {
  std::vector<EvaluatedGenome> m;
  for (std::size_t i = 0; i < n; ++i)
    m.push_back(EvaluatedGenome{Genome::ones(8), static_cast<double>(i)});
  return Population(std::move(m));
}

}  // namespace

TEST_CASE("pairing winners: max always selected, min never", "[selection]") {
  const Population pop = distinct_population(8);
  const SelectionConfig cfg;  // tournament 2, fraction 1/2
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomSource rng(seed);
    const Population sel = eda::tournament_select(pop, cfg, rng);
    REQUIRE(sel.size() == 4);
    bool has_max = false;
    for (const auto& m : sel.members()) {
      REQUIRE(m.fitness != 0.0);  // the weakest loses every pairing
      if (m.fitness == 7.0) has_max = true;
    }
    REQUIRE(has_max);  // the strongest wins every pairing
  }
}

TEST_CASE("one pass never reuses an individual", "[selection]") {
  const Population pop = distinct_population(12);
  RandomSource rng(5);
  const Population sel = eda::tournament_select(pop, SelectionConfig{2, 0.5}, rng);
  std::set<double> seen;
  for (const auto& m : sel.members()) REQUIRE(seen.insert(m.fitness).second);
}

TEST_CASE("selected mean dominates the population mean", "[selection]") {
  const Population pop = distinct_population(20);
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    RandomSource rng(seed);
    const Population sel = eda::tournament_select(pop, SelectionConfig{2, 0.5}, rng);
    REQUIRE(sel.mean_fitness() > pop.mean_fitness());
  }
}

TEST_CASE("full fraction runs two passes", "[selection]") {
  const Population pop = distinct_population(8);
  RandomSource rng(3);
  const Population sel = eda::tournament_select(pop, SelectionConfig{2, 1.0}, rng);
  REQUIRE(sel.size() == 8);
  std::size_t max_count = 0, min_count = 0;
  for (const auto& m : sel.members()) {
    if (m.fitness == 7.0) ++max_count;
    if (m.fitness == 0.0) ++min_count;
  }
  REQUIRE(max_count == 2);  // wins once per pass
  REQUIRE(min_count == 0);
}

TEST_CASE("exact ties are decided by a fair coin", "[selection]") {
  std::vector<EvaluatedGenome> m;
  m.push_back(EvaluatedGenome{Genome::zeros(4), 5.0});
  m.push_back(EvaluatedGenome{Genome::ones(4), 5.0});
  m.push_back(EvaluatedGenome{Genome(std::vector<std::uint8_t>{1, 0, 0, 0}), 5.0});
  m.push_back(EvaluatedGenome{Genome(std::vector<std::uint8_t>{0, 1, 0, 0}), 5.0});
  const Population pop(std::move(m));

  RandomSource rng(77);
  const int trials = 4000;
  int zeros_selected = 0;
  for (int t = 0; t < trials; ++t) {
    const Population sel = eda::tournament_select(pop, SelectionConfig{2, 0.5}, rng);
    for (const auto& s : sel.members())
      if (s.genome == Genome::zeros(4)) ++zeros_selected;
  }
  // Every member reaches exactly one tournament per pass and wins its coin
  // flip half the time.
  const double freq = static_cast<double>(zeros_selected) / trials;
  REQUIRE(freq > 0.46);
  REQUIRE(freq < 0.54);
}

TEST_CASE("fraction and population validation", "[selection]") {
  RandomSource rng(1);
  const Population pop10 = distinct_population(10);
  // 0.3 of 10 is an integral 3 parents.
  REQUIRE(eda::tournament_select(pop10, SelectionConfig{2, 0.3}, rng).size() == 3);
  REQUIRE_THROWS_AS(eda::tournament_select(pop10, SelectionConfig{2, 0.26}, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(eda::tournament_select(pop10, SelectionConfig{3, 0.5}, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(eda::tournament_select(pop10, SelectionConfig{2, 0.0}, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(eda::tournament_select(pop10, SelectionConfig{2, 1.5}, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(eda::tournament_select(distinct_population(7), SelectionConfig{2, 0.5}, rng),
                    std::invalid_argument);
  // Selecting fewer than 2 parents is rejected (0.1 of 10 would be 1).
  REQUIRE_THROWS_AS(eda::tournament_select(pop10, SelectionConfig{2, 0.1}, rng),
                    std::invalid_argument);
  std::vector<EvaluatedGenome> two{EvaluatedGenome{Genome::zeros(2), 0.0},
                                   EvaluatedGenome{Genome::ones(2), 1.0}};
  REQUIRE_THROWS_AS(eda::tournament_select(Population(std::move(two)), SelectionConfig{}, rng),
                    std::invalid_argument);
}
