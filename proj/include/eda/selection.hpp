#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bitstring.hpp"
#include "random.hpp"

namespace eda {

struct SelectionConfig {
  std::size_t tournament_size = 2;  // fixed at 2
  double parent_fraction = 0.5;
};

/// Tournament selection without replacement, tournament size 2. Each pass
/// shuffles the population uniformly, pairs consecutive members, and keeps
/// the higher-fitness member of each pair (ties decided by a fair coin), so
/// no individual enters two tournaments within a pass. With the default
/// parent fraction 1/2 a single pass yields exactly |P|/2 parents.
inline Population tournament_select(const Population& pop, const SelectionConfig& cfg,
                                    RandomSource& rng) {
  if (cfg.tournament_size != 2)
    throw std::invalid_argument("tournament_select: tournament size is fixed at 2");
  if (pop.size() < 4 || pop.size() % 2 != 0)
    throw std::invalid_argument("tournament_select: population size must be even and at least 4");
  if (!(cfg.parent_fraction > 0.0 && cfg.parent_fraction <= 1.0))
    throw std::invalid_argument("tournament_select: parent_fraction must be in (0,1]");

  const double want = cfg.parent_fraction * static_cast<double>(pop.size());
  const auto count = static_cast<std::size_t>(std::llround(want));
  if (std::abs(want - static_cast<double>(count)) > 1e-9)
    throw std::invalid_argument("tournament_select: parent_fraction * |pop| must be integral");
  if (count < 2) throw std::invalid_argument("tournament_select: must select at least 2 parents");

  std::vector<EvaluatedGenome> selected;
  selected.reserve(count);
  std::vector<std::size_t> order(pop.size());
  while (selected.size() < count) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t t = 0; t + 1 < order.size() && selected.size() < count; t += 2) {
      const auto& a = pop[order[t]];
      const auto& b = pop[order[t + 1]];
      if (a.fitness > b.fitness)
        selected.push_back(a);
      else if (b.fitness > a.fitness)
        selected.push_back(b);
      else
        selected.push_back(rng.bernoulli(0.5) ? a : b);
    }
  }
  return Population(std::move(selected));
}

}  // namespace eda
