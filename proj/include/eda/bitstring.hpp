#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "random.hpp"

namespace eda {

/// Fixed-length binary string. Every element is exactly 0 or 1; the length
/// is immutable after construction.
class Genome {
public:
  Genome() = default;

  explicit Genome(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw std::invalid_argument("Genome: length must be positive");
    for (const auto b : bits_)
      if (b > 1) throw std::invalid_argument("Genome: elements must be 0 or 1");
  }

  static Genome zeros(std::size_t n) { return Genome(std::vector<std::uint8_t>(checked(n), 0)); }
  static Genome ones(std::size_t n) { return Genome(std::vector<std::uint8_t>(checked(n), 1)); }

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const Genome&, const Genome&) = default;

  /// Lexicographic order on the bit sequence (position 0 first).
  friend bool operator<(const Genome& a, const Genome& b) {
    return std::lexicographical_compare(a.bits_.begin(), a.bits_.end(),
                                        b.bits_.begin(), b.bits_.end());
  }

private:
  static std::size_t checked(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Genome: length must be positive");
    return n;
  }

  std::vector<std::uint8_t> bits_;
};

inline std::size_t hamming_distance(const Genome& a, const Genome& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

inline Genome random_genome(std::size_t n, RandomSource& rng) {
  if (n == 0) throw std::invalid_argument("random_genome: length must be positive");
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
  return Genome(std::move(bits));
}

inline std::vector<Genome> random_genomes(std::size_t n, std::size_t count, RandomSource& rng) {
  if (count == 0) throw std::invalid_argument("random_genomes: count must be positive");
  std::vector<Genome> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_genome(n, rng));
  return out;
}

/// Genome plus its cached fitness. The fitness is filled in exactly once by
/// whoever evaluates the genome; genomes are immutable so it never goes stale.
struct EvaluatedGenome {
  Genome genome;
  double fitness = 0.0;
};

/// Non-empty collection of evaluated genomes sharing one genome length.
class Population {
public:
  explicit Population(std::vector<EvaluatedGenome> members) : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("Population: must be non-empty");
    const std::size_t n = members_.front().genome.size();
    for (const auto& m : members_)
      if (m.genome.size() != n)
        throw std::invalid_argument("Population: members must share one genome length");
  }

  std::size_t size() const { return members_.size(); }
  std::size_t genome_length() const { return members_.front().genome.size(); }
  const std::vector<EvaluatedGenome>& members() const { return members_; }
  const EvaluatedGenome& operator[](std::size_t i) const { return members_[i]; }

  /// Highest-fitness member (first such member on ties).
  const EvaluatedGenome& best() const {
    std::size_t bi = 0;
    for (std::size_t i = 1; i < members_.size(); ++i)
      if (members_[i].fitness > members_[bi].fitness) bi = i;
    return members_[bi];
  }

  double mean_fitness() const {
    double s = 0.0;
    for (const auto& m : members_) s += m.fitness;
    return s / static_cast<double>(members_.size());
  }

private:
  std::vector<EvaluatedGenome> members_;
};

/// Uniform random population evaluated with the caller's fitness function.
template <class Fitness>
Population random_population(std::size_t n, std::size_t size, Fitness&& fitness,
                             RandomSource& rng) {
  auto genomes = random_genomes(n, size, rng);
  std::vector<EvaluatedGenome> members;
  members.reserve(genomes.size());
  for (auto& g : genomes) {
    const double f = fitness(g);
    members.push_back(EvaluatedGenome{std::move(g), f});
  }
  return Population(std::move(members));
}

}  // namespace eda
