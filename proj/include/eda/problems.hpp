#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitstring.hpp"
#include "random.hpp"

namespace eda {

/// A test problem exposes its genome length and a fitness to maximize.
template <class P>
concept Problem = requires(const P& p, const Genome& g) {
  { p.length() } -> std::convertible_to<std::size_t>;
  { p.fitness(g) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// onemax

class OneMax {
public:
  explicit OneMax(std::size_t l) : l_(l) {
    if (l == 0) throw std::invalid_argument("OneMax: length must be positive");
  }

  std::size_t length() const { return l_; }
  double optimum() const { return static_cast<double>(l_); }

  double fitness(const Genome& g) const {
    if (g.size() != l_) throw std::invalid_argument("OneMax: genome length mismatch");
    std::size_t ones = 0;
    for (std::size_t i = 0; i < l_; ++i) ones += g[i];
    return static_cast<double>(ones);
  }

private:
  std::size_t l_;
};

// ---------------------------------------------------------------------------
// concatenated deceptive traps

/// Fitness of one trap block of order k: k for the all-ones block, otherwise
/// k - (u + 1) where u is the number of ones. The all-zeros block scores
/// k - 1, one below the isolated optimum at all ones.
inline double trap_block_fitness(const std::uint8_t* block, std::size_t k) {
  std::size_t u = 0;
  for (std::size_t i = 0; i < k; ++i) u += block[i];
  if (u == k) return static_cast<double>(k);
  return static_cast<double>(k) - (static_cast<double>(u) + 1.0);
}

/// Sum of o independent trap blocks laid out contiguously.
inline double concat_trap_fitness(const Genome& g, std::size_t k) {
  if (k == 0) throw std::invalid_argument("concat_trap_fitness: k must be positive");
  if (g.size() % k != 0)
    throw std::invalid_argument("concat_trap_fitness: genome length not a multiple of k");
  double f = 0.0;
  const std::uint8_t* bits = g.bits().data();
  for (std::size_t b = 0; b < g.size(); b += k) f += trap_block_fitness(bits + b, k);
  return f;
}

class ConcatTrap {
public:
  ConcatTrap(std::size_t k, std::size_t blocks) : k_(k), blocks_(blocks) {
    if (k == 0) throw std::invalid_argument("ConcatTrap: k must be positive");
    if (blocks == 0) throw std::invalid_argument("ConcatTrap: block count must be positive");
  }

  std::size_t length() const { return k_ * blocks_; }
  std::size_t k() const { return k_; }
  std::size_t blocks() const { return blocks_; }
  double optimum() const { return static_cast<double>(k_ * blocks_); }

  double fitness(const Genome& g) const {
    if (g.size() != length()) throw std::invalid_argument("ConcatTrap: genome length mismatch");
    return concat_trap_fitness(g, k_);
  }

private:
  std::size_t k_, blocks_;
};

// ---------------------------------------------------------------------------
// NK landscapes

/// Random NK landscape: each variable i has k distinct neighbors (never i
/// itself) and a lookup table over the 2^(k+1) joint settings of
/// (x_i, neighbors), drawn uniformly from [0, 1). Fitness is the mean of the
/// per-variable table entries, so it always lies in [0, 1).
class NkLandscape {
public:
  NkLandscape(std::size_t n, std::size_t k, std::uint64_t seed,
              std::vector<std::vector<std::uint32_t>> neighbors,
              std::vector<std::vector<double>> tables)
      : n_(n), k_(k), seed_(seed), neighbors_(std::move(neighbors)), tables_(std::move(tables)) {
    validate();
  }

  /// Deterministic instance construction from (n, k, seed). Draw order per
  /// variable: neighbors first (partial Fisher-Yates over the candidate
  /// pool), then the 2^(k+1) table entries.
  static NkLandscape generate(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("NkLandscape: n must be positive");
    if (k + 1 > n) throw std::invalid_argument("NkLandscape: k must be at most n-1");
    RandomSource rng(seed);
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    std::vector<std::vector<double>> tables(n);
    const std::size_t rows = std::size_t{1} << (k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint32_t> pool;
      pool.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) pool.push_back(static_cast<std::uint32_t>(j));
      for (std::size_t a = 0; a < k; ++a) {
        const std::size_t j = a + static_cast<std::size_t>(rng.uniform_below(pool.size() - a));
        std::swap(pool[a], pool[j]);
      }
      neighbors[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      tables[i].resize(rows);
      for (auto& t : tables[i]) t = rng.uniform01();
    }
    return NkLandscape(n, k, seed, std::move(neighbors), std::move(tables));
  }

  std::size_t length() const { return n_; }
  std::size_t k() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint32_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  const std::vector<double>& table(std::size_t i) const { return tables_[i]; }

  double fitness(const Genome& g) const {
    if (g.size() != n_) throw std::invalid_argument("NkLandscape: genome length mismatch");
    return fitness_bits(g.bits().data());
  }

  /// Table index is the big-endian integer over (x_i, x_{n_1}, ..., x_{n_k}).
  double fitness_bits(const std::uint8_t* bits) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t idx = bits[i];
      for (const auto nb : neighbors_[i]) idx = (idx << 1) | bits[nb];
      acc += tables_[i][idx];
    }
    return acc / static_cast<double>(n_);
  }

  /// Serialized text form:
  ///   NK <n> <k> <seed>
  ///   i: n_1 ... n_k : t_0 ... t_{2^(k+1)-1}
  /// Table values carry 17 significant digits so they round-trip exactly.
  void save(std::ostream& os) const {
    os << "NK " << n_ << ' ' << k_ << ' ' << seed_ << '\n';
    char buf[40];
    for (std::size_t i = 0; i < n_; ++i) {
      os << i << ':';
      for (const auto nb : neighbors_[i]) os << ' ' << nb;
      os << " :";
      for (const auto t : tables_[i]) {
        std::snprintf(buf, sizeof buf, "%.17g", t);
        os << ' ' << buf;
      }
      os << '\n';
    }
  }

  static NkLandscape load(std::istream& is) {
    std::string tag;
    std::size_t n = 0, k = 0;
    std::uint64_t seed = 0;
    if (!(is >> tag >> n >> k >> seed) || tag != "NK")
      throw std::runtime_error("NkLandscape: bad header");
    {
      std::string rest;
      std::getline(is, rest);
    }
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    std::vector<std::vector<double>> tables(n);
    const std::size_t rows = std::size_t{1} << (k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::string line;
      if (!std::getline(is, line)) throw std::runtime_error("NkLandscape: truncated file");
      const auto c1 = line.find(':');
      const auto c2 = line.find(':', c1 == std::string::npos ? c1 : c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::runtime_error("NkLandscape: malformed component line");
      std::istringstream head(line.substr(0, c1));
      std::size_t idx = 0;
      if (!(head >> idx) || idx != i) throw std::runtime_error("NkLandscape: bad component index");
      std::istringstream nbrs(line.substr(c1 + 1, c2 - c1 - 1));
      std::uint32_t v = 0;
      while (nbrs >> v) neighbors[i].push_back(v);
      std::istringstream vals(line.substr(c2 + 1));
      double t = 0.0;
      while (vals >> t) tables[i].push_back(t);
      if (neighbors[i].size() != k || tables[i].size() != rows)
        throw std::runtime_error("NkLandscape: malformed component line");
    }
    return NkLandscape(n, k, seed, std::move(neighbors), std::move(tables));
  }

private:
  void validate() const {
    if (n_ == 0) throw std::invalid_argument("NkLandscape: n must be positive");
    if (k_ + 1 > n_) throw std::invalid_argument("NkLandscape: k must be at most n-1");
    if (neighbors_.size() != n_ || tables_.size() != n_)
      throw std::invalid_argument("NkLandscape: component count mismatch");
    const std::size_t rows = std::size_t{1} << (k_ + 1);
    for (std::size_t i = 0; i < n_; ++i) {
      if (neighbors_[i].size() != k_)
        throw std::invalid_argument("NkLandscape: neighbor count mismatch");
      for (std::size_t a = 0; a < k_; ++a) {
        if (neighbors_[i][a] >= n_ || neighbors_[i][a] == i)
          throw std::invalid_argument("NkLandscape: invalid neighbor index");
        for (std::size_t b = a + 1; b < k_; ++b)
          if (neighbors_[i][a] == neighbors_[i][b])
            throw std::invalid_argument("NkLandscape: duplicate neighbor");
      }
      if (tables_[i].size() != rows)
        throw std::invalid_argument("NkLandscape: table size mismatch");
      for (const auto t : tables_[i])
        if (!(t >= 0.0 && t < 1.0))
          throw std::invalid_argument("NkLandscape: table value outside [0,1)");
    }
  }

  std::size_t n_, k_;
  std::uint64_t seed_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::vector<std::vector<double>> tables_;
};

struct NkOptimum {
  Genome genome;
  double fitness = 0.0;
};

/// Exhaustive global optimum over all 2^n genomes; n is capped at 24. Ties
/// resolve to the lexicographically smallest genome.
inline NkOptimum nk_brute_force_optimum(const NkLandscape& inst) {
  const std::size_t n = inst.length();
  if (n > 24) throw std::invalid_argument("nk_brute_force_optimum: n must be at most 24");
  std::vector<std::uint8_t> bits(n, 0), best_bits(n, 0);
  double best = inst.fitness_bits(bits.data());
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t v = 1; v < total; ++v) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>((v >> i) & 1u);
    const double f = inst.fitness_bits(bits.data());
    if (f > best) {
      best = f;
      best_bits = bits;
    } else if (f == best &&
               std::lexicographical_compare(bits.begin(), bits.end(), best_bits.begin(),
                                            best_bits.end())) {
      best_bits = bits;
    }
  }
  return NkOptimum{Genome(std::move(best_bits)), best};
}

}  // namespace eda
