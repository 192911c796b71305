#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bitstring.hpp"
#include "random.hpp"

namespace eda {

/// Directed acyclic model over binary variables. parents[i] is the ordered
/// parent list of node i (kept ascending); cpts[i] has one row per parent
/// configuration holding P(x_i = 1 | config). The configuration index is
/// the big-endian integer over the parent list (first parent is the most
/// significant bit).
struct BayesianNetwork {
  std::size_t node_count = 0;
  std::vector<std::vector<std::uint32_t>> parents;
  std::vector<std::vector<double>> cpts;
};

/// Selected-parent rows packed column-wise (one bitset per variable) so that
/// configuration counting runs on words instead of bytes.
class ScoredDataset {
public:
  explicit ScoredDataset(const std::vector<Genome>& rows) { build(rows); }

  explicit ScoredDataset(const Population& pop) {
    std::vector<Genome> rows;
    rows.reserve(pop.size());
    for (const auto& m : pop.members()) rows.push_back(m.genome);
    build(rows);
  }

  std::size_t variables() const { return n_; }
  std::size_t rows() const { return rows_; }
  std::size_t ones(std::size_t var) const { return ones_[var]; }

  std::uint8_t bit(std::size_t row, std::size_t var) const {
    return static_cast<std::uint8_t>((cols_[var][row >> 6] >> (row & 63)) & 1u);
  }

  /// Counts of every joint configuration of (x_i, parents...). The count
  /// index puts x_i in the most significant bit, then the parents in list
  /// order, matching the CPT row convention.
  std::vector<std::uint32_t> config_counts(std::size_t i,
                                           const std::vector<std::uint32_t>& parents) const {
    if (i >= n_) throw std::invalid_argument("config_counts: variable out of range");
    for (const auto p : parents) {
      if (p >= n_) throw std::invalid_argument("config_counts: parent out of range");
      if (p == i) throw std::invalid_argument("config_counts: variable cannot be its own parent");
    }
    const std::size_t p = parents.size();
    if (p > 20) throw std::invalid_argument("config_counts: too many parents");
    std::vector<std::uint32_t> counts(std::size_t{1} << (p + 1), 0);

    // Depth-first mask refinement: variable order (i, parents...) so the
    // branch taken at depth d contributes bit (p - d) of the config index.
    std::vector<std::uint32_t> vars;
    vars.reserve(p + 1);
    vars.push_back(static_cast<std::uint32_t>(i));
    for (const auto q : parents) vars.push_back(q);

    const std::size_t words = cols_.empty() ? 0 : cols_[0].size();
    std::vector<std::uint64_t> scratch((p + 2) * words);
    std::uint64_t* root = scratch.data();
    for (std::size_t w = 0; w < words; ++w) root[w] = ~std::uint64_t{0};
    if (rows_ & 63) root[words - 1] = (std::uint64_t{1} << (rows_ & 63)) - 1;

    auto count_rec = [&](auto&& self, std::size_t depth, std::size_t idx,
                         const std::uint64_t* mask) -> void {
      if (depth == vars.size()) {
        std::uint64_t c = 0;
        for (std::size_t w = 0; w < words; ++w) c += static_cast<std::uint64_t>(__builtin_popcountll(mask[w]));
        counts[idx] = static_cast<std::uint32_t>(c);
        return;
      }
      const auto& col = cols_[vars[depth]];
      std::uint64_t* child = scratch.data() + (depth + 1) * words;
      for (std::size_t w = 0; w < words; ++w) child[w] = mask[w] & ~col[w];
      self(self, depth + 1, idx << 1, child);
      for (std::size_t w = 0; w < words; ++w) child[w] = mask[w] & col[w];
      self(self, depth + 1, (idx << 1) | 1u, child);
    };
    count_rec(count_rec, 0, 0, root);
    return counts;
  }

private:
  void build(const std::vector<Genome>& rows) {
    if (rows.empty()) throw std::invalid_argument("ScoredDataset: must be non-empty");
    n_ = rows.front().size();
    rows_ = rows.size();
    for (const auto& g : rows)
      if (g.size() != n_) throw std::invalid_argument("ScoredDataset: row length mismatch");
    const std::size_t words = (rows_ + 63) / 64;
    cols_.assign(n_, std::vector<std::uint64_t>(words, 0));
    ones_.assign(n_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& bits = rows[r].bits();
      for (std::size_t v = 0; v < n_; ++v) {
        if (bits[v]) {
          cols_[v][r >> 6] |= std::uint64_t{1} << (r & 63);
          ++ones_[v];
        }
      }
    }
  }

  std::size_t n_ = 0, rows_ = 0;
  std::vector<std::vector<std::uint64_t>> cols_;
  std::vector<std::size_t> ones_;
};

/// Empirical conditional entropy H(X_i | parents) in bits, summed over the
/// observed configurations only (0 * log 0 contributes nothing). Lies in
/// [0, 1] for binary variables.
inline double conditional_entropy(const ScoredDataset& data, std::size_t i,
                                  const std::vector<std::uint32_t>& parents) {
  const auto counts = data.config_counts(i, parents);
  const std::size_t p = parents.size();
  const std::size_t half = std::size_t{1} << p;
  const double n = static_cast<double>(data.rows());
  double h = 0.0;
  for (std::size_t cfg = 0; cfg < half; ++cfg) {
    const double c0 = counts[cfg];
    const double c1 = counts[half | cfg];
    const double cp = c0 + c1;
    if (cp == 0.0) continue;
    if (c0 > 0.0) h -= (c0 / n) * std::log2(c0 / cp);
    if (c1 > 0.0) h -= (c1 / n) * std::log2(c1 / cp);
  }
  return h;
}

/// Decomposable network score of one node:
///   -H(X_i | parents) * N  -  2^|parents| * log2(N) / 2
/// (conditional-entropy data fit plus a parameter-count penalty).
inline double bic_node_score(const ScoredDataset& data, std::size_t i,
                             const std::vector<std::uint32_t>& parents) {
  const double n = static_cast<double>(data.rows());
  const double penalty =
      static_cast<double>(std::size_t{1} << parents.size()) * std::log2(n) / 2.0;
  return -conditional_entropy(data, i, parents) * n - penalty;
}

inline double network_bic_score(const ScoredDataset& data, const BayesianNetwork& net) {
  double s = 0.0;
  for (std::size_t i = 0; i < net.node_count; ++i) s += bic_node_score(data, i, net.parents[i]);
  return s;
}

namespace detail {

// Dynamic bitset over node indices, for ancestor tracking.
class NodeSet {
public:
  explicit NodeSet(std::size_t n) : words_((n + 63) / 64, 0) {}
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void merge(const NodeSet& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
  }

private:
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

/// Greedy structure search: start from the empty network and repeatedly add
/// the single edge with the largest strictly positive node-score gain among
/// all legal edges (no self loop, no duplicate, child in-degree below the
/// cap, no directed cycle). Exact score ties resolve to the lowest
/// (child, parent) index pair. Gains are cached per (child, parent) and only
/// the modified child's row is recomputed after an addition. CPTs are left
/// empty.
inline BayesianNetwork greedy_build_network(const ScoredDataset& data,
                                            std::size_t max_indegree = 5) {
  if (data.rows() < 2) throw std::invalid_argument("greedy_build_network: need at least 2 rows");
  if (max_indegree == 0)
    throw std::invalid_argument("greedy_build_network: max_indegree must be positive");
  const std::size_t n = data.variables();
  BayesianNetwork net;
  net.node_count = n;
  net.parents.assign(n, {});
  net.cpts.assign(n, {});

  constexpr double kInvalid = -std::numeric_limits<double>::infinity();
  std::vector<double> cur_score(n);
  for (std::size_t i = 0; i < n; ++i) cur_score[i] = bic_node_score(data, i, {});

  std::vector<double> gain(n * n, kInvalid);
  auto recompute_child = [&](std::size_t c) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == c || net.parents[c].size() >= max_indegree ||
          std::find(net.parents[c].begin(), net.parents[c].end(), p) != net.parents[c].end()) {
        gain[c * n + p] = kInvalid;
        continue;
      }
      std::vector<std::uint32_t> trial = net.parents[c];
      trial.insert(std::upper_bound(trial.begin(), trial.end(), static_cast<std::uint32_t>(p)),
                   static_cast<std::uint32_t>(p));
      gain[c * n + p] = bic_node_score(data, c, trial) - cur_score[c];
    }
  };
  for (std::size_t c = 0; c < n; ++c) recompute_child(c);

  std::vector<detail::NodeSet> anc(n, detail::NodeSet(n));  // anc[x]: nodes with a path to x
  for (;;) {
    double best = 0.0;
    std::size_t bc = n, bp = n;
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t p = 0; p < n; ++p) {
        const double g = gain[c * n + p];
        if (g <= 0.0 || g <= best) continue;
        if (anc[p].test(c)) continue;  // adding p->c would close a cycle
        best = g;
        bc = c;
        bp = p;
      }
    }
    if (bc == n) break;
    auto& par = net.parents[bc];
    par.insert(std::upper_bound(par.begin(), par.end(), static_cast<std::uint32_t>(bp)),
               static_cast<std::uint32_t>(bp));
    cur_score[bc] += best;
    anc[bc].merge(anc[bp]);
    anc[bc].set(bp);
    for (std::size_t d = 0; d < n; ++d)
      if (anc[d].test(bc)) anc[d].merge(anc[bc]);
    recompute_child(bc);
  }
  return net;
}

/// Laplace-smoothed conditional probability tables:
///   P(x_i = 1 | config) = (count(x_i = 1, config) + 1) / (count(config) + 2)
/// so never-observed configurations fall back to exactly 0.5.
inline BayesianNetwork estimate_cpts(BayesianNetwork net, const ScoredDataset& data) {
  if (net.node_count != data.variables())
    throw std::invalid_argument("estimate_cpts: node count mismatch");
  for (std::size_t i = 0; i < net.node_count; ++i) {
    const auto counts = data.config_counts(i, net.parents[i]);
    const std::size_t half = std::size_t{1} << net.parents[i].size();
    net.cpts[i].resize(half);
    for (std::size_t cfg = 0; cfg < half; ++cfg) {
      const double c0 = counts[cfg];
      const double c1 = counts[half | cfg];
      net.cpts[i][cfg] = (c1 + 1.0) / (c0 + c1 + 2.0);
    }
  }
  return net;
}

/// Deterministic topological order (Kahn's algorithm, lowest index first).
/// Throws if the graph has a cycle.
inline std::vector<std::size_t> topological_order(const BayesianNetwork& net) {
  const std::size_t n = net.node_count;
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t c = 0; c < n; ++c) {
    indeg[c] = net.parents[c].size();
    for (const auto p : net.parents[c]) children[p].push_back(c);
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto it = std::min_element(ready.begin(), ready.end());
    const std::size_t u = *it;
    ready.erase(it);
    order.push_back(u);
    for (const auto c : children[u])
      if (--indeg[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) throw std::runtime_error("topological_order: graph has a cycle");
  return order;
}

/// Ancestral sampling: nodes drawn in topological order, each bit from its
/// CPT row selected by the already-drawn parent bits.
inline std::vector<Genome> sample_network(const BayesianNetwork& net, std::size_t count,
                                          RandomSource& rng) {
  for (std::size_t i = 0; i < net.node_count; ++i)
    if (net.cpts[i].size() != std::size_t{1} << net.parents[i].size())
      throw std::invalid_argument("sample_network: CPTs not estimated");
  const auto order = topological_order(net);
  std::vector<Genome> out;
  out.reserve(count);
  std::vector<std::uint8_t> bits(net.node_count);
  for (std::size_t s = 0; s < count; ++s) {
    for (const auto node : order) {
      std::size_t cfg = 0;
      for (const auto p : net.parents[node]) cfg = (cfg << 1) | bits[p];
      bits[node] = rng.bernoulli(net.cpts[node][cfg]) ? 1 : 0;
    }
    out.push_back(Genome(std::vector<std::uint8_t>(bits.begin(), bits.end())));
  }
  return out;
}

/// Human-readable structure dump: one "node i <- p1 p2 ..." line per node
/// followed by its CPT rows.
inline void dump_network(const BayesianNetwork& net, std::ostream& os) {
  for (std::size_t i = 0; i < net.node_count; ++i) {
    os << "node " << i << " <-";
    for (const auto p : net.parents[i]) os << ' ' << p;
    os << '\n';
    for (std::size_t cfg = 0; cfg < net.cpts[i].size(); ++cfg)
      os << "  cpt[" << cfg << "] = " << net.cpts[i][cfg] << '\n';
  }
}

}  // namespace eda
