#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "eda/bayesnet.hpp"

using Catch::Approx;
using eda::BayesianNetwork;
using eda::Genome;
using eda::RandomSource;
using eda::ScoredDataset;

namespace {

Genome gen(std::initializer_list<int> bits) {
  std::vector<std::uint8_t> v;
  for (const int b : bits) v.push_back(static_cast<std::uint8_t>(b));
  return Genome(std::move(v));
}

std::vector<Genome> hand_rows() {
  return {gen({0, 0, 0}), gen({1, 0, 1}), gen({1, 1, 1}), gen({0, 1, 1}), gen({1, 0, 1})};
}

// Naive per-row counting, the oracle for the word-parallel implementation.
std::vector<std::uint32_t> naive_counts(const std::vector<Genome>& rows, std::size_t i,
                                        const std::vector<std::uint32_t>& parents) {
  std::vector<std::uint32_t> counts(std::size_t{1} << (parents.size() + 1), 0);
  for (const auto& r : rows) {
    // The variable's own bit is most significant, parents follow in list order.
    std::size_t idx = r[i];
    for (const auto p : parents) idx = (idx << 1) | r[p];
    ++counts[idx];
  }
  return counts;
}

}  // namespace

TEST_CASE("configuration counts use the documented index order", "[bayesnet]") {
  const ScoredDataset data(hand_rows());
  REQUIRE(data.rows() == 5);
  REQUIRE(data.variables() == 3);
  REQUIRE(data.ones(0) == 3);
  REQUIRE(data.ones(1) == 2);
  REQUIRE(data.ones(2) == 4);

  // No parents: index is just x_i.
  const auto c0 = data.config_counts(0, {});
  REQUIRE(c0 == std::vector<std::uint32_t>{2, 3});

  // One parent: index is (x_i << 1) | parent.
  const auto c20 = data.config_counts(2, {0});
  REQUIRE(c20 == std::vector<std::uint32_t>{1, 0, 1, 3});

  // Two parents in list order: (x_1 << 2) | (x_0 << 1) | x_2.
  const auto c102 = data.config_counts(1, {0, 2});
  REQUIRE(c102 == std::vector<std::uint32_t>{1, 0, 0, 2, 0, 1, 0, 1});

  REQUIRE_THROWS_AS(data.config_counts(3, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(data.config_counts(0, {0}), std::invalid_argument);
  REQUIRE_THROWS_AS(data.config_counts(0, {9}), std::invalid_argument);
}

TEST_CASE("counts agree with naive counting across word boundaries", "[bayesnet]") {
  RandomSource rng(44);
  std::vector<Genome> rows;
  for (int i = 0; i < 130; ++i) rows.push_back(eda::random_genome(6, rng));
  const ScoredDataset data(rows);
  const std::vector<std::vector<std::uint32_t>> parent_sets{
      {}, {0}, {5}, {1, 4}, {0, 2, 5}, {1, 2, 3, 4}};
  for (std::size_t i = 0; i < 6; ++i)
    for (const auto& ps : parent_sets) {
      bool skip = false;
      for (const auto p : ps)
        if (p == i) skip = true;
      if (skip) continue;
      REQUIRE(data.config_counts(i, ps) == naive_counts(rows, i, ps));
    }
}

TEST_CASE("conditional entropy in bits over observed configurations", "[bayesnet]") {
  const std::vector<Genome> rows{gen({1, 0}), gen({1, 1}), gen({1, 0}), gen({0, 1})};
  const ScoredDataset data(rows);

  // Marginal entropy of x0 = [1,1,1,0]: H(3/4) bits.
  REQUIRE(eda::conditional_entropy(data, 0, {}) ==
          Approx(-(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25))).epsilon(1e-14));

  // x1 given x0: x0=1 rows have x1 = {0,1,0} (H = 2/3 weighted), x0=0 rows
  // have x1 = {1} (H = 0). Weighted by row fractions.
  const double h_x0_1 = -((2.0 / 4.0) * std::log2(2.0 / 3.0) + (1.0 / 4.0) * std::log2(1.0 / 3.0));
  REQUIRE(eda::conditional_entropy(data, 1, {0}) == Approx(h_x0_1).epsilon(1e-14));

  // A deterministic copy has zero conditional entropy.
  const std::vector<Genome> copy_rows{gen({0, 0}), gen({1, 1}), gen({1, 1}), gen({0, 0})};
  const ScoredDataset copies(copy_rows);
  REQUIRE(eda::conditional_entropy(copies, 1, {0}) == 0.0);
  REQUIRE(eda::conditional_entropy(copies, 0, {1}) == 0.0);
}

TEST_CASE("node score is data fit minus the parameter penalty", "[bayesnet]") {
  const std::vector<Genome> rows{gen({1, 0}), gen({1, 1}), gen({1, 0}), gen({0, 1})};
  const ScoredDataset data(rows);
  const double h = eda::conditional_entropy(data, 0, {});
  REQUIRE(eda::bic_node_score(data, 0, {}) ==
          Approx(-h * 4.0 - 1.0 * std::log2(4.0) / 2.0).epsilon(1e-14));
  const double h1 = eda::conditional_entropy(data, 1, {0});
  REQUIRE(eda::bic_node_score(data, 1, {0}) ==
          Approx(-h1 * 4.0 - 2.0 * std::log2(4.0) / 2.0).epsilon(1e-14));

  BayesianNetwork net;
  net.node_count = 2;
  net.parents = {{}, {0}};
  net.cpts.assign(2, {});
  REQUIRE(eda::network_bic_score(data, net) ==
          Approx(eda::bic_node_score(data, 0, {}) + eda::bic_node_score(data, 1, {0}))
              .epsilon(1e-14));
}

TEST_CASE("greedy search links duplicated columns only", "[bayesnet]") {
  RandomSource rng(7);
  std::vector<Genome> rows;
  for (int r = 0; r < 200; ++r) {
    const std::uint8_t a = rng.bernoulli(0.5) ? 1 : 0;
    const std::uint8_t c = rng.bernoulli(0.5) ? 1 : 0;
    rows.push_back(Genome(std::vector<std::uint8_t>{a, a, c, c}));
  }
  const ScoredDataset data(rows);
  const auto net = eda::greedy_build_network(data);

  // Equal-gain direction ties resolve to the lowest (child, parent) pair.
  REQUIRE(net.parents[0] == std::vector<std::uint32_t>{1});
  REQUIRE(net.parents[1].empty());
  REQUIRE(net.parents[2] == std::vector<std::uint32_t>{3});
  REQUIRE(net.parents[3].empty());
  REQUIRE_NOTHROW(eda::topological_order(net));
}

TEST_CASE("independent columns stay unlinked", "[bayesnet]") {
  RandomSource rng(15);
  std::vector<Genome> rows;
  for (int r = 0; r < 100; ++r) rows.push_back(eda::random_genome(5, rng));
  const auto net = eda::greedy_build_network(ScoredDataset(rows));
  for (const auto& p : net.parents) REQUIRE(p.empty());
}

TEST_CASE("identical columns form an acyclic chain, never a cycle", "[bayesnet]") {
  RandomSource rng(3);
  std::vector<Genome> rows;
  for (int r = 0; r < 150; ++r) {
    const std::uint8_t a = rng.bernoulli(0.5) ? 1 : 0;
    rows.push_back(Genome(std::vector<std::uint8_t>{a, a, a}));
  }
  const auto net = eda::greedy_build_network(ScoredDataset(rows));
  std::size_t edges = 0;
  for (const auto& p : net.parents) edges += p.size();
  REQUIRE(edges == 2);
  REQUIRE(net.parents[0] == std::vector<std::uint32_t>{1});
  REQUIRE(net.parents[1] == std::vector<std::uint32_t>{2});
  REQUIRE(net.parents[2].empty());
  REQUIRE_NOTHROW(eda::topological_order(net));
}

TEST_CASE("the in-degree cap binds when information keeps flowing", "[bayesnet]") {
  // Last column is the majority of seven inputs; with enough rows every
  // additional parent carries information, so the cap is what stops growth.
  RandomSource rng(25);
  std::vector<Genome> rows;
  for (int r = 0; r < 2000; ++r) {
    std::vector<std::uint8_t> bits(8);
    int sum = 0;
    for (int i = 0; i < 7; ++i) {
      bits[i] = rng.bernoulli(0.5) ? 1 : 0;
      sum += bits[i];
    }
    bits[7] = sum >= 4 ? 1 : 0;
    rows.push_back(Genome(std::move(bits)));
  }
  const auto net = eda::greedy_build_network(ScoredDataset(rows), 5);
  REQUIRE(net.parents[7].size() == 5);
  for (std::size_t i = 0; i < 8; ++i) REQUIRE(net.parents[i].size() <= 5);

  const auto capped = eda::greedy_build_network(ScoredDataset(rows), 2);
  REQUIRE(capped.parents[7].size() == 2);
}

TEST_CASE("greedy matches the exhaustive optimum on a small chain", "[bayesnet]") {
  // x0 random, x1 ~ x0 with 10% flips, x2 ~ x1 with 10% flips.
  RandomSource rng(61);
  std::vector<Genome> rows;
  for (int r = 0; r < 120; ++r) {
    const std::uint8_t a = rng.bernoulli(0.5) ? 1 : 0;
    const std::uint8_t b = rng.bernoulli(0.1) ? static_cast<std::uint8_t>(1 - a) : a;
    const std::uint8_t c = rng.bernoulli(0.1) ? static_cast<std::uint8_t>(1 - b) : b;
    rows.push_back(Genome(std::vector<std::uint8_t>{a, b, c}));
  }
  const ScoredDataset data(rows);
  const auto net = eda::greedy_build_network(data);
  const double greedy_score = eda::network_bic_score(data, net);

  // Exhaustive search over every DAG on three nodes.
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t n = 3;
  std::vector<std::vector<std::uint32_t>> subsets_of[3];
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> others;
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    for (std::size_t mask = 0; mask < 4; ++mask) {
      std::vector<std::uint32_t> s;
      for (std::size_t b = 0; b < 2; ++b)
        if (mask & (std::size_t{1} << b)) s.push_back(others[b]);
      subsets_of[i].push_back(s);
    }
  }
  for (const auto& p0 : subsets_of[0])
    for (const auto& p1 : subsets_of[1])
      for (const auto& p2 : subsets_of[2]) {
        BayesianNetwork cand;
        cand.node_count = 3;
        cand.parents = {p0, p1, p2};
        cand.cpts.assign(3, {});
        try {
          eda::topological_order(cand);
        } catch (const std::runtime_error&) {
          continue;  // cyclic
        }
        best = std::max(best, eda::network_bic_score(data, cand));
      }
  REQUIRE(greedy_score == Approx(best).margin(1e-9));
}

TEST_CASE("smoothed tables and the unobserved-configuration fallback", "[bayesnet]") {
  const std::vector<Genome> rows{gen({1, 0}), gen({1, 1}), gen({1, 1}), gen({1, 1})};
  const ScoredDataset data(rows);
  BayesianNetwork net;
  net.node_count = 2;
  net.parents = {{}, {0}};
  net.cpts.assign(2, {});
  net = eda::estimate_cpts(std::move(net), data);

  REQUIRE(net.cpts[0].size() == 1);
  REQUIRE(net.cpts[0][0] == Approx((4.0 + 1.0) / (4.0 + 2.0)).epsilon(1e-14));  // 5/6
  REQUIRE(net.cpts[1].size() == 2);
  REQUIRE(net.cpts[1][0] == 0.5);  // x0 = 0 never observed
  REQUIRE(net.cpts[1][1] == Approx((3.0 + 1.0) / (4.0 + 2.0)).epsilon(1e-14));  // 4/6
}

TEST_CASE("topological order is the lowest-index Kahn order", "[bayesnet]") {
  BayesianNetwork chain;
  chain.node_count = 3;
  chain.parents = {{1}, {2}, {}};
  chain.cpts.assign(3, {});
  REQUIRE(eda::topological_order(chain) == std::vector<std::size_t>{2, 1, 0});

  BayesianNetwork diamond;
  diamond.node_count = 4;
  diamond.parents = {{}, {0}, {0}, {1, 2}};
  diamond.cpts.assign(4, {});
  REQUIRE(eda::topological_order(diamond) == std::vector<std::size_t>{0, 1, 2, 3});

  BayesianNetwork cyc;
  cyc.node_count = 2;
  cyc.parents = {{1}, {0}};
  cyc.cpts.assign(2, {});
  REQUIRE_THROWS_AS(eda::topological_order(cyc), std::runtime_error);
}

TEST_CASE("ancestral samples follow the table probabilities", "[bayesnet]") {
  BayesianNetwork net;
  net.node_count = 2;
  net.parents = {{}, {0}};
  net.cpts = {{0.3}, {0.2, 0.9}};  // P(B=1|A=0)=0.2, P(B=1|A=1)=0.9

  RandomSource rng(5);
  const std::size_t draws = 300000;
  const auto samples = eda::sample_network(net, draws, rng);
  REQUIRE(samples.size() == draws);
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (const auto& s : samples) joint[s[0]][s[1]] += 1.0;
  const double expect[2][2] = {{0.7 * 0.8, 0.7 * 0.2}, {0.3 * 0.1, 0.3 * 0.9}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      REQUIRE(joint[a][b] / draws == Approx(expect[a][b]).margin(0.005));

  RandomSource r1(9), r2(9);
  REQUIRE(eda::sample_network(net, 50, r1) == eda::sample_network(net, 50, r2));

  BayesianNetwork empty_cpts;
  empty_cpts.node_count = 2;
  empty_cpts.parents = {{}, {0}};
  empty_cpts.cpts.assign(2, {});
  REQUIRE_THROWS_AS(eda::sample_network(empty_cpts, 1, rng), std::invalid_argument);
}

TEST_CASE("network dump lists parents and table rows", "[bayesnet]") {
  BayesianNetwork net;
  net.node_count = 2;
  net.parents = {{}, {0}};
  net.cpts = {{0.25}, {0.5, 0.75}};
  std::ostringstream os;
  eda::dump_network(net, os);
  const std::string out = os.str();
  REQUIRE(out.find("node 0 <-\n") != std::string::npos);
  REQUIRE(out.find("node 1 <- 0\n") != std::string::npos);
  REQUIRE(out.find("cpt[0] = 0.25") != std::string::npos);
  REQUIRE(out.find("cpt[1] = 0.75") != std::string::npos);
}
