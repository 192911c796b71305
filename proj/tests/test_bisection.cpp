#include <catch2/catch_amalgamated.hpp>

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "eda/bisection.hpp"

using eda::BisectionOptions;
using eda::BisectionResult;
using eda::ProbeOutcome;
using eda::bisect_population_size;

namespace {

std::vector<std::size_t> probe_sizes(const BisectionResult& r) {
  std::vector<std::size_t> out;
  for (const auto& p : r.probes) out.push_back(p.population);
  return out;
}

// Deterministic probe: passes exactly above a fixed population threshold.
eda::ProbeFn threshold_probe(std::size_t threshold) {
  return [threshold](std::size_t pop, std::size_t, bool want_results) {
    ProbeOutcome out;
    out.pass = pop >= threshold;
    out.runs_executed = 3;
    out.evaluations = pop;
    if (want_results && out.pass) out.results.resize(2);
    return out;
  };
}

}  // namespace

TEST_CASE("search narrows to the verified minimum with even sizes", "[bisection]") {
  const auto res = bisect_population_size(threshold_probe(137));

  REQUIRE(res.solved);
  REQUIRE(res.population == 144);
  REQUIRE(res.upper_pass == 256);
  REQUIRE(res.lower_fail == 136);
  REQUIRE_FALSE(res.non_monotone);
  REQUIRE(probe_sizes(res) ==
          std::vector<std::size_t>{16, 32, 64, 128, 256, 192, 160, 144, 136, 144});

  // Exactly one probe is the verification pass: the final one.
  for (std::size_t i = 0; i < res.probes.size(); ++i)
    REQUIRE(res.probes[i].verification == (i + 1 == res.probes.size()));
  REQUIRE(res.verification_runs.size() == 2);

  // Per-probe bookkeeping adds up.
  std::size_t sum = 0;
  for (const auto& p : res.probes) {
    REQUIRE(p.runs_executed == 3);
    REQUIRE(p.evaluations == p.population);
    sum += p.evaluations;
  }
  REQUIRE(res.total_evaluations == sum);
}

TEST_CASE("a passing start size skips the shrink phase", "[bisection]") {
  const auto res = bisect_population_size(threshold_probe(10));
  REQUIRE(res.solved);
  REQUIRE(res.population == 16);
  REQUIRE(res.lower_fail == 0);
  REQUIRE(res.upper_pass == 16);
  REQUIRE(probe_sizes(res) == std::vector<std::size_t>{16, 16});
  REQUIRE(res.probes.back().verification);
}

TEST_CASE("doubling stops at the cap when nothing passes", "[bisection]") {
  const auto res = bisect_population_size(threshold_probe(100000));
  REQUIRE_FALSE(res.solved);
  REQUIRE(res.population == 0);
  REQUIRE(probe_sizes(res) == std::vector<std::size_t>{16, 32, 64, 128, 256, 512, 1024, 2048,
                                                       4096, 8192, 16384});
}

TEST_CASE("odd start sizes and caps are rounded to even probes", "[bisection]") {
  BisectionOptions opt;
  opt.start_size = 5;
  opt.size_cap = 9;
  const auto res = bisect_population_size(threshold_probe(100000), opt);
  REQUIRE_FALSE(res.solved);
  REQUIRE(probe_sizes(res) == std::vector<std::size_t>{6, 8});
}

TEST_CASE("a failed verification escalates until fresh seeds pass", "[bisection]") {
  // Passes at 100 and above, except the first verification call is forced to
  // fail: the noisy case where a size looks fine until it is re-checked.
  std::size_t verifications = 0;
  const eda::ProbeFn probe = [&](std::size_t pop, std::size_t, bool want_results) {
    ProbeOutcome out;
    out.pass = pop >= 100;
    if (want_results && ++verifications == 1) out.pass = false;
    out.runs_executed = 1;
    out.evaluations = pop;
    if (want_results && out.pass) out.results.resize(1);
    return out;
  };
  const auto res = bisect_population_size(probe);

  REQUIRE(res.solved);
  REQUIRE(res.population == 114);
  REQUIRE(res.non_monotone);
  REQUIRE(res.lower_fail == 104);
  REQUIRE(probe_sizes(res) ==
          std::vector<std::size_t>{16, 32, 64, 128, 96, 112, 104, 104, 114});
  REQUIRE(res.verification_runs.size() == 1);
}

TEST_CASE("perpetual verification failure exhausts the cap", "[bisection]") {
  const eda::ProbeFn probe = [](std::size_t pop, std::size_t, bool want_results) {
    ProbeOutcome out;
    out.pass = pop >= 100 && !want_results;
    out.runs_executed = 1;
    out.evaluations = 1;
    return out;
  };
  const auto res = bisect_population_size(probe);
  REQUIRE_FALSE(res.solved);
  REQUIRE(res.population == 0);
  REQUIRE(res.non_monotone);
}

TEST_CASE("probe indices are distinct and sequential", "[bisection]") {
  std::vector<std::size_t> seen;
  const eda::ProbeFn probe = [&](std::size_t pop, std::size_t idx, bool) {
    seen.push_back(idx);
    ProbeOutcome out;
    out.pass = pop >= 40;
    return out;
  };
  const auto res = bisect_population_size(probe);
  REQUIRE(res.solved);
  for (std::size_t i = 0; i < seen.size(); ++i) REQUIRE(seen[i] == i);
}

TEST_CASE("option validation", "[bisection]") {
  BisectionOptions bad;
  bad.start_size = 3;
  REQUIRE_THROWS_AS(bisect_population_size(threshold_probe(10), bad), std::invalid_argument);
  bad.start_size = 16;
  bad.size_cap = 8;
  REQUIRE_THROWS_AS(bisect_population_size(threshold_probe(10), bad), std::invalid_argument);
}
