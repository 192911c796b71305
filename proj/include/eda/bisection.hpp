#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "engine.hpp"

namespace eda {

/// What counts as "this population size works":
///  - all_runs: every one of runs_per_trial independent runs must succeed;
///  - per_instance: every instance must be solved in runs_per_instance out
///    of runs_per_instance runs at one shared population size.
struct SuccessCriterion {
  enum class Mode { all_runs, per_instance };
  Mode mode = Mode::all_runs;
  std::size_t runs_per_trial = 30;
  std::size_t instance_count = 0;
  std::size_t runs_per_instance = 5;

  std::size_t total_runs() const {
    return mode == Mode::all_runs ? runs_per_trial : instance_count * runs_per_instance;
  }
};

struct BisectionOptions {
  std::size_t start_size = 16;
  std::size_t size_cap = std::size_t{1} << 14;
};

struct ProbeOutcome {
  bool pass = false;
  std::size_t runs_executed = 0;
  std::size_t evaluations = 0;
  std::vector<RunResult> results;  // kept only for verification passes
};

struct ProbeRecord {
  std::size_t population = 0;
  bool pass = false;
  bool verification = false;
  std::size_t runs_executed = 0;
  std::size_t evaluations = 0;
};

struct BisectionResult {
  bool solved = false;
  std::size_t population = 0;  // verified minimal size
  std::size_t lower_fail = 0;  // largest size observed failing (0 if none)
  std::size_t upper_pass = 0;  // first passing size from the growth phase
  std::size_t total_evaluations = 0;
  std::vector<ProbeRecord> probes;
  std::vector<RunResult> verification_runs;
  bool non_monotone = false;
};

/// probe(population, probe_index) runs one full criterion trial with fresh
/// seeds derived from the probe index; want_results asks it to retain the
/// per-run records (used for the verification pass).
using ProbeFn = std::function<ProbeOutcome(std::size_t population, std::size_t probe_index,
                                           bool want_results)>;

/// Minimal-population search. Growth phase: start at start_size (rounded up
/// to even) and double until the criterion passes, giving the bracket
/// (largest failing, smallest passing). Shrink phase: bisect on even sizes
/// until upper - lower <= max(4, 0.1 * lower). The upper bound is then
/// re-verified with one more fresh-seed criterion pass; if that pass fails,
/// the size is escalated by max(4, 0.1 * size) steps, each re-verified,
/// until one passes (recorded as non-monotone) or the cap is exceeded.
inline BisectionResult bisect_population_size(const ProbeFn& probe,
                                              const BisectionOptions& opt = {}) {
  if (opt.start_size < 4) throw std::invalid_argument("bisect: start_size must be at least 4");
  if (opt.size_cap < opt.start_size)
    throw std::invalid_argument("bisect: size_cap must be at least start_size");
  const auto even = [](std::size_t x) { return x + (x & 1); };

  BisectionResult res;
  std::size_t probe_index = 0;
  const auto run_probe = [&](std::size_t pop, bool verification) {
    ProbeOutcome out = probe(pop, probe_index, verification);
    res.probes.push_back(
        ProbeRecord{pop, out.pass, verification, out.runs_executed, out.evaluations});
    res.total_evaluations += out.evaluations;
    ++probe_index;
    return out;
  };

  // Growth phase.
  const std::size_t cap = opt.size_cap & ~std::size_t{1};
  std::size_t size = even(opt.start_size);
  std::size_t lower = 0;
  bool found = false;
  for (;;) {
    if (run_probe(size, false).pass) {
      found = true;
      break;
    }
    lower = size;
    if (size >= cap) break;
    size = std::min(size * 2, cap);
  }
  if (!found) return res;  // never passed below the cap: unsolved
  std::size_t upper = size;
  res.upper_pass = upper;
  res.lower_fail = lower;

  // Shrink phase (skipped when the start size passed outright: there is no
  // failing lower bound to bisect against).
  while (lower != 0 && static_cast<double>(upper - lower) >
                           std::max(4.0, 0.1 * static_cast<double>(lower))) {
    const std::size_t mid = even(lower + (upper - lower) / 2);
    if (mid <= lower || mid >= upper) break;
    if (run_probe(mid, false).pass)
      upper = mid;
    else
      lower = mid;
  }

  // Fresh-seed verification of the bracket's upper bound.
  for (;;) {
    ProbeOutcome ver = run_probe(upper, true);
    if (ver.pass) {
      res.solved = true;
      res.population = upper;
      res.verification_runs = std::move(ver.results);
      break;
    }
    res.non_monotone = true;  // a size inside the passing bracket failed fresh seeds
    lower = upper;
    const std::size_t step = std::max<std::size_t>(
        4, static_cast<std::size_t>(0.1 * static_cast<double>(upper)));
    upper = even(upper + step);
    if (upper > opt.size_cap) break;
  }
  res.lower_fail = lower;

  // Audit: a pass recorded at a smaller size than some later fail.
  for (const auto& a : res.probes)
    for (const auto& b : res.probes)
      if (a.pass && !b.pass && b.population > a.population) res.non_monotone = true;
  return res;
}

}  // namespace eda
