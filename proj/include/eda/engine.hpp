#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bayesnet.hpp"
#include "bitstring.hpp"
#include "problems.hpp"
#include "random.hpp"
#include "rbm.hpp"
#include "selection.hpp"

namespace eda {

enum class ModelKind { rbm, boa };

inline const char* to_string(ModelKind k) { return k == ModelKind::rbm ? "rbm" : "boa"; }

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "rbm") return ModelKind::rbm;
  if (s == "boa") return ModelKind::boa;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct EdaConfig {
  std::size_t population_size = 0;
  double parent_fraction = 0.5;
  std::size_t max_generations = 500;
  double target_fitness = 0.0;
  std::size_t stagnation_limit = 100;
};

struct PhaseDurations {
  double select_ms = 0.0, model_ms = 0.0, sample_ms = 0.0, fitness_ms = 0.0;

  double total_ms() const { return select_ms + model_ms + sample_ms + fitness_ms; }

  PhaseDurations& operator+=(const PhaseDurations& o) {
    select_ms += o.select_ms;
    model_ms += o.model_ms;
    sample_ms += o.sample_ms;
    fitness_ms += o.fitness_ms;
    return *this;
  }
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t evaluations = 0;  // cumulative
  PhaseDurations phases;
};

struct RunResult {
  bool success = false;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  PhaseDurations phase_totals;
  double loop_wall_ms = 0.0;
  double best_fitness = 0.0;
  Genome best_genome;
  std::vector<GenerationStats> trace;
};

/// A model policy builds a distribution model from the selected parents and
/// samples new candidate genomes from it.
template <class M>
concept ModelPolicy = requires(M& m, const Population& parents, std::size_t count,
                               RandomSource& rng) {
  { m.build(parents, rng) };
  { m.sample(parents, count, rng) } -> std::convertible_to<std::vector<Genome>>;
};

namespace detail {

class StopWatch {
public:
  StopWatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// One run of the generational loop: select parents, build the model, sample
/// candidates, evaluate them, and keep parents plus candidates as the next
/// population (so the best fitness never decreases). Terminates with success
/// the moment the best fitness reaches the target, otherwise on the
/// generation cap or after stagnation_limit generations without improvement.
/// Evaluation count is exact: population_size for the initial population
/// plus the candidates evaluated each generation.
template <Problem P, ModelPolicy M>
RunResult run_eda(const P& problem, M& model, const EdaConfig& cfg, RandomSource& rng) {
  if (cfg.population_size < 4 || cfg.population_size % 2 != 0)
    throw std::invalid_argument("run_eda: population size must be even and at least 4");
  if (cfg.max_generations == 0)
    throw std::invalid_argument("run_eda: max_generations must be positive");
  if (cfg.stagnation_limit == 0)
    throw std::invalid_argument("run_eda: stagnation_limit must be positive");

  RunResult res;
  const auto evaluate = [&](const Genome& g) { return problem.fitness(g); };

  detail::StopWatch init_watch;
  Population pop = random_population(problem.length(), cfg.population_size, evaluate, rng);
  res.evaluations = cfg.population_size;
  res.phase_totals.fitness_ms += init_watch.ms();

  const EvaluatedGenome* best = &pop.best();
  res.best_fitness = best->fitness;
  res.best_genome = best->genome;
  if (res.best_fitness >= cfg.target_fitness) {
    res.success = true;
    return res;
  }

  std::size_t last_improvement = 0;
  const SelectionConfig sel{2, cfg.parent_fraction};

  detail::StopWatch loop_watch;
  for (std::size_t gen = 1; gen <= cfg.max_generations; ++gen) {
    PhaseDurations phases;

    detail::StopWatch sw_sel;
    Population parents = tournament_select(pop, sel, rng);
    phases.select_ms = sw_sel.ms();

    detail::StopWatch sw_model;
    model.build(parents, rng);
    phases.model_ms = sw_model.ms();

    const std::size_t want = cfg.population_size - parents.size();
    detail::StopWatch sw_sample;
    std::vector<Genome> candidates = model.sample(parents, want, rng);
    phases.sample_ms = sw_sample.ms();
    if (candidates.size() != want)
      throw std::runtime_error("run_eda: model returned wrong candidate count");

    detail::StopWatch sw_fit;
    std::vector<EvaluatedGenome> next = parents.members();
    next.reserve(cfg.population_size);
    for (auto& g : candidates) {
      const double f = evaluate(g);
      next.push_back(EvaluatedGenome{std::move(g), f});
    }
    res.evaluations += want;
    phases.fitness_ms = sw_fit.ms();

    pop = Population(std::move(next));
    res.phase_totals += phases;
    res.generations = gen;

    const EvaluatedGenome& gen_best = pop.best();
    if (gen_best.fitness > res.best_fitness) {
      res.best_fitness = gen_best.fitness;
      res.best_genome = gen_best.genome;
      last_improvement = gen;
    }
    res.trace.push_back(GenerationStats{gen, res.best_fitness, pop.mean_fitness(),
                                        res.evaluations, phases});
    if (res.best_fitness >= cfg.target_fitness) {
      res.success = true;
      break;
    }
    if (gen - last_improvement >= cfg.stagnation_limit) break;
  }
  res.loop_wall_ms = loop_watch.ms();
  return res;
}

/// EDA model backed by the restricted Boltzmann machine: a fresh model is
/// initialized from the parents and trained each generation; candidates come
/// from parent-initialized Gibbs chains.
struct RbmModel {
  TrainConfig train_cfg;
  SampleConfig sample_cfg;
  Rbm rbm;
  TrainState last_state;

  void build(const Population& parents, RandomSource& rng) {
    std::vector<Genome> data;
    data.reserve(parents.size());
    for (const auto& m : parents.members()) data.push_back(m.genome);
    rbm = init_rbm(parents.genome_length(), data, rng);
    rbm = train(std::move(rbm), data, train_cfg, rng, &last_state);
  }

  std::vector<Genome> sample(const Population& parents, std::size_t count, RandomSource& rng) {
    return sample_candidates(rbm, parents, count, sample_cfg, rng);
  }
};

/// EDA model backed by the Bayesian network: structure is greedily rebuilt
/// from scratch each generation, CPTs re-estimated, candidates drawn by
/// ancestral sampling.
struct BoaModel {
  std::size_t max_indegree = 5;
  BayesianNetwork net;

  void build(const Population& parents, RandomSource&) {
    ScoredDataset data(parents);
    net = estimate_cpts(greedy_build_network(data, max_indegree), data);
  }

  std::vector<Genome> sample(const Population&, std::size_t count, RandomSource& rng) {
    return sample_network(net, count, rng);
  }
};

}  // namespace eda
