#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bisection.hpp"
#include "engine.hpp"
#include "powerlaw.hpp"
#include "problems.hpp"

namespace eda {

// ---------------------------------------------------------------------------
// experiment description

struct ExperimentSpec {
  std::string problem = "trap";  // onemax | trap | nk
  std::size_t k = 5;             // trap block order / nk neighbor count; 0 for onemax
  std::vector<std::size_t> sizes;
  std::vector<ModelKind> models;
  std::size_t runs = 30;              // all-runs criterion (onemax, trap)
  std::size_t instances = 25;         // nk: instance count
  std::size_t runs_per_instance = 5;  // nk: runs per instance
  std::uint64_t root_seed = 1;
  std::string out_dir;
  std::string nk_instance_dir;  // optional: load serialized instances instead of generating
  std::size_t workers = 1;      // >1 flags timings as non-comparable
  BisectionOptions bisection;
  TrainConfig rbm_train;
  SampleConfig rbm_sample;
  std::size_t boa_max_indegree = 5;
  std::size_t max_generations = 500;
  std::size_t stagnation_limit = 100;
};

inline void validate_spec(const ExperimentSpec& s) {
  if (s.problem != "onemax" && s.problem != "trap" && s.problem != "nk")
    throw std::invalid_argument("spec: problem must be onemax, trap, or nk");
  if (s.sizes.empty()) throw std::invalid_argument("spec: sizes must be non-empty");
  for (std::size_t i = 1; i < s.sizes.size(); ++i)
    if (s.sizes[i] <= s.sizes[i - 1])
      throw std::invalid_argument("spec: sizes must be strictly increasing");
  if (s.models.empty()) throw std::invalid_argument("spec: models must be non-empty");
  if (s.problem == "trap") {
    if (s.k == 0) throw std::invalid_argument("spec: trap needs k >= 1");
    for (const auto l : s.sizes)
      if (l % s.k != 0)
        throw std::invalid_argument("spec: every trap size must be a multiple of k");
  }
  if (s.problem == "nk") {
    for (const auto n : s.sizes) {
      if (s.k + 1 > n) throw std::invalid_argument("spec: nk needs k <= size-1");
      if (n > 24)
        throw std::invalid_argument("spec: nk sizes are capped at 24 (exact optimum required)");
    }
    if (s.instances == 0 || s.runs_per_instance == 0)
      throw std::invalid_argument("spec: nk needs instances and runs_per_instance >= 1");
  } else if (s.runs == 0) {
    throw std::invalid_argument("spec: runs must be >= 1");
  }
  if (s.workers == 0) throw std::invalid_argument("spec: workers must be >= 1");
}

// ---------------------------------------------------------------------------
// problem instances

/// One concrete fitness function plus its success target.
struct ProblemInstance {
  std::string name;  // onemax | trap | nk
  std::size_t size = 0, k = 0;
  double target = 0.0;
  std::variant<OneMax, ConcatTrap, NkLandscape> impl;

  std::size_t length() const { return size; }
  double fitness(const Genome& g) const {
    return std::visit([&](const auto& p) { return p.fitness(g); }, impl);
  }
};

// Seed-path namespaces (first derivation component).
inline constexpr std::uint64_t kSeedNsRun = 1;
inline constexpr std::uint64_t kSeedNsInstance = 2;

inline std::uint64_t problem_id(const std::string& name) {
  if (name == "onemax") return 1;
  if (name == "trap") return 2;
  return 3;
}

/// The fixed instance list for one grid size: a single analytic instance for
/// onemax/trap, or the study's serialized-or-generated NK instances (shared
/// by every model at this size, targets from exhaustive search).
inline std::vector<ProblemInstance> build_instances(const ExperimentSpec& spec,
                                                    std::size_t size) {
  std::vector<ProblemInstance> out;
  if (spec.problem == "onemax") {
    out.push_back(ProblemInstance{"onemax", size, 0, static_cast<double>(size), OneMax(size)});
    return out;
  }
  if (spec.problem == "trap") {
    ConcatTrap trap(spec.k, size / spec.k);
    out.push_back(ProblemInstance{"trap", size, spec.k, trap.optimum(), std::move(trap)});
    return out;
  }
  std::vector<NkLandscape> landscapes;
  if (!spec.nk_instance_dir.empty()) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(spec.nk_instance_dir))
      if (e.is_regular_file() && e.path().extension() == ".nk") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream is(f);
      NkLandscape inst = NkLandscape::load(is);
      if (inst.length() == size && inst.k() == spec.k) landscapes.push_back(std::move(inst));
      if (landscapes.size() == spec.instances) break;
    }
    if (landscapes.size() < spec.instances)
      throw std::invalid_argument("spec: not enough matching .nk instances in " +
                                  spec.nk_instance_dir);
  } else {
    for (std::size_t i = 0; i < spec.instances; ++i) {
      const std::uint64_t seed =
          RandomSource::derive(spec.root_seed, {kSeedNsInstance, size, spec.k, i});
      landscapes.push_back(NkLandscape::generate(size, spec.k, seed));
    }
  }
  for (auto& inst : landscapes) {
    const auto opt = nk_brute_force_optimum(inst);
    out.push_back(ProblemInstance{"nk", size, spec.k, opt.fitness, std::move(inst)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// single runs and criterion probes

inline RunResult execute_run(const ProblemInstance& prob, ModelKind kind,
                             const ExperimentSpec& spec, std::size_t pop, std::uint64_t seed) {
  EdaConfig cfg;
  cfg.population_size = pop;
  cfg.parent_fraction = 0.5;
  cfg.max_generations = spec.max_generations;
  cfg.target_fitness = prob.target;
  cfg.stagnation_limit = spec.stagnation_limit;
  RandomSource rng(seed);
  if (kind == ModelKind::rbm) {
    RbmModel model;
    model.train_cfg = spec.rbm_train;
    model.sample_cfg = spec.rbm_sample;
    return run_eda(prob, model, cfg, rng);
  }
  BoaModel model;
  model.max_indegree = spec.boa_max_indegree;
  return run_eda(prob, model, cfg, rng);
}

namespace detail {

template <class Fn>
void parallel_for_indexed(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min(workers, count);
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// One full criterion trial at the given population size. Run seeds derive
/// from (root, run-namespace, model, problem, size, k, probe index, instance,
/// run), so every probe gets a fresh deterministic seed set. Serial
/// non-verification probes stop at the first failing run.
inline ProbeOutcome run_criterion_probe(const std::vector<ProblemInstance>& instances,
                                        ModelKind kind, const ExperimentSpec& spec,
                                        const SuccessCriterion& crit, std::size_t pop,
                                        std::size_t probe_index, bool want_results) {
  const std::size_t inst_count =
      crit.mode == SuccessCriterion::Mode::per_instance ? instances.size() : 1;
  const std::size_t runs_each = crit.mode == SuccessCriterion::Mode::per_instance
                                    ? crit.runs_per_instance
                                    : crit.runs_per_trial;
  const std::uint64_t model_idx = kind == ModelKind::rbm ? 0 : 1;
  const std::uint64_t pid = problem_id(instances.front().name);
  const std::size_t total = inst_count * runs_each;

  auto seed_for = [&](std::size_t flat) {
    const std::size_t inst = flat / runs_each;
    const std::size_t run = flat % runs_each;
    return RandomSource::derive(spec.root_seed,
                                {kSeedNsRun, model_idx, pid, instances.front().size,
                                 instances.front().k, probe_index, inst, run});
  };
  auto run_one = [&](std::size_t flat) {
    const std::size_t inst = flat / runs_each;
    try {
      return execute_run(instances[inst], kind, spec, pop, seed_for(flat));
    } catch (const std::invalid_argument&) {
      // Population too small for this model's preconditions: counts as a
      // failed run at this size.
      RunResult rr;
      rr.success = false;
      rr.evaluations = pop;
      return rr;
    }
  };

  ProbeOutcome out;
  out.pass = true;
  if (spec.workers > 1) {
    std::vector<RunResult> results(total);
    detail::parallel_for_indexed(total, spec.workers,
                                 [&](std::size_t i) { results[i] = run_one(i); });
    out.runs_executed = total;
    for (auto& rr : results) {
      out.evaluations += rr.evaluations;
      if (!rr.success) out.pass = false;
    }
    if (want_results) out.results = std::move(results);
    return out;
  }
  for (std::size_t i = 0; i < total; ++i) {
    RunResult rr = run_one(i);
    ++out.runs_executed;
    out.evaluations += rr.evaluations;
    if (!rr.success) {
      out.pass = false;
      if (!want_results) return out;  // early exit: the criterion already failed
    }
    if (want_results) out.results.push_back(std::move(rr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// cells

struct CellResult {
  ModelKind model = ModelKind::rbm;
  std::string problem;
  std::size_t size = 0, k = 0;
  bool solved = false;
  std::size_t pop_size = 0, runs = 0;
  double success_rate = 0.0, mean_evals = 0.0, sd_evals = 0.0;
  double t_select_ms = 0.0, t_model_ms = 0.0, t_sample_ms = 0.0, t_fitness_ms = 0.0,
         t_total_ms = 0.0;
  std::size_t search_evaluations = 0;  // total across every probe of the bisection
  bool non_monotone = false;
};

using Logger = std::function<void(const std::string&)>;

inline SuccessCriterion make_criterion(const ExperimentSpec& spec, std::size_t instance_count) {
  SuccessCriterion crit;
  if (spec.problem == "nk") {
    crit.mode = SuccessCriterion::Mode::per_instance;
    crit.instance_count = instance_count;
    crit.runs_per_instance = spec.runs_per_instance;
  } else {
    crit.mode = SuccessCriterion::Mode::all_runs;
    crit.runs_per_trial = spec.runs;
  }
  return crit;
}

/// Bisect the minimal reliable population for one (model, size) cell and
/// aggregate the verification pass as the cell's measured runs.
inline CellResult run_cell(const std::vector<ProblemInstance>& instances, ModelKind kind,
                           const ExperimentSpec& spec, const Logger& log = {}) {
  const auto& front = instances.front();
  const SuccessCriterion crit = make_criterion(spec, instances.size());

  CellResult cell;
  cell.model = kind;
  cell.problem = front.name;
  cell.size = front.size;
  cell.k = front.k;

  ProbeFn probe = [&](std::size_t pop, std::size_t probe_index, bool want_results) {
    ProbeOutcome out =
        run_criterion_probe(instances, kind, spec, crit, pop, probe_index, want_results);
    if (log) {
      std::ostringstream os;
      os << "probe model=" << to_string(kind) << " problem=" << front.name
         << " size=" << front.size << " k=" << front.k << " pop=" << pop
         << " pass=" << (out.pass ? 1 : 0) << " runs=" << out.runs_executed
         << " evals=" << out.evaluations << " verification=" << (want_results ? 1 : 0);
      log(os.str());
    }
    return out;
  };
  const BisectionResult bis = bisect_population_size(probe, spec.bisection);

  cell.search_evaluations = bis.total_evaluations;
  cell.non_monotone = bis.non_monotone;
  if (!bis.solved) return cell;

  cell.solved = true;
  cell.pop_size = bis.population;
  cell.runs = bis.verification_runs.size();
  std::size_t ok = 0;
  double mean = 0.0;
  for (const auto& r : bis.verification_runs) {
    ok += r.success ? 1 : 0;
    mean += static_cast<double>(r.evaluations);
    cell.t_select_ms += r.phase_totals.select_ms;
    cell.t_model_ms += r.phase_totals.model_ms;
    cell.t_sample_ms += r.phase_totals.sample_ms;
    cell.t_fitness_ms += r.phase_totals.fitness_ms;
  }
  const double n = static_cast<double>(cell.runs);
  cell.success_rate = static_cast<double>(ok) / n;
  mean /= n;
  cell.mean_evals = mean;
  double ss = 0.0;
  for (const auto& r : bis.verification_runs) {
    const double d = static_cast<double>(r.evaluations) - mean;
    ss += d * d;
  }
  cell.sd_evals = cell.runs > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  cell.t_select_ms /= n;
  cell.t_model_ms /= n;
  cell.t_sample_ms /= n;
  cell.t_fitness_ms /= n;
  cell.t_total_ms = cell.t_select_ms + cell.t_model_ms + cell.t_sample_ms + cell.t_fitness_ms;
  return cell;
}

// ---------------------------------------------------------------------------
// fits and the report

struct FitRow {
  ModelKind model = ModelKind::rbm;
  std::string metric;  // "evaluations" | "time"
  PowerLawFit fit;
};

struct ScalingReport {
  ExperimentSpec spec;
  std::string spec_hash;
  std::vector<CellResult> cells;
  std::vector<FitRow> fits;
  bool all_solved = false;
};

inline std::vector<FitRow> compute_fits(const std::vector<CellResult>& cells) {
  std::vector<FitRow> fits;
  for (const ModelKind kind : {ModelKind::rbm, ModelKind::boa}) {
    std::vector<std::pair<double, double>> ev, tm;
    for (const auto& c : cells) {
      if (c.model != kind || !c.solved) continue;
      if (c.mean_evals > 0.0) ev.emplace_back(static_cast<double>(c.size), c.mean_evals);
      if (c.t_total_ms > 0.0) tm.emplace_back(static_cast<double>(c.size), c.t_total_ms);
    }
    if (ev.size() >= 3) fits.push_back(FitRow{kind, "evaluations", fit_power_law(ev)});
    if (tm.size() >= 3) fits.push_back(FitRow{kind, "time", fit_power_law(tm)});
  }
  return fits;
}

// ---------------------------------------------------------------------------
// provenance and serialization

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

inline std::string join_models(const std::vector<ModelKind>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += to_string(v[i]);
  }
  return s;
}

/// Canonical description of what the experiment runs (seed kept separate).
inline std::string spec_canonical_string(const ExperimentSpec& s) {
  std::ostringstream os;
  os << "problem=" << s.problem << ";k=" << s.k << ";sizes=" << join_sizes(s.sizes)
     << ";models=" << join_models(s.models) << ";runs=" << s.runs
     << ";instances=" << s.instances << ";runs_per_instance=" << s.runs_per_instance
     << ";workers=" << s.workers << ";bisect=" << s.bisection.start_size << ":"
     << s.bisection.size_cap << ";max_generations=" << s.max_generations
     << ";stagnation=" << s.stagnation_limit;
  return os.str();
}

inline std::string spec_hash_hex(const ExperimentSpec& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(spec_canonical_string(s))));
  return std::string(buf);
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

inline constexpr const char* kCsvHeader =
    "model,problem,size,k,pop_size,runs,success_rate,mean_evals,sd_evals,"
    "t_select_ms,t_model_ms,t_sample_ms,t_fitness_ms,t_total_ms";

/// Fixed-schema results table. Unsolved cells carry pop_size 0 and
/// success_rate 0. Two leading comment lines embed the root seed and the
/// spec hash.
inline void write_results_csv(const ScalingReport& rep, std::ostream& os) {
  os << "# root_seed=" << rep.spec.root_seed << '\n';
  os << "# spec_hash=" << rep.spec_hash << '\n';
  os << kCsvHeader << '\n';
  for (const auto& c : rep.cells) {
    os << to_string(c.model) << ',' << c.problem << ',' << c.size << ',' << c.k << ','
       << c.pop_size << ',' << c.runs << ',' << fmt17(c.success_rate) << ','
       << fmt17(c.mean_evals) << ',' << fmt17(c.sd_evals) << ',' << fmt17(c.t_select_ms) << ','
       << fmt17(c.t_model_ms) << ',' << fmt17(c.t_sample_ms) << ',' << fmt17(c.t_fitness_ms)
       << ',' << fmt17(c.t_total_ms) << '\n';
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<CellResult> read_results_csv(std::istream& is,
                                                std::uint64_t* root_seed = nullptr,
                                                std::string* spec_hash = nullptr) {
  std::vector<CellResult> cells;
  std::string line;
  bool saw_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = line.substr(1, eq - 1);
        const std::string val = line.substr(eq + 1);
        if (root_seed && key.find("root_seed") != std::string::npos)
          *root_seed = std::stoull(val);
        if (spec_hash && key.find("spec_hash") != std::string::npos) *spec_hash = val;
      }
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader) throw std::runtime_error("results csv: unexpected header");
      saw_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 14) throw std::runtime_error("results csv: wrong column count");
    CellResult c;
    c.model = model_kind_from_string(f[0]);
    c.problem = f[1];
    c.size = std::stoull(f[2]);
    c.k = std::stoull(f[3]);
    c.pop_size = std::stoull(f[4]);
    c.runs = std::stoull(f[5]);
    c.success_rate = std::stod(f[6]);
    c.mean_evals = std::stod(f[7]);
    c.sd_evals = std::stod(f[8]);
    c.t_select_ms = std::stod(f[9]);
    c.t_model_ms = std::stod(f[10]);
    c.t_sample_ms = std::stod(f[11]);
    c.t_fitness_ms = std::stod(f[12]);
    c.t_total_ms = std::stod(f[13]);
    c.solved = c.pop_size > 0;
    cells.push_back(std::move(c));
  }
  if (!saw_header) throw std::runtime_error("results csv: missing header");
  return cells;
}

inline nlohmann::json report_to_json(const ScalingReport& rep) {
  nlohmann::json j;
  j["root_seed"] = rep.spec.root_seed;
  j["spec_hash"] = rep.spec_hash;
  j["spec"] = {{"problem", rep.spec.problem},
               {"k", rep.spec.k},
               {"sizes", rep.spec.sizes},
               {"models", join_models(rep.spec.models)},
               {"runs", rep.spec.runs},
               {"instances", rep.spec.instances},
               {"runs_per_instance", rep.spec.runs_per_instance},
               {"workers", rep.spec.workers},
               {"timing_comparable", rep.spec.workers == 1},
               {"max_generations", rep.spec.max_generations},
               {"stagnation_limit", rep.spec.stagnation_limit}};
  j["all_solved"] = rep.all_solved;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : rep.cells) {
    j["cells"].push_back({{"model", to_string(c.model)},
                          {"problem", c.problem},
                          {"size", c.size},
                          {"k", c.k},
                          {"solved", c.solved},
                          {"pop_size", c.pop_size},
                          {"runs", c.runs},
                          {"success_rate", c.success_rate},
                          {"mean_evals", c.mean_evals},
                          {"sd_evals", c.sd_evals},
                          {"t_select_ms", c.t_select_ms},
                          {"t_model_ms", c.t_model_ms},
                          {"t_sample_ms", c.t_sample_ms},
                          {"t_fitness_ms", c.t_fitness_ms},
                          {"t_total_ms", c.t_total_ms},
                          {"search_evaluations", c.search_evaluations},
                          {"non_monotone", c.non_monotone}});
  }
  j["fits"] = nlohmann::json::array();
  for (const auto& f : rep.fits) {
    j["fits"].push_back({{"model", to_string(f.model)},
                         {"metric", f.metric},
                         {"exponent", f.fit.exponent},
                         {"coefficient", f.fit.coefficient},
                         {"r_squared", f.fit.r_squared},
                         {"stderr_exponent", f.fit.stderr_exponent},
                         {"points", f.fit.points}});
  }
  return j;
}

/// Whitespace tables for the standard figure set, one file per (figure,
/// model): evaluations vs size, total time vs size, absolute phase
/// breakdown, relative phase breakdown (rows sum to 1). Returns the paths
/// written.
inline std::vector<std::string> emit_plot_data(const ScalingReport& rep,
                                               const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const auto open = [&](const std::string& name, const char* columns) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_plot_data: cannot write " + path);
    os << "# root_seed=" << rep.spec.root_seed << " spec_hash=" << rep.spec_hash << '\n';
    os << "# " << columns << '\n';
    paths.push_back(path);
    return os;
  };
  for (const ModelKind kind : {ModelKind::rbm, ModelKind::boa}) {
    std::vector<const CellResult*> solved;
    for (const auto& c : rep.cells)
      if (c.model == kind && c.solved) solved.push_back(&c);
    if (solved.empty()) continue;
    const std::string tag = to_string(kind);
    {
      auto os = open("evals_vs_size_" + tag + ".dat", "size mean_evals sd_evals");
      for (const auto* c : solved)
        os << c->size << ' ' << fmt17(c->mean_evals) << ' ' << fmt17(c->sd_evals) << '\n';
    }
    {
      auto os = open("time_vs_size_" + tag + ".dat", "size t_total_ms");
      for (const auto* c : solved) os << c->size << ' ' << fmt17(c->t_total_ms) << '\n';
    }
    {
      auto os = open("phase_abs_" + tag + ".dat",
                     "size t_select_ms t_model_ms t_sample_ms t_fitness_ms");
      for (const auto* c : solved)
        os << c->size << ' ' << fmt17(c->t_select_ms) << ' ' << fmt17(c->t_model_ms) << ' '
           << fmt17(c->t_sample_ms) << ' ' << fmt17(c->t_fitness_ms) << '\n';
    }
    {
      auto os = open("phase_rel_" + tag + ".dat",
                     "size f_select f_model f_sample f_fitness");
      for (const auto* c : solved) {
        const double total = c->t_select_ms + c->t_model_ms + c->t_sample_ms + c->t_fitness_ms;
        if (total <= 0.0) continue;
        os << c->size << ' ' << fmt17(c->t_select_ms / total) << ' '
           << fmt17(c->t_model_ms / total) << ' ' << fmt17(c->t_sample_ms / total) << ' '
           << fmt17(c->t_fitness_ms / total) << '\n';
      }
    }
  }
  return paths;
}

// ---------------------------------------------------------------------------
// config files: "[section]" headers and "key = value" lines

struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }
};

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<ConfigSection> parse_config_file(std::istream& is) {
  std::vector<ConfigSection> sections;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
      sections.push_back(ConfigSection{trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    if (sections.empty()) sections.push_back(ConfigSection{"", {}});
    sections.back().entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return sections;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ','))
    if (!trim(part).empty()) out.push_back(std::stoull(trim(part)));
  return out;
}

inline std::vector<ModelKind> parse_model_list(const std::string& s) {
  std::vector<ModelKind> out;
  for (const auto& part : split(s, ','))
    if (!trim(part).empty()) out.push_back(model_kind_from_string(trim(part)));
  return out;
}

/// One experiment per config section; unlisted keys keep the default spec's
/// values.
inline ExperimentSpec spec_from_config_section(const ConfigSection& sec,
                                               const ExperimentSpec& defaults) {
  ExperimentSpec s = defaults;
  if (const auto* v = sec.find("problem")) s.problem = *v;
  if (const auto* v = sec.find("k")) s.k = std::stoull(*v);
  if (const auto* v = sec.find("sizes")) s.sizes = parse_size_list(*v);
  if (const auto* v = sec.find("models")) s.models = parse_model_list(*v);
  if (const auto* v = sec.find("runs")) s.runs = std::stoull(*v);
  if (const auto* v = sec.find("instances")) s.instances = std::stoull(*v);
  if (const auto* v = sec.find("runs_per_instance")) s.runs_per_instance = std::stoull(*v);
  if (const auto* v = sec.find("seed")) s.root_seed = std::stoull(*v);
  if (const auto* v = sec.find("out")) s.out_dir = *v;
  if (const auto* v = sec.find("nk_instance_dir")) s.nk_instance_dir = *v;
  if (const auto* v = sec.find("workers")) s.workers = std::stoull(*v);
  if (const auto* v = sec.find("start_size")) s.bisection.start_size = std::stoull(*v);
  if (const auto* v = sec.find("size_cap")) s.bisection.size_cap = std::stoull(*v);
  if (const auto* v = sec.find("max_generations")) s.max_generations = std::stoull(*v);
  if (const auto* v = sec.find("stagnation_limit")) s.stagnation_limit = std::stoull(*v);
  return s;
}

// ---------------------------------------------------------------------------
// full experiment

inline ScalingReport run_experiment(const ExperimentSpec& spec, const Logger& log = {}) {
  validate_spec(spec);
  ScalingReport rep;
  rep.spec = spec;
  rep.spec_hash = spec_hash_hex(spec);

  // Instances are fixed per size before any model runs, so both algorithms
  // see identical problems.
  std::map<std::size_t, std::vector<ProblemInstance>> instances;
  for (const auto size : spec.sizes) instances[size] = build_instances(spec, size);

  rep.all_solved = true;
  for (const auto kind : spec.models) {
    for (const auto size : spec.sizes) {
      if (log) {
        std::ostringstream os;
        os << "cell model=" << to_string(kind) << " problem=" << spec.problem
           << " size=" << size << " k=" << spec.k << " start";
        log(os.str());
      }
      CellResult cell = run_cell(instances[size], kind, spec, log);
      if (!cell.solved) rep.all_solved = false;
      if (log) {
        std::ostringstream os;
        os << "cell model=" << to_string(kind) << " problem=" << spec.problem
           << " size=" << size << " k=" << spec.k << " solved=" << (cell.solved ? 1 : 0)
           << " pop=" << cell.pop_size << " mean_evals=" << cell.mean_evals;
        log(os.str());
      }
      rep.cells.push_back(std::move(cell));
    }
  }
  rep.fits = compute_fits(rep.cells);

  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    {
      std::ofstream os(std::filesystem::path(spec.out_dir) / "results.csv");
      write_results_csv(rep, os);
    }
    {
      std::ofstream os(std::filesystem::path(spec.out_dir) / "report.json");
      os << report_to_json(rep).dump(2) << '\n';
    }
    emit_plot_data(rep, spec.out_dir);
  }
  return rep;
}

}  // namespace eda
