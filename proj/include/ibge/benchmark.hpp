#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ibge/evaluate.hpp"
#include "ibge/score.hpp"
#include "ibge/search.hpp"
#include "ibge/simulate.hpp"

namespace ibge {

/// Structure learners shared by the CLI, the benchmark runner and tests.
struct LearnerSettings {
  double edge_penalty = 0.0;
  InterventionMode mode = InterventionMode::Soft;
  TargetMode targets = TargetMode::Unknown;
  int max_parents = -1;
  int restarts = 1;
  long iterations = 100000;
  long burnin = 20000;
  long thin = 100;
  int chains = 1;
  double threshold = 0.5;
  std::vector<double> heats = {1.0};
  long swap_every = 10;
};

/// "map": greedy MAP DAG. "mcmc": consensus of structure MCMC samples.
/// "baseline-bge": the mcmc learner on pooled data with the design dropped.
Learner make_learner(const std::string& name, const LearnerSettings& settings);
bool is_known_learner(const std::string& name);

/// Seeds of dataset r: derive_seed(seed, r). Truth, data and learner seeds
/// are substreams 0, 1 and 2 of that.
struct BenchmarkConfig {
  std::string name = "benchmark";
  int n = 20;
  int m = 5;
  double expected_parents = 2.0;
  Regime regime = Regime::Soft;
  int n_obs_rows = 300;
  int rows_per_intervention = 20;
  int total_rows = 400;
  double rho = 0.0;
  bool standardize = true;
  int repetitions = 20;
  std::uint64_t seed = 0;
  std::vector<double> alpha_mu_grid = default_alpha_mu_grid();
  std::vector<std::string> learners = {"mcmc"};
  LearnerSettings settings;

  DataLayout layout() const;
  void validate() const;
};

BenchmarkDataset make_dataset(const BenchmarkConfig& config, int repetition);
std::vector<BenchmarkDataset> make_datasets(const BenchmarkConfig& config);

/// All learners over all datasets and grid values, one block per learner.
/// `on_cell` sees every row as soon as it is finished.
std::vector<RocRow> run_benchmark(const BenchmarkConfig& config, int jobs, const CellSink& on_cell = {});

}  // namespace ibge
