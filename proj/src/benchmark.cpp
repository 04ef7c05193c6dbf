#include "ibge/benchmark.hpp"

#include <algorithm>

#include "ibge/bge.hpp"
#include "ibge/rng.hpp"

namespace ibge {
namespace {

Dag learn_map(const IbgeScorer& scorer, const LearnerSettings& s, std::uint64_t seed) {
  SearchConfig config;
  config.restarts = s.restarts;
  config.seed = seed;
  config.max_parents = s.max_parents;
  config.threads = 1;
  return map_greedy(scorer, scorer.empty_dag(), config).dag;
}

Dag learn_mcmc(const IbgeScorer& scorer, const LearnerSettings& s, std::uint64_t seed) {
  McmcConfig config;
  config.iterations = s.iterations;
  config.burnin = s.burnin;
  config.thin = s.thin;
  config.chains = s.chains;
  config.seed = seed;
  config.max_parents = s.max_parents;
  config.threads = 1;
  config.heats = s.heats;
  config.swap_every = s.swap_every;
  const auto samples = structure_mcmc(scorer, scorer.empty_dag(), config);
  return consensus_graph(edge_posterior(samples), scorer.n_obs(), s.threshold);
}

}  // namespace

bool is_known_learner(const std::string& name) {
  return name == "map" || name == "mcmc" || name == "baseline-bge";
}

Learner make_learner(const std::string& name, const LearnerSettings& settings) {
  if (!is_known_learner(name)) throw ValidationError("unknown learner: " + name);
  return [name, settings](const BenchmarkDataset& ds, double alpha_mu) {
    const auto& data = ds.sim.data;
    const auto hp = default_hyperparams(data.cols(), alpha_mu);
    const std::uint64_t seed = derive_seed(ds.seed, 2);
    if (name == "baseline-bge") {
      const IbgeScorer scorer(data, InterventionDesign::observational(data.rows()), hp,
                              {InterventionMode::Soft, TargetMode::Unknown, {settings.edge_penalty}});
      return learn_mcmc(scorer, settings, seed);
    }
    const IbgeScorer scorer(data, ds.sim.design, hp, {settings.mode, settings.targets, {settings.edge_penalty}});
    return name == "map" ? learn_map(scorer, settings, seed) : learn_mcmc(scorer, settings, seed);
  };
}

DataLayout BenchmarkConfig::layout() const {
  return regime == Regime::Soft ? DataLayout::soft(n_obs_rows, rows_per_intervention)
                                : DataLayout::perfect(total_rows, rho);
}

void BenchmarkConfig::validate() const {
  if (n < 2) throw ValidationError("benchmark needs n >= 2");
  if (m < 0) throw ValidationError("benchmark needs m >= 0");
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (alpha_mu_grid.empty()) throw ValidationError("alpha_mu grid must be nonempty");
  for (double a : alpha_mu_grid)
    if (!(a > 0.0)) throw ValidationError("alpha_mu values must be positive");
  if (learners.empty()) throw ValidationError("at least one learner is required");
  for (const auto& l : learners)
    if (!is_known_learner(l)) throw ValidationError("unknown learner: " + l);
  if (std::all_of(learners.begin(), learners.end(), [](const std::string& l) { return l == "map"; })) return;
  McmcConfig probe;
  probe.iterations = settings.iterations;
  probe.burnin = settings.burnin;
  probe.thin = settings.thin;
  probe.chains = settings.chains;
  probe.heats = settings.heats;
  probe.swap_every = settings.swap_every;
  probe.validate();
}

BenchmarkDataset make_dataset(const BenchmarkConfig& config, int repetition) {
  BenchmarkDataset ds;
  ds.id = config.name + "-" + std::to_string(repetition);
  ds.seed = derive_seed(config.seed, static_cast<std::uint64_t>(repetition));
  ds.truth = simulate_truth({config.n, config.m, config.expected_parents, config.regime, derive_seed(ds.seed, 0)});
  ds.sim = generate_data(ds.truth, config.layout(), derive_seed(ds.seed, 1), config.standardize);
  return ds;
}

std::vector<BenchmarkDataset> make_datasets(const BenchmarkConfig& config) {
  config.validate();
  std::vector<BenchmarkDataset> out(config.repetitions);
  for (int r = 0; r < config.repetitions; ++r) out[r] = make_dataset(config, r);
  return out;
}

std::vector<RocRow> run_benchmark(const BenchmarkConfig& config, int jobs, const CellSink& on_cell) {
  const auto datasets = make_datasets(config);
  std::vector<RocRow> rows;
  for (const auto& name : config.learners) {
    auto block = roc_sweep(datasets, make_learner(name, config.settings), config.alpha_mu_grid, name, jobs, on_cell);
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

}  // namespace ibge
