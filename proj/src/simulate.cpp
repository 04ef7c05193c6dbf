#include "ibge/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ibge/rng.hpp"

namespace ibge {

std::vector<NodeSet> GroundTruth::targets() const {
  std::vector<NodeSet> out;
  for (const auto& spec : interventions) out.push_back(spec.targets);
  return out;
}

void GroundTruth::validate() const {
  dag.validate();
  const int n = dag.n_obs();
  if (weights.rows() != n || weights.cols() != n) throw ValidationError("weights must be n x n");
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      const double w = weights(u, v);
      if (dag.has_edge(u, v)) {
        if (!(w >= 0.25 && w <= 1.0)) throw ValidationError("edge weight outside [0.25, 1]");
      } else if (w != 0.0) {
        throw ValidationError("nonzero weight on a missing edge");
      }
    }
  if (dag.n_int() != m()) throw ValidationError("intervention vertex count does not match specs");
  std::vector<int> seen(n, 0);
  for (int j = 0; j < m(); ++j) {
    const auto& spec = interventions[j];
    if (spec.shift.size() != spec.targets.size() || spec.damping.size() != spec.targets.size()) {
      throw ValidationError("intervention parameters must align with targets");
    }
    if (!std::is_sorted(spec.targets.begin(), spec.targets.end())) throw ValidationError("targets must be sorted");
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
      const int v = spec.targets[k];
      if (v < 0 || v >= n) throw ValidationError("target index out of range");
      if (seen[v]++) throw ValidationError("intervention target sets overlap");
      if (!(spec.damping[k] >= 0.1 && spec.damping[k] <= 1.0)) throw ValidationError("damping outside [0.1, 1]");
      if (!dag.has_int_edge(j, v)) throw ValidationError("missing intervention edge to a target");
    }
    if (static_cast<int>(dag.int_children(j).size()) != static_cast<int>(spec.targets.size())) {
      throw ValidationError("intervention edges do not match targets");
    }
  }
}

Dag random_dag(int n, double expected_parents, std::uint64_t seed) {
  if (n < 2) throw ValidationError("random_dag needs n >= 2");
  const double p = 2.0 * expected_parents / (n - 1);
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("expected_parents must lie in [0, (n - 1) / 2]");
  Rng rng(seed);
  const auto order = rng.permutation(n);
  Dag dag(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (rng.bernoulli(p)) dag.add_edge(order[a], order[b]);
  return dag;
}

Eigen::MatrixXd random_weights(const Dag& dag, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dag.n_obs(), dag.n_obs());
  for (auto [u, v] : dag.edges()) w(u, v) = rng.uniform(0.25, 1.0);
  return w;
}

std::vector<InterventionSpec> sample_interventions(int n, int m, std::uint64_t seed) {
  if (m < 0) throw ValidationError("m must be >= 0");
  Rng rng(seed);
  std::vector<int> counts(m);
  constexpr int kMaxRetries = 1000;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
    int total = 0;
    for (int j = 0; j < m; ++j) total += counts[j] = 1 + rng.poisson(1.0);
    ok = total <= n;
  }
  if (!ok) throw ValidationError("could not draw disjoint target sets: too many targets for n");

  std::vector<int> pool(n);
  for (int v = 0; v < n; ++v) pool[v] = v;
  std::vector<InterventionSpec> specs(m);
  for (int j = 0; j < m; ++j) {
    auto& spec = specs[j];
    for (int k = 0; k < counts[j]; ++k) {
      const int pick = rng.index(static_cast<int>(pool.size()));
      spec.targets.push_back(pool[pick]);
      pool.erase(pool.begin() + pick);
    }
    std::sort(spec.targets.begin(), spec.targets.end());
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
      spec.shift.push_back(rng.normal());
      spec.damping.push_back(rng.uniform(0.1, 1.0));
    }
  }
  return specs;
}

std::vector<InterventionSpec> sample_perfect_interventions(int n, int m, std::uint64_t seed) {
  if (m < 0 || m > n) throw ValidationError("perfect regime needs 0 <= m <= n");
  Rng rng(seed);
  const auto order = rng.permutation(n);
  std::vector<InterventionSpec> specs(m);
  for (int j = 0; j < m; ++j) specs[j] = {{order[j]}, {0.0}, {1.0}};
  return specs;
}

std::vector<std::string> default_var_names(int n) {
  std::vector<std::string> names;
  for (int v = 0; v < n; ++v) names.push_back("X" + std::to_string(v + 1));
  return names;
}

std::vector<std::string> default_labels(int m) {
  std::vector<std::string> labels;
  for (int j = 0; j < m; ++j) labels.push_back("I" + std::to_string(j + 1));
  return labels;
}

GroundTruth simulate_truth(const TruthConfig& config) {
  GroundTruth truth;
  const Dag obs = random_dag(config.n, config.expected_parents, derive_seed(config.seed, 0));
  truth.weights = random_weights(obs, derive_seed(config.seed, 1));
  truth.interventions = config.regime == Regime::Soft
                            ? sample_interventions(config.n, config.m, derive_seed(config.seed, 2))
                            : sample_perfect_interventions(config.n, config.m, derive_seed(config.seed, 2));
  truth.regime = config.regime;
  truth.dag = Dag(config.n, config.m);
  for (auto [u, v] : obs.edges()) truth.dag.add_edge(u, v);
  for (int j = 0; j < config.m; ++j)
    for (int v : truth.interventions[j].targets) truth.dag.add_int_edge(j, v);
  truth.var_names = default_var_names(config.n);
  truth.labels = default_labels(config.m);
  return truth;
}

SimulatedData generate_data(const GroundTruth& truth, const DataLayout& layout, std::uint64_t seed,
                            bool standardize_data) {
  truth.validate();
  const int n = truth.n();
  const int m = truth.m();
  Rng rng(seed);

  // Active intervention per row (-1: observational).
  std::vector<int> active;
  if (truth.regime == Regime::Soft) {
    if (layout.n_obs_rows < 0 || layout.rows_per_intervention < 0) throw ValidationError("negative row counts");
    active.assign(layout.n_obs_rows, -1);
    for (int j = 0; j < m; ++j) active.insert(active.end(), layout.rows_per_intervention, j);
  } else {
    if (!(layout.rho >= 0.0 && layout.rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
    if (layout.total_rows < 0) throw ValidationError("negative row count");
    const int n_int = static_cast<int>(std::lround(layout.rho * layout.total_rows));
    if (n_int > 0 && m == 0) throw ValidationError("interventional rows requested but m = 0");
    active.assign(layout.total_rows - n_int, -1);
    for (int r = 0; r < n_int; ++r) active.push_back(rng.index(m));
  }
  const int rows = static_cast<int>(active.size());

  // Per intervention and node: damping, shift and whether it is a target.
  Eigen::MatrixXd damping = Eigen::MatrixXd::Ones(std::max(m, 1), n);
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(std::max(m, 1), n);
  std::vector<std::vector<char>> targeted(m, std::vector<char>(n, 0));
  for (int j = 0; j < m; ++j) {
    const auto& spec = truth.interventions[j];
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
      damping(j, spec.targets[k]) = spec.damping[k];
      shift(j, spec.targets[k]) = spec.shift[k];
      targeted[j][spec.targets[k]] = 1;
    }
  }

  const auto order = topological_sort(truth.dag);
  std::vector<NodeSet> parents(n);
  for (int v = 0; v < n; ++v) parents[v] = truth.dag.parents(v);

  SimulatedData out;
  out.data.values.resize(rows, n);
  out.data.var_names = truth.var_names.empty() ? default_var_names(n) : truth.var_names;
  for (int r = 0; r < rows; ++r) {
    const int j = active[r];
    for (int v : order) {
      const bool hit = j >= 0 && targeted[j][v];
      double x;
      if (hit && truth.regime == Regime::Perfect) {
        x = shift(j, v) + rng.normal();
      } else {
        const double delta = hit ? damping(j, v) : 1.0;
        x = hit ? shift(j, v) : 0.0;
        for (int u : parents[v]) x += truth.weights(u, v) * delta * out.data.values(r, u);
        x += rng.normal();
      }
      out.data.values(r, v) = x;
    }
  }

  out.design.m = m;
  out.design.n_rows = rows;
  out.design.labels = truth.labels.empty() ? default_labels(m) : truth.labels;
  out.design.row_states.assign(static_cast<std::size_t>(rows) * m, 0);
  for (int r = 0; r < rows; ++r)
    if (active[r] >= 0) out.design.row_states[static_cast<std::size_t>(r) * m + active[r]] = 1;
  out.design.known_targets = truth.targets();

  if (standardize_data && rows >= 2) out.data = standardize(out.data).data;
  return out;
}

DataLayout BenchmarkSetting::soft_layout(int rows_per_int, int multiplier) const {
  const int n_obs = total_rows - m * rows_per_int;
  if (n_obs < 0) throw ValidationError("interventional rows exceed the total row count");
  return DataLayout::soft(n_obs * multiplier, rows_per_int * multiplier);
}

BenchmarkSetting reference_benchmark_config(BenchmarkScale scale) {
  BenchmarkSetting s;
  s.expected_parents = 2.0;
  s.total_rows = 400;
  s.multipliers = {1, 10};
  s.rho_grid = {0.0, 0.01, 0.03, 0.1, 0.3, 1.0};
  if (scale == BenchmarkScale::Full) {
    s.n = 100;
    s.m = 10;
    s.rows_per_intervention = {5, 10, 20};
  } else {
    s.n = 20;
    s.m = 5;
    s.rows_per_intervention = {20};
  }
  return s;
}

}  // namespace ibge
