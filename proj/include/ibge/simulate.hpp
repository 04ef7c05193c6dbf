#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibge/core.hpp"
#include "ibge/dag.hpp"

namespace ibge {

/// Soft: interventions shift the target's mean and damp its incoming edge
/// weights. Perfect: intervened values are redrawn, ignoring parents.
enum class Regime { Soft, Perfect };

struct InterventionSpec {
  NodeSet targets;
  /// Per target, aligned with `targets`.
  std::vector<double> shift;
  std::vector<double> damping;

  friend bool operator==(const InterventionSpec&, const InterventionSpec&) = default;
};

struct GroundTruth {
  /// Observed edges plus intervention -> target edges.
  Dag dag;
  /// weights(u, v) is the weight of u -> v; zero off the edge set.
  Eigen::MatrixXd weights;
  std::vector<InterventionSpec> interventions;
  Regime regime = Regime::Soft;
  std::vector<std::string> var_names;
  std::vector<std::string> labels;

  int n() const { return dag.n_obs(); }
  int m() const { return static_cast<int>(interventions.size()); }
  std::vector<NodeSet> targets() const;
  /// Throws ValidationError if weights, dampings or target sets are out of
  /// range or overlap.
  void validate() const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Random order; each forward pair present with p = 2 * expected_parents / (n - 1).
Dag random_dag(int n, double expected_parents, std::uint64_t seed);

/// Edge weights uniform on [0.25, 1].
Eigen::MatrixXd random_weights(const Dag& dag, std::uint64_t seed);

/// Target counts 1 + Poisson(1), drawn without replacement from a shared pool
/// so target sets are disjoint; shift ~ N(0, 1), damping ~ U[0.1, 1].
std::vector<InterventionSpec> sample_interventions(int n, int m, std::uint64_t seed);

/// m distinct single-node targets with zero shift (set-points N(0, 1)).
std::vector<InterventionSpec> sample_perfect_interventions(int n, int m, std::uint64_t seed);

struct TruthConfig {
  int n = 20;
  int m = 5;
  double expected_parents = 2.0;
  Regime regime = Regime::Soft;
  std::uint64_t seed = 0;
};

GroundTruth simulate_truth(const TruthConfig& config);

/// Row layout. Soft regime: n_obs_rows observational rows followed by
/// rows_per_intervention rows for each intervention in turn. Perfect regime:
/// total_rows rows of which round(rho * total_rows) are interventional, each
/// with a uniformly chosen intervention.
struct DataLayout {
  int n_obs_rows = 0;
  int rows_per_intervention = 0;
  int total_rows = 0;
  double rho = 0.0;

  static DataLayout soft(int n_obs_rows, int rows_per_intervention) {
    return {n_obs_rows, rows_per_intervention, 0, 0.0};
  }
  static DataLayout perfect(int total_rows, double rho) { return {0, 0, total_rows, rho}; }
};

struct SimulatedData {
  ObservedDataset data;
  InterventionDesign design;
};

/// Draws rows from the linear SEM in topological order with N(0, 1) noise.
/// The design carries the true targets as known_targets. Standardization,
/// when requested, is global and applied last.
SimulatedData generate_data(const GroundTruth& truth, const DataLayout& layout, std::uint64_t seed,
                            bool standardize_data);

enum class BenchmarkScale { Full, Desk };

struct BenchmarkSetting {
  int n = 0;
  int m = 0;
  double expected_parents = 2.0;
  int total_rows = 400;
  std::vector<int> rows_per_intervention;
  /// Sample-size multipliers (1 and the x10 large-data variant).
  std::vector<int> multipliers;
  /// Interventional fractions for the perfect-intervention study.
  std::vector<double> rho_grid;

  /// Soft layout for one (rows_per_intervention, multiplier) cell.
  DataLayout soft_layout(int rows_per_int, int multiplier = 1) const;
};

BenchmarkSetting reference_benchmark_config(BenchmarkScale scale);

std::vector<std::string> default_var_names(int n);
std::vector<std::string> default_labels(int m);

}  // namespace ibge
