#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ibge/core.hpp"
#include "ibge/dag.hpp"
#include "ibge/simulate.hpp"

namespace ibge {

/// Partially directed graph: every adjacent pair is either directed or
/// undirected, never both.
class Pdag {
 public:
  explicit Pdag(int n = 0) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return n_; }
  void add_directed(int from, int to);
  void add_undirected(int a, int b);
  void remove(int a, int b);

  bool adjacent(int a, int b) const { return at(a, b) || at(b, a); }
  bool is_directed(int from, int to) const { return at(from, to) && !at(to, from); }
  bool is_undirected(int a, int b) const { return at(a, b) && at(b, a); }

  std::vector<std::pair<int, int>> directed_edges() const;
  /// Pairs (a, b) with a < b.
  std::vector<std::pair<int, int>> undirected_edges() const;
  int edge_count() const;

  /// Every edge of the observed part of `dag`, directed.
  static Pdag from_dag(const Dag& dag);

  friend bool operator==(const Pdag&, const Pdag&) = default;

 private:
  std::uint8_t at(int a, int b) const { return adj_[static_cast<std::size_t>(a) * n_ + b]; }
  std::uint8_t& at(int a, int b) { return adj_[static_cast<std::size_t>(a) * n_ + b]; }
  int n_;
  std::vector<std::uint8_t> adj_;
};

/// Essential graph (CPDAG) of the observed part of `dag`.
Pdag cpdag(const Dag& dag);

/// Interventional essential graph for known target sets: the augmented DAG
/// with one source vertex per intervention is reduced to skeleton plus
/// v-structures, intervention edges are kept directed, the Meek rules are
/// closed, and the intervention vertices are dropped.
Pdag interventional_eg(const Dag& dag, const std::vector<NodeSet>& targets);

/// Consensus graph as a Pdag: a pair present in both directions becomes one
/// undirected edge, everything else stays directed.
Pdag symmetrize(const Dag& graph);

/// Equivalence-class image of an estimate: interventional_eg when the
/// estimate is acyclic, otherwise its symmetrized form.
Pdag estimate_class(const Dag& estimate, const std::vector<NodeSet>& targets);

struct MetricResult {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  int p = 0;
  double shd = 0.0;
  double tpr = 0.0;
  double fprp = 0.0;
};

/// Edge-level comparison with half-counts for orientation mismatches.
/// With an empty truth (P = 0) TPR is 1 and FPRp is FP.
MetricResult compare(const Pdag& estimate, const Pdag& truth);

/// Prior mean-precision values swept for ROC-like curves (anchor 0.1).
std::vector<double> default_alpha_mu_grid();

struct BenchmarkDataset {
  std::string id;
  std::uint64_t seed = 0;
  GroundTruth truth;
  SimulatedData sim;
};

/// Returns the learned graph for a dataset at a given alpha_mu.
using Learner = std::function<Dag(const BenchmarkDataset&, double alpha_mu)>;

struct RocRow {
  std::string dataset_id;
  std::uint64_t seed = 0;
  double alpha_mu = 0.0;
  std::string regime;
  std::string learner;
  MetricResult metrics;
};

/// Receives each finished row; calls are serialized but arrive in completion
/// order.
using CellSink = std::function<void(const RocRow&)>;

/// Runs `learner` on every (dataset, alpha_mu) cell and scores it against the
/// truth's interventional essential graph. Rows are ordered by dataset, then
/// grid value.
std::vector<RocRow> roc_sweep(const std::vector<BenchmarkDataset>& datasets, const Learner& learner,
                              const std::vector<double>& alpha_mu_grid, const std::string& learner_name = "",
                              int jobs = 1, const CellSink& on_cell = {});

std::string regime_name(Regime regime);

}  // namespace ibge
