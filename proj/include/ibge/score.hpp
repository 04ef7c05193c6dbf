#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ibge/bge.hpp"
#include "ibge/core.hpp"
#include "ibge/dag.hpp"

namespace ibge {

/// Soft: every joint state of a node's intervention parents gets its own
/// BGe factor. Hard: rows where the node was intervened on are dropped.
enum class InterventionMode { Soft, Hard };

/// Unknown: intervention->node edges are part of the searched structure.
/// Known: they are frozen to the design's known_targets.
enum class TargetMode { Unknown, Known };

struct ConditionGroup {
  /// States of the node's intervention parents, in NodeSet order.
  std::vector<std::uint8_t> states;
  std::vector<int> rows;
};

/// Rows grouped by the joint state of a node's intervention parents.
struct ConditionPartition {
  int node = 0;
  NodeSet intervention_parents;
  /// Sorted by state tuple; only non-empty groups are listed.
  std::vector<ConditionGroup> groups;
};

ConditionPartition condition_groups(int node, const NodeSet& int_parents,
                                    const InterventionDesign& design);

/// log p(G) = -edge_penalty * (observed edges + intervention edges).
struct GraphPrior {
  double edge_penalty = 0.0;
  double log_prior(const Dag& dag) const {
    return -edge_penalty * static_cast<double>(dag.edge_count() + dag.int_edge_count());
  }
};

struct ScoreOptions {
  InterventionMode mode = InterventionMode::Soft;
  TargetMode targets = TargetMode::Unknown;
  GraphPrior prior;
};

/// Decomposable interventional BGe scorer over one dataset.
///
/// Posterior parameters are computed once per row subset and local scores
/// are memoized in a (shareable) LocalScoreCache, so the scorer can be used
/// from several search chains at once.
class IbgeScorer {
 public:
  IbgeScorer(ObservedDataset data, InterventionDesign design, BgeHyperparams hp,
             ScoreOptions options = {}, std::shared_ptr<LocalScoreCache> cache = nullptr);

  int n_obs() const { return data_->cols(); }
  int n_int() const { return design_->m; }
  const ObservedDataset& data() const { return *data_; }
  const InterventionDesign& design() const { return *design_; }
  const BgeHyperparams& hyperparams() const { return hp_; }
  const ScoreOptions& options() const { return options_; }
  LocalScoreCache& cache() const { return *cache_; }

  /// True when search may add or delete intervention->node edges.
  bool searches_int_edges() const;

  /// Empty observed graph; intervention edges set to the known targets when
  /// those are fixed, otherwise none.
  Dag empty_dag() const;

  /// Local log-score of `node`. In hard mode `int_parents` is ignored and the
  /// known targets decide which rows are dropped.
  double local(int node, const NodeSet& parents, const NodeSet& int_parents) const;

  double log_prior(const Dag& dag) const { return options_.prior.log_prior(dag); }

  /// Sum of local scores in node order plus the graph log-prior.
  double total(const Dag& dag) const;

  /// Row subsets a node is scored on (one per condition group in soft mode).
  const std::vector<RowSubset>& subsets_for(int node, const NodeSet& int_parents) const;

 private:
  const PosteriorParams& posterior_for(const RowSubset& subset) const;

  std::shared_ptr<const ObservedDataset> data_;
  std::shared_ptr<const InterventionDesign> design_;
  BgeHyperparams hp_;
  ScoreOptions options_;
  std::shared_ptr<LocalScoreCache> cache_;
  std::uint64_t fingerprint_ = 0;
  std::vector<std::vector<RowSubset>> hard_subsets_;  // one subset per node, hard mode only

  mutable std::mutex partition_mutex_;
  mutable std::map<NodeSet, std::vector<RowSubset>> partitions_;
  mutable std::mutex posterior_mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const PosteriorParams>> posteriors_;
};

/// Sum over condition groups of bge_local; intervention parents act only
/// through the partition.
double ibge_local_soft(int node, const NodeSet& cont_parents, const NodeSet& int_parents,
                       const ObservedDataset& data, const InterventionDesign& design,
                       const BgeHyperparams& hp, const std::shared_ptr<LocalScoreCache>& cache);

/// bge_local on the rows where no intervention targeting `node` is active.
/// Throws ValidationError when the design has interventions but no targets.
double ibge_local_hard(int node, const NodeSet& cont_parents, const ObservedDataset& data,
                       const InterventionDesign& design, const BgeHyperparams& hp,
                       const std::shared_ptr<LocalScoreCache>& cache);

double ibge_total(const Dag& dag, const ObservedDataset& data, const InterventionDesign& design,
                  InterventionMode mode, const BgeHyperparams& hp, const GraphPrior& prior,
                  const std::shared_ptr<LocalScoreCache>& cache);

}  // namespace ibge
