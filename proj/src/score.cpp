#include "ibge/score.hpp"

#include <algorithm>
#include <cstring>

#include "ibge/rng.hpp"

namespace ibge {
namespace {

constexpr std::uint64_t kSoftTag = 0x536f6674ULL;
constexpr std::uint64_t kHardTag = 0x48617264ULL;

std::uint64_t condition_id(std::uint64_t tag, const NodeSet& interventions,
                           const std::vector<std::uint8_t>& states) {
  std::uint64_t h = mix_seed(tag);
  for (int j : interventions) h = mix_seed(h ^ static_cast<std::uint64_t>(j + 1));
  h = mix_seed(h ^ 0xA5A5A5A5ULL);
  for (auto s : states) h = mix_seed(h ^ static_cast<std::uint64_t>(s + 1));
  return h;
}

std::uint64_t hash_doubles(std::uint64_t h, const double* values, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits;
    std::memcpy(&bits, values + k, sizeof bits);
    h = mix_seed(h ^ bits);
  }
  return h;
}

// Fingerprint of everything a cached local score depends on besides node,
// parents and the condition that selects the rows, so scorers over different
// data or designs can share one cache.
std::uint64_t context_fingerprint(const ObservedDataset& data, const InterventionDesign& design,
                                  const BgeHyperparams& hp) {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(data.rows()) * 131 + data.cols());
  h = mix_seed(h ^ static_cast<std::uint64_t>(design.m));
  for (std::uint8_t s : design.row_states) h = mix_seed(h ^ s);
  h = hash_doubles(h, data.values.data(), static_cast<std::size_t>(data.values.size()));
  const double scalars[2] = {hp.alpha_mu, hp.alpha_w};
  h = hash_doubles(h, scalars, 2);
  h = hash_doubles(h, hp.T.data(), static_cast<std::size_t>(hp.T.size()));
  return hash_doubles(h, hp.nu.data(), static_cast<std::size_t>(hp.nu.size()));
}

}  // namespace

ConditionPartition condition_groups(int node, const NodeSet& int_parents,
                                    const InterventionDesign& design) {
  ConditionPartition part;
  part.node = node;
  part.intervention_parents = int_parents;
  std::map<std::vector<std::uint8_t>, std::vector<int>> by_state;
  std::vector<std::uint8_t> key(int_parents.size());
  for (int r = 0; r < design.rows(); ++r) {
    for (std::size_t k = 0; k < int_parents.size(); ++k) key[k] = design.state(r, int_parents[k]);
    by_state[key].push_back(r);
  }
  for (auto& [states, rows] : by_state) part.groups.push_back({states, std::move(rows)});
  return part;
}

IbgeScorer::IbgeScorer(ObservedDataset data, InterventionDesign design, BgeHyperparams hp,
                       ScoreOptions options, std::shared_ptr<LocalScoreCache> cache)
    : data_(std::make_shared<const ObservedDataset>(std::move(data))),
      design_(std::make_shared<const InterventionDesign>(std::move(design))),
      hp_(std::move(hp)),
      options_(options),
      cache_(cache ? std::move(cache) : std::make_shared<LocalScoreCache>()) {
  validate_dataset(*data_, *design_);
  hp_.validate();
  if (hp_.dim() != data_->cols()) throw ValidationError("hyperparameter dimension does not match data");
  fingerprint_ = context_fingerprint(*data_, *design_, hp_);

  const bool needs_targets =
      options_.mode == InterventionMode::Hard || options_.targets == TargetMode::Known;
  if (needs_targets && design_->m > 0 && !design_->known_targets) {
    throw ValidationError("known-target scoring requires known_targets in the design");
  }
  if (options_.mode == InterventionMode::Hard) {
    const int n = data_->cols();
    std::vector<NodeSet> targeting(n);
    if (design_->known_targets) {
      for (int j = 0; j < design_->m; ++j)
        for (int v : (*design_->known_targets)[j]) targeting[v].push_back(j);
    }
    hard_subsets_.assign(n, std::vector<RowSubset>(1));
    for (int v = 0; v < n; ++v) {
      RowSubset& s = hard_subsets_[v][0];
      for (int r = 0; r < design_->rows(); ++r) {
        bool intervened = false;
        for (int j : targeting[v]) intervened = intervened || design_->is_active(r, j);
        if (!intervened) s.rows.push_back(r);
      }
      // The all-rows subset must share its id with the soft/observational
      // one so that m = 0 scores are bit-identical across modes.
      s.id = fingerprint_ ^ (targeting[v].empty() ? condition_id(kSoftTag, {}, {})
                                              : condition_id(kHardTag, targeting[v], {}));
    }
  }
}

bool IbgeScorer::searches_int_edges() const {
  return options_.mode == InterventionMode::Soft && options_.targets == TargetMode::Unknown &&
         design_->m > 0;
}

Dag IbgeScorer::empty_dag() const {
  Dag dag(n_obs(), n_int());
  if (!searches_int_edges() && design_->known_targets) {
    for (int j = 0; j < design_->m; ++j)
      for (int v : (*design_->known_targets)[j]) dag.add_int_edge(j, v);
  }
  return dag;
}

const std::vector<RowSubset>& IbgeScorer::subsets_for(int node, const NodeSet& int_parents) const {
  if (options_.mode == InterventionMode::Hard) return hard_subsets_[node];
  std::lock_guard lock(partition_mutex_);
  auto it = partitions_.find(int_parents);
  if (it != partitions_.end()) return it->second;
  std::vector<RowSubset> subsets;
  for (auto& g : condition_groups(node, int_parents, *design_).groups) {
    subsets.push_back({std::move(g.rows), fingerprint_ ^ condition_id(kSoftTag, int_parents, g.states)});
  }
  return partitions_.emplace(int_parents, std::move(subsets)).first->second;
}

const PosteriorParams& IbgeScorer::posterior_for(const RowSubset& subset) const {
  {
    std::lock_guard lock(posterior_mutex_);
    auto it = posteriors_.find(subset.id);
    if (it != posteriors_.end()) return *it->second;
  }
  auto post = std::make_shared<const PosteriorParams>(posterior_params(*data_, subset.rows, hp_));
  std::lock_guard lock(posterior_mutex_);
  return *posteriors_.try_emplace(subset.id, std::move(post)).first->second;
}

double IbgeScorer::local(int node, const NodeSet& parents, const NodeSet& int_parents) const {
  auto score_subset = [&](const RowSubset& subset) {
    ScoreKey key{node, subset.id, parents};
    if (auto hit = cache_->find(key)) return *hit;
    const double value = bge_local(node, parents, posterior_for(subset), hp_);
    cache_->insert(key, value);
    return value;
  };
  if (options_.mode == InterventionMode::Hard) return score_subset(hard_subsets_[node][0]);
  double total = 0.0;
  for (const auto& subset : subsets_for(node, int_parents)) total += score_subset(subset);
  return total;
}

double IbgeScorer::total(const Dag& dag) const {
  double sum = 0.0;
  for (int v = 0; v < n_obs(); ++v) sum += local(v, dag.parents(v), dag.int_parents(v));
  return sum + log_prior(dag);
}

double ibge_local_soft(int node, const NodeSet& cont_parents, const NodeSet& int_parents,
                       const ObservedDataset& data, const InterventionDesign& design,
                       const BgeHyperparams& hp, const std::shared_ptr<LocalScoreCache>& cache) {
  IbgeScorer scorer(data, design, hp, {InterventionMode::Soft, TargetMode::Unknown, {}}, cache);
  return scorer.local(node, cont_parents, int_parents);
}

double ibge_local_hard(int node, const NodeSet& cont_parents, const ObservedDataset& data,
                       const InterventionDesign& design, const BgeHyperparams& hp,
                       const std::shared_ptr<LocalScoreCache>& cache) {
  IbgeScorer scorer(data, design, hp, {InterventionMode::Hard, TargetMode::Known, {}}, cache);
  return scorer.local(node, cont_parents, {});
}

double ibge_total(const Dag& dag, const ObservedDataset& data, const InterventionDesign& design,
                  InterventionMode mode, const BgeHyperparams& hp, const GraphPrior& prior,
                  const std::shared_ptr<LocalScoreCache>& cache) {
  const TargetMode targets = mode == InterventionMode::Hard ? TargetMode::Known : TargetMode::Unknown;
  IbgeScorer scorer(data, design, hp, {mode, targets, prior}, cache);
  return scorer.total(dag);
}

}  // namespace ibge
