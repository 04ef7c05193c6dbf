#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ibge/dag.hpp"
#include "ibge/score.hpp"

namespace ibge {

enum class MoveKind : std::uint8_t { Add, Delete, Reverse, AddInt, DeleteInt };

/// Single-edge move. For observed moves `from`/`to` name the edge as it is
/// (Delete, Reverse) or will be (Add); for intervention moves `from` is the
/// intervention index.
struct Move {
  MoveKind kind;
  int from;
  int to;
  friend bool operator==(const Move&, const Move&) = default;
};

struct MoveConstraints {
  bool int_moves = false;
  /// Cap on observed parents per node; negative means unbounded.
  int max_parents = -1;
};

/// Every acyclicity-preserving move from `dag`, ordered by
/// (child, parent, kind) with intervention parents after observed ones.
std::vector<Move> legal_moves(const Dag& dag, const MoveConstraints& constraints);
std::size_t count_legal_moves(const Dag& dag, const MoveConstraints& constraints);
void apply_move(Dag& dag, const Move& move);

/// Change in total log-score (likelihood and prior) from applying `move`,
/// given the current per-node local scores.
double move_delta(const IbgeScorer& scorer, const Dag& dag, const std::vector<double>& local_scores,
                  const Move& move);

struct SearchConfig {
  int restarts = 1;
  int max_sweeps = 100000;
  std::uint64_t seed = 0;
  int max_parents = -1;
  /// Worker threads for restarts; 0 picks the hardware concurrency.
  int threads = 0;
};

struct SearchResult {
  Dag dag;
  double log_score = 0.0;
  /// Score after every accepted move, one trace per restart.
  std::vector<std::vector<double>> traces;
  int best_restart = 0;
};

/// Best-improvement hill climbing. Restart 0 starts from `init`; later
/// restarts start from random sparse DAGs drawn from the seed stream.
SearchResult map_greedy(const IbgeScorer& scorer, const Dag& init, const SearchConfig& config);

struct McmcConfig {
  long iterations = 100000;
  long burnin = 20000;
  long thin = 100;
  int chains = 1;
  std::uint64_t seed = 0;
  int max_parents = -1;
  /// Compare the running score with a full rescore every this many
  /// iterations (0 disables).
  long check_every = 10000;
  int threads = 0;
  /// Inverse temperatures for replica exchange, starting at 1 and strictly
  /// decreasing. Only the first (cold) replica is recorded; the default runs
  /// a plain single chain.
  std::vector<double> heats = {1.0};
  /// Iterations between swap proposals of a random adjacent replica pair.
  long swap_every = 10;

  void validate() const;
};

struct DagSample {
  Dag dag;
  double log_score = 0.0;
  int chain = 0;
  long iteration = 0;
};

struct ChainStats {
  long proposed = 0;
  long accepted = 0;
  /// Largest |running score - full rescore| seen at the spot checks.
  double max_check_error = 0.0;
  /// Log-score of each recorded sample.
  std::vector<double> trace;
  /// Replica-exchange swaps (zero for a single heat).
  long swaps_proposed = 0;
  long swaps_accepted = 0;
};

struct DagSampleSet {
  std::vector<DagSample> samples;
  std::vector<ChainStats> chains;
};

/// Metropolis-Hastings over DAGs with moves drawn uniformly from the legal
/// neighbourhood and the |nbhd(G)| / |nbhd(G')| Hastings correction. With
/// several heats, each chain runs tempered replicas (target exp(heat * score))
/// and proposes swaps between neighbours; the cold replica's stationary law
/// is unchanged.
DagSampleSet structure_mcmc(const IbgeScorer& scorer, const Dag& init, const McmcConfig& config);

/// (n + m) x n edge frequencies: rows 0..n-1 are observed sources, rows
/// n..n+m-1 intervention sources.
Eigen::MatrixXd edge_posterior(const DagSampleSet& samples);

/// Edges with frequency strictly above `threshold`. The result may contain
/// cycles when threshold < 0.5.
Dag consensus_graph(const Eigen::MatrixXd& posterior, int n_obs, double threshold = 0.5);

/// Random DAG with independent edges along a random order, each present with
/// probability `edge_probability`. Used to seed restarts.
Dag random_sparse_dag(int n_obs, int n_int, double edge_probability, std::uint64_t seed);

/// Runs fn(0..count-1) on up to `threads` workers (0: hardware concurrency).
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace ibge
