#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ibge/bge.hpp"
#include "ibge/dag.hpp"
#include "ibge/rng.hpp"
#include "ibge/score.hpp"
#include "ibge/search.hpp"

namespace ibge {

/// One draw of the structural equation x = alpha + beta . parents + eps,
/// eps ~ N(0, sigma2).
struct NodeParamDraw {
  int node = 0;
  double alpha = 0.0;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

/// Normal-inverse-gamma law of a node's regression on its parents:
///   sigma2 ~ InvGamma(shape, scale),
///   (alpha, beta) | sigma2 ~ N(mean, sigma2 * precision^{-1}).
/// Coefficient order is (intercept, parents...).
struct RegressionLaw {
  double shape = 0.0;
  double scale = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
};

/// Regression prior implied by the normal-Wishart prior for `node` given
/// `parents`. Its marginal likelihood on any rows equals exp(bge_local).
RegressionLaw regression_prior(int node, std::span<const int> parents, const BgeHyperparams& hp);

/// Conjugate update of regression_prior on the given rows.
RegressionLaw regression_posterior(int node, std::span<const int> parents, const ObservedDataset& data,
                                   std::span<const int> rows, const BgeHyperparams& hp);

/// Closed-form log marginal likelihood of the node's column given its
/// parents' columns under regression_prior.
double regression_log_evidence(int node, std::span<const int> parents, const ObservedDataset& data,
                               std::span<const int> rows, const BgeHyperparams& hp);

NodeParamDraw draw_from(const RegressionLaw& law, int node, Rng& rng);

/// Rows where none of the interventions acting on `node` is active. Soft
/// mode reads the node's intervention parents from `dag`; hard mode reads
/// the design's known targets.
std::vector<int> natural_state_rows(int node, const Dag& dag, const InterventionDesign& design,
                                    InterventionMode mode = InterventionMode::Soft);

/// Posterior draw of (alpha, beta, sigma2); empty rows give a prior draw.
NodeParamDraw sample_node_params(int node, std::span<const int> parents, const ObservedDataset& data,
                                 std::span<const int> rows, const BgeHyperparams& hp, std::uint64_t seed);

/// Total effects (I - B)^{-1} for a weight matrix with B(u, v) the weight of
/// u -> v. Diagonal entries are 1. Throws ValidationError unless the support
/// of B is acyclic.
Eigen::MatrixXd total_effects(const Eigen::MatrixXd& weights);

struct EffectSummary {
  int source = 0;
  int target = 0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool excludes_zero = false;
};

struct EffectResult {
  /// Ordered pairs (source, target), source != target, in row-major order.
  std::vector<EffectSummary> summaries;
  /// Draws x (n * n) matrix of effect draws, entry u * n + v; only filled
  /// when requested.
  Eigen::MatrixXd draws;
  long draw_count = 0;
};

struct EffectsConfig {
  int draws_per_dag = 1;
  std::uint64_t seed = 0;
  InterventionMode mode = InterventionMode::Soft;
  bool keep_draws = false;
};

/// Bayesian model average of hard-intervention effects over sampled DAGs.
/// Draw d of DAG k uses its own seed derived from (seed, k, d).
EffectResult posterior_effects(std::span<const Dag> dags, const ObservedDataset& data,
                               const InterventionDesign& design, const BgeHyperparams& hp,
                               const EffectsConfig& config);
EffectResult posterior_effects(const DagSampleSet& samples, const ObservedDataset& data,
                               const InterventionDesign& design, const BgeHyperparams& hp,
                               const EffectsConfig& config);

/// Linear quantile (type 7) of already sorted values.
double sorted_quantile(std::span<const double> sorted, double q);

/// Convex combination of effect matrices. Throws ValidationError unless the
/// weights are nonnegative and sum to 1.
Eigen::MatrixXd soft_effect(std::span<const Eigen::MatrixXd> hard_effects, std::span<const double> weights);

}  // namespace ibge
