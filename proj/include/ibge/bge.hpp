#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ibge/core.hpp"

namespace ibge {

/// Cholesky pivot fell below the tolerance; the matrix is numerically not
/// positive definite.
class CholeskyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kCholeskyPivotTolerance = 1e-12;

/// log |A| of a symmetric positive definite matrix through its Cholesky
/// factor. Throws CholeskyError when a pivot drops below the tolerance.
double log_det_spd(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Normal-Wishart prior on the mean and precision of the observed vector:
/// W ~ Wishart(T^{-1}, alpha_w), mu | W ~ N(nu, (alpha_mu W)^{-1}).
struct BgeHyperparams {
  double alpha_mu = 1.0;
  double alpha_w = 0.0;
  Eigen::MatrixXd T;
  Eigen::VectorXd nu;

  int dim() const { return static_cast<int>(nu.size()); }
  /// Throws ValidationError on alpha_mu <= 0, alpha_w <= n-1, shape mismatch
  /// or a T that is not symmetric positive definite.
  void validate() const;
};

/// alpha_w = alpha_mu + n + 1, nu = 0, T = t I with
/// t = alpha_mu (alpha_w - n - 1) / (alpha_mu + 1).
BgeHyperparams default_hyperparams(int n, double alpha_mu);

/// Normal-Wishart posterior after observing a row subset.
struct PosteriorParams {
  Eigen::VectorXd nu_post;
  Eigen::MatrixXd R;
  double alpha_mu_post = 0.0;
  double alpha_w_post = 0.0;
  int n_rows = 0;
};

PosteriorParams posterior_params(const ObservedDataset& data, std::span<const int> rows,
                                 const BgeHyperparams& hp);

/// Log BGe local score of `node` given `parents` from a precomputed
/// posterior. `parents` must not contain `node`.
double bge_local(int node, std::span<const int> parents, const PosteriorParams& post,
                 const BgeHyperparams& hp);

/// Convenience overload that computes the posterior for `rows` first.
double bge_local(int node, std::span<const int> parents, const ObservedDataset& data,
                 std::span<const int> rows, const BgeHyperparams& hp);

/// All row indices 0..N-1.
std::vector<int> all_rows(int n_rows);

/// Identity of a row subset in the score cache: a 64-bit hash of the
/// condition that selects it, not of the row list itself.
struct RowSubset {
  std::vector<int> rows;
  std::uint64_t id = 0;
};

struct ScoreKey {
  int node = 0;
  std::uint64_t subset_id = 0;
  NodeSet parents;

  friend bool operator==(const ScoreKey&, const ScoreKey&) = default;
};

struct ScoreKeyHash {
  std::size_t operator()(const ScoreKey& k) const noexcept;
};

/// Thread-safe memo of local log-scores. Concurrent writers of the same key
/// always store the same value, so last-write-wins is harmless.
class LocalScoreCache {
 public:
  std::optional<double> find(const ScoreKey& key) const;
  void insert(const ScoreKey& key, double value);
  std::size_t size() const;
  void clear();

 private:
  static constexpr std::size_t kShards = 16;
  struct Shard {
    mutable std::shared_mutex mutex;
    std::unordered_map<ScoreKey, double, ScoreKeyHash> map;
  };
  Shard& shard(const ScoreKey& key) const;
  mutable Shard shards_[kShards];
};

}  // namespace ibge
