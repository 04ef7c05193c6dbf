#include "ibge/bge.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ibge/rng.hpp"

namespace ibge {

double log_det_spd(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  // Plain right-looking factorization so that every pivot can be checked
  // against the tolerance before the square root is taken.
  Eigen::MatrixXd l = a;
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = l(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot >= kCholeskyPivotTolerance)) {
      throw CholeskyError("Cholesky pivot " + std::to_string(pivot) + " below tolerance at index " +
                          std::to_string(j));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    log_det += std::log(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = l(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return log_det;
}

void BgeHyperparams::validate() const {
  const int n = dim();
  if (n < 1) throw ValidationError("hyperparameter dimension must be >= 1");
  if (!(alpha_mu > 0.0)) throw ValidationError("alpha_mu must be positive");
  if (!(alpha_w > n - 1)) throw ValidationError("alpha_w must exceed n - 1");
  if (T.rows() != n || T.cols() != n) throw ValidationError("T must be n x n");
  if (!T.isApprox(T.transpose(), 1e-12)) throw ValidationError("T must be symmetric");
  try {
    log_det_spd(T);
  } catch (const CholeskyError&) {
    throw ValidationError("T must be positive definite");
  }
}

BgeHyperparams default_hyperparams(int n, double alpha_mu) {
  if (!(alpha_mu > 0.0)) throw ValidationError("alpha_mu must be positive");
  BgeHyperparams hp;
  hp.alpha_mu = alpha_mu;
  hp.alpha_w = alpha_mu + n + 1;
  const double t = alpha_mu * (hp.alpha_w - n - 1) / (alpha_mu + 1);
  hp.T = t * Eigen::MatrixXd::Identity(n, n);
  hp.nu = Eigen::VectorXd::Zero(n);
  return hp;
}

PosteriorParams posterior_params(const ObservedDataset& data, std::span<const int> rows,
                                 const BgeHyperparams& hp) {
  PosteriorParams post;
  const int n_rows = static_cast<int>(rows.size());
  post.n_rows = n_rows;
  post.alpha_mu_post = hp.alpha_mu + n_rows;
  post.alpha_w_post = hp.alpha_w + n_rows;
  if (n_rows == 0) {
    post.nu_post = hp.nu;
    post.R = hp.T;
    return post;
  }
  const Eigen::Index n = data.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (int r : rows) mean += data.values.row(r).transpose();
  mean /= n_rows;
  Eigen::MatrixXd centered(n_rows, n);
  for (int k = 0; k < n_rows; ++k) centered.row(k) = data.values.row(rows[k]) - mean.transpose();
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(n, n);
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  scatter = scatter.selfadjointView<Eigen::Lower>();

  const Eigen::VectorXd diff = mean - hp.nu;
  const double shrink = n_rows * hp.alpha_mu / (n_rows + hp.alpha_mu);
  post.R = hp.T + scatter + shrink * diff * diff.transpose();
  post.nu_post = (n_rows * mean + hp.alpha_mu * hp.nu) / (n_rows + hp.alpha_mu);
  return post;
}

double bge_local(int node, std::span<const int> parents, const PosteriorParams& post,
                 const BgeHyperparams& hp) {
  const int n = hp.dim();
  const int p = static_cast<int>(parents.size());
  const double big_n = post.n_rows;
  if (post.n_rows == 0) return 0.0;

  std::vector<int> family(parents.begin(), parents.end());
  family.push_back(node);
  const std::vector<int> pa(parents.begin(), parents.end());

  // a = alpha_w - n + p + 1 is the degrees of freedom of the family's
  // marginal inverse-Wishart.
  const double a = hp.alpha_w - n + p + 1;
  double score = 0.5 * (std::log(hp.alpha_mu) - std::log(big_n + hp.alpha_mu)) +
                 std::lgamma(0.5 * (big_n + a)) - std::lgamma(0.5 * a) -
                 0.5 * big_n * std::log(std::numbers::pi);
  score += 0.5 * a * log_det_spd(hp.T(family, family));
  score -= 0.5 * (big_n + a) * log_det_spd(post.R(family, family));
  if (p > 0) {
    score += 0.5 * (big_n + a - 1) * log_det_spd(post.R(pa, pa));
    score -= 0.5 * (a - 1) * log_det_spd(hp.T(pa, pa));
  }
  return score;
}

double bge_local(int node, std::span<const int> parents, const ObservedDataset& data,
                 std::span<const int> rows, const BgeHyperparams& hp) {
  return bge_local(node, parents, posterior_params(data, rows, hp), hp);
}

std::vector<int> all_rows(int n_rows) {
  std::vector<int> rows(n_rows);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::size_t ScoreKeyHash::operator()(const ScoreKey& k) const noexcept {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.node) ^ (k.subset_id * 0x9E3779B97F4A7C15ULL));
  for (int v : k.parents) h = mix_seed(h ^ static_cast<std::uint64_t>(v + 1));
  return static_cast<std::size_t>(h);
}

LocalScoreCache::Shard& LocalScoreCache::shard(const ScoreKey& key) const {
  return shards_[ScoreKeyHash{}(key) % kShards];
}

std::optional<double> LocalScoreCache::find(const ScoreKey& key) const {
  auto& s = shard(key);
  std::shared_lock lock(s.mutex);
  auto it = s.map.find(key);
  if (it == s.map.end()) return std::nullopt;
  return it->second;
}

void LocalScoreCache::insert(const ScoreKey& key, double value) {
  auto& s = shard(key);
  std::unique_lock lock(s.mutex);
  s.map.insert_or_assign(key, value);
}

std::size_t LocalScoreCache::size() const {
  std::size_t total = 0;
  for (auto& s : shards_) {
    std::shared_lock lock(s.mutex);
    total += s.map.size();
  }
  return total;
}

void LocalScoreCache::clear() {
  for (auto& s : shards_) {
    std::unique_lock lock(s.mutex);
    s.map.clear();
  }
}

}  // namespace ibge
