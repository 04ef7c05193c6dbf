#include "ibge/effects.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace ibge {
namespace {

// Coefficient design [1, parents] on the selected rows.
Eigen::MatrixXd design_matrix(std::span<const int> parents, const ObservedDataset& data,
                              std::span<const int> rows) {
  Eigen::MatrixXd z(rows.size(), parents.size() + 1);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    z(k, 0) = 1.0;
    for (std::size_t j = 0; j < parents.size(); ++j) z(k, j + 1) = data.values(rows[k], parents[j]);
  }
  return z;
}

Eigen::VectorXd response(int node, const ObservedDataset& data, std::span<const int> rows) {
  Eigen::VectorXd y(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) y(k) = data.values(rows[k], node);
  return y;
}

struct Update {
  RegressionLaw law;
  double log_evidence = 0.0;
};

Update conjugate_update(const RegressionLaw& prior, const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  Update out;
  RegressionLaw& post = out.law;
  const double n_rows = static_cast<double>(y.size());
  post.precision = prior.precision + z.transpose() * z;
  const Eigen::LLT<Eigen::MatrixXd> chol(post.precision);
  post.mean = chol.solve(prior.precision * prior.mean + z.transpose() * y);
  const Eigen::VectorXd resid = y - z * post.mean;
  const Eigen::VectorXd shift = post.mean - prior.mean;
  post.shape = prior.shape + 0.5 * n_rows;
  post.scale = prior.scale + 0.5 * (resid.squaredNorm() + shift.dot(prior.precision * shift));
  out.log_evidence = -0.5 * n_rows * std::log(2.0 * std::numbers::pi) +
                     0.5 * (log_det_spd(prior.precision) - log_det_spd(post.precision)) +
                     prior.shape * std::log(prior.scale) - post.shape * std::log(post.scale) +
                     std::lgamma(post.shape) - std::lgamma(prior.shape);
  return out;
}

}  // namespace

RegressionLaw regression_prior(int node, std::span<const int> parents, const BgeHyperparams& hp) {
  const int n = hp.dim();
  const int p = static_cast<int>(parents.size());
  const std::vector<int> pa(parents.begin(), parents.end());
  const std::vector<int> x{node};

  // Marginal of the family's covariance is inverse-Wishart(T_YY, a) with
  // a = alpha_w - n + p + 1. Splitting it into parents and node gives
  //   sigma2 ~ InvGamma(a / 2, T_{X|P} / 2),  beta | sigma2 ~ N(T_PP^{-1} T_PX, sigma2 T_PP^{-1}),
  // and the normal mean prior gives
  //   alpha | beta, sigma2 ~ N(nu_X - beta . nu_P, sigma2 / alpha_mu).
  RegressionLaw law;
  law.shape = 0.5 * (hp.alpha_w - n + p + 1);
  law.mean.resize(p + 1);
  law.precision.resize(p + 1, p + 1);
  if (p == 0) {
    law.scale = 0.5 * hp.T(node, node);
    law.mean(0) = hp.nu(node);
    law.precision(0, 0) = hp.alpha_mu;
    return law;
  }
  const Eigen::MatrixXd t_pp = hp.T(pa, pa);
  const Eigen::VectorXd t_px = hp.T(pa, x);
  const Eigen::VectorXd nu_p = hp.nu(pa);
  const Eigen::LLT<Eigen::MatrixXd> chol(t_pp);
  const Eigen::VectorXd beta0 = chol.solve(t_px);
  law.scale = 0.5 * (hp.T(node, node) - t_px.dot(beta0));
  law.mean(0) = hp.nu(node) - beta0.dot(nu_p);
  law.mean.tail(p) = beta0;
  // With alpha = c - beta . nu_P + e, the joint precision of (alpha, beta)
  // in units of sigma2 is
  //   [ alpha_mu            alpha_mu nu_P^T               ]
  //   [ alpha_mu nu_P       T_PP + alpha_mu nu_P nu_P^T    ].
  law.precision(0, 0) = hp.alpha_mu;
  law.precision.block(0, 1, 1, p) = hp.alpha_mu * nu_p.transpose();
  law.precision.block(1, 0, p, 1) = hp.alpha_mu * nu_p;
  law.precision.block(1, 1, p, p) = t_pp + hp.alpha_mu * nu_p * nu_p.transpose();
  return law;
}

RegressionLaw regression_posterior(int node, std::span<const int> parents, const ObservedDataset& data,
                                   std::span<const int> rows, const BgeHyperparams& hp) {
  const RegressionLaw prior = regression_prior(node, parents, hp);
  if (rows.empty()) return prior;
  return conjugate_update(prior, design_matrix(parents, data, rows), response(node, data, rows)).law;
}

double regression_log_evidence(int node, std::span<const int> parents, const ObservedDataset& data,
                               std::span<const int> rows, const BgeHyperparams& hp) {
  if (rows.empty()) return 0.0;
  const RegressionLaw prior = regression_prior(node, parents, hp);
  return conjugate_update(prior, design_matrix(parents, data, rows), response(node, data, rows)).log_evidence;
}

NodeParamDraw draw_from(const RegressionLaw& law, int node, Rng& rng) {
  NodeParamDraw draw;
  draw.node = node;
  draw.sigma2 = law.scale / rng.gamma(law.shape);
  const Eigen::Index k = law.mean.size();
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
  // precision = L L^T, so L^{-T} z has covariance precision^{-1}.
  const Eigen::LLT<Eigen::MatrixXd> chol(law.precision);
  const Eigen::VectorXd coef =
      law.mean + std::sqrt(draw.sigma2) * chol.matrixU().solve(z);
  draw.alpha = coef(0);
  draw.beta = coef.tail(k - 1);
  return draw;
}

std::vector<int> natural_state_rows(int node, const Dag& dag, const InterventionDesign& design,
                                    InterventionMode mode) {
  NodeSet acting;
  if (mode == InterventionMode::Soft) {
    acting = dag.int_parents(node);
  } else if (design.m > 0) {
    if (!design.known_targets) throw ValidationError("hard mode requires known targets");
    for (int j = 0; j < design.m; ++j) {
      const auto& t = (*design.known_targets)[j];
      if (std::find(t.begin(), t.end(), node) != t.end()) acting.push_back(j);
    }
  }
  std::vector<int> rows;
  for (int r = 0; r < design.rows(); ++r) {
    bool active = false;
    for (int j : acting) active = active || design.is_active(r, j);
    if (!active) rows.push_back(r);
  }
  return rows;
}

NodeParamDraw sample_node_params(int node, std::span<const int> parents, const ObservedDataset& data,
                                 std::span<const int> rows, const BgeHyperparams& hp, std::uint64_t seed) {
  Rng rng(seed);
  return draw_from(regression_posterior(node, parents, data, rows, hp), node, rng);
}

Eigen::MatrixXd total_effects(const Eigen::MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) throw ValidationError("weight matrix must be square");
  Dag support(n);
  for (int u = 0; u < n; ++u) {
    if (weights(u, u) != 0.0) throw ValidationError("weight matrix has a self-loop; I - B may be singular");
    for (int v = 0; v < n; ++v)
      if (u != v && weights(u, v) != 0.0) support.add_edge(u, v);
  }
  std::vector<int> order;
  try {
    order = topological_sort(support);
  } catch (const CycleError& e) {
    throw ValidationError(std::string("weight matrix is not supported on a DAG: ") + e.what());
  }
  std::vector<int> position(n);
  for (int k = 0; k < n; ++k) position[order[k]] = k;

  // Forward substitution along the order: effect(u, v) = sum_w effect(u, w) B(w, v).
  Eigen::MatrixXd effects = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    effects(u, u) = 1.0;
    for (int k = position[u] + 1; k < n; ++k) {
      const int v = order[k];
      double sum = 0.0;
      for (int w : support.parents(v)) sum += effects(u, w) * weights(w, v);
      effects(u, v) = sum;
    }
  }
  return effects;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EffectResult posterior_effects(std::span<const Dag> dags, const ObservedDataset& data,
                               const InterventionDesign& design, const BgeHyperparams& hp,
                               const EffectsConfig& config) {
  if (dags.empty()) throw ValidationError("posterior_effects needs at least one DAG");
  if (config.draws_per_dag < 1) throw ValidationError("draws_per_dag must be >= 1");
  const int n = data.cols();
  const long total = static_cast<long>(dags.size()) * config.draws_per_dag;

  // Regression posteriors depend only on (node, parents, natural-state rows);
  // sampled DAGs repeat heavily, so memoize them.
  using LawKey = std::tuple<int, NodeSet, std::vector<int>>;
  std::map<LawKey, RegressionLaw> laws;

  std::vector<std::vector<double>> pair_draws(static_cast<std::size_t>(n) * n);
  for (auto& d : pair_draws) d.reserve(total);
  EffectResult out;
  out.draw_count = total;
  if (config.keep_draws) out.draws.resize(total, static_cast<Eigen::Index>(n) * n);

  long row = 0;
  for (std::size_t k = 0; k < dags.size(); ++k) {
    const Dag& dag = dags[k];
    if (dag.n_obs() != n) throw ValidationError("sampled DAG does not match the data dimension");
    std::vector<const RegressionLaw*> node_laws(n);
    std::vector<NodeSet> node_parents(n);
    for (int v = 0; v < n; ++v) {
      node_parents[v] = dag.parents(v);
      auto rows = natural_state_rows(v, dag, design, config.mode);
      LawKey key{v, node_parents[v], std::move(rows)};
      auto it = laws.find(key);
      if (it == laws.end()) {
        auto law = regression_posterior(v, node_parents[v], data, std::get<2>(key), hp);
        it = laws.emplace(std::move(key), std::move(law)).first;
      }
      node_laws[v] = &it->second;
    }
    const std::uint64_t dag_seed = derive_seed(config.seed, k);
    for (int d = 0; d < config.draws_per_dag; ++d, ++row) {
      Rng rng(derive_seed(dag_seed, static_cast<std::uint64_t>(d)));
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
      for (int v = 0; v < n; ++v) {
        const NodeParamDraw draw = draw_from(*node_laws[v], v, rng);
        for (std::size_t j = 0; j < node_parents[v].size(); ++j) b(node_parents[v][j], v) = draw.beta(j);
      }
      const Eigen::MatrixXd e = total_effects(b);
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
          pair_draws[static_cast<std::size_t>(u) * n + v].push_back(e(u, v));
          if (config.keep_draws) out.draws(row, static_cast<Eigen::Index>(u) * n + v) = e(u, v);
        }
    }
  }

  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      auto& draws = pair_draws[static_cast<std::size_t>(u) * n + v];
      EffectSummary s;
      s.source = u;
      s.target = v;
      double sum = 0.0;
      for (double x : draws) sum += x;
      s.mean = sum / static_cast<double>(draws.size());
      std::sort(draws.begin(), draws.end());
      s.lower = sorted_quantile(draws, 0.025);
      s.upper = sorted_quantile(draws, 0.975);
      s.excludes_zero = s.lower > 0.0 || s.upper < 0.0;
      out.summaries.push_back(s);
    }
  }
  return out;
}

EffectResult posterior_effects(const DagSampleSet& samples, const ObservedDataset& data,
                               const InterventionDesign& design, const BgeHyperparams& hp,
                               const EffectsConfig& config) {
  std::vector<Dag> dags;
  dags.reserve(samples.samples.size());
  for (const auto& s : samples.samples) dags.push_back(s.dag);
  return posterior_effects(std::span<const Dag>(dags), data, design, hp, config);
}

Eigen::MatrixXd soft_effect(std::span<const Eigen::MatrixXd> hard_effects, std::span<const double> weights) {
  if (hard_effects.empty() || hard_effects.size() != weights.size()) {
    throw ValidationError("need one weight per effect matrix");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("mixing weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("mixing weights must sum to 1");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(hard_effects[0].rows(), hard_effects[0].cols());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (hard_effects[k].rows() != out.rows() || hard_effects[k].cols() != out.cols()) {
      throw ValidationError("effect matrices differ in shape");
    }
    out += weights[k] * hard_effects[k];
  }
  return out;
}

}  // namespace ibge
