#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "fixtures.hpp"
#include "ibge/bge.hpp"
#include "oracles.hpp"

using namespace ibge;

TEST_CASE("default_hyperparams", "[bge]") {
  const auto big = default_hyperparams(100, 0.1);
  CHECK(big.alpha_w == Catch::Approx(101.1).epsilon(1e-15));
  const auto one = default_hyperparams(1, 1.0);
  CHECK(one.alpha_w == 3.0);
  CHECK(one.T(0, 0) == 0.5);
  CHECK(one.nu(0) == 0.0);
  for (double a : {1e-6, 0.00248, 0.1, 1.0, 50.0})
    for (int n : {1, 2, 20, 100}) CHECK(default_hyperparams(n, a).T(0, 0) > 0.0);
  CHECK_THROWS_AS(default_hyperparams(3, 0.0), ValidationError);
}

TEST_CASE("hyperparameter validation", "[bge]") {
  auto hp = default_hyperparams(3, 1.0);
  REQUIRE_NOTHROW(hp.validate());
  hp.alpha_w = 2.0;
  CHECK_THROWS_AS(hp.validate(), ValidationError);
  hp = default_hyperparams(3, 1.0);
  hp.T(0, 1) = 5.0;
  hp.T(1, 0) = 5.0;
  CHECK_THROWS(hp.validate());
}

TEST_CASE("log_det_spd refuses near-singular matrices", "[bge]") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  CHECK_THROWS_AS(log_det_spd(a), CholeskyError);
  a << 2, 1, 1, 2;
  CHECK(log_det_spd(a) == Catch::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("posterior_params on the empty subset returns the prior", "[bge]") {
  std::mt19937_64 gen(1);
  const auto hp = fixture::random_hyperparams(3, gen);
  const auto data = fixture::dataset(fixture::gaussian(5, 3, gen));
  const auto post = posterior_params(data, {}, hp);
  CHECK(post.nu_post == hp.nu);
  CHECK(post.R == hp.T);
  CHECK(post.alpha_mu_post == hp.alpha_mu);
  CHECK(post.alpha_w_post == hp.alpha_w);
}

TEST_CASE("posterior_params with one row equal to nu leaves the prior scale", "[bge]") {
  std::mt19937_64 gen(2);
  const auto hp = fixture::random_hyperparams(3, gen);
  const auto data = fixture::dataset(hp.nu.transpose());
  const std::vector<int> rows{0};
  const auto post = posterior_params(data, rows, hp);
  CHECK((post.nu_post - hp.nu).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((post.R - hp.T).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(post.alpha_mu_post == hp.alpha_mu + 1);
  CHECK(post.alpha_w_post == hp.alpha_w + 1);
}

TEST_CASE("posterior scale matrix matches the re-expanded form", "[bge]") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto hp = fixture::random_hyperparams(4, gen);
    const Eigen::MatrixXd x = 2.0 * fixture::gaussian(5, 4, gen);
    const auto post = posterior_params(fixture::dataset(x), all_rows(5), hp);
    const auto R = oracle::reexpanded_R(x, hp.T, hp.nu, hp.alpha_mu);
    CHECK((post.R - R).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("bge_local with no rows is exactly zero", "[bge]") {
  std::mt19937_64 gen(4);
  const auto hp = fixture::random_hyperparams(3, gen);
  const auto data = fixture::dataset(fixture::gaussian(4, 3, gen));
  const std::vector<int> none;
  const std::vector<int> parents{0, 2};
  CHECK(bge_local(1, parents, data, none, hp) == 0.0);
  CHECK(bge_local(1, none, data, none, hp) == 0.0);
}

TEST_CASE("single-variable closed case equals 2/pi", "[bge]") {
  const auto hp = default_hyperparams(1, 1.0);
  const auto data = fixture::dataset(Eigen::MatrixXd::Zero(1, 1));
  const double log_score = bge_local(0, {}, data, all_rows(1), hp);
  CHECK(std::abs(std::exp(log_score) - 2.0 / std::numbers::pi) < 1e-10);
  CHECK(log_score == Catch::Approx(-0.45158).margin(5e-6));
}

TEST_CASE("bge_local matches the Student-t evidence of the implied regression prior", "[bge]") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 4;
    const auto hp = fixture::random_hyperparams(n, gen);
    const int N = 1 + trial % 9;
    const auto x = fixture::gaussian(N, n, gen);
    const int node = trial % n;
    std::vector<int> parents;
    for (int v = 0; v < n; ++v)
      if (v != node && (trial >> v & 1)) parents.push_back(v);
    Eigen::MatrixXd Z(N, parents.size());
    for (std::size_t k = 0; k < parents.size(); ++k) Z.col(k) = x.col(parents[k]);
    const auto prior = oracle::implied_prior(node, parents, hp.alpha_mu, hp.alpha_w, hp.T, hp.nu);
    const double expected = oracle::student_t_log_evidence(x.col(node), Z, prior);
    const double got = bge_local(node, parents, fixture::dataset(x), all_rows(N), hp);
    CHECK(got == Catch::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("bge_local matches nested quadrature for small cases", "[bge]") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 4; ++trial) {
    const auto hp = fixture::random_hyperparams(2, gen);
    const int N = 1 + trial;
    const auto x = fixture::gaussian(N, 2, gen);
    std::vector<int> parents;
    if (trial % 2) parents.push_back(0);
    Eigen::MatrixXd Z(N, parents.size());
    if (!parents.empty()) Z.col(0) = x.col(0);
    const auto prior = oracle::implied_prior(1, parents, hp.alpha_mu, hp.alpha_w, hp.T, hp.nu);
    const double expected = oracle::quadrature_evidence(x.col(1), Z, prior);
    const double got = std::exp(bge_local(1, parents, fixture::dataset(x), all_rows(N), hp));
    CHECK(got == Catch::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("total score is constant within Markov classes on three nodes", "[bge]") {
  std::mt19937_64 gen(7);
  const auto x = fixture::chain_data(30, 3, 0.7, gen);
  const auto data = fixture::dataset(x);
  const auto hp = default_hyperparams(3, 1.0);
  std::map<std::string, std::vector<double>> by_class;
  for (const auto& a : oracle::all_dags(3)) {
    double total = 0.0;
    for (int v = 0; v < 3; ++v) {
      std::vector<int> pa;
      for (int u = 0; u < 3; ++u)
        if (a[u][v]) pa.push_back(u);
      total += bge_local(v, pa, data, all_rows(30), hp);
    }
    by_class[oracle::markov_key(a)].push_back(total);
  }
  CHECK(by_class.size() == 11);
  for (const auto& [key, scores] : by_class) {
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    CHECK(*hi - *lo < 1e-8);
  }
}

TEST_CASE("scores stay finite on large and duplicated data", "[bge]") {
  std::mt19937_64 gen(8);
  auto x = fixture::chain_data(100000, 3, 0.5, gen);
  const auto hp = default_hyperparams(3, 0.1);
  const std::vector<int> parents{0, 1};
  const double big = bge_local(2, parents, fixture::dataset(x), all_rows(100000), hp);
  CHECK(std::isfinite(big));

  const auto small = fixture::chain_data(20, 3, 0.5, gen);
  Eigen::MatrixXd dup(21, 3);
  dup << small, small.row(4);
  const double a = bge_local(2, parents, fixture::dataset(small), all_rows(20), hp);
  const double b = bge_local(2, parents, fixture::dataset(dup), all_rows(21), hp);
  CHECK(std::isfinite(a));
  CHECK(std::isfinite(b));
  // One extra row moves the log-score by roughly one observation's density.
  CHECK(std::abs(a - b) < 10.0);
}

TEST_CASE("LocalScoreCache returns the stored value", "[bge]") {
  LocalScoreCache cache;
  const ScoreKey key{2, 99, {0, 1}};
  CHECK_FALSE(cache.find(key));
  cache.insert(key, -1.25);
  REQUIRE(cache.find(key));
  CHECK(*cache.find(key) == -1.25);
  CHECK_FALSE(cache.find(ScoreKey{2, 98, {0, 1}}));
  CHECK(cache.size() == 1);
  cache.clear();
  CHECK(cache.size() == 0);
}
