#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibge/bge.hpp"
#include "ibge/core.hpp"

namespace fixture {

inline ibge::ObservedDataset dataset(const Eigen::MatrixXd& values) {
  ibge::ObservedDataset d;
  d.values = values;
  for (int j = 0; j < values.cols(); ++j) d.var_names.push_back("X" + std::to_string(j + 1));
  return d;
}

inline Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(gen);
  return m;
}

/// Symmetric positive definite with a non-trivial off-diagonal part.
inline Eigen::MatrixXd spd(int n, std::mt19937_64& gen) {
  const Eigen::MatrixXd a = gaussian(n, n, gen);
  return 0.3 * a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
}

/// Non-default hyperparameters: random nu, full T, alpha_w above the minimum.
inline ibge::BgeHyperparams random_hyperparams(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  ibge::BgeHyperparams hp;
  hp.alpha_mu = u(gen);
  hp.alpha_w = n + 1 + u(gen);
  hp.T = spd(n, gen);
  hp.nu = 0.5 * gaussian(n, 1, gen).col(0);
  return hp;
}

/// Linear Gaussian data on a chain 0 -> 1 -> ... with the given weight.
inline Eigen::MatrixXd chain_data(int rows, int cols, double weight, std::mt19937_64& gen) {
  Eigen::MatrixXd x = gaussian(rows, cols, gen);
  for (int j = 1; j < cols; ++j) x.col(j) += weight * x.col(j - 1);
  return x;
}

inline std::vector<int> span_of(std::initializer_list<int> xs) { return std::vector<int>(xs); }

}  // namespace fixture
