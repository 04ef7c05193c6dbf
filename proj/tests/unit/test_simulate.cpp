#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ibge/simulate.hpp"

using namespace ibge;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

Eigen::VectorXd pick(const Eigen::MatrixXd& x, int col, const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out(k) = x(rows[k], col);
  return out;
}

GroundTruth two_node(Regime regime, double w, double shift, double damping) {
  GroundTruth t;
  t.regime = regime;
  t.dag = Dag(2, 1);
  t.dag.add_edge(0, 1);
  t.dag.add_int_edge(0, 1);
  t.weights = Eigen::MatrixXd::Zero(2, 2);
  t.weights(0, 1) = w;
  t.interventions = {{{1}, {shift}, {damping}}};
  t.var_names = default_var_names(2);
  t.labels = default_labels(1);
  return t;
}

}  // namespace

TEST_CASE("random_dag edge density", "[simulate]") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Dag g = random_dag(100, 2.0, seed);
    REQUIRE(g.is_acyclic());
    REQUIRE_NOTHROW(topological_sort(g));
    total += g.edge_count();
  }
  const double mean = total / 200.0;
  CHECK(mean >= 180.0);
  CHECK(mean <= 220.0);
  CHECK(random_dag(10, 0.0, 1).edge_count() == 0);
  CHECK_THROWS_AS(random_dag(1, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(random_dag(5, 3.0, 1), ValidationError);
}

TEST_CASE("random_weights stay in range on the edge set", "[simulate]") {
  const Dag g = random_dag(30, 2.0, 4);
  const auto w = random_weights(g, 5);
  for (int u = 0; u < 30; ++u)
    for (int v = 0; v < 30; ++v) {
      if (g.has_edge(u, v)) {
        CHECK(w(u, v) >= 0.25);
        CHECK(w(u, v) <= 1.0);
      } else {
        CHECK(w(u, v) == 0.0);
      }
    }
}

TEST_CASE("sample_interventions: counts, disjointness and ranges", "[simulate]") {
  CHECK(sample_interventions(10, 0, 1).empty());
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto specs = sample_interventions(100, 10, seed);
    REQUIRE(specs.size() == 10);
    std::set<int> seen;
    for (const auto& s : specs) {
      REQUIRE(!s.targets.empty());
      REQUIRE(s.shift.size() == s.targets.size());
      REQUIRE(s.damping.size() == s.targets.size());
      for (std::size_t k = 0; k < s.targets.size(); ++k) {
        REQUIRE(seen.insert(s.targets[k]).second);
        CHECK(s.damping[k] >= 0.1);
        CHECK(s.damping[k] <= 1.0);
      }
      total += static_cast<double>(s.targets.size());
    }
  }
  const double mean = total / 200.0;
  CHECK(mean >= 18.0);
  CHECK(mean <= 22.0);
}

TEST_CASE("perfect interventions hit distinct single nodes", "[simulate]") {
  const auto specs = sample_perfect_interventions(20, 5, 3);
  REQUIRE(specs.size() == 5);
  std::set<int> seen;
  for (const auto& s : specs) {
    REQUIRE(s.targets.size() == 1);
    CHECK(s.shift[0] == 0.0);
    seen.insert(s.targets[0]);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("simulate_truth produces a valid truth", "[simulate]") {
  for (auto regime : {Regime::Soft, Regime::Perfect}) {
    TruthConfig cfg;
    cfg.regime = regime;
    cfg.seed = 17;
    const auto t = simulate_truth(cfg);
    CHECK_NOTHROW(t.validate());
    CHECK(t.n() == 20);
    CHECK(t.m() == 5);
    for (int j = 0; j < 5; ++j) CHECK(t.dag.int_children(j) == t.interventions[j].targets);
    CHECK(simulate_truth(cfg) == t);
  }
  auto bad = two_node(Regime::Soft, 0.8, 0.0, 1.0);
  bad.weights(0, 1) = 2.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = two_node(Regime::Soft, 0.8, 0.0, 0.05);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("empty DAG gives independent standard normal columns", "[simulate]") {
  GroundTruth t;
  t.dag = Dag(3);
  t.weights = Eigen::MatrixXd::Zero(3, 3);
  const auto sim = generate_data(t, DataLayout::soft(4000, 0), 1, false);
  REQUIRE(sim.data.rows() == 4000);
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd c = sim.data.values.col(j).array() - sim.data.values.col(j).mean();
    const double var = c.squaredNorm() / 3999.0;
    CHECK(var >= 0.9);
    CHECK(var <= 1.1);
  }
  CHECK(sim.design.m == 0);
}

TEST_CASE("unit-weight chain has correlation near 1/sqrt(2)", "[simulate]") {
  auto t = two_node(Regime::Soft, 1.0, 0.0, 1.0);
  t.dag.clear_int_edges();
  t.dag = Dag(2);
  t.dag.add_edge(0, 1);
  t.interventions.clear();
  t.labels.clear();
  const auto sim = generate_data(t, DataLayout::soft(4000, 0), 2, false);
  CHECK(std::abs(correlation(sim.data.values.col(0), sim.data.values.col(1)) - 1.0 / std::sqrt(2.0)) < 0.05);
}

TEST_CASE("perfect interventions sever the target from its parents", "[simulate]") {
  const auto t = two_node(Regime::Perfect, 1.0, 0.0, 1.0);
  const auto sim = generate_data(t, DataLayout::perfect(4000, 0.5), 3, false);
  std::vector<int> hit, free;
  for (int r = 0; r < sim.design.rows(); ++r) (sim.design.is_active(r, 0) ? hit : free).push_back(r);
  CHECK(hit.size() == 2000);
  CHECK(std::abs(correlation(pick(sim.data.values, 0, hit), pick(sim.data.values, 1, hit))) < 0.05);
  CHECK(correlation(pick(sim.data.values, 0, free), pick(sim.data.values, 1, free)) > 0.6);
  CHECK(generate_data(t, DataLayout::perfect(400, 1.0), 3, false).design.rows() == 400);
}

TEST_CASE("soft intervention slope estimates weight times damping", "[simulate]") {
  const double w = 0.8, delta = 0.3, shift = 1.5;
  const auto t = two_node(Regime::Soft, w, shift, delta);
  const auto sim = generate_data(t, DataLayout::soft(200, 2000), 4, false);
  std::vector<int> hit;
  for (int r = 0; r < sim.design.rows(); ++r)
    if (sim.design.is_active(r, 0)) hit.push_back(r);
  REQUIRE(hit.size() == 2000);
  const Eigen::VectorXd x = pick(sim.data.values, 0, hit);
  const Eigen::VectorXd y = pick(sim.data.values, 1, hit);
  const Eigen::VectorXd cx = x.array() - x.mean();
  const double slope = cx.dot(y) / cx.squaredNorm();
  const double intercept = y.mean() - slope * x.mean();
  const Eigen::VectorXd resid = y.array() - intercept - slope * x.array();
  const double se = std::sqrt(resid.squaredNorm() / (2000 - 2) / cx.squaredNorm());
  CHECK(std::abs(slope - w * delta) < 2.0 * se + 1e-12);
  CHECK(std::abs(intercept - shift) < 0.1);
}

TEST_CASE("soft layout puts observational rows first", "[simulate]") {
  TruthConfig cfg;
  cfg.n = 10;
  cfg.m = 3;
  cfg.seed = 5;
  const auto t = simulate_truth(cfg);
  const auto sim = generate_data(t, DataLayout::soft(40, 5), 6, true);
  REQUIRE(sim.data.rows() == 55);
  for (int r = 0; r < 40; ++r)
    for (int j = 0; j < 3; ++j) CHECK_FALSE(sim.design.is_active(r, j));
  for (int j = 0; j < 3; ++j)
    for (int r = 40 + 5 * j; r < 45 + 5 * j; ++r) CHECK(sim.design.is_active(r, j));
  REQUIRE(sim.design.known_targets);
  CHECK(*sim.design.known_targets == t.targets());
  for (int j = 0; j < 10; ++j) CHECK(std::abs(sim.data.values.col(j).mean()) < 1e-12);
}

TEST_CASE("generation is bit-exact under a fixed seed", "[simulate]") {
  TruthConfig cfg;
  cfg.seed = 9;
  const auto t = simulate_truth(cfg);
  const auto a = generate_data(t, DataLayout::soft(300, 20), 10, true);
  const auto b = generate_data(t, DataLayout::soft(300, 20), 10, true);
  CHECK(a.data.values == b.data.values);
  CHECK(a.design.row_states == b.design.row_states);
  const auto c = generate_data(t, DataLayout::soft(300, 20), 11, true);
  CHECK(a.data.values != c.data.values);
}

TEST_CASE("reference benchmark row counts", "[simulate]") {
  const auto full = reference_benchmark_config(BenchmarkScale::Full);
  CHECK(full.n == 100);
  CHECK(full.m == 10);
  const auto l5 = full.soft_layout(5);
  CHECK(l5.n_obs_rows == 350);
  CHECK(l5.rows_per_intervention * full.m == 50);
  const auto big = full.soft_layout(20, 10);
  CHECK(big.n_obs_rows + full.m * big.rows_per_intervention == 4000);
  const auto desk = reference_benchmark_config(BenchmarkScale::Desk);
  CHECK(desk.n == 20);
  CHECK(desk.m == 5);
  CHECK(desk.soft_layout(20).n_obs_rows == 300);
  CHECK(desk.rho_grid.back() == 1.0);
  TruthConfig cfg;
  cfg.regime = Regime::Perfect;
  const auto sim = generate_data(simulate_truth(cfg), DataLayout::perfect(400, 1.0), 1, false);
  int observational = 0;
  for (int r = 0; r < 400; ++r) {
    bool any = false;
    for (int j = 0; j < sim.design.m; ++j) any = any || sim.design.is_active(r, j);
    observational += !any;
  }
  CHECK(observational == 0);
}
