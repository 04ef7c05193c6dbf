#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "ibge/score.hpp"
#include "ibge/simulate.hpp"

using namespace ibge;

namespace {

InterventionDesign design_from_column(const std::vector<std::vector<std::uint8_t>>& states) {
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < states.front().size(); ++j) labels.push_back("I" + std::to_string(j + 1));
  return InterventionDesign::from_states(states, labels);
}

std::vector<int> rows_where(const InterventionDesign& d, int j, bool active) {
  std::vector<int> rows;
  for (int r = 0; r < d.rows(); ++r)
    if (d.is_active(r, j) == active) rows.push_back(r);
  return rows;
}

}  // namespace

TEST_CASE("condition_groups partitions rows by joint state", "[score]") {
  const auto empty = condition_groups(0, {}, InterventionDesign::observational(7));
  REQUIRE(empty.groups.size() == 1);
  CHECK(empty.groups[0].rows.size() == 7);

  const auto d = design_from_column({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 1}, {0, 1}});
  const auto one = condition_groups(0, {0}, d);
  REQUIRE(one.groups.size() == 2);
  CHECK(one.groups[0].rows == std::vector<int>{0, 2, 4, 6});
  CHECK(one.groups[1].rows == std::vector<int>{1, 3, 5});
  const auto both = condition_groups(0, {0, 1}, d);
  CHECK(both.groups.size() == 4);
  std::size_t covered = 0;
  for (const auto& g : both.groups) covered += g.rows.size();
  CHECK(covered == 7);
}

TEST_CASE("soft local score: single condition and binary split", "[score]") {
  std::mt19937_64 gen(21);
  const auto data = fixture::dataset(fixture::chain_data(60, 3, 0.8, gen));
  std::vector<std::vector<std::uint8_t>> states(60, {0});
  for (int r = 40; r < 60; ++r) states[r][0] = 1;
  const auto design = design_from_column(states);
  const auto hp = default_hyperparams(3, 0.5);
  auto cache = std::make_shared<LocalScoreCache>();
  const std::vector<int> parents{0, 1};

  CHECK(ibge_local_soft(2, {0, 1}, {}, data, design, hp, cache) ==
        bge_local(2, parents, data, all_rows(60), hp));
  const double split = ibge_local_soft(2, {0, 1}, {0}, data, design, hp, cache);
  const double expected = bge_local(2, parents, data, rows_where(design, 0, false), hp) +
                          bge_local(2, parents, data, rows_where(design, 0, true), hp);
  CHECK(split == expected);
}

TEST_CASE("hard local score drops intervened rows of the target only", "[score]") {
  std::mt19937_64 gen(22);
  const auto data = fixture::dataset(fixture::chain_data(400, 3, 0.8, gen));
  std::vector<std::vector<std::uint8_t>> states(400, {0});
  for (int r = 0; r < 20; ++r) states[r * 20][0] = 1;
  auto design = design_from_column(states);
  design.known_targets = std::vector<NodeSet>{{1}};
  const auto hp = default_hyperparams(3, 0.5);
  auto cache = std::make_shared<LocalScoreCache>();
  const std::vector<int> pa1{0}, pa2{1};

  const auto kept = rows_where(design, 0, false);
  REQUIRE(kept.size() == 380);
  CHECK(ibge_local_hard(1, {0}, data, design, hp, cache) == bge_local(1, pa1, data, kept, hp));
  CHECK(ibge_local_hard(2, {1}, data, design, hp, cache) == bge_local(2, pa2, data, all_rows(400), hp));

  std::vector<std::vector<std::uint8_t>> all_on(400, {1});
  auto severed = design_from_column(all_on);
  severed.known_targets = std::vector<NodeSet>{{1}};
  CHECK(ibge_local_hard(1, {0}, data, severed, hp, cache) == 0.0);

  design.known_targets.reset();
  CHECK_THROWS_AS(ibge_local_hard(1, {0}, data, design, hp, cache), ValidationError);
}

TEST_CASE("total score: decomposition and edge penalty", "[score]") {
  std::mt19937_64 gen(23);
  const auto data = fixture::dataset(fixture::chain_data(50, 4, 0.6, gen));
  const auto hp = default_hyperparams(4, 1.0);
  const auto design = InterventionDesign::observational(50);
  auto cache = std::make_shared<LocalScoreCache>();
  Dag empty(4);
  double parentless = 0.0;
  for (int v = 0; v < 4; ++v) parentless += bge_local(v, {}, data, all_rows(50), hp);
  CHECK(ibge_total(empty, data, design, InterventionMode::Soft, hp, {}, cache) == Catch::Approx(parentless).epsilon(1e-14));

  Dag g(4);
  for (auto [u, v] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}) g.add_edge(u, v);
  const double free = ibge_total(g, data, design, InterventionMode::Soft, hp, {0.0}, cache);
  const double penalised = ibge_total(g, data, design, InterventionMode::Soft, hp, {0.5}, cache);
  CHECK(free - penalised == Catch::Approx(3.0).epsilon(1e-12));

  const IbgeScorer scorer(data, design, hp);
  Dag h = empty;
  h.add_edge(2, 3);
  for (int v = 0; v < 3; ++v) CHECK(scorer.local(v, h.parents(v), {}) == scorer.local(v, empty.parents(v), {}));
  CHECK(scorer.local(3, h.parents(3), {}) != scorer.local(3, {}, {}));
}

TEST_CASE("with no interventions soft, hard and plain BGe agree bit for bit", "[score]") {
  std::mt19937_64 gen(24);
  const auto data = fixture::dataset(fixture::chain_data(80, 4, 0.7, gen));
  const auto hp = default_hyperparams(4, 0.1);
  const auto design = InterventionDesign::observational(80);
  Dag g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 3);
  g.add_edge(2, 3);
  double plain = 0.0;
  for (int v = 0; v < 4; ++v) {
    const auto pa = g.parents(v);
    plain += bge_local(v, pa, data, all_rows(80), hp);
  }
  const double soft = ibge_total(g, data, design, InterventionMode::Soft, hp, {}, nullptr);
  const double hard = ibge_total(g, data, design, InterventionMode::Hard, hp, {}, nullptr);
  CHECK(soft == plain);
  CHECK(hard == plain);
}

TEST_CASE("local scores are invariant to row order", "[score]") {
  std::mt19937_64 gen(25);
  const auto x = fixture::chain_data(90, 3, 0.7, gen);
  std::vector<std::vector<std::uint8_t>> states(90, {0, 0});
  for (int r = 0; r < 90; ++r) states[r] = {static_cast<std::uint8_t>(r % 3 == 0), static_cast<std::uint8_t>(r % 5 == 0)};
  const auto design = design_from_column(states);
  std::vector<int> perm(90);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto data = fixture::dataset(x);
  const auto shuffled = select_rows(data, perm);
  const auto shuffled_design = select_rows(design, perm);
  const auto hp = default_hyperparams(3, 1.0);
  const IbgeScorer a(data, design, hp), b(shuffled, shuffled_design, hp);
  for (const NodeSet& ip : {NodeSet{}, NodeSet{0}, NodeSet{1}, NodeSet{0, 1}}) {
    CHECK(a.local(2, {0, 1}, ip) == Catch::Approx(b.local(2, {0, 1}, ip)).epsilon(1e-12));
    CHECK(a.local(1, {}, ip) == Catch::Approx(b.local(1, {}, ip)).epsilon(1e-12));
  }
}

TEST_CASE("scorers sharing a cache never mix up datasets", "[score]") {
  std::mt19937_64 gen(26);
  auto cache = std::make_shared<LocalScoreCache>();
  const auto hp = default_hyperparams(3, 1.0);
  const auto d1 = fixture::dataset(fixture::chain_data(40, 3, 0.2, gen));
  const auto d2 = fixture::dataset(fixture::chain_data(40, 3, 0.9, gen));
  const IbgeScorer s1(d1, InterventionDesign::observational(40), hp, {}, cache);
  const IbgeScorer s2(d2, InterventionDesign::observational(40), hp, {}, cache);
  const double a = s1.local(1, {0}, {});
  const double b = s2.local(1, {0}, {});
  const std::vector<int> pa{0};
  CHECK(a == bge_local(1, pa, d1, all_rows(40), hp));
  CHECK(b == bge_local(1, pa, d2, all_rows(40), hp));
  CHECK(s1.local(1, {0}, {}) == a);
}

TEST_CASE("known-target scoring requires targets", "[score]") {
  std::mt19937_64 gen(27);
  const auto data = fixture::dataset(fixture::gaussian(10, 2, gen));
  std::vector<std::vector<std::uint8_t>> states(10, {0});
  states[3][0] = 1;
  const auto design = design_from_column(states);
  const auto hp = default_hyperparams(2, 1.0);
  CHECK_THROWS_AS(IbgeScorer(data, design, hp, {InterventionMode::Soft, TargetMode::Known, {}}), ValidationError);
  CHECK_NOTHROW(IbgeScorer(data, design, hp, {InterventionMode::Soft, TargetMode::Unknown, {}}));
  auto with_targets = design;
  with_targets.known_targets = std::vector<NodeSet>{{1}};
  const IbgeScorer known(data, with_targets, hp, {InterventionMode::Soft, TargetMode::Known, {}});
  CHECK_FALSE(known.searches_int_edges());
  CHECK(known.empty_dag().has_int_edge(0, 1));
}

TEST_CASE("severed regimes favour the intervention edge", "[score]") {
  // Perfect interventions on node 1 of a two-node chain: the soft score of the
  // true graph (with I -> node 1) should beat the graph without that edge.
  int wins = 0;
  for (int seed = 0; seed < 50; ++seed) {
    GroundTruth truth;
    truth.regime = Regime::Perfect;
    truth.dag = Dag(2, 1);
    truth.dag.add_edge(0, 1);
    truth.dag.add_int_edge(0, 1);
    truth.weights = Eigen::MatrixXd::Zero(2, 2);
    truth.weights(0, 1) = 0.8;
    truth.interventions = {{{1}, {0.0}, {1.0}}};
    truth.var_names = default_var_names(2);
    truth.labels = default_labels(1);
    // 200 intervened rows out of 400.
    const auto sim = generate_data(truth, DataLayout::perfect(400, 0.5), static_cast<std::uint64_t>(seed), true);
    const IbgeScorer scorer(sim.data, sim.design, default_hyperparams(2, 0.1));
    Dag with = truth.dag;
    Dag without = truth.dag;
    without.remove_int_edge(0, 1);
    if (scorer.total(with) > scorer.total(without)) ++wins;
  }
  CHECK(wins >= 45);
}
