#include <catch_amalgamated.hpp>

#include <filesystem>
#include <limits>

#include "fixtures.hpp"
#include "ibge/io.hpp"

using namespace ibge;

namespace {

SimulatedData small_sim(GroundTruth* truth_out = nullptr) {
  TruthConfig tc;
  tc.n = 5;
  tc.m = 2;
  tc.expected_parents = 1.0;
  tc.seed = 4;
  const auto truth = simulate_truth(tc);
  if (truth_out) *truth_out = truth;
  return generate_data(truth, DataLayout::soft(20, 3), 5, true);
}

}  // namespace

TEST_CASE("format_double round-trips exactly", "[io]") {
  std::mt19937_64 gen(61);
  std::normal_distribution<double> z;
  for (int k = 0; k < 1000; ++k) {
    const double x = z(gen) * std::pow(10.0, static_cast<int>(gen() % 20) - 10);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("data CSV round trip", "[io]") {
  const auto sim = small_sim();
  const auto text = io::data_to_csv(sim.data);
  const auto back = io::data_from_csv(text);
  CHECK(back.values == sim.data.values);
  CHECK(back.var_names == sim.data.var_names);
  CHECK(io::data_to_csv(back) == text);
  CHECK(text.substr(0, 12) == "X1,X2,X3,X4,");
}

TEST_CASE("data CSV rejects malformed input", "[io]") {
  CHECK_THROWS_AS(io::data_from_csv(""), io::FormatError);
  CHECK_THROWS_AS(io::data_from_csv("a,b\n1,2\n3\n"), io::FormatError);
  CHECK_THROWS_AS(io::data_from_csv("a,b\n1,x\n"), io::FormatError);
  // Non-finite values parse; validation rejects them.
  const auto nan = io::data_from_csv("a,b\n1,nan\n");
  CHECK_THROWS_AS(validate_dataset(nan, InterventionDesign::observational(1)), ValidationError);
}

TEST_CASE("design JSON round trip", "[io]") {
  const auto sim = small_sim();
  const auto text = io::design_to_json(sim.design, sim.data.var_names);
  const auto back = io::design_from_json(text, sim.data.var_names);
  CHECK(back.m == sim.design.m);
  CHECK(back.labels == sim.design.labels);
  CHECK(back.row_states == sim.design.row_states);
  CHECK(back.known_targets == sim.design.known_targets);
  CHECK(io::design_to_json(back, sim.data.var_names) == text);

  auto unknown = sim.design;
  unknown.known_targets.reset();
  const auto bare = io::design_to_json(unknown, sim.data.var_names);
  CHECK_FALSE(io::design_from_json(bare, sim.data.var_names).known_targets);
}

TEST_CASE("design JSON rejects malformed input", "[io]") {
  const std::vector<std::string> names{"A", "B"};
  CHECK_THROWS(io::design_from_json("{", names));
  CHECK_THROWS(io::design_from_json(R"({"m":1,"labels":["I1"],"row_states":[[2]]})", names));
  CHECK_THROWS(io::design_from_json(R"({"m":1,"labels":["I1"],"row_states":[[0,1]]})", names));
  CHECK_THROWS(io::design_from_json(R"({"m":1,"labels":["I1"],"row_states":[[1]],"known_targets":{"I1":["Z"]}})", names));
}

TEST_CASE("DAG JSON round trip", "[io]") {
  Dag g(3, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  g.add_int_edge(0, 1);
  const std::vector<std::string> names{"A", "B", "C"}, labels{"I1"};
  const auto text = io::dag_to_json(g, names, labels, -12.5);
  const auto back = io::dag_from_json(text);
  CHECK(back.dag == g);
  CHECK(back.var_names == names);
  CHECK(back.labels == labels);
  REQUIRE(back.log_score);
  CHECK(*back.log_score == -12.5);
  CHECK(io::dag_to_json(back.dag, back.var_names, back.labels, back.log_score) == text);
  CHECK_FALSE(io::dag_from_json(io::dag_to_json(g, names, labels)).log_score);
  CHECK_THROWS(io::dag_from_json(R"({"nodes":["A"],"interventions":[],"obs_edges":[["A","Q"]],"int_edges":[]})"));
}

TEST_CASE("truth JSON round trip", "[io]") {
  GroundTruth truth;
  small_sim(&truth);
  const auto text = io::truth_to_json(truth);
  const auto back = io::truth_from_json(text);
  CHECK(back == truth);
  CHECK(io::truth_to_json(back) == text);
  CHECK_THROWS(io::truth_from_json("[]"));
}

TEST_CASE("sample file round trip", "[io]") {
  io::SampleFile file;
  file.var_names = {"A", "B"};
  file.labels = {"I1"};
  for (int k = 0; k < 4; ++k) {
    Dag g(2, 1);
    if (k % 2) g.add_edge(0, 1);
    if (k == 3) g.add_int_edge(0, 1);
    file.samples.samples.push_back({g, -1.0 - 0.1 * k, k / 2, 100L * (k % 2)});
  }
  file.samples.chains = {{10, 4, 1e-12, {-1.0, -1.1}}, {10, 6, 0.0, {-1.2, -1.3}}};
  const auto text = io::samples_to_json(file);
  const auto back = io::samples_from_json(text);
  REQUIRE(back.samples.samples.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(back.samples.samples[k].dag == file.samples.samples[k].dag);
    CHECK(back.samples.samples[k].log_score == file.samples.samples[k].log_score);
    CHECK(back.samples.samples[k].chain == file.samples.samples[k].chain);
    CHECK(back.samples.samples[k].iteration == file.samples.samples[k].iteration);
  }
  CHECK(back.samples.chains[1].accepted == 6);
  CHECK(back.samples.chains[0].trace == file.samples.chains[0].trace);
  CHECK(io::samples_to_json(back) == text);
}

TEST_CASE("CSV writers have stable headers", "[io]") {
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(3, 2);
  post(0, 1) = 0.25;
  post(2, 1) = 1.0;
  const auto csv = io::edge_posterior_to_csv(post, {"A", "B"}, {"I1"});
  CHECK(csv == "source,A,B\nA,0,0.25\nB,0,0\nI1,0,1\n");

  EffectResult res;
  res.summaries = {{0, 1, 0.5, 0.25, 0.75, true}, {1, 0, 0.0, 0.0, 0.0, false}};
  res.draw_count = 2;
  res.draws = Eigen::MatrixXd::Zero(2, 4);
  res.draws(1, 1) = 0.5;
  CHECK(io::effects_to_csv(res, {"A", "B"}) == "source,target,mean,lower,upper,excludes_zero\nA,B,0.5,0.25,0.75,true\nB,A,0,0,0,false\n");
  CHECK(io::draws_to_csv(res, {"A", "B"}) == "A->B,B->A\n0,0\n0.5,0\n");

  CHECK(io::roc_header() == "dataset_id,seed,alpha_mu,regime,learner,TP,FP,FN,P,SHD,TPR,FPRp\n");
  RocRow row{"d-0", 7, 0.1, "soft", "mcmc", {4.5, 0.5, 0.5, 5, 1.0, 0.9, 0.1}};
  CHECK(io::roc_row_to_csv(row) == "d-0,7,0.10000000000000001,soft,mcmc,4.5,0.5,0.5,5,1,0.90000000000000002,0.10000000000000001\n");
  CHECK(io::roc_to_csv({row}).find(io::roc_header()) == 0);
}

TEST_CASE("write_file and read_file", "[io]") {
  const auto dir = std::filesystem::temp_directory_path() / "ibge_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "x.txt").string();
  io::write_file(path, "hello\n");
  CHECK(io::read_file(path) == "hello\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS(io::read_file((dir / "missing.txt").string()));
  std::filesystem::remove_all(dir);
}
