#include "ibge/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ibge/benchmark.hpp"
#include "ibge/bge.hpp"
#include "ibge/effects.hpp"
#include "ibge/io.hpp"
#include "ibge/search.hpp"
#include "ibge/simulate.hpp"

namespace ibge::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void require_key(const Json& j, const char* key) {
  if (!j.contains(key)) throw UsageError(std::string("config is missing \"") + key + "\"");
}

Regime parse_regime(const std::string& s) {
  if (s == "soft") return Regime::Soft;
  if (s == "perfect") return Regime::Perfect;
  throw UsageError("regime must be soft or perfect, got " + s);
}

InterventionMode parse_mode(const std::string& s) {
  if (s == "soft") return InterventionMode::Soft;
  if (s == "hard") return InterventionMode::Hard;
  throw UsageError("mode must be soft or hard, got " + s);
}

TargetMode parse_targets(const std::string& s) {
  if (s == "unknown") return TargetMode::Unknown;
  if (s == "known") return TargetMode::Known;
  throw UsageError("targets must be known or unknown, got " + s);
}

std::string mode_name(InterventionMode m) { return m == InterventionMode::Soft ? "soft" : "hard"; }
std::string targets_name(TargetMode t) { return t == TargetMode::Unknown ? "unknown" : "known"; }

void prepare_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  fs::create_directories(dir);
}

std::string out_path(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void write_config(const std::string& dir, const Json& config) {
  io::write_file(out_path(dir, "config.json"), config.dump(2) + "\n");
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
  int n = 20;
  int m = 5;
  double expected_parents = 2.0;
  std::string regime = "soft";
  int n_obs = -1;  // -1: total_rows - m * rows_per_int
  int rows_per_int = 20;
  int total_rows = 400;
  double rho = 0.0;
  bool standardize = true;
  std::uint64_t seed = 0;

  Json to_json() const {
    return {{"command", "simulate"}, {"n", n}, {"m", m}, {"expected_parents", expected_parents},
            {"regime", regime},      {"n_obs", n_obs}, {"rows_per_int", rows_per_int},
            {"N", total_rows},       {"rho", rho}, {"standardize", standardize}, {"seed", seed}};
  }
  static SimulateOptions from_json(const Json& j) {
    SimulateOptions o;
    require_key(j, "seed");
    read_key(j, "n", o.n);
    read_key(j, "m", o.m);
    read_key(j, "expected_parents", o.expected_parents);
    read_key(j, "regime", o.regime);
    read_key(j, "n_obs", o.n_obs);
    read_key(j, "rows_per_int", o.rows_per_int);
    read_key(j, "N", o.total_rows);
    read_key(j, "rho", o.rho);
    read_key(j, "standardize", o.standardize);
    read_key(j, "seed", o.seed);
    return o;
  }
};

void run_simulate(SimulateOptions o, const std::string& out) {
  const Regime regime = parse_regime(o.regime);
  if (regime == Regime::Soft && o.n_obs < 0) o.n_obs = o.total_rows - o.m * o.rows_per_int;
  if (regime == Regime::Soft && o.n_obs < 0) throw UsageError("interventional rows exceed --N; pass --n-obs");
  prepare_dir(out);
  const auto truth = simulate_truth({o.n, o.m, o.expected_parents, regime, derive_seed(o.seed, 0)});
  const DataLayout layout =
      regime == Regime::Soft ? DataLayout::soft(o.n_obs, o.rows_per_int) : DataLayout::perfect(o.total_rows, o.rho);
  auto sim = generate_data(truth, layout, derive_seed(o.seed, 1), false);
  if (o.standardize) {
    auto report = standardize(sim.data);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    sim.data = std::move(report.data);
  }
  io::write_file(out_path(out, "data.csv"), io::data_to_csv(sim.data));
  io::write_file(out_path(out, "design.json"), io::design_to_json(sim.design, sim.data.var_names));
  io::write_file(out_path(out, "truth.json"), io::truth_to_json(truth));
  write_config(out, o.to_json());
  std::cout << "simulate: " << sim.data.rows() << " rows, " << truth.dag.edge_count() << " edges, " << truth.m()
            << " interventions -> " << out << "\n";
}

// ---- learn ----------------------------------------------------------------

struct LearnOptions {
  std::string algorithm = "map";
  std::string data;
  std::string design;
  double alpha_mu = 0.1;
  double edge_penalty = 0.0;
  int restarts = 1;
  long iterations = 100000;
  long burnin = 20000;
  long thin = 100;
  int chains = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::string targets = "unknown";
  std::string mode = "soft";
  int max_parents = -1;
  int threads = 0;
  std::vector<double> heats = {1.0};
  long swap_every = 10;

  Json to_json() const {
    return {{"command", "learn"},     {"algorithm", algorithm},   {"data", data},
            {"design", design},       {"alpha_mu", alpha_mu},     {"edge_penalty", edge_penalty},
            {"restarts", restarts},   {"iterations", iterations}, {"burnin", burnin},
            {"thin", thin},           {"chains", chains},         {"seed", seed},
            {"threshold", threshold}, {"targets", targets},       {"mode", mode},
            {"max_parents", max_parents}, {"threads", threads},   {"heats", heats},
            {"swap_every", swap_every}};
  }
  static LearnOptions from_json(const Json& j) {
    LearnOptions o;
    for (const char* key : {"algorithm", "data", "design", "seed"}) require_key(j, key);
    read_key(j, "algorithm", o.algorithm);
    read_key(j, "data", o.data);
    read_key(j, "design", o.design);
    read_key(j, "alpha_mu", o.alpha_mu);
    read_key(j, "edge_penalty", o.edge_penalty);
    read_key(j, "restarts", o.restarts);
    read_key(j, "iterations", o.iterations);
    read_key(j, "burnin", o.burnin);
    read_key(j, "thin", o.thin);
    read_key(j, "chains", o.chains);
    read_key(j, "seed", o.seed);
    read_key(j, "threshold", o.threshold);
    read_key(j, "targets", o.targets);
    read_key(j, "mode", o.mode);
    read_key(j, "max_parents", o.max_parents);
    read_key(j, "threads", o.threads);
    read_key(j, "heats", o.heats);
    read_key(j, "swap_every", o.swap_every);
    return o;
  }
};

struct LoadedData {
  ObservedDataset data;
  InterventionDesign design;
};

LoadedData load_data(const std::string& data_path, const std::string& design_path) {
  LoadedData in;
  in.data = io::data_from_csv(io::read_file(data_path));
  in.design = io::design_from_json(io::read_file(design_path), in.data.var_names);
  validate_dataset(in.data, in.design);
  return in;
}

void run_learn(const LearnOptions& o, const std::string& out) {
  if (o.algorithm != "map" && o.algorithm != "mcmc") throw UsageError("learn expects map or mcmc");
  if (!(o.alpha_mu > 0.0)) throw UsageError("--alpha-mu must be positive");
  if (!(o.edge_penalty >= 0.0)) throw UsageError("--edge-penalty must be nonnegative");
  const ScoreOptions score_options{parse_mode(o.mode), parse_targets(o.targets), {o.edge_penalty}};
  auto in = load_data(o.data, o.design);
  prepare_dir(out);
  const auto names = in.data.var_names;
  const auto labels = in.design.labels;
  const IbgeScorer scorer(std::move(in.data), std::move(in.design), default_hyperparams(static_cast<int>(names.size()), o.alpha_mu),
                          score_options);

  if (o.algorithm == "map") {
    SearchConfig config;
    config.restarts = o.restarts;
    config.seed = o.seed;
    config.max_parents = o.max_parents;
    config.threads = o.threads;
    const auto result = map_greedy(scorer, scorer.empty_dag(), config);
    io::write_file(out_path(out, "dag.json"), io::dag_to_json(result.dag, names, labels, result.log_score));
    write_config(out, o.to_json());
    std::cout << "learn map: log-score " << io::format_double(result.log_score) << ", " << result.dag.edge_count()
              << " edges (restart " << result.best_restart << ") -> " << out << "\n";
    return;
  }

  McmcConfig config;
  config.iterations = o.iterations;
  config.burnin = o.burnin;
  config.thin = o.thin;
  config.chains = o.chains;
  config.seed = o.seed;
  config.max_parents = o.max_parents;
  config.threads = o.threads;
  config.heats = o.heats;
  config.swap_every = o.swap_every;
  const auto samples = structure_mcmc(scorer, scorer.empty_dag(), config);
  const auto posterior = edge_posterior(samples);
  const Dag consensus = consensus_graph(posterior, scorer.n_obs(), o.threshold);
  io::write_file(out_path(out, "samples.json"), io::samples_to_json({names, labels, samples}));
  io::write_file(out_path(out, "edge_posterior.csv"), io::edge_posterior_to_csv(posterior, names, labels));
  io::write_file(out_path(out, "consensus.json"), io::dag_to_json(consensus, names, labels));
  write_config(out, o.to_json());
  long accepted = 0, proposed = 0;
  for (const auto& c : samples.chains) {
    accepted += c.accepted;
    proposed += c.proposed;
  }
  std::cout << "learn mcmc: " << samples.samples.size() << " samples from " << o.chains << " chain(s), acceptance "
            << (proposed ? static_cast<double>(accepted) / proposed : 0.0) << ", consensus "
            << consensus.edge_count() << " edges -> " << out << "\n";
}

// ---- effects --------------------------------------------------------------

struct EffectsOptions {
  std::string samples;
  std::string data;
  std::string design;
  double alpha_mu = 0.1;
  int draws_per_dag = 1;
  std::uint64_t seed = 0;
  std::string mode = "soft";
  bool keep_draws = false;

  Json to_json() const {
    return {{"command", "effects"}, {"samples", samples},   {"data", data},
            {"design", design},     {"alpha_mu", alpha_mu}, {"draws_per_dag", draws_per_dag},
            {"seed", seed},         {"mode", mode},         {"keep_draws", keep_draws}};
  }
  static EffectsOptions from_json(const Json& j) {
    EffectsOptions o;
    for (const char* key : {"samples", "data", "design", "seed"}) require_key(j, key);
    read_key(j, "samples", o.samples);
    read_key(j, "data", o.data);
    read_key(j, "design", o.design);
    read_key(j, "alpha_mu", o.alpha_mu);
    read_key(j, "draws_per_dag", o.draws_per_dag);
    read_key(j, "seed", o.seed);
    read_key(j, "mode", o.mode);
    read_key(j, "keep_draws", o.keep_draws);
    return o;
  }
};

void run_effects(const EffectsOptions& o, const std::string& out) {
  if (o.draws_per_dag < 1) throw UsageError("--draws-per-dag must be >= 1");
  if (!(o.alpha_mu > 0.0)) throw UsageError("--alpha-mu must be positive");
  const auto in = load_data(o.data, o.design);
  // Accept either a sample file or a single DAG file.
  const std::string text = io::read_file(o.samples);
  DagSampleSet set;
  std::vector<std::string> names;
  if (Json::parse(text).contains("samples")) {
    auto file = io::samples_from_json(text);
    names = std::move(file.var_names);
    set = std::move(file.samples);
  } else {
    auto named = io::dag_from_json(text);
    names = std::move(named.var_names);
    set.samples.push_back({std::move(named.dag), named.log_score.value_or(0.0), 0, 0});
  }
  if (names != in.data.var_names) throw UsageError("graph nodes do not match the data columns");
  prepare_dir(out);
  EffectsConfig config;
  config.draws_per_dag = o.draws_per_dag;
  config.seed = o.seed;
  config.mode = parse_mode(o.mode);
  config.keep_draws = o.keep_draws;
  const auto result = posterior_effects(set, in.data, in.design, default_hyperparams(in.data.cols(), o.alpha_mu), config);
  io::write_file(out_path(out, "effects.csv"), io::effects_to_csv(result, names));
  if (o.keep_draws) io::write_file(out_path(out, "draws.csv"), io::draws_to_csv(result, names));
  write_config(out, o.to_json());
  int excluding = 0;
  for (const auto& s : result.summaries) excluding += s.excludes_zero;
  std::cout << "effects: " << result.draw_count << " draws per pair, " << excluding
            << " pairs with intervals excluding 0 -> " << out << "\n";
}

// ---- benchmark ------------------------------------------------------------

Json benchmark_to_json(const BenchmarkConfig& c, int jobs) {
  const auto& s = c.settings;
  Json settings = {{"edge_penalty", s.edge_penalty}, {"mode", mode_name(s.mode)},
                   {"targets", targets_name(s.targets)}, {"max_parents", s.max_parents},
                   {"restarts", s.restarts},          {"iterations", s.iterations},
                   {"burnin", s.burnin},              {"thin", s.thin},
                   {"chains", s.chains},              {"threshold", s.threshold},
                   {"heats", s.heats},                {"swap_every", s.swap_every}};
  return {{"command", "benchmark"},
          {"name", c.name},
          {"n", c.n},
          {"m", c.m},
          {"expected_parents", c.expected_parents},
          {"regime", regime_name(c.regime)},
          {"n_obs_rows", c.n_obs_rows},
          {"rows_per_intervention", c.rows_per_intervention},
          {"total_rows", c.total_rows},
          {"rho", c.rho},
          {"standardize", c.standardize},
          {"repetitions", c.repetitions},
          {"seed", c.seed},
          {"alpha_mu_grid", c.alpha_mu_grid},
          {"learners", c.learners},
          {"settings", settings},
          {"jobs", jobs}};
}

BenchmarkConfig benchmark_from_json(const Json& j, int& jobs) {
  BenchmarkConfig c;
  require_key(j, "seed");
  read_key(j, "name", c.name);
  read_key(j, "n", c.n);
  read_key(j, "m", c.m);
  read_key(j, "expected_parents", c.expected_parents);
  if (j.contains("regime")) c.regime = parse_regime(j["regime"].get<std::string>());
  read_key(j, "n_obs_rows", c.n_obs_rows);
  read_key(j, "rows_per_intervention", c.rows_per_intervention);
  read_key(j, "total_rows", c.total_rows);
  read_key(j, "rho", c.rho);
  read_key(j, "standardize", c.standardize);
  read_key(j, "repetitions", c.repetitions);
  read_key(j, "seed", c.seed);
  read_key(j, "alpha_mu_grid", c.alpha_mu_grid);
  read_key(j, "learners", c.learners);
  read_key(j, "jobs", jobs);
  if (j.contains("settings")) {
    const auto& s = j["settings"];
    auto& o = c.settings;
    read_key(s, "edge_penalty", o.edge_penalty);
    if (s.contains("mode")) o.mode = parse_mode(s["mode"].get<std::string>());
    if (s.contains("targets")) o.targets = parse_targets(s["targets"].get<std::string>());
    read_key(s, "max_parents", o.max_parents);
    read_key(s, "restarts", o.restarts);
    read_key(s, "iterations", o.iterations);
    read_key(s, "burnin", o.burnin);
    read_key(s, "thin", o.thin);
    read_key(s, "chains", o.chains);
    read_key(s, "threshold", o.threshold);
    read_key(s, "heats", o.heats);
    read_key(s, "swap_every", o.swap_every);
  }
  c.validate();
  return c;
}

void run_benchmark_cmd(const BenchmarkConfig& config, int jobs, const std::string& out) {
  prepare_dir(out);
  write_config(out, benchmark_to_json(config, jobs));
  const std::string partial = out_path(out, "results.partial.csv");
  std::ofstream sink(partial, std::ios::trunc);
  if (!sink) throw std::runtime_error("cannot write " + partial);
  sink << io::roc_header() << std::flush;
  const long total = static_cast<long>(config.learners.size() * config.repetitions * config.alpha_mu_grid.size());
  long done = 0;
  const auto rows = run_benchmark(config, jobs, [&](const RocRow& row) {
    sink << io::roc_row_to_csv(row) << std::flush;
    ++done;
    std::cout << "benchmark: " << done << "/" << total << " " << row.learner << " " << row.dataset_id
              << " alpha_mu=" << row.alpha_mu << " SHD=" << row.metrics.shd << "\n";
  });
  sink.close();
  io::write_file(out_path(out, "results.csv"), io::roc_to_csv(rows));
  fs::remove(partial);
  std::cout << "benchmark: " << rows.size() << " rows -> " << out << "\n";
}

// ---- dispatch -------------------------------------------------------------

void rerun(const std::string& config_path, const std::string& out) {
  const Json j = Json::parse(io::read_file(config_path));
  require_key(j, "command");
  const auto command = j["command"].get<std::string>();
  if (command == "simulate") run_simulate(SimulateOptions::from_json(j), out);
  else if (command == "learn") run_learn(LearnOptions::from_json(j), out);
  else if (command == "effects") run_effects(EffectsOptions::from_json(j), out);
  else if (command == "benchmark") {
    int jobs = 1;
    const auto config = benchmark_from_json(j, jobs);
    run_benchmark_cmd(config, jobs, out);
  } else {
    throw UsageError("unknown command in config: " + command);
  }
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Bayesian structure learning from observational and interventional Gaussian data"};
  app.require_subcommand(1);
  std::string out;

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a ground truth and a dataset");
  SimulateOptions sim;
  sim_cmd->add_option("--n", sim.n, "Observed variables");
  sim_cmd->add_option("--m", sim.m, "Interventions");
  sim_cmd->add_option("--expected-parents", sim.expected_parents, "Expected parents per node");
  sim_cmd->add_option("--regime", sim.regime, "soft or perfect")->check(CLI::IsMember({"soft", "perfect"}));
  sim_cmd->add_option("--n-obs", sim.n_obs, "Observational rows (soft regime)");
  sim_cmd->add_option("--rows-per-int", sim.rows_per_int, "Rows per intervention (soft regime)");
  sim_cmd->add_option("--N", sim.total_rows, "Total rows");
  sim_cmd->add_option("--rho", sim.rho, "Interventional fraction (perfect regime)");
  sim_cmd->add_flag("--standardize,!--no-standardize", sim.standardize, "Standardize columns (default on)");
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->required();
  sim_cmd->add_option("--out", out, "Output directory")->required();

  auto* learn_cmd = app.add_subcommand("learn", "Learn a graph: map or mcmc");
  LearnOptions learn;
  learn_cmd->add_option("algorithm", learn.algorithm, "map or mcmc")->required()->check(CLI::IsMember({"map", "mcmc"}));
  learn_cmd->add_option("--data", learn.data, "Data CSV")->required()->check(CLI::ExistingFile);
  learn_cmd->add_option("--design", learn.design, "Design JSON")->required()->check(CLI::ExistingFile);
  learn_cmd->add_option("--alpha-mu", learn.alpha_mu, "Prior mean precision");
  learn_cmd->add_option("--edge-penalty", learn.edge_penalty, "Log-prior penalty per edge");
  learn_cmd->add_option("--restarts", learn.restarts, "Greedy restarts");
  learn_cmd->add_option("--iterations", learn.iterations, "MCMC iterations per chain");
  learn_cmd->add_option("--burnin", learn.burnin, "MCMC burn-in");
  learn_cmd->add_option("--thin", learn.thin, "MCMC thinning");
  learn_cmd->add_option("--chains", learn.chains, "MCMC chains");
  learn_cmd->add_option("--threshold", learn.threshold, "Consensus threshold");
  learn_cmd->add_option("--heats", learn.heats, "Tempering ladder, starting at 1 (e.g. 1 0.6 0.36)");
  learn_cmd->add_option("--swap-every", learn.swap_every, "Iterations between replica swaps");
  learn_cmd->add_option("--targets", learn.targets, "known or unknown")->check(CLI::IsMember({"known", "unknown"}));
  learn_cmd->add_option("--mode", learn.mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
  learn_cmd->add_option("--max-parents", learn.max_parents, "In-degree cap (-1: none)");
  learn_cmd->add_option("--threads", learn.threads, "Worker threads (0: all cores)");
  learn_cmd->add_option("--seed", learn.seed, "Random seed")->required();
  learn_cmd->add_option("--out", out, "Output directory")->required();

  auto* eff_cmd = app.add_subcommand("effects", "Posterior causal effects");
  EffectsOptions eff;
  eff_cmd->add_option("--samples", eff.samples, "Sample JSON or DAG JSON")->required()->check(CLI::ExistingFile);
  eff_cmd->add_option("--data", eff.data, "Data CSV")->required()->check(CLI::ExistingFile);
  eff_cmd->add_option("--design", eff.design, "Design JSON")->required()->check(CLI::ExistingFile);
  eff_cmd->add_option("--alpha-mu", eff.alpha_mu, "Prior mean precision");
  eff_cmd->add_option("--draws-per-dag", eff.draws_per_dag, "Parameter draws per DAG");
  eff_cmd->add_option("--mode", eff.mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
  eff_cmd->add_flag("--keep-draws", eff.keep_draws, "Also write draws.csv");
  eff_cmd->add_option("--seed", eff.seed, "Random seed")->required();
  eff_cmd->add_option("--out", out, "Output directory")->required();

  auto* bench_cmd = app.add_subcommand("benchmark", "Simulate, learn and evaluate over seeds and an alpha_mu grid");
  std::string bench_config;
  std::string learners;
  int jobs = 1;
  bench_cmd->add_option("--config", bench_config, "Benchmark config JSON")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--learners", learners, "Comma-separated: map,mcmc,baseline-bge");
  auto* jobs_opt = bench_cmd->add_option("--jobs", jobs, "Concurrent cells");
  bench_cmd->add_option("--out", out, "Output directory")->required();

  auto* rerun_cmd = app.add_subcommand("rerun", "Replay a resolved config.json");
  std::string rerun_config;
  rerun_cmd->add_option("config", rerun_config, "config.json")->required()->check(CLI::ExistingFile);
  rerun_cmd->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  // Inputs are recorded as absolute paths so config.json reruns from anywhere.
  const auto absolute = [](std::string& path) { path = fs::absolute(path).lexically_normal().string(); };
  if (*sim_cmd) run_simulate(sim, out);
  else if (*learn_cmd) {
    absolute(learn.data);
    absolute(learn.design);
    run_learn(learn, out);
  } else if (*eff_cmd) {
    absolute(eff.samples);
    absolute(eff.data);
    absolute(eff.design);
    run_effects(eff, out);
  }
  else if (*bench_cmd) {
    int file_jobs = 1;
    auto config = benchmark_from_json(Json::parse(io::read_file(bench_config)), file_jobs);
    if (!learners.empty()) {
      config.learners.clear();
      std::stringstream ss(learners);
      std::string name;
      while (std::getline(ss, name, ',')) config.learners.push_back(name);
      config.validate();
    }
    if (jobs_opt->count() == 0) jobs = file_jobs;
    if (jobs < 1) throw UsageError("--jobs must be >= 1");
    run_benchmark_cmd(config, jobs, out);
  } else if (*rerun_cmd) {
    rerun(rerun_config, out);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ibge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ibge::cli
