#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ibge/bge.hpp"
#include "ibge/cli.hpp"
#include "ibge/effects.hpp"
#include "ibge/evaluate.hpp"
#include "ibge/score.hpp"
#include "ibge/search.hpp"
#include "ibge/simulate.hpp"

namespace py = pybind11;
using namespace ibge;

namespace {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

InterventionMode parse_mode(const std::string& s) {
  if (s == "soft") return InterventionMode::Soft;
  if (s == "hard") return InterventionMode::Hard;
  throw ValidationError("mode must be 'soft' or 'hard'");
}

TargetMode parse_targets(const std::string& s) {
  if (s == "unknown") return TargetMode::Unknown;
  if (s == "known") return TargetMode::Known;
  throw ValidationError("targets must be 'known' or 'unknown'");
}

Regime parse_regime(const std::string& s) {
  if (s == "soft") return Regime::Soft;
  if (s == "perfect") return Regime::Perfect;
  throw ValidationError("regime must be 'soft' or 'perfect'");
}

ObservedDataset make_data(const Eigen::MatrixXd& values) {
  ObservedDataset d;
  d.values = values;
  d.var_names = default_var_names(static_cast<int>(values.cols()));
  return d;
}

// row_states: (N, m) array of 0/1; None means purely observational.
InterventionDesign make_design(int n_rows, const std::optional<IntMatrix>& states,
                               const std::optional<std::vector<NodeSet>>& known_targets) {
  InterventionDesign design = InterventionDesign::observational(n_rows);
  if (states && states->cols() > 0) {
    if (states->rows() != n_rows) throw ValidationError("row_states must have one row per data row");
    std::vector<std::vector<std::uint8_t>> rows(n_rows);
    for (int r = 0; r < n_rows; ++r)
      for (int j = 0; j < states->cols(); ++j) {
        const int v = (*states)(r, j);
        if (v != 0 && v != 1) throw ValidationError("row_states entries must be 0 or 1");
        rows[r].push_back(static_cast<std::uint8_t>(v));
      }
    design = InterventionDesign::from_states(rows, default_labels(static_cast<int>(states->cols())));
  }
  if (known_targets) design.known_targets = *known_targets;
  return design;
}

IntMatrix states_matrix(const InterventionDesign& d) {
  IntMatrix out(d.rows(), d.m);
  for (int r = 0; r < d.rows(); ++r)
    for (int j = 0; j < d.m; ++j) out(r, j) = d.state(r, j);
  return out;
}

IntMatrix adjacency(const Dag& g) {
  IntMatrix a = IntMatrix::Zero(g.n_obs(), g.n_obs());
  for (auto [u, v] : g.edges()) a(u, v) = 1;
  return a;
}

IntMatrix int_adjacency(const Dag& g) {
  IntMatrix a = IntMatrix::Zero(g.n_int(), g.n_obs());
  for (auto [j, v] : g.int_edges()) a(j, v) = 1;
  return a;
}

Dag dag_from_adjacency(const IntMatrix& adj, const std::optional<IntMatrix>& int_adj) {
  if (adj.rows() != adj.cols()) throw ValidationError("adjacency must be square");
  const int n = static_cast<int>(adj.rows());
  const int m = int_adj ? static_cast<int>(int_adj->rows()) : 0;
  if (int_adj && int_adj->cols() != n) throw ValidationError("int_adjacency must have n columns");
  Dag g(n, m);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (adj(u, v)) g.add_edge(u, v);
  for (int j = 0; j < m; ++j)
    for (int v = 0; v < n; ++v)
      if ((*int_adj)(j, v)) g.add_int_edge(j, v);
  g.validate();
  return g;
}

// Entry (a, b) is 1 when the class has a -> b or a - b.
IntMatrix pdag_matrix(const Pdag& p) {
  IntMatrix a = IntMatrix::Zero(p.size(), p.size());
  for (auto [u, v] : p.directed_edges()) a(u, v) = 1;
  for (auto [u, v] : p.undirected_edges()) a(u, v) = a(v, u) = 1;
  return a;
}

py::dict metrics_dict(const MetricResult& r) {
  py::dict d;
  d["TP"] = r.tp;
  d["FP"] = r.fp;
  d["FN"] = r.fn;
  d["P"] = r.p;
  d["SHD"] = r.shd;
  d["TPR"] = r.tpr;
  d["FPRp"] = r.fprp;
  return d;
}

class PyScorer {
 public:
  PyScorer(const Eigen::MatrixXd& data, const std::optional<IntMatrix>& row_states, double alpha_mu,
           const std::string& mode, const std::string& targets, double edge_penalty,
           const std::optional<std::vector<NodeSet>>& known_targets)
      : scorer_(make_data(data), make_design(static_cast<int>(data.rows()), row_states, known_targets),
                default_hyperparams(static_cast<int>(data.cols()), alpha_mu),
                {parse_mode(mode), parse_targets(targets), {edge_penalty}}) {
    validate_dataset(scorer_.data(), scorer_.design());
  }

  const IbgeScorer& get() const { return scorer_; }

 private:
  IbgeScorer scorer_;
};

}  // namespace

PYBIND11_MODULE(_ibge, mod) {
  mod.doc() = "Bayesian structure learning from mixed observational and interventional Gaussian data";

  py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<CycleError>(mod, "CycleError", PyExc_ValueError);

  py::class_<Dag>(mod, "Dag")
      .def(py::init<int, int>(), py::arg("n_obs"), py::arg("n_int") = 0)
      .def_static("from_adjacency", &dag_from_adjacency, py::arg("adjacency"), py::arg("int_adjacency") = py::none())
      .def_property_readonly("n_obs", &Dag::n_obs)
      .def_property_readonly("n_int", &Dag::n_int)
      .def("add_edge", &Dag::add_edge)
      .def("remove_edge", &Dag::remove_edge)
      .def("add_int_edge", &Dag::add_int_edge)
      .def("remove_int_edge", &Dag::remove_int_edge)
      .def("has_edge", &Dag::has_edge)
      .def("has_int_edge", &Dag::has_int_edge)
      .def("parents", &Dag::parents)
      .def("int_parents", &Dag::int_parents)
      .def("edges", &Dag::edges)
      .def("int_edges", &Dag::int_edges)
      .def("edge_count", &Dag::edge_count)
      .def("int_edge_count", &Dag::int_edge_count)
      .def("is_acyclic", &Dag::is_acyclic)
      .def("adjacency", &adjacency)
      .def("int_adjacency", &int_adjacency)
      .def("__eq__", [](const Dag& a, const Dag& b) { return a == b; })
      .def("__repr__", [](const Dag& g) {
        return "<Dag n_obs=" + std::to_string(g.n_obs()) + " edges=" + std::to_string(g.edge_count()) +
               " int_edges=" + std::to_string(g.int_edge_count()) + ">";
      });

  mod.def(
      "bge_local",
      [](const Eigen::MatrixXd& data, int node, const NodeSet& parents, double alpha_mu) {
        const auto d = make_data(data);
        const auto rows = all_rows(d.rows());
        return bge_local(node, parents, d, rows, default_hyperparams(d.cols(), alpha_mu));
      },
      py::arg("data"), py::arg("node"), py::arg("parents"), py::arg("alpha_mu") = 1.0,
      "Log marginal likelihood of one node given its parents under the BGe score.");

  py::class_<PyScorer>(mod, "Scorer")
      .def(py::init<const Eigen::MatrixXd&, const std::optional<IntMatrix>&, double, const std::string&,
                    const std::string&, double, const std::optional<std::vector<NodeSet>>&>(),
           py::arg("data"), py::arg("row_states") = py::none(), py::arg("alpha_mu") = 1.0, py::arg("mode") = "soft",
           py::arg("targets") = "unknown", py::arg("edge_penalty") = 0.0, py::arg("known_targets") = py::none())
      .def_property_readonly("n_obs", [](const PyScorer& s) { return s.get().n_obs(); })
      .def_property_readonly("n_int", [](const PyScorer& s) { return s.get().n_int(); })
      .def("empty_dag", [](const PyScorer& s) { return s.get().empty_dag(); })
      .def("total", [](const PyScorer& s, const Dag& g) { return s.get().total(g); }, py::arg("dag"))
      .def(
          "local",
          [](const PyScorer& s, int node, const NodeSet& parents, const NodeSet& int_parents) {
            return s.get().local(node, parents, int_parents);
          },
          py::arg("node"), py::arg("parents"), py::arg("int_parents") = NodeSet{})
      .def(
          "map",
          [](const PyScorer& s, int restarts, std::uint64_t seed, int max_parents, int threads) {
            SearchConfig config;
            config.restarts = restarts;
            config.seed = seed;
            config.max_parents = max_parents;
            config.threads = threads;
            SearchResult r;
            {
              py::gil_scoped_release release;
              r = map_greedy(s.get(), s.get().empty_dag(), config);
            }
            return py::make_tuple(r.dag, r.log_score);
          },
          py::arg("restarts") = 1, py::arg("seed") = 0, py::arg("max_parents") = -1, py::arg("threads") = 1,
          "Greedy MAP search from the empty graph. Returns (dag, log_score).")
      .def(
          "mcmc",
          [](const PyScorer& s, long iterations, long burnin, long thin, int chains, std::uint64_t seed,
             int max_parents, std::vector<double> heats, long swap_every, double threshold, int threads) {
            McmcConfig config;
            config.iterations = iterations;
            config.burnin = burnin;
            config.thin = thin;
            config.chains = chains;
            config.seed = seed;
            config.max_parents = max_parents;
            config.heats = std::move(heats);
            config.swap_every = swap_every;
            config.threads = threads;
            DagSampleSet samples;
            {
              py::gil_scoped_release release;
              samples = structure_mcmc(s.get(), s.get().empty_dag(), config);
            }
            const Eigen::MatrixXd post = edge_posterior(samples);
            py::list dags, scores, accept;
            for (const auto& smp : samples.samples) {
              dags.append(smp.dag);
              scores.append(smp.log_score);
            }
            for (const auto& c : samples.chains)
              accept.append(c.proposed ? static_cast<double>(c.accepted) / c.proposed : 0.0);
            py::dict out;
            out["samples"] = dags;
            out["log_scores"] = scores;
            out["edge_posterior"] = post;
            out["consensus"] = consensus_graph(post, s.get().n_obs(), threshold);
            out["acceptance"] = accept;
            return out;
          },
          py::arg("iterations") = 100000, py::arg("burnin") = 20000, py::arg("thin") = 100, py::arg("chains") = 1,
          py::arg("seed") = 0, py::arg("max_parents") = -1, py::arg("heats") = std::vector<double>{1.0},
          py::arg("swap_every") = 10, py::arg("threshold") = 0.5, py::arg("threads") = 1,
          "Structure MCMC from the empty graph. edge_posterior has n + m rows and n columns.");

  mod.def(
      "simulate",
      [](int n, int m, double expected_parents, const std::string& regime, int n_obs_rows, int rows_per_intervention,
         int total_rows, double rho, bool standardize, std::uint64_t seed) {
        const Regime reg = parse_regime(regime);
        const auto truth = simulate_truth({n, m, expected_parents, reg, derive_seed(seed, 0)});
        const DataLayout layout = reg == Regime::Soft ? DataLayout::soft(n_obs_rows, rows_per_intervention)
                                                      : DataLayout::perfect(total_rows, rho);
        const auto sim = generate_data(truth, layout, derive_seed(seed, 1), standardize);
        py::dict out;
        out["data"] = sim.data.values;
        out["row_states"] = states_matrix(sim.design);
        out["dag"] = truth.dag;
        out["weights"] = truth.weights;
        out["targets"] = truth.targets();
        return out;
      },
      py::arg("n") = 20, py::arg("m") = 5, py::arg("expected_parents") = 2.0, py::arg("regime") = "soft",
      py::arg("n_obs_rows") = 300, py::arg("rows_per_intervention") = 20, py::arg("total_rows") = 400,
      py::arg("rho") = 0.0, py::arg("standardize") = true, py::arg("seed") = 0,
      "Draw a ground truth and a dataset. Uses the same seed streams as the command-line tool.");

  mod.def("total_effects", &total_effects, py::arg("weights"),
          "Total causal effects (I - W)^-1 for a weighted DAG; the diagonal is 1.");

  mod.def(
      "posterior_effects",
      [](const std::vector<Dag>& dags, const Eigen::MatrixXd& data, const std::optional<IntMatrix>& row_states,
         double alpha_mu, int draws_per_dag, std::uint64_t seed, const std::string& mode) {
        const auto d = make_data(data);
        const auto design = make_design(d.rows(), row_states, std::nullopt);
        EffectsConfig config;
        config.draws_per_dag = draws_per_dag;
        config.seed = seed;
        config.mode = parse_mode(mode);
        EffectResult r;
        {
          py::gil_scoped_release release;
          r = posterior_effects(std::span<const Dag>(dags), d, design, default_hyperparams(d.cols(), alpha_mu), config);
        }
        const int n = d.cols();
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n), lower = mean, upper = mean;
        IntMatrix excludes = IntMatrix::Zero(n, n);
        for (const auto& s : r.summaries) {
          mean(s.source, s.target) = s.mean;
          lower(s.source, s.target) = s.lower;
          upper(s.source, s.target) = s.upper;
          excludes(s.source, s.target) = s.excludes_zero;
        }
        py::dict out;
        out["mean"] = mean;
        out["lower"] = lower;
        out["upper"] = upper;
        out["excludes_zero"] = excludes;
        out["draws"] = r.draw_count;
        return out;
      },
      py::arg("dags"), py::arg("data"), py::arg("row_states") = py::none(), py::arg("alpha_mu") = 1.0,
      py::arg("draws_per_dag") = 1, py::arg("seed") = 0, py::arg("mode") = "soft",
      "Posterior total effects with 95% equal-tailed intervals, as (n, n) matrices indexed [source, target].");

  mod.def("cpdag", [](const Dag& g) { return pdag_matrix(cpdag(g)); }, py::arg("dag"));
  mod.def(
      "interventional_eg",
      [](const Dag& g, const std::vector<NodeSet>& targets) { return pdag_matrix(interventional_eg(g, targets)); },
      py::arg("dag"), py::arg("targets"));
  mod.def(
      "compare",
      [](const Dag& estimate, const Dag& truth, const std::vector<NodeSet>& targets) {
        return metrics_dict(compare(estimate_class(estimate, targets), interventional_eg(truth, targets)));
      },
      py::arg("estimate"), py::arg("truth"), py::arg("targets"),
      "Edge metrics of an estimated graph against the truth, both mapped to their interventional classes.");

  mod.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"),
      "Run the command-line tool in-process; returns its exit code.");
}
