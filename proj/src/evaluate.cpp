#include "ibge/evaluate.hpp"

#include <mutex>

#include "ibge/search.hpp"

namespace ibge {

void Pdag::add_directed(int from, int to) {
  if (from == to) throw ValidationError("self-loops are not allowed");
  at(from, to) = 1;
  at(to, from) = 0;
}

void Pdag::add_undirected(int a, int b) {
  if (a == b) throw ValidationError("self-loops are not allowed");
  at(a, b) = 1;
  at(b, a) = 1;
}

void Pdag::remove(int a, int b) {
  at(a, b) = 0;
  at(b, a) = 0;
}

std::vector<std::pair<int, int>> Pdag::directed_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (is_directed(a, b)) out.emplace_back(a, b);
  return out;
}

std::vector<std::pair<int, int>> Pdag::undirected_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b)
      if (is_undirected(a, b)) out.emplace_back(a, b);
  return out;
}

int Pdag::edge_count() const {
  int count = 0;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b)
      if (adjacent(a, b)) ++count;
  return count;
}

Pdag Pdag::from_dag(const Dag& dag) {
  Pdag g(dag.n_obs());
  for (auto [u, v] : dag.edges()) g.add_directed(u, v);
  return g;
}

namespace {

// Closes a pattern under Meek's orientation rules R1-R4.
void apply_meek_rules(Pdag& g) {
  const int n = g.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !g.is_undirected(a, b)) continue;
        bool orient = false;
        for (int c = 0; c < n && !orient; ++c) {
          if (c == a || c == b) continue;
          // R1: c -> a - b with c, b nonadjacent.
          if (g.is_directed(c, a) && !g.adjacent(c, b)) orient = true;
          // R2: a -> c -> b with a - b.
          else if (g.is_directed(a, c) && g.is_directed(c, b)) orient = true;
        }
        // R3: a - c -> b and a - d -> b with c, d nonadjacent.
        for (int c = 0; c < n && !orient; ++c) {
          if (c == a || c == b || !g.is_undirected(a, c) || !g.is_directed(c, b)) continue;
          for (int d = c + 1; d < n && !orient; ++d) {
            if (d == a || d == b || !g.is_undirected(a, d) || !g.is_directed(d, b)) continue;
            if (!g.adjacent(c, d)) orient = true;
          }
        }
        // R4: a - c -> d -> b with a adjacent to d and c, b nonadjacent.
        for (int c = 0; c < n && !orient; ++c) {
          if (c == a || c == b || !g.is_undirected(a, c) || g.adjacent(c, b)) continue;
          for (int d = 0; d < n && !orient; ++d) {
            if (d == a || d == b || d == c) continue;
            if (g.is_directed(c, d) && g.is_directed(d, b) && g.adjacent(a, d)) orient = true;
          }
        }
        if (orient) {
          g.add_directed(a, b);
          changed = true;
        }
      }
    }
  }
}

}  // namespace

Pdag interventional_eg(const Dag& dag, const std::vector<NodeSet>& targets) {
  dag.validate();
  const int n = dag.n_obs();
  const int m = static_cast<int>(targets.size());
  const int total = n + m;

  // Augmented DAG: vertices n..n+m-1 are intervention sources.
  std::vector<NodeSet> parents(total);
  for (auto [u, v] : dag.edges()) parents[v].push_back(u);
  for (int j = 0; j < m; ++j)
    for (int v : targets[j]) {
      if (v < 0 || v >= n) throw ValidationError("target index out of range");
      parents[v].push_back(n + j);
    }

  Pdag g(total);
  for (int v = 0; v < total; ++v)
    for (int u : parents[v]) {
      if (u >= n) g.add_directed(u, v);
      else g.add_undirected(u, v);
    }
  // v-structures u -> v <- w with u, w nonadjacent.
  for (int v = 0; v < n; ++v) {
    const auto& pa = parents[v];
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t k = i + 1; k < pa.size(); ++k)
        if (!g.adjacent(pa[i], pa[k])) {
          g.add_directed(pa[i], v);
          g.add_directed(pa[k], v);
        }
  }
  apply_meek_rules(g);

  Pdag out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (g.is_directed(a, b)) out.add_directed(a, b);
      else if (a < b && g.is_undirected(a, b)) out.add_undirected(a, b);
    }
  return out;
}

Pdag cpdag(const Dag& dag) { return interventional_eg(dag, {}); }

Pdag symmetrize(const Dag& graph) {
  Pdag g(graph.n_obs());
  for (auto [u, v] : graph.edges()) {
    if (graph.has_edge(v, u)) g.add_undirected(u, v);
    else g.add_directed(u, v);
  }
  return g;
}

Pdag estimate_class(const Dag& estimate, const std::vector<NodeSet>& targets) {
  if (estimate.is_acyclic()) return interventional_eg(estimate, targets);
  return symmetrize(estimate);
}

MetricResult compare(const Pdag& estimate, const Pdag& truth) {
  if (estimate.size() != truth.size()) throw ValidationError("compare: vertex count mismatch");
  MetricResult r;
  const int n = truth.size();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool in_truth = truth.adjacent(a, b);
      const bool in_est = estimate.adjacent(a, b);
      if (in_truth) {
        ++r.p;
        if (!in_est) {
          r.fn += 1.0;
        } else if (truth.is_undirected(a, b) == estimate.is_undirected(a, b) &&
                   truth.is_directed(a, b) == estimate.is_directed(a, b)) {
          r.tp += 1.0;
        } else {
          r.tp += 0.5;
          r.fp += 0.5;
          r.fn += 0.5;
        }
      } else if (in_est) {
        r.fp += 1.0;
      }
    }
  }
  r.shd = r.fn + r.fp;
  r.tpr = r.p > 0 ? r.tp / r.p : 1.0;
  r.fprp = r.p > 0 ? r.fp / r.p : r.fp;
  return r;
}

std::vector<double> default_alpha_mu_grid() {
  return {0.000248, 0.00111, 0.00498, 0.0223, 0.1, 0.165, 0.272, 0.448, 0.739};
}

std::string regime_name(Regime regime) { return regime == Regime::Soft ? "soft" : "perfect"; }

std::vector<RocRow> roc_sweep(const std::vector<BenchmarkDataset>& datasets, const Learner& learner,
                              const std::vector<double>& alpha_mu_grid, const std::string& learner_name,
                              int jobs, const CellSink& on_cell) {
  if (alpha_mu_grid.empty()) throw ValidationError("alpha_mu grid must be nonempty");
  const int cells = static_cast<int>(datasets.size() * alpha_mu_grid.size());
  std::vector<RocRow> rows(cells);
  std::mutex sink_mutex;
  parallel_for(cells, jobs, [&](int cell) {
    const auto& ds = datasets[cell / alpha_mu_grid.size()];
    const double alpha_mu = alpha_mu_grid[cell % alpha_mu_grid.size()];
    const auto targets = ds.truth.targets();
    const Pdag truth_class = interventional_eg(ds.truth.dag, targets);
    const Dag estimate = learner(ds, alpha_mu);
    RocRow& row = rows[cell];
    row.dataset_id = ds.id;
    row.seed = ds.seed;
    row.alpha_mu = alpha_mu;
    row.regime = regime_name(ds.truth.regime);
    row.learner = learner_name;
    row.metrics = compare(estimate_class(estimate, targets), truth_class);
    if (on_cell) {
      std::lock_guard lock(sink_mutex);
      on_cell(row);
    }
  });
  return rows;
}

}  // namespace ibge
