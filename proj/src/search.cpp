#include "ibge/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "ibge/rng.hpp"

namespace ibge {
namespace {

// Parent bitsets and in-degrees over observed vertices.
struct ParentBits {
  int words;
  std::vector<std::uint64_t> bits;
  std::vector<int> indegree;

  explicit ParentBits(const Dag& dag)
      : words((dag.n_obs() + 63) / 64),
        bits(static_cast<std::size_t>(dag.n_obs()) * words, 0),
        indegree(dag.n_obs(), 0) {
    for (auto [u, v] : dag.edges()) {
      bits[static_cast<std::size_t>(v) * words + (u >> 6)] |= 1ULL << (u & 63);
      ++indegree[v];
    }
  }
  std::vector<std::uint64_t> of(int v) const {
    auto first = bits.begin() + static_cast<std::ptrdiff_t>(v) * words;
    return {first, first + words};
  }
};

template <typename Visit>
void for_each_legal_move(const Dag& dag, const MoveConstraints& c, Visit&& visit) {
  const int n = dag.n_obs();
  const Reachability reach(dag);
  const ParentBits pa(dag);
  const auto room = [&](int v) { return c.max_parents < 0 || pa.indegree[v] < c.max_parents; };
  for (int v = 0; v < n; ++v) {
    const auto pa_v = pa.of(v);
    for (int u = 0; u < n; ++u) {
      if (u == v) continue;
      if (dag.has_edge(u, v)) {
        visit(Move{MoveKind::Delete, u, v});
        // Reversal creates a cycle iff u reaches another parent of v.
        if (room(u) && !reach.reaches_any(u, pa_v)) visit(Move{MoveKind::Reverse, u, v});
      } else if (!dag.has_edge(v, u)) {
        if (room(v) && !reach.reaches(v, u)) visit(Move{MoveKind::Add, u, v});
      }
    }
    if (c.int_moves) {
      for (int j = 0; j < dag.n_int(); ++j) {
        visit(Move{dag.has_int_edge(j, v) ? MoveKind::DeleteInt : MoveKind::AddInt, j, v});
      }
    }
  }
}

struct MoveEffect {
  double delta = 0.0;
  int node_a = -1;
  double score_a = 0.0;
  int node_b = -1;
  double score_b = 0.0;
};

MoveEffect evaluate_move(const IbgeScorer& scorer, const Dag& dag, const std::vector<double>& ls,
                         const Move& mv) {
  const double kappa = scorer.options().prior.edge_penalty;
  MoveEffect e;
  const int v = mv.to;
  e.node_a = v;
  switch (mv.kind) {
    case MoveKind::Add:
      e.score_a = scorer.local(v, with_node(dag.parents(v), mv.from), dag.int_parents(v));
      e.delta = e.score_a - ls[v] - kappa;
      break;
    case MoveKind::Delete:
      e.score_a = scorer.local(v, without_node(dag.parents(v), mv.from), dag.int_parents(v));
      e.delta = e.score_a - ls[v] + kappa;
      break;
    case MoveKind::Reverse: {
      const int u = mv.from;
      e.score_a = scorer.local(v, without_node(dag.parents(v), u), dag.int_parents(v));
      e.node_b = u;
      e.score_b = scorer.local(u, with_node(dag.parents(u), v), dag.int_parents(u));
      e.delta = e.score_a + e.score_b - ls[v] - ls[u];
      break;
    }
    case MoveKind::AddInt:
      e.score_a = scorer.local(v, dag.parents(v), with_node(dag.int_parents(v), mv.from));
      e.delta = e.score_a - ls[v] - kappa;
      break;
    case MoveKind::DeleteInt:
      e.score_a = scorer.local(v, dag.parents(v), without_node(dag.int_parents(v), mv.from));
      e.delta = e.score_a - ls[v] + kappa;
      break;
  }
  return e;
}

void commit(std::vector<double>& ls, const MoveEffect& e) {
  ls[e.node_a] = e.score_a;
  if (e.node_b >= 0) ls[e.node_b] = e.score_b;
}

std::vector<double> local_scores(const IbgeScorer& scorer, const Dag& dag) {
  std::vector<double> ls(dag.n_obs());
  for (int v = 0; v < dag.n_obs(); ++v) ls[v] = scorer.local(v, dag.parents(v), dag.int_parents(v));
  return ls;
}

// Summed in node order so the value is bit-identical to IbgeScorer::total.
double sum_scores(const IbgeScorer& scorer, const Dag& dag, const std::vector<double>& ls) {
  double s = 0.0;
  for (double x : ls) s += x;
  return s + scorer.log_prior(dag);
}

void check_init(const IbgeScorer& scorer, const Dag& init) {
  if (init.n_obs() != scorer.n_obs() || init.n_int() != scorer.n_int()) {
    throw ValidationError("initial graph does not match the scorer's dimensions");
  }
  init.validate();
}

}  // namespace

std::vector<Move> legal_moves(const Dag& dag, const MoveConstraints& constraints) {
  std::vector<Move> moves;
  for_each_legal_move(dag, constraints, [&](const Move& m) { moves.push_back(m); });
  return moves;
}

std::size_t count_legal_moves(const Dag& dag, const MoveConstraints& constraints) {
  std::size_t count = 0;
  for_each_legal_move(dag, constraints, [&](const Move&) { ++count; });
  return count;
}

void apply_move(Dag& dag, const Move& move) {
  switch (move.kind) {
    case MoveKind::Add: dag.add_edge(move.from, move.to); break;
    case MoveKind::Delete: dag.remove_edge(move.from, move.to); break;
    case MoveKind::Reverse: dag.reverse_edge(move.from, move.to); break;
    case MoveKind::AddInt: dag.add_int_edge(move.from, move.to); break;
    case MoveKind::DeleteInt: dag.remove_int_edge(move.from, move.to); break;
  }
}

double move_delta(const IbgeScorer& scorer, const Dag& dag, const std::vector<double>& local_scores,
                  const Move& move) {
  return evaluate_move(scorer, dag, local_scores, move).delta;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Dag random_sparse_dag(int n_obs, int n_int, double edge_probability, std::uint64_t seed) {
  Rng rng(seed);
  Dag dag(n_obs, n_int);
  const auto order = rng.permutation(n_obs);
  for (int a = 0; a < n_obs; ++a)
    for (int b = a + 1; b < n_obs; ++b)
      if (rng.bernoulli(edge_probability)) dag.add_edge(order[a], order[b]);
  return dag;
}

SearchResult map_greedy(const IbgeScorer& scorer, const Dag& init, const SearchConfig& config) {
  if (config.restarts < 1) throw ValidationError("restarts must be >= 1");
  check_init(scorer, init);
  const MoveConstraints constraints{scorer.searches_int_edges(), config.max_parents};
  const int n = scorer.n_obs();

  struct Outcome {
    Dag dag;
    double score;
    std::vector<double> trace;
  };
  std::vector<Outcome> outcomes(config.restarts);

  parallel_for(config.restarts, config.threads, [&](int r) {
    Dag dag = init;
    if (r > 0) {
      const double p = n > 1 ? 1.0 / (n - 1) : 0.0;
      dag = random_sparse_dag(n, scorer.n_int(), p, derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      if (!constraints.int_moves) {
        for (auto [j, v] : init.int_edges()) dag.add_int_edge(j, v);
      }
      if (config.max_parents >= 0) {
        for (int v = 0; v < n; ++v) {
          auto pa = dag.parents(v);
          for (std::size_t k = config.max_parents; k < pa.size(); ++k) dag.remove_edge(pa[k], v);
        }
      }
    }
    auto ls = local_scores(scorer, dag);
    std::vector<double> trace{sum_scores(scorer, dag, ls)};
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      MoveEffect best;
      Move best_move{};
      bool found = false;
      for_each_legal_move(dag, constraints, [&](const Move& mv) {
        const MoveEffect e = evaluate_move(scorer, dag, ls, mv);
        // Strict comparison keeps the first (lexicographically smallest) move on ties.
        if (e.delta > 0.0 && (!found || e.delta > best.delta)) {
          best = e;
          best_move = mv;
          found = true;
        }
      });
      if (!found) break;
      apply_move(dag, best_move);
      commit(ls, best);
      trace.push_back(sum_scores(scorer, dag, ls));
    }
    outcomes[r] = {dag, sum_scores(scorer, dag, ls), std::move(trace)};
  });

  SearchResult result;
  for (int r = 0; r < config.restarts; ++r) {
    if (r == 0 || outcomes[r].score > result.log_score) {
      result.dag = outcomes[r].dag;
      result.log_score = outcomes[r].score;
      result.best_restart = r;
    }
    result.traces.push_back(std::move(outcomes[r].trace));
  }
  return result;
}

void McmcConfig::validate() const {
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (burnin < 0 || burnin >= iterations) throw ValidationError("burnin must be in [0, iterations)");
  if (thin < 1) throw ValidationError("thin must be >= 1");
  if (chains < 1) throw ValidationError("chains must be >= 1");
  if (heats.empty() || heats.front() != 1.0) throw ValidationError("heats must start at 1");
  for (std::size_t k = 1; k < heats.size(); ++k) {
    if (!(heats[k] > 0.0 && heats[k] < heats[k - 1])) throw ValidationError("heats must decrease strictly within (0, 1]");
  }
  if (swap_every < 1) throw ValidationError("swap_every must be >= 1");
}

DagSampleSet structure_mcmc(const IbgeScorer& scorer, const Dag& init, const McmcConfig& config) {
  config.validate();
  check_init(scorer, init);
  const MoveConstraints constraints{scorer.searches_int_edges(), config.max_parents};

  std::vector<std::vector<DagSample>> per_chain(config.chains);
  std::vector<ChainStats> stats(config.chains);
  // Without an in-degree cap every observed pair offers at least one legal
  // move (delete if adjacent, else one acyclic direction to add); with a cap
  // only the intervention moves are guaranteed.
  const int n = scorer.n_obs();
  const double int_floor = constraints.int_moves ? static_cast<double>(scorer.n_int()) * n : 0.0;
  const double floor_count = config.max_parents < 0 ? n * (n - 1) / 2.0 + int_floor : std::max(1.0, int_floor);
  const double log_floor = std::log(std::max(1.0, floor_count));

  const int k_heats = static_cast<int>(config.heats.size());

  parallel_for(config.chains, config.threads, [&](int c) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(c)));
    ChainStats& st = stats[c];
    struct Replica {
      Dag dag;
      std::vector<double> ls;
      std::vector<Move> moves;
    };
    std::vector<Replica> reps(k_heats);
    for (auto& r : reps) {
      r.dag = init;
      r.ls = local_scores(scorer, r.dag);
      r.moves = legal_moves(r.dag, constraints);
    }
    for (long it = 0; it < config.iterations; ++it) {
      for (int k = 0; k < k_heats; ++k) {
        Replica& r = reps[k];
        if (r.moves.empty()) continue;
        const double heat = config.heats[k];
        const Move mv = r.moves[rng.index(static_cast<int>(r.moves.size()))];
        const MoveEffect e = evaluate_move(scorer, r.dag, r.ls, mv);
        const double log_u = std::log(rng.uniform());
        const double log_cur = std::log(static_cast<double>(r.moves.size()));
        if (k == 0) ++st.proposed;
        // Cheap exact rejection: the proposal's neighbourhood is never
        // smaller than the floor, so the Hastings term is bounded above.
        if (log_u < heat * e.delta + log_cur - log_floor) {
          Dag prop = r.dag;
          apply_move(prop, mv);
          const double log_hastings = log_cur - std::log(static_cast<double>(count_legal_moves(prop, constraints)));
          if (log_u < heat * e.delta + log_hastings) {
            r.dag = std::move(prop);
            commit(r.ls, e);
            r.moves = legal_moves(r.dag, constraints);
            if (k == 0) ++st.accepted;
          }
        }
      }
      if (k_heats > 1 && (it + 1) % config.swap_every == 0) {
        const int k = rng.index(k_heats - 1);
        const double sa = sum_scores(scorer, reps[k].dag, reps[k].ls);
        const double sb = sum_scores(scorer, reps[k + 1].dag, reps[k + 1].ls);
        ++st.swaps_proposed;
        if (std::log(rng.uniform()) < (config.heats[k] - config.heats[k + 1]) * (sb - sa)) {
          std::swap(reps[k], reps[k + 1]);
          ++st.swaps_accepted;
        }
      }
      const Replica& cold = reps[0];
      if (config.check_every > 0 && (it + 1) % config.check_every == 0) {
        const double err = std::abs(sum_scores(scorer, cold.dag, cold.ls) - scorer.total(cold.dag));
        st.max_check_error = std::max(st.max_check_error, err);
      }
      if (it >= config.burnin && (it - config.burnin) % config.thin == 0) {
        const double score = sum_scores(scorer, cold.dag, cold.ls);
        per_chain[c].push_back({cold.dag, score, c, it});
        st.trace.push_back(score);
      }
    }
  });

  DagSampleSet out;
  for (auto& chain : per_chain)
    for (auto& s : chain) out.samples.push_back(std::move(s));
  out.chains = std::move(stats);
  return out;
}

Eigen::MatrixXd edge_posterior(const DagSampleSet& samples) {
  if (samples.samples.empty()) throw ValidationError("edge_posterior needs at least one sample");
  const int n = samples.samples.front().dag.n_obs();
  const int m = samples.samples.front().dag.n_int();
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(n + m, n);
  for (const auto& s : samples.samples) {
    for (auto [u, v] : s.dag.edges()) freq(u, v) += 1.0;
    for (auto [j, v] : s.dag.int_edges()) freq(n + j, v) += 1.0;
  }
  return freq / static_cast<double>(samples.samples.size());
}

Dag consensus_graph(const Eigen::MatrixXd& posterior, int n_obs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  if (posterior.cols() != n_obs || posterior.rows() < n_obs) {
    throw ValidationError("posterior matrix has the wrong shape");
  }
  const int m = static_cast<int>(posterior.rows()) - n_obs;
  Dag g(n_obs, m);
  for (int u = 0; u < n_obs; ++u)
    for (int v = 0; v < n_obs; ++v)
      if (u != v && posterior(u, v) > threshold) g.add_edge(u, v);
  for (int j = 0; j < m; ++j)
    for (int v = 0; v < n_obs; ++v)
      if (posterior(n_obs + j, v) > threshold) g.add_int_edge(j, v);
  return g;
}

}  // namespace ibge
