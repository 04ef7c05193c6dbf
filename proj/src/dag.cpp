#include "ibge/dag.hpp"

#include <functional>
#include <queue>
#include <sstream>

namespace ibge {

Dag::Dag(int n_obs, int n_int)
    : n_obs_(n_obs),
      n_int_(n_int),
      obs_(static_cast<std::size_t>(n_obs) * n_obs, 0),
      int_(static_cast<std::size_t>(n_int) * n_obs, 0) {
  if (n_obs < 0 || n_int < 0) throw ValidationError("vertex counts must be nonnegative");
}

std::size_t Dag::index(int from, int to) const {
  return static_cast<std::size_t>(from) * n_obs_ + to;
}

std::size_t Dag::int_index(int j, int to) const {
  return static_cast<std::size_t>(j) * n_obs_ + to;
}

void Dag::add_edge(int from, int to) {
  if (from == to) throw ValidationError("self-loops are not allowed");
  auto& e = obs_[index(from, to)];
  if (!e) {
    e = 1;
    ++obs_edges_;
  }
}

void Dag::remove_edge(int from, int to) {
  auto& e = obs_[index(from, to)];
  if (e) {
    e = 0;
    --obs_edges_;
  }
}

void Dag::reverse_edge(int from, int to) {
  remove_edge(from, to);
  add_edge(to, from);
}

void Dag::add_int_edge(int j, int to) {
  auto& e = int_[int_index(j, to)];
  if (!e) {
    e = 1;
    ++int_edges_;
  }
}

void Dag::remove_int_edge(int j, int to) {
  auto& e = int_[int_index(j, to)];
  if (e) {
    e = 0;
    --int_edges_;
  }
}

void Dag::clear_int_edges() {
  std::fill(int_.begin(), int_.end(), 0);
  int_edges_ = 0;
}

NodeSet Dag::parents(int v) const {
  NodeSet out;
  for (int u = 0; u < n_obs_; ++u)
    if (obs_[index(u, v)]) out.push_back(u);
  return out;
}

NodeSet Dag::children(int v) const {
  NodeSet out;
  for (int w = 0; w < n_obs_; ++w)
    if (obs_[index(v, w)]) out.push_back(w);
  return out;
}

NodeSet Dag::int_parents(int v) const {
  NodeSet out;
  for (int j = 0; j < n_int_; ++j)
    if (int_[int_index(j, v)]) out.push_back(j);
  return out;
}

NodeSet Dag::int_children(int j) const {
  NodeSet out;
  for (int v = 0; v < n_obs_; ++v)
    if (int_[int_index(j, v)]) out.push_back(v);
  return out;
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n_obs_; ++u)
    for (int v = 0; v < n_obs_; ++v)
      if (obs_[index(u, v)]) out.emplace_back(u, v);
  return out;
}

std::vector<std::pair<int, int>> Dag::int_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < n_int_; ++j)
    for (int v = 0; v < n_obs_; ++v)
      if (int_[int_index(j, v)]) out.emplace_back(j, v);
  return out;
}

bool Dag::is_acyclic() const {
  try {
    topological_sort(*this);
    return true;
  } catch (const CycleError&) {
    return false;
  }
}

void Dag::validate() const { topological_sort(*this); }

std::vector<int> topological_sort(const Dag& dag) {
  const int n = dag.n_obs();
  std::vector<int> indegree(n, 0);
  for (auto [u, v] : dag.edges()) ++indegree[v];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int w = 0; w < n; ++w) {
      if (dag.has_edge(u, w) && --indegree[w] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    NodeSet stalled;
    for (int v = 0; v < n; ++v)
      if (indegree[v] > 0) stalled.push_back(v);
    std::ostringstream os;
    os << "cycle detected among vertices {";
    for (std::size_t k = 0; k < stalled.size(); ++k) os << (k ? "," : "") << stalled[k];
    os << "}";
    throw CycleError(os.str(), std::move(stalled));
  }
  return order;
}

Reachability::Reachability(const Dag& dag) : n_(dag.n_obs()), words_((dag.n_obs() + 63) / 64) {
  rows_.assign(static_cast<std::size_t>(n_) * words_, 0);
  const auto order = topological_sort(dag);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int u = *it;
    std::uint64_t* row = &rows_[static_cast<std::size_t>(u) * words_];
    for (int c = 0; c < n_; ++c) {
      if (!dag.has_edge(u, c)) continue;
      row[c >> 6] |= 1ULL << (c & 63);
      const std::uint64_t* child = &rows_[static_cast<std::size_t>(c) * words_];
      for (int w = 0; w < words_; ++w) row[w] |= child[w];
    }
  }
}

bool Reachability::reaches_any(int from, const std::vector<std::uint64_t>& targets) const {
  const std::uint64_t* row = &rows_[static_cast<std::size_t>(from) * words_];
  for (int w = 0; w < words_; ++w)
    if (row[w] & targets[w]) return true;
  return false;
}

}  // namespace ibge
