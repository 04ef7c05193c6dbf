#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ibge/core.hpp"

namespace ibge {

class CycleError : public std::runtime_error {
 public:
  CycleError(const std::string& what, NodeSet vertices)
      : std::runtime_error(what), vertices_(std::move(vertices)) {}
  /// Vertices left unordered when the sort stalled (every cycle lies inside).
  const NodeSet& vertices() const { return vertices_; }

 private:
  NodeSet vertices_;
};

/// Digraph over n_obs observed vertices plus n_int intervention vertices.
///
/// Intervention vertices can only point into observed vertices, so they are
/// parentless by construction. The observed part is plain adjacency storage;
/// acyclicity is a property checked by is_acyclic()/validate(), which lets
/// the same type carry thresholded consensus graphs.
class Dag {
 public:
  Dag() = default;
  Dag(int n_obs, int n_int = 0);

  int n_obs() const { return n_obs_; }
  int n_int() const { return n_int_; }

  bool has_edge(int from, int to) const { return obs_[index(from, to)] != 0; }
  void add_edge(int from, int to);
  void remove_edge(int from, int to);
  /// Replace from->to with to->from.
  void reverse_edge(int from, int to);

  bool has_int_edge(int intervention, int to) const { return int_[int_index(intervention, to)] != 0; }
  void add_int_edge(int intervention, int to);
  void remove_int_edge(int intervention, int to);
  void clear_int_edges();

  NodeSet parents(int v) const;
  NodeSet children(int v) const;
  /// Interventions pointing into v.
  NodeSet int_parents(int v) const;
  /// Observed vertices targeted by intervention j.
  NodeSet int_children(int j) const;

  int edge_count() const { return obs_edges_; }
  int int_edge_count() const { return int_edges_; }

  std::vector<std::pair<int, int>> edges() const;
  std::vector<std::pair<int, int>> int_edges() const;

  bool is_acyclic() const;
  /// Throws CycleError if the observed subgraph has a cycle.
  void validate() const;

  friend bool operator==(const Dag& a, const Dag& b) = default;

 private:
  std::size_t index(int from, int to) const;
  std::size_t int_index(int j, int to) const;

  int n_obs_ = 0;
  int n_int_ = 0;
  int obs_edges_ = 0;
  int int_edges_ = 0;
  std::vector<std::uint8_t> obs_;
  std::vector<std::uint8_t> int_;
};

/// Kahn's algorithm on the observed subgraph, lowest index first among ready
/// vertices. Throws CycleError naming the stalled vertices.
std::vector<int> topological_sort(const Dag& dag);

/// Dense transitive closure over observed vertices (bit rows).
class Reachability {
 public:
  explicit Reachability(const Dag& dag);
  /// True iff there is a directed path of length >= 1 from `from` to `to`.
  bool reaches(int from, int to) const {
    return (rows_[static_cast<std::size_t>(from) * words_ + (to >> 6)] >> (to & 63)) & 1ULL;
  }
  /// True iff some vertex in `targets` is reachable from `from`.
  bool reaches_any(int from, const std::vector<std::uint64_t>& targets) const;
  int words() const { return words_; }

 private:
  int n_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> rows_;
};

}  // namespace ibge
