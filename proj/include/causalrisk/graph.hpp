#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "causalrisk/rng.hpp"

namespace causalrisk {

// Nodes are 0-based internally; every file format and user-facing message is 1-based.
using Node = int;
// Sorted ascending, no duplicates.
using NodeSet = std::vector<Node>;
using Edge = std::pair<Node, Node>;

// Directed graph that may also carry undirected edges (learner output such as a CPDAG).
//
// Stored as a mark matrix: mark(a, b) set and mark(b, a) unset is the directed edge a -> b,
// both set is the undirected edge {a, b}. This is exactly the on-disk adjacency format, so a
// pair can never be both directed and undirected.
class MixedGraph {
 public:
  explicit MixedGraph(int p = 0);

  int size() const noexcept { return p_; }

  // Both throw DataError on self-loops, out-of-range nodes or an already adjacent pair.
  void add_directed(Node from, Node to);
  void add_undirected(Node a, Node b);
  void remove_edge(Node a, Node b);

  bool has_directed(Node from, Node to) const;
  bool has_undirected(Node a, Node b) const;
  bool adjacent(Node a, Node b) const;
  bool has_undirected_edges() const;

  // Lexicographic by (from, to).
  std::vector<Edge> directed_edges() const;
  // Pairs (a, b) with a < b, lexicographic.
  std::vector<Edge> undirected_edges() const;
  std::size_t edge_count() const;

  NodeSet parents(Node i) const;
  NodeSet children(Node i) const;
  // Undirected neighbours only.
  NodeSet neighbours(Node i) const;

  bool mark(Node a, Node b) const { return marks_[index(a, b)] != 0; }

  friend bool operator==(const MixedGraph&, const MixedGraph&) = default;

 private:
  std::size_t index(Node a, Node b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(b);
  }
  void check_node(Node a) const;
  void check_pair(Node a, Node b) const;

  int p_ = 0;
  std::vector<std::uint8_t> marks_;
};

// Purely directed graph with a stored topological order; every edge points forward in it.
class Dag {
 public:
  Dag() = default;
  // Throws DataError if the graph has undirected edges, the order is not a permutation,
  // or an edge points backwards.
  Dag(MixedGraph graph, std::vector<Node> order);

  // Topological order by Kahn's algorithm, smallest available index first.
  static Dag from_graph(MixedGraph graph);

  int size() const noexcept { return graph_.size(); }
  const MixedGraph& graph() const noexcept { return graph_; }
  const std::vector<Node>& order() const noexcept { return order_; }

  // Same order, with every incoming edge of `node` removed.
  Dag without_parents(Node node) const;

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  MixedGraph graph_;
  std::vector<Node> order_;
};

// Nodes reachable from i along a nonempty directed path. i is included only if a directed
// cycle returns to it. Throws DataError if g has undirected edges or i is out of range.
NodeSet descendants(const MixedGraph& g, Node i);
NodeSet descendants(const Dag& g, Node i);

// Nodes reachable from i along a nonempty path of directed-forward or undirected edges.
// i itself is included only when a walk returns to it through a directed edge into i, so on
// purely directed graphs this coincides with descendants().
NodeSet possible_descendants(const MixedGraph& g, Node i);

// Uniform random causal order over p nodes; each of the p(p-1)/2 forward pairs is an edge
// independently with probability ens / (p - 1), so ens is the expected undirected degree.
Dag random_er_dag(int p, double ens, Rng& rng);

// Adjacency matrix text format: p lines of p space-separated 0/1 entries, entry[j][i] = 1 with
// entry[i][j] = 0 for j -> i, both 1 for {i, j}.
void write_adjacency(std::ostream& out, const MixedGraph& g);
// Throws DataError for ragged or non-square input, entries other than 0/1, nonzero diagonal,
// or a dimension different from expected_p when that is given.
MixedGraph read_adjacency(std::istream& in, std::optional<int> expected_p = std::nullopt);

}  // namespace causalrisk
