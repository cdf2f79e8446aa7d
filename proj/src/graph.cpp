#include "causalrisk/graph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "causalrisk/error.hpp"

namespace causalrisk {

MixedGraph::MixedGraph(int p) : p_(p) {
  if (p < 0) throw DataError("graph size must be non-negative");
  marks_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0);
}

void MixedGraph::check_node(Node a) const {
  if (a < 0 || a >= p_) {
    throw DataError("node index " + std::to_string(a + 1) + " out of range [1, " +
                    std::to_string(p_) + "]");
  }
}

void MixedGraph::check_pair(Node a, Node b) const {
  if (a < 0 || a >= p_ || b < 0 || b >= p_) {
    throw DataError("node index out of range: (" + std::to_string(a + 1) + ", " +
                    std::to_string(b + 1) + ") with p = " + std::to_string(p_));
  }
  if (a == b) throw DataError("self-loop on node " + std::to_string(a + 1));
}

void MixedGraph::add_directed(Node from, Node to) {
  check_pair(from, to);
  if (adjacent(from, to)) {
    throw DataError("nodes " + std::to_string(from + 1) + " and " + std::to_string(to + 1) +
                    " are already adjacent");
  }
  marks_[index(from, to)] = 1;
}

void MixedGraph::add_undirected(Node a, Node b) {
  check_pair(a, b);
  if (adjacent(a, b)) {
    throw DataError("nodes " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                    " are already adjacent");
  }
  marks_[index(a, b)] = 1;
  marks_[index(b, a)] = 1;
}

void MixedGraph::remove_edge(Node a, Node b) {
  check_pair(a, b);
  marks_[index(a, b)] = 0;
  marks_[index(b, a)] = 0;
}

bool MixedGraph::has_directed(Node from, Node to) const {
  check_pair(from, to);
  return mark(from, to) && !mark(to, from);
}

bool MixedGraph::has_undirected(Node a, Node b) const {
  check_pair(a, b);
  return mark(a, b) && mark(b, a);
}

bool MixedGraph::adjacent(Node a, Node b) const {
  check_pair(a, b);
  return mark(a, b) || mark(b, a);
}

bool MixedGraph::has_undirected_edges() const {
  for (Node a = 0; a < p_; ++a)
    for (Node b = a + 1; b < p_; ++b)
      if (mark(a, b) && mark(b, a)) return true;
  return false;
}

std::vector<Edge> MixedGraph::directed_edges() const {
  std::vector<Edge> edges;
  for (Node a = 0; a < p_; ++a)
    for (Node b = 0; b < p_; ++b)
      if (a != b && mark(a, b) && !mark(b, a)) edges.emplace_back(a, b);
  return edges;
}

std::vector<Edge> MixedGraph::undirected_edges() const {
  std::vector<Edge> edges;
  for (Node a = 0; a < p_; ++a)
    for (Node b = a + 1; b < p_; ++b)
      if (mark(a, b) && mark(b, a)) edges.emplace_back(a, b);
  return edges;
}

std::size_t MixedGraph::edge_count() const {
  std::size_t count = 0;
  for (Node a = 0; a < p_; ++a)
    for (Node b = a + 1; b < p_; ++b)
      if (mark(a, b) || mark(b, a)) ++count;
  return count;
}

NodeSet MixedGraph::parents(Node i) const {
  check_node(i);
  NodeSet out;
  for (Node j = 0; j < p_; ++j)
    if (j != i && mark(j, i) && !mark(i, j)) out.push_back(j);
  return out;
}

NodeSet MixedGraph::children(Node i) const {
  check_node(i);
  NodeSet out;
  for (Node j = 0; j < p_; ++j)
    if (j != i && mark(i, j) && !mark(j, i)) out.push_back(j);
  return out;
}

NodeSet MixedGraph::neighbours(Node i) const {
  check_node(i);
  NodeSet out;
  for (Node j = 0; j < p_; ++j)
    if (j != i && mark(i, j) && mark(j, i)) out.push_back(j);
  return out;
}

Dag::Dag(MixedGraph graph, std::vector<Node> order) : graph_(std::move(graph)), order_(std::move(order)) {
  const int p = graph_.size();
  if (graph_.has_undirected_edges()) throw DataError("a DAG cannot contain undirected edges");
  if (static_cast<int>(order_.size()) != p) throw DataError("topological order has wrong length");
  std::vector<int> position(static_cast<std::size_t>(p), -1);
  for (int k = 0; k < p; ++k) {
    const Node v = order_[static_cast<std::size_t>(k)];
    if (v < 0 || v >= p || position[static_cast<std::size_t>(v)] != -1)
      throw DataError("topological order is not a permutation");
    position[static_cast<std::size_t>(v)] = k;
  }
  for (const auto& [from, to] : graph_.directed_edges()) {
    if (position[static_cast<std::size_t>(from)] >= position[static_cast<std::size_t>(to)]) {
      throw DataError("edge " + std::to_string(from + 1) + " -> " + std::to_string(to + 1) +
                      " violates the topological order");
    }
  }
}

Dag Dag::from_graph(MixedGraph graph) {
  const int p = graph.size();
  if (graph.has_undirected_edges()) throw DataError("a DAG cannot contain undirected edges");
  std::vector<int> indegree(static_cast<std::size_t>(p), 0);
  for (const auto& edge : graph.directed_edges()) ++indegree[static_cast<std::size_t>(edge.second)];
  std::vector<Node> order;
  order.reserve(static_cast<std::size_t>(p));
  std::vector<bool> done(static_cast<std::size_t>(p), false);
  for (int step = 0; step < p; ++step) {
    Node next = -1;
    for (Node v = 0; v < p; ++v) {
      if (!done[static_cast<std::size_t>(v)] && indegree[static_cast<std::size_t>(v)] == 0) {
        next = v;
        break;
      }
    }
    if (next < 0) throw DataError("graph has a directed cycle");
    done[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
    for (Node c : graph.children(next)) --indegree[static_cast<std::size_t>(c)];
  }
  return Dag(std::move(graph), std::move(order));
}

Dag Dag::without_parents(Node node) const {
  MixedGraph g = graph_;
  for (Node j : g.parents(node)) g.remove_edge(j, node);
  return Dag(std::move(g), order_);
}

namespace {

// BFS following a -> b marks; undirected edges only when allow_undirected. The start node is
// reported only when re-entered through a directed edge.
NodeSet reach(const MixedGraph& g, Node i, bool allow_undirected) {
  const int p = g.size();
  if (i < 0 || i >= p) {
    throw DataError("node index " + std::to_string(i + 1) + " out of range [1, " +
                    std::to_string(p) + "]");
  }
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  bool self = false;
  std::deque<Node> queue{i};
  while (!queue.empty()) {
    const Node v = queue.front();
    queue.pop_front();
    for (Node w = 0; w < p; ++w) {
      if (w == v || !g.mark(v, w)) continue;
      const bool undirected = g.mark(w, v);
      if (undirected && !allow_undirected) continue;
      if (w == i) {
        if (!undirected) self = true;
        continue;
      }
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  NodeSet out;
  for (Node w = 0; w < p; ++w)
    if (seen[static_cast<std::size_t>(w)] || (w == i && self)) out.push_back(w);
  return out;
}

}  // namespace

NodeSet descendants(const MixedGraph& g, Node i) {
  if (g.has_undirected_edges()) throw DataError("descendants requires a purely directed graph");
  return reach(g, i, false);
}

NodeSet descendants(const Dag& g, Node i) { return reach(g.graph(), i, false); }

NodeSet possible_descendants(const MixedGraph& g, Node i) { return reach(g, i, true); }

Dag random_er_dag(int p, double ens, Rng& rng) {
  if (p < 2) throw DataError("random_er_dag requires p >= 2");
  if (!(ens > 0.0) || ens > static_cast<double>(p - 1)) {
    throw DataError("expected neighbourhood size must lie in (0, p - 1]");
  }
  std::vector<Node> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const double probability = ens / static_cast<double>(p - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MixedGraph g(p);
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      if (unit(rng) < probability) {
        g.add_directed(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
      }
    }
  }
  return Dag(std::move(g), std::move(order));
}

void write_adjacency(std::ostream& out, const MixedGraph& g) {
  const int p = g.size();
  for (Node j = 0; j < p; ++j) {
    for (Node i = 0; i < p; ++i) {
      if (i) out << ' ';
      out << (g.mark(j, i) ? '1' : '0');
    }
    out << '\n';
  }
}

MixedGraph read_adjacency(std::istream& in, std::optional<int> expected_p) {
  std::vector<std::vector<int>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<int> row;
    std::string token;
    while (fields >> token) {
      if (token != "0" && token != "1") {
        throw DataError("adjacency line " + std::to_string(line_no) + ": entry '" + token +
                        "' is not 0 or 1");
      }
      row.push_back(token == "1" ? 1 : 0);
    }
    rows.push_back(std::move(row));
  }
  const int p = static_cast<int>(rows.size());
  if (p == 0) throw DataError("adjacency matrix is empty");
  for (int r = 0; r < p; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != p) {
      throw DataError("adjacency matrix is not square: row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[static_cast<std::size_t>(r)].size()) + " entries, expected " +
                      std::to_string(p));
    }
  }
  if (expected_p && *expected_p != p) {
    throw DataError("adjacency matrix is " + std::to_string(p) + "x" + std::to_string(p) +
                    ", expected " + std::to_string(*expected_p) + "x" + std::to_string(*expected_p));
  }
  MixedGraph g(p);
  for (Node j = 0; j < p; ++j) {
    if (rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] != 0) {
      throw DataError("adjacency matrix has a nonzero diagonal entry at " + std::to_string(j + 1));
    }
  }
  for (Node a = 0; a < p; ++a) {
    for (Node b = a + 1; b < p; ++b) {
      const bool ab = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0;
      const bool ba = rows[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] != 0;
      if (ab && ba) g.add_undirected(a, b);
      else if (ab) g.add_directed(a, b);
      else if (ba) g.add_directed(b, a);
    }
  }
  return g;
}

}  // namespace causalrisk
