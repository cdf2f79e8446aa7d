#pragma once

// Brute-force reference implementations used only by the tests. They share no code with the
// library beyond the graph container.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "causalrisk/graph.hpp"

namespace oracle {

using causalrisk::MixedGraph;
using causalrisk::Node;

inline bool directed(const MixedGraph& g, Node a, Node b) { return g.mark(a, b) && !g.mark(b, a); }
inline bool undirected(const MixedGraph& g, Node a, Node b) { return g.mark(a, b) && g.mark(b, a); }

// Enumerates every simple path leaving `i` along edges that are directed forward (or
// undirected, when allowed). j != i is reachable if some path ends at j; i itself counts when a
// path ends in a node with a directed edge back into i.
inline std::set<Node> reachable(const MixedGraph& g, Node i, bool allow_undirected) {
  const int p = g.size();
  std::set<Node> out;
  std::vector<bool> on_path(static_cast<std::size_t>(p), false);
  std::function<void(Node)> walk = [&](Node v) {
    on_path[static_cast<std::size_t>(v)] = true;
    for (Node w = 0; w < p; ++w) {
      const bool step = directed(g, v, w) || (allow_undirected && undirected(g, v, w));
      if (!step) continue;
      if (w == i) {
        if (directed(g, v, w)) out.insert(i);
        continue;
      }
      if (on_path[static_cast<std::size_t>(w)]) continue;
      out.insert(w);
      walk(w);
    }
    on_path[static_cast<std::size_t>(v)] = false;
  };
  walk(i);
  return out;
}

inline std::set<Node> descendants(const MixedGraph& g, Node i) { return reachable(g, i, false); }
inline std::set<Node> possible_descendants(const MixedGraph& g, Node i) { return reachable(g, i, true); }

// Transitive closure by repeated boolean matrix squaring.
inline std::vector<std::vector<bool>> closure(const MixedGraph& g) {
  const int p = g.size();
  std::vector<std::vector<bool>> r(p, std::vector<bool>(p, false));
  for (Node a = 0; a < p; ++a)
    for (Node b = 0; b < p; ++b) r[a][b] = directed(g, a, b);
  for (int round = 0; round < p; ++round) {
    auto next = r;
    for (Node a = 0; a < p; ++a)
      for (Node b = 0; b < p; ++b)
        for (Node c = 0; c < p; ++c)
          if (r[a][c] && r[c][b]) next[a][b] = true;
    r = next;
  }
  return r;
}

inline double jaccard(const std::set<Node>& a, const std::set<Node>& b) {
  std::set<Node> both, either = a;
  for (Node x : b) {
    if (a.count(x)) both.insert(x);
    either.insert(x);
  }
  if (either.empty()) return 0.0;
  return 1.0 - static_cast<double>(both.size()) / static_cast<double>(either.size());
}

inline double oracle_hat(const MixedGraph& truth, const MixedGraph& h) {
  double sum = 0.0;
  for (Node i = 0; i < truth.size(); ++i) sum += oracle::jaccard(oracle::descendants(truth, i), oracle::possible_descendants(h, i));
  return sum / truth.size();
}

inline double naive(const std::vector<Node>& iota, const std::map<Node, std::set<Node>>& est, const MixedGraph& h) {
  double sum = 0.0;
  for (Node i : iota) sum += oracle::jaccard(est.at(i), oracle::possible_descendants(h, i));
  return sum / static_cast<double>(iota.size());
}

// fold_graph(i) is the learner output with intervention i withheld.
inline double cv(const std::vector<Node>& iota, const std::map<Node, std::set<Node>>& est,
                 const std::function<MixedGraph(Node)>& fold_graph) {
  double sum = 0.0;
  for (Node i : iota) sum += oracle::jaccard(est.at(i), oracle::possible_descendants(fold_graph(i), i));
  return sum / static_cast<double>(iota.size());
}

inline double weighted(double naive_value, double cv_value, int p, int iota_size) {
  const double w = static_cast<double>(iota_size) / p;
  double value = w * naive_value + (1.0 - w) * cv_value;
  const double lo = naive_value < cv_value ? naive_value : cv_value;
  const double hi = naive_value < cv_value ? cv_value : naive_value;
  return value < lo ? lo : (value > hi ? hi : value);
}

inline double welch(const std::vector<double>& x, const std::vector<double>& y) {
  auto moments = [](const std::vector<double>& v, double& mean, double& var) {
    mean = 0.0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    var = 0.0;
    for (double a : v) var += (a - mean) * (a - mean);
    var /= static_cast<double>(v.size() - 1);
  };
  double mx, vx, my, vy;
  moments(x, mx, vx);
  moments(y, my, vy);
  return (mx - my) / std::sqrt(vx / static_cast<double>(x.size()) + vy / static_cast<double>(y.size()));
}

}  // namespace oracle
