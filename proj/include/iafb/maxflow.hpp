#pragma once

// Integer max flow (Dinic). Small graphs only; capacities are 64-bit.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "iafb/error.hpp"

namespace iafb {

class FlowNetwork {
 public:
  static constexpr long kInfinite = std::numeric_limits<long>::max() / 4;

  explicit FlowNetwork(int nodes = 0) : adjacency_(nodes) {}

  int add_node() {
    adjacency_.emplace_back();
    return static_cast<int>(adjacency_.size()) - 1;
  }

  int nodes() const { return static_cast<int>(adjacency_.size()); }

  /// Returns the id of the forward edge.
  int add_edge(int from, int to, long capacity) {
    require(from >= 0 && from < nodes() && to >= 0 && to < nodes() && capacity >= 0,
            ErrorKind::InvalidInput, "flow network: bad edge");
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({from, to, capacity, 0});
    edges_.push_back({to, from, 0, 0});
    adjacency_[from].push_back(id);
    adjacency_[to].push_back(id + 1);
    return id;
  }

  long max_flow(int source, int sink) {
    long total = 0;
    while (build_levels(source, sink)) {
      cursor_.assign(nodes(), 0);
      while (long pushed = augment(source, sink, kInfinite)) total += pushed;
    }
    return total;
  }

  long flow(int edge) const { return edges_[edge].flow; }
  long capacity(int edge) const { return edges_[edge].capacity; }
  int edge_from(int edge) const { return edges_[edge].from; }
  int edge_to(int edge) const { return edges_[edge].to; }

  /// Forward edge ids leaving a node.
  std::vector<int> out_edges(int node) const {
    std::vector<int> out;
    for (int e : adjacency_[node])
      if ((e & 1) == 0) out.push_back(e);
    return out;
  }

  /// Forward edge ids entering a node.
  std::vector<int> in_edges(int node) const {
    std::vector<int> in;
    for (int e : adjacency_[node])
      if ((e & 1) == 1) in.push_back(e ^ 1);
    return in;
  }

 private:
  struct Edge {
    int from;
    int to;
    long capacity;
    long flow;
  };

  bool build_levels(int source, int sink) {
    level_.assign(nodes(), -1);
    std::queue<int> frontier;
    level_[source] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int e : adjacency_[v]) {
        const Edge& ed = edges_[e];
        if (ed.capacity - ed.flow > 0 && level_[ed.to] < 0) {
          level_[ed.to] = level_[v] + 1;
          frontier.push(ed.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  long augment(int v, int sink, long limit) {
    if (v == sink) return limit;
    for (auto& i = cursor_[v]; i < adjacency_[v].size(); ++i) {
      const int e = adjacency_[v][i];
      Edge& ed = edges_[e];
      if (ed.capacity - ed.flow <= 0 || level_[ed.to] != level_[v] + 1) continue;
      const long pushed = augment(ed.to, sink, std::min(limit, ed.capacity - ed.flow));
      if (pushed > 0) {
        ed.flow += pushed;
        edges_[e ^ 1].flow -= pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> adjacency_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
};

}  // namespace iafb
