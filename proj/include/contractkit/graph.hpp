#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ck {

// Simple undirected graph. Self-loops are allowed only where an operation
// says so (FMMC); multi-edges are collapsed.
struct Graph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  Graph() = default;
  Graph(std::size_t vertices, std::vector<std::pair<std::size_t, std::size_t>> edge_list);

  static Graph path(std::size_t n);
  static Graph complete(std::size_t n);

  bool has_self_loops() const;
  // Degree ignoring self-loops.
  std::vector<std::size_t> degrees() const;
  std::vector<std::vector<std::size_t>> neighbours() const;
  bool adjacent(std::size_t u, std::size_t v) const;
  bool connected() const;
  std::size_t max_degree() const;
  // Hop distance between vertex sets; SIZE_MAX when unreachable.
  std::size_t distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const;
  // Non-loop edge count.
  std::size_t proper_edge_count() const;
};

}  // namespace ck
