#include "contractkit/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "contractkit/error.hpp"

namespace ck {

Graph::Graph(std::size_t vertices, std::vector<std::pair<std::size_t, std::size_t>> edge_list) : n(vertices) {
  if (n < 1) throw Error(ErrorCode::Domain, "graph needs at least one vertex");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [u, v] : edge_list) {
    if (u >= n || v >= n) throw Error(ErrorCode::Domain, "edge endpoint out of range");
    auto key = std::minmax(u, v);
    if (seen.insert(key).second) edges.emplace_back(key.first, key.second);
  }
}

Graph Graph::path(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph Graph::complete(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

bool Graph::has_self_loops() const {
  return std::any_of(edges.begin(), edges.end(), [](const auto& e) { return e.first == e.second; });
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(n, 0);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    ++d[u];
    ++d[v];
  }
  return d;
}

std::vector<std::vector<std::size_t>> Graph::neighbours() const {
  std::vector<std::vector<std::size_t>> nb(n);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    nb[u].push_back(v);
    nb[v].push_back(u);
  }
  for (auto& l : nb) std::sort(l.begin(), l.end());
  return nb;
}

bool Graph::adjacent(std::size_t u, std::size_t v) const {
  if (u == v) return false;
  auto key = std::minmax(u, v);
  return std::find(edges.begin(), edges.end(), std::pair<std::size_t, std::size_t>(key.first, key.second)) !=
         edges.end();
}

bool Graph::connected() const {
  auto nb = neighbours();
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> q{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto v : nb[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push_back(v);
      }
  }
  return count == n;
}

std::size_t Graph::max_degree() const {
  auto d = degrees();
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

std::size_t Graph::distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const {
  const auto inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, inf);
  std::deque<std::size_t> q;
  for (auto s : a) {
    dist[s] = 0;
    q.push_back(s);
  }
  auto nb = neighbours();
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto v : nb[u])
      if (dist[v] == inf) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
  }
  std::size_t best = inf;
  for (auto t : b) best = std::min(best, dist[t]);
  return best;
}

std::size_t Graph::proper_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const auto& e) { return e.first != e.second; }));
}

}  // namespace ck
