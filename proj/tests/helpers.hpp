#pragma once

#include <set>
#include <utility>
#include <vector>

#include "specfilt/dense.hpp"
#include "specfilt/eig.hpp"
#include "specfilt/graph.hpp"
#include "specfilt/rng.hpp"

namespace testutil {

/// Random spanning tree plus ~n/2 extra edges; always connected.
inline specfilt::Graph random_connected_graph(int n, specfilt::Rng& rng) {
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.insert({rng.uniform_int(0, v - 1), v});
  for (int t = 0; t < n / 2; ++t) {
    int u = rng.uniform_int(0, n - 1);
    int v = rng.uniform_int(0, n - 1);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    edges.insert({u, v});
  }
  return specfilt::Graph::make(n, {edges.begin(), edges.end()});
}

inline specfilt::DenseMatrix to_dense(const specfilt::SparseMatrix& p) {
  specfilt::DenseMatrix d(p.n(), p.n());
  for (int i = 0; i < p.n(); ++i)
    for (int j = 0; j < p.n(); ++j) d(i, j) = p.at(i, j);
  return d;
}

inline std::vector<double> random_signal(int n, specfilt::Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

}  // namespace testutil
