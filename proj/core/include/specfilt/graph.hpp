#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace specfilt {

/// Undirected simple graph. Each edge (u, v) with u < v is stored once;
/// self-loops and duplicates are rejected at construction.
struct Graph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // sorted, u < v

  /// Validates node ids, dedups, normalizes orientation. Throws
  /// std::invalid_argument on self-loops or out-of-range ids.
  static Graph make(int n_nodes, std::vector<std::pair<int, int>> raw_edges);

  std::vector<int> degrees() const;
};

/// Plain-text edge list: `#` comments, optional first line `N <count>`,
/// otherwise two whitespace-separated node ids per line.
Graph load_edge_list(const std::string& path);

/// 4-neighbor lattice; node (r, c) has index r*width + c.
Graph build_grid_graph(int height, int width);

/// Immutable CSR matrix, structurally symmetric. Column indices are sorted
/// within each row, so accumulation order in spmv is fixed.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// From triplets (duplicates forbidden). Checks symmetry within 1e-12.
  static SparseMatrix from_triplets(int n, const std::vector<std::tuple<int, int, double>>& entries);

  int n() const { return n_; }
  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  double at(int i, int j) const;  // 0 when structurally absent

  friend std::vector<double> spmv(const SparseMatrix& m, std::span<const double> x);

 private:
  int n_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// P_hat = D^{-1/2} A D^{-1/2}. Isolated nodes are an error unless
/// add_self_loops is set, in which case every node gets a weight-1 self loop
/// before normalization.
SparseMatrix normalized_adjacency(const Graph& g, bool add_self_loops = false);

/// Row-major, index-ascending accumulation; deterministic across runs.
std::vector<double> spmv(const SparseMatrix& m, std::span<const double> x);

/// FNV-1a over the sorted edge list (and node count); identifies a graph in
/// precompute sidecars.
std::uint64_t graph_hash(const Graph& g);

/// I + s * P (s = +1 or -1), used to form L_hat = I - P and 2I - L_hat = I + P.
SparseMatrix identity_plus_scaled(const SparseMatrix& p, double s);

}  // namespace specfilt
