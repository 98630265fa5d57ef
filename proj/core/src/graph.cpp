#include "specfilt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "specfilt/errors.hpp"

namespace specfilt {

Graph Graph::make(int n_nodes, std::vector<std::pair<int, int>> raw_edges) {
  if (n_nodes <= 0) throw std::invalid_argument("graph must have at least one node");
  std::set<std::pair<int, int>> dedup;
  for (auto [u, v] : raw_edges) {
    if (u == v) throw std::invalid_argument("self-loop rejected: node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") out of range for n=" + std::to_string(n_nodes));
    dedup.insert({std::min(u, v), std::max(u, v)});
  }
  Graph g;
  g.n_nodes = n_nodes;
  g.edges.assign(dedup.begin(), dedup.end());
  return g;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d(n_nodes, 0);
  for (auto [u, v] : edges) {
    ++d[u];
    ++d[v];
  }
  return d;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);
  std::vector<std::pair<int, int>> edges;
  int n_override = -1;
  int max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (lineno == 1 || (n_override < 0 && edges.empty())) {
      // optional header "N <count>"
      std::string tok;
      ls >> tok;
      if (tok == "N") {
        if (!(ls >> n_override) || n_override <= 0)
          throw DataError(path + ":" + std::to_string(lineno) + ": bad N header");
        continue;
      }
      ls.clear();
      ls.seekg(0);
    }
    int u, v;
    if (!(ls >> u >> v))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected two integer node ids");
    std::string rest;
    if (ls >> rest)
      throw DataError(path + ":" + std::to_string(lineno) + ": trailing token '" + rest + "'");
    if (u == v)
      throw DataError(path + ":" + std::to_string(lineno) + ": self-loop rejected");
    if (u < 0 || v < 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": negative node id");
    edges.push_back({u, v});
    max_id = std::max({max_id, u, v});
  }
  if (edges.empty()) throw DataError(path + ": empty edge set");
  const int n = n_override > 0 ? n_override : max_id + 1;
  if (max_id >= n) throw DataError(path + ": node id exceeds declared N");
  return Graph::make(n, std::move(edges));
}

Graph build_grid_graph(int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be positive");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(2 * height * width));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int id = r * width + c;
      if (c + 1 < width) edges.push_back({id, id + 1});
      if (r + 1 < height) edges.push_back({id, id + width});
    }
  return Graph::make(height * width, std::move(edges));
}

SparseMatrix SparseMatrix::from_triplets(int n,
                                         const std::vector<std::tuple<int, int, double>>& entries) {
  SparseMatrix m;
  m.n_ = n;
  std::vector<std::tuple<int, int, double>> sorted = entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  m.row_offsets_.assign(n + 1, 0);
  for (const auto& [i, j, v] : sorted) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("triplet index out of range");
    ++m.row_offsets_[i + 1];
  }
  for (int i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
  m.col_indices_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  int last_i = -1, last_j = -1;
  for (const auto& [i, j, v] : sorted) {
    if (i == last_i && j == last_j) throw std::invalid_argument("duplicate triplet");
    last_i = i;
    last_j = j;
    m.col_indices_.push_back(j);
    m.values_.push_back(v);
  }
  // symmetry check
  for (int i = 0; i < n; ++i)
    for (int k = m.row_offsets_[i]; k < m.row_offsets_[i + 1]; ++k) {
      const int j = m.col_indices_[k];
      const double vt = m.at(j, i);
      if (std::abs(vt - m.values_[k]) > 1e-12)
        throw std::invalid_argument("matrix not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
  return m;
}

double SparseMatrix::at(int i, int j) const {
  for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
    if (col_indices_[k] == j) return values_[k];
  return 0.0;
}

SparseMatrix normalized_adjacency(const Graph& g, bool add_self_loops) {
  auto deg = g.degrees();
  std::vector<std::tuple<int, int, double>> trips;
  std::vector<double> inv_sqrt(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    int d = deg[i] + (add_self_loops ? 1 : 0);
    if (d == 0)
      throw std::invalid_argument("isolated node " + std::to_string(i) +
                                  " (pass add_self_loops to allow)");
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  for (auto [u, v] : g.edges) {
    const double w = inv_sqrt[u] * inv_sqrt[v];
    trips.push_back({u, v, w});
    trips.push_back({v, u, w});
  }
  if (add_self_loops)
    for (int i = 0; i < g.n_nodes; ++i) trips.push_back({i, i, inv_sqrt[i] * inv_sqrt[i]});
  return SparseMatrix::from_triplets(g.n_nodes, trips);
}

std::vector<double> spmv(const SparseMatrix& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.n_)
    throw std::invalid_argument("spmv dimension mismatch: " + std::to_string(x.size()) + " vs " +
                                std::to_string(m.n_));
  std::vector<double> y(m.n_, 0.0);
  for (int i = 0; i < m.n_; ++i) {
    double acc = 0.0;
    for (int k = m.row_offsets_[i]; k < m.row_offsets_[i + 1]; ++k)
      acc += m.values_[k] * x[m.col_indices_[k]];
    y[i] = acc;
  }
  return y;
}

std::uint64_t graph_hash(const Graph& g) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(g.n_nodes));
  for (auto [u, v] : g.edges) {
    mix(static_cast<std::uint64_t>(u));
    mix(static_cast<std::uint64_t>(v));
  }
  return h;
}

SparseMatrix identity_plus_scaled(const SparseMatrix& p, double s) {
  std::vector<std::tuple<int, int, double>> trips;
  const auto ro = p.row_offsets();
  const auto ci = p.col_indices();
  const auto va = p.values();
  for (int i = 0; i < p.n(); ++i) {
    bool has_diag = false;
    for (int k = ro[i]; k < ro[i + 1]; ++k) {
      double v = s * va[k];
      if (ci[k] == i) {
        v += 1.0;
        has_diag = true;
      }
      trips.push_back({i, ci[k], v});
    }
    if (!has_diag) trips.push_back({i, i, 1.0});
  }
  return SparseMatrix::from_triplets(p.n(), trips);
}

}  // namespace specfilt
