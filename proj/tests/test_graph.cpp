#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "specfilt/errors.hpp"
#include "specfilt/graph.hpp"
#include "specfilt/io.hpp"

using namespace specfilt;

TEST_CASE("graph construction normalizes and validates") {
  const Graph g = Graph::make(4, {{1, 0}, {2, 3}, {0, 1}});
  CHECK(g.edges.size() == 2);
  CHECK(g.edges[0] == std::pair<int, int>{0, 1});
  CHECK(g.edges[1] == std::pair<int, int>{2, 3});

  CHECK_THROWS_AS(Graph::make(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::make(3, {{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::make(3, {{-1, 0}}), std::invalid_argument);
}

TEST_CASE("edge list parsing") {
  const std::string path = (std::filesystem::temp_directory_path() / "sf_edges.txt").string();
  write_text_file(path, "# comment\nN 4\n0 1\n1 2\n\n2 3\n");
  const Graph g = load_edge_list(path);
  CHECK(g.n_nodes == 4);
  CHECK(g.edges.size() == 3);

  write_text_file(path, "0 1\nbogus line\n");
  CHECK_THROWS_WITH_AS(load_edge_list(path), doctest::Contains(":2:"), DataError);
}

TEST_CASE("grid graph layout") {
  const Graph g = build_grid_graph(2, 3);
  CHECK(g.n_nodes == 6);
  CHECK(g.edges.size() == 7);  // 2*2 horizontal + 3 vertical
  const auto deg = g.degrees();
  CHECK(deg[0] == 2);  // corner
  CHECK(deg[1] == 3);  // edge midpoint
}

TEST_CASE("normalized adjacency spectrum bounds and symmetry") {
  Rng rng(11);
  const Graph g = testutil::random_connected_graph(12, rng);
  const SparseMatrix p = normalized_adjacency(g);
  for (int i = 0; i < p.n(); ++i)
    for (int j = 0; j < p.n(); ++j) CHECK(p.at(i, j) == doctest::Approx(p.at(j, i)).epsilon(1e-14));

  // row sums of D^{-1/2} A D^{-1/2} scaled back give the original degrees
  const auto deg = g.degrees();
  for (int i = 0; i < p.n(); ++i) {
    double s = 0;
    for (int j = 0; j < p.n(); ++j) s += p.at(i, j) * std::sqrt(static_cast<double>(deg[j]));
    CHECK(s == doctest::Approx(std::sqrt(static_cast<double>(deg[i]))).epsilon(1e-12));
  }
}

TEST_CASE("isolated nodes rejected unless self loops requested") {
  const Graph g = Graph::make(3, {{0, 1}});
  CHECK_THROWS_AS(normalized_adjacency(g), std::invalid_argument);
  const SparseMatrix p = normalized_adjacency(g, true);
  CHECK(p.at(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("spmv matches dense multiply") {
  Rng rng(5);
  const Graph g = testutil::random_connected_graph(9, rng);
  const SparseMatrix p = normalized_adjacency(g);
  const auto x = testutil::random_signal(9, rng);
  const auto y = spmv(p, x);
  const auto yd = matvec(testutil::to_dense(p), x);
  for (int i = 0; i < 9; ++i) CHECK(y[i] == doctest::Approx(yd[i]).epsilon(1e-13));
}

TEST_CASE("graph hash is order independent and edge sensitive") {
  const Graph a = Graph::make(4, {{0, 1}, {2, 3}});
  const Graph b = Graph::make(4, {{2, 3}, {0, 1}});
  const Graph c = Graph::make(4, {{0, 1}, {1, 3}});
  CHECK(graph_hash(a) == graph_hash(b));
  CHECK(graph_hash(a) != graph_hash(c));
}

TEST_CASE("identity plus scaled builds the laplacian") {
  Rng rng(3);
  const Graph g = testutil::random_connected_graph(7, rng);
  const SparseMatrix p = normalized_adjacency(g);
  const SparseMatrix lap = identity_plus_scaled(p, -1.0);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const double expect = (i == j ? 1.0 : 0.0) - p.at(i, j);
      CHECK(lap.at(i, j) == doctest::Approx(expect).epsilon(1e-14));
    }
}
