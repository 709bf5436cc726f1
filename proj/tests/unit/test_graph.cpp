#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gosta/error.hpp"
#include "gosta/graph.hpp"
#include "oracles.hpp"

using namespace gosta;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected gosta::Error");
  return ErrorKind::io_error;
}

}  // namespace

TEST_CASE("complete graph has n(n-1)/2 edges and degree n-1") {
  const Graph g = make_complete(7);
  CHECK(g.edge_count() == 21);
  for (std::size_t v = 0; v < 7; ++v) CHECK(g.degree(v) == 6);
  CHECK(diagnose(g).connected);
  CHECK_FALSE(diagnose(g).bipartite);
  CHECK(kind_of([] { make_complete(1); }) == ErrorKind::invalid_size);
}

TEST_CASE("grid and path graphs") {
  const Graph grid = make_grid2d(3, 4);
  CHECK(grid.size() == 12);
  CHECK(grid.edge_count() == 3 * 3 + 4 * 2);
  CHECK(diagnose(grid).bipartite);
  const Graph path = graph_from_spec("path:5");
  CHECK(path.edge_count() == 4);
  CHECK(path.degree(0) == 1);
  CHECK(path.degree(2) == 2);
}

TEST_CASE("graph constructor rejects bad edges") {
  CHECK(kind_of([] { Graph(3, {{0, 3}}); }) == ErrorKind::invalid_graph);
  CHECK(kind_of([] { Graph(3, {{1, 1}}); }) == ErrorKind::invalid_graph);
  CHECK(kind_of([] { Graph(3, {{0, 1}, {1, 0}}); }) == ErrorKind::invalid_graph);
  const Graph g(3, {{2, 0}});
  CHECK(g.edges().front() == Edge{0, 2});
  CHECK(g.has_edge(2, 0));
}

TEST_CASE("diagnostics agree with a BFS oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    std::bernoulli_distribution coin(0.2);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = i + 1; j < 10; ++j)
        if (coin(rng)) edges.push_back({i, j});
    const Graph g(10, edges);
    const GraphDiagnostics d = diagnose(g);
    CHECK(d.components == oracle::bfs_components(g));
    CHECK(d.connected == (oracle::bfs_components(g) == 1));
  }
  CHECK(diagnose(Graph(4, {{0, 1}, {2, 3}})).components == 2);
  CHECK(diagnose(Graph(3, {{0, 1}, {1, 2}, {0, 2}})).bipartite == false);
}

TEST_CASE("watts-strogatz without rewiring is the ring lattice") {
  Rng rng(3);
  const Graph even = make_watts_strogatz(10, 4, 0.0, rng);
  CHECK(even.edge_count() == 20);
  for (std::size_t v = 0; v < 10; ++v) {
    CHECK(even.degree(v) == 4);
    CHECK(even.has_edge(v, (v + 1) % 10));
    CHECK(even.has_edge(v, (v + 2) % 10));
  }
  const Graph odd = make_watts_strogatz(10, 5, 0.0, rng);
  // floor(5/2) = 2 per side plus one chord from every even vertex: average degree 5.
  CHECK(odd.edge_count() == 25);
  CHECK(odd.has_edge(0, 3));
  CHECK(odd.has_edge(2, 5));
}

TEST_CASE("watts-strogatz rewiring keeps the edge count and stays simple") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const Graph g = make_watts_strogatz(100, 5, 0.3, rng);
    CHECK(g.edge_count() == 250);
    CHECK(diagnose(g).connected);
  }
  Rng a(42), b(42);
  CHECK(make_watts_strogatz(50, 4, 0.5, a).edges() == make_watts_strogatz(50, 4, 0.5, b).edges());
}

TEST_CASE("watts-strogatz parameter errors") {
  Rng rng(1);
  CHECK(kind_of([&] { make_watts_strogatz(5, 1, 0.1, rng); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { make_watts_strogatz(4, 4, 0.1, rng); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { make_watts_strogatz(10, 4, 1.5, rng); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { make_watts_strogatz(4, 3, 0.1, rng); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("edge sampling is uniform") {
  const Graph g = oracle::bowtie6();
  Rng rng(9);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const Edge e = sample_edge(g, rng);
    ++counts[{e.first, e.second}];
  }
  CHECK(counts.size() == g.edge_count());
  const double expected = static_cast<double>(draws) / static_cast<double>(g.edge_count());
  for (const auto& [edge, c] : counts) CHECK(std::abs(c - expected) < 5.0 * std::sqrt(expected));
  CHECK(kind_of([] {
          Rng r(1);
          sample_edge(Graph(3, {}), r);
        }) == ErrorKind::empty_edge_set);
}

TEST_CASE("laplacian is D - A") {
  const Graph g = oracle::bowtie6();
  const Eigen::MatrixXd l = laplacian(g);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == doctest::Approx(g.degree(i)));
    for (std::size_t j = 0; j < 6; ++j) {
      if (i != j) CHECK(l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == (g.has_edge(i, j) ? -1.0 : 0.0));
    }
  }
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph text format round-trips and reports errors") {
  const Graph g = graph_from_spec("ws:20:4:0.2:5");
  std::stringstream ss;
  write_graph(ss, g);
  const Graph back = read_graph(ss);
  CHECK(back.size() == g.size());
  CHECK(back.edges() == g.edges());

  std::stringstream bad("3 2\n1 2\n");
  CHECK(kind_of([&] { read_graph(bad); }) == ErrorKind::parse_error);
  std::stringstream garbage("x y\n");
  CHECK(kind_of([&] { read_graph(garbage); }) == ErrorKind::parse_error);

  const auto path = std::filesystem::temp_directory_path() / "gosta_graph_roundtrip.txt";
  save_graph(path, g);
  CHECK(load_graph(path).edges() == g.edges());
  CHECK(graph_from_spec(path.string()).edge_count() == g.edge_count());
  std::filesystem::remove(path);
  CHECK(kind_of([] { load_graph("/nonexistent/graph.txt"); }) == ErrorKind::file_not_found);
}

TEST_CASE("graph specs") {
  CHECK(graph_from_spec("complete:5").edge_count() == 10);
  CHECK(graph_from_spec("grid:2x3").size() == 6);
  CHECK(graph_from_spec("ws:30:4:0.1:7").edges() == graph_from_spec("ws:30:4:0.1:7").edges());
  CHECK(kind_of([] { graph_from_spec("hypercube:3"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { graph_from_spec("grid:3"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { graph_from_spec("missing/graph.txt"); }) == ErrorKind::file_not_found);
}
