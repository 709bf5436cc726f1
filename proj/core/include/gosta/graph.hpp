#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gosta/rng.hpp"

namespace gosta {

/// Undirected edge between two 0-indexed vertices, stored with first < second.
struct Edge {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph. Vertices are 0-indexed internally;
/// every human-facing format (files, CSV, JSON) is 1-indexed.
class Graph {
 public:
  Graph() = default;

  /// Validates endpoints, rejects self-loops and duplicate edges.
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t degree(std::size_t v) const { return neighbors_.at(v).size(); }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return neighbors_.at(v); }
  std::vector<std::size_t> degrees() const;
  bool has_edge(std::size_t a, std::size_t b) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

struct GraphDiagnostics {
  bool connected = false;
  bool bipartite = false;
  std::size_t components = 0;
};

Graph make_complete(std::size_t n);
Graph make_grid2d(std::size_t rows, std::size_t cols);

/// Watts-Strogatz small world graph. Odd `k` builds floor(k/2) neighbours per
/// side and adds one extra ring edge at distance ceil(k/2) from every
/// even-indexed vertex, so the average degree is k. Disconnected draws are
/// regenerated up to `max_attempts` times.
Graph make_watts_strogatz(std::size_t n, std::size_t k, double p, Rng& rng,
                          int max_attempts = 100);

GraphDiagnostics diagnose(const Graph& g);

/// Uniform draw over E.
Edge sample_edge(const Graph& g, Rng& rng);

/// Dense L = D - A.
Eigen::MatrixXd laplacian(const Graph& g);

/// Logs a warning to stderr when `g` is bipartite; returns the diagnostics.
GraphDiagnostics warn_if_bipartite(const Graph& g, const std::string& context);

// Text format: first line "n m", then m lines "i j" (1-indexed).
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);
void save_graph(const std::filesystem::path& path, const Graph& g);
Graph load_graph(const std::filesystem::path& path);

/// Builds a graph from either an existing file path or a family spec:
///   complete:N, grid:RxC, path:N, ws:N:K:P[:SEED]
/// `fallback_seed` seeds Watts-Strogatz specs that omit a seed.
Graph graph_from_spec(const std::string& spec, std::uint64_t fallback_seed = 1);

}  // namespace gosta
