#include "gosta/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "gosta/error.hpp"

namespace gosta {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_size: return "invalid-size";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::invalid_graph: return "invalid-graph";
    case ErrorKind::disconnected_graph: return "disconnected-graph";
    case ErrorKind::empty_edge_set: return "empty-edge-set";
    case ErrorKind::invalid_data: return "invalid-data";
    case ErrorKind::missing_input: return "missing-input";
    case ErrorKind::size_cap_exceeded: return "size-cap-exceeded";
    case ErrorKind::hypothesis_violated: return "hypothesis-violated";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::file_not_found: return "file-not-found";
    case ErrorKind::io_error: return "io-error";
    case ErrorKind::invariant_violated: return "invariant-violated";
  }
  return "unknown";
}

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), neighbors_(n) {
  if (n > 0xffffffffULL) throw Error(ErrorKind::invalid_size, "graph too large");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  edges_.reserve(edges.size());
  for (Edge e : edges) {
    if (e.first >= n || e.second >= n) {
      throw Error(ErrorKind::invalid_graph,
                  "edge (" + std::to_string(e.first + 1) + ", " + std::to_string(e.second + 1) +
                      ") has an endpoint outside [1, " + std::to_string(n) + "]");
    }
    if (e.first == e.second) {
      throw Error(ErrorKind::invalid_graph, "self-loop at vertex " + std::to_string(e.first + 1));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
    if (!seen.insert(edge_key(e.first, e.second)).second) {
      throw Error(ErrorKind::invalid_graph, "duplicate edge (" + std::to_string(e.first + 1) +
                                                ", " + std::to_string(e.second + 1) + ")");
    }
    edges_.push_back(e);
    neighbors_[e.first].push_back(e.second);
    neighbors_[e.second].push_back(e.first);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(n_);
  for (std::size_t v = 0; v < n_; ++v) d[v] = neighbors_[v].size();
  return d;
}

bool Graph::has_edge(std::size_t a, std::size_t b) const {
  if (a >= n_ || b >= n_) return false;
  const auto& nb = neighbors_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

Graph make_complete(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::invalid_size, "complete graph needs n >= 2");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

Graph make_grid2d(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || rows * cols < 2) {
    throw Error(ErrorKind::invalid_size, "grid needs rows*cols >= 2");
  }
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

namespace {

Graph watts_strogatz_once(std::size_t n, std::size_t k, double p, Rng& rng) {
  const std::size_t half = k / 2;
  std::vector<Edge> ring;
  ring.reserve(n * k / 2 + n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 1; s <= half; ++s) ring.push_back({i, (i + s) % n});
  if (k % 2 == 1) {
    for (std::size_t i = 0; i < n; i += 2) ring.push_back({i, (i + half + 1) % n});
  }

  std::vector<std::unordered_set<std::size_t>> nb(n);
  std::vector<Edge> kept;
  kept.reserve(ring.size());
  for (const Edge& e : ring) {
    if (e.first == e.second || nb[e.first].count(e.second)) continue;
    nb[e.first].insert(e.second);
    nb[e.second].insert(e.first);
    kept.push_back(e);
  }

  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (Edge& e : kept) {
    if (!coin(rng)) continue;
    const std::size_t u = e.first;
    if (nb[u].size() >= n - 1) continue;  // u already adjacent to everyone
    std::size_t w = pick(rng);
    while (w == u || nb[u].count(w)) w = pick(rng);
    nb[u].erase(e.second);
    nb[e.second].erase(u);
    nb[u].insert(w);
    nb[w].insert(u);
    e.second = w;
  }
  return Graph(n, std::move(kept));
}

}  // namespace

Graph make_watts_strogatz(std::size_t n, std::size_t k, double p, Rng& rng, int max_attempts) {
  if (k < 2 || n <= k) {
    throw Error(ErrorKind::invalid_parameter, "watts-strogatz requires n > k >= 2");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "watts-strogatz rewiring probability must be in [0, 1]");
  }
  if (k % 2 == 1 && n <= k + 1) {
    throw Error(ErrorKind::invalid_parameter, "odd-k watts-strogatz requires n > k + 1");
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Graph g = watts_strogatz_once(n, k, p, rng);
    if (diagnose(g).connected) return g;
  }
  throw Error(ErrorKind::disconnected_graph,
              "watts-strogatz produced only disconnected graphs after " +
                  std::to_string(max_attempts) + " attempts");
}

GraphDiagnostics diagnose(const Graph& g) {
  const std::size_t n = g.size();
  GraphDiagnostics out;
  out.bipartite = true;
  std::vector<int> color(n, -1);
  std::queue<std::size_t> q;
  for (std::size_t s = 0; s < n; ++s) {
    if (color[s] >= 0) continue;
    ++out.components;
    color[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t w : g.neighbors(v)) {
        if (color[w] < 0) {
          color[w] = 1 - color[v];
          q.push(w);
        } else if (color[w] == color[v]) {
          out.bipartite = false;
        }
      }
    }
  }
  out.connected = out.components == 1;
  return out;
}

Edge sample_edge(const Graph& g, Rng& rng) {
  if (g.edge_count() == 0) throw Error(ErrorKind::empty_edge_set, "cannot sample from an empty edge set");
  std::uniform_int_distribution<std::size_t> pick(0, g.edge_count() - 1);
  return g.edges()[pick(rng)];
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.first);
    const auto b = static_cast<Eigen::Index>(e.second);
    lap(a, a) += 1.0;
    lap(b, b) += 1.0;
    lap(a, b) -= 1.0;
    lap(b, a) -= 1.0;
  }
  return lap;
}

GraphDiagnostics warn_if_bipartite(const Graph& g, const std::string& context) {
  GraphDiagnostics diag = diagnose(g);
  if (diag.bipartite && g.edge_count() > 0) {
    std::cerr << "warning: " << context
              << ": graph is bipartite; convergence guarantees assume a non-bipartite graph\n";
  }
  return diag;
}

void write_graph(std::ostream& os, const Graph& g) {
  os << g.size() << ' ' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) os << e.first + 1 << ' ' << e.second + 1 << '\n';
}

Graph read_graph(std::istream& is) {
  long long n = -1, m = -1;
  if (!(is >> n >> m) || n < 0 || m < 0) {
    throw Error(ErrorKind::parse_error, "graph file: expected header 'n m'");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    long long a = 0, b = 0;
    if (!(is >> a >> b)) {
      throw Error(ErrorKind::parse_error, "graph file: expected " + std::to_string(m) +
                                              " edges, got " + std::to_string(k));
    }
    if (a < 1 || b < 1) throw Error(ErrorKind::invalid_graph, "graph file: endpoints are 1-indexed");
    edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  write_graph(os, g);
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::file_not_found, "graph file not found: " + path.string());
  return read_graph(is);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::size_t parse_count(const std::string& s, const std::string& spec) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::parse_error, "bad integer '" + s + "' in graph spec '" + spec + "'");
  }
  return v;
}

}  // namespace

Graph graph_from_spec(const std::string& spec, std::uint64_t fallback_seed) {
  if (std::filesystem::exists(spec)) return load_graph(spec);
  const auto parts = split(spec, ':');
  if (parts.empty()) throw Error(ErrorKind::parse_error, "empty graph spec");
  const std::string& family = parts[0];
  if (family == "complete" && parts.size() == 2) return make_complete(parse_count(parts[1], spec));
  if (family == "path" && parts.size() == 2) return make_grid2d(1, parse_count(parts[1], spec));
  if (family == "grid" && parts.size() == 2) {
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 2) throw Error(ErrorKind::parse_error, "grid spec must be grid:RxC");
    return make_grid2d(parse_count(dims[0], spec), parse_count(dims[1], spec));
  }
  if (family == "ws" && (parts.size() == 4 || parts.size() == 5)) {
    const std::size_t n = parse_count(parts[1], spec);
    const std::size_t k = parse_count(parts[2], spec);
    double p = 0.0;
    try {
      p = std::stod(parts[3]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse_error, "bad probability in graph spec '" + spec + "'");
    }
    Rng rng(parts.size() == 5 ? parse_count(parts[4], spec) : fallback_seed);
    return make_watts_strogatz(n, k, p, rng);
  }
  if (family.find('/') != std::string::npos || family.find('.') != std::string::npos) {
    throw Error(ErrorKind::file_not_found, "graph file not found: " + spec);
  }
  throw Error(ErrorKind::parse_error,
              "unrecognised graph spec '" + spec + "' (expected a file or complete:N, grid:RxC, path:N, ws:N:K:P[:SEED])");
}

}  // namespace gosta
