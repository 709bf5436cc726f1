#include "gosta/engines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "gosta/error.hpp"

namespace gosta {

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::boyd: return "boyd";
    case Protocol::u1: return "u1";
    case Protocol::u2: return "u2";
    case Protocol::gosta_sync: return "gosta_sync";
    case Protocol::gosta_async: return "gosta_async";
    case Protocol::flooding: return "flooding";
    case Protocol::master_node: return "master_node";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::boyd, Protocol::u1, Protocol::u2, Protocol::gosta_sync, Protocol::gosta_async,
                     Protocol::flooding, Protocol::master_node}) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorKind::invalid_parameter,
              "unknown protocol '" + std::string(name) +
                  "' (expected boyd, u1, u2, gosta_sync, gosta_async, flooding, master_node)");
}

bool swaps_observations(Protocol p) noexcept {
  return p == Protocol::u1 || p == Protocol::u2 || p == Protocol::gosta_sync || p == Protocol::gosta_async;
}

std::vector<std::uint64_t> resolve_checkpoints(const EngineConfig& cfg) {
  if (cfg.max_iters == 0) throw Error(ErrorKind::invalid_parameter, "max_iters must be positive");
  if (!cfg.checkpoints.empty()) {
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      if (cfg.checkpoints[i] > cfg.max_iters) {
        throw Error(ErrorKind::invalid_parameter, "checkpoint " + std::to_string(cfg.checkpoints[i]) +
                                                      " exceeds max_iters " + std::to_string(cfg.max_iters));
      }
      if (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1]) {
        throw Error(ErrorKind::invalid_parameter, "checkpoints must be strictly increasing");
      }
    }
    return cfg.checkpoints;
  }
  if (cfg.record_every == 0 || cfg.record_every > cfg.max_iters) {
    throw Error(ErrorKind::invalid_parameter, "record_every must be in [1, max_iters]");
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = cfg.record_every; t <= cfg.max_iters; t += cfg.record_every) out.push_back(t);
  if (out.back() != cfg.max_iters) out.push_back(cfg.max_iters);
  return out;
}

namespace {

void require_connected(const Graph& g, std::string_view who) {
  if (g.edge_count() == 0) throw Error(ErrorKind::empty_edge_set, std::string(who) + ": graph has no edges");
  if (!diagnose(g).connected) {
    throw Error(ErrorKind::disconnected_graph,
                std::string(who) + ": graph is disconnected, estimates cannot reach the global target");
  }
}

void require_kernel_size(const Graph& g, const KernelMatrix& h) {
  if (h.size() != g.size()) {
    throw Error(ErrorKind::invalid_size, "kernel has " + std::to_string(h.size()) + " rows, graph has " +
                                             std::to_string(g.size()) + " nodes");
  }
}

std::vector<std::size_t> identity_permutation(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

bool is_permutation_of_range(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != i) return false;
  }
  return true;
}

Eigen::VectorXd constant_truth(const KernelMatrix& h) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(h.size()), h.u_stat());
}

class BoydEngine final : public Engine {
 public:
  BoydEngine(const Graph& g, const Eigen::VectorXd& x)
      : Engine(Protocol::boyd, Eigen::VectorXd::Constant(x.size(), x.mean())), g_(g) {
    state_.z = x;
  }

  void step(Rng& rng) override {
    const Edge e = sample_edge(g_, rng);
    const auto i = static_cast<Eigen::Index>(e.first), j = static_cast<Eigen::Index>(e.second);
    const double avg = 0.5 * (state_.z(i) + state_.z(j));
    state_.z(i) = avg;
    state_.z(j) = avg;
    state_.comm_units += 2.0;
    ++state_.t;
  }

 private:
  const Graph& g_;
};

class U1Engine final : public Engine {
 public:
  U1Engine(const Graph& g, const KernelMatrix& h, std::size_t d)
      : Engine(Protocol::u1, h.row_means()), g_(g), h_(h), d_(static_cast<double>(d)) {
    state_.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    state_.y1 = identity_permutation(g.size());
  }

  void step(Rng& rng) override {
    const Edge e = sample_edge(g_, rng);
    std::swap(state_.y1[e.first], state_.y1[e.second]);
    const double t = static_cast<double>(++state_.t);
    for (std::size_t p = 0; p < g_.size(); ++p) {
      double& z = state_.z(static_cast<Eigen::Index>(p));
      z = ((t - 1.0) / t) * z + h_(p, state_.y1[p]) / t;
    }
    state_.comm_units += 2.0 * d_;
  }

 private:
  const Graph& g_;
  const KernelMatrix& h_;
  double d_;
};

class U2Engine final : public Engine {
 public:
  U2Engine(const Graph& g, const KernelMatrix& h, std::size_t d)
      : Engine(Protocol::u2, constant_truth(h)), g_(g), h_(h), d_(static_cast<double>(d)) {
    state_.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    state_.y1 = identity_permutation(g.size());
    state_.y2 = identity_permutation(g.size());
  }

  void step(Rng& rng) override {
    const double t = static_cast<double>(++state_.t);
    for (std::size_t p = 0; p < g_.size(); ++p) {
      double& z = state_.z(static_cast<Eigen::Index>(p));
      z = ((t - 1.0) / t) * z + h_(state_.y1[p], state_.y2[p]) / t;
    }
    const Edge first = sample_edge(g_, rng);
    std::swap(state_.y1[first.first], state_.y1[first.second]);
    const Edge second = sample_edge(g_, rng);
    std::swap(state_.y2[second.first], state_.y2[second.second]);
    state_.comm_units += 4.0 * d_;
  }

 private:
  const Graph& g_;
  const KernelMatrix& h_;
  double d_;
};

class GostaSyncEngine final : public Engine {
 public:
  GostaSyncEngine(const Graph& g, const KernelMatrix& h, std::size_t d)
      : Engine(Protocol::gosta_sync, constant_truth(h)), g_(g), h_(h), d_(static_cast<double>(d)) {
    state_.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    state_.y1 = identity_permutation(g.size());
  }

  void step(Rng& rng) override {
    const double t = static_cast<double>(++state_.t);
    for (std::size_t p = 0; p < g_.size(); ++p) {
      double& z = state_.z(static_cast<Eigen::Index>(p));
      z = ((t - 1.0) / t) * z + h_(p, state_.y1[p]) / t;
    }
    const Edge e = sample_edge(g_, rng);
    const auto i = static_cast<Eigen::Index>(e.first), j = static_cast<Eigen::Index>(e.second);
    const double avg = 0.5 * (state_.z(i) + state_.z(j));
    state_.z(i) = avg;
    state_.z(j) = avg;
    std::swap(state_.y1[e.first], state_.y1[e.second]);
    state_.comm_units += 2.0 + 2.0 * d_;
  }

 private:
  const Graph& g_;
  const KernelMatrix& h_;
  double d_;
};

class GostaAsyncEngine final : public Engine {
 public:
  GostaAsyncEngine(const Graph& g, const KernelMatrix& h, std::size_t d, AsyncClock clock)
      : Engine(Protocol::gosta_async, constant_truth(h)), g_(g), h_(h), d_(static_cast<double>(d)), clock_(clock) {
    const auto n = static_cast<Eigen::Index>(g.size());
    state_.z = Eigen::VectorXd::Zero(n);
    state_.m = Eigen::VectorXd::Zero(n);
    state_.y1 = identity_permutation(g.size());
    p_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      p_(k) = static_cast<double>(g.degree(static_cast<std::size_t>(k))) / static_cast<double>(g.edge_count());
    }
  }

  void step(Rng& rng) override {
    const double t = static_cast<double>(++state_.t);
    const Edge e = sample_edge(g_, rng);
    const auto i = static_cast<Eigen::Index>(e.first), j = static_cast<Eigen::Index>(e.second);
    state_.m(i) += 1.0 / p_(i);
    state_.m(j) += 1.0 / p_(j);
    const double avg = 0.5 * (state_.z(i) + state_.z(j));
    state_.z(i) = avg;
    state_.z(j) = avg;
    update(i, t);
    update(j, t);
    std::swap(state_.y1[e.first], state_.y1[e.second]);
    state_.comm_units += 2.0 + 2.0 * d_;
  }

 private:
  void update(Eigen::Index k, double t) {
    double clock = t;
    if (clock_ == AsyncClock::per_node) {
      clock = state_.m(k);
      if (p_(k) * clock < 1.0 - 1e-9) {
        throw Error(ErrorKind::invariant_violated,
                    "async counter below one activation at node " + std::to_string(k + 1));
      }
    }
    const double w = 1.0 / (p_(k) * clock);
    const auto ku = static_cast<std::size_t>(k);
    state_.z(k) = (1.0 - w) * state_.z(k) + w * h_(ku, state_.y1[ku]);
  }

  const Graph& g_;
  const KernelMatrix& h_;
  double d_;
  AsyncClock clock_;
  Eigen::VectorXd p_;
};

// Per-node held index sets with the running pair sum sum_{a,b in S} H_ab.
// The estimate is that sum over |S|^2, the U-statistic of the held sample.
class Holdings {
 public:
  Holdings(const KernelMatrix& h, ProtocolState& state) : h_(h), state_(state) {
    const std::size_t n = h.size();
    member_.assign(n * n, 0);
    pair_sum_.assign(n, 0.0);
    state_.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    state_.holdings.assign(n, {});
    for (std::size_t k = 0; k < n; ++k) {
      state_.holdings[k].push_back(k);
      member_[k * n + k] = 1;
    }
  }

  // Returns true when `index` was new to `node`.
  bool receive(std::size_t node, std::size_t index) {
    const std::size_t n = h_.size();
    if (member_[node * n + index]) return false;
    double cross = 0.0;
    for (std::size_t a : state_.holdings[node]) cross += h_(a, index);
    pair_sum_[node] += 2.0 * cross + h_(index, index);
    state_.holdings[node].push_back(index);
    member_[node * n + index] = 1;
    const double size = static_cast<double>(state_.holdings[node].size());
    state_.z(static_cast<Eigen::Index>(node)) = pair_sum_[node] / (size * size);
    return true;
  }

 private:
  const KernelMatrix& h_;
  ProtocolState& state_;
  std::vector<char> member_;
  std::vector<double> pair_sum_;
};

class FloodingEngine final : public Engine {
 public:
  FloodingEngine(const Graph& g, const KernelMatrix& h, std::size_t d)
      : Engine(Protocol::flooding, constant_truth(h)), g_(g), d_(static_cast<double>(d)),
        holdings_(h, state_) {}

  void step(Rng& rng) override {
    ++state_.t;
    const Edge e = sample_edge(g_, rng);
    const std::size_t from_i = pick(e.first, rng);
    const std::size_t from_j = pick(e.second, rng);
    holdings_.receive(e.second, from_i);
    holdings_.receive(e.first, from_j);
    state_.comm_units += 2.0 * d_;
  }

 private:
  std::size_t pick(std::size_t node, Rng& rng) {
    const auto& held = state_.holdings[node];
    std::uniform_int_distribution<std::size_t> dist(0, held.size() - 1);
    return held[dist(rng)];
  }

  const Graph& g_;
  double d_;
  Holdings holdings_;
};

class MasterNodeEngine final : public Engine {
 public:
  MasterNodeEngine(const KernelMatrix& h, std::size_t d)
      : Engine(Protocol::master_node, constant_truth(h)), n_(h.size()), d_(static_cast<double>(d)),
        holdings_(h, state_) {
    state_.comm_units = static_cast<double>(n_) * d_;
  }

  void step(Rng&) override {
    ++state_.t;
    if (state_.t > n_) return;
    const std::size_t broadcast = state_.t - 1;
    for (std::size_t k = 0; k < n_; ++k) holdings_.receive(k, broadcast);
    state_.comm_units += static_cast<double>(n_) * d_;
  }

 private:
  std::size_t n_;
  double d_;
  Holdings holdings_;
};

Checkpoint snapshot(const Engine& engine, const EngineConfig& cfg) {
  const ProtocolState& s = engine.state();
  Checkpoint c;
  c.t = s.t;
  c.z = s.z;
  c.comm_units = s.comm_units;
  if (cfg.record_aux) {
    c.y1 = s.y1;
    c.y2 = s.y2;
    c.m = s.m;
  }
  if (cfg.check_invariants) {
    if (!s.y1.empty() && !is_permutation_of_range(s.y1)) {
      throw Error(ErrorKind::invariant_violated, "auxiliary indices are no longer a permutation at t = " +
                                                     std::to_string(s.t));
    }
    if (!s.y2.empty() && !is_permutation_of_range(s.y2)) {
      throw Error(ErrorKind::invariant_violated, "second auxiliary indices are no longer a permutation at t = " +
                                                     std::to_string(s.t));
    }
  }
  return c;
}

}  // namespace

std::unique_ptr<Engine> make_boyd_engine(const Graph& g, const Eigen::VectorXd& x) {
  require_connected(g, "boyd");
  if (static_cast<std::size_t>(x.size()) != g.size()) {
    throw Error(ErrorKind::invalid_size, "boyd: x has " + std::to_string(x.size()) + " entries, graph has " +
                                             std::to_string(g.size()) + " nodes");
  }
  return std::make_unique<BoydEngine>(g, x);
}

std::unique_ptr<Engine> make_engine(Protocol p, const Graph& g, const KernelMatrix& h, std::size_t obs_dim,
                                    AsyncClock clock) {
  if (obs_dim == 0) throw Error(ErrorKind::invalid_parameter, "observation dimension must be positive");
  if (p == Protocol::master_node) {
    if (h.size() < 2) throw Error(ErrorKind::invalid_size, "master_node needs at least 2 observations");
    return std::make_unique<MasterNodeEngine>(h, obs_dim);
  }
  require_connected(g, to_string(p));
  require_kernel_size(g, h);
  switch (p) {
    case Protocol::u1: return std::make_unique<U1Engine>(g, h, obs_dim);
    case Protocol::u2: return std::make_unique<U2Engine>(g, h, obs_dim);
    case Protocol::gosta_sync: return std::make_unique<GostaSyncEngine>(g, h, obs_dim);
    case Protocol::gosta_async: return std::make_unique<GostaAsyncEngine>(g, h, obs_dim, clock);
    case Protocol::flooding: return std::make_unique<FloodingEngine>(g, h, obs_dim);
    default: break;
  }
  throw Error(ErrorKind::invalid_parameter, "boyd averages a data vector; use make_boyd_engine");
}

Trace run_engine(Engine& engine, const EngineConfig& cfg) {
  const std::vector<std::uint64_t> when = resolve_checkpoints(cfg);
  Trace trace;
  trace.protocol = engine.protocol();
  trace.truth = engine.truth();
  trace.checkpoints.reserve(when.size());
  Rng rng(cfg.seed);
  auto next = when.begin();
  if (next != when.end() && *next == 0) {
    trace.checkpoints.push_back(snapshot(engine, cfg));
    ++next;
  }
  for (std::uint64_t t = 1; t <= cfg.max_iters && next != when.end(); ++t) {
    engine.step(rng);
    if (t == *next) {
      trace.checkpoints.push_back(snapshot(engine, cfg));
      ++next;
    }
  }
  return trace;
}

namespace {

Trace run_kernel_protocol(Protocol p, const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  auto engine = make_engine(p, g, h, cfg.obs_dim, cfg.clock);
  warn_if_bipartite(g, std::string(to_string(p)));
  return run_engine(*engine, cfg);
}

}  // namespace

Trace run_boyd(const Graph& g, const Eigen::VectorXd& x, const EngineConfig& cfg) {
  auto engine = make_boyd_engine(g, x);
  warn_if_bipartite(g, "boyd");
  return run_engine(*engine, cfg);
}

Trace run_u1(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  return run_kernel_protocol(Protocol::u1, g, h, cfg);
}

Trace run_u2(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  return run_kernel_protocol(Protocol::u2, g, h, cfg);
}

Trace run_gosta_sync(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  return run_kernel_protocol(Protocol::gosta_sync, g, h, cfg);
}

Trace run_gosta_async(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  return run_kernel_protocol(Protocol::gosta_async, g, h, cfg);
}

Trace run_flooding(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg) {
  return run_kernel_protocol(Protocol::flooding, g, h, cfg);
}

Trace run_master_node(const KernelMatrix& h, std::size_t n, std::size_t d, const EngineConfig& cfg) {
  if (n != h.size()) {
    throw Error(ErrorKind::invalid_size, "master_node: kernel has " + std::to_string(h.size()) + " rows, n = " +
                                             std::to_string(n));
  }
  auto engine = make_engine(Protocol::master_node, Graph{}, h, d);
  return run_engine(*engine, cfg);
}

std::vector<Trace> run_replicates(const Problem& problem, const EngineConfig& cfg, std::size_t runs,
                                  unsigned threads) {
  if (runs == 0) throw Error(ErrorKind::invalid_parameter, "runs must be at least 1");
  if (cfg.protocol == Protocol::boyd ? problem.x == nullptr : problem.kernel == nullptr) {
    throw Error(ErrorKind::missing_input, std::string(to_string(cfg.protocol)) + ": missing input data");
  }
  if (cfg.protocol != Protocol::master_node && problem.graph == nullptr) {
    throw Error(ErrorKind::missing_input, std::string(to_string(cfg.protocol)) + ": missing graph");
  }
  resolve_checkpoints(cfg);
  // Validate once up front so errors surface before threads start.
  const Graph empty;
  const Graph& g = problem.graph ? *problem.graph : empty;
  auto make = [&]() {
    return cfg.protocol == Protocol::boyd ? make_boyd_engine(g, *problem.x)
                                          : make_engine(cfg.protocol, g, *problem.kernel, cfg.obs_dim, cfg.clock);
  };
  make();
  if (problem.graph) warn_if_bipartite(g, std::string(to_string(cfg.protocol)));

  std::vector<Trace> out(runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        EngineConfig local = cfg;
        local.seed = derive_seed(cfg.seed, r);
        auto engine = make();
        out[r] = run_engine(*engine, local);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = runs;
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ErrorSeries relative_error(const Trace& trace) {
  ErrorSeries s;
  const Eigen::VectorXd& truth = trace.truth;
  s.absolute = (truth.array() == 0.0).any();
  for (const Checkpoint& c : trace.checkpoints) {
    if (c.z.size() != truth.size()) throw Error(ErrorKind::invalid_size, "snapshot and target sizes differ");
    Eigen::ArrayXd err = (c.z - truth).array().abs();
    if (!s.absolute) err /= truth.array().abs();
    const double mean = err.mean();
    s.t.push_back(c.t);
    s.mean.push_back(mean);
    s.std.push_back(std::sqrt((err - mean).square().mean()));
  }
  return s;
}

}  // namespace gosta
