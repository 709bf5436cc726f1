#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gosta/graph.hpp"
#include "gosta/kernels.hpp"
#include "gosta/rng.hpp"

namespace gosta {

enum class Protocol { boyd, u1, u2, gosta_sync, gosta_async, flooding, master_node };

std::string_view to_string(Protocol p) noexcept;
/// Accepts the enum names; throws Error(invalid_parameter) otherwise.
Protocol parse_protocol(std::string_view name);
/// Protocols whose auxiliary index lists must stay permutations.
bool swaps_observations(Protocol p) noexcept;

/// How GoSta-async weights a fresh kernel value.
///  per_node: 1 / (p_k m_k) with the local counter m_k.
///  global:   1 / (p_k t) with the true iteration number.
enum class AsyncClock { per_node, global };

struct EngineConfig {
  Protocol protocol = Protocol::gosta_sync;
  std::uint64_t max_iters = 1000;
  /// Linear snapshot spacing; ignored when `checkpoints` is non-empty.
  std::uint64_t record_every = 1;
  std::uint64_t seed = 1;
  /// Explicit snapshot iterations, strictly increasing, each <= max_iters.
  /// 0 records the initial state.
  std::vector<std::uint64_t> checkpoints;
  /// Observation dimension d, used only for communication accounting.
  std::size_t obs_dim = 1;
  AsyncClock clock = AsyncClock::per_node;
  /// Verify the permutation invariant at every snapshot.
  bool check_invariants = true;
  /// Store the auxiliary index lists and async counters in every snapshot.
  bool record_aux = false;
};

/// Snapshot iterations a config resolves to.
std::vector<std::uint64_t> resolve_checkpoints(const EngineConfig& cfg);

struct ProtocolState {
  Eigen::VectorXd z;
  std::vector<std::size_t> y1;  ///< observation index held at each node
  std::vector<std::size_t> y2;  ///< second list (U2 only)
  Eigen::VectorXd m;            ///< async iteration counters
  /// Flooding / master-node: indices known to each node, in arrival order.
  std::vector<std::vector<std::size_t>> holdings;
  std::uint64_t t = 0;
  double comm_units = 0.0;
};

struct Checkpoint {
  std::uint64_t t = 0;
  Eigen::VectorXd z;
  double comm_units = 0.0;
  std::vector<std::size_t> y1, y2;  ///< only with record_aux
  Eigen::VectorXd m;                ///< only with record_aux
};

struct Trace {
  Protocol protocol = Protocol::gosta_sync;
  std::vector<Checkpoint> checkpoints;
  /// Per-node target: X-bar for boyd, h-bar_k for u1, U_n(H) otherwise.
  Eigen::VectorXd truth;
};

/// One protocol instance. Holds references to the graph and kernel, which
/// must outlive it.
class Engine {
 public:
  virtual ~Engine() = default;
  /// Performs one iteration, drawing from `rng` in program order.
  virtual void step(Rng& rng) = 0;
  const ProtocolState& state() const noexcept { return state_; }
  const Eigen::VectorXd& truth() const noexcept { return truth_; }
  Protocol protocol() const noexcept { return protocol_; }

 protected:
  Engine(Protocol p, Eigen::VectorXd truth) : protocol_(p), truth_(std::move(truth)) {}
  Protocol protocol_;
  Eigen::VectorXd truth_;
  ProtocolState state_;
};

/// Throws for disconnected graphs; warns on stderr for bipartite ones.
std::unique_ptr<Engine> make_boyd_engine(const Graph& g, const Eigen::VectorXd& x);
/// Any protocol except boyd. `master_node` ignores the edges of `g`.
std::unique_ptr<Engine> make_engine(Protocol p, const Graph& g, const KernelMatrix& h,
                                    std::size_t obs_dim = 1, AsyncClock clock = AsyncClock::per_node);

/// Drives an engine for cfg.max_iters iterations with Rng(cfg.seed).
Trace run_engine(Engine& engine, const EngineConfig& cfg);

Trace run_boyd(const Graph& g, const Eigen::VectorXd& x, const EngineConfig& cfg);
Trace run_u1(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg);
Trace run_u2(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg);
Trace run_gosta_sync(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg);
Trace run_gosta_async(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg);
Trace run_flooding(const Graph& g, const KernelMatrix& h, const EngineConfig& cfg);
Trace run_master_node(const KernelMatrix& h, std::size_t n, std::size_t d, const EngineConfig& cfg);

/// Inputs shared by every run of a replicate batch. `x` is used by boyd,
/// `kernel` by everything else.
struct Problem {
  const Graph* graph = nullptr;
  const KernelMatrix* kernel = nullptr;
  const Eigen::VectorXd* x = nullptr;
};

/// Runs `runs` independent replicates of cfg.protocol. Run r uses seed
/// derive_seed(cfg.seed, r); results are in run order and do not depend on
/// `threads` (0 = hardware concurrency).
std::vector<Trace> run_replicates(const Problem& problem, const EngineConfig& cfg, std::size_t runs,
                                  unsigned threads = 0);

struct ErrorSeries {
  std::vector<std::uint64_t> t;
  std::vector<double> mean;  ///< across nodes
  std::vector<double> std;   ///< population std across nodes
  /// True when some target component is 0 and absolute error was used.
  bool absolute = false;
};

/// |Z_k - truth_k| / |truth_k| per node, aggregated per checkpoint.
ErrorSeries relative_error(const Trace& trace);

}  // namespace gosta
