#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gosta/graph.hpp"
#include "gosta/kernels.hpp"

namespace gosta {

struct ExpectationOptions {
  std::size_t phantom_cap = 60;   ///< GoSta recursions
  std::size_t matrix_cap = 400;   ///< U1 / U2
  std::size_t boyd_cap = 2000;
  /// State budget for the exact async lattice oracle.
  std::size_t lattice_state_cap = 2'000'000;
};

/// Expected estimates at each requested iteration.
struct ExpectedTrajectory {
  std::vector<std::uint64_t> t;
  std::vector<Eigen::VectorXd> mean;
  Eigen::VectorXd target;
};

/// Expected state of the phantom network: `s1` is the estimate block and
/// `s2` the propagation block, stored as an n x n matrix whose row k is the
/// k-th block (row k of H with its positions moved by the propagation).
struct PhantomState {
  Eigen::VectorXd s1;
  Eigen::MatrixXd s2;
  std::uint64_t t = 0;

  /// S(0) = (0, rows of H).
  static PhantomState initial(const KernelMatrix& h);
  /// s2 as n stacked blocks of length n.
  Eigen::VectorXd vectorized_s2() const;
  /// The selector applied to s2: entry k is position k of block k.
  Eigen::VectorXd selected() const { return s2.diagonal(); }
  Eigen::VectorXd block_sums() const { return s2.rowwise().sum(); }
};

/// One expected swap step on every block: s2 <- s2 * W_1.
void propagate(PhantomState& state, const Graph& g);

/// Which instant of an iteration a GoSta-sync expectation refers to.
/// end_of_iteration matches the engine snapshot; before_averaging is the
/// state right after the local update, which the phantom recursion tracks.
enum class SyncPhase { end_of_iteration, before_averaging };

/// Checkpoints must be increasing; 0 is allowed. Each oracle throws
/// Error(size_cap_exceeded) above its cap and for disconnected input.
ExpectedTrajectory gosta_sync_expectation(const Graph& g, const KernelMatrix& h,
                                          const std::vector<std::uint64_t>& checkpoints,
                                          SyncPhase phase = SyncPhase::end_of_iteration,
                                          const ExpectationOptions& opts = {});

/// Linear recursion E[Z(t)] = M1(t) E[Z(t-1)] + B S2(t-1) / t with
/// M1(t) = W_2 - (I + D^-1 A) / (2t). Exact for the async engine run with
/// AsyncClock::global.
ExpectedTrajectory gosta_async_expectation(const Graph& g, const KernelMatrix& h,
                                           const std::vector<std::uint64_t>& checkpoints,
                                           const ExpectationOptions& opts = {});

/// Exact expectation of the async engine with per-node counters, by dynamic
/// programming over activation-count vectors. Exponential in t; meant for
/// n <= 8 and t of a few dozen.
ExpectedTrajectory gosta_async_lattice_expectation(const Graph& g, const KernelMatrix& h,
                                                   const std::vector<std::uint64_t>& checkpoints,
                                                   const ExpectationOptions& opts = {});

ExpectedTrajectory u1_expectation(const Graph& g, const KernelMatrix& h,
                                  const std::vector<std::uint64_t>& checkpoints,
                                  const ExpectationOptions& opts = {});

ExpectedTrajectory u2_expectation(const Graph& g, const KernelMatrix& h,
                                  const std::vector<std::uint64_t>& checkpoints,
                                  const ExpectationOptions& opts = {});

ExpectedTrajectory boyd_expectation(const Graph& g, const Eigen::VectorXd& x,
                                    const std::vector<std::uint64_t>& checkpoints,
                                    const ExpectationOptions& opts = {});

}  // namespace gosta
