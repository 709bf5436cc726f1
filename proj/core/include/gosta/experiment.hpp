#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gosta/datasets.hpp"
#include "gosta/engines.hpp"

namespace gosta {

/// 1, 2, 5, 10, 20, 50, ... up to t_max, always ending at t_max. Thinned
/// evenly (keeping the last point) when longer than `max_points`.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t t_max, std::size_t max_points = 200);

struct CheckpointPolicy {
  enum class Kind { geometric, linear };
  Kind kind = Kind::geometric;
  std::uint64_t every = 0;       ///< linear spacing
  std::size_t max_points = 200;  ///< geometric cap
  std::vector<std::uint64_t> resolve(std::uint64_t t_max) const;
};

struct ExperimentSpec {
  std::string graph;  ///< family spec or file path
  std::string data;   ///< synthetic spec or CSV path
  CsvOptions csv;
  std::string kernel = "euclidean";
  std::vector<Protocol> protocols;
  std::uint64_t iters = 1000;
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  CheckpointPolicy checkpoints;
  AsyncClock async_clock = AsyncClock::per_node;
  unsigned threads = 0;
  /// Empty: no files are written.
  std::filesystem::path output_dir;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
/// Unknown keys, bad types and invalid values are rejected with distinct
/// messages; referenced files must exist.
ExperimentSpec parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct AggregateRow {
  std::uint64_t t = 0;
  double comm_units = 0.0;
  double err_mean = 0.0;       ///< mean over runs of the node-averaged error
  double err_std_nodes = 0.0;  ///< across-node std, averaged over runs
  double err_std_runs = 0.0;   ///< sample std of the node-averaged error across runs
};

struct ProtocolResult {
  Protocol protocol = Protocol::gosta_sync;
  std::vector<AggregateRow> rows;
  std::size_t runs = 0;
  bool absolute_error = false;
};

struct AggregateResult {
  std::vector<ProtocolResult> protocols;
  std::size_t n = 0;
  std::size_t obs_dim = 0;
  double target = 0.0;  ///< U-statistic of the kernel matrix
};

/// Aggregates replicate traces sharing one checkpoint grid.
ProtocolResult aggregate(const std::vector<Trace>& traces);

/// Inputs materialised from a spec.
struct ExperimentInputs {
  Graph graph;
  Dataset data;
  KernelMatrix kernel;
  Eigen::VectorXd boyd_values;  ///< first data column
};

ExperimentInputs build_inputs(const ExperimentSpec& spec);

/// Runs every protocol; writes <protocol>.csv, comparison.csv and
/// summary.json under spec.output_dir when it is set.
AggregateResult run_experiment(const ExperimentSpec& spec);

/// First checkpoint whose mean error is below `threshold`.
std::optional<std::uint64_t> reaching_time(const ProtocolResult& result, double threshold);

void write_protocol_csv(const std::filesystem::path& path, const ProtocolResult& result);
void write_comparison_csv(const std::filesystem::path& path, const AggregateResult& result);

/// Per-run rows: run, t, comm_units, err_mean, err_std[, z1..zn].
void write_run_csv(const std::filesystem::path& path, const std::vector<Trace>& traces, bool per_node);

struct Table1Row {
  std::string spec;
  std::string family;
  std::size_t n = 0;
  std::size_t edges = 0;
  double gap = 0.0;
};

/// Spectral gap of each graph via the iterative second-eigenvalue path.
std::vector<Table1Row> table1(const std::vector<std::string>& graph_specs, std::uint64_t seed = 1);

}  // namespace gosta
