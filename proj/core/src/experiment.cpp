#include "gosta/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gosta/error.hpp"
#include "gosta/spectral.hpp"

namespace gosta {

using nlohmann::json;

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t t_max, std::size_t max_points) {
  if (t_max == 0) throw Error(ErrorKind::invalid_parameter, "checkpoint grid needs t_max >= 1");
  if (max_points < 1) throw Error(ErrorKind::invalid_parameter, "checkpoint grid needs max_points >= 1");
  std::vector<std::uint64_t> grid;
  for (std::uint64_t decade = 1; decade <= t_max; decade *= 10) {
    for (std::uint64_t m : {1, 2, 5}) {
      if (m * decade < t_max) grid.push_back(m * decade);
    }
    if (decade > t_max / 10) break;
  }
  grid.push_back(t_max);
  if (grid.size() <= max_points) return grid;
  std::vector<std::uint64_t> thinned;
  for (std::size_t i = 0; i < max_points; ++i) {
    const std::size_t idx = (grid.size() - 1) * i / (max_points - 1 == 0 ? 1 : max_points - 1);
    if (thinned.empty() || grid[idx] > thinned.back()) thinned.push_back(grid[idx]);
  }
  if (thinned.back() != t_max) thinned.back() = t_max;
  return thinned;
}

std::vector<std::uint64_t> CheckpointPolicy::resolve(std::uint64_t t_max) const {
  if (kind == Kind::geometric) return geometric_checkpoints(t_max, max_points);
  EngineConfig cfg;
  cfg.max_iters = t_max;
  cfg.record_every = every;
  return resolve_checkpoints(cfg);
}

namespace {

bool is_synthetic(const std::string& data) {
  return data.rfind("mixture:", 0) == 0 || data.rfind("twoclass:", 0) == 0;
}

bool is_graph_family(const std::string& graph) {
  for (const char* prefix : {"complete:", "grid:", "path:", "ws:"}) {
    if (graph.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

template <class T>
T get_as(const json& j, const char* key, const char* type_name) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse_error, std::string("config key '") + key + "' must be " + type_name);
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  return out;
}

}  // namespace

ExperimentSpec parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::parse_error, "config must be a JSON object");

  static const std::set<std::string> known = {"graph",  "data",        "kernel",      "protocols",       "iters",
                                              "runs",   "seed",        "checkpoints", "labels_column",   "partition_column",
                                              "threads", "async_clock", "output_dir"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw Error(ErrorKind::parse_error, "unknown config key '" + item.key() + "'");
  }
  for (const char* key : {"graph", "data", "protocols"}) {
    if (!j.contains(key)) throw Error(ErrorKind::missing_input, std::string("config is missing required key '") + key + "'");
  }

  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  ExperimentSpec spec;
  spec.graph = get_as<std::string>(j, "graph", "a string");
  if (!is_graph_family(spec.graph)) {
    spec.graph = resolve(spec.graph).string();
    if (!std::filesystem::exists(spec.graph)) throw Error(ErrorKind::file_not_found, "graph file not found: " + spec.graph);
  }
  spec.data = get_as<std::string>(j, "data", "a string");
  if (!is_synthetic(spec.data)) {
    spec.data = resolve(spec.data).string();
    if (!std::filesystem::exists(spec.data)) throw Error(ErrorKind::file_not_found, "data file not found: " + spec.data);
  }
  if (j.contains("labels_column")) spec.csv.label_column = get_as<std::string>(j, "labels_column", "a string");
  if (j.contains("partition_column")) spec.csv.partition_column = get_as<std::string>(j, "partition_column", "a string");
  if (j.contains("kernel")) spec.kernel = get_as<std::string>(j, "kernel", "a string");

  const auto names = get_as<std::vector<std::string>>(j, "protocols", "a list of strings");
  if (names.empty()) throw Error(ErrorKind::invalid_parameter, "config 'protocols' must not be empty");
  for (const auto& name : names) spec.protocols.push_back(parse_protocol(name));

  if (j.contains("iters")) {
    const auto iters = get_as<std::int64_t>(j, "iters", "an integer");
    if (iters < 1) throw Error(ErrorKind::invalid_parameter, "config 'iters' must be >= 1");
    spec.iters = static_cast<std::uint64_t>(iters);
  }
  if (j.contains("runs")) {
    const auto runs = get_as<std::int64_t>(j, "runs", "an integer");
    if (runs < 1) throw Error(ErrorKind::invalid_parameter, "config 'runs' must be >= 1");
    spec.runs = static_cast<std::size_t>(runs);
  }
  if (j.contains("seed")) spec.seed = get_as<std::uint64_t>(j, "seed", "a non-negative integer");
  if (j.contains("threads")) spec.threads = get_as<unsigned>(j, "threads", "a non-negative integer");
  if (j.contains("async_clock")) {
    const auto clock = get_as<std::string>(j, "async_clock", "a string");
    if (clock == "per_node") spec.async_clock = AsyncClock::per_node;
    else if (clock == "global") spec.async_clock = AsyncClock::global;
    else throw Error(ErrorKind::invalid_parameter, "config 'async_clock' must be per_node or global");
  }
  if (j.contains("checkpoints")) {
    const json& c = j.at("checkpoints");
    if (c.is_string()) {
      if (c.get<std::string>() != "geometric") {
        throw Error(ErrorKind::invalid_parameter, "config 'checkpoints' string must be \"geometric\"");
      }
    } else if (c.is_object()) {
      for (const auto& item : c.items()) {
        if (item.key() != "policy" && item.key() != "every" && item.key() != "max_points") {
          throw Error(ErrorKind::parse_error, "unknown checkpoints key '" + item.key() + "'");
        }
      }
      const auto policy = c.value("policy", std::string("geometric"));
      if (policy == "linear") {
        spec.checkpoints.kind = CheckpointPolicy::Kind::linear;
        const auto every = get_as<std::int64_t>(c, "every", "an integer");
        if (every < 1 || static_cast<std::uint64_t>(every) > spec.iters) {
          throw Error(ErrorKind::invalid_parameter, "checkpoints 'every' must be in [1, iters]");
        }
        spec.checkpoints.every = static_cast<std::uint64_t>(every);
      } else if (policy == "geometric") {
        if (c.contains("max_points")) {
          const auto mp = get_as<std::int64_t>(c, "max_points", "an integer");
          if (mp < 2) throw Error(ErrorKind::invalid_parameter, "checkpoints 'max_points' must be >= 2");
          spec.checkpoints.max_points = static_cast<std::size_t>(mp);
        }
      } else {
        throw Error(ErrorKind::invalid_parameter, "checkpoints 'policy' must be geometric or linear");
      }
    } else {
      throw Error(ErrorKind::parse_error, "config key 'checkpoints' must be a string or an object");
    }
  }
  if (j.contains("output_dir")) spec.output_dir = resolve(get_as<std::string>(j, "output_dir", "a string"));
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::file_not_found, "config file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.parent_path());
}

ProtocolResult aggregate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw Error(ErrorKind::invalid_parameter, "nothing to aggregate");
  ProtocolResult out;
  out.protocol = traces.front().protocol;
  out.runs = traces.size();
  std::vector<ErrorSeries> series;
  for (const Trace& tr : traces) {
    series.push_back(relative_error(tr));
    if (series.back().t != series.front().t) throw Error(ErrorKind::invalid_parameter, "runs have different checkpoints");
    out.absolute_error = out.absolute_error || series.back().absolute;
  }
  const double runs = static_cast<double>(traces.size());
  for (std::size_t c = 0; c < series.front().t.size(); ++c) {
    AggregateRow row;
    row.t = series.front().t[c];
    for (std::size_t r = 0; r < traces.size(); ++r) {
      row.err_mean += series[r].mean[c] / runs;
      row.err_std_nodes += series[r].std[c] / runs;
      row.comm_units += traces[r].checkpoints[c].comm_units / runs;
    }
    double ss = 0.0;
    for (const ErrorSeries& s : series) ss += std::pow(s.mean[c] - row.err_mean, 2);
    row.err_std_runs = traces.size() > 1 ? std::sqrt(ss / (runs - 1.0)) : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

ExperimentInputs build_inputs(const ExperimentSpec& spec) {
  ExperimentInputs in;
  in.graph = graph_from_spec(spec.graph, derive_seed(spec.seed, 0xA11));
  in.data = dataset_from_spec(spec.data, spec.csv, derive_seed(spec.seed, 0xDA7A));
  if (in.data.size() != in.graph.size()) {
    throw Error(ErrorKind::invalid_size, "data has " + std::to_string(in.data.size()) + " observations, graph has " +
                                             std::to_string(in.graph.size()) + " nodes");
  }
  in.kernel = build_kernel_matrix(named_kernel(spec.kernel, in.data), in.data.design);
  in.boyd_values = in.data.design.matrix().col(0);
  return in;
}

AggregateResult run_experiment(const ExperimentSpec& spec) {
  const ExperimentInputs in = build_inputs(spec);
  AggregateResult result;
  result.n = in.graph.size();
  result.obs_dim = in.data.design.dim();
  result.target = in.kernel.u_stat();
  const std::vector<std::uint64_t> grid = spec.checkpoints.resolve(spec.iters);
  const Problem problem{&in.graph, &in.kernel, &in.boyd_values};
  for (Protocol p : spec.protocols) {
    EngineConfig cfg;
    cfg.protocol = p;
    cfg.max_iters = spec.iters;
    cfg.checkpoints = grid;
    cfg.seed = derive_seed(spec.seed, 0x5EED00 + static_cast<std::uint64_t>(p));
    cfg.obs_dim = result.obs_dim;
    cfg.clock = spec.async_clock;
    try {
      result.protocols.push_back(aggregate(run_replicates(problem, cfg, spec.runs, spec.threads)));
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(to_string(p)) + ": " + e.what());
    }
  }
  if (!spec.output_dir.empty()) {
    std::filesystem::create_directories(spec.output_dir);
    for (const ProtocolResult& r : result.protocols) {
      write_protocol_csv(spec.output_dir / (std::string(to_string(r.protocol)) + ".csv"), r);
    }
    write_comparison_csv(spec.output_dir / "comparison.csv", result);
    json summary;
    summary["n"] = result.n;
    summary["obs_dim"] = result.obs_dim;
    summary["u_statistic"] = result.target;
    summary["runs"] = spec.runs;
    summary["iters"] = spec.iters;
    summary["seed"] = spec.seed;
    for (const ProtocolResult& r : result.protocols) {
      const auto reach = reaching_time(r, 0.2);
      json entry;
      entry["final_err_mean"] = r.rows.back().err_mean;
      entry["final_comm_units"] = r.rows.back().comm_units;
      entry["reaching_time_20pct"] = reach ? json(*reach) : json(nullptr);
      entry["absolute_error"] = r.absolute_error;
      summary["protocols"][std::string(to_string(r.protocol))] = entry;
    }
    open_out(spec.output_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return result;
}

std::optional<std::uint64_t> reaching_time(const ProtocolResult& result, double threshold) {
  for (const AggregateRow& row : result.rows) {
    if (row.err_mean < threshold) return row.t;
  }
  return std::nullopt;
}

void write_protocol_csv(const std::filesystem::path& path, const ProtocolResult& result) {
  auto out = open_out(path);
  out << "protocol,t,comm_units,err_mean,err_std_nodes,err_std_runs,runs,error_kind\n";
  const char* kind = result.absolute_error ? "absolute" : "relative";
  for (const AggregateRow& r : result.rows) {
    out << to_string(result.protocol) << ',' << r.t << ',' << fmt(r.comm_units) << ',' << fmt(r.err_mean) << ','
        << fmt(r.err_std_nodes) << ',' << fmt(r.err_std_runs) << ',' << result.runs << ',' << kind << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& path, const AggregateResult& result) {
  auto out = open_out(path);
  out << 't';
  for (const ProtocolResult& r : result.protocols) {
    out << ',' << to_string(r.protocol) << "_err_mean," << to_string(r.protocol) << "_comm_units";
  }
  out << '\n';
  if (result.protocols.empty()) return;
  for (std::size_t c = 0; c < result.protocols.front().rows.size(); ++c) {
    out << result.protocols.front().rows[c].t;
    for (const ProtocolResult& r : result.protocols) out << ',' << fmt(r.rows[c].err_mean) << ',' << fmt(r.rows[c].comm_units);
    out << '\n';
  }
}

void write_run_csv(const std::filesystem::path& path, const std::vector<Trace>& traces, bool per_node) {
  auto out = open_out(path);
  out << "run,t,comm_units,err_mean,err_std";
  const Eigen::Index n = traces.empty() ? 0 : traces.front().truth.size();
  if (per_node) {
    for (Eigen::Index k = 0; k < n; ++k) out << ",z" << k + 1;
  }
  out << '\n';
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const ErrorSeries s = relative_error(traces[r]);
    for (std::size_t c = 0; c < s.t.size(); ++c) {
      const Checkpoint& cp = traces[r].checkpoints[c];
      out << r << ',' << cp.t << ',' << fmt(cp.comm_units) << ',' << fmt(s.mean[c]) << ',' << fmt(s.std[c]);
      if (per_node) {
        for (Eigen::Index k = 0; k < cp.z.size(); ++k) out << ',' << fmt(cp.z(k));
      }
      out << '\n';
    }
  }
}

std::vector<Table1Row> table1(const std::vector<std::string>& graph_specs, std::uint64_t seed) {
  std::vector<Table1Row> rows;
  SpectralOptions opts;
  opts.force_iterative = true;
  for (const std::string& spec : graph_specs) {
    const Graph g = graph_from_spec(spec, seed);
    const SpectralSummary s = spectral_summary(g, opts);
    const auto colon = spec.find(':');
    rows.push_back({spec, colon == std::string::npos ? "file" : spec.substr(0, colon), g.size(), g.edge_count(), s.gap_c});
  }
  return rows;
}

}  // namespace gosta
