// gosta-sim: command line front end for the gossip U-statistics simulator.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gosta/bounds.hpp"
#include "gosta/datasets.hpp"
#include "gosta/engines.hpp"
#include "gosta/error.hpp"
#include "gosta/expectation.hpp"
#include "gosta/experiment.hpp"
#include "gosta/graph.hpp"
#include "gosta/kernels.hpp"
#include "gosta/spectral.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Writes to `path`, or stdout when path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw gosta::Error(gosta::ErrorKind::io_error, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct ProblemArgs {
  std::string graph;
  std::string data;
  std::string kernel = "euclidean";
  std::string labels;
  std::string partition;
  std::uint64_t seed = 1;

  void add_to(CLI::App* app, bool needs_data = true) {
    app->add_option("--graph", graph, "Graph file or complete:N, grid:RxC, path:N, ws:N:K:P[:SEED]")->required();
    auto* d = app->add_option("--data", data, "CSV file or mixture:N:D:K:SEP[:SEED], twoclass:N:D:MARGIN[:SEED]");
    if (needs_data) d->required();
    app->add_option("--kernel", kernel, "zero, euclidean, variance, scatter, auc")->capture_default_str();
    app->add_option("--labels", labels, "CSV column with -1/+1 labels (name or 1-based index)");
    app->add_option("--partition-column", partition, "CSV column with partition cells");
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
  }

  gosta::Graph load_graph() const { return gosta::graph_from_spec(graph, gosta::derive_seed(seed, 0xA11)); }

  gosta::Dataset load_data() const {
    gosta::CsvOptions csv;
    if (!labels.empty()) csv.label_column = labels;
    if (!partition.empty()) csv.partition_column = partition;
    return gosta::dataset_from_spec(data, csv, gosta::derive_seed(seed, 0xDA7A));
  }
};

std::vector<std::uint64_t> grid(std::uint64_t t_max, std::uint64_t record_every) {
  if (record_every == 0) return gosta::geometric_checkpoints(t_max);
  gosta::EngineConfig cfg;
  cfg.max_iters = t_max;
  cfg.record_every = record_every;
  return gosta::resolve_checkpoints(cfg);
}

gosta::AsyncClock parse_clock(const std::string& s) {
  if (s == "per_node") return gosta::AsyncClock::per_node;
  if (s == "global") return gosta::AsyncClock::global;
  throw gosta::Error(gosta::ErrorKind::invalid_parameter, "--async-clock must be per_node or global");
}

void check_sizes(const gosta::Graph& g, const gosta::Dataset& d) {
  if (g.size() != d.size()) {
    throw gosta::Error(gosta::ErrorKind::invalid_size, "data has " + std::to_string(d.size()) +
                                                           " observations, graph has " + std::to_string(g.size()) +
                                                           " nodes");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip simulator for U-statistics: spectra, Monte-Carlo runs, expectation oracles and bounds"};
  app.require_subcommand(1);

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Spectral summary of a graph (JSON)");
  std::string spectrum_graph, spectrum_out;
  std::uint64_t spectrum_seed = 1;
  bool spectrum_eigs = false, spectrum_iterative = false;
  spectrum->add_option("--graph", spectrum_graph, "Graph file or family spec")->required();
  spectrum->add_option("--seed", spectrum_seed, "Seed for random graph families");
  spectrum->add_flag("--eigenvalues", spectrum_eigs, "Include the full Laplacian spectrum");
  spectrum->add_flag("--iterative", spectrum_iterative, "Use the iterative second-eigenvalue path");
  spectrum->add_option("--out", spectrum_out, "Output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo runs of one protocol (CSV)");
  ProblemArgs sim;
  sim.add_to(simulate);
  std::string sim_protocol = "gosta_sync", sim_out, sim_clock = "per_node";
  std::uint64_t sim_iters = 1000, sim_every = 0;
  std::size_t sim_runs = 1;
  unsigned sim_threads = 0;
  bool sim_per_node = false;
  simulate->add_option("--protocol", sim_protocol, "boyd, u1, u2, gosta_sync, gosta_async, flooding, master_node")
      ->capture_default_str();
  simulate->add_option("--iters", sim_iters, "Iterations per run")->capture_default_str();
  simulate->add_option("--runs", sim_runs, "Independent runs")->capture_default_str();
  simulate->add_option("--record-every", sim_every, "Linear snapshot spacing (default: 1-2-5 grid)");
  simulate->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  simulate->add_option("--async-clock", sim_clock, "per_node or global")->capture_default_str();
  simulate->add_flag("--per-node", sim_per_node, "Add one column per node estimate");
  simulate->add_option("--out", sim_out, "Output CSV (default stdout)");

  // expect
  auto* expect = app.add_subcommand("expect", "Exact expected estimates (CSV)");
  ProblemArgs exp;
  exp.add_to(expect);
  std::string exp_protocol = "gosta_sync", exp_out;
  std::uint64_t exp_tmax = 1000, exp_every = 0;
  bool exp_lattice = false;
  expect->add_option("--protocol", exp_protocol, "boyd, u1, u2, gosta_sync, gosta_async")->capture_default_str();
  expect->add_option("--t-max", exp_tmax, "Last iteration")->capture_default_str();
  expect->add_option("--record-every", exp_every, "Linear snapshot spacing (default: 1-2-5 grid)");
  expect->add_flag("--lattice", exp_lattice, "gosta_async: exact per-node-counter oracle (small n and t only)");
  expect->add_option("--out", exp_out, "Output CSV (default stdout)");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Expected error against the convergence bound (CSV)");
  ProblemArgs bnd;
  bnd.add_to(bounds);
  std::string bnd_protocol = "gosta_sync", bnd_out;
  std::uint64_t bnd_tmax = 1000, bnd_every = 0;
  bounds->add_option("--protocol", bnd_protocol, "gosta_sync, u2, gosta_async")->capture_default_str();
  bounds->add_option("--t-max", bnd_tmax, "Last iteration")->capture_default_str();
  bounds->add_option("--record-every", bnd_every, "Linear snapshot spacing (default: 1-2-5 grid)");
  bounds->add_option("--out", bnd_out, "Output CSV (default stdout)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a JSON experiment config");
  std::string exp_config, exp_outdir;
  experiment->add_option("config", exp_config, "Config file")->required();
  experiment->add_option("--out-dir", exp_outdir, "Override output_dir");

  // table1
  auto* tab = app.add_subcommand("table1", "Spectral gap 1 - lambda_2(W_2) per graph (CSV)");
  std::vector<std::string> tab_graphs;
  std::string tab_out;
  std::uint64_t tab_seed = 1;
  tab->add_option("--graph", tab_graphs, "Graph specs or files")->required();
  tab->add_option("--seed", tab_seed, "Seed for random graph families");
  tab->add_option("--out", tab_out, "Output CSV (default stdout)");

  // gen-graph
  auto* gen_graph = app.add_subcommand("gen-graph", "Write a graph file");
  std::string gg_spec, gg_out;
  std::uint64_t gg_seed = 1;
  gen_graph->add_option("--graph", gg_spec, "Family spec")->required();
  gen_graph->add_option("--seed", gg_seed, "Seed for random graph families");
  gen_graph->add_option("--out", gg_out, "Output file (default stdout)");

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  std::string gd_spec, gd_out;
  std::uint64_t gd_seed = 1;
  gen_data->add_option("--data", gd_spec, "mixture:N:D:K:SEP[:SEED] or twoclass:N:D:MARGIN[:SEED]")->required();
  gen_data->add_option("--seed", gd_seed, "Seed when the spec has none");
  gen_data->add_option("--out", gd_out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) {
      const gosta::Graph g = gosta::graph_from_spec(spectrum_graph, spectrum_seed);
      const gosta::GraphDiagnostics diag = gosta::diagnose(g);
      json j;
      j["n"] = g.size();
      j["edges"] = g.edge_count();
      j["connected"] = diag.connected;
      j["bipartite"] = diag.bipartite;
      if (diag.connected) {
        gosta::SpectralOptions opts;
        opts.force_iterative = spectrum_iterative;
        const gosta::SpectralSummary s = gosta::spectral_summary(g, opts);
        const gosta::AsyncConstants a = gosta::async_constants(g);
        j["beta_second_smallest"] = s.beta_second_smallest;
        j["lambda2_w2"] = s.lambda2_w2;
        j["lambda2_w1"] = s.lambda2_w1;
        j["gap_c"] = s.gap_c;
        j["p_bar"] = a.p_bar;
        j["t_c"] = a.t_c;
        if (spectrum_eigs) j["laplacian_eigenvalues"] = s.laplacian_eigs;
      }
      Output(spectrum_out).stream() << j.dump(2) << '\n';
    } else if (*simulate) {
      const gosta::Protocol p = gosta::parse_protocol(sim_protocol);
      const gosta::Graph g = sim.load_graph();
      const gosta::Dataset d = sim.load_data();
      check_sizes(g, d);
      gosta::KernelMatrix h;
      if (p != gosta::Protocol::boyd) h = gosta::build_kernel_matrix(gosta::named_kernel(sim.kernel, d), d.design);
      const Eigen::VectorXd x = d.design.matrix().col(0);
      gosta::EngineConfig cfg;
      cfg.protocol = p;
      cfg.max_iters = sim_iters;
      cfg.checkpoints = grid(sim_iters, sim_every);
      cfg.seed = sim.seed;
      cfg.obs_dim = d.design.dim();
      cfg.clock = parse_clock(sim_clock);
      const auto traces = gosta::run_replicates({&g, &h, &x}, cfg, sim_runs, sim_threads);
      gosta::write_run_csv(sim_out.empty() ? "/dev/stdout" : sim_out, traces, sim_per_node);
    } else if (*expect) {
      const gosta::Protocol p = gosta::parse_protocol(exp_protocol);
      const gosta::Graph g = exp.load_graph();
      const gosta::Dataset d = exp.load_data();
      check_sizes(g, d);
      const auto cps = grid(exp_tmax, exp_every);
      gosta::ExpectedTrajectory traj;
      if (p == gosta::Protocol::boyd) {
        traj = gosta::boyd_expectation(g, d.design.matrix().col(0), cps);
      } else {
        const auto h = gosta::build_kernel_matrix(gosta::named_kernel(exp.kernel, d), d.design);
        switch (p) {
          case gosta::Protocol::u1: traj = gosta::u1_expectation(g, h, cps); break;
          case gosta::Protocol::u2: traj = gosta::u2_expectation(g, h, cps); break;
          case gosta::Protocol::gosta_sync: traj = gosta::gosta_sync_expectation(g, h, cps); break;
          case gosta::Protocol::gosta_async:
            traj = exp_lattice ? gosta::gosta_async_lattice_expectation(g, h, cps)
                               : gosta::gosta_async_expectation(g, h, cps);
            break;
          default:
            throw gosta::Error(gosta::ErrorKind::invalid_parameter,
                               "no expectation oracle for " + std::string(gosta::to_string(p)));
        }
      }
      Output out(exp_out);
      out.stream() << "t,node,expected_Z,target,abs_err\n";
      for (std::size_t c = 0; c < traj.t.size(); ++c) {
        for (Eigen::Index k = 0; k < traj.mean[c].size(); ++k) {
          const double z = traj.mean[c](k), target = traj.target(k);
          out.stream() << traj.t[c] << ',' << k + 1 << ',' << fmt(z) << ',' << fmt(target) << ','
                       << fmt(std::abs(z - target)) << '\n';
        }
      }
    } else if (*bounds) {
      const gosta::Protocol p = gosta::parse_protocol(bnd_protocol);
      const gosta::Graph g = bnd.load_graph();
      const gosta::Dataset d = bnd.load_data();
      check_sizes(g, d);
      const auto h = gosta::build_kernel_matrix(gosta::named_kernel(bnd.kernel, d), d.design);
      const gosta::BoundReport r = gosta::bound_report(p, g, h, grid(bnd_tmax, bnd_every));
      Output out(bnd_out);
      out.stream() << "t,actual_err,bound_val,ratio\n";
      for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
        const double ratio = r.actual_err[i] > 0.0 ? r.bound_val[i] / r.actual_err[i] : std::nan("");
        out.stream() << r.t_grid[i] << ',' << fmt(r.actual_err[i]) << ',' << fmt(r.bound_val[i]) << ',' << fmt(ratio)
                     << '\n';
      }
      json c;
      c["gap_c"] = r.constants.gap_c;
      c["lambda2_w1"] = r.constants.lambda2_w1;
      c["lambda2_w2"] = r.constants.lambda2_w2;
      c["p_bar"] = r.constants.p_bar;
      c["t_c"] = r.constants.t_c;
      c["vec_centered"] = r.constants.vec_centered;
      c["frob_centered"] = r.constants.frob_centered;
      if (p == gosta::Protocol::gosta_async) {
        c["fit_k"] = r.fit.k;
        c["fit_k_envelope"] = r.fit.k_envelope;
        c["fit_residual"] = r.fit.residual;
      }
      std::cerr << c.dump() << '\n';
    } else if (*experiment) {
      gosta::ExperimentSpec spec = gosta::load_experiment(exp_config);
      if (!exp_outdir.empty()) spec.output_dir = exp_outdir;
      const gosta::AggregateResult r = gosta::run_experiment(spec);
      for (const auto& pr : r.protocols) {
        const auto reach = gosta::reaching_time(pr, 0.2);
        std::cout << gosta::to_string(pr.protocol) << ": final mean error " << fmt(pr.rows.back().err_mean)
                  << ", 20% reached at " << (reach ? std::to_string(*reach) : std::string("never")) << '\n';
      }
    } else if (*tab) {
      const auto rows = gosta::table1(tab_graphs, tab_seed);
      Output out(tab_out);
      out.stream() << "graph,family,n,edges,gap\n";
      for (const auto& r : rows) {
        out.stream() << r.spec << ',' << r.family << ',' << r.n << ',' << r.edges << ',' << fmt(r.gap) << '\n';
      }
    } else if (*gen_graph) {
      const gosta::Graph g = gosta::graph_from_spec(gg_spec, gg_seed);
      gosta::write_graph(Output(gg_out).stream(), g);
    } else if (*gen_data) {
      gosta::save_csv(gd_out, gosta::dataset_from_spec(gd_spec, {}, gd_seed));
    }
  } catch (const gosta::Error& e) {
    std::cerr << "error [" << gosta::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
