// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion; indented
// lines underneath are diagnostics.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gosta/bounds.hpp"
#include "gosta/datasets.hpp"
#include "gosta/error.hpp"
#include "gosta/expectation.hpp"
#include "gosta/experiment.hpp"
#include "gosta/spectral.hpp"
#include "oracles.hpp"

using namespace gosta;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<std::uint64_t> upto(std::uint64_t t) {
  std::vector<std::uint64_t> v(t);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

double err_norm(const Eigen::VectorXd& mean, double target) { return (mean.array() - target).matrix().norm(); }

std::vector<Eigen::VectorXd> column(const std::vector<Trace>& traces, std::size_t c) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(traces.size());
  for (const Trace& tr : traces) out.push_back(tr.checkpoints[c].z);
  return out;
}

// Connected random graph drawn from one of five families.
Graph random_connected_graph(std::size_t index, Rng& rng) {
  std::uniform_int_distribution<std::size_t> size(5, 30);
  const std::size_t n = size(rng);
  switch (index % 5) {
    case 0: return make_complete(n);
    case 1: return make_grid2d(1, n);
    case 2: {
      const std::size_t rows = 2 + index % 4;
      return make_grid2d(rows, std::max<std::size_t>(2, n / rows));
    }
    case 3: return make_watts_strogatz(n, 4, 0.3, rng);
    default: {
      std::bernoulli_distribution coin(0.3);
      while (true) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) edges.push_back({i, j});
        Graph g(n, edges);
        if (oracle::bfs_components(g) == 1) return g;
      }
    }
  }
}

Outcome c1_spectrum_identity() {
  Stopwatch sw;
  Rng rng(20150101);
  double worst = 0.0, worst_lambda2 = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const Graph g = random_connected_graph(i, rng);
    const std::vector<double> brute = oracle::sorted_eigenvalues(oracle::brute_w_alpha(g, 2.0));
    std::vector<double> closed = w_alpha_eigs_via_lemma(g, 2.0);
    std::sort(closed.begin(), closed.end());
    for (std::size_t k = 0; k < brute.size(); ++k) worst = std::max(worst, std::abs(brute[k] - closed[k]));
    worst_lambda2 = std::max(worst_lambda2, std::abs(spectral_summary(g).lambda2_w2 - brute[brute.size() - 2]));
  }
  const double secs = sw.seconds();
  Outcome o;
  o.pass = worst <= 1e-9 && worst_lambda2 <= 1e-9 && secs < 10.0;
  o.summary = fmt("spectrum identity: 50 graphs, max |eig diff| %.2e, max |lambda2 diff| %.2e (tol 1e-9), %.2f s",
                  worst, worst_lambda2, secs);
  o.details.push_back("W_2 = I - L/(2m) with m undirected edges; c = beta_{n-1}/(2m)");
  return o;
}

Outcome c2_table1() {
  Stopwatch sw;
  const auto rows = table1({"complete:1599", "complete:1260", "grid:30x50", "ws:1500:5:0.3", "complete:1500"}, 1);
  const double secs = sw.seconds();
  const double rel1599 = std::abs(rows[0].gap - 6.26e-4) / 6.26e-4;
  const double rel1260 = std::abs(rows[1].gap - 7.94e-4) / 7.94e-4;
  const bool order = rows[2].gap < rows[3].gap && rows[3].gap < rows[4].gap;
  Outcome o;
  o.pass = rel1599 <= 0.01 && rel1260 <= 0.01 && order && secs < 30.0;
  o.summary = fmt("spectral gaps: complete n=1599 %.4e (rel %.2e), n=1260 %.4e (rel %.2e), ordering %s, %.2f s",
                  rows[0].gap, rel1599, rows[1].gap, rel1260, order ? "ok" : "violated", secs);
  for (const auto& r : rows)
    o.details.push_back(fmt("%-14s n=%zu edges=%zu gap=%.4e", r.spec.c_str(), r.n, r.edges, r.gap));
  return o;
}

struct SmallCase {
  std::string spec;
  KernelMatrix h;
};

std::vector<SmallCase> dominance_cases() {
  std::vector<SmallCase> out;
  for (std::size_t n : {4, 6, 8}) {
    const std::string ns = std::to_string(n);
    const std::string ws = "ws:" + ns + ":" + (n == 4 ? "2" : "4") + ":0.3:" + ns;
    for (const std::string& spec : {"complete:" + ns, "path:" + ns, ws}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        out.push_back({spec, KernelMatrix::from_dense(oracle::random_kernel(n, 1000 * n + seed, static_cast<double>(seed)))});
      }
    }
  }
  return out;
}

Outcome c3_sync_dominance() {
  Stopwatch sw;
  std::size_t checks = 0, violations = 0;
  double tightest = INFINITY;
  for (const SmallCase& c : dominance_cases()) {
    const Graph g = graph_from_spec(c.spec);
    const double u = c.h.u_stat();
    for (SyncPhase phase : {SyncPhase::end_of_iteration, SyncPhase::before_averaging}) {
      const auto traj = gosta_sync_expectation(g, c.h, upto(500), phase);
      for (std::size_t s = 0; s < 500; ++s) {
        const double bound = theorem1_bound(g, c.h, static_cast<double>(s + 1));
        const double err = err_norm(traj.mean[s], u);
        ++checks;
        if (err > bound) ++violations;
        tightest = std::min(tightest, bound / std::max(err, 1e-300));
      }
    }
  }
  const double secs = sw.seconds();
  Outcome o;
  o.pass = violations == 0 && secs < 60.0;
  o.summary = fmt("sync bound dominance: %zu checks, %zu violations, min bound/err %.3f, %.2f s", checks, violations,
                  tightest, secs);
  o.details.push_back("45 cases (complete/path/ws x n in {4,6,8} x 5 kernels), t = 1..500, both phases");
  return o;
}

Outcome c4_u2_dominance() {
  Stopwatch sw;
  std::size_t checks = 0, violations = 0;
  double tightest = INFINITY;
  for (const SmallCase& c : dominance_cases()) {
    const Graph g = graph_from_spec(c.spec);
    const double u = c.h.u_stat();
    const auto traj = u2_expectation(g, c.h, upto(500));
    for (std::size_t s = 0; s < 500; ++s) {
      const double bound = u2_bound(g, c.h, static_cast<double>(s + 1));
      const double err = err_norm(traj.mean[s], u);
      ++checks;
      if (err > bound) ++violations;
      tightest = std::min(tightest, bound / std::max(err, 1e-300));
    }
  }
  const double secs = sw.seconds();
  Outcome o;
  o.pass = violations == 0 && secs < 60.0;
  o.summary = fmt("u2 bound dominance: %zu checks, %zu violations, min bound/err %.3f, %.2f s", checks, violations,
                  tightest, secs);
  return o;
}

Outcome c5_oracle_vs_monte_carlo() {
  Stopwatch sw;
  const Graph g = oracle::bowtie6();
  const KernelMatrix h = KernelMatrix::from_dense(oracle::random_kernel(6, 2024));
  const Eigen::VectorXd x = h.row_means();
  const Problem problem{&g, &h, &x};
  const std::vector<std::uint64_t> grid = {10, 100};
  Outcome o;
  o.pass = true;
  std::string tally;
  for (Protocol p : {Protocol::boyd, Protocol::u1, Protocol::u2, Protocol::gosta_sync, Protocol::gosta_async}) {
    EngineConfig cfg;
    cfg.protocol = p;
    cfg.max_iters = 100;
    cfg.checkpoints = grid;
    cfg.seed = derive_seed(5, static_cast<std::uint64_t>(p));
    const auto traces = run_replicates(problem, cfg, 5000);
    ExpectedTrajectory expected;
    switch (p) {
      case Protocol::boyd: expected = boyd_expectation(g, x, grid); break;
      case Protocol::u1: expected = u1_expectation(g, h, grid); break;
      case Protocol::u2: expected = u2_expectation(g, h, grid); break;
      case Protocol::gosta_sync: expected = gosta_sync_expectation(g, h, grid); break;
      default: expected = gosta_async_expectation(g, h, grid); break;
    }
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double z = oracle::max_z(oracle::moments(column(traces, c)), expected.mean[c]);
      const bool ok = z <= 4.0;
      o.pass = o.pass && ok;
      tally += fmt(" %s@%llu=%.2f%s", std::string(to_string(p)).c_str(), static_cast<unsigned long long>(grid[c]), z,
                   ok ? "" : "!");
    }
  }

  // Diagnostics for the async engine: its per-node counters against the
  // exact lattice expectation, and the global-clock variant against the
  // linear recursion.
  {
    EngineConfig cfg;
    cfg.protocol = Protocol::gosta_async;
    cfg.max_iters = 10;
    cfg.checkpoints = {10};
    cfg.seed = 77;
    const auto traces = run_replicates(problem, cfg, 5000);
    const auto lattice = gosta_async_lattice_expectation(g, h, {10});
    const auto recursion = gosta_async_expectation(g, h, {10});
    o.details.push_back(fmt("async per-node counters vs exact lattice expectation at t=10: max z = %.2f",
                            oracle::max_z(oracle::moments(column(traces, 0)), lattice.mean[0])));
    o.details.push_back(fmt("lattice vs linear recursion at t=10: max |diff| = %.3e",
                            (lattice.mean[0] - recursion.mean[0]).cwiseAbs().maxCoeff()));
    cfg.clock = AsyncClock::global;
    cfg.max_iters = 100;
    cfg.checkpoints = grid;
    const auto global = run_replicates(problem, cfg, 5000);
    const auto expected = gosta_async_expectation(g, h, grid);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      o.details.push_back(fmt("async global clock vs linear recursion at t=%llu: max z = %.2f",
                              static_cast<unsigned long long>(grid[c]),
                              oracle::max_z(oracle::moments(column(global, c)), expected.mean[c])));
    }
  }
  const double secs = sw.seconds();
  o.pass = o.pass && secs < 120.0;
  o.summary = fmt("oracle vs Monte-Carlo (5000 runs, 4 SE):%s, %.2f s", tally.c_str(), secs);
  return o;
}

Outcome c6_async_clock() {
  Stopwatch sw;
  const Graph g = oracle::star_augmented8();
  const KernelMatrix h = KernelMatrix::from_dense(oracle::random_kernel(8, 6));
  EngineConfig cfg;
  cfg.protocol = Protocol::gosta_async;
  cfg.max_iters = 500;
  cfg.checkpoints = {50, 500};
  cfg.seed = 606;
  cfg.record_aux = true;
  const auto traces = run_replicates({&g, &h, nullptr}, cfg, 5000);
  Outcome o;
  o.pass = true;
  std::string tally;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<Eigen::VectorXd> m;
    for (const Trace& tr : traces) m.push_back(tr.checkpoints[c].m);
    const double t = static_cast<double>(cfg.checkpoints[c]);
    const double z = oracle::max_z(oracle::moments(m), Eigen::VectorXd::Constant(8, t));
    o.pass = o.pass && z <= 3.0;
    tally += fmt(" t=%g max z=%.2f", t, z);
  }
  o.summary = fmt("async iteration counters unbiased (5000 runs, 3 SE):%s, %.2f s", tally.c_str(), sw.seconds());
  return o;
}

ExperimentSpec desk_spec(const std::string& graph, const std::string& data, std::vector<Protocol> protocols,
                         std::uint64_t iters, std::uint64_t every) {
  ExperimentSpec s;
  s.graph = graph;
  s.data = data;
  s.kernel = "scatter";
  s.protocols = std::move(protocols);
  s.iters = iters;
  s.runs = 50;
  s.seed = 3;
  s.checkpoints.kind = CheckpointPolicy::Kind::linear;
  s.checkpoints.every = every;
  return s;
}

Outcome c7_sync_beats_u2() {
  Stopwatch sw;
  const ExperimentSpec s =
      desk_spec("ws:100:5:0.3", "mixture:100:2:3:4", {Protocol::gosta_sync, Protocol::u2}, 10000, 250);
  const AggregateResult r = run_experiment(s);
  std::size_t checked = 0, violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t c = 0; c < r.protocols[0].rows.size(); ++c) {
    const AggregateRow& sync = r.protocols[0].rows[c];
    const AggregateRow& u2 = r.protocols[1].rows[c];
    if (sync.t < 1000) continue;
    ++checked;
    if (!(sync.err_mean < u2.err_mean)) ++violations;
    worst_ratio = std::max(worst_ratio, sync.err_mean / u2.err_mean);
  }
  const double secs = sw.seconds();
  Outcome o;
  o.pass = checked > 0 && violations == 0 && secs < 120.0;
  o.summary = fmt("sync vs u2 on ws n=100 (50 runs): %zu checkpoints t >= 1000, %zu violations, max sync/u2 %.3f, %.2f s",
                  checked, violations, worst_ratio, secs);
  for (std::size_t c = 0; c < r.protocols[0].rows.size(); c += 8) {
    o.details.push_back(fmt("t=%llu sync %.4f u2 %.4f", static_cast<unsigned long long>(r.protocols[0].rows[c].t),
                            r.protocols[0].rows[c].err_mean, r.protocols[1].rows[c].err_mean));
  }
  return o;
}

Outcome c8_async_comparable() {
  Stopwatch sw;
  const ExperimentSpec s =
      desk_spec("complete:100", "mixture:100:2:3:4", {Protocol::gosta_sync, Protocol::gosta_async}, 5000, 500);
  const AggregateResult r = run_experiment(s);
  const double sync = r.protocols[0].rows.back().err_mean;
  const double async = r.protocols[1].rows.back().err_mean;
  const double ratio = async / sync;
  Outcome o;
  o.pass = ratio >= 0.5 && ratio <= 2.0;
  o.summary = fmt("async vs sync on complete n=100 at t=5000 (50 runs): sync %.4f async %.4f ratio %.3f, %.2f s", sync,
                  async, ratio, sw.seconds());
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_permutation(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != i) return false;
  return true;
}

Outcome c9_properties() {
  Stopwatch sw;
  Outcome o;
  o.pass = true;
  auto record = [&](bool ok, const std::string& what) {
    o.pass = o.pass && ok;
    o.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  };

  const Graph g = graph_from_spec("ws:20:4:0.3:8");
  const KernelMatrix h = KernelMatrix::from_dense(oracle::random_kernel(20, 9));
  Rng rng(10);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  Eigen::VectorXd x(20);
  for (Eigen::Index i = 0; i < 20; ++i) x(i) = u(rng);

  {
    EngineConfig cfg;
    cfg.protocol = Protocol::boyd;
    cfg.max_iters = 10000;
    cfg.record_every = 1;
    const Trace tr = run_boyd(g, x, cfg);
    double worst = 0.0;
    for (const Checkpoint& c : tr.checkpoints) worst = std::max(worst, std::abs(c.z.sum() - x.sum()) / std::abs(x.sum()));
    record(worst <= 1e-12, fmt("boyd conservation over 10^4 iterations: max relative drift %.2e", worst));
  }
  {
    bool all = true;
    for (Protocol p : {Protocol::u1, Protocol::u2, Protocol::gosta_sync, Protocol::gosta_async}) {
      EngineConfig cfg;
      cfg.protocol = p;
      cfg.max_iters = 2000;
      cfg.record_every = 1;
      cfg.record_aux = true;
      cfg.check_invariants = false;
      for (const Trace& tr : run_replicates({&g, &h, nullptr}, cfg, 3)) {
        for (const Checkpoint& c : tr.checkpoints) {
          all = all && is_permutation(c.y1);
          if (p == Protocol::u2) all = all && is_permutation(c.y2);
        }
      }
    }
    record(all, "auxiliary indices form a permutation at every checkpoint (u1, u2, sync, async; 2000 iterations)");
  }
  {
    const fs::path base = fs::temp_directory_path() / "gosta_acceptance_determinism";
    fs::remove_all(base);
    ExperimentSpec s = desk_spec("ws:30:4:0.3", "mixture:30:2:3:4",
                                 {Protocol::boyd, Protocol::u1, Protocol::u2, Protocol::gosta_sync,
                                  Protocol::gosta_async, Protocol::flooding, Protocol::master_node},
                                 600, 60);
    s.runs = 4;
    s.threads = 1;
    s.output_dir = base / "a";
    run_experiment(s);
    s.output_dir = base / "b";
    run_experiment(s);
    s.threads = 4;
    s.output_dir = base / "c";
    run_experiment(s);
    bool same = true;
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      const std::string a = slurp(entry.path());
      same = same && a == slurp(base / "b" / entry.path().filename()) && a == slurp(base / "c" / entry.path().filename());
      ++files;
    }
    fs::remove_all(base);
    record(same && files == 9, fmt("seed replay gives byte-identical outputs (%zu files, 1 and 4 threads)", files));
  }
  {
    Rng drng(12);
    const Dataset mix = synth_gaussian_mixture(40, 3, 3, 4.0, drng);
    const Dataset two = synth_two_class(40, 3, 1.5, drng);
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), drng);
    bool ok = true;
    for (const std::string name : {"euclidean", "variance", "scatter", "auc"}) {
      const Dataset& d = name == "auc" ? two : mix;
      Dataset shuffled = d;
      Eigen::MatrixXd px(40, 3);
      for (Eigen::Index i = 0; i < 40; ++i) {
        const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
        px.row(i) = d.design.matrix().row(static_cast<Eigen::Index>(src));
        if (d.labels) (*shuffled.labels)[static_cast<std::size_t>(i)] = (*d.labels)[src];
        if (d.partition) shuffled.partition->assignment[static_cast<std::size_t>(i)] = d.partition->assignment[src];
      }
      shuffled.design = DesignMatrix(px);
      const KernelMatrix a = build_kernel_matrix(named_kernel(name, d), d.design);
      const KernelMatrix b = build_kernel_matrix(named_kernel(name, shuffled), shuffled.design);
      const Eigen::MatrixXd& m = a.dense();
      ok = ok && (m - m.transpose()).cwiseAbs().maxCoeff() == 0.0 && m.diagonal().cwiseAbs().maxCoeff() == 0.0;
      ok = ok && std::abs(a.u_stat() - b.u_stat()) <= 1e-12 * std::max(1.0, std::abs(a.u_stat()));
    }
    record(ok, "kernels symmetric, zero diagonal, U-statistic invariant under sample permutation");
  }
  o.summary = fmt("property suite: %s, %.2f s", o.pass ? "all properties hold" : "property violated", sw.seconds());
  return o;
}

Outcome c10_async_rate_shape() {
  Stopwatch sw;
  const Graph g = make_complete(6);
  const KernelMatrix h = KernelMatrix::from_dense(oracle::random_kernel(6, 1010));
  const AsyncConstants ac = async_constants(g);
  const auto traj = gosta_async_expectation(g, h, upto(10000));
  const double u = h.u_stat();
  std::vector<double> err(10000);
  for (std::size_t s = 0; s < 10000; ++s) err[s] = err_norm(traj.mean[s], u);

  std::vector<std::uint64_t> grid = geometric_checkpoints(10000);
  const auto first = static_cast<std::uint64_t>(std::ceil(ac.t_c));
  grid.push_back(first);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> ft, fe;
  for (std::uint64_t t : grid) {
    ft.push_back(static_cast<double>(t));
    fe.push_back(err[t - 1]);
  }
  const RateFit fit = fit_rate(ft, fe, RateModel::logt_over_t, ac.t_c);
  std::size_t violations = 0;
  for (std::uint64_t t = first; t <= 10000; ++t) {
    if (err[t - 1] > fit.k_envelope * fit.model_value(static_cast<double>(t)) * (1.0 + 1e-12)) ++violations;
  }
  Outcome o;
  o.pass = violations == 0 && fit.k_envelope > 0.0;
  o.summary = fmt("async rate shape on complete n=6: K_env=%.4f dominates for every t in [%llu, 10000], %zu violations, "
                  "%.2f s",
                  fit.k_envelope, static_cast<unsigned long long>(first), violations, sw.seconds());
  o.details.push_back(fmt("least-squares K=%.4f, relative residual %.3f, t_c=%.2f", fit.k, fit.residual, ac.t_c));
  const RateFit inv = fit_rate(ft, fe, RateModel::inv_t, ac.t_c);
  o.details.push_back(fmt("1/t fit for comparison: K=%.4f, relative residual %.3f", inv.k, inv.residual));
  return o;
}

const std::vector<std::function<Outcome()>>& criteria() {
  static const std::vector<std::function<Outcome()>> all = {
      c1_spectrum_identity, c2_table1,      c3_sync_dominance, c4_u2_dominance, c5_oracle_vs_monte_carlo,
      c6_async_clock,       c7_sync_beats_u2, c8_async_comparable, c9_properties, c10_async_rate_shape};
  return all;
}

bool run_criterion(std::size_t index) {
  Outcome o;
  try {
    o = criteria()[index - 1]();
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("threw: ") + e.what();
  }
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << 'C' << index << ' ' << o.summary << '\n';
  for (const std::string& d : o.details) std::cout << "    " << d << '\n';
  std::cout.flush();
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::size_t which = 0;
  app.add_option("--criterion", which, "Run one criterion (1-10); default runs all")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  bool ok = true;
  if (which != 0) {
    ok = run_criterion(which);
  } else {
    for (std::size_t i = 1; i <= criteria().size(); ++i) ok = run_criterion(i) && ok;
  }
  return ok ? 0 : 1;
}
