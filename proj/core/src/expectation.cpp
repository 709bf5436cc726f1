#include "gosta/expectation.hpp"

#include <string>
#include <unordered_map>

#include "gosta/error.hpp"

namespace gosta {

namespace {

void check_inputs(const Graph& g, std::size_t n_data, std::size_t cap, const char* who) {
  if (g.size() > cap) {
    throw Error(ErrorKind::size_cap_exceeded, std::string(who) + ": n = " + std::to_string(g.size()) +
                                                  " exceeds the oracle cap of " + std::to_string(cap) +
                                                  "; use Monte-Carlo runs instead or raise the cap");
  }
  if (n_data != g.size()) {
    throw Error(ErrorKind::invalid_size, std::string(who) + ": data has " + std::to_string(n_data) +
                                             " entries, graph has " + std::to_string(g.size()) + " nodes");
  }
  if (g.edge_count() == 0) throw Error(ErrorKind::empty_edge_set, std::string(who) + ": graph has no edges");
  if (!diagnose(g).connected) throw Error(ErrorKind::disconnected_graph, std::string(who) + ": graph is disconnected");
}

void check_checkpoints(const std::vector<std::uint64_t>& cps) {
  if (cps.empty()) throw Error(ErrorKind::invalid_parameter, "at least one checkpoint is required");
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i] <= cps[i - 1]) throw Error(ErrorKind::invalid_parameter, "checkpoints must be strictly increasing");
  }
}

// x <- x W_alpha applied to each row of x, without forming W_alpha.
void right_multiply_w(Eigen::MatrixXd& x, const Graph& g, double alpha) {
  const double s = 1.0 / (alpha * static_cast<double>(g.edge_count()));
  Eigen::MatrixXd lx = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.first), b = static_cast<Eigen::Index>(e.second);
    const Eigen::VectorXd diff = x.col(a) - x.col(b);
    lx.col(a) += diff;
    lx.col(b) -= diff;
  }
  x -= s * lx;
}

Eigen::VectorXd multiply_w(const Eigen::VectorXd& z, const Graph& g, double alpha) {
  const double s = 1.0 / (alpha * static_cast<double>(g.edge_count()));
  Eigen::VectorXd out = z;
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.first), b = static_cast<Eigen::Index>(e.second);
    const double diff = s * (z(a) - z(b));
    out(a) -= diff;
    out(b) += diff;
  }
  return out;
}

// Walks t = 0..t_max, calling `step(t)` for t >= 1 and recording
// `current()` at each checkpoint.
template <class Step, class Current>
ExpectedTrajectory sweep(const std::vector<std::uint64_t>& cps, Eigen::VectorXd target, Step step, Current current) {
  check_checkpoints(cps);
  ExpectedTrajectory out;
  out.target = std::move(target);
  auto next = cps.begin();
  if (*next == 0) {
    out.t.push_back(0);
    out.mean.push_back(current());
    ++next;
  }
  for (std::uint64_t t = 1; next != cps.end(); ++t) {
    step(t);
    if (t == *next) {
      out.t.push_back(t);
      out.mean.push_back(current());
      ++next;
    }
  }
  return out;
}

Eigen::VectorXd u_target(const KernelMatrix& h) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(h.size()), h.u_stat());
}

}  // namespace

PhantomState PhantomState::initial(const KernelMatrix& h) {
  PhantomState s;
  s.s1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.size()));
  s.s2 = h.dense();
  return s;
}

Eigen::VectorXd PhantomState::vectorized_s2() const {
  const Eigen::MatrixXd rows = s2.transpose();
  return Eigen::Map<const Eigen::VectorXd>(rows.data(), rows.size());
}

void propagate(PhantomState& state, const Graph& g) { right_multiply_w(state.s2, g, 1.0); }

ExpectedTrajectory gosta_sync_expectation(const Graph& g, const KernelMatrix& h,
                                          const std::vector<std::uint64_t>& checkpoints, SyncPhase phase,
                                          const ExpectationOptions& opts) {
  check_inputs(g, h.size(), opts.phantom_cap, "gosta_sync expectation");
  PhantomState s = PhantomState::initial(h);
  // s.s1 holds the pre-averaging estimate P(t); the engine's end-of-iteration
  // estimate is W_2 P(t).
  auto step = [&](std::uint64_t t) {
    const double td = static_cast<double>(t);
    const Eigen::VectorXd fresh = s.selected() / td;
    s.s1 = ((td - 1.0) / td) * multiply_w(s.s1, g, 2.0) + fresh;
    propagate(s, g);
    s.t = t;
  };
  auto current = [&]() -> Eigen::VectorXd {
    if (phase == SyncPhase::before_averaging || s.t == 0) return s.s1;
    return multiply_w(s.s1, g, 2.0);
  };
  return sweep(checkpoints, u_target(h), step, current);
}

ExpectedTrajectory gosta_async_expectation(const Graph& g, const KernelMatrix& h,
                                           const std::vector<std::uint64_t>& checkpoints,
                                           const ExpectationOptions& opts) {
  check_inputs(g, h.size(), opts.phantom_cap, "gosta_async expectation");
  const auto n = static_cast<Eigen::Index>(g.size());
  // I + D^-1 A as a dense matrix; n is capped.
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n);
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.first), b = static_cast<Eigen::Index>(e.second);
    k(a, b) += 1.0 / static_cast<double>(g.degree(e.first));
    k(b, a) += 1.0 / static_cast<double>(g.degree(e.second));
  }
  PhantomState s = PhantomState::initial(h);
  auto step = [&](std::uint64_t t) {
    const double td = static_cast<double>(t);
    const Eigen::VectorXd fresh = s.selected() / td;
    s.s1 = multiply_w(s.s1, g, 2.0) - (k * s.s1) / (2.0 * td) + fresh;
    propagate(s, g);
    s.t = t;
  };
  return sweep(checkpoints, u_target(h), step, [&] { return s.s1; });
}

namespace {

struct LatticeCell {
  double prob = 0.0;
  Eigen::VectorXd z;   // E[Z 1{counts}]
  Eigen::MatrixXd f;   // f(k, q) = E[H(k, Y_q) 1{counts}]
};

}  // namespace

ExpectedTrajectory gosta_async_lattice_expectation(const Graph& g, const KernelMatrix& h,
                                                   const std::vector<std::uint64_t>& checkpoints,
                                                   const ExpectationOptions& opts) {
  check_inputs(g, h.size(), opts.phantom_cap, "gosta_async lattice expectation");
  check_checkpoints(checkpoints);
  if (checkpoints.back() > 255) {
    throw Error(ErrorKind::size_cap_exceeded, "lattice oracle supports t <= 255");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  const double edge_prob = 1.0 / static_cast<double>(g.edge_count());

  std::unordered_map<std::string, LatticeCell> cells;
  cells.emplace(std::string(static_cast<std::size_t>(n), '\0'),
                LatticeCell{1.0, Eigen::VectorXd::Zero(n), h.dense()});

  auto current = [&] {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
    for (const auto& [key, cell] : cells) total += cell.z;
    return total;
  };
  auto step = [&](std::uint64_t) {
    std::unordered_map<std::string, LatticeCell> next;
    next.reserve(cells.size() * 2);
    for (const auto& [key, cell] : cells) {
      for (const Edge& e : g.edges()) {
        const auto i = static_cast<Eigen::Index>(e.first), j = static_cast<Eigen::Index>(e.second);
        std::string to = key;
        const double ci = static_cast<unsigned char>(++to[e.first]);
        const double cj = static_cast<unsigned char>(++to[e.second]);
        auto [it, fresh] = next.try_emplace(to);
        LatticeCell& dst = it->second;
        if (fresh) {
          dst.z = Eigen::VectorXd::Zero(n);
          dst.f = Eigen::MatrixXd::Zero(n, n);
        }
        dst.prob += edge_prob * cell.prob;
        Eigen::VectorXd z = cell.z;
        const double avg = 0.5 * (z(i) + z(j));
        z(i) = (1.0 - 1.0 / ci) * avg + cell.f(i, i) / ci;
        z(j) = (1.0 - 1.0 / cj) * avg + cell.f(j, j) / cj;
        dst.z += edge_prob * z;
        dst.f += edge_prob * cell.f;
        dst.f.col(i) += edge_prob * (cell.f.col(j) - cell.f.col(i));
        dst.f.col(j) += edge_prob * (cell.f.col(i) - cell.f.col(j));
      }
    }
    if (next.size() > opts.lattice_state_cap) {
      throw Error(ErrorKind::size_cap_exceeded, "lattice oracle exceeded its state budget");
    }
    cells = std::move(next);
  };
  return sweep(checkpoints, u_target(h), step, current);
}

ExpectedTrajectory u1_expectation(const Graph& g, const KernelMatrix& h,
                                  const std::vector<std::uint64_t>& checkpoints, const ExpectationOptions& opts) {
  check_inputs(g, h.size(), opts.matrix_cap, "u1 expectation");
  Eigen::MatrixXd hw = h.dense();  // H W_1^s
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  auto step = [&](std::uint64_t t) {
    const double td = static_cast<double>(t);
    right_multiply_w(hw, g, 1.0);
    z = ((td - 1.0) / td) * z + hw.diagonal() / td;
  };
  return sweep(checkpoints, h.row_means(), step, [&] { return z; });
}

ExpectedTrajectory u2_expectation(const Graph& g, const KernelMatrix& h,
                                  const std::vector<std::uint64_t>& checkpoints, const ExpectationOptions& opts) {
  check_inputs(g, h.size(), opts.matrix_cap, "u2 expectation");
  Eigen::MatrixXd q = h.dense();  // W_1^s H W_1^s
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  auto step = [&](std::uint64_t t) {
    const double td = static_cast<double>(t);
    z = ((td - 1.0) / td) * z + q.diagonal() / td;
    right_multiply_w(q, g, 1.0);
    q.transposeInPlace();
    right_multiply_w(q, g, 1.0);
  };
  return sweep(checkpoints, u_target(h), step, [&] { return z; });
}

ExpectedTrajectory boyd_expectation(const Graph& g, const Eigen::VectorXd& x,
                                    const std::vector<std::uint64_t>& checkpoints, const ExpectationOptions& opts) {
  check_inputs(g, static_cast<std::size_t>(x.size()), opts.boyd_cap, "boyd expectation");
  Eigen::VectorXd z = x;
  auto step = [&](std::uint64_t) { z = multiply_w(z, g, 2.0); };
  return sweep(checkpoints, Eigen::VectorXd::Constant(x.size(), x.mean()), step, [&] { return z; });
}

}  // namespace gosta
