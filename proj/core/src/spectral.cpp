#include "gosta/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gosta/error.hpp"

namespace gosta {

Eigen::MatrixXd w_alpha(const Graph& g, double alpha) {
  if (g.edge_count() == 0) throw Error(ErrorKind::empty_edge_set, "w_alpha: graph has no edges");
  if (!(alpha >= 1.0)) throw Error(ErrorKind::invalid_parameter, "w_alpha: alpha must be >= 1");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  w -= laplacian(g) / (alpha * static_cast<double>(g.edge_count()));
  return w;
}

std::vector<double> laplacian_spectrum(const Graph& g) {
  if (g.size() == 0) return {};
  Eigen::MatrixXd lap = laplacian(g);
  lap = 0.5 * (lap + lap.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::invalid_graph, "laplacian eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();  // increasing
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<double> w_alpha_eigs_from_laplacian(const std::vector<double>& laplacian_eigs,
                                                std::size_t edge_count, double alpha) {
  if (edge_count == 0) throw Error(ErrorKind::empty_edge_set, "w_alpha eigenvalues: graph has no edges");
  const double scale = alpha * static_cast<double>(edge_count);
  std::vector<double> out(laplacian_eigs.size());
  // laplacian_eigs is decreasing, so lambda_i pairs with beta_{n-i+1}.
  const std::size_t n = laplacian_eigs.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 - laplacian_eigs[n - 1 - i] / scale;
  return out;
}

std::vector<double> w_alpha_eigs_via_lemma(const Graph& g, double alpha) {
  return w_alpha_eigs_from_laplacian(laplacian_spectrum(g), g.edge_count(), alpha);
}

namespace {

using Operator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

void remove_mean(Eigen::VectorXd& v) { v.array() -= v.mean(); }

// Largest eigenvalue of a symmetric operator restricted to the complement of
// the constant vector, by Lanczos with full reorthogonalisation.
double lanczos_largest(const Operator& op, Eigen::Index n, const LanczosOptions& opts) {
  if (n < 2) return 0.0;
  const int max_steps = static_cast<int>(std::min<Eigen::Index>(opts.max_iterations, n - 1));
  Eigen::MatrixXd basis(n, max_steps + 1);
  std::vector<double> alpha, beta;

  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::sin(1.0 + 0.7 * static_cast<double>(i)) + 0.1 * std::cos(3.1 * static_cast<double>(i * i % 97));
  remove_mean(v);
  v.normalize();
  basis.col(0) = v;

  Eigen::VectorXd w(n);
  double previous = 0.0;
  double ritz = 0.0;
  for (int k = 0; k < max_steps; ++k) {
    op(basis.col(k), w);
    remove_mean(w);
    const double a = basis.col(k).dot(w);
    alpha.push_back(a);
    // Full reorthogonalisation (twice is enough).
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeff = basis.leftCols(k + 1).transpose() * w;
      w.noalias() -= basis.leftCols(k + 1) * coeff;
    }
    remove_mean(w);
    const double b = w.norm();

    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    ritz = tri.eigenvalues()(m - 1);

    if (b < 1e-14 * std::max(1.0, std::abs(ritz))) break;  // invariant subspace found
    if (k > 2 && std::abs(ritz - previous) <= opts.tolerance * std::abs(ritz)) break;
    previous = ritz;
    beta.push_back(b);
    basis.col(k + 1) = w / b;
  }
  return ritz;
}

void laplacian_apply(const Graph& g, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.setZero(x.size());
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.first);
    const auto b = static_cast<Eigen::Index>(e.second);
    const double diff = x(a) - x(b);
    y(a) += diff;
    y(b) -= diff;
  }
}

}  // namespace

double algebraic_connectivity(const Graph& g, const LanczosOptions& opts) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n < 2) throw Error(ErrorKind::invalid_size, "algebraic connectivity needs n >= 2");
  if (!diagnose(g).connected) return 0.0;
  const Eigen::Index r = n - 1;  // ground the last vertex

  const double density = 2.0 * static_cast<double>(g.edge_count()) / (static_cast<double>(n) * static_cast<double>(n));
  Operator pinv;
  if (density > 0.1 || n <= 200) {
    Eigen::MatrixXd grounded = laplacian(g).topLeftCorner(r, r);
    auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(grounded);
    if (llt->info() != Eigen::Success) throw Error(ErrorKind::invalid_graph, "grounded laplacian is not positive definite");
    pinv = [llt, r](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.resize(r + 1);
      y.head(r) = llt->solve(x.head(r));
      y(r) = 0.0;
    };
  } else {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * g.edge_count() + static_cast<std::size_t>(n));
    for (const Edge& e : g.edges()) {
      const auto a = static_cast<Eigen::Index>(e.first);
      const auto b = static_cast<Eigen::Index>(e.second);
      if (a < r) trips.emplace_back(a, a, 1.0);
      if (b < r) trips.emplace_back(b, b, 1.0);
      if (a < r && b < r) {
        trips.emplace_back(a, b, -1.0);
        trips.emplace_back(b, a, -1.0);
      }
    }
    Eigen::SparseMatrix<double> grounded(r, r);
    grounded.setFromTriplets(trips.begin(), trips.end());
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(grounded);
    if (ldlt->info() != Eigen::Success) throw Error(ErrorKind::invalid_graph, "sparse factorisation of the grounded laplacian failed");
    pinv = [ldlt, r](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.resize(r + 1);
      y.head(r) = ldlt->solve(x.head(r));
      y(r) = 0.0;
    };
  }
  const double mu = lanczos_largest(pinv, n, opts);
  if (!(mu > 0.0)) throw Error(ErrorKind::invalid_graph, "lanczos failed to converge");
  return 1.0 / mu;
}

namespace {

double largest_laplacian_eig(const Graph& g) {
  Operator op = [&g](const Eigen::VectorXd& x, Eigen::VectorXd& y) { laplacian_apply(g, x, y); };
  return lanczos_largest(op, static_cast<Eigen::Index>(g.size()), LanczosOptions{});
}

}  // namespace

SpectralSummary spectral_summary(const Graph& g, const SpectralOptions& opts) {
  if (g.edge_count() == 0) throw Error(ErrorKind::empty_edge_set, "spectral summary: graph has no edges");
  if (!diagnose(g).connected) {
    throw Error(ErrorKind::disconnected_graph, "spectral summary: graph is disconnected, spectral gap is zero");
  }
  SpectralSummary s;
  s.vertex_count = g.size();
  s.edge_count = g.edge_count();
  const double m = static_cast<double>(g.edge_count());
  double beta_max = 0.0;
  if (!opts.force_iterative && g.size() <= opts.full_spectrum_limit) {
    s.laplacian_eigs = laplacian_spectrum(g);
    s.beta_second_smallest = s.laplacian_eigs[g.size() - 2];
    beta_max = s.laplacian_eigs.front();
  } else {
    s.beta_second_smallest = algebraic_connectivity(g);
    beta_max = largest_laplacian_eig(g);
  }
  s.lambda2_w2 = 1.0 - s.beta_second_smallest / (2.0 * m);
  s.lambda2_w1 = 1.0 - s.beta_second_smallest / m;
  s.gap_c = 1.0 - s.lambda2_w2;
  s.w1_spectral_radius_deflated = std::max(std::abs(s.lambda2_w1), std::abs(1.0 - beta_max / m));
  return s;
}

}  // namespace gosta
