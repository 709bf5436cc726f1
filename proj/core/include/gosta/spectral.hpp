#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gosta/graph.hpp"

namespace gosta {

/// Expected one-step matrix of a gossip exchange with weight 1/alpha:
/// the average over E of I - (1/alpha)(e_i - e_j)(e_i - e_j)^T, which equals
/// I - L / (alpha * m) where m is the number of undirected edges.
/// alpha = 2 is pairwise averaging, alpha = 1 is a swap.
Eigen::MatrixXd w_alpha(const Graph& g, double alpha);

/// Laplacian eigenvalues in decreasing order (full symmetric decomposition).
std::vector<double> laplacian_spectrum(const Graph& g);

/// Eigenvalues of w_alpha obtained from the Laplacian spectrum,
/// lambda_i = 1 - beta_{n-i+1} / (alpha m), decreasing.
std::vector<double> w_alpha_eigs_via_lemma(const Graph& g, double alpha);

/// Same mapping applied to an already computed spectrum.
std::vector<double> w_alpha_eigs_from_laplacian(const std::vector<double>& laplacian_eigs,
                                                std::size_t edge_count, double alpha);

struct LanczosOptions {
  int max_iterations = 600;
  double tolerance = 1e-13;
};

/// Second smallest Laplacian eigenvalue (algebraic connectivity) of a
/// connected graph. Runs Lanczos on the pseudo-inverse of L, applied through
/// a sparse factorisation of the grounded Laplacian, so the wanted eigenvalue
/// is the dominant one and converges in a few dozen steps even on grids.
double algebraic_connectivity(const Graph& g, const LanczosOptions& opts = {});

struct SpectralSummary {
  std::vector<double> laplacian_eigs;  ///< decreasing; empty when skipped (large n)
  double beta_second_smallest = 0.0;   ///< beta_{n-1}
  double lambda2_w2 = 0.0;
  double lambda2_w1 = 0.0;
  double gap_c = 0.0;                  ///< 1 - lambda2_w2
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  /// max_{i >= 2} |lambda_i(W_1)|; contraction factor of W_1 on the complement of 1.
  double w1_spectral_radius_deflated = 0.0;
};

struct SpectralOptions {
  /// Above this size the full spectrum is skipped and beta_{n-1} comes from
  /// algebraic_connectivity().
  std::size_t full_spectrum_limit = 2000;
  bool force_iterative = false;
};

/// Throws Error(disconnected_graph) for disconnected input.
SpectralSummary spectral_summary(const Graph& g, const SpectralOptions& opts = {});

}  // namespace gosta
