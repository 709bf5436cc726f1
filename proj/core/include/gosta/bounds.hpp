#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gosta/engines.hpp"
#include "gosta/graph.hpp"
#include "gosta/kernels.hpp"
#include "gosta/spectral.hpp"

namespace gosta {

/// (1/(ct)) vec + (2/(ct) + e^{-ct}) frob, with c = 1 - lambda_2(W_2).
/// Throws Error(hypothesis_violated) when c <= 0 and invalid_parameter for t < 1.
double theorem1_bound(double gap_c, double vec_centered, double frob_centered, double t);
double theorem1_bound(const Graph& g, const KernelMatrix& h, double t);

/// (sqrt(n)/t) (2/(1 - l) vec + 1/(1 - l^2) frob) with l = lambda_2(W_1) = 1 - 2c.
double u2_bound(double gap_c, std::size_t n, double vec_centered, double frob_centered, double t);
double u2_bound(const Graph& g, const KernelMatrix& h, double t);

struct AsyncConstants {
  double p_bar = 0.0;  ///< min_k d_k / m, the smallest per-iteration activation probability
  double t_c = 0.0;    ///< 1 / p_bar
  double beta = 0.0;   ///< algebraic connectivity
  double edge_count = 0.0;
  /// (1 - 1/t) - (beta / (2m)) (1 - 1/(p_bar t))
  double mu_r(double t) const;
};

AsyncConstants async_constants(const Graph& g);

enum class RateModel { inv_t, logt_over_t, exp };

std::string_view to_string(RateModel m) noexcept;
RateModel parse_rate_model(std::string_view name);

struct RateFit {
  RateModel model = RateModel::inv_t;
  /// Least-squares constant: in log space when every error is positive,
  /// plain least squares otherwise.
  double k = 0.0;
  /// Decay rate, exp model only (err ~ k e^{-rate t}).
  double rate = 0.0;
  /// ||k model - err|| / ||err|| over the fitted points.
  double residual = 0.0;
  /// Smallest constant with k_envelope * model(t) >= err(t) at every fitted
  /// point with t >= envelope_from (uses the fitted rate for exp).
  double k_envelope = 0.0;
  /// Shape of the model at t without the constant: 1/t, log t / t or e^{-rate t}.
  double model_value(double t) const;
};

/// Fits err(t) ~ K model(t) over the points with t >= 2. Needs at least five
/// such points.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& err, RateModel model,
                 double envelope_from = 0.0);

struct BoundConstantsReport {
  double gap_c = 0.0;
  double lambda2_w1 = 0.0;
  double lambda2_w2 = 0.0;
  double p_bar = 0.0;
  double t_c = 0.0;
  double vec_centered = 0.0;
  double frob_centered = 0.0;
};

struct BoundReport {
  Protocol protocol = Protocol::gosta_sync;
  std::vector<std::uint64_t> t_grid;
  std::vector<double> actual_err;  ///< ||E[Z(t)] - U 1||_2 from the expectation oracle
  std::vector<double> bound_val;   ///< NaN where the bound does not apply
  BoundConstantsReport constants;
  /// gosta_async only: the log t / t fit that supplies bound_val.
  RateFit fit;
};

/// gosta_sync: theorem1_bound; u2: u2_bound; gosta_async:
/// fitted K log t / t envelope for t >= t_c.
BoundReport bound_report(Protocol p, const Graph& g, const KernelMatrix& h,
                         const std::vector<std::uint64_t>& checkpoints);

}  // namespace gosta
