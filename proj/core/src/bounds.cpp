#include "gosta/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gosta/error.hpp"
#include "gosta/expectation.hpp"

namespace gosta {

namespace {

void check_bound_args(double gap_c, double t) {
  if (!(gap_c > 0.0)) {
    throw Error(ErrorKind::hypothesis_violated, "spectral gap is not positive; the graph must be connected");
  }
  if (!(t >= 1.0)) throw Error(ErrorKind::invalid_parameter, "bounds are defined for t >= 1");
}

}  // namespace

double theorem1_bound(double gap_c, double vec_centered, double frob_centered, double t) {
  check_bound_args(gap_c, t);
  const double ct = gap_c * t;
  return vec_centered / ct + (2.0 / ct + std::exp(-ct)) * frob_centered;
}

double theorem1_bound(const Graph& g, const KernelMatrix& h, double t) {
  return theorem1_bound(spectral_summary(g).gap_c, h.vec_centered(), h.frob_centered(), t);
}

double u2_bound(double gap_c, std::size_t n, double vec_centered, double frob_centered, double t) {
  check_bound_args(gap_c, t);
  const double lambda = 1.0 - 2.0 * gap_c;
  return std::sqrt(static_cast<double>(n)) / t *
         (2.0 / (1.0 - lambda) * vec_centered + 1.0 / (1.0 - lambda * lambda) * frob_centered);
}

double u2_bound(const Graph& g, const KernelMatrix& h, double t) {
  return u2_bound(spectral_summary(g).gap_c, g.size(), h.vec_centered(), h.frob_centered(), t);
}

double AsyncConstants::mu_r(double t) const {
  return (1.0 - 1.0 / t) - beta / (2.0 * edge_count) * (1.0 - 1.0 / (p_bar * t));
}

AsyncConstants async_constants(const Graph& g) {
  const SpectralSummary s = spectral_summary(g);
  const std::vector<std::size_t> deg = g.degrees();
  AsyncConstants a;
  a.edge_count = static_cast<double>(g.edge_count());
  a.p_bar = static_cast<double>(*std::min_element(deg.begin(), deg.end())) / a.edge_count;
  a.t_c = 1.0 / a.p_bar;
  a.beta = s.beta_second_smallest;
  return a;
}

std::string_view to_string(RateModel m) noexcept {
  switch (m) {
    case RateModel::inv_t: return "inv_t";
    case RateModel::logt_over_t: return "logt_over_t";
    case RateModel::exp: return "exp";
  }
  return "unknown";
}

RateModel parse_rate_model(std::string_view name) {
  for (RateModel m : {RateModel::inv_t, RateModel::logt_over_t, RateModel::exp}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorKind::invalid_parameter, "unknown rate model '" + std::string(name) + "'");
}

double RateFit::model_value(double t) const {
  switch (model) {
    case RateModel::inv_t: return 1.0 / t;
    case RateModel::logt_over_t: return std::log(t) / t;
    case RateModel::exp: return std::exp(-rate * t);
  }
  return 0.0;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& err, RateModel model,
                 double envelope_from) {
  if (t.size() != err.size()) throw Error(ErrorKind::invalid_size, "fit_rate: t and err differ in length");
  std::vector<double> ts, es;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= 2.0) {
      if (!std::isfinite(err[i]) || err[i] < 0.0) {
        throw Error(ErrorKind::invalid_data, "fit_rate: errors must be finite and non-negative");
      }
      ts.push_back(t[i]);
      es.push_back(err[i]);
    }
  }
  if (ts.size() < 5) throw Error(ErrorKind::invalid_parameter, "fit_rate needs at least 5 points with t >= 2");

  RateFit fit;
  fit.model = model;
  if (std::all_of(es.begin(), es.end(), [](double e) { return e == 0.0; })) return fit;

  const bool positive = std::all_of(es.begin(), es.end(), [](double e) { return e > 0.0; });
  const auto count = static_cast<double>(ts.size());
  if (model == RateModel::exp) {
    if (!positive) throw Error(ErrorKind::invalid_data, "fit_rate: the exp model needs positive errors");
    // log err = a - rate * t
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double y = std::log(es[i]);
      st += ts[i];
      sy += y;
      stt += ts[i] * ts[i];
      sty += ts[i] * y;
    }
    const double slope = (count * sty - st * sy) / (count * stt - st * st);
    fit.rate = -slope;
    fit.k = std::exp((sy - slope * st) / count);
  } else if (positive) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) acc += std::log(es[i]) - std::log(fit.model_value(ts[i]));
    fit.k = std::exp(acc / count);
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double m = fit.model_value(ts[i]);
      num += m * es[i];
      den += m * m;
    }
    fit.k = num / den;
  }

  double res2 = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double m = fit.model_value(ts[i]);
    res2 += std::pow(fit.k * m - es[i], 2);
    norm2 += es[i] * es[i];
    if (ts[i] >= envelope_from) fit.k_envelope = std::max(fit.k_envelope, es[i] / m);
  }
  fit.residual = std::sqrt(res2 / norm2);
  return fit;
}

BoundReport bound_report(Protocol p, const Graph& g, const KernelMatrix& h,
                         const std::vector<std::uint64_t>& checkpoints) {
  BoundReport r;
  r.protocol = p;
  const SpectralSummary s = spectral_summary(g);
  const AsyncConstants a = async_constants(g);
  r.constants = {s.gap_c, s.lambda2_w1, s.lambda2_w2, a.p_bar, a.t_c, h.vec_centered(), h.frob_centered()};

  ExpectedTrajectory traj;
  switch (p) {
    case Protocol::gosta_sync: traj = gosta_sync_expectation(g, h, checkpoints); break;
    case Protocol::u2: traj = u2_expectation(g, h, checkpoints); break;
    case Protocol::gosta_async: traj = gosta_async_expectation(g, h, checkpoints); break;
    default:
      throw Error(ErrorKind::invalid_parameter,
                  "bounds are available for gosta_sync, u2 and gosta_async, not " + std::string(to_string(p)));
  }
  r.t_grid = traj.t;
  for (const Eigen::VectorXd& z : traj.mean) r.actual_err.push_back((z - traj.target).norm());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (p == Protocol::gosta_async) {
    std::vector<double> td(r.t_grid.begin(), r.t_grid.end());
    r.fit = fit_rate(td, r.actual_err, RateModel::logt_over_t, a.t_c);
    for (double t : td) r.bound_val.push_back(t >= a.t_c && t >= 2.0 ? r.fit.k_envelope * r.fit.model_value(t) : nan);
    return r;
  }
  for (std::uint64_t t : r.t_grid) {
    if (t == 0) {
      r.bound_val.push_back(nan);
      continue;
    }
    const double td = static_cast<double>(t);
    r.bound_val.push_back(p == Protocol::gosta_sync
                              ? theorem1_bound(s.gap_c, h.vec_centered(), h.frob_centered(), td)
                              : u2_bound(s.gap_c, g.size(), h.vec_centered(), h.frob_centered(), td));
  }
  return r;
}

}  // namespace gosta
