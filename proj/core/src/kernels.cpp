#include "gosta/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "gosta/error.hpp"

namespace gosta {

DesignMatrix::DesignMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 2) throw Error(ErrorKind::invalid_data, "design matrix needs at least 2 observations");
  if (rows_.cols() < 1) throw Error(ErrorKind::invalid_data, "design matrix needs dimension >= 1");
  if (!rows_.allFinite()) throw Error(ErrorKind::invalid_data, "design matrix contains non-finite entries");
}

int Partition::cell_count() const {
  return assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end());
}

KernelSpec zero_kernel() {
  return {"zero", [](const DesignMatrix&, std::size_t, std::size_t) { return 0.0; }, 0};
}

KernelSpec constant_kernel(double c) {
  return {"constant", [c](const DesignMatrix&, std::size_t i, std::size_t j) { return i == j ? 0.0 : c; }, 0};
}

KernelSpec euclidean_kernel() {
  return {"euclidean",
          [](const DesignMatrix& x, std::size_t i, std::size_t j) { return (x.row(i) - x.row(j)).norm(); }, 0};
}

KernelSpec variance_kernel() {
  return {"variance",
          [](const DesignMatrix& x, std::size_t i, std::size_t j) {
            return 0.5 * (x.row(i) - x.row(j)).squaredNorm();
          },
          0};
}

KernelSpec scatter_kernel(const Partition& p) {
  if (p.assignment.empty()) throw Error(ErrorKind::invalid_data, "scatter kernel: empty partition");
  for (int cell : p.assignment) {
    if (cell < 1) throw Error(ErrorKind::invalid_data, "scatter kernel: partition cells are numbered from 1");
  }
  auto cells = std::make_shared<const std::vector<int>>(p.assignment);
  return {"scatter",
          [cells](const DesignMatrix& x, std::size_t i, std::size_t j) {
            if ((*cells)[i] != (*cells)[j]) return 0.0;
            return (x.row(i) - x.row(j)).norm();
          },
          p.assignment.size()};
}

namespace {

void check_labels(std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l == 1) ++pos;
    else if (l == -1) ++neg;
    else throw Error(ErrorKind::invalid_data, "labels must be -1 or +1");
  }
  if (pos == 0 || neg == 0) throw Error(ErrorKind::invalid_data, "AUC needs at least one positive and one negative label");
}

std::vector<double> scores(std::span<const double> theta, const DesignMatrix& x) {
  if (theta.size() != x.dim()) {
    throw Error(ErrorKind::invalid_parameter, "theta has dimension " + std::to_string(theta.size()) +
                                                  ", data has " + std::to_string(x.dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const Eigen::VectorXd s = x.matrix() * t;
  return {s.data(), s.data() + s.size()};
}

}  // namespace

KernelSpec auc_kernel(std::span<const double> theta, std::span<const int> labels) {
  check_labels(labels);
  auto th = std::make_shared<const Eigen::VectorXd>(
      Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
  auto lab = std::make_shared<const std::vector<int>>(labels.begin(), labels.end());
  return {"auc",
          [th, lab](const DesignMatrix& x, std::size_t i, std::size_t j) {
            const double li = (*lab)[i], lj = (*lab)[j];
            const double weight = 1.0 - li * lj;
            if (weight == 0.0) return 0.0;
            const double si = x.row(i).dot(*th), sj = x.row(j).dot(*th);
            return li * si > -lj * sj ? weight : 0.0;
          },
          labels.size()};
}

double auc_normalization(std::span<const int> labels) {
  check_labels(labels);
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(labels.size()) - pos;
  const double n = static_cast<double>(labels.size());
  return n * n / (4.0 * pos * neg);
}

double auc_value(std::span<const double> theta, const DesignMatrix& x, std::span<const int> labels) {
  check_labels(labels);
  if (labels.size() != x.size()) throw Error(ErrorKind::invalid_data, "label count does not match the data");
  const std::vector<double> s = scores(theta, x);
  // Count positive/negative pairs ordered correctly; ties do not count.
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < s.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(s[i]);
  std::sort(neg.begin(), neg.end());
  double correct = 0.0;
  for (double sp : pos) {
    correct += static_cast<double>(std::lower_bound(neg.begin(), neg.end(), sp) - neg.begin());
  }
  return correct / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<double> class_mean_difference(const DesignMatrix& x, std::span<const int> labels) {
  check_labels(labels);
  if (labels.size() != x.size()) throw Error(ErrorKind::invalid_data, "label count does not match the data");
  Eigen::VectorXd mp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.dim()));
  Eigen::VectorXd mn = mp;
  double np = 0, nn = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (labels[i] == 1) {
      mp += x.row(i).transpose();
      np += 1;
    } else {
      mn += x.row(i).transpose();
      nn += 1;
    }
  }
  const Eigen::VectorXd diff = mp / np - mn / nn;
  return {diff.data(), diff.data() + diff.size()};
}

KernelMatrix KernelMatrix::from_dense(Eigen::MatrixXd h, bool require_zero_diagonal) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::invalid_data, "kernel matrix must be square");
  if (!h.allFinite()) throw Error(ErrorKind::invalid_data, "kernel matrix has non-finite entries");
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    if (require_zero_diagonal && h(i, i) != 0.0) {
      throw Error(ErrorKind::invalid_data, "kernel matrix must have a zero diagonal");
    }
    for (Eigen::Index j = i + 1; j < h.cols(); ++j) {
      if (h(i, j) != h(j, i)) throw Error(ErrorKind::invalid_data, "kernel matrix must be symmetric");
    }
  }
  KernelMatrix k;
  k.n_ = static_cast<std::size_t>(h.rows());
  k.dense_ = std::move(h);
  k.finalize_statistics();
  return k;
}

const Eigen::MatrixXd& KernelMatrix::dense() const {
  if (lazy_) {
    throw Error(ErrorKind::size_cap_exceeded,
                "kernel matrix with n = " + std::to_string(n_) + " is evaluated on demand and has no dense form");
  }
  return dense_;
}

KernelMatrix KernelMatrix::scaled(double s) const {
  return from_dense(s * dense(), false);
}

void KernelMatrix::finalize_statistics() {
  const auto n = static_cast<Eigen::Index>(n_);
  row_means_.setZero(n);
  double frob_c2 = 0.0, frob2 = 0.0;
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lazy_) {
      for (Eigen::Index j = 0; j < n; ++j) row(j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    } else {
      row = dense_.row(i).transpose();
    }
    const double mean = row.mean();
    row_means_(i) = mean;
    frob_c2 += (row.array() - mean).square().sum();
    frob2 += row.squaredNorm();
  }
  u_stat_ = n > 0 ? row_means_.mean() : 0.0;
  frob_centered_ = std::sqrt(frob_c2);
  frob_ = std::sqrt(frob2);
  vec_centered_ = n > 0 ? (row_means_.array() - u_stat_).matrix().norm() : 0.0;
}

KernelMatrix build_kernel_matrix(const KernelSpec& kernel, const DesignMatrix& data, const KernelBuildOptions& opts) {
  if (!kernel.eval) throw Error(ErrorKind::invalid_parameter, "kernel '" + kernel.name + "' has no evaluator");
  if (kernel.required_rows != 0 && kernel.required_rows != data.size()) {
    throw Error(ErrorKind::invalid_data, "kernel '" + kernel.name + "' was built for " +
                                             std::to_string(kernel.required_rows) + " rows, data has " +
                                             std::to_string(data.size()));
  }
  KernelMatrix k;
  k.n_ = data.size();
  const auto n = static_cast<Eigen::Index>(k.n_);
  if (k.n_ > opts.dense_limit) {
    k.lazy_ = kernel.eval;
    k.data_ = std::make_shared<const DesignMatrix>(data);
    // Spot-check finiteness along the first row; full statistics below touch
    // every entry anyway.
    k.finalize_statistics();
    if (!std::isfinite(k.u_stat_)) throw Error(ErrorKind::invalid_data, "kernel produced a non-finite value");
    return k;
  }

  k.dense_.setZero(n, n);
  auto fill_rows = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        k.dense_(i, j) = kernel.eval(data, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  };
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (n >= 512 && threads > 1) {
    std::vector<std::jthread> pool;
    // Rows have decreasing work; interleave blocks so the load is balanced.
    const Eigen::Index block = 16;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (Eigen::Index b = static_cast<Eigen::Index>(t) * block; b < n; b += static_cast<Eigen::Index>(threads) * block) {
          fill_rows(b, std::min(n, b + block));
        }
      });
    }
  } else {
    fill_rows(0, n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = k.dense_(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::invalid_data, "kernel '" + kernel.name + "' produced a non-finite value at (" +
                                                 std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
      }
      k.dense_(j, i) = v;
    }
  }
  k.finalize_statistics();
  return k;
}

KernelSpec named_kernel(const std::string& name, const Dataset& data) {
  if (name == "zero") return zero_kernel();
  if (name == "euclidean" || name == "gini") return euclidean_kernel();
  if (name == "variance") return variance_kernel();
  if (name == "scatter") {
    if (!data.partition) throw Error(ErrorKind::missing_input, "kernel 'scatter' needs a partition");
    if (data.partition->size() != data.size()) throw Error(ErrorKind::invalid_data, "partition size does not match the data");
    return scatter_kernel(*data.partition);
  }
  if (name == "auc") {
    if (!data.labels) throw Error(ErrorKind::missing_input, "kernel 'auc' needs labels");
    if (data.labels->size() != data.size()) throw Error(ErrorKind::invalid_data, "label count does not match the data");
    const auto theta = class_mean_difference(data.design, *data.labels);
    return auc_kernel(theta, *data.labels);
  }
  throw Error(ErrorKind::invalid_parameter,
              "unknown kernel '" + name + "' (expected zero, euclidean, variance, scatter, auc)");
}

}  // namespace gosta
