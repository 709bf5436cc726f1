#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gosta {

/// n x d sample, one observation per row. Requires n >= 2, d >= 1, finite entries.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Eigen::MatrixXd rows);

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return rows_; }
  auto row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)); }

 private:
  Eigen::MatrixXd rows_;
};

/// Cell assignment per row, cells numbered from 1.
struct Partition {
  std::vector<int> assignment;

  std::size_t size() const noexcept { return assignment.size(); }
  int cell_count() const;
};

/// Design matrix with optional labels (-1/+1) and optional partition.
struct Dataset {
  DesignMatrix design;
  std::optional<std::vector<int>> labels;
  std::optional<Partition> partition;

  std::size_t size() const noexcept { return design.size(); }
};

/// A symmetric pairwise kernel evaluated by row index. Kernels that depend
/// on side information (partition, labels) capture it at construction.
struct KernelSpec {
  std::string name;
  std::function<double(const DesignMatrix&, std::size_t, std::size_t)> eval;
  /// Row count the captured side information was built for; 0 if any.
  std::size_t required_rows = 0;
};

KernelSpec zero_kernel();
KernelSpec constant_kernel(double c);  // c off the diagonal, 0 on it
KernelSpec euclidean_kernel();         // ||x - y||
KernelSpec variance_kernel();          // ||x - y||^2 / 2
KernelSpec scatter_kernel(const Partition& p);
KernelSpec auc_kernel(std::span<const double> theta, std::span<const int> labels);

/// Exact AUC of the linear scorer theta on labelled data; ties count as
/// misordered. Throws for single-class data.
double auc_value(std::span<const double> theta, const DesignMatrix& x, std::span<const int> labels);

/// n^2 / (4 n+ n-): converts the U-statistic of auc_kernel into AUC.
double auc_normalization(std::span<const int> labels);

/// Difference between the positive and negative class means.
std::vector<double> class_mean_difference(const DesignMatrix& x, std::span<const int> labels);

struct KernelBuildOptions {
  /// Above this n the matrix is not materialised and entries are evaluated
  /// on demand.
  std::size_t dense_limit = 4000;
};

/// Pairwise kernel values H(X_i, X_j) with the statistics every protocol and
/// bound needs. Symmetric with zero diagonal.
class KernelMatrix {
 public:
  KernelMatrix() = default;

  /// Wraps an explicit matrix. Symmetry is always required; the zero
  /// diagonal check can be relaxed for analytical test fixtures.
  static KernelMatrix from_dense(Eigen::MatrixXd h, bool require_zero_diagonal = true);

  std::size_t size() const noexcept { return n_; }
  bool is_dense() const noexcept { return dense_.size() > 0 || n_ == 0; }
  const Eigen::MatrixXd& dense() const;
  double operator()(std::size_t i, std::size_t j) const {
    if (!lazy_) return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return i == j ? 0.0 : lazy_(*data_, i, j);
  }

  double u_stat() const noexcept { return u_stat_; }
  const Eigen::VectorXd& row_means() const noexcept { return row_means_; }
  /// ||H - h_bar 1^T||_F
  double frob_centered() const noexcept { return frob_centered_; }
  /// ||h_bar - U 1||_2
  double vec_centered() const noexcept { return vec_centered_; }
  /// ||H||_F
  double frob() const noexcept { return frob_; }

  /// Scaled copy (s * H); dense matrices only.
  KernelMatrix scaled(double s) const;

 private:
  friend KernelMatrix build_kernel_matrix(const KernelSpec&, const DesignMatrix&, const KernelBuildOptions&);
  void finalize_statistics();

  std::size_t n_ = 0;
  Eigen::MatrixXd dense_;
  std::function<double(const DesignMatrix&, std::size_t, std::size_t)> lazy_;
  std::shared_ptr<const DesignMatrix> data_;
  double u_stat_ = 0.0;
  Eigen::VectorXd row_means_;
  double frob_centered_ = 0.0;
  double vec_centered_ = 0.0;
  double frob_ = 0.0;
};

KernelMatrix build_kernel_matrix(const KernelSpec& kernel, const DesignMatrix& data,
                                 const KernelBuildOptions& opts = {});

/// Resolves a kernel by name against a dataset: zero, euclidean, variance,
/// scatter (needs a partition), auc (needs labels; theta = class mean difference).
KernelSpec named_kernel(const std::string& name, const Dataset& data);

}  // namespace gosta
