#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hose/errors.hpp"

namespace hose {

/// Dense matrices are column-major throughout, matching the tensor layout
/// below (the mode-0 unfolding of a tensor is a plain reshape).
using DenseMatrix = Eigen::MatrixXd;
using Index = std::int64_t;

/// Dense K-way real array. Element (i_0,...,i_{K-1}) lives at flat offset
/// i_0 + p_0*(i_1 + p_1*(i_2 + ...)), i.e. the first index varies fastest.
/// Tensors are immutable values once built; all free functions below return
/// fresh tensors.
class DenseTensor {
 public:
  /// Largest number of elements accepted; this is a desk-scale library.
  static constexpr Index kMaxElements = 100'000'000;

  DenseTensor() = default;

  explicit DenseTensor(std::vector<int> dims)
      : dims_(std::move(dims)), values_(checked_size(dims_), 0.0) {}

  DenseTensor(std::vector<int> dims, std::vector<double> values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    if (static_cast<Index>(values_.size()) != checked_size(dims_)) {
      throw Error(ErrorCode::ShapeError,
                  "value count does not match dimension product");
    }
  }

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int mode) const { return dims_[static_cast<size_t>(mode)]; }
  Index size() const { return static_cast<Index>(values_.size()); }

  double operator[](Index flat) const { return values_[static_cast<size_t>(flat)]; }
  double& operator[](Index flat) { return values_[static_cast<size_t>(flat)]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  /// Flat offset of a zero-based multi-index.
  Index offset(const std::vector<int>& idx) const;
  double at(const std::vector<int>& idx) const { return values_[static_cast<size_t>(offset(idx))]; }
  double& at(const std::vector<int>& idx) { return values_[static_cast<size_t>(offset(idx))]; }

  /// Stride of each mode in the flat layout: stride[k] = prod_{m<k} p_m.
  std::vector<Index> strides() const;

 private:
  static Index checked_size(const std::vector<int>& dims);

  std::vector<int> dims_;
  std::vector<double> values_;
};

/// Mode-k unfolding: a p_k x (p/p_k) matrix where tensor element
/// (i_0,...,i_{K-1}) maps to row i_k and column sum_{n != k} i_n * J_n with
/// J_n the product of the preceding non-k dimensions. Mode 0 is a reshape of
/// the flat buffer.
DenseMatrix matricize(const DenseTensor& t, int mode);

/// Inverse of matricize for the given dimensions.
DenseTensor dematricize(const DenseMatrix& m, int mode, const std::vector<int>& dims);

/// Mode-k product: replaces the mode-k dimension p_k by a.rows() and
/// satisfies result_(k) = a * t_(k).
DenseTensor mode_multiply(const DenseTensor& t, const DenseMatrix& a, int mode);

/// Tucker product (a_0,...,a_{K-1}) . t applied mode by mode.
DenseTensor tucker_product(const std::vector<DenseMatrix>& factors, const DenseTensor& t);

double frobenius_norm_sq(const DenseTensor& t);
double frobenius_norm(const DenseTensor& t);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(const DenseTensor& a, double factor);

/// ||a - b||^2 accumulated in flat order.
double squared_distance(const DenseTensor& a, const DenseTensor& b);

}  // namespace hose
