#include "hose/tensor.hpp"

#include <cmath>

namespace hose {

Index DenseTensor::checked_size(const std::vector<int>& dims) {
  if (dims.empty()) {
    throw Error(ErrorCode::ShapeError, "tensor order must be at least 1");
  }
  Index n = 1;
  for (int d : dims) {
    if (d < 1) {
      throw Error(ErrorCode::ShapeError, "all dimensions must be positive");
    }
    n *= d;
    if (n > kMaxElements) {
      throw Error(ErrorCode::CapacityError,
                  "tensor exceeds the element capacity of this library");
    }
  }
  return n;
}

Index DenseTensor::offset(const std::vector<int>& idx) const {
  Index off = 0;
  Index stride = 1;
  for (size_t k = 0; k < dims_.size(); ++k) {
    off += stride * idx[k];
    stride *= dims_[k];
  }
  return off;
}

std::vector<Index> DenseTensor::strides() const {
  std::vector<Index> s(dims_.size());
  Index stride = 1;
  for (size_t k = 0; k < dims_.size(); ++k) {
    s[k] = stride;
    stride *= dims_[k];
  }
  return s;
}

namespace {

void check_mode(const DenseTensor& t, int mode) {
  if (mode < 0 || mode >= t.order()) {
    throw Error(ErrorCode::InvalidMode, "mode out of range for tensor order");
  }
}

/// Column strides of the mode-k unfolding: J_n = prod of non-k dims before n.
std::vector<Index> unfold_col_strides(const std::vector<int>& dims, int mode) {
  std::vector<Index> j(dims.size(), 0);
  Index stride = 1;
  for (size_t n = 0; n < dims.size(); ++n) {
    if (static_cast<int>(n) == mode) continue;
    j[n] = stride;
    stride *= dims[n];
  }
  return j;
}

}  // namespace

DenseMatrix matricize(const DenseTensor& t, int mode) {
  check_mode(t, mode);
  const auto& dims = t.dims();
  const Index rows = dims[static_cast<size_t>(mode)];
  const Index cols = t.size() / rows;
  DenseMatrix m(rows, cols);

  const auto col_strides = unfold_col_strides(dims, mode);
  const int order = t.order();
  std::vector<int> idx(dims.size(), 0);
  Index col = 0;
  for (Index flat = 0; flat < t.size(); ++flat) {
    m(idx[static_cast<size_t>(mode)], col) = t[flat];
    for (int k = 0; k < order; ++k) {
      if (k != mode) col += col_strides[static_cast<size_t>(k)];
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
      if (k != mode) col -= col_strides[static_cast<size_t>(k)] * dims[static_cast<size_t>(k)];
    }
  }
  return m;
}

DenseTensor dematricize(const DenseMatrix& m, int mode, const std::vector<int>& dims) {
  DenseTensor t(dims);
  check_mode(t, mode);
  const Index rows = dims[static_cast<size_t>(mode)];
  if (m.rows() != rows || m.cols() != t.size() / rows) {
    throw Error(ErrorCode::ShapeError, "matrix shape does not match unfolding of dims");
  }

  const auto col_strides = unfold_col_strides(dims, mode);
  const int order = t.order();
  std::vector<int> idx(dims.size(), 0);
  Index col = 0;
  for (Index flat = 0; flat < t.size(); ++flat) {
    t[flat] = m(idx[static_cast<size_t>(mode)], col);
    for (int k = 0; k < order; ++k) {
      if (k != mode) col += col_strides[static_cast<size_t>(k)];
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
      if (k != mode) col -= col_strides[static_cast<size_t>(k)] * dims[static_cast<size_t>(k)];
    }
  }
  return t;
}

DenseTensor mode_multiply(const DenseTensor& t, const DenseMatrix& a, int mode) {
  check_mode(t, mode);
  if (a.cols() != t.dim(mode)) {
    throw Error(ErrorCode::ShapeError, "matrix columns must match the mode dimension");
  }
  DenseMatrix product = a * matricize(t, mode);
  std::vector<int> new_dims = t.dims();
  new_dims[static_cast<size_t>(mode)] = static_cast<int>(a.rows());
  return dematricize(product, mode, new_dims);
}

DenseTensor tucker_product(const std::vector<DenseMatrix>& factors, const DenseTensor& t) {
  if (static_cast<int>(factors.size()) != t.order()) {
    throw Error(ErrorCode::ShapeError, "one factor matrix per mode is required");
  }
  DenseTensor out = t;
  for (int k = 0; k < t.order(); ++k) {
    out = mode_multiply(out, factors[static_cast<size_t>(k)], k);
  }
  return out;
}

double frobenius_norm_sq(const DenseTensor& t) {
  double sum = 0.0;
  for (Index i = 0; i < t.size(); ++i) sum += t[i] * t[i];
  return sum;
}

double frobenius_norm(const DenseTensor& t) { return std::sqrt(frobenius_norm_sq(t)); }

namespace {
void check_same_dims(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) {
    throw Error(ErrorCode::ShapeError, "tensors must have identical dimensions");
  }
}
}  // namespace

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a, b);
  DenseTensor out = a;
  for (Index i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a, b);
  DenseTensor out = a;
  for (Index i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

DenseTensor scale(const DenseTensor& a, double factor) {
  DenseTensor out = a;
  for (Index i = 0; i < out.size(); ++i) out[i] *= factor;
  return out;
}

double squared_distance(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a, b);
  double sum = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace hose
