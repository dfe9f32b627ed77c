#include "hose/hosvd.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace hose {

namespace {

/// Flip each column so its largest-magnitude entry is positive; ties break
/// toward the lowest row index.
void fix_column_signs(DenseMatrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = 0.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double mag = std::abs(u(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (u(arg, c) < 0.0) u.col(c) = -u.col(c);
  }
}

void check_spectrum(const Eigen::VectorXd& sigma, int mode, const HosvdOptions& options) {
  const double top = sigma(0);
  if (!(top > 0.0)) {
    throw Error(ErrorCode::RankDeficient,
                "mode " + std::to_string(mode) + " unfolding is zero");
  }
  if (sigma(sigma.size() - 1) <= options.zero_rtol * top) {
    throw Error(ErrorCode::RankDeficient,
                "mode " + std::to_string(mode) +
                    " unfolding is rank deficient; full multilinear rank is required");
  }
  const double tie_tol = options.tie_rtol * top * top;
  for (Eigen::Index i = 0; i + 1 < sigma.size(); ++i) {
    if (sigma(i) * sigma(i) - sigma(i + 1) * sigma(i + 1) <= tie_tol) {
      throw Error(ErrorCode::DegenerateSpectrum,
                  "mode " + std::to_string(mode) +
                      " has (near-)tied singular values; spectra must be simple");
    }
  }
}

}  // namespace

HosvdDecomposition hosvd(const DenseTensor& t, const HosvdOptions& options) {
  const int order = t.order();
  HosvdDecomposition d;
  d.factors.reserve(static_cast<size_t>(order));
  d.mode_singular_values.reserve(static_cast<size_t>(order));

  for (int k = 0; k < order; ++k) {
    const Index rows = t.dim(k);
    const Index cols = t.size() / rows;
    if (rows > cols) {
      throw Error(ErrorCode::RankDeficient,
                  "mode " + std::to_string(k) +
                      " dimension exceeds the product of the others; "
                      "full multilinear rank is impossible");
    }
    Eigen::JacobiSVD<DenseMatrix> svd(matricize(t, k), Eigen::ComputeThinU);
    DenseMatrix u = svd.matrixU();  // p_k x p_k since rows <= cols
    Eigen::VectorXd sigma = svd.singularValues();
    check_spectrum(sigma, k, options);
    fix_column_signs(u);
    d.factors.push_back(std::move(u));
    d.mode_singular_values.push_back(std::move(sigma));
  }

  // S = (U_0^T,...,U_{K-1}^T) . t
  DenseTensor core = t;
  for (int k = 0; k < order; ++k) {
    core = mode_multiply(core, d.factors[static_cast<size_t>(k)].transpose(), k);
  }
  d.core = std::move(core);

  // V = (D_0^-1,...,D_{K-1}^-1) . S, computed entrywise.
  DenseTensor v = d.core;
  const auto& dims = t.dims();
  std::vector<int> idx(dims.size(), 0);
  for (Index flat = 0; flat < v.size(); ++flat) {
    double denom = 1.0;
    for (int k = 0; k < order; ++k) {
      denom *= d.mode_singular_values[static_cast<size_t>(k)](idx[static_cast<size_t>(k)]);
    }
    v[flat] /= denom;
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
  d.normalized_core = std::move(v);
  return d;
}

DenseTensor reconstruct(const HosvdDecomposition& d) {
  return tucker_product(d.factors, d.core);
}

std::vector<Eigen::VectorXd> mode_singular_values(const DenseTensor& t) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(t.order()));
  for (int k = 0; k < t.order(); ++k) {
    Eigen::JacobiSVD<DenseMatrix> svd(matricize(t, k));
    out.push_back(svd.singularValues());
  }
  return out;
}

std::vector<int> multilinear_rank(const DenseTensor& t, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  std::vector<int> ranks;
  ranks.reserve(static_cast<size_t>(t.order()));
  for (const auto& sigma : mode_singular_values(t)) {
    const double cutoff = tol * sigma(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > cutoff) ++r;
    }
    ranks.push_back(r);
  }
  return ranks;
}

}  // namespace hose
