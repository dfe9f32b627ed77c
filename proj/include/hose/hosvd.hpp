#pragma once

#include <vector>

#include "hose/tensor.hpp"

namespace hose {

struct HosvdOptions {
  /// A mode spectrum is rejected as rank deficient when its smallest
  /// singular value is <= zero_rtol * largest.
  double zero_rtol = 1e-10;
  /// A mode spectrum is rejected as degenerate when two squared singular
  /// values differ by <= tie_rtol * largest^2. The divergence formulas
  /// divide by those differences, so ties are refused up front.
  double tie_rtol = 1e-10;
};

/// Higher-order SVD of a tensor with full multilinear rank:
///   x = (U_0,...,U_{K-1}) . core,  core all-orthogonal,
/// together with the reparameterized form
///   x = (U_0,...,U_{K-1}) . (D_0,...,D_{K-1}) . normalized_core,
/// where D_k = diag(mode_singular_values[k]).
struct HosvdDecomposition {
  std::vector<DenseMatrix> factors;                  // U_k, each p_k x p_k orthogonal
  std::vector<Eigen::VectorXd> mode_singular_values; // nonincreasing, strictly positive
  DenseTensor core;                                  // S
  DenseTensor normalized_core;                       // V = (D_0^-1,...,D_{K-1}^-1) . S

  const std::vector<int>& dims() const { return core.dims(); }
  int order() const { return core.order(); }
};

/// Computes the HOSVD from one SVD per mode unfolding. Requires
/// p_k <= p/p_k for every mode so that full multilinear rank is possible;
/// throws RankDeficient or DegenerateSpectrum per HosvdOptions.
///
/// Factor column signs are fixed deterministically: the largest-magnitude
/// entry of each column is made positive (ties broken by lowest row index),
/// so repeat calls are bit-for-bit identical.
HosvdDecomposition hosvd(const DenseTensor& t, const HosvdOptions& options = {});

/// Tucker product of the factors with the core.
DenseTensor reconstruct(const HosvdDecomposition& d);

/// Singular values of every mode unfolding, nonincreasing, with no validity
/// checks (zero and tied values allowed). Vector k has length
/// min(p_k, p/p_k).
std::vector<Eigen::VectorXd> mode_singular_values(const DenseTensor& t);

/// Mode-k rank = number of mode-k singular values > tol * largest.
std::vector<int> multilinear_rank(const DenseTensor& t, double tol);

}  // namespace hose
