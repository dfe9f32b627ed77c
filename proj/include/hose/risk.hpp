#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hose/hosvd.hpp"
#include "hose/shrinkage.hpp"
#include "hose/tensor.hpp"

namespace hose {

/// Unbiased risk estimate of an estimator at the observed tensor:
///   sure = fit + 2 tau2 * divergence - p tau2,
///   gsure = fit / (1 - divergence/p)^2   (absent when divergence >= p).
struct RiskEstimate {
  double fit = 0.0;         // ||t(x) - x||^2
  double divergence = 0.0;  // sum_i d t_i / d x_i
  double sure = 0.0;
  std::optional<double> gsure;
  double tau2 = 0.0;
};

/// Plan-independent quantities for evaluating divergences of spectral
/// estimators of one decomposition: the squared core, the coupling array
/// c_array, and per-mode spectral sums. Building a workspace costs
/// O(p * sum_k p_k); each divergence evaluation then costs O(p * K^2).
class DivergenceWorkspace {
 public:
  explicit DivergenceWorkspace(const HosvdDecomposition& d);

  const HosvdDecomposition& decomposition() const { return *decomposition_; }
  const DenseTensor& c_array() const { return c_array_; }

  /// Closed-form divergence of the spectral estimator given by the plan.
  /// Uses the diagonal-Jacobian derivative of each mode rule, which equals
  /// the scalar derivative for elementwise families. Throws ThresholdAtKink
  /// when a mode singular value sits on a thresholding kink.
  double divergence(const ShrinkagePlan& plan) const;

  /// Divergence of elementwise core shrinkage with soft-threshold level
  /// lambda.
  double divergence_core(const CoreShrinkagePlan& plan) const;

  /// Fit term of the plan computed in core coordinates:
  /// sum_i (c prod_k f/sigma - 1)^2 S_i^2. Used by the tuners; equals the
  /// tensor-space fit up to rounding.
  double fit_core(const ShrinkagePlan& plan) const;

  /// SURE-minimizing overall scale (b - d - e)/a for the plan's shrinkage
  /// rules, summing over the active entries (all mode rules positive).
  /// Throws EmptyActiveSet when everything is thresholded away.
  double closed_form_scale(const ShrinkagePlan& plan, double tau2) const;

  Index total_size() const { return c_array_.size(); }

  const std::vector<double>& core_sq() const { return core_sq_; }

  /// Per-entry divergence weight of truncation plans:
  /// w_i = c_array_i + S_i^2 sum_k 1/sigma_{i_k}^2. The divergence of the
  /// truncation to ranks (r_0,...,r_{K-1}) is the sum of w over the kept
  /// corner, and its fit is the squared core mass outside it.
  std::vector<double> truncation_divergence_weights() const;

 private:
  struct ModeTables {
    Eigen::VectorXd sigma;         // mode singular values
    Eigen::VectorXd sigma_sq;
    Eigen::VectorXd inv_sigma_sq;
    // sum_{m != a} 1 / (sigma_m^2 - sigma_a^2)
    Eigen::VectorXd pair_inv_sum;
  };

  void check_kinks(const ShrinkagePlan& plan) const;

  const HosvdDecomposition* decomposition_;
  std::vector<ModeTables> modes_;
  std::vector<Index> strides_;
  std::vector<double> core_sq_;        // S^2, flat
  std::vector<double> fiber_sum_;      // sum_k sum_{j != i_k} S^2[..j..] / (sig_{i_k}^2 - sig_j^2)
  std::vector<double> inv_sq_sum_;     // sum_k 1/sig_{i_k}^2, flat
  std::vector<double> pair_inv_total_; // sum_k sum_{j != i_k} 1/(sig_{i_k}^2 - sig_j^2), flat
  DenseTensor c_array_;
};

/// Closed-form divergence of c (U . f(D) D^-1 . S); valid for every family
/// (the Stein and improved Efron-Morris rules enter through the diagonal of
/// their spectrum Jacobian).
double divergence_spectral(const HosvdDecomposition& d, const ShrinkagePlan& plan);

/// Alias of divergence_spectral kept for families whose rules couple a whole
/// mode spectrum; the two entry points share one engine, and they coincide
/// exactly for elementwise rules.
double divergence_full_spectrum(const HosvdDecomposition& d, const ShrinkagePlan& plan);

/// Central finite-difference divergence oracle:
/// sum_i [t(x + eps e_i)_i - t(x - eps e_i)_i] / (2 eps).
double divergence_fd(const DenseTensor& x,
                     const std::function<DenseTensor(const DenseTensor&)>& estimator,
                     double eps);

/// SURE of a spectral plan at the observed tensor x (x must be the tensor
/// that d decomposes). The fit term is computed in tensor space against x.
RiskEstimate sure_spectral(const DenseTensor& x, const HosvdDecomposition& d,
                           const ShrinkagePlan& plan, double tau2);

/// SURE of elementwise core shrinkage at the observed tensor x.
RiskEstimate sure_core_shrinkage(const DenseTensor& x, const HosvdDecomposition& d,
                                 const CoreShrinkagePlan& plan, double tau2);

/// Divergence of the matrix spectral estimator U f(D) V^T of a rows x cols
/// matrix with simple positive spectrum sigma (length min(rows, cols)):
///   sum_i f'_i + |rows - cols| sum_i f_i/sigma_i
///   + 2 sum_{i != j} sigma_i f_i / (sigma_i^2 - sigma_j^2).
double divergence_matrix(const Eigen::VectorXd& sigma, Index rows, Index cols,
                         const SpectralFunction& f);

/// SURE of the matrix spectral estimator; the fit term is
/// sum_i (f_i - sigma_i)^2 and p = rows * cols.
RiskEstimate sure_matrix(const Eigen::VectorXd& sigma, Index rows, Index cols,
                         const SpectralFunction& f, double tau2);

/// Assembles fit + 2 tau2 div - p tau2 and the GSURE ratio.
RiskEstimate make_risk_estimate(double fit, double divergence, Index p, double tau2);

}  // namespace hose
