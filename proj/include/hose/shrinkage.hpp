#pragma once

#include <optional>
#include <vector>

#include "hose/hosvd.hpp"
#include "hose/tensor.hpp"

namespace hose {

enum class ShrinkageFamily {
  Identity,
  Truncation,       // sigma_i * 1(i <= r)
  SoftThreshold,    // (sigma - lambda)_+  (lambda may be negative)
  HardThreshold,    // sigma * 1(sigma >= lambda)
  Stein,            // (1 - lambda / sum sigma^2) sigma
  EfronMorris,      // sigma - lambda / sigma
  ImprovedEfronMorris,  // (1 - gamma / sum sigma^2) sigma - lambda / sigma
  AdaptiveTrace,    // sigma (1 - lambda^gamma / sigma^gamma)_+
};

/// One mode's shrinkage rule: maps the vector of mode singular values to the
/// shrunken diagonal, and exposes the diagonal of the Jacobian of that map
/// (which is just the scalar derivative for the elementwise families). Stein
/// and improved Efron-Morris couple all entries of a mode's spectrum.
class SpectralFunction {
 public:
  static SpectralFunction identity();
  static SpectralFunction truncation(int rank);
  static SpectralFunction soft_threshold(double lambda);
  static SpectralFunction hard_threshold(double lambda);
  static SpectralFunction stein(double lambda);
  static SpectralFunction efron_morris(double lambda);
  static SpectralFunction improved_efron_morris(double gamma, double lambda);
  static SpectralFunction adaptive_trace(double lambda, double gamma);

  ShrinkageFamily family() const { return family_; }
  double lambda() const { return lambda_; }
  double gamma() const { return gamma_; }
  int rank() const { return rank_; }

  /// True when entry i of the output depends on entry i of the input only.
  bool elementwise() const;

  /// Threshold at which the rule has a derivative kink, if any.
  std::optional<double> kink_location() const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& sigma) const;
  Eigen::VectorXd derivative_diag(const Eigen::VectorXd& sigma) const;

 private:
  SpectralFunction(ShrinkageFamily family, double lambda, double gamma, int rank)
      : family_(family), lambda_(lambda), gamma_(gamma), rank_(rank) {}

  ShrinkageFamily family_;
  double lambda_ = 0.0;
  double gamma_ = 0.0;
  int rank_ = 0;
};

/// Per-mode shrinkage rules plus an overall scale. The induced estimator is
///   c * (U_0,...,U_{K-1}) . (f^0(D_0) D_0^-1, ..., f^{K-1}(D_{K-1}) D_{K-1}^-1) . S.
struct ShrinkagePlan {
  std::vector<SpectralFunction> per_mode;
  double scale = 1.0;

  int order() const { return static_cast<int>(per_mode.size()); }
};

ShrinkagePlan identity_plan(int order);
ShrinkagePlan soft_threshold_plan(const std::vector<double>& lambdas, double scale = 1.0);
ShrinkagePlan truncation_plan(const std::vector<int>& ranks);

/// Elementwise soft-threshold of every core entry:
/// g(s) = sign(s) (|s| - lambda)_+.
struct CoreShrinkagePlan {
  double lambda = 0.0;
};

/// Applies a shrinkage plan to a decomposition and returns the estimate.
DenseTensor apply_spectral(const HosvdDecomposition& d, const ShrinkagePlan& plan);

/// Truncation plan on every mode; the result has multilinear rank <= ranks.
DenseTensor truncated_hosvd(const HosvdDecomposition& d, const std::vector<int>& ranks);

/// Soft-thresholds each core entry and recomposes with the factors.
DenseTensor apply_core_shrinkage(const HosvdDecomposition& d, const CoreShrinkagePlan& plan);

/// Classical positive-part James-Stein estimator toward the origin:
/// (1 - (p-2) tau2 / ||x||^2)_+ x. Requires p >= 3.
DenseTensor james_stein(const DenseTensor& x, double tau2);

/// Matrix spectral estimator applied to the mode-0 unfolding: the unfolding
/// is shrunk as U f(D) V^T and folded back, leaving all other modes alone.
/// Only the EfronMorris and SoftThreshold families are supported here.
DenseTensor matrix_baseline(const DenseTensor& x, ShrinkageFamily family, double lambda);

}  // namespace hose
