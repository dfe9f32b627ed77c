#pragma once

#include <vector>

#include "hose/tensor.hpp"
#include "hose/tuning.hpp"

namespace hose {

/// Per-cell empirical proportions with the trial counts behind them.
struct ProportionTensor {
  DenseTensor proportions;  // entries in [0, 1]
  DenseTensor counts;       // positive integers, same dims

  void validate() const;
};

/// Variance-stabilized data: sqrt(n) * asin(2 y - 1), approximately unit
/// variance Gaussian around sqrt(n) * asin(2 p - 1).
DenseTensor arcsine_transform(const ProportionTensor& pt);

/// Back to the probability scale: (sin(theta / sqrt(n)) + 1) / 2 with the
/// argument clamped to [-pi/2, pi/2].
DenseTensor arcsine_back_transform(const DenseTensor& theta, const DenseTensor& counts);

/// Main-effects decomposition x = mu + sum_k effect_k[i_k] + residual with
/// zero-sum effects; every mode unfolding of the residual has zero row sums.
struct AnovaDecomposition {
  double grand_mean = 0.0;
  std::vector<Eigen::VectorXd> main_effects;  // one zero-sum vector per mode
  DenseTensor residual;
};

AnovaDecomposition anova_decompose(const DenseTensor& x);

/// mu plus broadcast main effects (the fitted additive part).
DenseTensor anova_fit(const AnovaDecomposition& d);

enum class ResidualMethod { ModeSpecificSoft, TruncatedHosvd };

struct PipelineResult {
  DenseTensor fitted;            // additive fit + shrunken residual
  DenseTensor shrunk_residual;
  double residual_norm = 0.0;
  double shrunk_residual_norm = 0.0;
  TuningResult tuning;
};

/// Fits main effects, shrinks only the residual tensor with a SURE-tuned
/// estimator, and recombines.
PipelineResult shrink_residual_pipeline(const DenseTensor& x, ResidualMethod method,
                                        double tau2);

}  // namespace hose
