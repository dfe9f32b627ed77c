#include "hose/relational.hpp"

#include <cmath>

#include "hose/hosvd.hpp"
#include "hose/shrinkage.hpp"

namespace hose {

namespace {
constexpr double kHalfPi = 1.57079632679489661923;
}

void ProportionTensor::validate() const {
  if (proportions.dims() != counts.dims()) {
    throw Error(ErrorCode::ShapeError, "proportions and counts must share dimensions");
  }
  for (Index i = 0; i < proportions.size(); ++i) {
    const double y = proportions[i];
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "proportions must lie in [0, 1]");
    }
    const double n = counts[i];
    if (!(n >= 1.0) || n != std::floor(n)) {
      throw Error(ErrorCode::InvalidArgument, "counts must be positive integers");
    }
  }
}

DenseTensor arcsine_transform(const ProportionTensor& pt) {
  pt.validate();
  DenseTensor out(pt.proportions.dims());
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(pt.counts[i]) * std::asin(2.0 * pt.proportions[i] - 1.0);
  }
  return out;
}

DenseTensor arcsine_back_transform(const DenseTensor& theta, const DenseTensor& counts) {
  if (theta.dims() != counts.dims()) {
    throw Error(ErrorCode::ShapeError, "theta and counts must share dimensions");
  }
  DenseTensor out(theta.dims());
  for (Index i = 0; i < out.size(); ++i) {
    double angle = theta[i] / std::sqrt(counts[i]);
    angle = std::min(std::max(angle, -kHalfPi), kHalfPi);
    out[i] = 0.5 * (std::sin(angle) + 1.0);
  }
  return out;
}

AnovaDecomposition anova_decompose(const DenseTensor& x) {
  const int order = x.order();
  if (order < 2) {
    throw Error(ErrorCode::InvalidArgument, "main-effects fit needs at least two modes");
  }
  const auto& dims = x.dims();
  const double p = static_cast<double>(x.size());

  AnovaDecomposition d;
  double total = 0.0;
  for (Index i = 0; i < x.size(); ++i) total += x[i];
  d.grand_mean = total / p;

  // Margin means: for each mode, the mean over all other indices.
  std::vector<Eigen::VectorXd> margins(static_cast<size_t>(order));
  const auto strides = x.strides();
  for (int k = 0; k < order; ++k) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(dims[static_cast<size_t>(k)]);
    const Index stride = strides[static_cast<size_t>(k)];
    const Index pk = dims[static_cast<size_t>(k)];
    for (Index flat = 0; flat < x.size(); ++flat) {
      sums((flat / stride) % pk) += x[flat];
    }
    margins[static_cast<size_t>(k)] = sums * (static_cast<double>(pk) / p);
    d.main_effects.push_back(margins[static_cast<size_t>(k)].array() - d.grand_mean);
  }

  // Residual = x - sum_k margin_k + (K-1) grand mean; its mode unfoldings
  // all have zero row sums and x = fit + residual.
  DenseTensor residual = x;
  const double back = static_cast<double>(order - 1) * d.grand_mean;
  for (Index flat = 0; flat < x.size(); ++flat) {
    double value = x[flat] + back;
    for (int k = 0; k < order; ++k) {
      value -= margins[static_cast<size_t>(k)]((flat / strides[static_cast<size_t>(k)]) %
                                               dims[static_cast<size_t>(k)]);
    }
    residual[flat] = value;
  }
  d.residual = std::move(residual);
  return d;
}

DenseTensor anova_fit(const AnovaDecomposition& d) {
  const auto& dims = d.residual.dims();
  DenseTensor fit(dims);
  const auto strides = fit.strides();
  for (Index flat = 0; flat < fit.size(); ++flat) {
    double value = d.grand_mean;
    for (size_t k = 0; k < dims.size(); ++k) {
      value += d.main_effects[k]((flat / strides[k]) % dims[k]);
    }
    fit[flat] = value;
  }
  return fit;
}

PipelineResult shrink_residual_pipeline(const DenseTensor& x, ResidualMethod method,
                                        double tau2) {
  const AnovaDecomposition d = anova_decompose(x);

  PipelineResult result;
  result.residual_norm = frobenius_norm(d.residual);

  // A (numerically) vanished residual has nothing to shrink; the additive
  // fit is the whole estimate.
  if (result.residual_norm <= 1e-12 * frobenius_norm(x)) {
    result.shrunk_residual = DenseTensor(d.residual.dims());
    result.shrunk_residual_norm = 0.0;
    result.fitted = anova_fit(d);
    return result;
  }
  if (method == ResidualMethod::ModeSpecificSoft) {
    result.tuning = optimize_soft_threshold(d.residual, tau2);
    result.shrunk_residual = apply_spectral(hosvd(d.residual), result.tuning.plan);
  } else {
    result.tuning = select_rank(d.residual, tau2);
    result.shrunk_residual = truncated_hosvd(hosvd(d.residual), result.tuning.ranks);
  }
  result.shrunk_residual_norm = frobenius_norm(result.shrunk_residual);
  result.fitted = add(anova_fit(d), result.shrunk_residual);
  return result;
}

}  // namespace hose
