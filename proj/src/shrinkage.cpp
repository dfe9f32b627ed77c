#include "hose/shrinkage.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace hose {

SpectralFunction SpectralFunction::identity() {
  return {ShrinkageFamily::Identity, 0.0, 0.0, 0};
}

SpectralFunction SpectralFunction::truncation(int rank) {
  if (rank < 1) throw Error(ErrorCode::InvalidRank, "truncation rank must be >= 1");
  return {ShrinkageFamily::Truncation, 0.0, 0.0, rank};
}

SpectralFunction SpectralFunction::soft_threshold(double lambda) {
  return {ShrinkageFamily::SoftThreshold, lambda, 0.0, 0};
}

SpectralFunction SpectralFunction::hard_threshold(double lambda) {
  return {ShrinkageFamily::HardThreshold, lambda, 0.0, 0};
}

SpectralFunction SpectralFunction::stein(double lambda) {
  return {ShrinkageFamily::Stein, lambda, 0.0, 0};
}

SpectralFunction SpectralFunction::efron_morris(double lambda) {
  return {ShrinkageFamily::EfronMorris, lambda, 0.0, 0};
}

SpectralFunction SpectralFunction::improved_efron_morris(double gamma, double lambda) {
  return {ShrinkageFamily::ImprovedEfronMorris, lambda, gamma, 0};
}

SpectralFunction SpectralFunction::adaptive_trace(double lambda, double gamma) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "adaptive trace norm requires lambda >= 0");
  }
  if (gamma <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "adaptive trace norm requires gamma > 0");
  }
  return {ShrinkageFamily::AdaptiveTrace, lambda, gamma, 0};
}

bool SpectralFunction::elementwise() const {
  return family_ != ShrinkageFamily::Stein && family_ != ShrinkageFamily::ImprovedEfronMorris;
}

std::optional<double> SpectralFunction::kink_location() const {
  switch (family_) {
    case ShrinkageFamily::SoftThreshold:
    case ShrinkageFamily::HardThreshold:
    case ShrinkageFamily::AdaptiveTrace:
      return lambda_;
    default:
      return std::nullopt;
  }
}

Eigen::VectorXd SpectralFunction::evaluate(const Eigen::VectorXd& sigma) const {
  const Eigen::Index n = sigma.size();
  Eigen::VectorXd f(n);
  switch (family_) {
    case ShrinkageFamily::Identity:
      f = sigma;
      break;
    case ShrinkageFamily::Truncation:
      for (Eigen::Index i = 0; i < n; ++i) f(i) = i < rank_ ? sigma(i) : 0.0;
      break;
    case ShrinkageFamily::SoftThreshold:
      for (Eigen::Index i = 0; i < n; ++i) f(i) = std::max(sigma(i) - lambda_, 0.0);
      break;
    case ShrinkageFamily::HardThreshold:
      for (Eigen::Index i = 0; i < n; ++i) f(i) = sigma(i) >= lambda_ ? sigma(i) : 0.0;
      break;
    case ShrinkageFamily::Stein: {
      const double total = sigma.squaredNorm();
      f = (1.0 - lambda_ / total) * sigma;
      break;
    }
    case ShrinkageFamily::EfronMorris:
      for (Eigen::Index i = 0; i < n; ++i) f(i) = sigma(i) - lambda_ / sigma(i);
      break;
    case ShrinkageFamily::ImprovedEfronMorris: {
      const double total = sigma.squaredNorm();
      for (Eigen::Index i = 0; i < n; ++i) {
        f(i) = (1.0 - gamma_ / total) * sigma(i) - lambda_ / sigma(i);
      }
      break;
    }
    case ShrinkageFamily::AdaptiveTrace:
      for (Eigen::Index i = 0; i < n; ++i) {
        f(i) = sigma(i) * std::max(1.0 - std::pow(lambda_ / sigma(i), gamma_), 0.0);
      }
      break;
  }
  return f;
}

Eigen::VectorXd SpectralFunction::derivative_diag(const Eigen::VectorXd& sigma) const {
  const Eigen::Index n = sigma.size();
  Eigen::VectorXd d(n);
  switch (family_) {
    case ShrinkageFamily::Identity:
      d.setOnes();
      break;
    case ShrinkageFamily::Truncation:
      for (Eigen::Index i = 0; i < n; ++i) d(i) = i < rank_ ? 1.0 : 0.0;
      break;
    case ShrinkageFamily::SoftThreshold:
      for (Eigen::Index i = 0; i < n; ++i) d(i) = sigma(i) > lambda_ ? 1.0 : 0.0;
      break;
    case ShrinkageFamily::HardThreshold:
      for (Eigen::Index i = 0; i < n; ++i) d(i) = sigma(i) >= lambda_ ? 1.0 : 0.0;
      break;
    case ShrinkageFamily::Stein: {
      // d/dsigma_i [(1 - lambda/Q) sigma_i], Q = sum sigma^2.
      const double total = sigma.squaredNorm();
      for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = 1.0 - lambda_ / total + 2.0 * lambda_ * sigma(i) * sigma(i) / (total * total);
      }
      break;
    }
    case ShrinkageFamily::EfronMorris:
      for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 + lambda_ / (sigma(i) * sigma(i));
      break;
    case ShrinkageFamily::ImprovedEfronMorris: {
      const double total = sigma.squaredNorm();
      for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = 1.0 - gamma_ / total + 2.0 * gamma_ * sigma(i) * sigma(i) / (total * total) +
               lambda_ / (sigma(i) * sigma(i));
      }
      break;
    }
    case ShrinkageFamily::AdaptiveTrace:
      // Active branch is sigma - lambda^gamma sigma^(1-gamma).
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ratio = std::pow(lambda_ / sigma(i), gamma_);
        d(i) = ratio < 1.0 ? 1.0 + (gamma_ - 1.0) * ratio : 0.0;
      }
      break;
  }
  return d;
}

ShrinkagePlan identity_plan(int order) {
  ShrinkagePlan plan;
  plan.per_mode.assign(static_cast<size_t>(order), SpectralFunction::identity());
  return plan;
}

ShrinkagePlan soft_threshold_plan(const std::vector<double>& lambdas, double scale) {
  ShrinkagePlan plan;
  plan.scale = scale;
  plan.per_mode.reserve(lambdas.size());
  for (double l : lambdas) plan.per_mode.push_back(SpectralFunction::soft_threshold(l));
  return plan;
}

ShrinkagePlan truncation_plan(const std::vector<int>& ranks) {
  ShrinkagePlan plan;
  plan.per_mode.reserve(ranks.size());
  for (int r : ranks) plan.per_mode.push_back(SpectralFunction::truncation(r));
  return plan;
}

namespace {

void check_plan(const HosvdDecomposition& d, const ShrinkagePlan& plan) {
  if (plan.order() != d.order()) {
    throw Error(ErrorCode::ShapeError, "plan must provide one rule per mode");
  }
  if (!(plan.scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "plan scale must be positive");
  }
}

}  // namespace

DenseTensor apply_spectral(const HosvdDecomposition& d, const ShrinkagePlan& plan) {
  check_plan(d, plan);
  const int order = d.order();
  const auto& dims = d.dims();

  // Per-mode multipliers f(sigma)/sigma applied entrywise to the core.
  std::vector<Eigen::VectorXd> ratio(static_cast<size_t>(order));
  for (int k = 0; k < order; ++k) {
    const auto& sigma = d.mode_singular_values[static_cast<size_t>(k)];
    ratio[static_cast<size_t>(k)] =
        plan.per_mode[static_cast<size_t>(k)].evaluate(sigma).cwiseQuotient(sigma);
  }

  DenseTensor shrunk = d.core;
  std::vector<int> idx(dims.size(), 0);
  for (Index flat = 0; flat < shrunk.size(); ++flat) {
    double w = plan.scale;
    for (int k = 0; k < order; ++k) {
      w *= ratio[static_cast<size_t>(k)](idx[static_cast<size_t>(k)]);
    }
    shrunk[flat] *= w;
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
  return tucker_product(d.factors, shrunk);
}

DenseTensor truncated_hosvd(const HosvdDecomposition& d, const std::vector<int>& ranks) {
  if (static_cast<int>(ranks.size()) != d.order()) {
    throw Error(ErrorCode::InvalidRank, "one rank per mode is required");
  }
  for (int k = 0; k < d.order(); ++k) {
    if (ranks[static_cast<size_t>(k)] < 1 || ranks[static_cast<size_t>(k)] > d.dims()[static_cast<size_t>(k)]) {
      throw Error(ErrorCode::InvalidRank,
                  "rank for mode " + std::to_string(k) + " out of bounds");
    }
  }
  return apply_spectral(d, truncation_plan(ranks));
}

DenseTensor apply_core_shrinkage(const HosvdDecomposition& d, const CoreShrinkagePlan& plan) {
  if (plan.lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "core shrinkage level must be >= 0");
  }
  DenseTensor shrunk = d.core;
  for (Index i = 0; i < shrunk.size(); ++i) {
    const double s = shrunk[i];
    const double mag = std::abs(s) - plan.lambda;
    shrunk[i] = mag > 0.0 ? (s < 0.0 ? -mag : mag) : 0.0;
  }
  return tucker_product(d.factors, shrunk);
}

DenseTensor james_stein(const DenseTensor& x, double tau2) {
  const double p = static_cast<double>(x.size());
  if (x.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "James-Stein requires at least 3 entries");
  }
  if (!(tau2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
  }
  const double norm_sq = frobenius_norm_sq(x);
  if (norm_sq == 0.0) return DenseTensor(x.dims());
  const double factor = std::max(1.0 - (p - 2.0) * tau2 / norm_sq, 0.0);
  return scale(x, factor);
}

DenseTensor matrix_baseline(const DenseTensor& x, ShrinkageFamily family, double lambda) {
  if (family != ShrinkageFamily::EfronMorris && family != ShrinkageFamily::SoftThreshold) {
    throw Error(ErrorCode::InvalidArgument,
                "matrix baseline supports EfronMorris and SoftThreshold only");
  }
  if (family == ShrinkageFamily::SoftThreshold && lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "matrix soft threshold requires lambda >= 0");
  }

  Eigen::JacobiSVD<DenseMatrix> svd(matricize(x, 0), Eigen::ComputeThinU);
  const Eigen::VectorXd sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(sigma.size() - 1) <= 1e-10 * sigma(0)) {
    throw Error(ErrorCode::RankDeficient, "mode-0 unfolding is rank deficient");
  }

  const SpectralFunction f = family == ShrinkageFamily::EfronMorris
                                 ? SpectralFunction::efron_morris(lambda)
                                 : SpectralFunction::soft_threshold(lambda);
  const Eigen::VectorXd ratio = f.evaluate(sigma).cwiseQuotient(sigma);
  // U f(D) V^T = [U f(D) D^-1 U^T] X_(0); only the left factors are needed.
  const DenseMatrix shrinker =
      svd.matrixU() * ratio.asDiagonal() * svd.matrixU().transpose();
  return mode_multiply(x, shrinker, 0);
}

}  // namespace hose
