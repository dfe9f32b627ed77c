#include "hose/risk.hpp"

#include <cmath>
#include <string>

namespace hose {

namespace {

constexpr double kKinkRtol = 1e-12;

void require_tau2(double tau2) {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
}

}  // namespace

RiskEstimate make_risk_estimate(double fit, double divergence, Index p, double tau2) {
  RiskEstimate r;
  r.fit = fit;
  r.divergence = divergence;
  r.tau2 = tau2;
  const double pd = static_cast<double>(p);
  r.sure = fit + 2.0 * tau2 * divergence - pd * tau2;
  if (divergence < pd) {
    const double denom = 1.0 - divergence / pd;
    r.gsure = fit / (denom * denom);
  }
  return r;
}

DivergenceWorkspace::DivergenceWorkspace(const HosvdDecomposition& d)
    : decomposition_(&d), c_array_(d.dims()) {
  const int order = d.order();
  const auto& dims = d.dims();
  const Index p = d.core.size();
  strides_ = d.core.strides();

  modes_.resize(static_cast<size_t>(order));
  for (int k = 0; k < order; ++k) {
    ModeTables& mt = modes_[static_cast<size_t>(k)];
    mt.sigma = d.mode_singular_values[static_cast<size_t>(k)];
    mt.sigma_sq = mt.sigma.cwiseProduct(mt.sigma);
    mt.inv_sigma_sq = mt.sigma_sq.cwiseInverse();
    mt.pair_inv_sum.resize(mt.sigma.size());
    for (Eigen::Index a = 0; a < mt.sigma.size(); ++a) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m < mt.sigma.size(); ++m) {
        if (m != a) sum += 1.0 / (mt.sigma_sq(m) - mt.sigma_sq(a));
      }
      mt.pair_inv_sum(a) = sum;
    }
  }

  core_sq_.resize(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) core_sq_[static_cast<size_t>(i)] = d.core[i] * d.core[i];

  // Per-entry sums over the entry's mode-k fibers.
  fiber_sum_.assign(static_cast<size_t>(p), 0.0);
  for (int k = 0; k < order; ++k) {
    const ModeTables& mt = modes_[static_cast<size_t>(k)];
    const Index stride = strides_[static_cast<size_t>(k)];
    const Index pk = dims[static_cast<size_t>(k)];
    const Index fibers = p / pk;
    for (Index fiber = 0; fiber < fibers; ++fiber) {
      const Index base = (fiber / stride) * (stride * pk) + (fiber % stride);
      for (Index a = 0; a < pk; ++a) {
        double sum = 0.0;
        for (Index j = 0; j < pk; ++j) {
          if (j == a) continue;
          sum += core_sq_[static_cast<size_t>(base + j * stride)] /
                 (mt.sigma_sq(a) - mt.sigma_sq(j));
        }
        fiber_sum_[static_cast<size_t>(base + a * stride)] += sum;
      }
    }
  }

  inv_sq_sum_.assign(static_cast<size_t>(p), 0.0);
  pair_inv_total_.assign(static_cast<size_t>(p), 0.0);
  std::vector<int> idx(dims.size(), 0);
  for (Index flat = 0; flat < p; ++flat) {
    double inv_sq = 0.0;
    double pair_inv = 0.0;
    for (int k = 0; k < order; ++k) {
      const ModeTables& mt = modes_[static_cast<size_t>(k)];
      inv_sq += mt.inv_sigma_sq(idx[static_cast<size_t>(k)]);
      // Diagonal-first orientation: sum_{j != a} 1/(sig_a^2 - sig_j^2).
      pair_inv -= mt.pair_inv_sum(idx[static_cast<size_t>(k)]);
    }
    inv_sq_sum_[static_cast<size_t>(flat)] = inv_sq;
    pair_inv_total_[static_cast<size_t>(flat)] = pair_inv;
    c_array_[flat] = 1.0 + fiber_sum_[static_cast<size_t>(flat)] -
                     core_sq_[static_cast<size_t>(flat)] * (inv_sq - pair_inv);
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
}

std::vector<double> DivergenceWorkspace::truncation_divergence_weights() const {
  std::vector<double> w(core_sq_.size());
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = c_array_[static_cast<Index>(i)] + core_sq_[i] * inv_sq_sum_[i];
  }
  return w;
}

void DivergenceWorkspace::check_kinks(const ShrinkagePlan& plan) const {
  for (int k = 0; k < plan.order(); ++k) {
    const auto kink = plan.per_mode[static_cast<size_t>(k)].kink_location();
    if (!kink) continue;
    const Eigen::VectorXd& sigma = modes_[static_cast<size_t>(k)].sigma;
    const double tol = kKinkRtol * sigma(0);
    for (Eigen::Index a = 0; a < sigma.size(); ++a) {
      if (std::abs(sigma(a) - *kink) <= tol) {
        throw Error(ErrorCode::ThresholdAtKink,
                    "threshold for mode " + std::to_string(k) +
                        " sits on a singular value; derivative undefined");
      }
    }
  }
}

double DivergenceWorkspace::divergence(const ShrinkagePlan& plan) const {
  const int order = static_cast<int>(modes_.size());
  if (plan.order() != order) {
    throw Error(ErrorCode::ShapeError, "plan must provide one rule per mode");
  }
  check_kinks(plan);

  std::vector<Eigen::VectorXd> ratio(static_cast<size_t>(order));   // f/sigma
  std::vector<Eigen::VectorXd> deriv(static_cast<size_t>(order));   // Jacobian diagonal
  for (int k = 0; k < order; ++k) {
    const ModeTables& mt = modes_[static_cast<size_t>(k)];
    const SpectralFunction& f = plan.per_mode[static_cast<size_t>(k)];
    ratio[static_cast<size_t>(k)] = f.evaluate(mt.sigma).cwiseQuotient(mt.sigma);
    deriv[static_cast<size_t>(k)] = f.derivative_diag(mt.sigma);
  }

  const auto& dims = c_array_.dims();
  const Index p = c_array_.size();
  std::vector<int> idx(dims.size(), 0);
  double total = 0.0;
  for (Index flat = 0; flat < p; ++flat) {
    double prod_all = 1.0;
    for (int k = 0; k < order; ++k) {
      prod_all *= ratio[static_cast<size_t>(k)](idx[static_cast<size_t>(k)]);
    }
    double term = c_array_[flat] * prod_all;
    for (int k = 0; k < order; ++k) {
      double prod_except = 1.0;
      for (int j = 0; j < order; ++j) {
        if (j != k) prod_except *= ratio[static_cast<size_t>(j)](idx[static_cast<size_t>(j)]);
      }
      const ModeTables& mt = modes_[static_cast<size_t>(k)];
      term += prod_except * deriv[static_cast<size_t>(k)](idx[static_cast<size_t>(k)]) *
              core_sq_[static_cast<size_t>(flat)] * mt.inv_sigma_sq(idx[static_cast<size_t>(k)]);
    }
    total += term;
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
  return plan.scale * total;
}

double DivergenceWorkspace::divergence_core(const CoreShrinkagePlan& plan) const {
  if (plan.lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "core shrinkage level must be >= 0");
  }
  const DenseTensor& core = decomposition_->core;
  double max_abs = 0.0;
  for (Index i = 0; i < core.size(); ++i) max_abs = std::max(max_abs, std::abs(core[i]));
  const double tol = kKinkRtol * max_abs;
  double total = 0.0;
  for (Index i = 0; i < core.size(); ++i) {
    const double s = core[i];
    const double abs_s = std::abs(s);
    if (plan.lambda > 0.0 && std::abs(abs_s - plan.lambda) <= tol) {
      throw Error(ErrorCode::ThresholdAtKink,
                  "core shrinkage level sits on a core entry; derivative undefined");
    }
    const double g = abs_s > plan.lambda ? (s < 0.0 ? -(abs_s - plan.lambda) : abs_s - plan.lambda) : 0.0;
    const double dg = abs_s > plan.lambda ? 1.0 : 0.0;
    total += s * g * pair_inv_total_[static_cast<size_t>(i)] +
             dg * (1.0 + fiber_sum_[static_cast<size_t>(i)]);
  }
  return total;
}

double DivergenceWorkspace::fit_core(const ShrinkagePlan& plan) const {
  const int order = static_cast<int>(modes_.size());
  std::vector<Eigen::VectorXd> ratio(static_cast<size_t>(order));
  for (int k = 0; k < order; ++k) {
    const ModeTables& mt = modes_[static_cast<size_t>(k)];
    ratio[static_cast<size_t>(k)] =
        plan.per_mode[static_cast<size_t>(k)].evaluate(mt.sigma).cwiseQuotient(mt.sigma);
  }
  const auto& dims = c_array_.dims();
  std::vector<int> idx(dims.size(), 0);
  double total = 0.0;
  for (Index flat = 0; flat < c_array_.size(); ++flat) {
    double w = plan.scale;
    for (int k = 0; k < order; ++k) {
      w *= ratio[static_cast<size_t>(k)](idx[static_cast<size_t>(k)]);
    }
    const double diff = w - 1.0;
    total += diff * diff * core_sq_[static_cast<size_t>(flat)];
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
  return total;
}

double DivergenceWorkspace::closed_form_scale(const ShrinkagePlan& plan, double tau2) const {
  require_tau2(tau2);
  const int order = static_cast<int>(modes_.size());
  if (plan.order() != order) {
    throw Error(ErrorCode::ShapeError, "plan must provide one rule per mode");
  }
  check_kinks(plan);

  std::vector<Eigen::VectorXd> fval(static_cast<size_t>(order));
  std::vector<Eigen::VectorXd> deriv(static_cast<size_t>(order));
  for (int k = 0; k < order; ++k) {
    const ModeTables& mt = modes_[static_cast<size_t>(k)];
    fval[static_cast<size_t>(k)] = plan.per_mode[static_cast<size_t>(k)].evaluate(mt.sigma);
    deriv[static_cast<size_t>(k)] = plan.per_mode[static_cast<size_t>(k)].derivative_diag(mt.sigma);
  }

  const auto& dims = c_array_.dims();
  std::vector<int> idx(dims.size(), 0);
  double a = 0.0, b = 0.0, dterm = 0.0, eterm = 0.0;
  for (Index flat = 0; flat < c_array_.size(); ++flat) {
    bool active = true;
    double g = 1.0;          // prod f/sigma
    double deriv_sum = 0.0;  // sum_k f'_k / (sigma_k f_k)
    for (int k = 0; k < order && active; ++k) {
      const int a_k = idx[static_cast<size_t>(k)];
      const double f_k = fval[static_cast<size_t>(k)](a_k);
      if (!(f_k > 0.0)) {
        active = false;
        break;
      }
      const ModeTables& mt = modes_[static_cast<size_t>(k)];
      g *= f_k / mt.sigma(a_k);
      deriv_sum += deriv[static_cast<size_t>(k)](a_k) / (mt.sigma(a_k) * f_k);
    }
    if (active) {
      const double s2 = core_sq_[static_cast<size_t>(flat)];
      a += g * g * s2;
      b += g * s2;
      dterm += tau2 * g * c_array_[flat];
      eterm += tau2 * g * s2 * deriv_sum;
    }
    for (int k = 0; k < order; ++k) {
      if (++idx[static_cast<size_t>(k)] < dims[static_cast<size_t>(k)]) break;
      idx[static_cast<size_t>(k)] = 0;
    }
  }
  if (!(a > 0.0)) {
    throw Error(ErrorCode::EmptyActiveSet,
                "every entry is thresholded away; no scale to optimize");
  }
  return (b - dterm - eterm) / a;
}

double divergence_spectral(const HosvdDecomposition& d, const ShrinkagePlan& plan) {
  return DivergenceWorkspace(d).divergence(plan);
}

double divergence_full_spectrum(const HosvdDecomposition& d, const ShrinkagePlan& plan) {
  return divergence_spectral(d, plan);
}

double divergence_fd(const DenseTensor& x,
                     const std::function<DenseTensor(const DenseTensor&)>& estimator,
                     double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  double total = 0.0;
  DenseTensor probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = estimator(probe)[i];
    probe[i] = x[i] - eps;
    const double down = estimator(probe)[i];
    probe[i] = x[i];
    total += (up - down) / (2.0 * eps);
  }
  return total;
}

RiskEstimate sure_spectral(const DenseTensor& x, const HosvdDecomposition& d,
                           const ShrinkagePlan& plan, double tau2) {
  require_tau2(tau2);
  const DenseTensor estimate = apply_spectral(d, plan);
  const double fit = squared_distance(estimate, x);
  const double div = DivergenceWorkspace(d).divergence(plan);
  return make_risk_estimate(fit, div, x.size(), tau2);
}

RiskEstimate sure_core_shrinkage(const DenseTensor& x, const HosvdDecomposition& d,
                                 const CoreShrinkagePlan& plan, double tau2) {
  require_tau2(tau2);
  const DenseTensor estimate = apply_core_shrinkage(d, plan);
  const double fit = squared_distance(estimate, x);
  const double div = DivergenceWorkspace(d).divergence_core(plan);
  return make_risk_estimate(fit, div, x.size(), tau2);
}

double divergence_matrix(const Eigen::VectorXd& sigma, Index rows, Index cols,
                         const SpectralFunction& f) {
  const Index m = std::min(rows, cols);
  if (sigma.size() != m) {
    throw Error(ErrorCode::ShapeError, "need min(rows, cols) singular values");
  }
  if (!(sigma(m - 1) > 0.0)) {
    throw Error(ErrorCode::RankDeficient, "matrix spectrum must be strictly positive");
  }
  const double tie_tol = 1e-12 * sigma(0) * sigma(0);
  for (Index i = 0; i + 1 < m; ++i) {
    if (sigma(i) * sigma(i) - sigma(i + 1) * sigma(i + 1) <= tie_tol) {
      throw Error(ErrorCode::DegenerateSpectrum, "matrix spectrum has (near-)tied values");
    }
  }
  if (const auto kink = f.kink_location()) {
    const double tol = kKinkRtol * sigma(0);
    for (Index i = 0; i < m; ++i) {
      if (std::abs(sigma(i) - *kink) <= tol) {
        throw Error(ErrorCode::ThresholdAtKink,
                    "matrix threshold sits on a singular value");
      }
    }
  }

  const Eigen::VectorXd fv = f.evaluate(sigma);
  const Eigen::VectorXd dv = f.derivative_diag(sigma);
  double div = dv.sum();
  div += static_cast<double>(std::max(rows, cols) - m) *
         fv.cwiseQuotient(sigma).sum();
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (j == i) continue;
      div += 2.0 * sigma(i) * fv(i) / (sigma(i) * sigma(i) - sigma(j) * sigma(j));
    }
  }
  return div;
}

RiskEstimate sure_matrix(const Eigen::VectorXd& sigma, Index rows, Index cols,
                         const SpectralFunction& f, double tau2) {
  require_tau2(tau2);
  const Eigen::VectorXd fv = f.evaluate(sigma);
  const double fit = (fv - sigma).squaredNorm();
  const double div = divergence_matrix(sigma, rows, cols, f);
  return make_risk_estimate(fit, div, rows * cols, tau2);
}

}  // namespace hose
