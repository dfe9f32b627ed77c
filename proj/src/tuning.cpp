#include "hose/tuning.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "hose/brent.hpp"

namespace hose {

namespace {

constexpr double kKinkRtol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Moves a threshold off any singular value it (nearly) coincides with, so
/// the divergence is defined at every probe.
double nudge_off_kinks(double lambda, const Eigen::VectorXd& sigma) {
  const double tol = kKinkRtol * sigma(0);
  bool moved = true;
  while (moved) {
    moved = false;
    for (Eigen::Index a = 0; a < sigma.size(); ++a) {
      if (std::abs(sigma(a) - lambda) <= tol) {
        lambda = sigma(a) + 2.0 * tol;
        moved = true;
      }
    }
  }
  return lambda;
}

double require_finite(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFinite, "risk objective evaluated non-finite");
  }
  return value;
}

/// The GSURE ratio degenerates to 0/0 as the divergence approaches p (the
/// no-shrinkage boundary), so probes in that sliver are skipped rather than
/// compared.
constexpr double kGsureDivergenceMargin = 1e-6;

/// Fast core-space objective for soft-threshold plans. GSURE probes at or
/// numerically near divergence p report +inf so the search skips them.
class SoftObjective {
 public:
  SoftObjective(const DivergenceWorkspace& ws, double tau2, RiskObjective objective)
      : ws_(ws), tau2_(tau2), objective_(objective), p_(static_cast<double>(ws.total_size())) {}

  double operator()(const std::vector<double>& lambdas, double c) const {
    const ShrinkagePlan plan = soft_threshold_plan(lambdas, c);
    const double fit = ws_.fit_core(plan);
    const double div = ws_.divergence(plan);
    if (objective_ == RiskObjective::Gsure) {
      if (div >= p_ * (1.0 - kGsureDivergenceMargin)) return kInf;
      const double denom = 1.0 - div / p_;
      return require_finite(fit / (denom * denom));
    }
    return require_finite(fit + 2.0 * tau2_ * div - p_ * tau2_);
  }

 private:
  const DivergenceWorkspace& ws_;
  double tau2_;
  RiskObjective objective_;
  double p_;
};

}  // namespace

double closed_form_scale(const HosvdDecomposition& d, const ShrinkagePlan& plan,
                         double tau2) {
  return DivergenceWorkspace(d).closed_form_scale(plan, tau2);
}

TuningResult optimize_soft_threshold(const DenseTensor& x, double tau2,
                                     const TuningOptions& options) {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
  const HosvdDecomposition d = hosvd(x);
  const DivergenceWorkspace ws(d);
  const SoftObjective objective(ws, tau2, options.objective);
  const int order = d.order();

  std::vector<double> lambdas(static_cast<size_t>(order), 0.0);
  double c = 1.0;

  TuningResult result;
  auto record = [&](double value) {
    TuningTraceEntry entry;
    entry.params = lambdas;
    entry.params.push_back(c);
    entry.objective = value;
    result.trace.push_back(std::move(entry));
  };

  double best = objective(lambdas, c);
  record(best);

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double sweep_start = best;

    for (int k = 0; k < order; ++k) {
      const Eigen::VectorXd& sigma = d.mode_singular_values[static_cast<size_t>(k)];
      const double top = sigma(0);
      const double xtol = options.brent_tol_factor * top;
      auto coordinate = [&](double lambda) {
        std::vector<double> probe = lambdas;
        probe[static_cast<size_t>(k)] = nudge_off_kinks(lambda, sigma);
        return objective(probe, c);
      };

      BrentResult br = brent_minimize(coordinate, -top, top, xtol, options.brent_max_evals);
      if (br.x <= -top + 2.0 * xtol) {
        // Minimum sits on the lower edge; widen the negative side once.
        const BrentResult wide =
            brent_minimize(coordinate, -10.0 * top, top, xtol, options.brent_max_evals);
        if (wide.fx < br.fx) br = wide;
      }
      if (br.fx < best) {
        lambdas[static_cast<size_t>(k)] = nudge_off_kinks(br.x, sigma);
        best = br.fx;
        record(best);
      }
    }

    // Scale step: closed form under SURE, a bracketed search under GSURE
    // (the quadratic-in-c argument only applies to SURE).
    double c_candidate = -1.0;
    if (options.objective == RiskObjective::Sure) {
      try {
        c_candidate = ws.closed_form_scale(soft_threshold_plan(lambdas, c), tau2);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyActiveSet) throw;
      }
    } else {
      const BrentResult br = brent_minimize(
          [&](double cc) { return objective(lambdas, cc); }, 1e-6, 10.0, 1e-8,
          options.brent_max_evals);
      c_candidate = br.x;
    }
    if (std::isfinite(c_candidate) && c_candidate > 0.0) {
      const double fc = objective(lambdas, c_candidate);
      if (fc < best) {
        c = c_candidate;
        best = fc;
        record(best);
      }
    }

    if (sweep_start - best < options.rtol * (std::abs(sweep_start) + 1e-12)) {
      result.converged = true;
      break;
    }
  }

  result.plan = soft_threshold_plan(lambdas, c);
  const DenseTensor estimate = apply_spectral(d, result.plan);
  const double fit = squared_distance(estimate, x);
  const double div = ws.divergence(result.plan);
  result.risk = make_risk_estimate(fit, div, x.size(), tau2);
  if (options.objective == RiskObjective::Gsure) {
    if (!result.risk.gsure) {
      throw Error(ErrorCode::GsureUndefined, "GSURE undefined at the selected plan");
    }
    result.sure_value = *result.risk.gsure;
  } else {
    result.sure_value = result.risk.sure;
  }
  return result;
}

namespace {

/// In-place cumulative sums along every mode turn a tensor of per-entry
/// weights into corner sums: pref[r-1] = sum over the box [0,r).
void prefix_sums(std::vector<double>& values, const std::vector<int>& dims,
                 const std::vector<Index>& strides) {
  for (size_t k = 0; k < dims.size(); ++k) {
    const Index stride = strides[k];
    const Index n = static_cast<Index>(values.size());
    std::vector<int> idx(dims.size(), 0);
    for (Index flat = 0; flat < n; ++flat) {
      if (idx[k] > 0) values[static_cast<size_t>(flat)] += values[static_cast<size_t>(flat - stride)];
      for (size_t m = 0; m < dims.size(); ++m) {
        if (++idx[m] < dims[m]) break;
        idx[m] = 0;
      }
    }
  }
}

}  // namespace

TuningResult select_rank(const DenseTensor& x, double tau2, const TuningOptions& options) {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
  const HosvdDecomposition d = hosvd(x);
  const DivergenceWorkspace ws(d);
  const auto& dims = x.dims();
  const auto strides = x.strides();
  const double p = static_cast<double>(x.size());

  std::vector<double> s2_corner = ws.core_sq();
  std::vector<double> w_corner = ws.truncation_divergence_weights();
  prefix_sums(s2_corner, dims, strides);
  prefix_sums(w_corner, dims, strides);
  double total_s2 = 0.0;
  for (double v : ws.core_sq()) total_s2 += v;

  TuningResult result;
  std::vector<int> ranks(dims.size(), 1);
  std::vector<int> best_ranks;
  double best_value = kInf;
  long best_rank_sum = 0;

  const Index tuples = x.size();
  std::vector<int> corner_idx(dims.size(), 0);  // ranks - 1
  for (Index n = 0; n < tuples; ++n) {
    Index corner_flat = 0;
    long rank_sum = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
      corner_flat += strides[k] * corner_idx[k];
      rank_sum += corner_idx[k] + 1;
    }
    const double fit = total_s2 - s2_corner[static_cast<size_t>(corner_flat)];
    const double div = w_corner[static_cast<size_t>(corner_flat)];
    double value;
    if (options.objective == RiskObjective::Gsure) {
      if (div >= p * (1.0 - kGsureDivergenceMargin)) {
        value = kInf;
      } else {
        const double denom = 1.0 - div / p;
        value = fit / (denom * denom);
      }
    } else {
      value = require_finite(fit + 2.0 * tau2 * div - p * tau2);
    }

    TuningTraceEntry entry;
    entry.params.reserve(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) {
      entry.params.push_back(static_cast<double>(corner_idx[k] + 1));
    }
    entry.objective = value;
    result.trace.push_back(std::move(entry));

    bool better = value < best_value;
    if (!better && value == best_value && !best_ranks.empty()) {
      if (rank_sum < best_rank_sum) {
        better = true;
      } else if (rank_sum == best_rank_sum) {
        for (size_t k = 0; k < dims.size(); ++k) {
          if (corner_idx[k] + 1 != best_ranks[k]) {
            better = corner_idx[k] + 1 < best_ranks[k];
            break;
          }
        }
      }
    }
    if (better) {
      best_value = value;
      best_rank_sum = rank_sum;
      best_ranks.assign(dims.size(), 0);
      for (size_t k = 0; k < dims.size(); ++k) best_ranks[k] = corner_idx[k] + 1;
    }

    for (size_t k = 0; k < dims.size(); ++k) {
      if (++corner_idx[k] < dims[k]) break;
      corner_idx[k] = 0;
    }
  }

  if (best_ranks.empty() || !std::isfinite(best_value)) {
    throw Error(ErrorCode::GsureUndefined, "objective undefined over the whole rank grid");
  }

  result.ranks = best_ranks;
  result.plan = truncation_plan(best_ranks);
  const DenseTensor estimate = apply_spectral(d, result.plan);
  const double fit = squared_distance(estimate, x);
  const double div = ws.divergence(result.plan);
  result.risk = make_risk_estimate(fit, div, x.size(), tau2);
  result.sure_value = options.objective == RiskObjective::Gsure
                          ? result.risk.gsure.value_or(best_value)
                          : result.risk.sure;
  result.converged = true;
  return result;
}

namespace {

struct UnfoldingSpectrum {
  Eigen::VectorXd sigma;
  Index rows = 0;
  Index cols = 0;
};

UnfoldingSpectrum mode0_spectrum(const DenseTensor& x) {
  UnfoldingSpectrum s;
  s.rows = x.dim(0);
  s.cols = x.size() / s.rows;
  Eigen::JacobiSVD<DenseMatrix> svd(matricize(x, 0));
  s.sigma = svd.singularValues();
  if (!(s.sigma(s.sigma.size() - 1) > 1e-10 * s.sigma(0))) {
    throw Error(ErrorCode::RankDeficient, "mode-0 unfolding is rank deficient");
  }
  return s;
}

}  // namespace

double tune_matrix_soft_threshold(const DenseTensor& x, double tau2) {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
  const UnfoldingSpectrum s = mode0_spectrum(x);
  const double top = s.sigma(0);
  auto objective = [&](double lambda) {
    const double nudged = nudge_off_kinks(std::max(lambda, 0.0), s.sigma);
    return require_finite(
        sure_matrix(s.sigma, s.rows, s.cols, SpectralFunction::soft_threshold(nudged), tau2)
            .sure);
  };
  const BrentResult br = brent_minimize(objective, 0.0, top, 1e-6 * top, 200);
  return nudge_off_kinks(std::max(br.x, 0.0), s.sigma);
}

double tune_matrix_efron_morris(const DenseTensor& x, double tau2) {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
  const UnfoldingSpectrum s = mode0_spectrum(x);
  const double top_sq = s.sigma(0) * s.sigma(0);
  auto objective = [&](double lambda) {
    return require_finite(
        sure_matrix(s.sigma, s.rows, s.cols,
                    SpectralFunction::efron_morris(std::max(lambda, 0.0)), tau2)
            .sure);
  };
  const BrentResult br = brent_minimize(objective, 0.0, top_sq, 1e-6 * top_sq, 200);
  return std::max(br.x, 0.0);
}

}  // namespace hose
