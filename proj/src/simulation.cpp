#include "hose/simulation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "hose/hosvd.hpp"
#include "hose/parallel.hpp"
#include "hose/shrinkage.hpp"
#include "hose/tuning.hpp"

namespace hose {

Scenario scenario_from_string(const std::string& name) {
  if (name == "A" || name == "a") return Scenario::A;
  if (name == "B" || name == "b") return Scenario::B;
  if (name == "C" || name == "c") return Scenario::C;
  if (name == "D" || name == "d") return Scenario::D;
  if (name == "E" || name == "e") return Scenario::E;
  if (name == "F" || name == "f") return Scenario::F;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario: " + name);
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::D: return "D";
    case Scenario::E: return "E";
    case Scenario::F: return "F";
  }
  return "?";
}

namespace {

DenseTensor gaussian_tensor(const std::vector<int>& dims, Rng& rng) {
  DenseTensor t(dims);
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.gaussian();
  return t;
}

/// diag(1, 2, ..., p): square root of the dispersed covariance
/// diag(1^2, ..., p^2).
DenseMatrix dispersed_sqrt(int p) {
  DenseMatrix m = DenseMatrix::Zero(p, p);
  for (int i = 0; i < p; ++i) m(i, i) = static_cast<double>(i + 1);
  return m;
}

DenseMatrix ar1_cholesky(int p, double rho) {
  DenseMatrix cov(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      cov(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  return Eigen::LLT<DenseMatrix>(cov).matrixL();
}

/// Thin orthonormal factor of a p x r Gaussian matrix with a canonical sign
/// (positive R diagonal).
DenseMatrix random_orthonormal(int p, int r, Rng& rng) {
  DenseMatrix g(p, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(p, r);
  const DenseMatrix rfac = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j) {
    if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

DenseTensor generate_mean(const ScenarioSpec& spec) {
  if (!(spec.target_norm_sq > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "target norm must be positive");
  }
  Rng rng(spec.seed);
  const auto& dims = spec.dims;
  DenseTensor theta;

  switch (spec.scenario) {
    case Scenario::A:
      theta = gaussian_tensor(dims, rng);
      break;
    case Scenario::B:
      theta = mode_multiply(gaussian_tensor(dims, rng), dispersed_sqrt(dims[0]), 0);
      break;
    case Scenario::C:
      theta = mode_multiply(gaussian_tensor(dims, rng), ar1_cholesky(dims[0], spec.ar_rho), 0);
      break;
    case Scenario::D: {
      // Low rank along mode 0 only: truncate the mode-0 unfolding of an
      // i.i.d. draw to half rank.
      const DenseTensor g = gaussian_tensor(dims, rng);
      const DenseMatrix unfolding = matricize(g, 0);
      const int r = std::max(1, dims[0] / 2);
      Eigen::JacobiSVD<DenseMatrix> svd(unfolding, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const DenseMatrix truncated = svd.matrixU().leftCols(r) *
                                    svd.singularValues().head(r).asDiagonal() *
                                    svd.matrixV().leftCols(r).transpose();
      theta = dematricize(truncated, 0, dims);
      break;
    }
    case Scenario::E: {
      theta = gaussian_tensor(dims, rng);
      for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
        theta = mode_multiply(theta, dispersed_sqrt(dims[static_cast<size_t>(k)]), k);
      }
      break;
    }
    case Scenario::F: {
      // Orthonormal factors times an equal-entry superdiagonal core: every
      // core unfolding then has identical nonzero singular values.
      int min_dim = dims[0];
      for (int d : dims) min_dim = std::min(min_dim, d);
      const int r = std::max(1, min_dim / 2);
      std::vector<int> core_dims(dims.size(), r);
      DenseTensor core(core_dims);
      std::vector<int> idx(dims.size(), 0);
      for (int a = 0; a < r; ++a) {
        std::fill(idx.begin(), idx.end(), a);
        core.at(idx) = 1.0;
      }
      theta = core;
      for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
        theta = mode_multiply(theta, random_orthonormal(dims[static_cast<size_t>(k)], r, rng), k);
      }
      break;
    }
  }

  const double norm_sq = frobenius_norm_sq(theta);
  if (!(norm_sq > 0.0)) {
    throw Error(ErrorCode::NonFinite, "degenerate scenario draw");
  }
  return scale(theta, std::sqrt(spec.target_norm_sq / norm_sq));
}

DenseTensor add_noise(const DenseTensor& theta, double tau2, Rng& rng) {
  if (tau2 < 0.0) throw Error(ErrorCode::InvalidArgument, "tau2 must be nonnegative");
  const double tau = std::sqrt(tau2);
  DenseTensor x = theta;
  for (Index i = 0; i < x.size(); ++i) x[i] += tau * rng.gaussian();
  return x;
}

DenseTensor add_noise(const DenseTensor& theta, double tau2, std::uint64_t seed) {
  Rng rng(seed);
  return add_noise(theta, tau2, rng);
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Identity: return "identity";
    case EstimatorKind::JamesStein: return "james_stein";
    case EstimatorKind::EfronMorris: return "efron_morris";
    case EstimatorKind::MatrixSoft: return "matrix_soft";
    case EstimatorKind::ModeSpecificSoft: return "msst";
    case EstimatorKind::TruncatedHosvd: return "truncated_hosvd";
  }
  return "?";
}

DenseTensor run_estimator(EstimatorKind kind, const DenseTensor& x, double tau2) {
  switch (kind) {
    case EstimatorKind::Identity:
      return x;
    case EstimatorKind::JamesStein:
      return james_stein(x, tau2);
    case EstimatorKind::EfronMorris:
      return matrix_baseline(x, ShrinkageFamily::EfronMorris,
                             tune_matrix_efron_morris(x, tau2));
    case EstimatorKind::MatrixSoft:
      return matrix_baseline(x, ShrinkageFamily::SoftThreshold,
                             tune_matrix_soft_threshold(x, tau2));
    case EstimatorKind::ModeSpecificSoft: {
      const TuningResult tuned = optimize_soft_threshold(x, tau2);
      return apply_spectral(hosvd(x), tuned.plan);
    }
    case EstimatorKind::TruncatedHosvd: {
      const TuningResult tuned = select_rank(x, tau2);
      return truncated_hosvd(hosvd(x), tuned.ranks);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown estimator");
}

namespace {

LossSummary summarize(std::vector<double> values) {
  LossSummary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  s.lower_quartile = quantile(0.25);
  s.median = quantile(0.5);
  s.upper_quartile = quantile(0.75);
  return s;
}

std::uint64_t theta_seed_for(const ScenarioSpec& spec, int replicate) {
  return Rng::splitmix64(spec.seed ^ Rng::splitmix64(static_cast<std::uint64_t>(replicate) + 0x7E7AULL));
}

void check_failures(int failed, int reps) {
  if (failed * 100 >= reps) {
    throw Error(ErrorCode::NonFinite,
                "more than 1% of replicates failed; study aborted");
  }
}

}  // namespace

StudyResult run_study(const ScenarioSpec& spec, const std::vector<EstimatorKind>& estimators,
                      const StudyOptions& options) {
  if (options.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
  if (estimators.empty()) throw Error(ErrorCode::InvalidArgument, "no estimators selected");

  const DenseTensor shared_theta = generate_mean(spec);
  const size_t n_est = estimators.size();

  std::vector<std::vector<double>> loss_slots(static_cast<size_t>(options.reps),
                                              std::vector<double>());
  std::vector<std::string> failure_slots(static_cast<size_t>(options.reps));

  parallel_for(options.reps, [&](std::int64_t rep) {
    try {
      DenseTensor theta = shared_theta;
      if (options.redraw_theta) {
        ScenarioSpec rep_spec = spec;
        rep_spec.seed = theta_seed_for(spec, static_cast<int>(rep));
        theta = generate_mean(rep_spec);
      }
      Rng rng = Rng::for_replicate(options.seed, static_cast<std::uint64_t>(rep));
      const DenseTensor x = add_noise(theta, options.tau2, rng);
      std::vector<double> losses(n_est);
      for (size_t e = 0; e < n_est; ++e) {
        const DenseTensor estimate = run_estimator(estimators[e], x, options.tau2);
        losses[e] = squared_distance(theta, estimate);
      }
      loss_slots[static_cast<size_t>(rep)] = std::move(losses);
    } catch (const Error& err) {
      failure_slots[static_cast<size_t>(rep)] =
          std::string(err.code_name()) + ": " + err.what();
    }
  });

  StudyResult result;
  result.estimators = estimators;
  result.requested_reps = options.reps;
  result.losses.assign(n_est, {});
  for (int rep = 0; rep < options.reps; ++rep) {
    if (!failure_slots[static_cast<size_t>(rep)].empty()) {
      result.failures.push_back("replicate " + std::to_string(rep) + " " +
                                failure_slots[static_cast<size_t>(rep)]);
      continue;
    }
    for (size_t e = 0; e < n_est; ++e) {
      result.losses[e].push_back(loss_slots[static_cast<size_t>(rep)][e]);
    }
    ++result.completed_reps;
  }
  check_failures(static_cast<int>(result.failures.size()), options.reps);

  result.summaries.reserve(n_est);
  for (size_t e = 0; e < n_est; ++e) result.summaries.push_back(summarize(result.losses[e]));
  return result;
}

double RankRecoveryResult::tuple_match_rate(const std::vector<int>& target) const {
  if (ranks.empty()) return 0.0;
  int hits = 0;
  for (const auto& r : ranks) {
    if (r == target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

RankRecoveryResult rank_recovery_study(const ScenarioSpec& spec, const StudyOptions& options) {
  if (spec.scenario != Scenario::D && spec.scenario != Scenario::F) {
    throw Error(ErrorCode::InvalidArgument,
                "rank recovery is defined for scenarios D and F");
  }
  if (options.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");

  const DenseTensor shared_theta = generate_mean(spec);
  std::vector<std::vector<int>> rank_slots(static_cast<size_t>(options.reps));
  std::vector<std::string> failure_slots(static_cast<size_t>(options.reps));

  parallel_for(options.reps, [&](std::int64_t rep) {
    try {
      DenseTensor theta = shared_theta;
      if (options.redraw_theta) {
        ScenarioSpec rep_spec = spec;
        rep_spec.seed = theta_seed_for(spec, static_cast<int>(rep));
        theta = generate_mean(rep_spec);
      }
      Rng rng = Rng::for_replicate(options.seed, static_cast<std::uint64_t>(rep));
      const DenseTensor x = add_noise(theta, options.tau2, rng);
      rank_slots[static_cast<size_t>(rep)] = select_rank(x, options.tau2).ranks;
    } catch (const Error& err) {
      failure_slots[static_cast<size_t>(rep)] =
          std::string(err.code_name()) + ": " + err.what();
    }
  });

  RankRecoveryResult result;
  result.requested_reps = options.reps;
  for (int rep = 0; rep < options.reps; ++rep) {
    if (!failure_slots[static_cast<size_t>(rep)].empty()) {
      result.failures.push_back("replicate " + std::to_string(rep) + " " +
                                failure_slots[static_cast<size_t>(rep)]);
      continue;
    }
    result.ranks.push_back(rank_slots[static_cast<size_t>(rep)]);
    ++result.completed_reps;
  }
  check_failures(static_cast<int>(result.failures.size()), options.reps);

  const size_t order = spec.dims.size();
  result.mode_frequency.assign(order, {});
  for (const auto& tuple : result.ranks) {
    for (size_t k = 0; k < order; ++k) {
      result.mode_frequency[k][tuple[k]] += 1.0;
    }
  }
  for (auto& freq : result.mode_frequency) {
    for (auto& [rank, count] : freq) {
      count /= static_cast<double>(result.completed_reps);
    }
  }
  return result;
}

void write_losses_csv(std::ostream& os, const StudyResult& result) {
  os << "replicate,estimator,loss\n";
  if (result.losses.empty()) return;
  const size_t reps = result.losses[0].size();
  for (size_t r = 0; r < reps; ++r) {
    for (size_t e = 0; e < result.estimators.size(); ++e) {
      os << r << ',' << estimator_name(result.estimators[e]) << ',' << result.losses[e][r]
         << '\n';
    }
  }
}

void write_rank_frequencies_csv(std::ostream& os, const RankRecoveryResult& result) {
  os << "mode,rank,frequency\n";
  for (size_t k = 0; k < result.mode_frequency.size(); ++k) {
    for (const auto& [rank, freq] : result.mode_frequency[k]) {
      os << (k + 1) << ',' << rank << ',' << freq << '\n';
    }
  }
}

}  // namespace hose
