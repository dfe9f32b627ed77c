#pragma once

#include <vector>

#include "hose/risk.hpp"
#include "hose/shrinkage.hpp"

namespace hose {

enum class RiskObjective { Sure, Gsure };

struct TuningOptions {
  RiskObjective objective = RiskObjective::Sure;
  int max_sweeps = 50;
  /// A sweep that lowers the objective by less than rtol * |value| stops the
  /// coordinate descent.
  double rtol = 1e-8;
  /// Brent tolerance per coordinate, as a fraction of the mode's top
  /// singular value, and its evaluation budget.
  double brent_tol_factor = 1e-6;
  int brent_max_evals = 200;
};

struct TuningTraceEntry {
  std::vector<double> params;  // lambdas then scale, or the rank tuple
  double objective = 0.0;
};

struct TuningResult {
  ShrinkagePlan plan;
  std::vector<int> ranks;  // filled by select_rank only
  /// Achieved objective, recomputed through the risk module at the returned
  /// plan (SURE, or GSURE when that objective was selected).
  double sure_value = 0.0;
  RiskEstimate risk;
  std::vector<TuningTraceEntry> trace;
  bool converged = false;
};

/// Cyclic coordinate descent for mode-specific soft-thresholding: each
/// lambda_k is minimized over [-sigma_1^k, sigma_1^k] by Brent's method
/// (widened to -10 sigma_1^k when the minimizer lands on the lower edge),
/// then the overall scale is updated in closed form. Only improving steps
/// are accepted, so the trace is nonincreasing.
TuningResult optimize_soft_threshold(const DenseTensor& x, double tau2,
                                     const TuningOptions& options = {});

/// SURE-minimizing overall scale for a plan, at fixed shrinkage rules.
double closed_form_scale(const HosvdDecomposition& d, const ShrinkagePlan& plan,
                         double tau2);

/// Exhaustive risk-estimate search over all multilinear rank tuples
/// (r_0,...,r_{K-1}) in prod {1..p_k}; ties break toward the smaller rank
/// sum, then lexicographically. Doubles as a multilinear rank estimator.
TuningResult select_rank(const DenseTensor& x, double tau2,
                         const TuningOptions& options = {});

/// SURE-minimizing soft threshold for the mode-0 unfolding treated as a
/// matrix; returns the tuned lambda in [0, sigma_1].
double tune_matrix_soft_threshold(const DenseTensor& x, double tau2);

/// SURE-minimizing Efron-Morris level for the mode-0 unfolding; returns the
/// tuned lambda in [0, sigma_1^2].
double tune_matrix_efron_morris(const DenseTensor& x, double tau2);

}  // namespace hose
