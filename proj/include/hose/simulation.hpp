#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hose/rng.hpp"
#include "hose/tensor.hpp"

namespace hose {

/// Mean-tensor designs for the Monte Carlo studies. All are rescaled to a
/// fixed squared Frobenius norm after construction:
///   A  i.i.d. standard normal entries
///   B  mode-0 fibers with covariance diag(1^2,...,p_0^2)
///   C  mode-0 fibers with AR-1(rho) covariance
///   D  mode-0 unfolding truncated to half rank (low rank along mode 0 only)
///   E  dispersed spectra along every mode (diag covariance on each mode)
///   F  multilinear rank (p_k/2) with all nonzero mode singular values equal
enum class Scenario { A, B, C, D, E, F };

Scenario scenario_from_string(const std::string& name);
std::string scenario_name(Scenario s);

struct ScenarioSpec {
  Scenario scenario = Scenario::A;
  std::vector<int> dims{10, 10, 10};
  double target_norm_sq = 1000.0;
  double ar_rho = 0.7;
  std::uint64_t seed = 1;
};

/// Draws the scenario's mean tensor and rescales it so its squared
/// Frobenius norm equals target_norm_sq.
DenseTensor generate_mean(const ScenarioSpec& spec);

/// theta + tau * Z with i.i.d. standard normal Z; deterministic per seed.
DenseTensor add_noise(const DenseTensor& theta, double tau2, std::uint64_t seed);
DenseTensor add_noise(const DenseTensor& theta, double tau2, Rng& rng);

/// The six estimators compared in the studies.
enum class EstimatorKind {
  Identity,
  JamesStein,
  EfronMorris,      // mode-0 unfolding, SURE-tuned level
  MatrixSoft,       // mode-0 unfolding, SURE-tuned threshold
  ModeSpecificSoft, // SURE-tuned per-mode thresholds and scale
  TruncatedHosvd,   // SURE-tuned multilinear rank
};

std::string estimator_name(EstimatorKind kind);

/// Runs one estimator on one data tensor.
DenseTensor run_estimator(EstimatorKind kind, const DenseTensor& x, double tau2);

struct StudyOptions {
  int reps = 200;
  double tau2 = 1.0;
  std::uint64_t seed = 12345;
  /// When set, a fresh mean is drawn per replicate instead of holding the
  /// scenario draw fixed across replicates.
  bool redraw_theta = false;
};

struct LossSummary {
  double mean = 0.0;
  double median = 0.0;
  double lower_quartile = 0.0;
  double upper_quartile = 0.0;
};

struct StudyResult {
  std::vector<EstimatorKind> estimators;
  /// losses[e][r] for completed replicates, in replicate order.
  std::vector<std::vector<double>> losses;
  std::vector<LossSummary> summaries;
  std::vector<std::string> failures;
  int requested_reps = 0;
  int completed_reps = 0;
};

/// Monte Carlo loss comparison: fresh noise per replicate, squared error
/// loss against the (per-replicate) mean. Replicates run in parallel with
/// per-replicate derived seeds; more than 1% failed replicates aborts.
StudyResult run_study(const ScenarioSpec& spec, const std::vector<EstimatorKind>& estimators,
                      const StudyOptions& options);

struct RankRecoveryResult {
  /// ranks[r] = rank tuple selected in completed replicate r.
  std::vector<std::vector<int>> ranks;
  /// Per mode, the proportion of replicates selecting each rank.
  std::vector<std::map<int, double>> mode_frequency;
  std::vector<std::string> failures;
  int requested_reps = 0;
  int completed_reps = 0;

  /// Fraction of replicates whose whole tuple equals target.
  double tuple_match_rate(const std::vector<int>& target) const;
};

/// Repeated SURE rank selection under scenarios with known multilinear rank
/// (D and F).
RankRecoveryResult rank_recovery_study(const ScenarioSpec& spec, const StudyOptions& options);

void write_losses_csv(std::ostream& os, const StudyResult& result);
void write_rank_frequencies_csv(std::ostream& os, const RankRecoveryResult& result);

}  // namespace hose
