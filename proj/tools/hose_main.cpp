// hose: denoising of tensor data by mode-specific spectral shrinkage with
// risk-estimate tuning. Subcommands cover decomposition, denoising, tuning,
// rank estimation, simulation studies, and the relational-proportions
// pipeline; outputs are .ten tensors and CSV tables.

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hose/hosvd.hpp"
#include "hose/relational.hpp"
#include "hose/risk.hpp"
#include "hose/shrinkage.hpp"
#include "hose/simulation.hpp"
#include "hose/tensor_io.hpp"
#include "hose/tuning.hpp"

namespace {

using hose::DenseTensor;

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw hose::Error(hose::ErrorCode::IoError, "cannot open for writing: " + path);
  return os;
}

hose::RiskObjective parse_objective(const std::string& name) {
  if (name == "sure") return hose::RiskObjective::Sure;
  if (name == "gsure") return hose::RiskObjective::Gsure;
  throw hose::Error(hose::ErrorCode::InvalidArgument, "objective must be sure or gsure");
}

std::string join(const std::vector<double>& values, char sep) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << sep;
    os << values[i];
  }
  return os.str();
}

std::string join(const std::vector<int>& values, char sep) {
  std::ostringstream os;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << sep;
    os << values[i];
  }
  return os.str();
}

void write_spectra_csv(std::ostream& os, const std::vector<Eigen::VectorXd>& spectra) {
  os << "mode,index,value\n" << std::setprecision(17);
  for (size_t k = 0; k < spectra.size(); ++k) {
    for (Eigen::Index i = 0; i < spectra[k].size(); ++i) {
      os << (k + 1) << ',' << (i + 1) << ',' << spectra[k](i) << '\n';
    }
  }
}

void write_risk_csv(std::ostream& os, const std::string& method, const std::string& params,
                    const hose::RiskEstimate& risk) {
  os << "method,parameters,fit,divergence,sure,gsure\n" << std::setprecision(17);
  os << method << ',' << params << ',' << risk.fit << ',' << risk.divergence << ','
     << risk.sure << ',';
  if (risk.gsure) {
    os << *risk.gsure;
  } else {
    os << "NA";
  }
  os << '\n';
}

struct DenoiseReport {
  DenseTensor estimate;
  std::string note;
};

DenoiseReport denoise(const DenseTensor& x, const std::string& method, double tau2,
                      hose::RiskObjective objective) {
  hose::TuningOptions topts;
  topts.objective = objective;
  if (method == "msst") {
    const hose::TuningResult tuned = hose::optimize_soft_threshold(x, tau2, topts);
    std::vector<double> lambdas;
    for (const auto& f : tuned.plan.per_mode) lambdas.push_back(f.lambda());
    return {hose::apply_spectral(hose::hosvd(x), tuned.plan),
            "lambda: " + join(lambdas, ' ') + "\nscale: " + std::to_string(tuned.plan.scale) +
                "\nobjective: " + std::to_string(tuned.sure_value)};
  }
  if (method == "thosvd") {
    const hose::TuningResult tuned = hose::select_rank(x, tau2, topts);
    return {hose::truncated_hosvd(hose::hosvd(x), tuned.ranks),
            "rank: " + join(tuned.ranks, ' ') + "\nobjective: " + std::to_string(tuned.sure_value)};
  }
  if (method == "matrix-soft") {
    const double lambda = hose::tune_matrix_soft_threshold(x, tau2);
    return {hose::matrix_baseline(x, hose::ShrinkageFamily::SoftThreshold, lambda),
            "lambda: " + std::to_string(lambda)};
  }
  if (method == "efron-morris") {
    const double lambda = hose::tune_matrix_efron_morris(x, tau2);
    return {hose::matrix_baseline(x, hose::ShrinkageFamily::EfronMorris, lambda),
            "lambda: " + std::to_string(lambda)};
  }
  if (method == "james-stein") {
    return {hose::james_stein(x, tau2), ""};
  }
  throw hose::Error(hose::ErrorCode::InvalidArgument, "unknown method: " + method);
}

int run(int argc, char** argv) {
  CLI::App app{"higher-order spectral shrinkage for tensor denoising"};
  app.require_subcommand(1);

  // hosvd
  auto* cmd_hosvd = app.add_subcommand("hosvd", "decompose and export mode spectra");
  std::string in_path, spectra_path, core_path;
  cmd_hosvd->add_option("--in", in_path, "input .ten tensor")->required();
  cmd_hosvd->add_option("--spectra", spectra_path, "CSV of mode singular values");
  cmd_hosvd->add_option("--core", core_path, "write the core tensor (.ten)");

  // denoise
  auto* cmd_denoise = app.add_subcommand("denoise", "estimate the mean tensor");
  std::string dn_in, dn_out, dn_method = "msst", dn_objective = "sure";
  double dn_tau2 = 1.0;
  cmd_denoise->add_option("--in", dn_in, "input .ten tensor")->required();
  cmd_denoise->add_option("--out", dn_out, "output .ten tensor")->required();
  cmd_denoise->add_option("--method", dn_method,
                          "msst | thosvd | matrix-soft | efron-morris | james-stein");
  cmd_denoise->add_option("--tau2", dn_tau2, "noise variance");
  cmd_denoise->add_option("--objective", dn_objective, "sure | gsure");

  // tune
  auto* cmd_tune = app.add_subcommand("tune", "tune mode-specific soft thresholds");
  std::string tn_in, tn_objective = "sure", tn_trace;
  double tn_tau2 = 1.0, tn_tol = 1e-8;
  int tn_sweeps = 50;
  cmd_tune->add_option("--in", tn_in, "input .ten tensor")->required();
  cmd_tune->add_option("--tau2", tn_tau2, "noise variance");
  cmd_tune->add_option("--objective", tn_objective, "sure | gsure");
  cmd_tune->add_option("--max-sweeps", tn_sweeps, "coordinate-descent sweep cap");
  cmd_tune->add_option("--tol", tn_tol, "relative improvement tolerance");
  cmd_tune->add_option("--trace", tn_trace, "CSV of accepted steps");

  // rank
  auto* cmd_rank = app.add_subcommand("rank", "estimate the multilinear rank");
  std::string rk_in, rk_objective = "sure", rk_table;
  double rk_tau2 = 1.0;
  cmd_rank->add_option("--in", rk_in, "input .ten tensor")->required();
  cmd_rank->add_option("--tau2", rk_tau2, "noise variance");
  cmd_rank->add_option("--objective", rk_objective, "sure | gsure");
  cmd_rank->add_option("--table", rk_table, "CSV of the full rank grid");

  // sure
  auto* cmd_sure = app.add_subcommand("sure", "risk estimate of an explicit plan");
  std::string sr_in, sr_method = "msst", sr_out;
  std::vector<double> sr_lambda;
  std::vector<int> sr_ranks;
  double sr_tau2 = 1.0, sr_scale = 1.0, sr_core_lambda = 0.0;
  cmd_sure->add_option("--in", sr_in, "input .ten tensor")->required();
  cmd_sure->add_option("--method", sr_method, "msst | thosvd | core-soft");
  cmd_sure->add_option("--tau2", sr_tau2, "noise variance");
  cmd_sure->add_option("--lambda", sr_lambda, "per-mode thresholds (msst)")->delimiter(',');
  cmd_sure->add_option("--scale", sr_scale, "overall scale c (msst)");
  cmd_sure->add_option("--ranks", sr_ranks, "per-mode ranks (thosvd)")->delimiter(',');
  cmd_sure->add_option("--core-lambda", sr_core_lambda, "core soft-threshold level");
  cmd_sure->add_option("--out", sr_out, "CSV output (stdout when omitted)");

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo estimator comparison");
  std::string sm_scenario = "F", sm_out;
  int sm_reps = 200;
  double sm_tau2 = 1.0;
  std::uint64_t sm_seed = 12345, sm_theta_seed = 1;
  bool sm_rank_study = false, sm_redraw = false;
  std::vector<std::string> sm_estimators;
  cmd_sim->add_option("--scenario", sm_scenario, "A | B | C | D | E | F")->required();
  cmd_sim->add_option("--reps", sm_reps, "replicates");
  cmd_sim->add_option("--tau2", sm_tau2, "noise variance");
  cmd_sim->add_option("--seed", sm_seed, "noise seed");
  cmd_sim->add_option("--theta-seed", sm_theta_seed, "scenario draw seed");
  cmd_sim->add_option("--out", sm_out, "CSV output path")->required();
  cmd_sim->add_flag("--rank-study", sm_rank_study, "rank-recovery frequencies instead of losses");
  cmd_sim->add_flag("--redraw-theta", sm_redraw, "fresh mean draw per replicate");
  cmd_sim->add_option("--estimators", sm_estimators,
                      "subset of: identity james_stein efron_morris matrix_soft msst truncated_hosvd")
      ->delimiter(',');

  // relational
  auto* cmd_rel = app.add_subcommand("relational", "main-effects fit plus shrunken residual");
  std::string rl_props, rl_counts, rl_in, rl_out, rl_method = "msst", rl_probs;
  double rl_tau2 = 1.0;
  cmd_rel->add_option("--props", rl_props, "proportions .ten (with --counts)");
  cmd_rel->add_option("--counts", rl_counts, "trial counts .ten");
  cmd_rel->add_option("--in", rl_in, "already-transformed tensor (alternative to --props)");
  cmd_rel->add_option("--method", rl_method, "msst | thosvd");
  cmd_rel->add_option("--tau2", rl_tau2, "noise variance on the transformed scale");
  cmd_rel->add_option("--out", rl_out, "fitted tensor output (.ten)")->required();
  cmd_rel->add_option("--probs", rl_probs, "also write back-transformed probabilities (.ten)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_hosvd->parsed()) {
    const DenseTensor x = hose::read_tensor_file(in_path);
    const hose::HosvdDecomposition d = hose::hosvd(x);
    if (!core_path.empty()) hose::write_tensor_file(core_path, d.core);
    if (spectra_path.empty()) {
      write_spectra_csv(std::cout, d.mode_singular_values);
    } else {
      auto os = open_output(spectra_path);
      write_spectra_csv(os, d.mode_singular_values);
    }
    return 0;
  }

  if (cmd_denoise->parsed()) {
    const DenseTensor x = hose::read_tensor_file(dn_in);
    const DenoiseReport report = denoise(x, dn_method, dn_tau2, parse_objective(dn_objective));
    hose::write_tensor_file(dn_out, report.estimate);
    if (!report.note.empty()) std::cout << report.note << '\n';
    return 0;
  }

  if (cmd_tune->parsed()) {
    const DenseTensor x = hose::read_tensor_file(tn_in);
    hose::TuningOptions topts;
    topts.objective = parse_objective(tn_objective);
    topts.max_sweeps = tn_sweeps;
    topts.rtol = tn_tol;
    const hose::TuningResult tuned = hose::optimize_soft_threshold(x, tn_tau2, topts);
    std::vector<double> lambdas;
    for (const auto& f : tuned.plan.per_mode) lambdas.push_back(f.lambda());
    std::cout << std::setprecision(17) << "lambda: " << join(lambdas, ' ') << '\n'
              << "scale: " << tuned.plan.scale << '\n'
              << "objective: " << tuned.sure_value << '\n'
              << "converged: " << (tuned.converged ? "yes" : "no") << '\n';
    if (!tn_trace.empty()) {
      auto os = open_output(tn_trace);
      os << "step,parameters,objective\n" << std::setprecision(17);
      for (size_t i = 0; i < tuned.trace.size(); ++i) {
        os << i << ',' << join(tuned.trace[i].params, ';') << ',' << tuned.trace[i].objective
           << '\n';
      }
    }
    return 0;
  }

  if (cmd_rank->parsed()) {
    const DenseTensor x = hose::read_tensor_file(rk_in);
    hose::TuningOptions topts;
    topts.objective = parse_objective(rk_objective);
    const hose::TuningResult tuned = hose::select_rank(x, rk_tau2, topts);
    std::cout << "rank: " << join(tuned.ranks, ' ') << '\n'
              << std::setprecision(17) << "objective: " << tuned.sure_value << '\n';
    if (!rk_table.empty()) {
      auto os = open_output(rk_table);
      os << "ranks,objective\n" << std::setprecision(17);
      for (const auto& entry : tuned.trace) {
        os << join(entry.params, ';') << ',' << entry.objective << '\n';
      }
    }
    return 0;
  }

  if (cmd_sure->parsed()) {
    const DenseTensor x = hose::read_tensor_file(sr_in);
    const hose::HosvdDecomposition d = hose::hosvd(x);
    hose::RiskEstimate risk;
    std::string params;
    if (sr_method == "msst") {
      if (static_cast<int>(sr_lambda.size()) != x.order()) {
        throw hose::Error(hose::ErrorCode::InvalidArgument,
                          "--lambda needs one value per mode");
      }
      risk = hose::sure_spectral(x, d, hose::soft_threshold_plan(sr_lambda, sr_scale), sr_tau2);
      params = join(sr_lambda, ';') + ";c=" + std::to_string(sr_scale);
    } else if (sr_method == "thosvd") {
      if (static_cast<int>(sr_ranks.size()) != x.order()) {
        throw hose::Error(hose::ErrorCode::InvalidArgument, "--ranks needs one value per mode");
      }
      risk = hose::sure_spectral(x, d, hose::truncation_plan(sr_ranks), sr_tau2);
      params = join(sr_ranks, ';');
    } else if (sr_method == "core-soft") {
      risk = hose::sure_core_shrinkage(x, d, {sr_core_lambda}, sr_tau2);
      params = "lambda=" + std::to_string(sr_core_lambda);
    } else {
      throw hose::Error(hose::ErrorCode::InvalidArgument, "unknown method: " + sr_method);
    }
    if (sr_out.empty()) {
      write_risk_csv(std::cout, sr_method, params, risk);
    } else {
      auto os = open_output(sr_out);
      write_risk_csv(os, sr_method, params, risk);
    }
    return 0;
  }

  if (cmd_sim->parsed()) {
    hose::ScenarioSpec spec;
    spec.scenario = hose::scenario_from_string(sm_scenario);
    spec.seed = sm_theta_seed;
    hose::StudyOptions opts;
    opts.reps = sm_reps;
    opts.tau2 = sm_tau2;
    opts.seed = sm_seed;
    opts.redraw_theta = sm_redraw;
    auto os = open_output(sm_out);
    if (sm_rank_study) {
      const hose::RankRecoveryResult result = hose::rank_recovery_study(spec, opts);
      hose::write_rank_frequencies_csv(os, result);
      std::cout << "completed: " << result.completed_reps << '/' << result.requested_reps
                << '\n';
    } else {
      std::vector<hose::EstimatorKind> kinds;
      if (sm_estimators.empty()) {
        kinds = {hose::EstimatorKind::Identity,        hose::EstimatorKind::JamesStein,
                 hose::EstimatorKind::EfronMorris,     hose::EstimatorKind::MatrixSoft,
                 hose::EstimatorKind::ModeSpecificSoft, hose::EstimatorKind::TruncatedHosvd};
      } else {
        for (const auto& name : sm_estimators) {
          if (name == "identity") kinds.push_back(hose::EstimatorKind::Identity);
          else if (name == "james_stein") kinds.push_back(hose::EstimatorKind::JamesStein);
          else if (name == "efron_morris") kinds.push_back(hose::EstimatorKind::EfronMorris);
          else if (name == "matrix_soft") kinds.push_back(hose::EstimatorKind::MatrixSoft);
          else if (name == "msst") kinds.push_back(hose::EstimatorKind::ModeSpecificSoft);
          else if (name == "truncated_hosvd") kinds.push_back(hose::EstimatorKind::TruncatedHosvd);
          else throw hose::Error(hose::ErrorCode::InvalidArgument, "unknown estimator: " + name);
        }
      }
      const hose::StudyResult result = hose::run_study(spec, kinds, opts);
      hose::write_losses_csv(os, result);
      std::cout << "estimator,mean,median,q1,q3\n";
      for (size_t e = 0; e < kinds.size(); ++e) {
        const auto& s = result.summaries[e];
        std::cout << hose::estimator_name(kinds[e]) << ',' << s.mean << ',' << s.median << ','
                  << s.lower_quartile << ',' << s.upper_quartile << '\n';
      }
      for (const auto& failure : result.failures) {
        std::cerr << "skipped " << failure << '\n';
      }
    }
    return 0;
  }

  if (cmd_rel->parsed()) {
    DenseTensor transformed;
    std::optional<DenseTensor> counts;
    if (!rl_in.empty()) {
      transformed = hose::read_tensor_file(rl_in);
    } else {
      if (rl_props.empty() || rl_counts.empty()) {
        throw hose::Error(hose::ErrorCode::InvalidArgument,
                          "provide --in, or --props together with --counts");
      }
      hose::ProportionTensor pt{hose::read_tensor_file(rl_props),
                                hose::read_tensor_file(rl_counts)};
      transformed = hose::arcsine_transform(pt);
      counts = std::move(pt.counts);
    }
    const hose::ResidualMethod method = rl_method == "thosvd"
                                            ? hose::ResidualMethod::TruncatedHosvd
                                            : hose::ResidualMethod::ModeSpecificSoft;
    const hose::PipelineResult result =
        hose::shrink_residual_pipeline(transformed, method, rl_tau2);
    hose::write_tensor_file(rl_out, result.fitted);
    if (!rl_probs.empty()) {
      if (!counts) {
        throw hose::Error(hose::ErrorCode::InvalidArgument,
                          "--probs needs --props/--counts input");
      }
      hose::write_tensor_file(rl_probs, hose::arcsine_back_transform(result.fitted, *counts));
    }
    std::cout << std::setprecision(17) << "residual_norm: " << result.residual_norm << '\n'
              << "shrunk_residual_norm: " << result.shrunk_residual_norm << '\n';
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hose::Error& e) {
    std::cerr << "ERROR " << e.code_name() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << e.what() << '\n';
    return 1;
  }
}
