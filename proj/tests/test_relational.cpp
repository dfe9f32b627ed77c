#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hose/relational.hpp"
#include "hose/tuning.hpp"
#include "test_support.hpp"

using hose::AnovaDecomposition;
using hose::DenseTensor;
using hose::Index;
using hose::ProportionTensor;
using hose_test::max_abs_diff;
using hose_test::random_tensor;
using hose_test::rel_err;

namespace {

constexpr double kPi = 3.14159265358979323846;

DenseTensor constant_tensor(const std::vector<int>& dims, double value) {
  DenseTensor t(dims);
  for (Index i = 0; i < t.size(); ++i) t[i] = value;
  return t;
}

/// Zero-sum vector of the given length.
Eigen::VectorXd centered_vector(int n, std::uint64_t seed, double sd) {
  hose::Rng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = sd * rng.gaussian();
  v.array() -= v.mean();
  return v;
}

DenseTensor additive_tensor(const std::vector<int>& dims, double mu,
                            const std::vector<Eigen::VectorXd>& effects) {
  DenseTensor t(dims);
  const auto strides = t.strides();
  for (Index flat = 0; flat < t.size(); ++flat) {
    double value = mu;
    for (size_t k = 0; k < dims.size(); ++k) {
      value += effects[k]((flat / strides[k]) % dims[k]);
    }
    t[flat] = value;
  }
  return t;
}

}  // namespace

TEST_CASE("arcsine transform values") {
  DenseTensor y({3, 1});
  y[0] = 0.5;
  y[1] = 1.0;
  y[2] = 0.75;
  DenseTensor n({3, 1});
  n[0] = 7.0;
  n[1] = 4.0;
  n[2] = 4.0;
  const DenseTensor x = arcsine_transform(ProportionTensor{y, n});
  CHECK(x[0] == 0.0);
  CHECK(x[1] == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(x[2] == doctest::Approx(kPi / 3.0).epsilon(1e-12));

  SUBCASE("validation") {
    DenseTensor bad_y = y;
    bad_y[0] = 1.5;
    CHECK_THROWS_AS(arcsine_transform(ProportionTensor{bad_y, n}), hose::Error);
    DenseTensor bad_n = n;
    bad_n[1] = 0.0;
    CHECK_THROWS_AS(arcsine_transform(ProportionTensor{y, bad_n}), hose::Error);
  }
}

TEST_CASE("back transform clamps and inverts") {
  DenseTensor counts({2, 1});
  counts[0] = 9.0;
  counts[1] = 4.0;
  DenseTensor theta({2, 1});
  theta[0] = 3.0 * std::asin(2.0 * 0.3 - 1.0);
  theta[1] = 100.0;  // far beyond the valid range; must clamp to 1
  const DenseTensor probs = arcsine_back_transform(theta, counts);
  CHECK(probs[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(1.0));
}

TEST_CASE("anova on a constant tensor") {
  const DenseTensor t = constant_tensor({3, 4, 2}, 2.5);
  const AnovaDecomposition d = anova_decompose(t);
  CHECK(d.grand_mean == doctest::Approx(2.5).epsilon(1e-14));
  for (const auto& effect : d.main_effects) {
    CHECK(effect.cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(frobenius_norm(d.residual) < 1e-12);
}

TEST_CASE("anova recovers planted additive structure") {
  const std::vector<int> dims{4, 3, 5};
  std::vector<Eigen::VectorXd> effects{centered_vector(4, 1, 1.0), centered_vector(3, 2, 0.7),
                                       centered_vector(5, 3, 1.3)};
  const double mu = -0.8;
  const DenseTensor t = additive_tensor(dims, mu, effects);
  const AnovaDecomposition d = anova_decompose(t);

  CHECK(std::abs(d.grand_mean - mu) < 1e-12);
  for (size_t k = 0; k < 3; ++k) {
    CHECK((d.main_effects[k] - effects[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(max_abs_diff(d.residual, DenseTensor(dims)) < 1e-12);
}

TEST_CASE("anova invariants on a random tensor") {
  const DenseTensor t = random_tensor({4, 3, 2}, 5);
  const AnovaDecomposition d = anova_decompose(t);

  SUBCASE("effects sum to zero") {
    for (const auto& effect : d.main_effects) {
      CHECK(std::abs(effect.sum()) < 1e-12);
    }
  }

  SUBCASE("every residual unfolding has zero row sums") {
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd row_sums =
          matricize(d.residual, k) * Eigen::VectorXd::Ones(t.size() / t.dim(k));
      CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("fit plus residual reconstructs the input") {
    CHECK(max_abs_diff(add(anova_fit(d), d.residual), t) < 1e-12);
  }

  SUBCASE("the projection is orthogonal") {
    const double total = frobenius_norm_sq(t);
    const double parts = frobenius_norm_sq(anova_fit(d)) + frobenius_norm_sq(d.residual);
    CHECK(rel_err(parts, total) < 1e-10);
  }

  SUBCASE("refitting the residual gives zero effects") {
    const AnovaDecomposition again = anova_decompose(d.residual);
    CHECK(std::abs(again.grand_mean) < 1e-12);
    for (const auto& effect : again.main_effects) {
      CHECK(effect.cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(max_abs_diff(again.residual, d.residual) < 1e-12);
  }
}

TEST_CASE("four-mode residual matches the inclusion-exclusion coefficients") {
  const std::vector<int> dims{3, 4, 2, 5};
  const DenseTensor x = random_tensor(dims, 6);
  const AnovaDecomposition d = anova_decompose(x);
  const double p = static_cast<double>(x.size());

  // Independent oracle: subtract p_k/p of each mode-k margin sum and add
  // back 3/p of the grand sum, with explicit nested loops.
  DenseTensor expected = x;
  double grand = 0.0;
  for (Index i = 0; i < x.size(); ++i) grand += x[i];
  const auto strides = x.strides();
  for (Index flat = 0; flat < x.size(); ++flat) {
    double value = x[flat] + 3.0 / p * grand;
    for (size_t k = 0; k < dims.size(); ++k) {
      const auto my_index = (flat / strides[k]) % dims[k];
      double margin = 0.0;
      for (Index other = 0; other < x.size(); ++other) {
        if ((other / strides[k]) % dims[k] == my_index) margin += x[other];
      }
      value -= static_cast<double>(dims[k]) / p * margin;
    }
    expected[flat] = value;
  }
  CHECK(max_abs_diff(d.residual, expected) < 1e-12);
}

TEST_CASE("pipeline leaves the additive fit alone") {
  const std::vector<int> dims{4, 4, 4};
  std::vector<Eigen::VectorXd> effects{centered_vector(4, 7, 1.0), centered_vector(4, 8, 1.0),
                                       centered_vector(4, 9, 1.0)};
  const DenseTensor additive = additive_tensor(dims, 1.5, effects);

  SUBCASE("zero residual short-circuits to the additive fit") {
    const hose::PipelineResult result =
        shrink_residual_pipeline(additive, hose::ResidualMethod::ModeSpecificSoft, 1.0);
    CHECK(result.shrunk_residual_norm == 0.0);
    CHECK(max_abs_diff(result.fitted, additive) < 1e-10);
  }

  SUBCASE("only the residual is shrunk; the additive part passes through") {
    DenseTensor x = additive;
    hose::Rng rng(18);
    for (Index i = 0; i < x.size(); ++i) x[i] += rng.gaussian();
    const AnovaDecomposition d = anova_decompose(x);
    const hose::PipelineResult result =
        shrink_residual_pipeline(x, hose::ResidualMethod::ModeSpecificSoft, 1.0);
    CHECK(max_abs_diff(hose::subtract(result.fitted, result.shrunk_residual), anova_fit(d)) <
          1e-12);
  }

  SUBCASE("shrinkage is a contraction for nonnegative thresholds") {
    DenseTensor x = additive;
    hose::Rng rng(17);
    for (Index i = 0; i < x.size(); ++i) x[i] += rng.gaussian();
    const AnovaDecomposition d = anova_decompose(x);
    const auto decomposition = hose::hosvd(d.residual);
    const DenseTensor shrunk = hose::apply_spectral(
        decomposition, hose::soft_threshold_plan({0.5, 0.7, 0.2}, 0.9));
    CHECK(frobenius_norm(shrunk) <= frobenius_norm(d.residual));
  }
}

TEST_CASE("pipeline beats plain anova and the identity on planted structure") {
  // Additive effects plus a low-multilinear-rank interaction, a scaled-down
  // version of the acceptance study.
  const std::vector<int> dims{8, 8, 8};
  const int seeds = 8;
  double loss_identity = 0.0, loss_anova = 0.0, loss_pipeline = 0.0;

  for (int s = 0; s < seeds; ++s) {
    hose::Rng rng(500 + static_cast<std::uint64_t>(s));
    std::vector<Eigen::VectorXd> effects;
    std::vector<hose::DenseMatrix> factors;
    for (int k = 0; k < 3; ++k) {
      effects.push_back(centered_vector(8, 600 + static_cast<std::uint64_t>(10 * s + k), 1.0));
      // Interaction factors orthogonal to the ones vector keep the margins
      // of the interaction exactly zero.
      hose::DenseMatrix g(8, 2);
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 8; ++i) g(i, j) = rng.gaussian();
        g.col(j).array() -= g.col(j).mean();
      }
      Eigen::HouseholderQR<hose::DenseMatrix> qr(g);
      factors.push_back(qr.householderQ() * hose::DenseMatrix::Identity(8, 2));
    }
    DenseTensor interaction = tucker_product(factors, random_tensor({2, 2, 2}, 700 + s));
    interaction = hose::scale(interaction,
                              std::sqrt(150.0 / frobenius_norm_sq(interaction)));
    const DenseTensor theta = add(additive_tensor(dims, 0.3, effects), interaction);

    DenseTensor x = theta;
    for (Index i = 0; i < x.size(); ++i) x[i] += rng.gaussian();

    const AnovaDecomposition d = anova_decompose(x);
    const hose::PipelineResult pipe =
        shrink_residual_pipeline(x, hose::ResidualMethod::ModeSpecificSoft, 1.0);

    loss_identity += squared_distance(x, theta);
    loss_anova += squared_distance(anova_fit(d), theta);
    loss_pipeline += squared_distance(pipe.fitted, theta);
  }

  CHECK(loss_pipeline < loss_anova);
  CHECK(loss_anova < loss_identity);
}
