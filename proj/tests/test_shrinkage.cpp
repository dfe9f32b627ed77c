#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include "hose/hosvd.hpp"
#include "hose/shrinkage.hpp"
#include "test_support.hpp"

using hose::DenseMatrix;
using hose::DenseTensor;
using hose::HosvdDecomposition;
using hose::Index;
using hose::ShrinkagePlan;
using hose::SpectralFunction;
using hose_test::max_abs_diff;
using hose_test::random_orthogonal;
using hose_test::random_tensor;
using hose_test::rel_err;

namespace {

double normalized_spectrum_variance(const Eigen::VectorXd& sigma) {
  const Eigen::VectorXd w = sigma / sigma.sum();
  const double mean = w.mean();
  return (w.array() - mean).square().sum() / static_cast<double>(w.size());
}

}  // namespace

TEST_CASE("identity plan reproduces the input") {
  const DenseTensor t = random_tensor({4, 3, 5}, 1);
  const HosvdDecomposition d = hose::hosvd(t);
  const DenseTensor out = hose::apply_spectral(d, hose::identity_plan(3));
  CHECK(frobenius_norm(subtract(out, t)) / frobenius_norm(t) < 1e-12);
}

TEST_CASE("a fully thresholded mode zeroes the estimate exactly") {
  const DenseTensor t = random_tensor({3, 4, 5}, 2);
  const HosvdDecomposition d = hose::hosvd(t);
  const double top = d.mode_singular_values[1](0);
  const DenseTensor out =
      hose::apply_spectral(d, hose::soft_threshold_plan({0.0, 2.0 * top, 0.0}));
  for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("scale multiplies the estimate linearly") {
  const DenseTensor t = random_tensor({3, 3, 4}, 3);
  const HosvdDecomposition d = hose::hosvd(t);
  const std::vector<double> lambdas{0.4, 0.2, 0.7};
  const DenseTensor unit = hose::apply_spectral(d, hose::soft_threshold_plan(lambdas, 1.0));
  const DenseTensor scaled = hose::apply_spectral(d, hose::soft_threshold_plan(lambdas, 1.7));
  CHECK(max_abs_diff(scaled, hose::scale(unit, 1.7)) < 1e-12);
}

TEST_CASE("estimate norm is nonincreasing in each soft threshold") {
  const DenseTensor t = random_tensor({4, 4, 4}, 4);
  const HosvdDecomposition d = hose::hosvd(t);
  for (int k = 0; k < 3; ++k) {
    double previous = -1.0;
    const double top = d.mode_singular_values[static_cast<size_t>(k)](0);
    bool first = true;
    for (double step = 0; step <= 10; ++step) {
      std::vector<double> lambdas{0.1, 0.2, 0.15};
      lambdas[static_cast<size_t>(k)] = step / 10.0 * 1.1 * top;
      const double norm =
          frobenius_norm(hose::apply_spectral(d, hose::soft_threshold_plan(lambdas)));
      if (!first) CHECK(norm <= previous + 1e-12);
      previous = norm;
      first = false;
    }
  }
}

TEST_CASE("truncation") {
  const DenseTensor t = random_tensor({4, 4, 4}, 5);
  const HosvdDecomposition d = hose::hosvd(t);

  SUBCASE("full ranks reproduce the input") {
    const DenseTensor out = hose::truncated_hosvd(d, {4, 4, 4});
    CHECK(frobenius_norm(subtract(out, t)) / frobenius_norm(t) < 1e-10);
  }

  SUBCASE("corner zeroing equals the spectral-function form") {
    const std::vector<int> ranks{2, 3, 1};
    const DenseTensor via_plan = hose::truncated_hosvd(d, ranks);

    DenseTensor corner = d.core;
    const auto strides = corner.strides();
    for (Index flat = 0; flat < corner.size(); ++flat) {
      for (size_t k = 0; k < 3; ++k) {
        if ((flat / strides[k]) % corner.dims()[k] >= ranks[k]) corner[flat] = 0.0;
      }
    }
    const DenseTensor via_corner = tucker_product(d.factors, corner);
    CHECK(max_abs_diff(via_plan, via_corner) < 1e-12);
  }

  SUBCASE("multilinear rank honors the requested bound") {
    const std::vector<int> ranks{2, 3, 2};
    const auto got = hose::multilinear_rank(hose::truncated_hosvd(d, ranks), 1e-8);
    for (size_t k = 0; k < 3; ++k) CHECK(got[k] <= ranks[k]);
  }

  SUBCASE("rank bounds are validated") {
    CHECK_THROWS_AS(hose::truncated_hosvd(d, {0, 4, 4}), hose::Error);
    CHECK_THROWS_AS(hose::truncated_hosvd(d, {1, 5, 4}), hose::Error);
    CHECK_THROWS_AS(hose::truncated_hosvd(d, {4, 4}), hose::Error);
  }

  SUBCASE("a full-rank cube is its own rank-(p,p,p) truncation") {
    // The input has multilinear rank (4,4,4), so the corner already holds
    // all of the core mass.
    const DenseTensor again = hose::truncated_hosvd(d, {4, 4, 4});
    CHECK(frobenius_norm(subtract(again, t)) / frobenius_norm(t) < 1e-10);
  }
}

TEST_CASE("core shrinkage") {
  const DenseTensor t = random_tensor({3, 4, 4}, 6);
  const HosvdDecomposition d = hose::hosvd(t);

  SUBCASE("zero level reproduces the input") {
    const DenseTensor out = hose::apply_core_shrinkage(d, {0.0});
    CHECK(frobenius_norm(subtract(out, t)) / frobenius_norm(t) < 1e-12);
  }

  SUBCASE("a level above the largest core magnitude zeroes everything") {
    double max_abs = 0.0;
    for (Index i = 0; i < d.core.size(); ++i) max_abs = std::max(max_abs, std::abs(d.core[i]));
    const DenseTensor out = hose::apply_core_shrinkage(d, {1.01 * max_abs});
    for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
  }

  SUBCASE("zero count matches the thresholded entries") {
    const double lambda = 0.8;
    DenseTensor shrunk = d.core;
    int expected_zeros = 0;
    for (Index i = 0; i < shrunk.size(); ++i) {
      if (std::abs(d.core[i]) <= lambda) ++expected_zeros;
      const double mag = std::abs(d.core[i]) - lambda;
      shrunk[i] = mag > 0.0 ? (d.core[i] < 0.0 ? -mag : mag) : 0.0;
    }
    int got_zeros = 0;
    for (Index i = 0; i < shrunk.size(); ++i) {
      if (shrunk[i] == 0.0) ++got_zeros;
    }
    CHECK(got_zeros == expected_zeros);
    CHECK(max_abs_diff(hose::apply_core_shrinkage(d, {lambda}),
                       tucker_product(d.factors, shrunk)) == 0.0);
  }
}

TEST_CASE("james_stein") {
  const DenseTensor x = random_tensor({3, 3, 3}, 7);
  const double p = static_cast<double>(x.size());

  SUBCASE("vanishing noise leaves the data untouched") {
    CHECK(max_abs_diff(hose::james_stein(x, 1e-300), x) == 0.0);
  }

  SUBCASE("the factor hits zero when the norm equals (p-2) tau2") {
    const double tau2 = frobenius_norm_sq(x) / (p - 2.0);
    const DenseTensor out = hose::james_stein(x, tau2);
    for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
  }

  SUBCASE("zero data maps to zero") {
    const DenseTensor out = hose::james_stein(DenseTensor({3, 3, 3}), 1.0);
    for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
  }

  SUBCASE("tiny tensors are rejected") {
    CHECK_THROWS_AS(hose::james_stein(DenseTensor({1, 2}, {1.0, 2.0}), 1.0), hose::Error);
  }
}

TEST_CASE("matrix baseline equals the direct SVD estimator") {
  const DenseTensor x = random_tensor({4, 3, 3}, 8);
  const DenseMatrix unfolding = matricize(x, 0);
  Eigen::JacobiSVD<DenseMatrix> svd(unfolding, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues();

  SUBCASE("soft threshold") {
    const double lambda = 0.6 * sigma(1);
    Eigen::VectorXd f = (sigma.array() - lambda).max(0.0);
    const DenseMatrix direct = svd.matrixU() * f.asDiagonal() * svd.matrixV().transpose();
    const DenseTensor got =
        hose::matrix_baseline(x, hose::ShrinkageFamily::SoftThreshold, lambda);
    CHECK((matricize(got, 0) - direct).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("efron-morris") {
    const double lambda = 0.4 * sigma(sigma.size() - 1) * sigma(sigma.size() - 1);
    Eigen::VectorXd f = sigma.array() - lambda / sigma.array();
    const DenseMatrix direct = svd.matrixU() * f.asDiagonal() * svd.matrixV().transpose();
    const DenseTensor got =
        hose::matrix_baseline(x, hose::ShrinkageFamily::EfronMorris, lambda);
    CHECK((matricize(got, 0) - direct).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("lambda zero reproduces the input") {
    const DenseTensor got = hose::matrix_baseline(x, hose::ShrinkageFamily::SoftThreshold, 0.0);
    CHECK(max_abs_diff(got, x) < 1e-12);
  }

  SUBCASE("thresholding everything gives zero") {
    const DenseTensor got =
        hose::matrix_baseline(x, hose::ShrinkageFamily::SoftThreshold, 2.0 * sigma(0));
    for (Index i = 0; i < got.size(); ++i) CHECK(got[i] == 0.0);
  }

  SUBCASE("a rank-deficient unfolding is rejected") {
    DenseTensor rank1({3, 2, 2});
    for (int c = 0; c < 2; ++c) {
      for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 3; ++a) {
          rank1.at({a, b, c}) = static_cast<double>((a + 1) * (b + 1) * (c + 2));
        }
      }
    }
    try {
      hose::matrix_baseline(rank1, hose::ShrinkageFamily::SoftThreshold, 0.1);
      FAIL("expected RankDeficient");
    } catch (const hose::Error& e) {
      CHECK(e.code() == hose::ErrorCode::RankDeficient);
    }
  }
}

TEST_CASE("matrix soft thresholding is orthogonally equivariant") {
  const DenseTensor x = random_tensor({4, 6}, 9);
  const DenseMatrix w = random_orthogonal(4, 91);
  const DenseMatrix z = random_orthogonal(6, 92);
  const double lambda = 0.5;

  const DenseTensor rotated = mode_multiply(mode_multiply(x, w, 0), z, 1);
  const DenseTensor t_rotated =
      hose::matrix_baseline(rotated, hose::ShrinkageFamily::SoftThreshold, lambda);
  const DenseTensor rotated_t = mode_multiply(
      mode_multiply(hose::matrix_baseline(x, hose::ShrinkageFamily::SoftThreshold, lambda), w,
                    0),
      z, 1);
  CHECK(max_abs_diff(t_rotated, rotated_t) < 1e-9);
}

TEST_CASE("opposite-sign thresholds disperse and compress mode spectra") {
  const DenseTensor t = random_tensor({10, 10, 10}, 10);
  const HosvdDecomposition d = hose::hosvd(t);
  const auto before = hose::mode_singular_values(t);
  const double top0 = d.mode_singular_values[0](0);
  const double top2 = d.mode_singular_values[2](0);

  const DenseTensor out =
      hose::apply_spectral(d, hose::soft_threshold_plan({0.5 * top0, 0.0, -10.0 * top2}));
  const auto after = hose::mode_singular_values(out);

  CHECK(normalized_spectrum_variance(after[0]) > normalized_spectrum_variance(before[0]));
  CHECK(normalized_spectrum_variance(after[2]) < normalized_spectrum_variance(before[2]));
}
