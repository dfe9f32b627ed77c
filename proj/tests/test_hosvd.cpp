#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hose/hosvd.hpp"
#include "test_support.hpp"

using hose::DenseMatrix;
using hose::DenseTensor;
using hose::HosvdDecomposition;
using hose::Index;
using hose_test::max_abs_diff;
using hose_test::random_orthogonal;
using hose_test::random_tensor;
using hose_test::rel_err;

namespace {

DenseTensor divide_by_mode_values(const DenseTensor& t,
                                  const std::vector<Eigen::VectorXd>& values) {
  DenseTensor out = t;
  const auto& dims = t.dims();
  const auto strides = t.strides();
  for (Index flat = 0; flat < out.size(); ++flat) {
    for (size_t k = 0; k < dims.size(); ++k) {
      out[flat] /= values[k]((flat / strides[k]) % dims[k]);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("decomposition of a random tensor satisfies its invariants") {
  const DenseTensor t = random_tensor({4, 5, 6}, 101);
  const HosvdDecomposition d = hose::hosvd(t);

  SUBCASE("factors are orthogonal") {
    for (const auto& u : d.factors) {
      const DenseMatrix gram = u.transpose() * u;
      CHECK((gram - DenseMatrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("reconstruction") {
    const DenseTensor back = hose::reconstruct(d);
    CHECK(frobenius_norm(subtract(back, t)) / frobenius_norm(t) < 1e-10);
  }

  SUBCASE("core is all-orthogonal with the mode singular values on the diagonal") {
    for (int k = 0; k < 3; ++k) {
      const DenseMatrix unfolding = matricize(d.core, k);
      const DenseMatrix gram = unfolding * unfolding.transpose();
      const Eigen::VectorXd sq = d.mode_singular_values[static_cast<size_t>(k)].array().square();
      CHECK((gram - DenseMatrix(sq.asDiagonal())).norm() / sq.norm() < 1e-8);
    }
  }

  SUBCASE("spectra match the unfoldings and carry the full energy") {
    const auto direct = hose::mode_singular_values(t);
    const double energy = frobenius_norm_sq(t);
    for (int k = 0; k < 3; ++k) {
      const auto& sigma = d.mode_singular_values[static_cast<size_t>(k)];
      CHECK((sigma - direct[static_cast<size_t>(k)]).cwiseAbs().maxCoeff() < 1e-10 * sigma(0));
      CHECK(rel_err(sigma.squaredNorm(), energy) < 1e-10);
      for (Eigen::Index i = 0; i + 1 < sigma.size(); ++i) CHECK(sigma(i) >= sigma(i + 1));
    }
  }

  SUBCASE("normalized core recovers the reparameterized form") {
    const DenseTensor via_normalized =
        divide_by_mode_values(d.core, d.mode_singular_values);
    CHECK(max_abs_diff(via_normalized, d.normalized_core) < 1e-14);
    // (U.D.V) equals (U.S): rescale the normalized core back.
    DenseTensor rescaled = d.normalized_core;
    const auto strides = rescaled.strides();
    for (Index flat = 0; flat < rescaled.size(); ++flat) {
      for (size_t k = 0; k < 3; ++k) {
        rescaled[flat] *= d.mode_singular_values[k]((flat / strides[k]) % rescaled.dims()[k]);
      }
    }
    CHECK(frobenius_norm(subtract(tucker_product(d.factors, rescaled), t)) /
              frobenius_norm(t) <
          1e-10);
  }
}

TEST_CASE("repeat decompositions are bit identical") {
  const DenseTensor t = random_tensor({3, 4, 5}, 7);
  const HosvdDecomposition a = hose::hosvd(t);
  const HosvdDecomposition b = hose::hosvd(t);
  for (int k = 0; k < 3; ++k) {
    CHECK((a.factors[static_cast<size_t>(k)] - b.factors[static_cast<size_t>(k)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK(max_abs_diff(a.core, b.core) == 0.0);
}

TEST_CASE("orthogonal rotations leave mode spectra unchanged") {
  const DenseTensor t = random_tensor({4, 4, 4}, 23);
  std::vector<DenseMatrix> q{random_orthogonal(4, 61), random_orthogonal(4, 62),
                             random_orthogonal(4, 63)};
  const DenseTensor rotated = tucker_product(q, t);
  const auto s1 = hose::mode_singular_values(t);
  const auto s2 = hose::mode_singular_values(rotated);
  for (int k = 0; k < 3; ++k) {
    CHECK((s1[static_cast<size_t>(k)] - s2[static_cast<size_t>(k)]).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("one-by-one tensor") {
  const DenseTensor t({1, 1, 1}, {2.5});
  const HosvdDecomposition d = hose::hosvd(t);
  for (const auto& u : d.factors) CHECK(u(0, 0) == 1.0);
  for (const auto& s : d.mode_singular_values) CHECK(s(0) == doctest::Approx(2.5));
  CHECK(d.core[0] == doctest::Approx(2.5));
}

TEST_CASE("degenerate inputs are rejected") {
  SUBCASE("rank-one tensor") {
    DenseTensor t({3, 3, 3});
    hose::Rng rng(5);
    Eigen::VectorXd u(3), v(3), w(3);
    for (int i = 0; i < 3; ++i) {
      u(i) = rng.gaussian();
      v(i) = rng.gaussian();
      w(i) = rng.gaussian();
    }
    for (int c = 0; c < 3; ++c) {
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) t.at({a, b, c}) = u(a) * v(b) * w(c);
      }
    }
    CHECK_THROWS_WITH_AS(hose::hosvd(t), doctest::Contains("rank deficient"), hose::Error);
  }

  SUBCASE("tied mode spectrum") {
    // Orthogonal factors on an equal-entry superdiagonal core give equal
    // nonzero singular values on every mode.
    DenseTensor core({4, 4, 4});
    for (int a = 0; a < 4; ++a) core.at({a, a, a}) = 2.0;
    std::vector<DenseMatrix> q{random_orthogonal(4, 71), random_orthogonal(4, 72),
                               random_orthogonal(4, 73)};
    const DenseTensor t = tucker_product(q, core);
    try {
      hose::hosvd(t);
      FAIL("expected DegenerateSpectrum");
    } catch (const hose::Error& e) {
      CHECK(e.code() == hose::ErrorCode::DegenerateSpectrum);
    }
  }

  SUBCASE("mode longer than the product of the others") {
    try {
      hose::hosvd(random_tensor({10, 2, 2}, 9));
      FAIL("expected RankDeficient");
    } catch (const hose::Error& e) {
      CHECK(e.code() == hose::ErrorCode::RankDeficient);
    }
  }
}

TEST_CASE("multilinear rank") {
  SUBCASE("zero-padded construction") {
    const DenseTensor core = random_tensor({5, 5, 5}, 15);
    std::vector<DenseMatrix> u;
    for (int k = 0; k < 3; ++k) {
      u.push_back(random_orthogonal(10, 80 + static_cast<std::uint64_t>(k)).leftCols(5));
    }
    const DenseTensor t = tucker_product(u, core);
    CHECK(hose::multilinear_rank(t, 1e-8) == std::vector<int>{5, 5, 5});
  }

  SUBCASE("full-rank Gaussian tensor") {
    CHECK(hose::multilinear_rank(random_tensor({10, 10, 10}, 33), 1e-8) ==
          std::vector<int>{10, 10, 10});
  }
}
