#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forceflow/affinity.hpp"
#include "forceflow/errors.hpp"
#include "oracles.hpp"

#include <limits>

using namespace forceflow;

namespace {

Dataset line_points(int n) {
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = i;
  return Dataset::from_points(x);
}

}  // namespace

TEST_CASE("pairwise squared distances") {
  SUBCASE("3-4-5 triangle") {
    Matrix x(2, 2);
    x << 0, 0, 3, 4;
    const Matrix d = pairwise_sq_dists(Dataset::from_points(x));
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == 25.0);
    CHECK(d(1, 0) == 25.0);
    CHECK(d(1, 1) == 0.0);
  }
  SUBCASE("duplicated pair") {
    Matrix x(2, 3);
    x << 1, 2, 3, 1, 2, 3;
    CHECK(pairwise_sq_dists(Dataset::from_points(x)).isZero(0.0));
  }
  SUBCASE("random points match double loop") {
    const Matrix x = oracle::random_matrix(5, 3, 11);
    const Matrix d = pairwise_sq_dists(Dataset::from_points(x));
    CHECK((d - oracle::sq_dists(x)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("non-finite feature") {
    Matrix x = oracle::random_matrix(4, 2, 1);
    x(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(pairwise_sq_dists(Dataset::from_points(x)), InputError);
  }
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset::from_points(Matrix::Zero(1, 2)).validate(), InputError);
  CHECK_THROWS_AS(Dataset::from_points(Matrix::Zero(3, 2), Labels{1, 2}).validate(), InputError);
  CHECK_NOTHROW(Dataset::from_points(Matrix::Zero(3, 2), Labels{1, 2, 3}).validate());
}

TEST_CASE("bandwidth calibration") {
  SUBCASE("equilateral triangle gives equal sigmas") {
    Matrix x(3, 2);
    x << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
    const Vector s = calibrate_bandwidths(pairwise_sq_dists(Dataset::from_points(x)), 2.0);
    CHECK(s(0) == doctest::Approx(s(1)).epsilon(1e-12));
    CHECK(s(1) == doctest::Approx(s(2)).epsilon(1e-12));
  }
  SUBCASE("every row reaches the target perplexity") {
    const Matrix x = oracle::random_matrix(40, 4, 3);
    const Matrix d2 = pairwise_sq_dists(Dataset::from_points(x));
    for (double perp : {2.5, 5.0, 12.0, 30.0}) {
      const Vector s = calibrate_bandwidths(d2, perp);
      const Matrix cond = conditional_affinities(d2, s);
      for (Eigen::Index i = 0; i < cond.rows(); ++i) {
        CHECK(std::abs(row_perplexity(cond, i) - perp) / perp < 1e-5);
      }
    }
  }
  SUBCASE("line of 10 points matches an independent bisection") {
    const Dataset d = line_points(10);
    const Matrix d2 = pairwise_sq_dists(d);
    const Vector s = calibrate_bandwidths(d2, 5.0);
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(s(i) - oracle::bisect_sigma(oracle::sq_dists(d.points), i, 5.0)) < 1e-6);
    }
  }
  SUBCASE("perplexity out of range") {
    const Matrix d2 = pairwise_sq_dists(line_points(5));
    CHECK_THROWS_AS(calibrate_bandwidths(d2, 1.0), ConfigError);
    CHECK_THROWS_AS(calibrate_bandwidths(d2, 5.0), ConfigError);
    CHECK_THROWS_AS(calibrate_bandwidths(d2, 0.5), ConfigError);
  }
  SUBCASE("unreachable perplexity reports the row") {
    // All neighbours equidistant: perplexity is n - 1 = 3 for every sigma.
    Matrix d2 = Matrix::Constant(4, 4, 1.0);
    d2.diagonal().setZero();
    try {
      calibrate_bandwidths(d2, 2.0);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("row 0") != std::string::npos);
    }
  }
}

TEST_CASE("conditional affinities") {
  SUBCASE("two points") {
    Matrix x(2, 1);
    x << 0, 2;
    const Matrix d2 = pairwise_sq_dists(Dataset::from_points(x));
    const Matrix c = conditional_affinities(d2, Vector::Constant(2, 0.7));
    CHECK(c(0, 1) == 1.0);
    CHECK(c(1, 0) == 1.0);
    CHECK(c(0, 0) == 0.0);
  }
  SUBCASE("equidistant points") {
    Matrix d2 = Matrix::Constant(3, 3, 4.0);
    d2.diagonal().setZero();
    const Matrix c = conditional_affinities(d2, Vector::Constant(3, 1.3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(c(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
  }
  SUBCASE("random points match the direct formula") {
    const Matrix x = oracle::random_matrix(6, 3, 5);
    const Matrix d2 = pairwise_sq_dists(Dataset::from_points(x));
    const std::vector<double> sig{0.5, 0.9, 1.2, 2.0, 0.8, 1.1};
    const Matrix c = conditional_affinities(d2, Eigen::Map<const Vector>(sig.data(), 6));
    CHECK((c - oracle::conditional(oracle::sq_dists(x), sig)).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(c.row(i).sum() - 1.0) < 1e-10);
  }
  SUBCASE("underflow names the row") {
    Matrix d2 = Matrix::Constant(3, 3, 1e6);
    d2.diagonal().setZero();
    Vector s(3);
    s << 1.0, 1e-3, 1.0;
    try {
      conditional_affinities(d2, s);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("row 0") != std::string::npos);
    }
  }
  SUBCASE("non-positive sigma") {
    Matrix d2 = Matrix::Ones(2, 2);
    d2.diagonal().setZero();
    CHECK_THROWS_AS(conditional_affinities(d2, Vector::Zero(2)), ConfigError);
  }
}

TEST_CASE("symmetrize") {
  SUBCASE("two points") {
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    const AffinityMatrix a = symmetrize(c);
    CHECK(a.P(0, 1) == 0.5);
    CHECK(a.P(1, 0) == 0.5);
  }
  SUBCASE("random instance: formula, symmetry, normalisation") {
    const Dataset d = Dataset::from_points(oracle::random_matrix(5, 4, 9));
    const AffinityMatrix a = compute_affinities(d, 3.0);
    const Matrix d2 = oracle::sq_dists(d.points);
    std::vector<double> sig(a.sigmas.data(), a.sigmas.data() + 5);
    const Matrix expected = oracle::joint(oracle::conditional(d2, sig));
    CHECK((a.P - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(a.P.sum() - 1.0) < 1e-12);
    CHECK((a.P - a.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.P.diagonal().isZero(0.0));
  }
}

TEST_CASE("affinity properties") {
  const Matrix x = oracle::random_matrix(25, 3, 21);
  const AffinityMatrix base = compute_affinities(Dataset::from_points(x), 6.0);

  SUBCASE("permutation equivariance") {
    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(4);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(25, 3);
    for (int i = 0; i < 25; ++i) xp.row(i) = x.row(perm[i]);
    const AffinityMatrix ap = compute_affinities(Dataset::from_points(xp), 6.0);
    double err = 0;
    for (int i = 0; i < 25; ++i)
      for (int j = 0; j < 25; ++j) err = std::max(err, std::abs(ap.P(i, j) - base.P(perm[i], perm[j])));
    CHECK(err < 1e-12);
  }
  SUBCASE("scale invariance") {
    const double c = 3.7;
    const AffinityMatrix as = compute_affinities(Dataset::from_points(c * x), 6.0);
    CHECK((as.sigmas - c * base.sigmas).cwiseAbs().maxCoeff() < 1e-8 * c);
    CHECK((as.P - base.P).cwiseAbs().maxCoeff() < 1e-10);
  }
}
