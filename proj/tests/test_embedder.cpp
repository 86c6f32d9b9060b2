#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forceflow/embedder.hpp"
#include "forceflow/errors.hpp"
#include "forceflow/eval.hpp"
#include "forceflow/pipeline.hpp"
#include "oracles.hpp"

#include <Eigen/SVD>

using namespace forceflow;

namespace {

AffinityMatrix random_affinity(int n, uint64_t seed) {
  const Matrix x = oracle::random_matrix(n, 4, seed);
  return compute_affinities(Dataset::from_points(x), std::min(3.0, n - 1.5));
}

double stddev(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("pca init") {
  SUBCASE("points along one axis") {
    Matrix x = Matrix::Zero(6, 3);
    for (int i = 0; i < 6; ++i) x(i, 1) = i - 2.5;
    const Points2 y = pca_init(Dataset::from_points(x));
    CHECK(std::abs(stddev(y.col(0)) - 1e-4) < 1e-16);
    CHECK(y.col(1).cwiseAbs().maxCoeff() < 1e-15);
    // Evenly spaced input stays evenly spaced.
    for (int i = 2; i < 6; ++i) CHECK(std::abs((y(i, 0) - y(i - 1, 0)) - (y(1, 0) - y(0, 0))) < 1e-16);
  }
  SUBCASE("output columns are uncorrelated") {
    const Points2 y = pca_init(Dataset::from_points(oracle::random_matrix(80, 6, 2)));
    const Eigen::VectorXd a = y.col(0).array() - y.col(0).mean();
    const Eigen::VectorXd b = y.col(1).array() - y.col(1).mean();
    CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) < 1e-10);
    CHECK(stddev(y.col(0)) >= stddev(y.col(1)));
  }
  SUBCASE("matches SVD projection up to sign") {
    const Matrix x = oracle::random_matrix(50, 5, 7);
    const Matrix c = x.rowwise() - x.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinV);
    Matrix proj = c * svd.matrixV().leftCols(2);
    proj *= 1e-4 / stddev(proj.col(0));
    const Points2 y = pca_init(Dataset::from_points(x));
    for (int col = 0; col < 2; ++col) {
      const double same = (y.col(col) - proj.col(col)).cwiseAbs().maxCoeff();
      const double flip = (y.col(col) + proj.col(col)).cwiseAbs().maxCoeff();
      CHECK(std::min(same, flip) < 1e-12);
    }
  }
}

TEST_CASE("random init") {
  const Points2 a = random_init(10000, 3);
  const Points2 b = random_init(10000, 3);
  const Points2 c = random_init(10000, 4);
  CHECK(a == b);
  CHECK(a != c);
  for (int col = 0; col < 2; ++col) CHECK(std::abs(stddev(a.col(col)) - 1e-4) < 0.05e-4);
}

TEST_CASE("output affinities") {
  SUBCASE("two points") {
    Points2 y(2, 2);
    y << 0, 0, 1, 0;
    const auto [Q, Z] = output_affinities(y);
    CHECK(Z == doctest::Approx(1.0));
    CHECK(Q(0, 1) == doctest::Approx(0.5));
    CHECK(Q(0, 0) == 0.0);
  }
  SUBCASE("equilateral triangle") {
    Points2 y(3, 2);
    y << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
    const auto [Q, Z] = output_affinities(y);
    CHECK(Z == doctest::Approx(3.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(Q(i, j) == doctest::Approx(1.0 / 6.0));
  }
  SUBCASE("random points match double loop") {
    const Points2 y = oracle::random_points(12, 5);
    const auto [Q, Z] = output_affinities(y);
    const auto [Qo, Zo] = oracle::q_matrix(y);
    CHECK(std::abs(Z - Zo) < 1e-12 * Zo);
    CHECK((Q - Qo).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kl cost") {
  const AffinityMatrix P = random_affinity(10, 1);
  SUBCASE("zero when Q equals P") { CHECK(std::abs(kl_cost(P.P, P.P)) < 1e-14); }
  SUBCASE("nonnegative and matches the direct sum") {
    for (uint64_t s = 0; s < 5; ++s) {
      const Points2 y = oracle::random_points(10, 100 + s);
      const Matrix Q = output_affinities(y).Q;
      const double c = kl_cost(P, Q);
      CHECK(c >= 0.0);
      CHECK(std::abs(c - oracle::kl(P.P, Q)) < 1e-12);
    }
  }
}

TEST_CASE("gradient") {
  const AffinityMatrix P = random_affinity(8, 2);
  const Points2 y = oracle::random_points(8, 3);

  SUBCASE("finite differences") {
    const Points2 g = gradient(P, y);
    const double h = 1e-6;
    double err = 0;
    for (int i = 0; i < 8; ++i) {
      for (int c = 0; c < 2; ++c) {
        Points2 yp = y, ym = y;
        yp(i, c) += h;
        ym(i, c) -= h;
        const double fd = (kl_cost(P, output_affinities(yp).Q) - kl_cost(P, output_affinities(ym).Q)) / (2 * h);
        err = std::max(err, std::abs(fd - g(i, c)));
      }
    }
    CHECK(err < 1e-4);
  }
  SUBCASE("sums to zero and is translation invariant") {
    const Points2 g = gradient(P, y);
    CHECK(g.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    Points2 shifted = y;
    shifted.rowwise() += Eigen::RowVector2d(3.0, -1.5);
    CHECK((gradient(P, shifted) - g).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("rotation equivariant") {
    const double t = 0.7;
    Eigen::Matrix2d R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Points2 yr = y * R.transpose();
    const Points2 gr = gradient(P, yr);
    CHECK((gr - gradient(P, y) * R.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("decomposition identity") {
    for (uint64_t s = 0; s < 5; ++s) {
      const AffinityMatrix Ps = random_affinity(5 + 5 * static_cast<int>(s % 3), s);
      const Points2 ys = oracle::random_points(static_cast<int>(Ps.P.rows()), 50 + s);
      const ForceDecomposition d = decompose_forces(Ps, ys);
      const Points2 g = gradient(Ps, ys);
      CHECK((g - 4.0 * (d.attraction - d.repulsion)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((d.attraction - oracle::attraction(Ps.P, ys)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((d.repulsion - oracle::repulsion(ys)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("two points are antisymmetric") {
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    const AffinityMatrix P2 = symmetrize(c);
    Points2 y2(2, 2);
    y2 << 0, 0, 2, 1;
    const Points2 g = gradient(P2, y2);
    CHECK((g.row(0) + g.row(1)).norm() < 1e-15);
    // p = q = 1/2 for two points, so the gradient vanishes.
    CHECK(g.norm() < 1e-15);
  }
}

TEST_CASE("run_tsne") {
  SUBCASE("config validation") {
    TsneConfig c;
    c.max_iters = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    CHECK(c.resolved_learning_rate(3600) == doctest::Approx(300.0));
    CHECK(c.resolved_learning_rate(1200) == doctest::Approx(200.0));
  }
  SUBCASE("trace and iteration count") {
    const AffinityMatrix P = random_affinity(20, 4);
    TsneConfig c;
    c.max_iters = 120;
    c.early_exaggeration_iters = 50;
    c.momentum_switch_iter = 50;
    c.equilibrium_grad_tol = 1e-300;
    c.trace_every = 10;
    std::vector<TraceRecord> trace;
    const Embedding e = run_tsne(P, random_init(20, 1), c, [&](const TraceRecord& r) { trace.push_back(r); });
    CHECK(e.iterations_run == 120);
    CHECK(e.stop_reason == StopReason::max_iters);
    CHECK(trace.size() == 120);
    CHECK(trace[10].iteration == 10);
    CHECK(std::isfinite(trace[10].cost));
    CHECK(std::isnan(trace[9].cost));
    CHECK(e.cost == doctest::Approx(kl_cost(P, e.Q)));
    CHECK(e.Z == doctest::Approx(output_affinities(e.Y).Z));
  }
  SUBCASE("deterministic") {
    const AffinityMatrix P = random_affinity(30, 5);
    TsneConfig c;
    c.max_iters = 100;
    c.early_exaggeration_iters = 50;
    c.momentum_switch_iter = 50;
    const Embedding a = run_tsne(P, random_init(30, 9), c);
    const Embedding b = run_tsne(P, random_init(30, 9), c);
    CHECK(a.Y == b.Y);
  }
  SUBCASE("two gaussians separate") {
    const Dataset d = gen_gaussians(two_gaussians(10, 100, 10.0), 3);
    const AffinityMatrix P = compute_affinities(d, 30.0);
    const Embedding e = run_tsne(P, pca_init(d), TsneConfig{});
    CHECK(silhouette(e.Y, *d.labels) >= 0.5);
    CHECK(e.cost < kl_cost(P, output_affinities(pca_init(d)).Q));
  }
}
