#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forceflow/errors.hpp"
#include "forceflow/forcefield.hpp"
#include "oracles.hpp"

using namespace forceflow;

namespace {

struct Instance {
  AffinityMatrix P;
  Embedding emb;
};

Instance make_instance(int n, uint64_t seed) {
  const Matrix x = oracle::random_matrix(n, 3, seed);
  Instance in{compute_affinities(Dataset::from_points(x), std::min(3.0, n - 1.5)), {}};
  in.emb.Y = oracle::random_points(n, seed + 1000);
  const auto [Q, Z] = output_affinities(in.emb.Y);
  in.emb.Q = Q;
  in.emb.Z = Z;
  return in;
}

Embedding embedding_of(const Points2& Y) {
  Embedding e;
  e.Y = Y;
  const auto [Q, Z] = output_affinities(Y);
  e.Q = Q;
  e.Z = Z;
  return e;
}

}  // namespace

TEST_CASE("force kind names") {
  for (ForceKind k : {ForceKind::modified_attraction, ForceKind::raw_attraction, ForceKind::repulsion,
                      ForceKind::negative_gradient}) {
    CHECK(force_kind_from_string(to_string(k)) == k);
  }
  CHECK(force_kind_from_string("modified") == ForceKind::modified_attraction);
  CHECK(force_kind_from_string("raw") == ForceKind::raw_attraction);
  CHECK_THROWS_AS(force_kind_from_string("sideways"), ConfigError);
}

TEST_CASE("modified attraction") {
  SUBCASE("two points give zero force") {
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    const AffinityMatrix P = symmetrize(c);
    Points2 y(2, 2);
    y << -1, 0.5, 2, 1;
    const ForceSampleSet f = modified_attraction(P, embedding_of(y));
    CHECK(f.forces.isZero(0.0));
    CHECK(f.kind == ForceKind::modified_attraction);
    CHECK_FALSE(f.sign_flipped);
  }
  SUBCASE("matches triple loop") {
    for (int n : {3, 6, 11}) {
      const Instance in = make_instance(n, static_cast<uint64_t>(n));
      const ForceSampleSet f = modified_attraction(in.P, in.emb);
      CHECK((f.forces - oracle::modified_attraction(in.P.P, in.emb.Y)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(f.anchors == in.emb.Y);
      CHECK(f.Z == in.emb.Z);
    }
  }
  SUBCASE("permutation equivariance") {
    const int n = 9;
    const Instance in = make_instance(n, 42);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    AffinityMatrix Pp = in.P;
    Points2 yp(n, 2);
    for (int i = 0; i < n; ++i) {
      yp.row(i) = in.emb.Y.row(perm[i]);
      for (int j = 0; j < n; ++j) Pp.P(i, j) = in.P.P(perm[i], perm[j]);
    }
    const Points2 base = modified_attraction(in.P, in.emb).forces;
    const Points2 fp = modified_attraction(Pp, embedding_of(yp)).forces;
    for (int i = 0; i < n; ++i) CHECK((fp.row(i) - base.row(perm[i])).norm() < 1e-12);
  }
  SUBCASE("translation invariant and rotation equivariant") {
    const Instance in = make_instance(8, 7);
    const Points2 base = modified_attraction(in.P, in.emb).forces;
    Points2 shifted = in.emb.Y;
    shifted.rowwise() += Eigen::RowVector2d(-4.0, 2.5);
    CHECK((modified_attraction(in.P, embedding_of(shifted)).forces - base).cwiseAbs().maxCoeff() < 1e-12);
    const double t = 1.1;
    Eigen::Matrix2d R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Points2 rot = in.emb.Y * R.transpose();
    const Points2 fr = modified_attraction(in.P, embedding_of(rot)).forces;
    CHECK((fr - base * R.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape mismatch") {
    const Instance in = make_instance(5, 3);
    const Instance other = make_instance(6, 3);
    CHECK_THROWS_AS(modified_attraction(in.P, other.emb), InputError);
  }
}

TEST_CASE("other force kinds") {
  const Instance in = make_instance(10, 5);
  const ForceDecomposition d = decompose_forces(in.P, in.emb.Y);
  CHECK(raw_attraction(in.P, in.emb).forces == d.attraction);
  CHECK(repulsion(in.P, in.emb).forces == d.repulsion);
  CHECK((negative_gradient(in.P, in.emb).forces + gradient(in.P, in.emb.Y) / 4.0).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((raw_attraction(in.P, in.emb).forces - oracle::attraction(in.P.P, in.emb.Y)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(extract_forces(ForceKind::repulsion, in.P, in.emb).kind == ForceKind::repulsion);
}

TEST_CASE("sign flip") {
  const Instance in = make_instance(7, 8);
  const ForceSampleSet f = modified_attraction(in.P, in.emb);
  const ForceSampleSet g = with_sign(f, true);
  CHECK(g.sign_flipped);
  CHECK(g.forces == -f.forces);
  CHECK(g.anchors == f.anchors);
  CHECK(with_sign(g, false).forces == g.forces);
  const ForceSampleSet h = with_sign(g, true);
  CHECK(h.forces == f.forces);
  CHECK_FALSE(h.sign_flipped);
  CHECK(with_sign(f, false).forces == f.forces);
}
