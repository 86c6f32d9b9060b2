#include "forceflow/forcefield.hpp"

#include "forceflow/errors.hpp"

namespace forceflow {

namespace {

void check_pair(const AffinityMatrix& P, const Embedding& emb) {
  const Eigen::Index n = emb.Y.rows();
  if (P.P.rows() != n || P.P.cols() != n || emb.Q.rows() != n || emb.Q.cols() != n) {
    throw InputError("affinities and embedding describe different datasets");
  }
}

ForceSampleSet make_set(const Embedding& emb, ForceKind kind) {
  ForceSampleSet s;
  s.anchors = emb.Y;
  s.forces = Points2::Zero(emb.Y.rows(), 2);
  s.kind = kind;
  s.Z = emb.Z;
  return s;
}

}  // namespace

std::string to_string(ForceKind kind) {
  switch (kind) {
    case ForceKind::modified_attraction: return "modified_attraction";
    case ForceKind::raw_attraction: return "raw_attraction";
    case ForceKind::repulsion: return "repulsion";
    case ForceKind::negative_gradient: return "negative_gradient";
  }
  return "unknown";
}

ForceKind force_kind_from_string(const std::string& s) {
  if (s == "modified_attraction" || s == "modified") return ForceKind::modified_attraction;
  if (s == "raw_attraction" || s == "raw") return ForceKind::raw_attraction;
  if (s == "repulsion") return ForceKind::repulsion;
  if (s == "negative_gradient") return ForceKind::negative_gradient;
  throw ConfigError("unknown force kind '" + s + "'");
}

void ForceSampleSet::validate() const {
  if (anchors.rows() != forces.rows()) throw InputError("anchor and force counts differ");
  if (!anchors.allFinite() || !forces.allFinite()) throw InputError("non-finite force sample");
}

ForceSampleSet modified_attraction(const AffinityMatrix& P, const Embedding& emb) {
  check_pair(P, emb);
  ForceSampleSet s = make_set(emb, ForceKind::modified_attraction);
  // P has a zero diagonal, so (PQ)_ij already excludes k = i.
  const Matrix coupling = P.P * emb.Q;
  const Vector row_sums = coupling.rowwise().sum();
  const Matrix pulled = coupling * emb.Y;
  for (Eigen::Index i = 0; i < emb.Y.rows(); ++i) {
    s.forces.row(i) = emb.Z * (row_sums(i) * emb.Y.row(i) - pulled.row(i));
  }
  return s;
}

ForceSampleSet raw_attraction(const AffinityMatrix& P, const Embedding& emb) {
  check_pair(P, emb);
  ForceSampleSet s = make_set(emb, ForceKind::raw_attraction);
  s.forces = decompose_forces(P, emb.Y).attraction;
  return s;
}

ForceSampleSet repulsion(const AffinityMatrix& P, const Embedding& emb) {
  check_pair(P, emb);
  ForceSampleSet s = make_set(emb, ForceKind::repulsion);
  s.forces = decompose_forces(P, emb.Y).repulsion;
  return s;
}

ForceSampleSet negative_gradient(const AffinityMatrix& P, const Embedding& emb) {
  check_pair(P, emb);
  ForceSampleSet s = make_set(emb, ForceKind::negative_gradient);
  const ForceDecomposition d = decompose_forces(P, emb.Y);
  s.forces = d.repulsion - d.attraction;
  return s;
}

ForceSampleSet extract_forces(ForceKind kind, const AffinityMatrix& P, const Embedding& emb) {
  switch (kind) {
    case ForceKind::modified_attraction: return modified_attraction(P, emb);
    case ForceKind::raw_attraction: return raw_attraction(P, emb);
    case ForceKind::repulsion: return repulsion(P, emb);
    case ForceKind::negative_gradient: return negative_gradient(P, emb);
  }
  throw ConfigError("unknown force kind");
}

ForceSampleSet with_sign(ForceSampleSet set, bool flip) {
  if (flip) {
    set.forces = -set.forces;
    set.sign_flipped = !set.sign_flipped;
  }
  return set;
}

}  // namespace forceflow
