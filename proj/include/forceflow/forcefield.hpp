#pragma once

#include "forceflow/affinity.hpp"
#include "forceflow/embedder.hpp"

#include <string>

namespace forceflow {

enum class ForceKind { modified_attraction, raw_attraction, repulsion, negative_gradient };

std::string to_string(ForceKind kind);
ForceKind force_kind_from_string(const std::string& s);

// Per-point force vectors sampled at the anchor positions of an embedding.
struct ForceSampleSet {
  Points2 anchors;
  Points2 forces;
  ForceKind kind = ForceKind::modified_attraction;
  double Z = 0.0;
  // True when `forces` holds the negated formula (see with_sign).
  bool sign_flipped = false;

  void validate() const;
};

// f_i = sum_{j != i} Z (y_i - y_j) sum_{k != i} p_ik q_kj, as written.
ForceSampleSet modified_attraction(const AffinityMatrix& P, const Embedding& emb);

// f_i = sum_{j != i} p_ij q_ij Z (y_i - y_j), as written.
ForceSampleSet raw_attraction(const AffinityMatrix& P, const Embedding& emb);

ForceSampleSet repulsion(const AffinityMatrix& P, const Embedding& emb);

// -dC/dy_i / 4 = repulsion - attraction.
ForceSampleSet negative_gradient(const AffinityMatrix& P, const Embedding& emb);

ForceSampleSet extract_forces(ForceKind kind, const AffinityMatrix& P, const Embedding& emb);

// Both attraction formulas use (y_i - y_j), which points away from a point's
// neighbours. Flowing with y <- y + f therefore needs the negated vectors for
// points to contract onto sinks; flipping is the default orientation.
inline constexpr bool kDefaultFlipSign = true;

ForceSampleSet with_sign(ForceSampleSet set, bool flip);

}  // namespace forceflow
