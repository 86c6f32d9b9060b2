#pragma once

#include "forceflow/types.hpp"

#include <optional>

namespace forceflow {

// n input vectors in R^s, with optional integer labels.
struct Dataset {
  Matrix points;                 // n x s
  std::optional<Labels> labels;  // length n when present
  std::vector<int64_t> ids;      // source row index of each point

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  // Throws InputError unless n >= 2, s >= 1, every feature is finite and
  // labels/ids (if present) have length n.
  void validate() const;

  static Dataset from_points(Matrix points, std::optional<Labels> labels = std::nullopt);
};

// Symmetric joint input similarities with the bandwidths that produced them.
struct AffinityMatrix {
  Matrix P;  // n x n, zero diagonal, sums to 1
  Vector sigmas;
  double perplexity = 30.0;
};

inline constexpr double kDefaultPerplexity = 30.0;

Matrix pairwise_sq_dists(const Dataset& data);

// Per-row bisection on sigma_i so that 2^H(p_.|i) matches the perplexity.
// Bracket [1e-12, 1e12], geometric midpoints, at most 100 steps.
Vector calibrate_bandwidths(const Matrix& sq_dists, double perplexity);

// Row-stochastic p_{j|i} for the given bandwidths.
Matrix conditional_affinities(const Matrix& sq_dists, const Vector& sigmas);

// P_ij = (p_{j|i} + p_{i|j}) / (2n).
AffinityMatrix symmetrize(const Matrix& cond);

// Shannon perplexity 2^H of one conditional row (diagonal entry ignored).
double row_perplexity(const Matrix& cond, Eigen::Index row);

// Convenience: distances -> bandwidths -> conditional -> symmetric.
AffinityMatrix compute_affinities(const Dataset& data, double perplexity = kDefaultPerplexity);

}  // namespace forceflow
