#pragma once

#include "forceflow/affinity.hpp"
#include "forceflow/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace forceflow {

enum class InitMode { pca, random };

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& s);

// Optimizer settings. Defaults follow openTSNE: 250 exaggerated iterations
// (factor 12, momentum 0.5) then 500 plain ones (momentum 0.8).
struct TsneConfig {
  double perplexity = kDefaultPerplexity;
  // Step applied to the force balance (attraction - repulsion), i.e. to a
  // quarter of dC/dy. Unset means max(n / 12, 200); with n / 12 alone a
  // small embedding collapses during exaggeration and never re-expands.
  std::optional<double> learning_rate;
  double early_exaggeration_factor = 12.0;
  int early_exaggeration_iters = 250;
  int max_iters = 750;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  double equilibrium_grad_tol = 1e-5;
  InitMode init_mode = InitMode::pca;
  uint64_t seed = 0;
  // Cost is evaluated for the trace every this many iterations (0 = never).
  int trace_every = 50;

  void validate() const;
  double resolved_learning_rate(Eigen::Index n) const;
};

enum class StopReason { equilibrium, max_iters };

std::string to_string(StopReason reason);

struct Embedding {
  Points2 Y;
  double Z = 0.0;
  Matrix Q;
  double cost = 0.0;
  int iterations_run = 0;
  double grad_max_norm = 0.0;
  StopReason stop_reason = StopReason::max_iters;
};

struct TraceRecord {
  int iteration = 0;
  double cost = 0.0;  // NaN on iterations where cost was not evaluated
  double grad_max_norm = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// Top-2 principal axes of the centered data, rescaled so the first column has
// standard deviation 1e-4. Each axis is signed so its largest-magnitude
// loading is positive. One-dimensional data gets a zero second column.
Points2 pca_init(const Dataset& data, uint64_t seed = 0);

// i.i.d. N(0, 1e-4^2) coordinates.
Points2 random_init(Eigen::Index n, uint64_t seed);

struct OutputAffinities {
  Matrix Q;
  double Z = 0.0;
};

OutputAffinities output_affinities(const Points2& Y);

// KL(P || Q) over off-diagonal entries with 0 log 0 = 0.
double kl_cost(const AffinityMatrix& P, const Matrix& Q);
double kl_cost(const Matrix& P, const Matrix& Q);

// dC/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1
Points2 gradient(const AffinityMatrix& P, const Points2& Y);
Points2 gradient(const Matrix& P, const Points2& Y);

struct ForceDecomposition {
  Points2 attraction;  // sum_j p_ij q_ij Z (y_i - y_j)
  Points2 repulsion;   // sum_j q_ij^2 Z (y_i - y_j)
};

ForceDecomposition decompose_forces(const AffinityMatrix& P, const Points2& Y);

// Exact gradient descent with momentum and early exaggeration. Stops once the
// largest per-point gradient norm (unexaggerated) drops below
// equilibrium_grad_tol, or after max_iters.
Embedding run_tsne(const AffinityMatrix& P, const Points2& init, const TsneConfig& config,
                   const TraceSink& trace = {});

}  // namespace forceflow
