#pragma once

#include "forceflow/types.hpp"

#include <cstdint>
#include <vector>

namespace forceflow {

struct KMeansResult {
  Labels labels;
  Matrix centroids;  // k x d
  double wcss = 0.0;
  // Within-cluster sum of squares after every Lloyd update of the winning run.
  std::vector<double> wcss_trace;
};

// Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
// WCSS. A cluster that empties is re-seeded at the point farthest from its
// current centroid.
KMeansResult kmeans_fit(const Matrix& points, int k, uint64_t seed, int restarts = 10,
                        int max_iters = 300);

Labels kmeans(const Matrix& points, int k, uint64_t seed, int restarts = 10);

double wcss(const Matrix& points, const Labels& labels, int k);

// Largest mean agreement over all matchings of predicted to true classes.
// At most 8 distinct labels on either side.
double best_match_accuracy(const Labels& pred, const Labels& truth);

// Mean silhouette coefficient (Euclidean).
double silhouette(const Matrix& points, const Labels& labels);

struct EvalReport {
  Labels kmeans_labels_original;
  Labels kmeans_labels_flowed;
  double agreement_original = 0.0;
  double agreement_flowed = 0.0;
  double sink_purity = 0.0;
  uint64_t seed = 0;
  int restarts = 10;
  int k = 2;
};

EvalReport evaluate_flow(const Points2& original, const Points2& flowed, const Labels& truth,
                         const Labels& sink_labels, int k, uint64_t seed, int restarts = 10);

}  // namespace forceflow
