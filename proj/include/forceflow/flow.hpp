#pragma once

#include "forceflow/affinity.hpp"
#include "forceflow/interpolator.hpp"

#include <map>
#include <string>
#include <vector>

namespace forceflow {

struct Snapshot {
  int iteration = 0;
  Points2 positions;
};

struct FlowResult {
  Points2 initial;
  Points2 final;
  std::vector<Snapshot> snapshots;  // ascending iteration
  int iterations = 0;
  std::string field_kind;
  long long underflow_count = 0;
};

// {0, T/8, T/4, T/2, T}, deduplicated.
std::vector<int> default_checkpoints(int T);

// Moves every point T times by y <- y + F(y) against a field that never
// changes. Points do not interact, so any subset flows identically.
// Positions are recorded at each listed checkpoint (none when empty).
FlowResult flow(const Points2& start, const VectorField& field, int T,
                const std::vector<int>& checkpoints = {}, std::string field_kind = {});

struct SinkClustering {
  std::vector<int> labels;  // sink id per point, ids in order of first appearance
  Points2 sink_centers;
  std::vector<int> sink_sizes;
  // Largest pairwise distance inside each sink.
  std::vector<double> sink_diameters;
  double epsilon = 0.0;

  int count() const { return static_cast<int>(sink_sizes.size()); }
  // Sinks whose diameter exceeds 10 epsilon have not collapsed to a point
  // (e.g. a limit cycle) after the flow.
  std::vector<int> non_converged() const;
};

// Single-linkage components at radius epsilon; centres are centroids.
SinkClustering detect_sinks(const Points2& final_positions, double epsilon);

// Default merge radius: half the auto sigma of the original embedding.
double default_epsilon(const Points2& original_embedding);

struct ClusterMeans {
  Matrix means;              // m x s, largest sink first
  std::vector<int> sink_ids;  // sink id of each row
  std::vector<int> sizes;
};

ClusterMeans cluster_means(const Dataset& data, const SinkClustering& clustering);

struct SinkComposition {
  int sink = 0;
  std::map<int, int> counts;  // label -> count
  int majority_label = 0;
  int size = 0;
};

struct CompositionReport {
  std::vector<SinkComposition> sinks;
  // A point is misclassified when its label differs from its sink's majority
  // label (ties go to the smaller label).
  std::map<int, int> misclassified_by_class;
  std::map<int, int> class_totals;
  int misclassified = 0;
  double purity = 1.0;  // 1 - misclassified / n
};

CompositionReport label_composition(const SinkClustering& clustering, const Labels& labels);

}  // namespace forceflow
