#pragma once

#include "forceflow/affinity.hpp"
#include "forceflow/embedder.hpp"
#include "forceflow/errors.hpp"
#include "forceflow/eval.hpp"
#include "forceflow/flow.hpp"
#include "forceflow/forcefield.hpp"
#include "forceflow/interpolator.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace forceflow {

struct GaussianCluster {
  Vector center;
  double variance = 1.0;  // covariance = variance * I
  int count = 0;
};

struct SyntheticGaussianSpec {
  int dimension = 0;
  std::vector<GaussianCluster> clusters;

  void validate() const;
};

// Two clusters at -separation/2 and +separation/2 along the first axis.
SyntheticGaussianSpec two_gaussians(int dimension, int count_per_cluster, double separation,
                                    double variance = 1.0);
SyntheticGaussianSpec single_gaussian(int dimension, int count, double variance = 1.0);

Dataset gen_gaussians(const SyntheticGaussianSpec& spec, uint64_t seed);

struct IdxSource {
  std::string images;
  std::string labels;
};
struct CsvSource {
  std::string path;
};
struct SyntheticSource {
  SyntheticGaussianSpec spec;
  uint64_t seed = 0;
};
using DataSource = std::variant<IdxSource, CsvSource, SyntheticSource>;

struct GridOptions {
  int nx = 40;
  int ny = 40;
  // Unset: the embedding's bounding box grown by 5%.
  std::optional<BBox> bbox;
};

struct ExperimentConfig {
  DataSource source = CsvSource{};
  std::vector<int> classes;         // keep only these labels (empty = all)
  std::optional<int> per_class;     // at most this many rows per kept label
  TsneConfig tsne;
  ForceKind field_kind = ForceKind::modified_attraction;
  bool flip_sign = kDefaultFlipSign;
  int T = 1000;
  std::optional<std::vector<int>> checkpoints;
  std::optional<double> epsilon;
  std::optional<int> kmeans_k;
  int kmeans_restarts = 10;
  uint64_t eval_seed = 0;
  GridOptions grid;
  std::string out;  // empty: nothing written

  void validate() const;
};

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

// Reads the source and applies the class filter.
Dataset load_experiment_data(const ExperimentConfig& config);
Dataset filter_classes(const Dataset& data, const std::vector<int>& classes,
                       std::optional<int> per_class);

// A failure in one pipeline stage; what() is "<stage>: <cause>".
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  Dataset data;
  AffinityMatrix affinity;
  Points2 init;
  Embedding embedding;
  ForceSampleSet forces;  // oriented as flowed
  std::shared_ptr<const InterpolatedField> field;
  FlowResult flow;
  SinkClustering sinks;
  std::optional<CompositionReport> composition;
  ClusterMeans means;
  std::optional<EvalReport> eval;
  std::string manifest;  // JSON
};

// Embed, extract and interpolate the force field, flow, find sinks and
// evaluate. Writes the artifact directory when config.out is set.
PipelineResult run_pipeline(const ExperimentConfig& config);

// Rerun from a manifest written by run_pipeline, optionally redirecting output.
PipelineResult rerun_from_manifest(const std::filesystem::path& manifest,
                                   const std::optional<std::string>& out = std::nullopt);

struct AverageOptions {
  int T = 5000;
  GridOptions grid{40, 40, BBox{-2, 2, -2, 2}};
  std::string out;
};

struct AverageMember {
  Points2 embedding;
  ForceSampleSet forces;
  std::shared_ptr<const InterpolatedField> field;
  FlowResult own_flow;   // on the member's own field
  SinkClustering own_sinks;
  FlowResult mean_flow;  // on the mean field
  SinkClustering mean_sinks;
  double epsilon = 0.0;
};

struct AverageResult {
  Dataset data;
  std::vector<AverageMember> members;
  std::shared_ptr<const MeanField> mean_field;
  FieldGrid mean_grid;
  std::vector<FieldGrid> member_grids;
  std::string manifest;
};

// Every member must read the same data with random initialisation; only the
// seed differs. Each member's start embedding is flowed on the mean field
// (and, for comparison, on its own field).
AverageResult average_runs(const std::vector<ExperimentConfig>& members,
                           const AverageOptions& options);

}  // namespace forceflow
