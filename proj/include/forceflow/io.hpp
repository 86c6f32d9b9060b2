#pragma once

#include "forceflow/affinity.hpp"
#include "forceflow/flow.hpp"
#include "forceflow/forcefield.hpp"
#include "forceflow/interpolator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace forceflow::io {

namespace fs = std::filesystem;

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  // Column index by name; throws FormatError when absent.
  Eigen::Index column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& values);
CsvTable read_csv(const fs::path& path);

// id, label (when present), f0..f{s-1}
void save_dataset(const fs::path& path, const Dataset& data);
Dataset load_dataset(const fs::path& path);

// Plain feature CSV with a header row; a column named "label" (if any) becomes
// the labels and the rest are features.
Dataset load_feature_csv(const fs::path& path);

// x, y, and label when given.
void save_embedding(const fs::path& path, const Points2& Y, const std::optional<Labels>& labels);
Points2 load_embedding(const fs::path& path, std::optional<Labels>* labels = nullptr);

// Field file: CSV x, y, fx, fy plus a JSON sidecar `<path>.json` holding the
// force kind, Z, sign flag and (when known) the kernel parameters k, sigma.
struct FieldFile {
  ForceSampleSet samples;
  std::optional<Eigen::Index> k;
  std::optional<double> sigma;
};

void save_field(const fs::path& csv_path, const FieldFile& field);
FieldFile load_field(const fs::path& csv_path);

// x, y, fx, fy, magnitude
void save_grid(const fs::path& path, const FieldGrid& grid);
FieldGrid load_grid(const fs::path& path);

// One CSV per snapshot (flow_<iteration>.csv), final.csv, and flow.json.
void save_flow(const fs::path& dir, const FlowResult& result, const std::string& extra_json = "{}");
FlowResult load_flow(const fs::path& dir);

// Reads MNIST-style IDX image/label files (plain or gzip). Pixels are scaled
// to [0, 1] and flattened row by row.
Dataset load_idx(const fs::path& images, const fs::path& labels);

void write_pgm(const fs::path& path, const Vector& pixels, int rows, int cols);

std::string sinks_json(const SinkClustering& sinks, const std::optional<CompositionReport>& comp);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace forceflow::io
