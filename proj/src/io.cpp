#include "forceflow/io.hpp"

#include "forceflow/errors.hpp"

#include <cmath>
#include <json.hpp>
#include <zlib.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace forceflow::io {

using nlohmann::json;

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path, size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last && !std::isfinite(v)) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": non-finite value '" + s + "'");
  }
  if (ec != std::errc() || ptr != last) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + s + "'");
  }
  return v;
}

std::vector<unsigned char> read_maybe_gzip(const fs::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes;
  std::array<unsigned char, 1 << 16> buf{};
  while (true) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int err = 0;
      const std::string msg = gzerror(f, &err);
      gzclose(f);
      throw FormatError(path.string() + ": decompression failed after " +
                        std::to_string(bytes.size()) + " bytes: " + msg);
    }
    if (got == 0) break;
    bytes.insert(bytes.end(), buf.begin(), buf.begin() + got);
  }
  gzclose(f);
  return bytes;
}

uint32_t read_be32(const std::vector<unsigned char>& b, size_t offset, const fs::path& path) {
  if (offset + 4 > b.size()) {
    throw FormatError(path.string() + ": truncated header at byte offset " +
                      std::to_string(offset));
  }
  return (uint32_t{b[offset]} << 24) | (uint32_t{b[offset + 1]} << 16) |
         (uint32_t{b[offset + 2]} << 8) | uint32_t{b[offset + 3]};
}

std::string hex32(uint32_t v) {
  std::ostringstream ss;
  ss << "0x" << std::hex << v;
  return ss.str();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

Eigen::Index CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw FormatError("missing CSV column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw InputError("CSV header has " + std::to_string(header.size()) + " names for " +
                     std::to_string(values.cols()) + " columns");
  }
  std::string text;
  for (size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) text += ',';
      text += format_double(values(r, c));
    }
    text += '\n';
  }
  write_text(path, text);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_commas(line);
  std::vector<double> flat;
  size_t rows = 0;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != t.header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    }
    for (const auto& c : cells) flat.push_back(parse_double(c, path, lineno));
    ++rows;
  }
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  t.values.resize(static_cast<Eigen::Index>(rows), cols);
  for (size_t r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      t.values(static_cast<Eigen::Index>(r), c) = flat[r * static_cast<size_t>(cols) + c];
    }
  }
  return t;
}

void save_dataset(const fs::path& path, const Dataset& data) {
  std::vector<std::string> header{"id"};
  if (data.labels) header.emplace_back("label");
  for (Eigen::Index c = 0; c < data.dim(); ++c) header.push_back("f" + std::to_string(c));
  const Eigen::Index lead = data.labels ? 2 : 1;
  Matrix m(data.size(), lead + data.dim());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    m(i, 0) = data.ids.empty() ? static_cast<double>(i)
                               : static_cast<double>(data.ids[static_cast<size_t>(i)]);
    if (data.labels) m(i, 1) = (*data.labels)[static_cast<size_t>(i)];
  }
  m.rightCols(data.dim()) = data.points;
  write_csv(path, header, m);
}

Dataset load_dataset(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const Eigen::Index id_col = t.column("id");
  const bool has_labels = t.has_column("label");
  Dataset d;
  std::vector<Eigen::Index> feature_cols;
  for (size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != "id" && t.header[c] != "label") {
      feature_cols.push_back(static_cast<Eigen::Index>(c));
    }
  }
  d.points.resize(t.values.rows(), static_cast<Eigen::Index>(feature_cols.size()));
  for (size_t c = 0; c < feature_cols.size(); ++c) {
    d.points.col(static_cast<Eigen::Index>(c)) = t.values.col(feature_cols[c]);
  }
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    d.ids.push_back(static_cast<int64_t>(t.values(i, id_col)));
  }
  if (has_labels) {
    const Eigen::Index lc = t.column("label");
    Labels l;
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) l.push_back(static_cast<int>(t.values(i, lc)));
    d.labels = std::move(l);
  }
  d.validate();
  return d;
}

Dataset load_feature_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<Eigen::Index> feature_cols;
  for (size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != "label") feature_cols.push_back(static_cast<Eigen::Index>(c));
  }
  Matrix pts(t.values.rows(), static_cast<Eigen::Index>(feature_cols.size()));
  for (size_t c = 0; c < feature_cols.size(); ++c) {
    pts.col(static_cast<Eigen::Index>(c)) = t.values.col(feature_cols[c]);
  }
  std::optional<Labels> labels;
  if (t.has_column("label")) {
    Labels l;
    const Eigen::Index lc = t.column("label");
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) l.push_back(static_cast<int>(t.values(i, lc)));
    labels = std::move(l);
  }
  Dataset d = Dataset::from_points(std::move(pts), std::move(labels));
  d.validate();
  return d;
}

void save_embedding(const fs::path& path, const Points2& Y, const std::optional<Labels>& labels) {
  if (!labels) {
    write_csv(path, {"x", "y"}, Y);
    return;
  }
  Matrix m(Y.rows(), 3);
  m.leftCols(2) = Y;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) m(i, 2) = (*labels)[static_cast<size_t>(i)];
  write_csv(path, {"x", "y", "label"}, m);
}

Points2 load_embedding(const fs::path& path, std::optional<Labels>* labels) {
  const CsvTable t = read_csv(path);
  Points2 Y(t.values.rows(), 2);
  Y.col(0) = t.values.col(t.column("x"));
  Y.col(1) = t.values.col(t.column("y"));
  if (labels) {
    labels->reset();
    if (t.has_column("label")) {
      Labels l;
      const Eigen::Index lc = t.column("label");
      for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
        l.push_back(static_cast<int>(t.values(i, lc)));
      }
      *labels = std::move(l);
    }
  }
  return Y;
}

void save_field(const fs::path& csv_path, const FieldFile& field) {
  const auto& s = field.samples;
  Matrix m(s.anchors.rows(), 4);
  m.leftCols(2) = s.anchors;
  m.rightCols(2) = s.forces;
  write_csv(csv_path, {"x", "y", "fx", "fy"}, m);
  json meta = {{"kind", to_string(s.kind)}, {"Z", s.Z}, {"sign_flipped", s.sign_flipped}};
  if (field.k) meta["k"] = *field.k;
  if (field.sigma) meta["sigma"] = *field.sigma;
  write_text(fs::path(csv_path.string() + ".json"), meta.dump(2) + "\n");
}

FieldFile load_field(const fs::path& csv_path) {
  const CsvTable t = read_csv(csv_path);
  FieldFile f;
  f.samples.anchors.resize(t.values.rows(), 2);
  f.samples.forces.resize(t.values.rows(), 2);
  f.samples.anchors.col(0) = t.values.col(t.column("x"));
  f.samples.anchors.col(1) = t.values.col(t.column("y"));
  f.samples.forces.col(0) = t.values.col(t.column("fx"));
  f.samples.forces.col(1) = t.values.col(t.column("fy"));
  const fs::path side(csv_path.string() + ".json");
  if (fs::exists(side)) {
    const json meta = json::parse(read_text(side));
    f.samples.kind = force_kind_from_string(meta.at("kind").get<std::string>());
    f.samples.Z = meta.at("Z").get<double>();
    f.samples.sign_flipped = meta.at("sign_flipped").get<bool>();
    if (meta.contains("k")) f.k = meta["k"].get<Eigen::Index>();
    if (meta.contains("sigma")) f.sigma = meta["sigma"].get<double>();
  }
  f.samples.validate();
  return f;
}

void save_grid(const fs::path& path, const FieldGrid& grid) {
  Matrix m(grid.positions.rows(), 5);
  m.leftCols(2) = grid.positions;
  m.middleCols(2, 2) = grid.values;
  m.col(4) = grid.values.rowwise().norm();
  write_csv(path, {"x", "y", "fx", "fy", "magnitude"}, m);
  const json meta = {{"nx", grid.nx},
                     {"ny", grid.ny},
                     {"bbox", {grid.bbox.xmin, grid.bbox.xmax, grid.bbox.ymin, grid.bbox.ymax}}};
  write_text(fs::path(path.string() + ".json"), meta.dump(2) + "\n");
}

FieldGrid load_grid(const fs::path& path) {
  const CsvTable t = read_csv(path);
  FieldGrid g;
  g.positions.resize(t.values.rows(), 2);
  g.values.resize(t.values.rows(), 2);
  g.positions.col(0) = t.values.col(t.column("x"));
  g.positions.col(1) = t.values.col(t.column("y"));
  g.values.col(0) = t.values.col(t.column("fx"));
  g.values.col(1) = t.values.col(t.column("fy"));
  const fs::path side(path.string() + ".json");
  if (fs::exists(side)) {
    const json meta = json::parse(read_text(side));
    g.nx = meta.at("nx").get<int>();
    g.ny = meta.at("ny").get<int>();
    const auto b = meta.at("bbox");
    g.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  }
  return g;
}

void save_flow(const fs::path& dir, const FlowResult& r, const std::string& extra_json) {
  fs::create_directories(dir);
  json snaps = json::array();
  for (const auto& s : r.snapshots) {
    const std::string name = "flow_" + std::to_string(s.iteration) + ".csv";
    write_csv(dir / name, {"x", "y"}, s.positions);
    snaps.push_back({{"iteration", s.iteration}, {"file", name}});
  }
  write_csv(dir / "initial.csv", {"x", "y"}, r.initial);
  write_csv(dir / "final.csv", {"x", "y"}, r.final);
  json meta = json::parse(extra_json);
  meta["T"] = r.iterations;
  meta["field_kind"] = r.field_kind;
  meta["underflow_count"] = r.underflow_count;
  meta["snapshots"] = snaps;
  write_text(dir / "flow.json", meta.dump(2) + "\n");
}

FlowResult load_flow(const fs::path& dir) {
  const json meta = json::parse(read_text(dir / "flow.json"));
  FlowResult r;
  r.iterations = meta.at("T").get<int>();
  r.field_kind = meta.at("field_kind").get<std::string>();
  r.underflow_count = meta.at("underflow_count").get<long long>();
  r.initial = load_embedding(dir / "initial.csv");
  r.final = load_embedding(dir / "final.csv");
  for (const auto& s : meta.at("snapshots")) {
    r.snapshots.push_back(
        {s.at("iteration").get<int>(), load_embedding(dir / s.at("file").get<std::string>())});
  }
  return r;
}

Dataset load_idx(const fs::path& images_path, const fs::path& labels_path) {
  const auto img = read_maybe_gzip(images_path);
  const auto lab = read_maybe_gzip(labels_path);
  const uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != 0x00000803) {
    throw FormatError(images_path.string() + ": bad image magic " + hex32(img_magic) +
                      " at byte offset 0 (expected 0x803)");
  }
  const uint32_t lab_magic = read_be32(lab, 0, labels_path);
  if (lab_magic != 0x00000801) {
    throw FormatError(labels_path.string() + ": bad label magic " + hex32(lab_magic) +
                      " at byte offset 0 (expected 0x801)");
  }
  const uint32_t count = read_be32(img, 4, images_path);
  const uint32_t rows = read_be32(img, 8, images_path);
  const uint32_t cols = read_be32(img, 12, images_path);
  const uint32_t label_count = read_be32(lab, 4, labels_path);
  if (count != label_count) {
    throw FormatError("image count " + std::to_string(count) + " does not match label count " +
                      std::to_string(label_count));
  }
  const size_t pixels = size_t{rows} * cols;
  const size_t img_need = 16 + size_t{count} * pixels;
  if (img.size() < img_need) {
    throw FormatError(images_path.string() + ": truncated pixel data at byte offset " +
                      std::to_string(img.size()) + " (expected " + std::to_string(img_need) +
                      " bytes)");
  }
  if (lab.size() < 8 + size_t{count}) {
    throw FormatError(labels_path.string() + ": truncated label data at byte offset " +
                      std::to_string(lab.size()) + " (expected " +
                      std::to_string(8 + size_t{count}) + " bytes)");
  }
  Matrix pts(count, static_cast<Eigen::Index>(pixels));
  Labels labels(count);
  for (uint32_t i = 0; i < count; ++i) {
    const size_t base = 16 + size_t{i} * pixels;
    for (size_t p = 0; p < pixels; ++p) {
      pts(i, static_cast<Eigen::Index>(p)) = img[base + p] / 255.0;
    }
    labels[i] = lab[8 + i];
  }
  return Dataset::from_points(std::move(pts), std::move(labels));
}

void write_pgm(const fs::path& path, const Vector& pixels, int rows, int cols) {
  if (pixels.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw InputError("pixel count does not match image shape");
  }
  std::string text = "P2\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = std::clamp(pixels(static_cast<Eigen::Index>(r) * cols + c), 0.0, 1.0);
      if (c) text += ' ';
      text += std::to_string(static_cast<int>(std::lround(v * 255.0)));
    }
    text += '\n';
  }
  write_text(path, text);
}

std::string sinks_json(const SinkClustering& sinks, const std::optional<CompositionReport>& comp) {
  json j;
  j["epsilon"] = sinks.epsilon;
  j["count"] = sinks.count();
  j["labels"] = sinks.labels;
  j["sizes"] = sinks.sink_sizes;
  j["diameters"] = sinks.sink_diameters;
  json centers = json::array();
  for (Eigen::Index s = 0; s < sinks.sink_centers.rows(); ++s) {
    centers.push_back({sinks.sink_centers(s, 0), sinks.sink_centers(s, 1)});
  }
  j["centers"] = centers;
  j["non_converged"] = sinks.non_converged();
  if (comp) {
    json per = json::array();
    for (const auto& sc : comp->sinks) {
      json counts = json::object();
      for (const auto& [l, c] : sc.counts) counts[std::to_string(l)] = c;
      per.push_back({{"sink", sc.sink}, {"size", sc.size}, {"majority_label", sc.majority_label},
                     {"counts", counts}});
    }
    json mis = json::object();
    for (const auto& [l, c] : comp->misclassified_by_class) mis[std::to_string(l)] = c;
    json totals = json::object();
    for (const auto& [l, c] : comp->class_totals) totals[std::to_string(l)] = c;
    j["composition"] = {{"sinks", per},
                        {"misclassified_by_class", mis},
                        {"class_totals", totals},
                        {"misclassified", comp->misclassified},
                        {"purity", comp->purity}};
  }
  return j.dump(2) + "\n";
}

}  // namespace forceflow::io
