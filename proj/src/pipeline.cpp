#include "forceflow/pipeline.hpp"

#include "forceflow/errors.hpp"
#include "forceflow/io.hpp"
#include "forceflow/svg.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <random>
#include <set>

namespace forceflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

// Writes into `<out>.partial` and renames over `out` once complete.
class StagingDir {
 public:
  explicit StagingDir(const std::string& out) : final_(out) {
    if (out.empty()) return;
    staging_ = final_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  bool active() const { return !staging_.empty(); }
  fs::path operator/(const std::string& name) const { return staging_ / name; }
  void commit() {
    if (!active()) return;
    fs::remove_all(final_);
    if (final_.has_parent_path()) fs::create_directories(final_.parent_path());
    fs::rename(staging_, final_);
  }

 private:
  fs::path final_;
  fs::path staging_;
};

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json tsne_json(const TsneConfig& c) {
  json j = {{"perplexity", c.perplexity},
            {"early_exaggeration_factor", c.early_exaggeration_factor},
            {"early_exaggeration_iters", c.early_exaggeration_iters},
            {"max_iters", c.max_iters},
            {"initial_momentum", c.initial_momentum},
            {"final_momentum", c.final_momentum},
            {"momentum_switch_iter", c.momentum_switch_iter},
            {"equilibrium_grad_tol", c.equilibrium_grad_tol},
            {"init", to_string(c.init_mode)},
            {"seed", c.seed},
            {"trace_every", c.trace_every}};
  j["learning_rate"] = c.learning_rate ? json(*c.learning_rate) : json(nullptr);
  return j;
}

TsneConfig tsne_from_json(const json& j) {
  TsneConfig c;
  c.perplexity = j.value("perplexity", c.perplexity);
  if (j.contains("learning_rate") && !j["learning_rate"].is_null()) {
    c.learning_rate = j["learning_rate"].get<double>();
  }
  c.early_exaggeration_factor = j.value("early_exaggeration_factor", c.early_exaggeration_factor);
  c.early_exaggeration_iters = j.value("early_exaggeration_iters", c.early_exaggeration_iters);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.initial_momentum = j.value("initial_momentum", c.initial_momentum);
  c.final_momentum = j.value("final_momentum", c.final_momentum);
  c.momentum_switch_iter = j.value("momentum_switch_iter", c.momentum_switch_iter);
  c.equilibrium_grad_tol = j.value("equilibrium_grad_tol", c.equilibrium_grad_tol);
  c.init_mode = init_mode_from_string(j.value("init", std::string("pca")));
  c.seed = j.value("seed", c.seed);
  c.trace_every = j.value("trace_every", c.trace_every);
  return c;
}

json source_json(const DataSource& src) {
  if (const auto* idx = std::get_if<IdxSource>(&src)) {
    return {{"type", "idx"}, {"images", idx->images}, {"labels", idx->labels}};
  }
  if (const auto* csv = std::get_if<CsvSource>(&src)) {
    return {{"type", "csv"}, {"path", csv->path}};
  }
  const auto& syn = std::get<SyntheticSource>(src);
  json clusters = json::array();
  for (const auto& c : syn.spec.clusters) {
    clusters.push_back({{"center", vec_json(c.center)}, {"variance", c.variance}, {"count", c.count}});
  }
  return {{"type", "gaussians"},
          {"dimension", syn.spec.dimension},
          {"clusters", clusters},
          {"seed", syn.seed}};
}

DataSource source_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "idx") return IdxSource{j.at("images").get<std::string>(), j.at("labels").get<std::string>()};
  if (type == "csv") return CsvSource{j.at("path").get<std::string>()};
  if (type == "gaussians") {
    SyntheticSource s;
    s.spec.dimension = j.at("dimension").get<int>();
    for (const auto& c : j.at("clusters")) {
      GaussianCluster g;
      const auto center = c.at("center").get<std::vector<double>>();
      g.center = Eigen::Map<const Vector>(center.data(), static_cast<Eigen::Index>(center.size()));
      g.variance = c.at("variance").get<double>();
      g.count = c.at("count").get<int>();
      s.spec.clusters.push_back(std::move(g));
    }
    s.seed = j.value("seed", uint64_t{0});
    return s;
  }
  throw ConfigError("unknown data source type '" + type + "'");
}

BBox padded_bbox(const Points2& Y) {
  const double x0 = Y.col(0).minCoeff();
  const double x1 = Y.col(0).maxCoeff();
  const double y0 = Y.col(1).minCoeff();
  const double y1 = Y.col(1).maxCoeff();
  const double px = 0.05 * std::max(x1 - x0, 1e-9);
  const double py = 0.05 * std::max(y1 - y0, 1e-9);
  return {x0 - px, x1 + px, y0 - py, y1 + py};
}

Points2 initial_embedding(const Dataset& data, const TsneConfig& c) {
  return c.init_mode == InitMode::pca ? pca_init(data, c.seed) : random_init(data.size(), c.seed);
}

void write_trace(const fs::path& path, const std::vector<TraceRecord>& trace) {
  std::vector<TraceRecord> kept;
  for (const auto& r : trace) {
    if (!std::isnan(r.cost)) kept.push_back(r);
  }
  Matrix m(static_cast<Eigen::Index>(kept.size()), 3);
  for (size_t i = 0; i < kept.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    m(r, 0) = kept[i].iteration;
    m(r, 1) = kept[i].cost;
    m(r, 2) = kept[i].grad_max_norm;
  }
  io::write_csv(path, {"iteration", "cost", "grad_max_norm"}, m);
}

int perfect_square_side(Eigen::Index s) {
  const auto r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s))));
  return static_cast<Eigen::Index>(r) * r == s ? r : 0;
}

}  // namespace

void SyntheticGaussianSpec::validate() const {
  if (dimension < 1) throw ConfigError("gaussian dimension must be >= 1");
  if (clusters.empty()) throw ConfigError("gaussian spec needs at least one cluster");
  for (const auto& c : clusters) {
    if (c.center.size() != dimension) throw ConfigError("cluster centre has wrong dimension");
    if (c.count < 1) throw ConfigError("cluster count must be >= 1");
    if (!(c.variance > 0) || !std::isfinite(c.variance)) {
      throw ConfigError("cluster covariance must be positive");
    }
  }
}

SyntheticGaussianSpec two_gaussians(int dimension, int count_per_cluster, double separation,
                                    double variance) {
  SyntheticGaussianSpec s;
  s.dimension = dimension;
  for (double sign : {-1.0, 1.0}) {
    GaussianCluster c;
    c.center = Vector::Zero(dimension);
    c.center(0) = sign * separation / 2.0;
    c.variance = variance;
    c.count = count_per_cluster;
    s.clusters.push_back(std::move(c));
  }
  return s;
}

SyntheticGaussianSpec single_gaussian(int dimension, int count, double variance) {
  SyntheticGaussianSpec s;
  s.dimension = dimension;
  s.clusters.push_back({Vector::Zero(dimension), variance, count});
  return s;
}

Dataset gen_gaussians(const SyntheticGaussianSpec& spec, uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index n = 0;
  for (const auto& c : spec.clusters) n += c.count;
  Matrix pts(n, spec.dimension);
  Labels labels;
  labels.reserve(static_cast<size_t>(n));
  Eigen::Index row = 0;
  for (size_t k = 0; k < spec.clusters.size(); ++k) {
    const auto& c = spec.clusters[k];
    const double sd = std::sqrt(c.variance);
    for (int i = 0; i < c.count; ++i, ++row) {
      for (int d = 0; d < spec.dimension; ++d) pts(row, d) = c.center(d) + sd * normal(rng);
      labels.push_back(static_cast<int>(k));
    }
  }
  return Dataset::from_points(std::move(pts), std::move(labels));
}

void ExperimentConfig::validate() const {
  tsne.validate();
  if (T < 0) throw ConfigError("flow iterations T must be >= 0");
  if (epsilon && !(*epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (per_class && *per_class < 1) throw ConfigError("per-class limit must be >= 1");
  if (kmeans_restarts < 1) throw ConfigError("k-means restarts must be >= 1");
  if (grid.nx < 2 || grid.ny < 2) throw ConfigError("grid resolution must be at least 2x2");
  if (const auto* syn = std::get_if<SyntheticSource>(&source)) syn->spec.validate();
  if (const auto* csv = std::get_if<CsvSource>(&source); csv && csv->path.empty()) {
    throw ConfigError("no input source given");
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["source"] = source_json(c.source);
  j["classes"] = c.classes;
  j["per_class"] = c.per_class ? json(*c.per_class) : json(nullptr);
  j["tsne"] = tsne_json(c.tsne);
  j["field_kind"] = to_string(c.field_kind);
  j["flip_sign"] = c.flip_sign;
  j["T"] = c.T;
  j["checkpoints"] = c.checkpoints ? json(*c.checkpoints) : json(nullptr);
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["kmeans_k"] = c.kmeans_k ? json(*c.kmeans_k) : json(nullptr);
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["eval_seed"] = c.eval_seed;
  json grid = {{"nx", c.grid.nx}, {"ny", c.grid.ny}};
  grid["bbox"] = c.grid.bbox ? json{c.grid.bbox->xmin, c.grid.bbox->xmax, c.grid.bbox->ymin,
                                    c.grid.bbox->ymax}
                             : json(nullptr);
  j["grid"] = grid;
  j["out"] = c.out;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  c.source = source_from_json(j.at("source"));
  c.classes = j.value("classes", std::vector<int>{});
  if (j.contains("per_class") && !j["per_class"].is_null()) c.per_class = j["per_class"].get<int>();
  if (j.contains("tsne")) c.tsne = tsne_from_json(j["tsne"]);
  c.field_kind = force_kind_from_string(j.value("field_kind", std::string("modified_attraction")));
  c.flip_sign = j.value("flip_sign", kDefaultFlipSign);
  c.T = j.value("T", c.T);
  if (j.contains("checkpoints") && !j["checkpoints"].is_null()) {
    c.checkpoints = j["checkpoints"].get<std::vector<int>>();
  }
  if (j.contains("epsilon") && !j["epsilon"].is_null()) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("kmeans_k") && !j["kmeans_k"].is_null()) c.kmeans_k = j["kmeans_k"].get<int>();
  c.kmeans_restarts = j.value("kmeans_restarts", c.kmeans_restarts);
  c.eval_seed = j.value("eval_seed", c.eval_seed);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    c.grid.nx = g.value("nx", c.grid.nx);
    c.grid.ny = g.value("ny", c.grid.ny);
    if (g.contains("bbox") && !g["bbox"].is_null()) {
      const auto b = g["bbox"].get<std::vector<double>>();
      if (b.size() != 4) throw ConfigError("grid bbox needs 4 numbers");
      c.grid.bbox = BBox{b[0], b[1], b[2], b[3]};
    }
  }
  c.out = j.value("out", std::string{});
  return c;
}

Dataset filter_classes(const Dataset& data, const std::vector<int>& classes,
                       std::optional<int> per_class) {
  if (classes.empty() && !per_class) return data;
  if (!data.labels) throw ConfigError("class filter requires labelled data");
  const std::set<int> keep(classes.begin(), classes.end());
  std::map<int, int> taken;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const int l = (*data.labels)[static_cast<size_t>(i)];
    if (!keep.empty() && !keep.count(l)) continue;
    if (per_class && taken[l] >= *per_class) continue;
    ++taken[l];
    rows.push_back(i);
  }
  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), data.dim());
  Labels labels;
  for (size_t r = 0; r < rows.size(); ++r) {
    out.points.row(static_cast<Eigen::Index>(r)) = data.points.row(rows[r]);
    labels.push_back((*data.labels)[static_cast<size_t>(rows[r])]);
    out.ids.push_back(data.ids.empty() ? rows[r] : data.ids[static_cast<size_t>(rows[r])]);
  }
  out.labels = std::move(labels);
  out.validate();
  return out;
}

Dataset load_experiment_data(const ExperimentConfig& config) {
  Dataset raw;
  if (const auto* idx = std::get_if<IdxSource>(&config.source)) {
    raw = io::load_idx(idx->images, idx->labels);
  } else if (const auto* csv = std::get_if<CsvSource>(&config.source)) {
    raw = io::load_feature_csv(csv->path);
  } else {
    const auto& syn = std::get<SyntheticSource>(config.source);
    raw = gen_gaussians(syn.spec, syn.seed);
  }
  return filter_classes(raw, config.classes, config.per_class);
}

PipelineResult run_pipeline(const ExperimentConfig& config) {
  run_stage("config", [&] { config.validate(); });
  PipelineResult r;
  r.data = run_stage("load", [&] { return load_experiment_data(config); });
  r.affinity = run_stage("affinity", [&] {
    return compute_affinities(r.data, config.tsne.perplexity);
  });
  std::vector<TraceRecord> trace;
  r.init = run_stage("init", [&] { return initial_embedding(r.data, config.tsne); });
  r.embedding = run_stage("embed", [&] {
    return run_tsne(r.affinity, r.init, config.tsne,
                    [&](const TraceRecord& rec) { trace.push_back(rec); });
  });
  r.forces = run_stage("forces", [&] {
    return with_sign(extract_forces(config.field_kind, r.affinity, r.embedding), config.flip_sign);
  });
  r.field = run_stage("interpolate", [&] {
    return std::make_shared<const InterpolatedField>(InterpolatedField::from_samples(r.forces));
  });
  const std::vector<int> checkpoints =
      config.checkpoints ? *config.checkpoints : default_checkpoints(config.T);
  r.flow = run_stage("flow", [&] {
    return flow(r.embedding.Y, *r.field, config.T, checkpoints, to_string(config.field_kind));
  });
  const double epsilon = config.epsilon ? *config.epsilon : 0.5 * r.field->sigma();
  r.sinks = run_stage("sinks", [&] { return detect_sinks(r.flow.final, epsilon); });
  run_stage("analyze", [&] {
    r.means = cluster_means(r.data, r.sinks);
    if (r.data.labels) r.composition = label_composition(r.sinks, *r.data.labels);
  });
  if (r.data.labels) {
    r.eval = run_stage("eval", [&] {
      const int classes = static_cast<int>(
          std::set<int>(r.data.labels->begin(), r.data.labels->end()).size());
      const int k = config.kmeans_k ? *config.kmeans_k : std::min(classes, 8);
      return evaluate_flow(r.embedding.Y, r.flow.final, *r.data.labels, r.sinks.labels, k,
                           config.eval_seed, config.kmeans_restarts);
    });
  }

  json resolved = {{"n", r.data.size()},
                   {"dimension", r.data.dim()},
                   {"learning_rate", config.tsne.resolved_learning_rate(r.data.size())},
                   {"iterations_run", r.embedding.iterations_run},
                   {"stop_reason", to_string(r.embedding.stop_reason)},
                   {"final_grad_max_norm", r.embedding.grad_max_norm},
                   {"kl_cost", r.embedding.cost},
                   {"Z", r.embedding.Z},
                   {"sigma", r.field->sigma()},
                   {"k", r.field->k()},
                   {"k_saturated", r.field->k_saturated()},
                   {"epsilon", epsilon},
                   {"checkpoints", checkpoints},
                   {"force_sign", config.flip_sign ? "flipped" : "literal"},
                   {"flow_step", 1.0},
                   {"underflow_count", r.flow.underflow_count},
                   {"sink_count", r.sinks.count()}};
  json manifest = {{"tool", "forceflow"},
                   {"format_version", 1},
                   {"config", json::parse(config_to_json(config))},
                   {"resolved", resolved}};
  r.manifest = manifest.dump(2) + "\n";

  if (config.out.empty()) return r;
  run_stage("write", [&] {
    StagingDir dir(config.out);
    const auto& labels = r.data.labels;
    io::save_embedding(dir / "embedding.csv", r.embedding.Y, labels);
    io::save_embedding(dir / "flowed.csv", r.flow.final, labels);
    write_trace(dir / "trace.csv", trace);
    io::save_field(dir / "field.csv", {r.forces, r.field->k(), r.field->sigma()});
    const BBox bbox = config.grid.bbox ? *config.grid.bbox : padded_bbox(r.embedding.Y);
    const FieldGrid grid = sample_grid(*r.field, bbox, config.grid.nx, config.grid.ny);
    io::save_grid(dir / "grid.csv", grid);
    json flow_meta = {{"sign_flipped", r.forces.sign_flipped}, {"epsilon", epsilon}, {"step", 1.0}};
    io::save_flow(dir / "flow", r.flow, flow_meta.dump());
    io::write_text(dir / "sinks.json", io::sinks_json(r.sinks, r.composition));
    std::vector<std::string> header;
    for (Eigen::Index c = 0; c < r.data.dim(); ++c) header.push_back("f" + std::to_string(c));
    io::write_csv(dir / "cluster_means.csv", header, r.means.means);
    if (const int side = perfect_square_side(r.data.dim()); side > 0) {
      for (size_t m = 0; m < r.means.sink_ids.size(); ++m) {
        io::write_pgm(dir / ("means/sink_" + std::to_string(r.means.sink_ids[m]) + "_n" +
                             std::to_string(r.means.sizes[m]) + ".pgm"),
                      r.means.means.row(static_cast<Eigen::Index>(m)).transpose(), side, side);
      }
    }
    if (r.eval) {
      const json ej = {{"agreement_original", r.eval->agreement_original},
                       {"agreement_flowed", r.eval->agreement_flowed},
                       {"sink_purity", r.eval->sink_purity},
                       {"k", r.eval->k},
                       {"restarts", r.eval->restarts},
                       {"seed", r.eval->seed},
                       {"kmeans_labels_original", r.eval->kmeans_labels_original},
                       {"kmeans_labels_flowed", r.eval->kmeans_labels_flowed}};
      io::write_text(dir / "eval.json", ej.dump(2) + "\n");
    }
    const Labels categories = labels ? *labels : Labels{};
    svg::scatter(dir / "embedding_labels.svg", r.embedding.Y, categories, "embedding");
    svg::scatter(dir / "flowed_labels.svg", r.flow.final, categories, "flowed (labels)");
    svg::scatter(dir / "flowed_sinks.svg", r.flow.final, r.sinks.labels, "flowed (sinks)");
    svg::quiver(dir / "field.svg", grid, "interpolated field");
    io::write_text(dir / "manifest.json", r.manifest);
    dir.commit();
  });
  return r;
}

PipelineResult rerun_from_manifest(const fs::path& manifest,
                                   const std::optional<std::string>& out) {
  const json j = json::parse(io::read_text(manifest));
  ExperimentConfig c = config_from_json(j.at("config").dump());
  if (out) c.out = *out;
  return run_pipeline(c);
}

AverageResult average_runs(const std::vector<ExperimentConfig>& members,
                           const AverageOptions& options) {
  if (members.size() < 2) throw ConfigError("averaging needs at least two member runs");
  if (options.T < 0) throw ConfigError("flow iterations T must be >= 0");
  const json base_source = source_json(members.front().source);
  for (const auto& m : members) {
    m.validate();
    if (source_json(m.source) != base_source || m.classes != members.front().classes ||
        m.per_class != members.front().per_class) {
      throw ConfigError("averaged runs must share the same dataset");
    }
    if (m.tsne.init_mode != InitMode::random) {
      throw ConfigError("averaged runs must use random initialisation");
    }
  }

  AverageResult r;
  r.data = run_stage("load", [&] { return load_experiment_data(members.front()); });
  const AffinityMatrix aff = run_stage("affinity", [&] {
    return compute_affinities(r.data, members.front().tsne.perplexity);
  });

  std::vector<std::shared_ptr<const InterpolatedField>> fields;
  for (const auto& cfg : members) {
    AverageMember m;
    const Embedding emb = run_stage("embed", [&] {
      return run_tsne(aff, random_init(r.data.size(), cfg.tsne.seed), cfg.tsne);
    });
    m.embedding = emb.Y;
    m.forces = run_stage("forces", [&] {
      return with_sign(extract_forces(cfg.field_kind, aff, emb), cfg.flip_sign);
    });
    m.field = run_stage("interpolate", [&] {
      return std::make_shared<const InterpolatedField>(InterpolatedField::from_samples(m.forces));
    });
    m.epsilon = cfg.epsilon ? *cfg.epsilon : 0.5 * m.field->sigma();
    fields.push_back(m.field);
    r.members.push_back(std::move(m));
  }
  r.mean_field = std::make_shared<const MeanField>(fields);

  const std::vector<int> checkpoints = default_checkpoints(options.T);
  for (auto& m : r.members) {
    run_stage("flow", [&] {
      m.own_flow = flow(m.embedding, *m.field, options.T, checkpoints,
                        to_string(members.front().field_kind));
      m.mean_flow = flow(m.embedding, *r.mean_field, options.T, checkpoints, "mean");
    });
    m.own_sinks = detect_sinks(m.own_flow.final, m.epsilon);
    m.mean_sinks = detect_sinks(m.mean_flow.final, m.epsilon);
  }

  const BBox bbox = options.grid.bbox ? *options.grid.bbox : BBox{};
  r.mean_grid = sample_grid(*r.mean_field, bbox, options.grid.nx, options.grid.ny);
  for (const auto& m : r.members) {
    r.member_grids.push_back(sample_grid(*m.field, bbox, options.grid.nx, options.grid.ny));
  }

  json member_json = json::array();
  json configs = json::array();
  for (size_t i = 0; i < r.members.size(); ++i) {
    const auto& m = r.members[i];
    member_json.push_back({{"seed", members[i].tsne.seed},
                           {"sigma", m.field->sigma()},
                           {"k", m.field->k()},
                           {"epsilon", m.epsilon},
                           {"own_sink_count", m.own_sinks.count()},
                           {"own_sink_sizes", m.own_sinks.sink_sizes},
                           {"mean_sink_count", m.mean_sinks.count()},
                           {"mean_sink_sizes", m.mean_sinks.sink_sizes},
                           {"mean_underflow_count", m.mean_flow.underflow_count}});
    configs.push_back(json::parse(config_to_json(members[i])));
  }
  const json manifest = {{"tool", "forceflow"},
                         {"format_version", 1},
                         {"mode", "average"},
                         {"T", options.T},
                         {"grid", {{"nx", options.grid.nx},
                                   {"ny", options.grid.ny},
                                   {"bbox", {bbox.xmin, bbox.xmax, bbox.ymin, bbox.ymax}}}},
                         {"members", configs},
                         {"summary", member_json}};
  r.manifest = manifest.dump(2) + "\n";

  if (options.out.empty()) return r;
  run_stage("write", [&] {
    StagingDir dir(options.out);
    io::save_grid(dir / "mean_grid.csv", r.mean_grid);
    svg::quiver(dir / "mean_field.svg", r.mean_grid, "mean field");
    for (size_t i = 0; i < r.members.size(); ++i) {
      const auto& m = r.members[i];
      const std::string p = "member_" + std::to_string(i) + "/";
      io::save_embedding(dir / (p + "embedding.csv"), m.embedding, r.data.labels);
      io::save_field(dir / (p + "field.csv"), {m.forces, m.field->k(), m.field->sigma()});
      io::save_grid(dir / (p + "grid.csv"), r.member_grids[i]);
      io::save_flow(dir / (p + "own_flow"), m.own_flow);
      io::save_flow(dir / (p + "mean_flow"), m.mean_flow);
      io::write_text(dir / (p + "own_sinks.json"), io::sinks_json(m.own_sinks, std::nullopt));
      io::write_text(dir / (p + "mean_sinks.json"), io::sinks_json(m.mean_sinks, std::nullopt));
      svg::quiver(dir / (p + "field.svg"), r.member_grids[i], "member field");
      svg::scatter(dir / (p + "mean_flowed.svg"), m.mean_flow.final, m.mean_sinks.labels,
                   "flowed on mean field");
    }
    io::write_text(dir / "manifest.json", r.manifest);
    dir.commit();
  });
  return r;
}

}  // namespace forceflow
