// Command-line driver: embed, extract forces, flow, find sinks, evaluate,
// average random-init runs, or run the whole pipeline.

#include "forceflow/errors.hpp"
#include "forceflow/io.hpp"
#include "forceflow/pipeline.hpp"
#include "forceflow/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace ff = forceflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataOpts {
  std::string idx_images;
  std::string idx_labels;
  std::string csv;
  int gauss_dim = 0;
  int gauss_count = 500;
  int gauss_clusters = 2;
  double gauss_separation = 10.0;
  double gauss_variance = 1.0;
  uint64_t data_seed = 0;
  std::vector<int> classes;
  int per_class = 0;

  void add(CLI::App* app) {
    auto* g = app->add_option_group("data", "input source (exactly one)");
    g->add_option("--idx-images", idx_images, "IDX image file (plain or .gz)");
    g->add_option("--idx-labels", idx_labels, "IDX label file (plain or .gz)");
    g->add_option("--csv", csv, "feature CSV with header; optional 'label' column");
    g->add_option("--gauss-dim", gauss_dim, "synthetic Gaussians: ambient dimension");
    app->add_option("--gauss-count", gauss_count, "points per synthetic cluster");
    app->add_option("--gauss-clusters", gauss_clusters, "1 or 2 synthetic clusters")
        ->check(CLI::Range(1, 2));
    app->add_option("--gauss-separation", gauss_separation, "distance between cluster centres");
    app->add_option("--gauss-variance", gauss_variance, "per-coordinate variance");
    app->add_option("--data-seed", data_seed, "seed for synthetic data");
    app->add_option("--classes", classes, "keep only these labels")->delimiter(',');
    app->add_option("--per-class", per_class, "keep at most this many rows per label");
  }

  bool given() const { return !idx_images.empty() || !csv.empty() || gauss_dim > 0; }

  ff::DataSource source() const {
    const int count = (!idx_images.empty()) + (!csv.empty()) + (gauss_dim > 0);
    if (count != 1) throw ff::ConfigError("give exactly one input source");
    if (!idx_images.empty()) {
      if (idx_labels.empty()) throw ff::ConfigError("--idx-images needs --idx-labels");
      return ff::IdxSource{idx_images, idx_labels};
    }
    if (!csv.empty()) return ff::CsvSource{csv};
    ff::SyntheticSource s;
    s.spec = gauss_clusters == 1 ? ff::single_gaussian(gauss_dim, gauss_count, gauss_variance)
                                 : ff::two_gaussians(gauss_dim, gauss_count, gauss_separation,
                                                     gauss_variance);
    s.seed = data_seed;
    return s;
  }

  void apply(ff::ExperimentConfig& c) const {
    c.source = source();
    c.classes = classes;
    if (per_class > 0) c.per_class = per_class;
  }
};

struct TsneOpts {
  ff::TsneConfig cfg;
  double learning_rate = 0;
  std::string init = "pca";

  void add(CLI::App* app) {
    app->add_option("--perplexity", cfg.perplexity, "target perplexity");
    app->add_option("--learning-rate", learning_rate, "step on the force balance (default max(n/12, 200))");
    app->add_option("--max-iters", cfg.max_iters, "total t-SNE iterations");
    app->add_option("--exaggeration", cfg.early_exaggeration_factor, "early exaggeration factor");
    app->add_option("--exaggeration-iters", cfg.early_exaggeration_iters,
                    "early exaggeration iterations");
    app->add_option("--grad-tol", cfg.equilibrium_grad_tol, "equilibrium gradient tolerance");
    app->add_option("--init", init, "pca or random")->check(CLI::IsMember({"pca", "random"}));
    app->add_option("--seed", cfg.seed, "seed for random initialisation");
  }

  ff::TsneConfig get() const {
    ff::TsneConfig c = cfg;
    if (learning_rate > 0) c.learning_rate = learning_rate;
    c.init_mode = ff::init_mode_from_string(init);
    return c;
  }
};

struct FlowOpts {
  std::string kind = "modified_attraction";
  bool flip_sign = ff::kDefaultFlipSign;
  int T = 1000;
  std::vector<int> checkpoints;
  double epsilon = 0;

  void add_field(CLI::App* app) {
    app->add_option("--kind", kind, "modified_attraction | raw_attraction | repulsion | negative_gradient");
    app->add_flag("--flip-sign,!--no-flip-sign", flip_sign,
                  "negate the literal force formula (default on)");
  }
  void add_flow(CLI::App* app) {
    app->add_option("--T", T, "flow iterations");
    app->add_option("--checkpoints", checkpoints, "snapshot iterations")->delimiter(',');
  }
  void add_eps(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "sink merge radius (default 0.5 * auto sigma)");
  }
};

ff::Dataset dataset_from(const std::string& dataset_csv, const DataOpts& data) {
  if (!dataset_csv.empty()) return ff::io::load_dataset(dataset_csv);
  ff::ExperimentConfig c;
  data.apply(c);
  return ff::load_experiment_data(c);
}

void require_out(const std::string& out) {
  if (out.empty()) throw ff::ConfigError("--out is required");
  fs::create_directories(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t-SNE force-field flows"};
  app.require_subcommand(1);

  std::string out;
  DataOpts data;
  TsneOpts tsne;
  FlowOpts fo;
  std::string dataset_csv, embedding_csv, field_csv, points_csv, flowed_csv, reference_csv;
  std::string config_path, manifest_path;
  int trials = 5;
  std::vector<uint64_t> seeds;
  int grid_n = 40;
  std::vector<double> bbox;

  auto* embed = app.add_subcommand("embed", "run exact t-SNE and write embedding.csv");
  data.add(embed);
  tsne.add(embed);
  embed->add_option("--out", out, "output directory")->required();

  auto* forces = app.add_subcommand("forces", "extract and interpolate the force field");
  data.add(forces);
  forces->add_option("--dataset", dataset_csv, "dataset.csv written by embed");
  forces->add_option("--embedding", embedding_csv, "embedding CSV (x,y)")->required();
  forces->add_option("--perplexity", tsne.cfg.perplexity, "perplexity used for P");
  fo.add_field(forces);
  forces->add_option("--grid", grid_n, "grid cells per side");
  forces->add_option("--out", out, "output directory")->required();

  auto* flowc = app.add_subcommand("flow", "flow points along a saved field");
  flowc->add_option("--field", field_csv, "field.csv (with .json sidecar)")->required();
  flowc->add_option("--points", points_csv, "start positions CSV (x,y); default: field anchors");
  fo.add_flow(flowc);
  flowc->add_option("--out", out, "output directory")->required();

  auto* sinks = app.add_subcommand("sinks", "detect sinks in flowed positions");
  sinks->add_option("--points", flowed_csv, "flowed positions CSV (x,y[,label])")->required();
  sinks->add_option("--reference", reference_csv,
                    "original embedding, used for the default epsilon");
  sinks->add_option("--dataset", dataset_csv, "dataset.csv for cluster means and labels");
  fo.add_eps(sinks);
  sinks->add_option("--out", out, "output directory")->required();

  auto* evalc = app.add_subcommand("eval", "k-means on original vs flowed embeddings");
  evalc->add_option("--original", embedding_csv, "embedding CSV with label column")->required();
  evalc->add_option("--flowed", flowed_csv, "flowed CSV")->required();
  int k = 2, restarts = 10;
  uint64_t eval_seed = 0;
  evalc->add_option("--k", k, "clusters");
  evalc->add_option("--restarts", restarts, "k-means restarts");
  evalc->add_option("--seed", eval_seed, "k-means seed");
  fo.add_eps(evalc);
  evalc->add_option("--out", out, "output directory")->required();

  auto* avg = app.add_subcommand("average", "average force fields of random-init runs");
  data.add(avg);
  tsne.add(avg);
  fo.add_field(avg);
  fo.add_eps(avg);
  avg->add_option("--trials", trials, "number of runs (seeds 0..trials-1 unless --seeds)");
  avg->add_option("--seeds", seeds, "explicit run seeds")->delimiter(',');
  avg->add_option("--T", fo.T, "flow iterations on the mean field");
  avg->add_option("--grid", grid_n, "grid cells per side");
  avg->add_option("--bbox", bbox, "grid box xmin,xmax,ymin,ymax (default -2,2,-2,2)")
      ->delimiter(',')
      ->expected(4);
  avg->add_option("--out", out, "output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "embed, flow, analyse and export everything");
  data.add(pipe);
  tsne.add(pipe);
  fo.add_field(pipe);
  fo.add_flow(pipe);
  fo.add_eps(pipe);
  pipe->add_option("--config", config_path, "experiment config JSON");
  pipe->add_option("--manifest", manifest_path, "rerun a previous manifest.json");
  pipe->add_option("--grid", grid_n, "grid cells per side");
  pipe->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*embed) {
      ff::ExperimentConfig c;
      data.apply(c);
      c.tsne = tsne.get();
      const ff::Dataset d = ff::load_experiment_data(c);
      const ff::AffinityMatrix P = ff::compute_affinities(d, c.tsne.perplexity);
      const ff::Points2 init = c.tsne.init_mode == ff::InitMode::pca
                                   ? ff::pca_init(d, c.tsne.seed)
                                   : ff::random_init(d.size(), c.tsne.seed);
      const ff::Embedding emb = ff::run_tsne(P, init, c.tsne);
      require_out(out);
      ff::io::save_dataset(fs::path(out) / "dataset.csv", d);
      ff::io::save_embedding(fs::path(out) / "embedding.csv", emb.Y, d.labels);
      c.out = out;
      const json meta = {{"config", json::parse(ff::config_to_json(c))},
                         {"iterations_run", emb.iterations_run},
                         {"stop_reason", ff::to_string(emb.stop_reason)},
                         {"grad_max_norm", emb.grad_max_norm},
                         {"kl_cost", emb.cost},
                         {"Z", emb.Z}};
      ff::io::write_text(fs::path(out) / "embed.json", meta.dump(2) + "\n");
      std::cout << "embedded " << d.size() << " points (" << ff::to_string(emb.stop_reason)
                << " after " << emb.iterations_run << " iterations)\n";
    } else if (*forces) {
      const ff::Dataset d = dataset_from(dataset_csv, data);
      const ff::AffinityMatrix P = ff::compute_affinities(d, tsne.cfg.perplexity);
      ff::Embedding emb;
      emb.Y = ff::io::load_embedding(embedding_csv);
      auto [Q, Z] = ff::output_affinities(emb.Y);
      emb.Q = std::move(Q);
      emb.Z = Z;
      const ff::ForceSampleSet s = ff::with_sign(
          ff::extract_forces(ff::force_kind_from_string(fo.kind), P, emb), fo.flip_sign);
      const auto field = ff::InterpolatedField::from_samples(s);
      require_out(out);
      ff::io::save_field(fs::path(out) / "field.csv", {s, field.k(), field.sigma()});
      const ff::BBox box{emb.Y.col(0).minCoeff(), emb.Y.col(0).maxCoeff(),
                         emb.Y.col(1).minCoeff(), emb.Y.col(1).maxCoeff()};
      const auto grid = ff::sample_grid(field, box, grid_n, grid_n);
      ff::io::save_grid(fs::path(out) / "grid.csv", grid);
      ff::svg::quiver(fs::path(out) / "field.svg", grid, fo.kind);
      std::cout << "field: k = " << field.k() << ", sigma = " << field.sigma() << "\n";
    } else if (*flowc) {
      const ff::io::FieldFile f = ff::io::load_field(field_csv);
      const auto field = (f.k && f.sigma)
                             ? ff::InterpolatedField::from_samples(f.samples, *f.k, *f.sigma)
                             : ff::InterpolatedField::from_samples(f.samples);
      std::optional<ff::Labels> labels;
      const ff::Points2 start =
          points_csv.empty() ? f.samples.anchors : ff::io::load_embedding(points_csv, &labels);
      const auto cps = fo.checkpoints.empty() ? ff::default_checkpoints(fo.T) : fo.checkpoints;
      const ff::FlowResult r =
          ff::flow(start, field, fo.T, cps, ff::to_string(f.samples.kind));
      require_out(out);
      const json meta = {{"sign_flipped", f.samples.sign_flipped}, {"step", 1.0},
                         {"k", field.k()}, {"sigma", field.sigma()}};
      ff::io::save_flow(fs::path(out) / "flow", r, meta.dump());
      ff::io::save_embedding(fs::path(out) / "flowed.csv", r.final, labels);
      std::cout << "flowed " << start.rows() << " points for " << fo.T << " iterations ("
                << r.underflow_count << " underflows)\n";
    } else if (*sinks) {
      std::optional<ff::Labels> labels;
      const ff::Points2 pts = ff::io::load_embedding(flowed_csv, &labels);
      double eps = fo.epsilon;
      if (!(eps > 0)) {
        if (reference_csv.empty()) throw ff::ConfigError("give --epsilon or --reference");
        eps = ff::default_epsilon(ff::io::load_embedding(reference_csv));
      }
      const ff::SinkClustering sc = ff::detect_sinks(pts, eps);
      std::optional<ff::CompositionReport> comp;
      require_out(out);
      if (!dataset_csv.empty()) {
        const ff::Dataset d = ff::io::load_dataset(dataset_csv);
        const ff::ClusterMeans means = ff::cluster_means(d, sc);
        std::vector<std::string> header;
        for (Eigen::Index c = 0; c < d.dim(); ++c) header.push_back("f" + std::to_string(c));
        ff::io::write_csv(fs::path(out) / "cluster_means.csv", header, means.means);
        if (d.labels) labels = d.labels;
      }
      if (labels) comp = ff::label_composition(sc, *labels);
      ff::io::write_text(fs::path(out) / "sinks.json", ff::io::sinks_json(sc, comp));
      std::cout << sc.count() << " sinks at epsilon " << eps << "\n";
    } else if (*evalc) {
      std::optional<ff::Labels> labels;
      const ff::Points2 orig = ff::io::load_embedding(embedding_csv, &labels);
      const ff::Points2 flowed = ff::io::load_embedding(flowed_csv);
      if (!labels) throw ff::ConfigError("--original needs a label column");
      const double eps = fo.epsilon > 0 ? fo.epsilon : ff::default_epsilon(orig);
      const ff::SinkClustering sc = ff::detect_sinks(flowed, eps);
      const ff::EvalReport r =
          ff::evaluate_flow(orig, flowed, *labels, sc.labels, k, eval_seed, restarts);
      require_out(out);
      const json j = {{"agreement_original", r.agreement_original},
                      {"agreement_flowed", r.agreement_flowed},
                      {"sink_purity", r.sink_purity},
                      {"sink_count", sc.count()},
                      {"epsilon", eps},
                      {"k", k},
                      {"restarts", restarts},
                      {"seed", eval_seed},
                      {"kmeans_labels_original", r.kmeans_labels_original},
                      {"kmeans_labels_flowed", r.kmeans_labels_flowed}};
      ff::io::write_text(fs::path(out) / "eval.json", j.dump(2) + "\n");
      std::cout << "accuracy original " << r.agreement_original << ", flowed "
                << r.agreement_flowed << "\n";
    } else if (*avg) {
      if (seeds.empty()) {
        for (int i = 0; i < trials; ++i) seeds.push_back(static_cast<uint64_t>(i));
      }
      std::vector<ff::ExperimentConfig> members;
      for (uint64_t s : seeds) {
        ff::ExperimentConfig c;
        data.apply(c);
        c.tsne = tsne.get();
        c.tsne.init_mode = ff::InitMode::random;
        c.tsne.seed = s;
        c.field_kind = ff::force_kind_from_string(fo.kind);
        c.flip_sign = fo.flip_sign;
        if (fo.epsilon > 0) c.epsilon = fo.epsilon;
        members.push_back(std::move(c));
      }
      ff::AverageOptions opt;
      opt.T = fo.T;
      opt.grid.nx = opt.grid.ny = grid_n;
      if (bbox.size() == 4) opt.grid.bbox = ff::BBox{bbox[0], bbox[1], bbox[2], bbox[3]};
      opt.out = out;
      const ff::AverageResult r = ff::average_runs(members, opt);
      for (size_t i = 0; i < r.members.size(); ++i) {
        std::cout << "trial " << i << ": own field " << r.members[i].own_sinks.count()
                  << " sinks, mean field " << r.members[i].mean_sinks.count() << " sinks\n";
      }
    } else if (*pipe) {
      ff::PipelineResult r;
      if (!manifest_path.empty()) {
        r = ff::rerun_from_manifest(manifest_path,
                                    out.empty() ? std::nullopt : std::optional<std::string>(out));
      } else {
        ff::ExperimentConfig c;
        if (!config_path.empty()) {
          c = ff::config_from_json(ff::io::read_text(config_path));
        } else {
          data.apply(c);
          c.tsne = tsne.get();
          c.field_kind = ff::force_kind_from_string(fo.kind);
          c.flip_sign = fo.flip_sign;
          c.T = fo.T;
          if (!fo.checkpoints.empty()) c.checkpoints = fo.checkpoints;
          if (fo.epsilon > 0) c.epsilon = fo.epsilon;
          c.grid.nx = c.grid.ny = grid_n;
        }
        if (!out.empty()) c.out = out;
        if (c.out.empty()) throw ff::ConfigError("--out is required");
        r = ff::run_pipeline(c);
      }
      std::cout << r.data.size() << " points, " << r.sinks.count() << " sinks";
      if (r.composition) std::cout << ", purity " << r.composition->purity;
      if (r.eval) {
        std::cout << ", k-means accuracy " << r.eval->agreement_original << " -> "
                  << r.eval->agreement_flowed;
      }
      std::cout << "\n";
    }
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
