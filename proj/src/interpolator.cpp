#include "forceflow/interpolator.hpp"

#include "forceflow/errors.hpp"

#include <cmath>
#include <string>

namespace forceflow {

namespace {

constexpr double kUnderflowWeight = 1e-300;
constexpr Eigen::Index kSigmaNeighbors = 5;

}  // namespace

double mean_knn_distance(const Points2& Y0, Eigen::Index k) {
  const Eigen::Index n = Y0.rows();
  if (k < 1 || k > n - 1) {
    throw ConfigError("neighbour rank " + std::to_string(k) + " outside [1, n-1]");
  }
  const KdTree2 tree(Y0);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nb = tree.knn(Y0.row(i).transpose(), k, i);
    sum += std::sqrt(nb.back().sq_dist);
  }
  return sum / static_cast<double>(n);
}

double auto_sigma(const Points2& Y0) {
  if (Y0.rows() < kSigmaNeighbors + 1) {
    throw ConfigError("auto sigma needs at least 6 anchors, got " + std::to_string(Y0.rows()));
  }
  return mean_knn_distance(Y0, kSigmaNeighbors);
}

AutoK auto_k(const Points2& Y0, double sigma) {
  if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  const Eigen::Index n = Y0.rows();
  if (n < 2) throw ConfigError("auto k needs at least 2 anchors");
  const KdTree2 tree(Y0);
  const double target = 2.0 * sigma;
  Eigen::Index width = std::min<Eigen::Index>(16, n - 1);
  while (true) {
    std::vector<double> sums(static_cast<size_t>(width), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto nb = tree.knn(Y0.row(i).transpose(), width, i);
      for (Eigen::Index r = 0; r < width; ++r) {
        sums[static_cast<size_t>(r)] += std::sqrt(nb[static_cast<size_t>(r)].sq_dist);
      }
    }
    for (Eigen::Index r = 0; r < width; ++r) {
      if (sums[static_cast<size_t>(r)] / static_cast<double>(n) > target) return {r + 1, false};
    }
    if (width == n - 1) return {n - 1, true};
    width = std::min(2 * width, n - 1);
  }
}

InterpolatedField::InterpolatedField(Points2 anchors, Points2 forces, Eigen::Index k, double sigma)
    : anchors_(std::move(anchors)), forces_(std::move(forces)), k_(k), sigma_(sigma) {
  if (anchors_.rows() != forces_.rows()) throw InputError("anchor and force counts differ");
  if (anchors_.rows() < 1) throw InputError("field needs at least one anchor");
  if (k_ < 1 || k_ > anchors_.rows()) {
    throw ConfigError("k = " + std::to_string(k_) + " outside [1, " +
                      std::to_string(anchors_.rows()) + "]");
  }
  if (!(sigma_ > 0) || !std::isfinite(sigma_)) throw ConfigError("sigma must be positive");
  if (!anchors_.allFinite() || !forces_.allFinite()) throw InputError("non-finite field sample");
  index_ = KdTree2(anchors_);
}

InterpolatedField InterpolatedField::from_samples(const ForceSampleSet& samples) {
  const double sigma = auto_sigma(samples.anchors);
  const AutoK k = auto_k(samples.anchors, sigma);
  InterpolatedField f(samples.anchors, samples.forces, k.k, sigma);
  f.k_saturated_ = k.saturated;
  return f;
}

InterpolatedField InterpolatedField::from_samples(const ForceSampleSet& samples, Eigen::Index k,
                                                  double sigma) {
  return InterpolatedField(samples.anchors, samples.forces, k, sigma);
}

FieldSample InterpolatedField::evaluate(const Vec2& y) const {
  const auto nb = index_.knn(y, k_);
  const double inv = 1.0 / (2.0 * sigma_ * sigma_);
  double wsum = 0.0;
  bool any = false;
  Vec2 acc = Vec2::Zero();
  for (const Neighbor& n : nb) {
    const double w = std::exp(-n.sq_dist * inv);
    if (w >= kUnderflowWeight) any = true;
    wsum += w;
    acc += w * forces_.row(n.index).transpose();
  }
  FieldSample out;
  if (!any || !(wsum > 0.0)) {
    out.underflows = 1;
    return out;
  }
  out.force = acc / wsum;
  return out;
}

Vec2 interpolate(const Vec2& query, const InterpolatedField& field) {
  return field.evaluate(query).force;
}

MeanField::MeanField(std::vector<std::shared_ptr<const InterpolatedField>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("mean field needs at least one member");
  for (const auto& m : members_) {
    if (!m) throw ConfigError("null mean-field member");
  }
}

FieldSample MeanField::evaluate(const Vec2& y) const {
  FieldSample out;
  for (const auto& m : members_) {
    const FieldSample s = m->evaluate(y);
    out.force += s.force;
    out.underflows += s.underflows;
  }
  out.force /= static_cast<double>(members_.size());
  return out;
}

Vec2 mean_interpolate(const Vec2& query, const MeanField& mean) {
  return mean.evaluate(query).force;
}

FieldGrid sample_grid(const VectorField& field, const BBox& bbox, int nx, int ny) {
  if (nx < 2 || ny < 2) throw ConfigError("grid resolution must be at least 2x2");
  if (!(bbox.xmax > bbox.xmin) || !(bbox.ymax > bbox.ymin)) {
    throw ConfigError("grid bounding box is degenerate");
  }
  FieldGrid g;
  g.bbox = bbox;
  g.nx = nx;
  g.ny = ny;
  g.positions.resize(static_cast<Eigen::Index>(nx) * ny, 2);
  g.values.resize(static_cast<Eigen::Index>(nx) * ny, 2);
  const double dx = (bbox.xmax - bbox.xmin) / nx;
  const double dy = (bbox.ymax - bbox.ymin) / ny;
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c) {
      const Eigen::Index idx = static_cast<Eigen::Index>(r) * nx + c;
      const Vec2 p(bbox.xmin + (c + 0.5) * dx, bbox.ymin + (r + 0.5) * dy);
      g.positions.row(idx) = p.transpose();
      g.values.row(idx) = field.evaluate(p).force.transpose();
    }
  }
  return g;
}

}  // namespace forceflow
