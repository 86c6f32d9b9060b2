#pragma once

#include "forceflow/forcefield.hpp"
#include "forceflow/kdtree.hpp"
#include "forceflow/types.hpp"

#include <memory>
#include <vector>

namespace forceflow {

struct FieldSample {
  Vec2 force = Vec2::Zero();
  // Number of kernel evaluations whose weights all underflowed (the force is
  // then zero for that member).
  int underflows = 0;
};

// A static vector field on R^2.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual FieldSample evaluate(const Vec2& y) const = 0;
};

// Mean distance from each point to its k-th nearest other point.
double mean_knn_distance(const Points2& Y0, Eigen::Index k);

// Kernel bandwidth: the mean 5-NN distance over the anchors. Needs n >= 6.
double auto_sigma(const Points2& Y0);

struct AutoK {
  Eigen::Index k = 1;
  bool saturated = false;  // no k reached 2 sigma; k = n - 1
};

// Smallest k >= 1 whose mean k-NN distance exceeds 2 sigma.
AutoK auto_k(const Points2& Y0, double sigma);

// Gaussian-weighted average of the forces at the k nearest anchors.
class InterpolatedField final : public VectorField {
 public:
  InterpolatedField(Points2 anchors, Points2 forces, Eigen::Index k, double sigma);

  // k and sigma chosen with auto_sigma / auto_k.
  static InterpolatedField from_samples(const ForceSampleSet& samples);
  static InterpolatedField from_samples(const ForceSampleSet& samples, Eigen::Index k,
                                        double sigma);

  FieldSample evaluate(const Vec2& y) const override;

  const Points2& anchors() const { return anchors_; }
  const Points2& forces() const { return forces_; }
  Eigen::Index k() const { return k_; }
  double sigma() const { return sigma_; }
  bool k_saturated() const { return k_saturated_; }

 private:
  Points2 anchors_;
  Points2 forces_;
  Eigen::Index k_;
  double sigma_;
  bool k_saturated_ = false;
  KdTree2 index_;
};

Vec2 interpolate(const Vec2& query, const InterpolatedField& field);

// Pointwise arithmetic mean of several interpolated fields.
class MeanField final : public VectorField {
 public:
  explicit MeanField(std::vector<std::shared_ptr<const InterpolatedField>> members);

  FieldSample evaluate(const Vec2& y) const override;

  const std::vector<std::shared_ptr<const InterpolatedField>>& members() const {
    return members_;
  }

 private:
  std::vector<std::shared_ptr<const InterpolatedField>> members_;
};

Vec2 mean_interpolate(const Vec2& query, const MeanField& mean);

struct BBox {
  double xmin = -2, xmax = 2, ymin = -2, ymax = 2;
};

// Field values on the cell centres of an nx x ny lattice, row-major (y outer,
// x inner).
struct FieldGrid {
  BBox bbox;
  int nx = 0;
  int ny = 0;
  Points2 positions;
  Points2 values;
};

FieldGrid sample_grid(const VectorField& field, const BBox& bbox, int nx, int ny);

}  // namespace forceflow
