#pragma once

#include "forceflow/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace forceflow {

struct Neighbor {
  Eigen::Index index = -1;
  double sq_dist = 0.0;

  // Nearer first; equal distances resolved by lower index.
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
  }
};

// Static 2-D kd-tree for exact nearest-neighbour and radius queries.
// The point set is copied; the tree is immutable and safe to query from
// several threads.
class KdTree2 {
 public:
  KdTree2() = default;
  explicit KdTree2(const Points2& points);

  Eigen::Index size() const { return static_cast<Eigen::Index>(xs_.size()); }

  // The k nearest points to q, sorted by (distance, index). `exclude` (if
  // >= 0) is skipped, which gives self-excluded neighbours of a data point.
  std::vector<Neighbor> knn(const Vec2& q, Eigen::Index k, Eigen::Index exclude = -1) const;

  // Indices of all points with |p - q| <= radius, unsorted.
  void radius(const Vec2& q, double radius, std::vector<Eigen::Index>& out) const;

 private:
  struct Node {
    int32_t begin = 0;
    int32_t end = 0;
    int32_t left = -1;
    int32_t right = -1;
    int axis = 0;
    double split = 0.0;
    double lo[2]{0, 0};
    double hi[2]{0, 0};
  };

  int32_t build(int32_t begin, int32_t end);
  void knn_rec(int32_t node, const Vec2& q, Eigen::Index k, Eigen::Index exclude,
               std::vector<Neighbor>& heap) const;
  void radius_rec(int32_t node, const Vec2& q, double r2, std::vector<Eigen::Index>& out) const;
  double box_sq_dist(const Node& n, const Vec2& q) const;

  static constexpr int kLeafSize = 12;

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<int32_t> perm_;
  std::vector<Node> nodes_;
};

}  // namespace forceflow
