#include "forceflow/kdtree.hpp"

#include "forceflow/errors.hpp"

#include <algorithm>
#include <numeric>

namespace forceflow {

KdTree2::KdTree2(const Points2& points) {
  const Eigen::Index n = points.rows();
  if (n > std::numeric_limits<int32_t>::max()) throw ConfigError("too many points for kd-tree");
  xs_.resize(static_cast<size_t>(n));
  ys_.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    xs_[static_cast<size_t>(i)] = points(i, 0);
    ys_[static_cast<size_t>(i)] = points(i, 1);
  }
  perm_.resize(static_cast<size_t>(n));
  std::iota(perm_.begin(), perm_.end(), 0);
  if (n > 0) {
    nodes_.reserve(static_cast<size_t>(2 * n / kLeafSize + 2));
    build(0, static_cast<int32_t>(n));
  }
}

int32_t KdTree2::build(int32_t begin, int32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo[0] = node.lo[1] = std::numeric_limits<double>::infinity();
  node.hi[0] = node.hi[1] = -std::numeric_limits<double>::infinity();
  for (int32_t i = begin; i < end; ++i) {
    const auto p = static_cast<size_t>(perm_[static_cast<size_t>(i)]);
    node.lo[0] = std::min(node.lo[0], xs_[p]);
    node.hi[0] = std::max(node.hi[0], xs_[p]);
    node.lo[1] = std::min(node.lo[1], ys_[p]);
    node.hi[1] = std::max(node.hi[1], ys_[p]);
  }
  const auto id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  const int axis = (node.hi[0] - node.lo[0]) >= (node.hi[1] - node.lo[1]) ? 0 : 1;
  const auto& coord = axis == 0 ? xs_ : ys_;
  const int32_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](int32_t a, int32_t b) {
                     const double ca = coord[static_cast<size_t>(a)];
                     const double cb = coord[static_cast<size_t>(b)];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = coord[static_cast<size_t>(perm_[static_cast<size_t>(mid)])];
  const int32_t left = build(begin, mid);
  const int32_t right = build(mid, end);
  Node& self = nodes_[static_cast<size_t>(id)];
  self.axis = axis;
  self.split = split;
  self.left = left;
  self.right = right;
  return id;
}

double KdTree2::box_sq_dist(const Node& n, const Vec2& q) const {
  double d2 = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double v = q(a);
    const double d = v < n.lo[a] ? n.lo[a] - v : (v > n.hi[a] ? v - n.hi[a] : 0.0);
    d2 += d * d;
  }
  return d2;
}

std::vector<Neighbor> KdTree2::knn(const Vec2& q, Eigen::Index k, Eigen::Index exclude) const {
  std::vector<Neighbor> heap;
  if (k <= 0 || nodes_.empty()) return heap;
  heap.reserve(static_cast<size_t>(k) + 1);
  knn_rec(0, q, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

void KdTree2::knn_rec(int32_t id, const Vec2& q, Eigen::Index k, Eigen::Index exclude,
                      std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<size_t>(id)];
  const auto full = [&] { return static_cast<Eigen::Index>(heap.size()) == k; };
  // Ties at the current worst distance must still be visited: a lower index
  // at the same distance wins.
  if (full() && box_sq_dist(node, q) > heap.front().sq_dist) return;
  if (node.left < 0) {
    for (int32_t i = node.begin; i < node.end; ++i) {
      const int32_t p = perm_[static_cast<size_t>(i)];
      if (p == exclude) continue;
      const double dx = xs_[static_cast<size_t>(p)] - q(0);
      const double dy = ys_[static_cast<size_t>(p)] - q(1);
      const Neighbor cand{p, dx * dx + dy * dy};
      if (!full()) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const bool go_left_first = q(node.axis) < node.split;
  knn_rec(go_left_first ? node.left : node.right, q, k, exclude, heap);
  knn_rec(go_left_first ? node.right : node.left, q, k, exclude, heap);
}

void KdTree2::radius(const Vec2& q, double r, std::vector<Eigen::Index>& out) const {
  out.clear();
  if (nodes_.empty()) return;
  radius_rec(0, q, r * r, out);
}

void KdTree2::radius_rec(int32_t id, const Vec2& q, double r2,
                         std::vector<Eigen::Index>& out) const {
  const Node& node = nodes_[static_cast<size_t>(id)];
  if (box_sq_dist(node, q) > r2) return;
  if (node.left < 0) {
    for (int32_t i = node.begin; i < node.end; ++i) {
      const int32_t p = perm_[static_cast<size_t>(i)];
      const double dx = xs_[static_cast<size_t>(p)] - q(0);
      const double dy = ys_[static_cast<size_t>(p)] - q(1);
      if (dx * dx + dy * dy <= r2) out.push_back(p);
    }
    return;
  }
  radius_rec(node.left, q, r2, out);
  radius_rec(node.right, q, r2, out);
}

}  // namespace forceflow
