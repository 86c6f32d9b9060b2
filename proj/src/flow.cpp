#include "forceflow/flow.hpp"

#include "forceflow/errors.hpp"
#include "forceflow/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace forceflow {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  size_t find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<size_t> parent_;
};

}  // namespace

std::vector<int> default_checkpoints(int T) {
  std::vector<int> cps{0, T / 8, T / 4, T / 2, T};
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

FlowResult flow(const Points2& start, const VectorField& field, int T,
                const std::vector<int>& checkpoints, std::string field_kind) {
  if (T < 0) throw ConfigError("flow iteration count must be >= 0");
  if (!start.allFinite()) throw InputError("flow start positions are not finite");
  std::vector<int> cps;
  for (int c : checkpoints) {
    if (c < 0 || c > T) {
      throw ConfigError("checkpoint " + std::to_string(c) + " is outside [0, " + std::to_string(T) + "]");
    }
    cps.push_back(c);
  }
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

  FlowResult res;
  res.initial = start;
  res.iterations = T;
  res.field_kind = std::move(field_kind);
  Points2 Y = start;
  auto next_cp = cps.begin();
  const auto capture = [&](int it) {
    if (next_cp != cps.end() && *next_cp == it) {
      res.snapshots.push_back({it, Y});
      ++next_cp;
    }
  };
  capture(0);
  for (int t = 1; t <= T; ++t) {
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      const FieldSample s = field.evaluate(Y.row(i).transpose());
      res.underflow_count += s.underflows;
      Y.row(i) += s.force.transpose();
      if (!std::isfinite(Y(i, 0)) || !std::isfinite(Y(i, 1))) {
        throw NumericalError("flow produced a non-finite position for point " +
                             std::to_string(i) + " at iteration " + std::to_string(t));
      }
    }
    capture(t);
  }
  res.final = std::move(Y);
  return res;
}

std::vector<int> SinkClustering::non_converged() const {
  std::vector<int> out;
  for (size_t s = 0; s < sink_diameters.size(); ++s) {
    if (sink_diameters[s] > 10.0 * epsilon) out.push_back(static_cast<int>(s));
  }
  return out;
}

SinkClustering detect_sinks(const Points2& pts, double epsilon) {
  if (!(epsilon > 0)) throw ConfigError("sink merge radius must be positive");
  const auto n = static_cast<size_t>(pts.rows());
  DisjointSets sets(n);
  const KdTree2 tree(pts);
  std::vector<Eigen::Index> near;
  for (size_t i = 0; i < n; ++i) {
    tree.radius(pts.row(static_cast<Eigen::Index>(i)).transpose(), epsilon, near);
    for (Eigen::Index j : near) sets.unite(i, static_cast<size_t>(j));
  }

  SinkClustering out;
  out.epsilon = epsilon;
  out.labels.assign(n, -1);
  std::vector<int> root_to_sink(n, -1);
  for (size_t i = 0; i < n; ++i) {
    const size_t r = sets.find(i);
    if (root_to_sink[r] < 0) {
      root_to_sink[r] = out.count();
      out.sink_sizes.push_back(0);
    }
    out.labels[i] = root_to_sink[r];
    ++out.sink_sizes[static_cast<size_t>(out.labels[i])];
  }
  const int m = out.count();
  out.sink_centers = Points2::Zero(m, 2);
  std::vector<std::vector<Eigen::Index>> members(static_cast<size_t>(m));
  for (size_t i = 0; i < n; ++i) {
    out.sink_centers.row(out.labels[i]) += pts.row(static_cast<Eigen::Index>(i));
    members[static_cast<size_t>(out.labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  out.sink_diameters.assign(static_cast<size_t>(m), 0.0);
  for (int s = 0; s < m; ++s) {
    out.sink_centers.row(s) /= static_cast<double>(out.sink_sizes[static_cast<size_t>(s)]);
    const auto& mem = members[static_cast<size_t>(s)];
    double d2 = 0.0;
    for (size_t a = 0; a < mem.size(); ++a) {
      for (size_t b = a + 1; b < mem.size(); ++b) {
        d2 = std::max(d2, (pts.row(mem[a]) - pts.row(mem[b])).squaredNorm());
      }
    }
    out.sink_diameters[static_cast<size_t>(s)] = std::sqrt(d2);
  }
  return out;
}

double default_epsilon(const Points2& original_embedding) {
  return 0.5 * auto_sigma(original_embedding);
}

ClusterMeans cluster_means(const Dataset& data, const SinkClustering& clustering) {
  if (static_cast<Eigen::Index>(clustering.labels.size()) != data.size()) {
    throw InputError("clustering and dataset sizes differ");
  }
  const int m = clustering.count();
  Matrix sums = Matrix::Zero(m, data.dim());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    sums.row(clustering.labels[static_cast<size_t>(i)]) += data.points.row(i);
  }
  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return clustering.sink_sizes[static_cast<size_t>(a)] >
           clustering.sink_sizes[static_cast<size_t>(b)];
  });
  ClusterMeans out;
  out.means.resize(m, data.dim());
  for (int r = 0; r < m; ++r) {
    const int s = order[static_cast<size_t>(r)];
    const int size = clustering.sink_sizes[static_cast<size_t>(s)];
    out.means.row(r) = sums.row(s) / static_cast<double>(size);
    out.sink_ids.push_back(s);
    out.sizes.push_back(size);
  }
  return out;
}

CompositionReport label_composition(const SinkClustering& clustering, const Labels& labels) {
  if (labels.size() != clustering.labels.size()) {
    throw InputError("label count does not match clustering size");
  }
  CompositionReport rep;
  rep.sinks.resize(static_cast<size_t>(clustering.count()));
  for (size_t s = 0; s < rep.sinks.size(); ++s) rep.sinks[s].sink = static_cast<int>(s);
  for (size_t i = 0; i < labels.size(); ++i) {
    auto& sc = rep.sinks[static_cast<size_t>(clustering.labels[i])];
    ++sc.counts[labels[i]];
    ++sc.size;
    ++rep.class_totals[labels[i]];
    rep.misclassified_by_class.try_emplace(labels[i], 0);
  }
  for (auto& sc : rep.sinks) {
    int best = -1;
    for (const auto& [label, count] : sc.counts) {
      if (count > best) {
        best = count;
        sc.majority_label = label;
      }
    }
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto& sc = rep.sinks[static_cast<size_t>(clustering.labels[i])];
    if (labels[i] != sc.majority_label) {
      ++rep.misclassified_by_class[labels[i]];
      ++rep.misclassified;
    }
  }
  rep.purity = labels.empty() ? 1.0
                              : 1.0 - static_cast<double>(rep.misclassified) /
                                          static_cast<double>(labels.size());
  return rep;
}

}  // namespace forceflow
