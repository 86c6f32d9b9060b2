#include "forceflow/eval.hpp"

#include "forceflow/errors.hpp"
#include "forceflow/flow.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace forceflow {

namespace {

constexpr size_t kMaxMatchClasses = 8;

double assign(const Matrix& X, const Matrix& C, Labels& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < C.rows(); ++c) {
      const double d = (X.row(i) - C.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<size_t>(i)] = arg;
    total += best;
  }
  return total;
}

Matrix plus_plus_seed(const Matrix& X, int k, std::mt19937_64& rng) {
  const Eigen::Index n = X.rows();
  Matrix C(k, X.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  C.row(0) = X.row(first(rng));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (X.row(i) - C.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        r -= d2(pick);
        if (r <= 0) break;
      }
    } else {
      pick = first(rng);
    }
    C.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (X.row(i) - C.row(c)).squaredNorm());
    }
  }
  return C;
}

KMeansResult lloyd(const Matrix& X, Matrix C, int max_iters) {
  const Eigen::Index n = X.rows();
  const auto k = static_cast<int>(C.rows());
  KMeansResult r;
  r.labels.assign(static_cast<size_t>(n), 0);
  double cost = assign(X, C, r.labels);
  r.wcss_trace.push_back(cost);
  for (int it = 0; it < max_iters; ++it) {
    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels[static_cast<size_t>(i)]) += X.row(i);
      ++counts[static_cast<size_t>(r.labels[static_cast<size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        C.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
        continue;
      }
      // Empty cluster: take over the point farthest from its centroid.
      Eigen::Index far = 0;
      double worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (X.row(i) - C.row(r.labels[static_cast<size_t>(i)])).squaredNorm();
        if (d > worst) {
          worst = d;
          far = i;
        }
      }
      C.row(c) = X.row(far);
    }
    Labels next(static_cast<size_t>(n));
    const double next_cost = assign(X, C, next);
    r.wcss_trace.push_back(next_cost);
    const bool stable = next == r.labels;
    r.labels = std::move(next);
    cost = next_cost;
    if (stable) break;
  }
  r.centroids = std::move(C);
  r.wcss = cost;
  return r;
}

}  // namespace

KMeansResult kmeans_fit(const Matrix& points, int k, uint64_t seed, int restarts, int max_iters) {
  if (k < 1 || k > points.rows()) throw ConfigError("k-means needs 1 <= k <= n");
  if (restarts < 1) throw ConfigError("k-means needs at least one restart");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd(points, plus_plus_seed(points, k, rng), max_iters);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

Labels kmeans(const Matrix& points, int k, uint64_t seed, int restarts) {
  return kmeans_fit(points, k, seed, restarts).labels;
}

double wcss(const Matrix& points, const Labels& labels, int k) {
  Matrix sums = Matrix::Zero(k, points.cols());
  std::vector<int> counts(static_cast<size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sums.row(labels[static_cast<size_t>(i)]) += points.row(i);
    ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<size_t>(i)];
    total += (points.row(i) - sums.row(c) / counts[static_cast<size_t>(c)]).squaredNorm();
  }
  return total;
}

double best_match_accuracy(const Labels& pred, const Labels& truth) {
  if (pred.size() != truth.size()) throw InputError("prediction and truth lengths differ");
  if (pred.empty()) return 1.0;
  std::map<int, size_t> pmap;
  std::map<int, size_t> tmap;
  for (int p : pred) pmap.try_emplace(p, pmap.size());
  for (int t : truth) tmap.try_emplace(t, tmap.size());
  if (pmap.size() > kMaxMatchClasses || tmap.size() > kMaxMatchClasses) {
    throw ConfigError("best-match accuracy supports at most 8 classes");
  }
  const size_t m = std::max(pmap.size(), tmap.size());
  std::vector<std::vector<int>> confusion(m, std::vector<int>(m, 0));
  for (size_t i = 0; i < pred.size(); ++i) ++confusion[pmap[pred[i]]][tmap[truth[i]]];
  std::vector<size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hits = 0;
    for (size_t p = 0; p < m; ++p) hits += confusion[p][perm[p]];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

double silhouette(const Matrix& X, const Labels& labels) {
  const Eigen::Index n = X.rows();
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, double> sum;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[static_cast<size_t>(j)]] += (X.row(i) - X.row(j)).norm();
    }
    const int own = labels[static_cast<size_t>(i)];
    if (sizes[own] == 1) continue;  // s(i) = 0
    const double a = sum[own] / (sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, s] : sum) {
      if (l != own) b = std::min(b, s / sizes[l]);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

EvalReport evaluate_flow(const Points2& original, const Points2& flowed, const Labels& truth,
                         const Labels& sink_labels, int k, uint64_t seed, int restarts) {
  EvalReport r;
  r.seed = seed;
  r.restarts = restarts;
  r.k = k;
  r.kmeans_labels_original = kmeans(original, k, seed, restarts);
  r.kmeans_labels_flowed = kmeans(flowed, k, seed, restarts);
  r.agreement_original = best_match_accuracy(r.kmeans_labels_original, truth);
  r.agreement_flowed = best_match_accuracy(r.kmeans_labels_flowed, truth);
  if (!sink_labels.empty()) {
    SinkClustering sc;
    sc.labels = sink_labels;
    const int m = *std::max_element(sink_labels.begin(), sink_labels.end()) + 1;
    sc.sink_sizes.assign(static_cast<size_t>(m), 0);
    for (int l : sink_labels) ++sc.sink_sizes[static_cast<size_t>(l)];
    r.sink_purity = label_composition(sc, truth).purity;
  }
  return r;
}

}  // namespace forceflow
