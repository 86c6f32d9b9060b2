#include "forceflow/spectral.hpp"

#include "forceflow/errors.hpp"
#include "forceflow/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace forceflow {

Graph Graph::from_adjacency(Matrix adjacency) {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n) throw InputError("adjacency matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw InputError("adjacency diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = adjacency(i, j);
      if (!std::isfinite(a) || a < 0.0) throw InputError("adjacency weights must be >= 0");
      if (a != adjacency(j, i)) throw InputError("adjacency matrix must be symmetric");
    }
  }
  Graph g;
  g.degrees = adjacency.rowwise().sum();
  g.adjacency = std::move(adjacency);
  return g;
}

Graph knn_graph(const Matrix& points, int k) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k >= n) throw ConfigError("kNN graph needs 1 <= k < n");
  Matrix A = Matrix::Zero(n, n);
  std::vector<std::pair<double, Eigen::Index>> d(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      d[static_cast<size_t>(j)] = {(points.row(i) - points.row(j)).squaredNorm(), j};
    }
    d[static_cast<size_t>(i)].first = std::numeric_limits<double>::infinity();
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    for (int r = 0; r < k; ++r) {
      const Eigen::Index j = d[static_cast<size_t>(r)].second;
      A(i, j) = 1.0;
      A(j, i) = 1.0;
    }
  }
  return Graph::from_adjacency(std::move(A));
}

Matrix laplacian(const Graph& graph) {
  Matrix L = -graph.adjacency;
  L.diagonal() = graph.degrees;
  return L;
}

double quadratic_form(const Graph& graph, const Vector& x) {
  return x.dot(laplacian(graph) * x);
}

Vector descent_step(const Graph& graph, const Vector& x, double eps) {
  const Eigen::Index n = graph.size();
  Vector out = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pull = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) pull += graph.adjacency(i, j) * (x(j) - x(i));
    out(i) += 2.0 * eps * pull;
  }
  return out;
}

std::vector<int> connected_components(const Graph& graph) {
  const Eigen::Index n = graph.size();
  std::vector<int> comp(static_cast<size_t>(n), -1);
  int next = 0;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[static_cast<size_t>(s)] >= 0) continue;
    comp[static_cast<size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index u = 0; u < n; ++u) {
        if (graph.adjacency(v, u) > 0.0 && comp[static_cast<size_t>(u)] < 0) {
          comp[static_cast<size_t>(u)] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return comp;
}

Eigenmap eigenmap(const Graph& graph, int d) {
  const Eigen::Index n = graph.size();
  if (d < 1 || d >= n) throw ConfigError("eigenmap dimension must satisfy 1 <= d < n");
  const auto comp = connected_components(graph);
  const int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  if (ncomp > 1) {
    throw StructuralError("graph is disconnected (" + std::to_string(ncomp) + " components)");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian(graph));
  if (eig.info() != Eigen::Success) throw NumericalError("Laplacian eigensolve failed");
  Eigenmap out;
  out.coords = eig.eigenvectors().middleCols(1, d);
  out.eigenvalues = eig.eigenvalues().segment(1, d);
  for (int c = 0; c < d; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(out.coords(i, c)) > 1e-12) {
        if (out.coords(i, c) < 0) out.coords.col(c) *= -1.0;
        break;
      }
    }
  }
  return out;
}

double force_identity_residual(const Graph& graph, const Vector& f, double lambda) {
  if (f.size() != graph.size()) throw InputError("vector length does not match graph");
  return (laplacian(graph) * f - lambda * f).cwiseAbs().maxCoeff();
}

}  // namespace forceflow
