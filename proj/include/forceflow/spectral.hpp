#pragma once

#include "forceflow/types.hpp"

namespace forceflow {

// Undirected graph with symmetric nonnegative weights and zero diagonal.
struct Graph {
  Matrix adjacency;
  Vector degrees;

  static Graph from_adjacency(Matrix adjacency);
  Eigen::Index size() const { return adjacency.rows(); }
};

// Symmetrised k-nearest-neighbour graph (edge if either point is among the
// other's k nearest), unit weights.
Graph knn_graph(const Matrix& points, int k = 10);

// D - A.
Matrix laplacian(const Graph& graph);

// <x, L x>.
double quadratic_form(const Graph& graph, const Vector& x);

// One explicit descent step on <x, Lx>: x_i + 2 eps sum_j a_ij (x_j - x_i).
Vector descent_step(const Graph& graph, const Vector& x, double eps);

// Component id per vertex, numbered in order of lowest vertex.
std::vector<int> connected_components(const Graph& graph);

struct Eigenmap {
  Matrix coords;       // n x d, unit columns, orthogonal to 1 and each other
  Vector eigenvalues;  // d smallest nontrivial, ascending
};

// Each column is signed so its first entry with |v| > 1e-12 is positive.
Eigenmap eigenmap(const Graph& graph, int d);

// max_i |[(D - A) f]_i - lambda f_i|
double force_identity_residual(const Graph& graph, const Vector& f, double lambda);

}  // namespace forceflow
