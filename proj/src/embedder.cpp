#include "forceflow/embedder.hpp"

#include "forceflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace forceflow {

namespace {

constexpr double kInitScale = 1e-4;

void check_shapes(const Matrix& P, const Points2& Y) {
  if (P.rows() != Y.rows() || P.cols() != Y.rows()) {
    throw InputError("affinity matrix is " + std::to_string(P.rows()) + "x" +
                     std::to_string(P.cols()) + " but embedding has " + std::to_string(Y.rows()) +
                     " points");
  }
}

// Fills grad with dC/dy for P scaled by `exaggeration`; returns Z.
double gradient_into(const Matrix& P, double exaggeration, const Points2& Y, Points2& grad) {
  const Eigen::Index n = Y.rows();
  // Two passes: the first accumulates Z, the second uses q = w / Z.
  Matrix W(n, n);
  double Z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    W(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = Y(i, 0) - Y(j, 0);
      const double dy = Y(i, 1) - Y(j, 1);
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      W(i, j) = w;
      W(j, i) = w;
      Z += 2.0 * w;
    }
  }
  const double invZ = 1.0 / Z;
  grad.setZero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = W(j, i);
      const double coef = (exaggeration * P(j, i) - w * invZ) * w;
      gx += coef * (Y(i, 0) - Y(j, 0));
      gy += coef * (Y(i, 1) - Y(j, 1));
    }
    grad(i, 0) = 4.0 * gx;
    grad(i, 1) = 4.0 * gy;
  }
  return Z;
}

double max_row_norm(const Points2& g) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) m = std::max(m, g.row(i).norm());
  return m;
}

}  // namespace

std::string to_string(InitMode mode) { return mode == InitMode::pca ? "pca" : "random"; }

InitMode init_mode_from_string(const std::string& s) {
  if (s == "pca") return InitMode::pca;
  if (s == "random") return InitMode::random;
  throw ConfigError("unknown init mode '" + s + "' (expected pca or random)");
}

std::string to_string(StopReason reason) {
  return reason == StopReason::equilibrium ? "equilibrium" : "max_iters";
}

void TsneConfig::validate() const {
  if (!(perplexity > 0)) throw ConfigError("perplexity must be positive");
  if (learning_rate && !(*learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (!(early_exaggeration_factor > 0)) throw ConfigError("early exaggeration must be positive");
  if (early_exaggeration_iters < 0) throw ConfigError("early exaggeration iterations must be >= 0");
  if (max_iters < early_exaggeration_iters) {
    throw ConfigError("max_iters must be at least early_exaggeration_iters");
  }
  if (initial_momentum < 0 || final_momentum < 0) throw ConfigError("momentum must be >= 0");
  if (momentum_switch_iter < 0) throw ConfigError("momentum switch iteration must be >= 0");
  if (!(equilibrium_grad_tol > 0)) throw ConfigError("equilibrium tolerance must be positive");
}

double TsneConfig::resolved_learning_rate(Eigen::Index n) const {
  return learning_rate ? *learning_rate : std::max(static_cast<double>(n) / 12.0, 200.0);
}

Points2 pca_init(const Dataset& data, uint64_t /*seed*/) {
  data.validate();
  const Eigen::Index n = data.size();
  const Matrix centered = data.points.rowwise() - data.points.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigensolve failed");
  const Eigen::Index s = data.dim();
  if (!(eig.eigenvalues()(s - 1) > 0.0)) throw InputError("data has zero variance");

  Points2 out = Points2::Zero(n, 2);
  const Eigen::Index axes = std::min<Eigen::Index>(2, s);
  for (Eigen::Index a = 0; a < axes; ++a) {
    Vector axis = eig.eigenvectors().col(s - 1 - a);
    Eigen::Index big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0) axis = -axis;
    out.col(a) = centered * axis;
  }
  const double mean0 = out.col(0).mean();
  const double std0 =
      std::sqrt((out.col(0).array() - mean0).square().sum() / static_cast<double>(n));
  if (!(std0 > 0.0)) throw InputError("data has zero variance along the first principal axis");
  out *= kInitScale / std0;
  return out;
}

Points2 random_init(Eigen::Index n, uint64_t seed) {
  if (n < 2) throw ConfigError("random init needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kInitScale);
  Points2 out(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, 0) = normal(rng);
    out(i, 1) = normal(rng);
  }
  return out;
}

OutputAffinities output_affinities(const Points2& Y) {
  const Eigen::Index n = Y.rows();
  OutputAffinities out;
  out.Q.resize(n, n);
  double Z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.Q(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
      out.Q(i, j) = w;
      out.Q(j, i) = w;
      Z += 2.0 * w;
    }
  }
  out.Q /= Z;
  out.Z = Z;
  return out;
}

double kl_cost(const Matrix& P, const Matrix& Q) {
  if (P.rows() != Q.rows() || P.cols() != Q.cols()) throw InputError("P and Q shapes differ");
  double c = 0.0;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      if (i == j) continue;
      const double p = P(i, j);
      if (p <= 0.0) continue;
      const double q = Q(i, j);
      if (!(q > 0.0)) {
        throw NumericalError("q is zero where p is positive at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      }
      c += p * std::log(p / q);
    }
  }
  return c;
}

double kl_cost(const AffinityMatrix& P, const Matrix& Q) { return kl_cost(P.P, Q); }

Points2 gradient(const Matrix& P, const Points2& Y) {
  check_shapes(P, Y);
  Points2 g;
  gradient_into(P, 1.0, Y, g);
  return g;
}

Points2 gradient(const AffinityMatrix& P, const Points2& Y) { return gradient(P.P, Y); }

ForceDecomposition decompose_forces(const AffinityMatrix& aff, const Points2& Y) {
  check_shapes(aff.P, Y);
  const auto [Q, Z] = output_affinities(Y);
  const Eigen::Index n = Y.rows();
  ForceDecomposition out{Points2::Zero(n, 2), Points2::Zero(n, 2)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto diff = Y.row(i) - Y.row(j);
      const double q = Q(i, j);
      out.attraction.row(i) += aff.P(i, j) * q * Z * diff;
      out.repulsion.row(i) += q * q * Z * diff;
    }
  }
  return out;
}

Embedding run_tsne(const AffinityMatrix& aff, const Points2& init, const TsneConfig& config,
                   const TraceSink& trace) {
  config.validate();
  check_shapes(aff.P, init);
  const Eigen::Index n = init.rows();
  const double lr = config.resolved_learning_rate(n);

  Embedding emb;
  Points2 Y = init;
  Points2 update = Points2::Zero(n, 2);
  Points2 grad(n, 2);
  int it = 0;
  for (; it < config.max_iters; ++it) {
    const bool exaggerated = it < config.early_exaggeration_iters;
    const double ex = exaggerated ? config.early_exaggeration_factor : 1.0;
    gradient_into(aff.P, ex, Y, grad);
    const double gmax = max_row_norm(grad);
    if (trace) {
      TraceRecord rec{it, std::numeric_limits<double>::quiet_NaN(), gmax};
      if (config.trace_every > 0 && it % config.trace_every == 0) {
        rec.cost = kl_cost(aff.P, output_affinities(Y).Q);
      }
      trace(rec);
    }
    if (!exaggerated && gmax < config.equilibrium_grad_tol) {
      emb.stop_reason = StopReason::equilibrium;
      break;
    }
    const double momentum =
        it < config.momentum_switch_iter ? config.initial_momentum : config.final_momentum;
    update = momentum * update - (lr / 4.0) * grad;
    Y += update;
    if (!Y.allFinite()) {
      throw NumericalError("t-SNE diverged at iteration " + std::to_string(it));
    }
  }
  emb.iterations_run = it;
  emb.Y = std::move(Y);
  auto [Q, Z] = output_affinities(emb.Y);
  emb.Q = std::move(Q);
  emb.Z = Z;
  emb.cost = kl_cost(aff.P, emb.Q);
  emb.grad_max_norm = max_row_norm(gradient(aff.P, emb.Y));
  if (emb.grad_max_norm < config.equilibrium_grad_tol) emb.stop_reason = StopReason::equilibrium;
  return emb;
}

}  // namespace forceflow
