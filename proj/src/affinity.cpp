#include "forceflow/affinity.hpp"

#include "forceflow/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace forceflow {

namespace {

constexpr double kSigmaLo = 1e-12;
constexpr double kSigmaHi = 1e12;
constexpr int kMaxBisection = 100;
// Accepted residual, and the much tighter one the search aims for so that
// sigma itself is resolved to near machine precision.
constexpr double kPerplexityRelTol = 1e-5;
constexpr double kPerplexityTargetTol = 1e-13;

// Entropy (bits) of row i built with bandwidth sigma. Distances are shifted by
// the row minimum so the largest kernel value is exp(0) and nothing underflows
// during the search.
double row_entropy_bits(const Matrix& sq_dists, Eigen::Index i, double sigma) {
  const Eigen::Index n = sq_dists.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, sq_dists(i, j));
  }
  const double beta = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  double weighted = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const double shifted = sq_dists(i, j) - dmin;
    const double w = std::exp(-beta * shifted);
    sum += w;
    weighted += w * beta * shifted;
  }
  // H_nats = log(sum) + E[beta * shifted]
  const double h_nats = std::log(sum) + weighted / sum;
  return h_nats / std::log(2.0);
}

}  // namespace

void Dataset::validate() const {
  if (points.rows() < 2) throw InputError("dataset needs at least 2 points");
  if (points.cols() < 1) throw InputError("dataset needs at least 1 feature");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (!std::isfinite(points(i, c))) {
        throw InputError("non-finite feature at row " + std::to_string(i) + ", column " +
                         std::to_string(c));
      }
    }
  }
  if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows()) {
    throw InputError("label count does not match point count");
  }
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != points.rows()) {
    throw InputError("id count does not match point count");
  }
}

Dataset Dataset::from_points(Matrix points, std::optional<Labels> labels) {
  Dataset d;
  d.points = std::move(points);
  d.labels = std::move(labels);
  d.ids.resize(static_cast<size_t>(d.points.rows()));
  for (size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = static_cast<int64_t>(i);
  return d;
}

Matrix pairwise_sq_dists(const Dataset& data) {
  data.validate();
  const Eigen::Index n = data.size();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (data.points.row(i) - data.points.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Vector calibrate_bandwidths(const Matrix& sq_dists, double perplexity) {
  const Eigen::Index n = sq_dists.rows();
  if (!(perplexity > 1.0) || !(perplexity < static_cast<double>(n))) {
    throw ConfigError("perplexity must lie in (1, n); got " + std::to_string(perplexity) +
                      " with n = " + std::to_string(n));
  }
  const double target_bits = std::log2(perplexity);
  Vector sigmas(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = kSigmaLo;
    double hi = kSigmaHi;
    double sigma = std::sqrt(lo * hi);
    double rel = std::numeric_limits<double>::infinity();
    for (int step = 0; step < kMaxBisection; ++step) {
      const double perp = std::exp2(row_entropy_bits(sq_dists, i, sigma));
      rel = std::abs(perp - perplexity) / perplexity;
      if (rel < kPerplexityTargetTol) break;
      if (perp > perplexity) {
        hi = sigma;
      } else {
        lo = sigma;
      }
      const double mid = std::sqrt(lo * hi);
      if (mid == sigma) break;
      sigma = mid;
    }
    rel = std::abs(std::exp2(row_entropy_bits(sq_dists, i, sigma)) - perplexity) / perplexity;
    if (!(rel < kPerplexityRelTol)) {
      throw NumericalError("bandwidth bisection did not converge for row " + std::to_string(i) +
                           " (relative perplexity error " + std::to_string(rel) + " towards " +
                           std::to_string(target_bits) + " bits)");
    }
    sigmas(i) = sigma;
  }
  return sigmas;
}

Matrix conditional_affinities(const Matrix& sq_dists, const Vector& sigmas) {
  const Eigen::Index n = sq_dists.rows();
  if (sigmas.size() != n) throw InputError("sigma count does not match distance matrix");
  Matrix cond = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = sigmas(i);
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ConfigError("bandwidth for row " + std::to_string(i) + " must be positive");
    }
    const double inv = 1.0 / (2.0 * s * s);
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cond(i, j) = std::exp(-sq_dists(i, j) * inv);
      denom += cond(i, j);
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw NumericalError("conditional affinities underflow in row " + std::to_string(i));
    }
    cond.row(i) /= denom;
  }
  return cond;
}

double row_perplexity(const Matrix& cond, Eigen::Index row) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < cond.cols(); ++j) {
    if (j == row) continue;
    const double p = cond(row, j);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return std::exp2(h);
}

AffinityMatrix symmetrize(const Matrix& cond) {
  const Eigen::Index n = cond.rows();
  if (cond.cols() != n) throw InputError("conditional matrix must be square");
  AffinityMatrix out;
  out.P.resize(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.P(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (cond(i, j) + cond(j, i)) * scale;
      out.P(i, j) = v;
      out.P(j, i) = v;
    }
  }
  return out;
}

AffinityMatrix compute_affinities(const Dataset& data, double perplexity) {
  const Matrix d2 = pairwise_sq_dists(data);
  Vector sigmas = calibrate_bandwidths(d2, perplexity);
  AffinityMatrix aff = symmetrize(conditional_affinities(d2, sigmas));
  aff.sigmas = std::move(sigmas);
  aff.perplexity = perplexity;
  return aff;
}

}  // namespace forceflow
