#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace forceflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Vec2 = Eigen::Vector2d;
using Labels = std::vector<int>;

}  // namespace forceflow
