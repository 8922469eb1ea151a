#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bdbc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Cluster labels for rows (observations) or columns (variables).
using Labels = std::vector<int>;

} // namespace bdbc
