#pragma once

#include <Eigen/Dense>

namespace cdse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace cdse
