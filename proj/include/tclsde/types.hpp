#pragma once

#include <Eigen/Dense>

namespace tclsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace tclsde
