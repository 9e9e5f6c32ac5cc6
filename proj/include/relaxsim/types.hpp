#pragma once

#include <Eigen/Dense>

namespace relaxsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

} // namespace relaxsim
