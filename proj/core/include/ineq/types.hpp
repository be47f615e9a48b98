#pragma once

#include <Eigen/Dense>

namespace ineq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Denominator used for covariate moments: 1/n or 1/(n-1).
enum class MomentConvention { population, sample };

}  // namespace ineq
