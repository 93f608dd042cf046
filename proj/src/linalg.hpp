#pragma once

#include <Eigen/Core>

namespace kinetostat::detail {

/// Condition number of diag(s) * m * diag(s). Infinite if singular.
double scaled_condition(const Eigen::MatrixXd& m, const Eigen::VectorXd& s);

/// One scale factor per block of [[A, B], [B^T, C]] (A is d x d) so that
/// blocks with different physical units become comparable. Rows inside a
/// block are not rescaled individually, so a row that vanishes at a
/// singular configuration still shows up in the condition number.
Eigen::VectorXd block_scaling(const Eigen::MatrixXd& m, Eigen::Index d);

inline constexpr double kSingularCondition = 1e12;

}  // namespace kinetostat::detail
