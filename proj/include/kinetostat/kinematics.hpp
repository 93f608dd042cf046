#pragma once

#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"
#include "kinetostat/pose.hpp"
#include "kinetostat/regroup.hpp"

namespace kinetostat {

PoseVector forward_kinematics(const ChainModel& chain, const ChainState& state);
PoseVector forward_kinematics(const ChainModel& chain, const Eigen::VectorXd& coords);

/// d x n analytic Jacobian over every element coordinate. Orientation rows
/// are derivatives of the pose parameters, not angular velocities.
Eigen::MatrixXd joint_jacobian(const ChainModel& chain, const Eigen::VectorXd& coords);

struct ChainJacobians {
    Eigen::MatrixXd J_theta;  // d x theta_size
    Eigen::MatrixXd J_q;      // d x q_size
};

ChainJacobians jacobians(const ChainModel& chain, const RegroupedState& r);

/// Second derivatives of psi = g(q, theta)^T F.
struct LoadedHessians {
    Eigen::MatrixXd qq;
    Eigen::MatrixXd theta_theta;
    Eigen::MatrixXd q_theta;  // rows q_tilde, cols theta_tilde

    Eigen::MatrixXd theta_q() const { return q_theta.transpose(); }
};

/// Central differences of the analytic gradient J^T F, symmetrized.
LoadedHessians loaded_hessians(const ChainModel& chain, const RegroupedState& r,
                               const Eigen::VectorXd& F);

/// Passive columns whose Jacobian is numerically zero. Such coordinates
/// cannot move the platform (e.g. a revolute at a point platform) and are
/// held fixed by the solvers.
std::vector<bool> inert_columns(const Eigen::MatrixXd& J_q, const Eigen::MatrixXd& J_theta);

/// Unloaded inverse kinematics of one chain: virtual springs at zero,
/// actuated and passive coordinates solved so that the chain reaches t.
/// The assembly mode is the one continuously connected to chain.home.
ChainState inverse_kinematics_chain(const ChainModel& chain, const PoseVector& t);

std::vector<ChainState> inverse_kinematics_unloaded(const ManipulatorModel& model,
                                                    const PoseVector& t);

}  // namespace kinetostat
