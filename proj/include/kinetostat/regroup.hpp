#pragma once

#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"

namespace kinetostat {

/// Active/inactive split of the chain coordinates.
///
/// q_tilde gathers everything that currently carries no generalized force
/// (perfect passive joints and disengaged preloaded joints); theta_tilde
/// gathers every spring-like coordinate (virtual springs followed by engaged
/// preloaded joints). Both keep chain order inside each group.
struct RegroupedState {
    Eigen::VectorXd coords;  // one value per element, actuated included

    std::vector<int> q_joints;      // element index of each q_tilde entry
    std::vector<int> theta_joints;  // element index of each theta_tilde entry

    Eigen::VectorXd q_tilde;
    Eigen::VectorXd theta_tilde;
    Eigen::VectorXd theta_tilde_0;
    Eigen::VectorXd K_tilde;  // diagonal

    std::vector<bool> active_mask;  // one per preloaded joint, chain order

    int q_size() const { return static_cast<int>(q_joints.size()); }
    int theta_size() const { return static_cast<int>(theta_joints.size()); }
};

RegroupedState partition(const ChainModel& chain, const Eigen::VectorXd& coords);
RegroupedState partition(const ChainModel& chain, const ChainState& state);

/// Generalized force of every spring-like coordinate, K_tilde (theta - theta0).
Eigen::VectorXd spring_forces(const RegroupedState& r);

}  // namespace kinetostat
