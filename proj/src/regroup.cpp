#include "kinetostat/regroup.hpp"

#include "kinetostat/errors.hpp"

namespace kinetostat {

RegroupedState partition(const ChainModel& chain, const Eigen::VectorXd& coords) {
    if (coords.size() != chain.joint_count()) throw ModelError("coordinate vector has wrong length");
    RegroupedState r;
    r.coords = coords;

    std::vector<double> theta0, stiff;
    for (int i = 0; i < chain.joint_count(); ++i) {
        const auto& j = chain.elements[i].joint;
        if (j.kind == JointKind::VirtualElastic) {
            r.theta_joints.push_back(i);
            theta0.push_back(0.0);
            stiff.push_back(*j.stiffness);
        }
    }
    for (int i = 0; i < chain.joint_count(); ++i) {
        const auto& j = chain.elements[i].joint;
        if (j.kind == JointKind::PerfectPassive) {
            r.q_joints.push_back(i);
        } else if (j.kind == JointKind::PreloadedPassive) {
            // a spring without stiffness behaves as a perfect passive joint
            const bool active = j.spring->k > 0.0 && j.spring->engaged(coords[i]);
            r.active_mask.push_back(active);
            if (active) {
                r.theta_joints.push_back(i);
                theta0.push_back(j.spring->preload_offset);
                stiff.push_back(j.spring->k);
            } else {
                r.q_joints.push_back(i);
            }
        }
    }

    r.q_tilde.resize(r.q_size());
    for (int k = 0; k < r.q_size(); ++k) r.q_tilde[k] = coords[r.q_joints[k]];
    r.theta_tilde.resize(r.theta_size());
    for (int k = 0; k < r.theta_size(); ++k) r.theta_tilde[k] = coords[r.theta_joints[k]];
    r.theta_tilde_0 = Eigen::Map<Eigen::VectorXd>(theta0.data(), static_cast<Eigen::Index>(theta0.size()));
    r.K_tilde = Eigen::Map<Eigen::VectorXd>(stiff.data(), static_cast<Eigen::Index>(stiff.size()));
    return r;
}

RegroupedState partition(const ChainModel& chain, const ChainState& state) {
    return partition(chain, chain.to_coordinates(state));
}

Eigen::VectorXd spring_forces(const RegroupedState& r) {
    return r.K_tilde.cwiseProduct(r.theta_tilde - r.theta_tilde_0);
}

}  // namespace kinetostat
