#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "kinetostat/pose.hpp"
#include "kinetostat/spring_law.hpp"

namespace kinetostat {

enum class JointKind { Actuated, PerfectPassive, PreloadedPassive, VirtualElastic };
enum class JointMotion { Rotational, Translational };

std::string_view to_string(JointKind k);
std::string_view to_string(JointMotion m);
JointKind joint_kind_from_string(std::string_view s);
JointMotion joint_motion_from_string(std::string_view s);

struct JointModel {
    JointKind kind = JointKind::PerfectPassive;
    JointMotion motion = JointMotion::Rotational;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // in the joint frame
    std::optional<SpringLaw> spring;                   // PreloadedPassive only
    std::optional<double> stiffness;                   // VirtualElastic only
};

/// Fixed transform: translation followed by R = Rz(yaw) Ry(pitch) Rx(roll).
struct Frame {
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Vector3d rpy = Eigen::Vector3d::Zero();

    Eigen::Isometry3d transform() const;
};

/// Rigid link transform applied before the joint motion.
struct ChainElement {
    Frame link;
    JointModel joint;
};

/// Joint coordinates grouped by kind, each in chain order.
struct ChainState {
    Eigen::VectorXd rho;
    Eigen::VectorXd q;
    Eigen::VectorXd vartheta;
    Eigen::VectorXd theta;
};

/// One serial chain from the fixed base to the end platform.
struct ChainModel {
    std::string name;
    TaskDim dim = TaskDim::Point2;
    Frame base;
    std::vector<ChainElement> elements;
    Frame tool;
    /// Reference configuration; selects the assembly mode for inverse
    /// kinematics. Empty vectors mean all zeros.
    ChainState home;

    int joint_count() const { return static_cast<int>(elements.size()); }
    int count(JointKind kind) const;
    /// Element indices of the joints of one kind, in chain order.
    std::vector<int> indices(JointKind kind) const;

    /// Flattens a per-kind state into one coordinate per element.
    Eigen::VectorXd to_coordinates(const ChainState& s) const;
    ChainState from_coordinates(const Eigen::VectorXd& coords) const;
    ChainState home_state() const;

    /// Largest link or tool translation; used to scale pose tolerances.
    double characteristic_length() const;
};

/// Throws ModelError if a chain violates its structural invariants.
void validate(const ChainModel& chain);

struct Units {
    std::string length = "L";
    std::string force = "F";
    std::string angle = "rad";
};

struct ManipulatorModel {
    std::string name;
    TaskDim dim = TaskDim::Point2;
    std::vector<ChainModel> chains;
    Units units;

    int actuator_count() const;
    double characteristic_length() const;

    /// Concatenated actuated coordinates <-> per-chain vectors.
    Eigen::VectorXd flatten_rho(const std::vector<Eigen::VectorXd>& rho) const;
    std::vector<Eigen::VectorXd> split_rho(const Eigen::VectorXd& flat) const;
};

void validate(const ManipulatorModel& model);

Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy);
Eigen::Vector3d matrix_to_rpy(const Eigen::Matrix3d& r);

}  // namespace kinetostat
