#pragma once

#include <Eigen/Core>

namespace kinetostat {

/// Task-space dimension of the end platform.
///   Point2   (x, y)                      planar point platform
///   Planar3  (x, y, phi_z)               planar rigid platform
///   Spatial6 (x, y, z, roll, pitch, yaw) R = Rz(yaw) Ry(pitch) Rx(roll)
enum class TaskDim { Point2 = 2, Planar3 = 3, Spatial6 = 6 };

inline int size_of(TaskDim d) { return static_cast<int>(d); }
TaskDim task_dim_from_int(int d);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct PoseVector {
    TaskDim dim = TaskDim::Point2;
    Eigen::VectorXd values;

    PoseVector() = default;
    PoseVector(TaskDim d, Eigen::VectorXd v);

    int size() const { return size_of(dim); }
    Eigen::VectorXd position() const;
    Eigen::VectorXd orientation() const;
    /// Index of the first orientation parameter inside values.
    int orientation_offset() const;
};

/// a - b with orientation components wrapped to (-pi, pi].
Eigen::VectorXd pose_difference(const PoseVector& a, const PoseVector& b);

/// p + delta with orientation components re-wrapped.
PoseVector pose_offset(const PoseVector& p, const Eigen::VectorXd& delta);

}  // namespace kinetostat
