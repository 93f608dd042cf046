#include "kinetostat/pose.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kinetostat/errors.hpp"

namespace kinetostat {

TaskDim task_dim_from_int(int d) {
    switch (d) {
        case 2: return TaskDim::Point2;
        case 3: return TaskDim::Planar3;
        case 6: return TaskDim::Spatial6;
        default: throw ModelError("task dimension must be 2, 3 or 6, got " + std::to_string(d));
    }
}

double wrap_angle(double a) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(a, 2.0 * pi);  // [-pi, pi]
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

PoseVector::PoseVector(TaskDim d, Eigen::VectorXd v) : dim(d), values(std::move(v)) {
    if (values.size() != size_of(dim)) {
        throw ModelError("pose has " + std::to_string(values.size()) + " components, expected " +
                         std::to_string(size_of(dim)));
    }
    for (int i = orientation_offset(); i < values.size(); ++i) values[i] = wrap_angle(values[i]);
}

int PoseVector::orientation_offset() const {
    switch (dim) {
        case TaskDim::Point2: return 2;
        case TaskDim::Planar3: return 2;
        case TaskDim::Spatial6: return 3;
    }
    return size();
}

Eigen::VectorXd PoseVector::position() const { return values.head(orientation_offset()); }

Eigen::VectorXd PoseVector::orientation() const {
    return values.tail(size() - orientation_offset());
}

Eigen::VectorXd pose_difference(const PoseVector& a, const PoseVector& b) {
    if (a.dim != b.dim) throw ModelError("pose dimension mismatch");
    Eigen::VectorXd d = a.values - b.values;
    for (int i = a.orientation_offset(); i < d.size(); ++i) d[i] = wrap_angle(d[i]);
    return d;
}

PoseVector pose_offset(const PoseVector& p, const Eigen::VectorXd& delta) {
    return PoseVector(p.dim, p.values + delta);
}

}  // namespace kinetostat
