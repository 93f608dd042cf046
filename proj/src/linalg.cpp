#include "linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace kinetostat::detail {

double scaled_condition(const Eigen::MatrixXd& m, const Eigen::VectorXd& s) {
    if (m.size() == 0) return 1.0;
    if (!m.allFinite()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd scaled = s.asDiagonal() * m * s.asDiagonal();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(scaled).singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return sv[0] / smin;
}

Eigen::VectorXd block_scaling(const Eigen::MatrixXd& m, Eigen::Index d) {
    const Eigen::Index n = m.rows() - d;
    const auto max_abs = [](const auto& block) { return block.size() ? block.cwiseAbs().maxCoeff() : 0.0; };
    const double a_max = max_abs(m.topLeftCorner(d, d));
    const double b_max = max_abs(m.topRightCorner(d, n));
    const double c_max = max_abs(m.bottomRightCorner(n, n));
    const double a = a_max > 0.0 ? 1.0 / std::sqrt(a_max) : 1.0;
    double b = 1.0;
    if (b_max > 0.0) {
        b = 1.0 / (a * b_max);
    } else if (c_max > 0.0) {
        b = 1.0 / std::sqrt(c_max);
    }
    Eigen::VectorXd s(m.rows());
    s.head(d).setConstant(a);
    s.tail(n).setConstant(b);
    return s;
}

}  // namespace kinetostat::detail
