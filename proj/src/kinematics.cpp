#include "kinetostat/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kinetostat/errors.hpp"
#include "text.hpp"

namespace kinetostat {

namespace {

struct JointFrame {
    Eigen::Vector3d origin;
    Eigen::Vector3d axis;  // world frame
};

/// Walks the chain, returning the end transform and optionally every joint frame.
Eigen::Isometry3d walk(const ChainModel& chain, const Eigen::VectorXd& coords,
                       std::vector<JointFrame>* frames) {
    if (coords.size() != chain.joint_count()) {
        throw ModelError("chain '" + chain.name + "': expected " + std::to_string(chain.joint_count()) +
                         " coordinates, got " + std::to_string(coords.size()));
    }
    Eigen::Isometry3d T = chain.base.transform();
    if (frames) frames->resize(chain.elements.size());
    for (int i = 0; i < chain.joint_count(); ++i) {
        const auto& e = chain.elements[i];
        T = T * e.link.transform();
        if (frames) (*frames)[i] = {T.translation(), T.linear() * e.joint.axis};
        if (e.joint.motion == JointMotion::Rotational) {
            T.rotate(Eigen::AngleAxisd(coords[i], e.joint.axis));
        } else {
            T.translate(coords[i] * e.joint.axis);
        }
    }
    return T * chain.tool.transform();
}

PoseVector pose_of(TaskDim dim, const Eigen::Isometry3d& T) {
    const Eigen::Vector3d p = T.translation();
    const Eigen::Matrix3d& R = T.linear();
    Eigen::VectorXd v(size_of(dim));
    switch (dim) {
        case TaskDim::Point2: v << p.x(), p.y(); break;
        case TaskDim::Planar3: v << p.x(), p.y(), std::atan2(R(1, 0), R(0, 0)); break;
        case TaskDim::Spatial6: v << p, matrix_to_rpy(R); break;
    }
    return PoseVector(dim, std::move(v));
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
    return out;
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    return out;
}

}  // namespace

PoseVector forward_kinematics(const ChainModel& chain, const Eigen::VectorXd& coords) {
    return pose_of(chain.dim, walk(chain, coords, nullptr));
}

PoseVector forward_kinematics(const ChainModel& chain, const ChainState& state) {
    return forward_kinematics(chain, chain.to_coordinates(state));
}

Eigen::MatrixXd joint_jacobian(const ChainModel& chain, const Eigen::VectorXd& coords) {
    std::vector<JointFrame> frames;
    const Eigen::Isometry3d T = walk(chain, coords, &frames);
    const Eigen::Vector3d pe = T.translation();
    const int n = chain.joint_count();

    Eigen::Matrix<double, 6, Eigen::Dynamic> geo(6, n);
    for (int i = 0; i < n; ++i) {
        const auto& f = frames[i];
        if (chain.elements[i].joint.motion == JointMotion::Rotational) {
            geo.col(i) << f.axis.cross(pe - f.origin), f.axis;
        } else {
            geo.col(i) << f.axis, Eigen::Vector3d::Zero();
        }
    }

    Eigen::MatrixXd J(size_of(chain.dim), n);
    switch (chain.dim) {
        case TaskDim::Point2: J = geo.topRows(2); break;
        case TaskDim::Planar3:
            J.topRows(2) = geo.topRows(2);
            J.row(2) = geo.row(5);
            break;
        case TaskDim::Spatial6: {
            // angular velocity = E * rpy rates
            const Eigen::Vector3d rpy = matrix_to_rpy(T.linear());
            const Eigen::Matrix3d Rz = Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()).toRotationMatrix();
            const Eigen::Matrix3d Ry = Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()).toRotationMatrix();
            Eigen::Matrix3d E;
            E.col(0) = Rz * Ry * Eigen::Vector3d::UnitX();
            E.col(1) = Rz * Eigen::Vector3d::UnitY();
            E.col(2) = Eigen::Vector3d::UnitZ();
            J.topRows(3) = geo.topRows(3);
            J.bottomRows(3) = E.partialPivLu().solve(geo.bottomRows(3));
            break;
        }
    }
    return J;
}

ChainJacobians jacobians(const ChainModel& chain, const RegroupedState& r) {
    const Eigen::MatrixXd J = joint_jacobian(chain, r.coords);
    return {select_cols(J, r.theta_joints), select_cols(J, r.q_joints)};
}

LoadedHessians loaded_hessians(const ChainModel& chain, const RegroupedState& r,
                               const Eigen::VectorXd& F) {
    if (F.size() != size_of(chain.dim)) throw ModelError("wrench has wrong dimension");
    std::vector<int> vars = r.q_joints;
    vars.insert(vars.end(), r.theta_joints.begin(), r.theta_joints.end());
    const auto n = static_cast<Eigen::Index>(vars.size());
    const Eigen::Index nq = r.q_size();

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    if (F.squaredNorm() > 0.0) {
        auto gradient = [&](const Eigen::VectorXd& c) {
            return select(joint_jacobian(chain, c).transpose() * F, vars);
        };
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c0 = r.coords[vars[j]];
            const double h = 1e-6 * std::max(1.0, std::abs(c0));
            Eigen::VectorXd cp = r.coords, cm = r.coords;
            cp[vars[j]] = c0 + h;
            cm[vars[j]] = c0 - h;
            H.col(j) = (gradient(cp) - gradient(cm)) / (cp[vars[j]] - cm[vars[j]]);
        }
        H = 0.5 * (H + H.transpose()).eval();
    }
    const Eigen::Index nt = n - nq;
    return {H.topLeftCorner(nq, nq), H.bottomRightCorner(nt, nt), H.topRightCorner(nq, nt)};
}

std::vector<bool> inert_columns(const Eigen::MatrixXd& J_q, const Eigen::MatrixXd& J_theta) {
    double scale = 0.0;
    for (Eigen::Index k = 0; k < J_q.cols(); ++k) scale = std::max(scale, J_q.col(k).norm());
    for (Eigen::Index k = 0; k < J_theta.cols(); ++k) scale = std::max(scale, J_theta.col(k).norm());
    std::vector<bool> inert(static_cast<std::size_t>(J_q.cols()));
    for (Eigen::Index k = 0; k < J_q.cols(); ++k)
        inert[static_cast<std::size_t>(k)] = J_q.col(k).norm() <= 1e-12 * scale;
    return inert;
}

ChainState inverse_kinematics_chain(const ChainModel& chain, const PoseVector& t) {
    if (t.dim != chain.dim) throw ModelError("pose dimension does not match the chain");
    const double L = chain.characteristic_length();

    std::vector<int> free;
    for (int i = 0; i < chain.joint_count(); ++i)
        if (chain.elements[i].joint.kind != JointKind::VirtualElastic) free.push_back(i);

    ChainState home = chain.home_state();
    home.theta.setZero();
    Eigen::VectorXd c = chain.to_coordinates(home);

    // Levenberg-Marquardt toward one target; returns the final pose error.
    auto correct = [&](const PoseVector& target, double tol, int max_iter) {
        Eigen::VectorXd r = pose_difference(target, forward_kinematics(chain, c));
        double cost = r.norm();
        double mu = 1e-12;
        for (int it = 0; it < max_iter && cost > tol; ++it) {
            const Eigen::MatrixXd J = select_cols(joint_jacobian(chain, c), free);
            const Eigen::MatrixXd A = J.transpose() * J;
            const Eigen::VectorXd g = J.transpose() * r;
            const double scale = std::max(A.diagonal().maxCoeff(), 1e-300);
            bool accepted = false;
            while (mu < 1e12) {
                Eigen::MatrixXd damped = A;
                damped.diagonal().array() += mu * scale;
                const Eigen::VectorXd step = damped.ldlt().solve(g);
                Eigen::VectorXd trial = c;
                for (std::size_t k = 0; k < free.size(); ++k) trial[free[k]] += step[static_cast<Eigen::Index>(k)];
                const Eigen::VectorXd r_trial = pose_difference(target, forward_kinematics(chain, trial));
                if (r_trial.allFinite() && r_trial.norm() < cost) {
                    c = trial;
                    r = r_trial;
                    cost = r.norm();
                    mu = std::max(mu * 0.1, 1e-15);
                    accepted = true;
                    break;
                }
                mu *= 10.0;
            }
            if (!accepted) break;
        }
        return cost;
    };

    const PoseVector start = forward_kinematics(chain, c);
    const Eigen::VectorXd gap = pose_difference(t, start);
    const int steps = std::clamp(static_cast<int>(std::ceil(gap.norm() / (0.05 * L))), 1, 400);
    for (int s = 1; s < steps; ++s) {
        correct(pose_offset(start, gap * (static_cast<double>(s) / steps)), 1e-8 * L, 50);
    }
    double err = correct(t, 1e-14 * L, 200);
    if (err > 1e-10 * L) {
        throw OutOfWorkspaceError("chain '" + chain.name + "': pose unreachable, closest distance " +
                                      detail::short_num(err),
                                  err);
    }
    return chain.from_coordinates(c);
}

std::vector<ChainState> inverse_kinematics_unloaded(const ManipulatorModel& model, const PoseVector& t) {
    if (t.dim != model.dim) throw ModelError("pose dimension does not match the manipulator");
    std::vector<ChainState> out;
    out.reserve(model.chains.size());
    for (std::size_t i = 0; i < model.chains.size(); ++i) {
        try {
            out.push_back(inverse_kinematics_chain(model.chains[i], t));
        } catch (const OutOfWorkspaceError& e) {
            throw OutOfWorkspaceError("chain " + std::to_string(i) + ": " + e.what(), e.closest_distance());
        }
    }
    return out;
}

}  // namespace kinetostat
