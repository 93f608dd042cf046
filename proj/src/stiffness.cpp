#include "kinetostat/stiffness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "chain_errors.hpp"
#include "kinetostat/errors.hpp"
#include "kinetostat/kinematics.hpp"
#include "linalg.hpp"
#include "text.hpp"

namespace kinetostat {

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
    return out;
}

Eigen::MatrixXd cols_of(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
    return out;
}

}  // namespace

ChainStiffness chain_stiffness_detail(const ChainModel& chain, const EquilibriumResult& eq) {
    const RegroupedState& r = eq.state;
    const int d = size_of(chain.dim);
    const ChainJacobians jac = jacobians(chain, r);
    const LoadedHessians hes = loaded_hessians(chain, r, eq.F);

    std::vector<int> moving;
    const std::vector<bool> inert = inert_columns(jac.J_q, jac.J_theta);
    for (int k = 0; k < r.q_size(); ++k)
        if (!inert[static_cast<std::size_t>(k)]) moving.push_back(k);
    const auto nq = static_cast<Eigen::Index>(moving.size());

    const Eigen::MatrixXd& Jt = jac.J_theta;
    const Eigen::MatrixXd Jq = cols_of(jac.J_q, moving);
    const Eigen::MatrixXd Hqq = cols_of(rows_of(hes.qq, moving), moving);
    const Eigen::MatrixXd Hqt = rows_of(hes.q_theta, moving);
    const Eigen::MatrixXd Htq = Hqt.transpose();

    // spring coordinates eliminated through (K - H_theta_theta)^-1
    Eigen::MatrixXd softened = -hes.theta_theta;
    softened.diagonal() += r.K_tilde;
    const double soft_cond = detail::scaled_condition(softened, r.K_tilde.cwiseSqrt().cwiseInverse());
    if (!(soft_cond <= detail::kSingularCondition)) {
        throw SpringSofteningError("K_theta - H_theta_theta is singular under the current load "
                                   "(scaled condition " + detail::short_num(soft_cond) + ")",
                                   soft_cond);
    }
    const Eigen::MatrixXd k_theta =
        softened.fullPivLu().solve(Eigen::MatrixXd::Identity(softened.rows(), softened.cols()));

    Eigen::MatrixXd M(d + nq, d + nq);
    M.topLeftCorner(d, d) = Jt * k_theta * Jt.transpose();
    M.topRightCorner(d, nq) = Jq + Jt * k_theta * Htq;
    M.bottomLeftCorner(nq, d) = Jq.transpose() + Hqt * k_theta * Jt.transpose();
    M.bottomRightCorner(nq, nq) = Hqq + Hqt * k_theta * Htq;

    ChainStiffness out;
    out.condition = detail::scaled_condition(M, detail::block_scaling(M, d));
    if (!(out.condition <= detail::kSingularCondition)) {
        throw SingularityError("stiffness block matrix is singular (scaled condition " +
                                   detail::short_num(out.condition) + ")",
                               out.condition);
    }
    Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(d + nq, d);
    unit.topRows(d).setIdentity();
    const Eigen::MatrixXd K = M.fullPivLu().solve(unit).topRows(d);

    const double scale = K.norm();
    out.asymmetry = scale > 0.0 ? (K - K.transpose()).norm() / scale : 0.0;
    out.K = 0.5 * (K + K.transpose());
    out.rank = numerical_rank(out.K);
    return out;
}

Eigen::MatrixXd chain_stiffness(const ChainModel& chain, const EquilibriumResult& eq) {
    return chain_stiffness_detail(chain, eq).K;
}

StiffnessResult manipulator_stiffness(const ManipulatorModel& model, const PoseVector& t,
                                      const std::vector<Eigen::VectorXd>& rho, const SolverOptions& opts,
                                      std::span<const ChainState> warm_start) {
    StiffnessResult out;
    out.wrench = total_wrench(model, t, rho, opts, warm_start);
    const int d = size_of(model.dim);
    out.K_sigma = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < model.chains.size(); ++i) {
        const ChainStiffness cs =
            detail::tag_chain(i, [&] { return chain_stiffness_detail(model.chains[i], out.wrench.chains[i]); });
        out.K_c.push_back(cs.K);
        out.rank_c.push_back(cs.rank);
        out.K_sigma += cs.K;
        out.condition = std::max(out.condition, cs.condition);
        out.asymmetry = std::max(out.asymmetry, cs.asymmetry);
    }
    out.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.K_sigma, Eigen::EigenvaluesOnly)
                          .eigenvalues();
    out.positive_definite = out.eigenvalues.size() > 0 && out.eigenvalues[0] > 0.0;
    return out;
}

double directional_stiffness(const Eigen::MatrixXd& K, const Eigen::VectorXd& u) {
    if (u.size() != K.rows() || std::abs(u.norm() - 1.0) > 1e-9) {
        throw ModelError("direction must be a unit vector of the task dimension");
    }
    return u.dot(K * u);
}

int numerical_rank(const Eigen::MatrixXd& K, double rel_tol) {
    if (K.size() == 0) return 0;
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(K).singularValues();
    if (!(sv[0] > 0.0)) return 0;
    return static_cast<int>((sv.array() > rel_tol * sv[0]).count());
}

FdCheck stiffness_vs_fd_check(const ManipulatorModel& model, const PoseVector& t,
                              const std::vector<Eigen::VectorXd>& rho, double h, const SolverOptions& opts,
                              std::span<const ChainState> warm_start) {
    if (!(h > 0.0)) throw ModelError("finite-difference step must be positive");
    const StiffnessResult base = manipulator_stiffness(model, t, rho, opts, warm_start);
    const std::vector<ChainState> warm = base.wrench.states(model);
    const int d = size_of(model.dim);

    FdCheck out;
    out.K_analytic = base.K_sigma;
    out.K_fd.resize(d, d);
    for (int j = 0; j < d; ++j) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, j) * h;
        const Eigen::VectorXd Fp = total_wrench(model, pose_offset(t, e), rho, opts, warm).F_sigma;
        const Eigen::VectorXd Fm = total_wrench(model, pose_offset(t, -e), rho, opts, warm).F_sigma;
        out.K_fd.col(j) = (Fp - Fm) / (2.0 * h);
    }
    const double scale = out.K_analytic.cwiseAbs().maxCoeff();
    out.max_relative_deviation = (out.K_analytic - out.K_fd).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
    return out;
}

}  // namespace kinetostat
