#include "kinetostat/kinetostatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "kinetostat/errors.hpp"
#include "kinetostat/kinematics.hpp"
#include "text.hpp"

namespace kinetostat {

Eigen::MatrixXd sensitivity_matrix(const ManipulatorModel& model, const PoseVector& t,
                                   const std::vector<Eigen::VectorXd>& rho, double h_rho,
                                   const SolverOptions& opts, std::span<const ChainState> warm_start) {
    if (!(h_rho > 0.0)) throw ModelError("sensitivity step must be positive");
    const Eigen::VectorXd flat = model.flatten_rho(rho);
    Eigen::MatrixXd S(size_of(model.dim), flat.size());
    for (Eigen::Index j = 0; j < flat.size(); ++j) {
        Eigen::VectorXd plus = flat, minus = flat;
        plus[j] += h_rho;
        minus[j] -= h_rho;
        const Eigen::VectorXd Fp = total_wrench(model, t, model.split_rho(plus), opts, warm_start).F_sigma;
        const Eigen::VectorXd Fm = total_wrench(model, t, model.split_rho(minus), opts, warm_start).F_sigma;
        S.col(j) = (Fp - Fm) / (plus[j] - minus[j]);
    }
    return S;
}

KinetostaticSolution solve_inverse_kinetostatic(const ManipulatorModel& model, const PoseVector& t,
                                                double eps_F, const KinetostaticOptions& opts) {
    if (!(eps_F > 0.0)) throw ModelError("force tolerance must be positive");
    const int d = size_of(model.dim);
    Eigen::VectorXd F_ext = opts.F_ext.size() == 0 ? Eigen::VectorXd::Zero(d) : opts.F_ext;
    if (F_ext.size() != d) throw ModelError("prescribed wrench has wrong dimension");
    const double h = opts.h_rho * model.characteristic_length();

    KinetostaticSolution sol;
    const std::vector<ChainState> unloaded = inverse_kinematics_unloaded(model, t);
    for (const auto& s : unloaded) sol.rho_kinematic.push_back(s.rho);

    Eigen::VectorXd rho = model.flatten_rho(sol.rho_kinematic);
    WrenchResult w = total_wrench(model, t, sol.rho_kinematic, opts.equilibrium, unloaded);
    double residual = (w.F_sigma - F_ext).norm();
    sol.residual_history.push_back(residual);

    int outer = 0;
    while (!(residual < eps_F)) {
        if (outer >= opts.max_outer_iterations) {
            throw NonConvergenceError("kinetostatic control did not converge in " +
                                          std::to_string(outer) + " iterations, best residual " +
                                          detail::short_num(residual),
                                      residual);
        }
        const std::vector<ChainState> warm = w.states(model);
        const Eigen::MatrixXd S = sensitivity_matrix(model, t, model.split_rho(rho), h, opts.equilibrium, warm);
        sol.S_F_rho = S;

        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues();
        const Eigen::Index rank = sv.size() > 0 && sv[0] > 0.0 ? (sv.array() > 1e-12 * sv[0]).count() : 0;
        sol.rank_deficient = rank < std::min(S.rows(), S.cols());
        if (S.rows() == S.cols() && sol.rank_deficient) {
            const double cond = rank > 0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
            throw ControlSingularityError("sensitivity matrix dF/drho is singular (condition " +
                                              detail::short_num(cond) + ")",
                                          cond);
        }
        const Eigen::VectorXd step = -S.completeOrthogonalDecomposition().solve(w.F_sigma - F_ext);

        bool accepted = false;
        double lambda = 1.0;
        for (int halving = 0; halving <= opts.max_halvings && !accepted; ++halving, lambda *= 0.5) {
            const Eigen::VectorXd trial = rho + lambda * step;
            try {
                WrenchResult wt = total_wrench(model, t, model.split_rho(trial), opts.equilibrium, warm);
                const double rt = (wt.F_sigma - F_ext).norm();
                if (rt < residual) {
                    rho = trial;
                    w = std::move(wt);
                    residual = rt;
                    accepted = true;
                }
            } catch (const NonConvergenceError&) {
                // try a shorter step
            } catch (const SingularityError&) {
            }
        }
        ++outer;
        if (!accepted) {
            throw NonConvergenceError("kinetostatic control stalled: no decrease of |F| after " +
                                          std::to_string(opts.max_halvings) + " step halvings, residual " +
                                          detail::short_num(residual),
                                      residual);
        }
        sol.residual_history.push_back(residual);
    }

    sol.rho = model.split_rho(rho);
    sol.residual_wrench = residual;
    sol.outer_iterations = outer;
    sol.wrench = std::move(w);
    return sol;
}

}  // namespace kinetostat
