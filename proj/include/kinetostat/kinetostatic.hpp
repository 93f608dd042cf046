#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"
#include "kinetostat/equilibrium.hpp"

namespace kinetostat {

struct KinetostaticOptions {
    int max_outer_iterations = 50;
    /// Sensitivity step as a fraction of the characteristic length.
    double h_rho = 1e-5;
    int max_halvings = 8;
    /// Prescribed external wrench; empty means zero.
    Eigen::VectorXd F_ext;
    SolverOptions equilibrium;
};

struct KinetostaticSolution {
    std::vector<Eigen::VectorXd> rho;
    std::vector<Eigen::VectorXd> rho_kinematic;  // Step 1 starting point
    double residual_wrench = 0.0;
    int outer_iterations = 0;
    Eigen::MatrixXd S_F_rho;  // d x n_actuators, empty if never evaluated
    bool rank_deficient = false;
    std::vector<double> residual_history;
    WrenchResult wrench;
};

/// Central-difference estimate of dF_sigma/drho, one column per actuator.
Eigen::MatrixXd sensitivity_matrix(const ManipulatorModel& model, const PoseVector& t,
                                   const std::vector<Eigen::VectorXd>& rho, double h_rho,
                                   const SolverOptions& opts = {},
                                   std::span<const ChainState> warm_start = {});

/// Actuator coordinates for which the platform rests at t under the
/// prescribed external wrench, by Newton iteration on rho with backtracking.
KinetostaticSolution solve_inverse_kinetostatic(const ManipulatorModel& model,
                                                const PoseVector& t, double eps_F,
                                                const KinetostaticOptions& opts = {});

}  // namespace kinetostat
