#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"
#include "kinetostat/equilibrium.hpp"

namespace kinetostat {

struct ChainStiffness {
    Eigen::MatrixXd K;        // symmetrized
    double asymmetry = 0.0;   // |K - K^T| / |K| before symmetrization
    double condition = 0.0;   // scaled condition number of the block matrix
    int rank = 0;
};

/// Cartesian stiffness of one chain at a converged loaded equilibrium.
ChainStiffness chain_stiffness_detail(const ChainModel& chain, const EquilibriumResult& eq);
Eigen::MatrixXd chain_stiffness(const ChainModel& chain, const EquilibriumResult& eq);

struct StiffnessResult {
    std::vector<Eigen::MatrixXd> K_c;
    Eigen::MatrixXd K_sigma;
    std::vector<int> rank_c;
    double condition = 0.0;  // worst chain block-matrix condition
    double asymmetry = 0.0;  // worst chain asymmetry
    Eigen::VectorXd eigenvalues;  // of K_sigma, ascending
    bool positive_definite = false;
    WrenchResult wrench;
};

StiffnessResult manipulator_stiffness(const ManipulatorModel& model, const PoseVector& t,
                                      const std::vector<Eigen::VectorXd>& rho,
                                      const SolverOptions& opts = {},
                                      std::span<const ChainState> warm_start = {});

/// u^T K u for a unit vector u.
double directional_stiffness(const Eigen::MatrixXd& K, const Eigen::VectorXd& u);

/// Number of singular values above rel_tol times the largest one.
int numerical_rank(const Eigen::MatrixXd& K, double rel_tol = 1e-9);

struct FdCheck {
    double max_relative_deviation = 0.0;  // max |K - K_fd| / max |K|
    Eigen::MatrixXd K_analytic;
    Eigen::MatrixXd K_fd;
};

/// Compares K_sigma with central differences of the total wrench map.
FdCheck stiffness_vs_fd_check(const ManipulatorModel& model, const PoseVector& t,
                              const std::vector<Eigen::VectorXd>& rho, double h,
                              const SolverOptions& opts = {},
                              std::span<const ChainState> warm_start = {});

}  // namespace kinetostat
