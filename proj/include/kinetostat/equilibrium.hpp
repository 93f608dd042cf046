#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"
#include "kinetostat/pose.hpp"
#include "kinetostat/regroup.hpp"

namespace kinetostat {

struct SolverOptions {
    /// Pose tolerance as a fraction of the chain's characteristic length.
    double pose_tol = 1e-9;
    int max_iterations = 50;
    int max_restarts = 10;
    double perturbation_scale = 1e-4;
    std::uint64_t rng_seed = 0;
};

struct EquilibriumResult {
    Eigen::VectorXd F;       // wrench the chain exerts against the platform load
    RegroupedState state;    // converged coordinates and final partition
    double residual = 0.0;   // |t - g|
    int iterations = 0;      // iterations of the successful attempt
    int restarts = 0;
    double condition = 0.0;  // scaled condition number of the last block matrix

    const Eigen::VectorXd& q_tilde() const { return state.q_tilde; }
    const Eigen::VectorXd& theta_tilde() const { return state.theta_tilde; }
    const std::vector<bool>& active_mask() const { return state.active_mask; }
};

/// Loaded equilibrium of one chain whose end is held at t with actuators at
/// rho. Cold start from the unloaded inverse kinematics of the chain.
EquilibriumResult solve_chain_equilibrium(const ChainModel& chain, const PoseVector& t,
                                          const Eigen::VectorXd& rho,
                                          const SolverOptions& opts = {});

/// Same, warm-started from a previous configuration (rho is overridden).
EquilibriumResult solve_chain_equilibrium(const ChainModel& chain, const PoseVector& t,
                                          const Eigen::VectorXd& rho, const ChainState& start,
                                          const SolverOptions& opts = {});

struct WrenchResult {
    Eigen::VectorXd F_sigma;
    std::vector<EquilibriumResult> chains;

    std::vector<ChainState> states(const ManipulatorModel& model) const;
};

/// Sum of the per-chain wrenches needed to hold the platform at t. Errors
/// from a chain are rethrown with the chain index in the message. An empty
/// warm_start means cold starts.
WrenchResult total_wrench(const ManipulatorModel& model, const PoseVector& t,
                          const std::vector<Eigen::VectorXd>& rho, const SolverOptions& opts = {},
                          std::span<const ChainState> warm_start = {});

struct ForceDeflectionSample {
    double delta = 0.0;
    double force_magnitude = 0.0;
    double force_along = 0.0;  // signed component along the sweep direction
};

struct CriticalPoint {
    double delta = 0.0;
    double force = 0.0;
};

struct ForceDeflectionCurve {
    std::vector<ForceDeflectionSample> samples;
    Eigen::VectorXd direction;
    bool truncated = false;
    std::string truncation_reason;
    std::optional<CriticalPoint> critical;
};

/// Displaces the platform from start along direction in increments of step,
/// warm-starting every solve from the previous sample. The first failed
/// sample truncates the curve. The critical point is left for the caller.
ForceDeflectionCurve force_deflection(const ManipulatorModel& model, const PoseVector& start,
                                      const Eigen::VectorXd& direction, double max_delta,
                                      double step, const std::vector<Eigen::VectorXd>& rho,
                                      const SolverOptions& opts = {},
                                      std::span<const ChainState> warm_start = {});

}  // namespace kinetostat
