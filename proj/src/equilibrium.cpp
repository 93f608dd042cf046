#include "kinetostat/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "chain_errors.hpp"
#include "kinetostat/errors.hpp"
#include "kinetostat/kinematics.hpp"
#include "linalg.hpp"
#include "text.hpp"

namespace kinetostat {

namespace {

enum class Outcome { Converged, Singular, Stalled };

struct Attempt {
    Outcome outcome = Outcome::Stalled;
    Eigen::VectorXd coords;       // final iterate on success, best iterate otherwise
    Eigen::VectorXd F;
    double residual = std::numeric_limits<double>::infinity();
    double condition = 0.0;
    int iterations = 0;
};

constexpr double kStepTol = 1e-10;
constexpr int kChatterLimit = 5;
constexpr double kChatterDamping = 0.5;

Attempt iterate(const ChainModel& chain, const PoseVector& t, Eigen::VectorXd c,
                const SolverOptions& opts, double tol) {
    const int d = size_of(chain.dim);
    Attempt best;
    best.coords = c;
    best.F = Eigen::VectorXd::Zero(d);
    best.residual = pose_difference(t, forward_kinematics(chain, c)).norm();

    Eigen::VectorXd F_prev = Eigen::VectorXd::Zero(d);
    std::vector<bool> prev_mask;
    int mask_changes = 0;
    int since_improvement = 0;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        const RegroupedState r = partition(chain, c);
        if (it > 1 && r.active_mask != prev_mask) {
            ++mask_changes;
        } else {
            mask_changes = 0;
        }
        prev_mask = r.active_mask;
        const double damping = mask_changes > kChatterLimit ? kChatterDamping : 1.0;

        const ChainJacobians jac = jacobians(chain, r);
        const std::vector<bool> inert = inert_columns(jac.J_q, jac.J_theta);
        std::vector<int> moving;
        for (int k = 0; k < r.q_size(); ++k)
            if (!inert[static_cast<std::size_t>(k)]) moving.push_back(k);
        const int nq = static_cast<int>(moving.size());

        Eigen::MatrixXd Jq(d, nq);
        for (int k = 0; k < nq; ++k) Jq.col(k) = jac.J_q.col(moving[static_cast<std::size_t>(k)]);
        const Eigen::VectorXd compliance = r.K_tilde.cwiseInverse();

        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d + nq, d + nq);
        M.topLeftCorner(d, d) = jac.J_theta * compliance.asDiagonal() * jac.J_theta.transpose();
        M.topRightCorner(d, nq) = Jq;
        M.bottomLeftCorner(nq, d) = Jq.transpose();

        best.condition = detail::scaled_condition(M, detail::block_scaling(M, d));
        if (!(best.condition <= detail::kSingularCondition)) {
            best.outcome = Outcome::Singular;
            best.iterations = it;
            return best;
        }

        // Linearization of g(q, theta) = t about the current iterate with
        // theta expressed through F; unknowns are F and the passive increment.
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + nq);
        rhs.head(d) = pose_difference(t, forward_kinematics(chain, c)) +
                      jac.J_theta * (r.theta_tilde - r.theta_tilde_0);
        const Eigen::VectorXd sol = M.fullPivLu().solve(rhs);
        const Eigen::VectorXd F = sol.head(d);
        const Eigen::VectorXd dq = sol.tail(nq);
        const Eigen::VectorXd theta_new =
            compliance.cwiseProduct(jac.J_theta.transpose() * F) + r.theta_tilde_0;

        Eigen::VectorXd c_new = c;
        for (int k = 0; k < nq; ++k) c_new[r.q_joints[moving[static_cast<std::size_t>(k)]]] += damping * dq[k];
        for (int k = 0; k < r.theta_size(); ++k) {
            const int j = r.theta_joints[static_cast<std::size_t>(k)];
            c_new[j] += damping * (theta_new[k] - c[j]);
        }

        const double residual = pose_difference(t, forward_kinematics(chain, c_new)).norm();
        if (!std::isfinite(residual) || !c_new.allFinite()) {
            best.outcome = Outcome::Stalled;
            best.iterations = it;
            return best;
        }

        Eigen::VectorXd q_now(nq);
        for (int k = 0; k < nq; ++k) q_now[k] = c_new[r.q_joints[moving[static_cast<std::size_t>(k)]]];
        const double change = std::sqrt((F - F_prev).squaredNorm() + (damping * dq).squaredNorm());
        const double size = std::sqrt(F.squaredNorm() + q_now.squaredNorm());
        const double step = change / std::max(1.0, size);

        c = c_new;
        F_prev = F;
        if (residual < 0.5 * best.residual) {
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        if (residual <= best.residual) {
            best.residual = residual;
            best.coords = c;
            best.F = F;
        }
        if (residual <= tol && step <= kStepTol) {
            best.outcome = Outcome::Converged;
            best.coords = c;
            best.F = F;
            best.residual = residual;
            best.iterations = it;
            return best;
        }
        if (since_improvement >= 8 && best.residual > tol) break;
    }
    best.outcome = Outcome::Stalled;
    best.iterations = opts.max_iterations;
    return best;
}

Eigen::VectorXd perturb(const ChainModel& chain, const Eigen::VectorXd& c, double scale,
                        std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd out = c;
    for (int i = 0; i < chain.joint_count(); ++i) {
        if (chain.elements[i].joint.kind == JointKind::Actuated) continue;
        out[i] += unit(rng) * scale * std::max(1.0, std::abs(c[i]));
    }
    return out;
}

EquilibriumResult solve_from(const ChainModel& chain, const PoseVector& t, Eigen::VectorXd start,
                             const SolverOptions& opts) {
    if (t.dim != chain.dim) throw ModelError("pose dimension does not match the chain");
    const double tol = opts.pose_tol * chain.characteristic_length();
    std::mt19937_64 rng(opts.rng_seed);

    double best_residual = std::numeric_limits<double>::infinity();
    double worst_condition = 0.0;
    bool best_singular = false;
    bool any_singular = false;
    Eigen::VectorXd origin = start;

    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        const Eigen::VectorXd c0 =
            attempt == 0 ? origin : perturb(chain, origin, opts.perturbation_scale, rng);
        Attempt a = iterate(chain, t, c0, opts, tol);
        if (a.outcome == Outcome::Converged) {
            EquilibriumResult res;
            res.F = a.F;
            res.state = partition(chain, a.coords);
            res.residual = a.residual;
            res.iterations = a.iterations;
            res.restarts = attempt;
            res.condition = a.condition;
            return res;
        }
        if (a.outcome == Outcome::Singular) {
            any_singular = true;
            worst_condition = std::max(worst_condition, a.condition);
        }
        if (a.residual < best_residual) {
            best_residual = a.residual;
            origin = a.coords;
            best_singular = a.outcome == Outcome::Singular;
        }
    }
    // Either the closest approach to t ended on a singular matrix, or t was
    // reached but the iteration could not settle next to a singular one: the
    // pose itself is singular and perturbed restarts only drift around it.
    if (best_singular || (any_singular && best_residual <= tol)) {
        throw SingularityError("block matrix singular (scaled condition " +
                                   detail::short_num(worst_condition) + "); the prescribed pose is "
                                   "kinematically singular for this chain",
                               worst_condition);
    }
    throw NonConvergenceError("equilibrium did not converge after " + std::to_string(opts.max_restarts) +
                                  " restarts, best residual " + detail::short_num(best_residual),
                              best_residual);
}

void check_rho(const ChainModel& chain, const Eigen::VectorXd& rho) {
    if (rho.size() != chain.count(JointKind::Actuated)) {
        throw ModelError("chain '" + chain.name + "': expected " +
                         std::to_string(chain.count(JointKind::Actuated)) + " actuated coordinates, got " +
                         std::to_string(rho.size()));
    }
}

}  // namespace

EquilibriumResult solve_chain_equilibrium(const ChainModel& chain, const PoseVector& t,
                                          const Eigen::VectorXd& rho, const SolverOptions& opts) {
    check_rho(chain, rho);
    ChainState start;
    try {
        start = inverse_kinematics_chain(chain, t);
    } catch (const OutOfWorkspaceError&) {
        // springs may still stretch far enough; start from the reference pose
        start = chain.home_state();
        start.theta.setZero();
    }
    start.rho = rho;
    return solve_from(chain, t, chain.to_coordinates(start), opts);
}

EquilibriumResult solve_chain_equilibrium(const ChainModel& chain, const PoseVector& t,
                                          const Eigen::VectorXd& rho, const ChainState& start,
                                          const SolverOptions& opts) {
    check_rho(chain, rho);
    ChainState s = start;
    s.rho = rho;
    return solve_from(chain, t, chain.to_coordinates(s), opts);
}

std::vector<ChainState> WrenchResult::states(const ManipulatorModel& model) const {
    std::vector<ChainState> out;
    out.reserve(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i)
        out.push_back(model.chains[i].from_coordinates(chains[i].state.coords));
    return out;
}

WrenchResult total_wrench(const ManipulatorModel& model, const PoseVector& t,
                          const std::vector<Eigen::VectorXd>& rho, const SolverOptions& opts,
                          std::span<const ChainState> warm_start) {
    if (rho.size() != model.chains.size()) throw ModelError("need actuated coordinates for every chain");
    if (!warm_start.empty() && warm_start.size() != model.chains.size()) {
        throw ModelError("warm start must cover every chain");
    }
    WrenchResult out;
    out.F_sigma = Eigen::VectorXd::Zero(size_of(model.dim));
    for (std::size_t i = 0; i < model.chains.size(); ++i) {
        EquilibriumResult eq = detail::tag_chain(i, [&] {
            return warm_start.empty()
                       ? solve_chain_equilibrium(model.chains[i], t, rho[i], opts)
                       : solve_chain_equilibrium(model.chains[i], t, rho[i], warm_start[i], opts);
        });
        out.F_sigma += eq.F;
        out.chains.push_back(std::move(eq));
    }
    return out;
}

ForceDeflectionCurve force_deflection(const ManipulatorModel& model, const PoseVector& start,
                                      const Eigen::VectorXd& direction, double max_delta, double step,
                                      const std::vector<Eigen::VectorXd>& rho, const SolverOptions& opts,
                                      std::span<const ChainState> warm_start) {
    if (direction.size() != size_of(model.dim) || !(direction.norm() > 0.0)) {
        throw ModelError("sweep direction must be a non-zero vector of the task dimension");
    }
    if (!(step > 0.0) || !(max_delta >= 0.0)) throw ModelError("sweep step must be positive");

    ForceDeflectionCurve curve;
    curve.direction = direction.normalized();
    const int n = static_cast<int>(std::floor(max_delta / step + 1e-9));

    std::vector<ChainState> warm(warm_start.begin(), warm_start.end());
    for (int k = 0; k <= n; ++k) {
        const double delta = k * step;
        const PoseVector t = pose_offset(start, curve.direction * delta);
        try {
            const WrenchResult w = total_wrench(model, t, rho, opts, warm);
            warm = w.states(model);
            curve.samples.push_back({delta, w.F_sigma.norm(), w.F_sigma.dot(curve.direction)});
        } catch (const Error& e) {
            curve.truncated = true;
            curve.truncation_reason = e.what();
            break;
        }
    }
    return curve;
}

}  // namespace kinetostat
