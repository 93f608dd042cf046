#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinetostat/chain_model.hpp"
#include "kinetostat/equilibrium.hpp"
#include "kinetostat/kinetostatic.hpp"
#include "kinetostat/spring_law.hpp"

namespace kinetostat {

/// Planar two-leg Orthoglide with compliant actuators and springs in the
/// passive joints next to the actuators.
struct OrthoglideSpec {
    double L = 1.0;
    double K_theta = 1.0;
    SpringLaw spring;         // k == 0 disables the preload
    double p_factor = 0.45;   // workspace half-diagonal, in units of L

    void validate() const;
    double p() const { return p_factor * L; }
};

/// Chain i: actuated slider along axis i, virtual actuator spring on the same
/// axis, preloaded revolute, bar of length L, passive revolute at the point
/// platform. Preloaded angles are zero at Q0 and positive toward Q2.
ManipulatorModel build_planar_orthoglide(const OrthoglideSpec& spec);

struct WorkspacePoints {
    PoseVector q0, q1, q2;
};

WorkspacePoints workspace_points(const OrthoglideSpec& spec);

/// First interior local maximum of force_along, refined by a parabola
/// through the three samples around it.
std::optional<CriticalPoint> critical_force(const ForceDeflectionCurve& curve);

struct ComplianceCell {
    double x = 0.0;
    double y = 0.0;
    bool solvable = false;
    Eigen::MatrixXd K_sigma;
    double c_max = 0.0;  // extreme eigenvalues of K_sigma^-1
    double c_min = 0.0;
    std::string error;
};

/// grid_n x grid_n lattice over [-p, p]^2, row-major with x varying fastest.
struct ComplianceMap {
    int grid_n = 0;
    double half_width = 0.0;
    std::vector<ComplianceCell> cells;

    const ComplianceCell& at(int ix, int iy) const { return cells[iy * grid_n + ix]; }
};

/// Each cell uses the kinetostatically compensated actuator coordinates, so
/// the platform rests unloaded at the cell centre.
ComplianceMap compliance_map(const ManipulatorModel& model, double half_width, int grid_n,
                             int threads = 1, const SolverOptions& opts = {});
ComplianceMap compliance_map(const OrthoglideSpec& spec, int grid_n, int threads = 1,
                             const SolverOptions& opts = {});

/// Sweep used for the critical-force column, in units of L.
inline constexpr double kSweepStep = 0.001;
inline constexpr double kSweepMaxDelta = 0.3;

struct Table1Cell {
    int point = 0;              // 0, 1, 2 for Q0, Q1, Q2
    double k_vartheta = 0.0;    // in units of K_theta L^2
    bool ok = false;
    std::string error;
    double rho = 0.0;           // compensated, chain 1 (both chains agree by symmetry)
    double rho_kinematic = 0.0;
    double stiffness = 0.0;     // directional, in units of K_theta
    int outer_iterations = 0;
    double residual_wrench = 0.0;
    double reference_rho = 0.0;
    double reference_stiffness = 0.0;
};

struct Table1Critical {
    double k_vartheta = 0.0;
    bool ok = false;
    std::string error;
    std::optional<CriticalPoint> critical;  // force in K_theta L, delta in L
    std::optional<double> reference;        // empty: no buckling expected
    bool truncated = false;
};

struct Table1Report {
    double p_factor = 0.45;
    std::array<double, 4> k_values{0.0, 0.01, 0.05, 0.1};
    std::array<std::array<Table1Cell, 4>, 3> cells{};  // [point][k]
    std::array<Table1Critical, 4> critical{};
};

/// Stiffness and compensated actuator coordinates at Q0, Q1, Q2 for the four
/// linear preload levels, plus critical forces toward Q2. spec_base supplies
/// L, K_theta and p_factor; its spring is replaced by each linear preload.
Table1Report reproduce_table1(const OrthoglideSpec& spec_base, int threads = 1,
                              const SolverOptions& opts = {});

std::string format_table1(const Table1Report& report);

}  // namespace kinetostat
