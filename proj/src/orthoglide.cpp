#include "kinetostat/orthoglide.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "kinetostat/errors.hpp"
#include "kinetostat/parallel.hpp"
#include "kinetostat/stiffness.hpp"

namespace kinetostat {

namespace {

// Reference values for the planar Orthoglide in normalized units
// (L = 1, K_theta = 1), indexed [point][preload level].
constexpr double kReferenceRho[3][4] = {
    {1.0, 1.0, 1.0, 1.0},
    {0.437, 0.433, 0.419, 0.402},
    {1.345, 1.356, 1.399, 1.453},
};
constexpr double kReferenceStiffness[3][4] = {
    {1.0, 1.01, 1.05, 1.10},
    {2.276, 2.286, 2.329, 2.382},
    {0.24, 0.27, 0.39, 0.55},
};
constexpr double kReferenceCritical[4] = {0.020, 0.027, -1.0, -1.0};  // < 0: none

ChainModel orthoglide_chain(const OrthoglideSpec& spec, int index) {
    const double heading = index == 0 ? 0.0 : std::numbers::pi / 2;
    // chain 0 turns clockwise toward Q2, chain 1 counter-clockwise
    const double sense = index == 0 ? -1.0 : 1.0;

    ChainModel c;
    c.name = index == 0 ? "leg-x" : "leg-y";
    c.dim = TaskDim::Point2;

    ChainElement slider;
    slider.link.rpy = {0.0, 0.0, heading};
    slider.joint.kind = JointKind::Actuated;
    slider.joint.motion = JointMotion::Translational;
    slider.joint.axis = Eigen::Vector3d::UnitX();

    ChainElement drive;
    drive.joint.kind = JointKind::VirtualElastic;
    drive.joint.motion = JointMotion::Translational;
    drive.joint.axis = Eigen::Vector3d::UnitX();
    drive.joint.stiffness = spec.K_theta;

    ChainElement hinge;
    hinge.link.rpy = {0.0, 0.0, std::numbers::pi};  // bar points back along the slider axis
    hinge.joint.kind = JointKind::PreloadedPassive;
    hinge.joint.motion = JointMotion::Rotational;
    hinge.joint.axis = Eigen::Vector3d(0.0, 0.0, sense);
    hinge.joint.spring = spec.spring;

    ChainElement platform;
    platform.link.translation = {spec.L, 0.0, 0.0};
    platform.joint.kind = JointKind::PerfectPassive;
    platform.joint.motion = JointMotion::Rotational;
    platform.joint.axis = Eigen::Vector3d::UnitZ();

    c.elements = {slider, drive, hinge, platform};
    c.home.rho = Eigen::VectorXd::Constant(1, spec.L);
    c.home.q = Eigen::VectorXd::Zero(1);
    c.home.vartheta = Eigen::VectorXd::Zero(1);
    c.home.theta = Eigen::VectorXd::Zero(1);
    return c;
}

PoseVector point(double x, double y) { return PoseVector(TaskDim::Point2, Eigen::Vector2d(x, y)); }

double characteristic_force(const ManipulatorModel& model) {
    double k = 0.0;
    for (const auto& c : model.chains)
        for (const auto& e : c.elements)
            if (e.joint.stiffness) k = std::max(k, *e.joint.stiffness);
    return (k > 0.0 ? k : 1.0) * model.characteristic_length();
}

}  // namespace

void OrthoglideSpec::validate() const {
    if (!(L > 0.0)) throw ModelError("leg length must be positive");
    if (!(K_theta > 0.0)) throw ModelError("actuator stiffness must be positive");
    if (!(spring.k >= 0.0)) throw ModelError("preload stiffness must be non-negative");
    if (!(p_factor > 0.0 && p_factor < 1.0 / std::numbers::sqrt2)) {
        throw ModelError("p_factor must lie in (0, 1/sqrt(2))");
    }
}

ManipulatorModel build_planar_orthoglide(const OrthoglideSpec& spec) {
    spec.validate();
    ManipulatorModel m;
    m.name = "orthoglide-planar";
    m.dim = TaskDim::Point2;
    m.units = {"L", "K_theta*L", "rad"};
    m.chains = {orthoglide_chain(spec, 0), orthoglide_chain(spec, 1)};
    return m;
}

WorkspacePoints workspace_points(const OrthoglideSpec& spec) {
    const double p = spec.p();
    return {point(0.0, 0.0), point(-p, -p), point(p, p)};
}

std::optional<CriticalPoint> critical_force(const ForceDeflectionCurve& curve) {
    const auto& s = curve.samples;
    if (s.size() < 3) return std::nullopt;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const double rise = s[k].force_along - s[k - 1].force_along;
        const double fall = s[k + 1].force_along - s[k].force_along;
        if (!(rise > 0.0 && fall < 0.0)) continue;

        // vertex of the parabola through the three samples
        const double x0 = s[k - 1].delta, x1 = s[k].delta, x2 = s[k + 1].delta;
        const double y0 = s[k - 1].force_along, y1 = s[k].force_along, y2 = s[k + 1].force_along;
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        const double b = d01 - a * (x0 + x1);
        const double c = y0 - x0 * (a * x0 + b);
        const double xv = -b / (2.0 * a);
        return CriticalPoint{xv, c + xv * (b + a * xv)};
    }
    return std::nullopt;
}

ComplianceMap compliance_map(const ManipulatorModel& model, double half_width, int grid_n, int threads,
                             const SolverOptions& opts) {
    if (grid_n < 2) throw ModelError("grid needs at least 2 points per side");
    if (model.dim != TaskDim::Point2) throw ModelError("compliance maps need a planar point platform");
    ComplianceMap map;
    map.grid_n = grid_n;
    map.half_width = half_width;
    map.cells.resize(static_cast<std::size_t>(grid_n * grid_n));

    KinetostaticOptions kopts;
    kopts.equilibrium = opts;
    const double eps_F = 1e-10 * characteristic_force(model);

    parallel_for(map.cells.size(), threads, [&](std::size_t i) {
        const int ix = static_cast<int>(i) % grid_n;
        const int iy = static_cast<int>(i) / grid_n;
        ComplianceCell& cell = map.cells[i];
        cell.x = -half_width + 2.0 * half_width * ix / (grid_n - 1);
        cell.y = -half_width + 2.0 * half_width * iy / (grid_n - 1);
        try {
            const PoseVector t = point(cell.x, cell.y);
            const KinetostaticSolution ks = solve_inverse_kinetostatic(model, t, eps_F, kopts);
            const StiffnessResult st =
                manipulator_stiffness(model, t, ks.rho, opts, ks.wrench.states(model));
            cell.K_sigma = st.K_sigma;
            if (!st.positive_definite) {
                cell.error = "stiffness matrix not positive definite";
                return;
            }
            cell.c_max = 1.0 / st.eigenvalues[0];
            cell.c_min = 1.0 / st.eigenvalues[st.eigenvalues.size() - 1];
            cell.solvable = true;
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });
    return map;
}

ComplianceMap compliance_map(const OrthoglideSpec& spec, int grid_n, int threads, const SolverOptions& opts) {
    return compliance_map(build_planar_orthoglide(spec), spec.p(), grid_n, threads, opts);
}

Table1Report reproduce_table1(const OrthoglideSpec& spec_base, int threads, const SolverOptions& opts) {
    spec_base.validate();
    Table1Report report;
    report.p_factor = spec_base.p_factor;
    const double L = spec_base.L;
    const double Kt = spec_base.K_theta;
    const Eigen::Vector2d diag = Eigen::Vector2d(1.0, 1.0).normalized();

    auto spec_for = [&](std::size_t k) {
        OrthoglideSpec s = spec_base;
        s.spring = SpringLaw{report.k_values[k] * Kt * L * L, 0.0, SpringBranch::Linear};
        return s;
    };

    KinetostaticOptions kopts;
    kopts.equilibrium = opts;
    const double eps_F = 1e-12 * Kt * L;

    // 12 stiffness cells followed by 4 sweeps
    parallel_for(16, threads, [&](std::size_t task) {
        if (task < 12) {
            const std::size_t pt = task / 4, k = task % 4;
            const OrthoglideSpec spec = spec_for(k);
            const ManipulatorModel model = build_planar_orthoglide(spec);
            const WorkspacePoints wp = workspace_points(spec);
            const PoseVector& t = pt == 0 ? wp.q0 : pt == 1 ? wp.q1 : wp.q2;
            const Eigen::VectorXd u = pt == 1 ? Eigen::VectorXd(-diag) : Eigen::VectorXd(diag);

            Table1Cell& cell = report.cells[pt][k];
            cell.point = static_cast<int>(pt);
            cell.k_vartheta = report.k_values[k];
            cell.reference_rho = kReferenceRho[pt][k];
            cell.reference_stiffness = kReferenceStiffness[pt][k];
            try {
                const KinetostaticSolution ks = solve_inverse_kinetostatic(model, t, eps_F, kopts);
                const StiffnessResult st = manipulator_stiffness(model, t, ks.rho, opts, ks.wrench.states(model));
                cell.rho = ks.rho[0][0] / L;
                cell.rho_kinematic = ks.rho_kinematic[0][0] / L;
                cell.outer_iterations = ks.outer_iterations;
                cell.residual_wrench = ks.residual_wrench;
                cell.stiffness = directional_stiffness(st.K_sigma, u) / Kt;
                cell.ok = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            return;
        }
        const std::size_t k = task - 12;
        const OrthoglideSpec spec = spec_for(k);
        const ManipulatorModel model = build_planar_orthoglide(spec);
        const WorkspacePoints wp = workspace_points(spec);
        Table1Critical& crit = report.critical[k];
        crit.k_vartheta = report.k_values[k];
        if (kReferenceCritical[k] > 0.0) crit.reference = kReferenceCritical[k];
        try {
            const KinetostaticSolution ks = solve_inverse_kinetostatic(model, wp.q2, eps_F, kopts);
            const ForceDeflectionCurve curve =
                force_deflection(model, wp.q2, diag, kSweepMaxDelta * L, kSweepStep * L, ks.rho, opts,
                                 ks.wrench.states(model));
            crit.truncated = curve.truncated;
            if (auto c = critical_force(curve)) crit.critical = CriticalPoint{c->delta / L, c->force / (Kt * L)};
            crit.ok = true;
        } catch (const Error& e) {
            crit.error = e.what();
        }
    });
    return report;
}

std::string format_table1(const Table1Report& r) {
    std::ostringstream os;
    char buf[160];
    auto dev = [](double v, double ref) { return 100.0 * (v - ref) / ref; };

    std::snprintf(buf, sizeof buf, "Planar Orthoglide, p = %.4f L (normalized L = 1, K_theta = 1)\n",
                  r.p_factor);
    os << buf;
    os << "value [reference, deviation]\n\n";
    std::snprintf(buf, sizeof buf, "%-24s", "K_vartheta [K_theta L^2]");
    os << buf;
    for (double k : r.k_values) {
        std::snprintf(buf, sizeof buf, " | %-26.2f", k);
        os << buf;
    }
    os << '\n';

    static const char* names[3] = {"Q0 (isotropic)", "Q1 (bar singularity)", "Q2 (flat singularity)"};
    for (int pt = 0; pt < 3; ++pt) {
        os << "-- " << names[pt] << '\n';
        for (int row = 0; row < 2; ++row) {
            std::snprintf(buf, sizeof buf, "%-24s", row == 0 ? "  rho [L]" : "  stiffness [K_theta]");
            os << buf;
            for (int k = 0; k < 4; ++k) {
                const Table1Cell& c = r.cells[pt][k];
                if (!c.ok) {
                    std::snprintf(buf, sizeof buf, " | %-26s", "failed");
                } else {
                    const double v = row == 0 ? c.rho : c.stiffness;
                    const double ref = row == 0 ? c.reference_rho : c.reference_stiffness;
                    std::snprintf(buf, sizeof buf, " | %8.4f [%6.3f, %+6.2f%%] ", v, ref, dev(v, ref));
                }
                os << buf;
            }
            os << '\n';
        }
    }
    std::snprintf(buf, sizeof buf, "%-24s", "  F_cr [K_theta L]");
    os << buf;
    for (const auto& c : r.critical) {
        if (!c.ok) {
            std::snprintf(buf, sizeof buf, " | %-26s", "failed");
        } else if (!c.critical) {
            if (c.reference) {
                std::snprintf(buf, sizeof buf, " | %8s [%6.3f, %7s] ", "none", *c.reference, "");
            } else {
                std::snprintf(buf, sizeof buf, " | %8s [%6s, %7s] ", "none", "none", "");
            }
        } else if (c.reference) {
            std::snprintf(buf, sizeof buf, " | %8.4f [%6.3f, %+6.2f%%] ", c.critical->force, *c.reference,
                          dev(c.critical->force, *c.reference));
        } else {
            std::snprintf(buf, sizeof buf, " | %8.4f [%6s, %7s] ", c.critical->force, "none", "");
        }
        os << buf;
    }
    os << '\n';
    os << "\nrho is the kinetostatically compensated actuator coordinate; stiffness is u^T K u along\n"
          "the Q0->Qi diagonal. Reference rho values correspond to p_factor ~ 0.454, so deviations\n"
          "of 1-2% are expected at p_factor = 0.45.\n";
    return os.str();
}

}  // namespace kinetostat
