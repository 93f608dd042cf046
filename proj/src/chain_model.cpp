#include "kinetostat/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kinetostat/errors.hpp"

namespace kinetostat {

namespace {

constexpr JointKind kKinds[] = {JointKind::Actuated, JointKind::PerfectPassive,
                                JointKind::PreloadedPassive, JointKind::VirtualElastic};

Eigen::VectorXd& slot(ChainState& s, JointKind k) {
    switch (k) {
        case JointKind::Actuated: return s.rho;
        case JointKind::PerfectPassive: return s.q;
        case JointKind::PreloadedPassive: return s.vartheta;
        case JointKind::VirtualElastic: return s.theta;
    }
    return s.q;
}

const Eigen::VectorXd& slot(const ChainState& s, JointKind k) {
    return slot(const_cast<ChainState&>(s), k);
}

}  // namespace

std::string_view to_string(JointKind k) {
    switch (k) {
        case JointKind::Actuated: return "actuated";
        case JointKind::PerfectPassive: return "passive";
        case JointKind::PreloadedPassive: return "preloaded";
        case JointKind::VirtualElastic: return "virtual_elastic";
    }
    return "?";
}

std::string_view to_string(JointMotion m) {
    return m == JointMotion::Rotational ? "rotational" : "translational";
}

JointKind joint_kind_from_string(std::string_view s) {
    for (auto k : kKinds)
        if (to_string(k) == s) return k;
    throw ModelError("unknown joint kind '" + std::string(s) + "'");
}

JointMotion joint_motion_from_string(std::string_view s) {
    if (s == "rotational") return JointMotion::Rotational;
    if (s == "translational") return JointMotion::Translational;
    throw ModelError("unknown joint motion '" + std::string(s) + "'");
}

int ChainModel::count(JointKind kind) const {
    return static_cast<int>(std::count_if(elements.begin(), elements.end(),
                                          [&](const ChainElement& e) { return e.joint.kind == kind; }));
}

std::vector<int> ChainModel::indices(JointKind kind) const {
    std::vector<int> out;
    for (int i = 0; i < joint_count(); ++i)
        if (elements[i].joint.kind == kind) out.push_back(i);
    return out;
}

Eigen::VectorXd ChainModel::to_coordinates(const ChainState& s) const {
    Eigen::VectorXd coords = Eigen::VectorXd::Zero(joint_count());
    for (auto kind : kKinds) {
        const auto idx = indices(kind);
        const auto& v = slot(s, kind);
        if (v.size() != static_cast<Eigen::Index>(idx.size())) {
            throw ModelError("chain '" + name + "': state has " + std::to_string(v.size()) + " " +
                             std::string(to_string(kind)) + " coordinates, expected " +
                             std::to_string(idx.size()));
        }
        for (std::size_t i = 0; i < idx.size(); ++i) coords[idx[i]] = v[static_cast<Eigen::Index>(i)];
    }
    return coords;
}

ChainState ChainModel::from_coordinates(const Eigen::VectorXd& coords) const {
    if (coords.size() != joint_count()) {
        throw ModelError("chain '" + name + "': coordinate vector has wrong length");
    }
    ChainState s;
    for (auto kind : kKinds) {
        const auto idx = indices(kind);
        auto& v = slot(s, kind);
        v.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) v[static_cast<Eigen::Index>(i)] = coords[idx[i]];
    }
    return s;
}

ChainState ChainModel::home_state() const {
    ChainState s = home;
    for (auto kind : kKinds) {
        auto& v = slot(s, kind);
        if (v.size() == 0) v = Eigen::VectorXd::Zero(count(kind));
    }
    return s;
}

double ChainModel::characteristic_length() const {
    double len = tool.translation.norm();
    for (const auto& e : elements) len = std::max(len, e.link.translation.norm());
    return len > 0.0 ? len : 1.0;
}

void validate(const ChainModel& chain) {
    const std::string where = "chain '" + chain.name + "': ";
    if (chain.count(JointKind::VirtualElastic) == 0) {
        throw ModelError(where + "needs at least one virtual_elastic joint");
    }
    for (int i = 0; i < chain.joint_count(); ++i) {
        const auto& j = chain.elements[i].joint;
        const std::string at = where + "element " + std::to_string(i) + ": ";
        if (std::abs(j.axis.norm() - 1.0) > 1e-12) throw ModelError(at + "axis must have unit norm");
        const bool preloaded = j.kind == JointKind::PreloadedPassive;
        const bool elastic = j.kind == JointKind::VirtualElastic;
        if (preloaded != j.spring.has_value()) {
            throw ModelError(at + (preloaded ? "preloaded joint needs a spring"
                                             : "spring only allowed on preloaded joints"));
        }
        if (elastic != j.stiffness.has_value()) {
            throw ModelError(at + (elastic ? "virtual_elastic joint needs a stiffness"
                                           : "stiffness only allowed on virtual_elastic joints"));
        }
        if (elastic && !(*j.stiffness > 0.0 && std::isfinite(*j.stiffness))) {
            throw ModelError(at + "stiffness must be positive");
        }
        if (preloaded && !(j.spring->k >= 0.0 && std::isfinite(j.spring->k) &&
                           std::isfinite(j.spring->preload_offset))) {
            throw ModelError(at + "spring stiffness must be non-negative");
        }
    }
    const ChainState h = chain.home;
    for (auto kind : kKinds) {
        const auto n = slot(h, kind).size();
        if (n != 0 && n != chain.count(kind)) {
            throw ModelError(where + "home has wrong number of " + std::string(to_string(kind)) +
                             " coordinates");
        }
    }
}

int ManipulatorModel::actuator_count() const {
    int n = 0;
    for (const auto& c : chains) n += c.count(JointKind::Actuated);
    return n;
}

double ManipulatorModel::characteristic_length() const {
    double len = 0.0;
    for (const auto& c : chains) len = std::max(len, c.characteristic_length());
    return len > 0.0 ? len : 1.0;
}

Eigen::VectorXd ManipulatorModel::flatten_rho(const std::vector<Eigen::VectorXd>& rho) const {
    if (rho.size() != chains.size()) throw ModelError("need actuated coordinates for every chain");
    Eigen::VectorXd flat(actuator_count());
    Eigen::Index at = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (rho[c].size() != chains[c].count(JointKind::Actuated)) {
            throw ModelError("chain " + std::to_string(c) + ": wrong number of actuated coordinates");
        }
        flat.segment(at, rho[c].size()) = rho[c];
        at += rho[c].size();
    }
    return flat;
}

std::vector<Eigen::VectorXd> ManipulatorModel::split_rho(const Eigen::VectorXd& flat) const {
    if (flat.size() != actuator_count()) {
        throw ModelError("expected " + std::to_string(actuator_count()) + " actuated coordinates, got " +
                         std::to_string(flat.size()));
    }
    std::vector<Eigen::VectorXd> out;
    Eigen::Index at = 0;
    for (const auto& c : chains) {
        const int n = c.count(JointKind::Actuated);
        out.emplace_back(flat.segment(at, n));
        at += n;
    }
    return out;
}

void validate(const ManipulatorModel& model) {
    if (model.chains.empty()) throw ModelError("manipulator has no chains");
    for (const auto& c : model.chains) {
        if (c.dim != model.dim) throw ModelError("chain '" + c.name + "': task dimension differs");
        validate(c);
    }
}

Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy) {
    return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

Eigen::Vector3d matrix_to_rpy(const Eigen::Matrix3d& r) {
    const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    return {roll, pitch, yaw};
}

Eigen::Isometry3d Frame::transform() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translation() = translation;
    if (!rpy.isZero(0.0)) t.linear() = rpy_to_matrix(rpy);
    return t;
}

}  // namespace kinetostat
