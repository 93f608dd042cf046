#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "kinetostat/errors.hpp"
#include "kinetostat/model_io.hpp"
#include "kinetostat/orthoglide.hpp"

using namespace kinetostat;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ModelError& e) {
        return e.what();
    }
    return {};
}

json fixture_json() { return to_json(build_planar_orthoglide({})); }

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

ManipulatorModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const TaskDim dims[] = {TaskDim::Point2, TaskDim::Planar3, TaskDim::Spatial6};
    ManipulatorModel m;
    m.name = "random-" + std::to_string(rng() % 1000);
    m.dim = dims[rng() % 3];
    m.units = {"mm", "N", "rad"};
    const int chains = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < chains; ++i) {
        ChainModel c;
        c.name = "chain" + std::to_string(i);
        c.dim = m.dim;
        c.base.translation = {u(rng), u(rng), u(rng)};
        c.base.rpy = {u(rng), u(rng), u(rng)};
        c.tool.translation = {u(rng), 0.0, u(rng)};
        const int n = 2 + static_cast<int>(rng() % 5);
        for (int j = 0; j < n; ++j) {
            ChainElement e;
            e.link.translation = {u(rng), u(rng), u(rng)};
            e.link.rpy = {u(rng), u(rng), u(rng)};
            e.joint.motion = rng() % 2 ? JointMotion::Rotational : JointMotion::Translational;
            e.joint.axis = random_unit(rng);
            const int kind = j == 0 ? 3 : static_cast<int>(rng() % 4);
            e.joint.kind = static_cast<JointKind>(kind);
            if (e.joint.kind == JointKind::VirtualElastic) e.joint.stiffness = 0.1 + std::abs(u(rng));
            if (e.joint.kind == JointKind::PreloadedPassive)
                e.joint.spring = SpringLaw{std::abs(u(rng)), u(rng), static_cast<SpringBranch>(rng() % 3)};
            c.elements.push_back(e);
        }
        if (rng() % 2) {
            c.home.rho = Eigen::VectorXd::Constant(c.count(JointKind::Actuated), u(rng));
            c.home.q = Eigen::VectorXd::Constant(c.count(JointKind::PerfectPassive), u(rng));
            c.home.vartheta = Eigen::VectorXd::Constant(c.count(JointKind::PreloadedPassive), u(rng));
            c.home.theta = Eigen::VectorXd::Zero(c.count(JointKind::VirtualElastic));
        }
        m.chains.push_back(c);
    }
    validate(m);
    return m;
}

// Same document with every object's keys in reverse order.
nlohmann::ordered_json reversed(const json& j) {
    if (j.is_object()) {
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        for (auto it = j.rbegin(); it != j.rend(); ++it) out[it.key()] = reversed(*it);
        return out;
    }
    if (j.is_array()) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& v : j) out.push_back(reversed(v));
        return out;
    }
    return nlohmann::ordered_json::parse(j.dump());
}

}  // namespace

TEST_CASE("shipped fixture parses") {
    const ManipulatorModel m = load_model(KINETOSTAT_MODELS_DIR "/orthoglide-planar.json");
    CHECK(m.chains.size() == 2);
    CHECK(m.dim == TaskDim::Point2);
    CHECK(m.chains[0].name == "leg-x");
    CHECK(m.chains[0].elements.size() == 4);
    CHECK(m.units.length == "L");
}

TEST_CASE("round-trip over generated documents") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        const ManipulatorModel m = random_model(rng);
        const json doc = to_json(m);
        const std::string text = reversed(doc).dump(rng() % 2 ? 2 : -1);
        const ManipulatorModel back = parse_model(text);
        CHECK(to_json(back) == doc);
        CHECK(serialize_model(back) == serialize_model(m));
    }
}

TEST_CASE("optional fields take their defaults") {
    json doc = fixture_json();
    for (auto& c : doc["chains"]) {
        c.erase("home");
        c.erase("base");
        for (auto& e : c["elements"]) {
            e.erase("link");
            if (e["joint"].contains("spring")) {
                e["joint"]["spring"].erase("offset");
                e["joint"]["spring"].erase("branch");
            }
        }
    }
    doc.erase("units");
    const ManipulatorModel m = model_from_json(doc);
    CHECK(m.chains[0].elements[2].joint.spring->branch == SpringBranch::Linear);
    CHECK(m.chains[0].elements[2].joint.spring->preload_offset == 0.0);
    CHECK(m.units.length == "L");
    CHECK(m.chains[1].elements[0].link.rpy.isZero());
}

TEST_CASE("missing spring is reported at the joint path") {
    json doc = fixture_json();
    doc["chains"][1]["elements"][2]["joint"].erase("spring");
    const std::string msg = error_of(doc.dump());
    CHECK(msg.find("$.chains[1].elements[2].joint.spring") != std::string::npos);
    CHECK(msg.find("required for preloaded joints") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their paths") {
    json doc = fixture_json();
    doc["chains"][0]["elements"][1]["joint"]["damping"] = 0.1;
    doc["extra"] = true;
    const std::string msg = error_of(doc.dump());
    CHECK(msg.find("$.chains[0].elements[1].joint.damping: unknown key") != std::string::npos);
    CHECK(msg.find("$.extra: unknown key") != std::string::npos);
}

TEST_CASE("every violation is listed") {
    json doc = fixture_json();
    doc["chains"][0]["elements"][1]["joint"]["stiffness"] = -1.0;
    doc["chains"][1]["elements"][0]["joint"]["kind"] = "hydraulic";
    doc["chains"][1]["elements"][3]["joint"]["axis"] = {0.0, 0.0, 2.0};
    const std::string msg = error_of(doc.dump());
    CHECK(msg.find("$.chains[0].elements[1].joint.stiffness: must be positive") != std::string::npos);
    CHECK(msg.find("$.chains[1].elements[0].joint.kind") != std::string::npos);
    CHECK(msg.find("$.chains[1].elements[3].joint.axis: must have unit norm") != std::string::npos);
}

TEST_CASE("other rejections") {
    json doc = fixture_json();
    SUBCASE("wrong version") {
        doc["version"] = "kinetostat/2";
        CHECK(error_of(doc.dump()).find("$.version") != std::string::npos);
    }
    SUBCASE("unsupported task dimension") {
        doc["task_dim"] = 4;
        CHECK(error_of(doc.dump()).find("$.task_dim") != std::string::npos);
    }
    SUBCASE("negative spring rate") {
        doc["chains"][0]["elements"][2]["joint"]["spring"]["k"] = -0.5;
        CHECK(error_of(doc.dump()).find("$.chains[0].elements[2].joint.spring.k") != std::string::npos);
    }
    SUBCASE("stiffness on a passive joint") {
        doc["chains"][0]["elements"][3]["joint"]["stiffness"] = 1.0;
        CHECK(error_of(doc.dump()).find("only allowed on virtual_elastic") != std::string::npos);
    }
    SUBCASE("home vector of the wrong length") {
        doc["chains"][0]["home"]["rho"] = {1.0, 2.0};
        CHECK(error_of(doc.dump()).find("$.chains[0].home.rho") != std::string::npos);
    }
    SUBCASE("syntax error") {
        CHECK(error_of("{\"version\": ").find("syntax error") != std::string::npos);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ModelError);
    }
}

TEST_CASE("axes within rounding of unit length are renormalized") {
    json doc = fixture_json();
    doc["chains"][0]["elements"][0]["joint"]["axis"] = {1.0 + 1e-12, 0.0, 0.0};
    const ManipulatorModel m = model_from_json(doc);
    CHECK(m.chains[0].elements[0].joint.axis.norm() == doctest::Approx(1.0).epsilon(1e-15));
}
