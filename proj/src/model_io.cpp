#include "kinetostat/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kinetostat/errors.hpp"

namespace kinetostat {

namespace {

using nlohmann::json;

/// Collects every schema violation instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key)) fail(path + "." + key, "unknown key");
        return true;
    }

    const json* field(const json& j, const std::string& path, const std::string& key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(path + "." + key, "missing required key");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path) {
        if (!j.is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(path, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const json& j, const std::string& path) {
        if (!j.is_string()) {
            fail(path, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<Eigen::VectorXd> vector(const json& j, const std::string& path, int expected = -1) {
        if (!j.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        if (expected >= 0 && static_cast<int>(j.size()) != expected) {
            fail(path, "expected " + std::to_string(expected) + " numbers");
            return std::nullopt;
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto x = number(j[i], path + "[" + std::to_string(i) + "]");
            if (x) {
                v[static_cast<Eigen::Index>(i)] = *x;
            } else {
                ok = false;
            }
        }
        if (!ok) return std::nullopt;
        return v;
    }

    Frame frame(const json& j, const std::string& path) {
        Frame f;
        if (!object(j, path, {"translation", "rotation"})) return f;
        if (auto* t = field(j, path, "translation", false))
            if (auto v = vector(*t, path + ".translation", 3)) f.translation = *v;
        if (auto* r = field(j, path, "rotation", false))
            if (auto v = vector(*r, path + ".rotation", 3)) f.rpy = *v;
        return f;
    }

    JointModel joint(const json& j, const std::string& path) {
        JointModel jm;
        if (!object(j, path, {"kind", "motion", "axis", "stiffness", "spring"})) return jm;
        if (auto* k = field(j, path, "kind", true)) {
            if (auto s = string(*k, path + ".kind")) {
                try {
                    jm.kind = joint_kind_from_string(*s);
                } catch (const ModelError& e) {
                    fail(path + ".kind", e.what());
                }
            }
        }
        if (auto* m = field(j, path, "motion", true)) {
            if (auto s = string(*m, path + ".motion")) {
                try {
                    jm.motion = joint_motion_from_string(*s);
                } catch (const ModelError& e) {
                    fail(path + ".motion", e.what());
                }
            }
        }
        if (auto* a = field(j, path, "axis", true)) {
            if (auto v = vector(*a, path + ".axis", 3)) {
                const double n = v->norm();
                if (std::abs(n - 1.0) > 1e-9) {
                    fail(path + ".axis", "must have unit norm");
                } else {
                    // leave axes that are unit to rounding bit-for-bit intact
                    jm.axis = std::abs(n - 1.0) > 4 * std::numeric_limits<double>::epsilon() ? Eigen::Vector3d(*v / n)
                                                                                           : Eigen::Vector3d(*v);
                }
            }
        }
        const json* stiffness = field(j, path, "stiffness", false);
        const json* spring = field(j, path, "spring", false);
        const bool elastic = jm.kind == JointKind::VirtualElastic;
        const bool preloaded = jm.kind == JointKind::PreloadedPassive;
        if (elastic && !stiffness) fail(path + ".stiffness", "required for virtual_elastic joints");
        if (!elastic && stiffness) fail(path + ".stiffness", "only allowed on virtual_elastic joints");
        if (preloaded && !spring) fail(path + ".spring", "required for preloaded joints");
        if (!preloaded && spring) fail(path + ".spring", "only allowed on preloaded joints");
        if (elastic && stiffness) {
            if (auto k = number(*stiffness, path + ".stiffness")) {
                if (*k <= 0.0) fail(path + ".stiffness", "must be positive");
                jm.stiffness = *k;
            }
        }
        if (preloaded && spring) jm.spring = spring_law(*spring, path + ".spring");
        return jm;
    }

    SpringLaw spring_law(const json& j, const std::string& path) {
        SpringLaw law;
        if (!object(j, path, {"k", "offset", "branch"})) return law;
        if (auto* k = field(j, path, "k", true)) {
            if (auto v = number(*k, path + ".k")) {
                if (*v < 0.0) fail(path + ".k", "must be non-negative");
                law.k = *v;
            }
        }
        if (auto* o = field(j, path, "offset", false))
            if (auto v = number(*o, path + ".offset")) law.preload_offset = *v;
        if (auto* b = field(j, path, "branch", false)) {
            if (auto s = string(*b, path + ".branch")) {
                try {
                    law.branch = spring_branch_from_string(*s);
                } catch (const ModelError& e) {
                    fail(path + ".branch", e.what());
                }
            }
        }
        return law;
    }

    ChainModel chain(const json& j, const std::string& path, TaskDim dim) {
        ChainModel c;
        c.dim = dim;
        if (!object(j, path, {"name", "base", "tool", "elements", "home"})) return c;
        if (auto* n = field(j, path, "name", false))
            if (auto s = string(*n, path + ".name")) c.name = *s;
        if (auto* b = field(j, path, "base", false)) c.base = frame(*b, path + ".base");
        if (auto* t = field(j, path, "tool", false)) c.tool = frame(*t, path + ".tool");
        if (auto* e = field(j, path, "elements", true)) {
            if (!e->is_array() || e->empty()) {
                fail(path + ".elements", "expected a non-empty array");
            } else {
                for (std::size_t i = 0; i < e->size(); ++i) {
                    const std::string at = path + ".elements[" + std::to_string(i) + "]";
                    const json& el = (*e)[i];
                    ChainElement ce;
                    if (object(el, at, {"link", "joint"})) {
                        if (auto* l = field(el, at, "link", false)) ce.link = frame(*l, at + ".link");
                        if (auto* jt = field(el, at, "joint", true)) ce.joint = joint(*jt, at + ".joint");
                    }
                    c.elements.push_back(std::move(ce));
                }
                if (c.count(JointKind::VirtualElastic) == 0) {
                    fail(path + ".elements", "chain needs at least one virtual_elastic joint");
                }
            }
        }
        if (auto* h = field(j, path, "home", false)) {
            const std::string at = path + ".home";
            if (object(*h, at, {"rho", "q", "vartheta", "theta"})) {
                auto read = [&](const char* key, JointKind kind, Eigen::VectorXd& dst) {
                    if (auto* v = field(*h, at, key, false))
                        if (auto vec = vector(*v, at + "." + key, c.count(kind))) dst = *vec;
                };
                read("rho", JointKind::Actuated, c.home.rho);
                read("q", JointKind::PerfectPassive, c.home.q);
                read("vartheta", JointKind::PreloadedPassive, c.home.vartheta);
                read("theta", JointKind::VirtualElastic, c.home.theta);
            }
        }
        return c;
    }
};

json frame_json(const Frame& f) {
    return {{"translation", {f.translation.x(), f.translation.y(), f.translation.z()}},
            {"rotation", {f.rpy.x(), f.rpy.y(), f.rpy.z()}}};
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

ManipulatorModel model_from_json(const nlohmann::json& doc) {
    Reader rd;
    ManipulatorModel m;
    const std::string root = "$";
    if (rd.object(doc, root, {"version", "name", "task_dim", "units", "chains"})) {
        if (auto* v = rd.field(doc, root, "version", true)) {
            if (auto s = rd.string(*v, "$.version"); s && *s != kModelVersion) {
                rd.fail("$.version", "unsupported version '" + *s + "', expected '" +
                                         std::string(kModelVersion) + "'");
            }
        }
        if (auto* n = rd.field(doc, root, "name", false))
            if (auto s = rd.string(*n, "$.name")) m.name = *s;
        if (auto* d = rd.field(doc, root, "task_dim", true)) {
            if (!d->is_number_integer()) {
                rd.fail("$.task_dim", "expected an integer");
            } else {
                try {
                    m.dim = task_dim_from_int(d->get<int>());
                } catch (const ModelError& e) {
                    rd.fail("$.task_dim", e.what());
                }
            }
        }
        if (auto* u = rd.field(doc, root, "units", false)) {
            if (rd.object(*u, "$.units", {"length", "force", "angle"})) {
                if (auto* x = rd.field(*u, "$.units", "length", false))
                    if (auto s = rd.string(*x, "$.units.length")) m.units.length = *s;
                if (auto* x = rd.field(*u, "$.units", "force", false))
                    if (auto s = rd.string(*x, "$.units.force")) m.units.force = *s;
                if (auto* x = rd.field(*u, "$.units", "angle", false))
                    if (auto s = rd.string(*x, "$.units.angle")) m.units.angle = *s;
            }
        }
        if (auto* c = rd.field(doc, root, "chains", true)) {
            if (!c->is_array() || c->empty()) {
                rd.fail("$.chains", "expected a non-empty array");
            } else {
                for (std::size_t i = 0; i < c->size(); ++i)
                    m.chains.push_back(rd.chain((*c)[i], "$.chains[" + std::to_string(i) + "]", m.dim));
            }
        }
    }
    if (!rd.errors.empty()) {
        std::string msg = "invalid model document:";
        for (const auto& e : rd.errors) msg += "\n  " + e;
        throw ModelError(msg);
    }
    validate(m);
    return m;
}

ManipulatorModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("model syntax error: ") + e.what());
    }
    return model_from_json(doc);
}

ManipulatorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

nlohmann::json to_json(const ManipulatorModel& model) {
    json chains = json::array();
    for (const auto& c : model.chains) {
        json elements = json::array();
        for (const auto& e : c.elements) {
            const auto& j = e.joint;
            json joint = {{"kind", std::string(to_string(j.kind))},
                          {"motion", std::string(to_string(j.motion))},
                          {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}}};
            if (j.stiffness) joint["stiffness"] = *j.stiffness;
            if (j.spring) {
                joint["spring"] = {{"k", j.spring->k},
                                   {"offset", j.spring->preload_offset},
                                   {"branch", std::string(to_string(j.spring->branch))}};
            }
            elements.push_back({{"link", frame_json(e.link)}, {"joint", std::move(joint)}});
        }
        const ChainState h = c.home_state();
        chains.push_back({{"name", c.name},
                          {"base", frame_json(c.base)},
                          {"tool", frame_json(c.tool)},
                          {"elements", std::move(elements)},
                          {"home",
                           {{"rho", vec_json(h.rho)},
                            {"q", vec_json(h.q)},
                            {"vartheta", vec_json(h.vartheta)},
                            {"theta", vec_json(h.theta)}}}});
    }
    return {{"version", std::string(kModelVersion)},
            {"name", model.name},
            {"task_dim", size_of(model.dim)},
            {"units", {{"length", model.units.length}, {"force", model.units.force}, {"angle", model.units.angle}}},
            {"chains", std::move(chains)}};
}

std::string serialize_model(const ManipulatorModel& model) { return to_json(model).dump(2) + "\n"; }

}  // namespace kinetostat
