#include "kinetostat/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "kinetostat/equilibrium.hpp"
#include "kinetostat/errors.hpp"
#include "kinetostat/format.hpp"
#include "kinetostat/kinematics.hpp"
#include "kinetostat/kinetostatic.hpp"
#include "kinetostat/model_io.hpp"
#include "kinetostat/orthoglide.hpp"
#include "kinetostat/stiffness.hpp"

namespace kinetostat {

namespace {

using nlohmann::json;

// Bad argument values that CLI11 cannot catch on its own.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::uint64_t seed = 0;
    double tol = 1e-9;
    bool json = false;
    int threads = 1;
    std::string out;
};

struct Args {
    std::string model;
    std::string pose;
    std::string poses_file;
    std::string rho;
    bool compensate = false;
    std::string from;
    std::string dir;
    std::optional<double> max_delta;
    std::optional<double> step;
    int grid = 21;
    std::optional<double> half_width;
    double eps_f = 1e-10;
    std::string bench_name;
    double p_factor = 0.45;
};

Eigen::VectorXd parse_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
            values.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(what + ": '" + item + "' is not a finite number");
        }
    }
    if (values.empty()) throw UsageError(what + ": expected comma-separated numbers");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

PoseVector parse_pose(const std::string& text, TaskDim dim, const std::string& what) {
    Eigen::VectorXd v = parse_list(text, what);
    if (v.size() != size_of(dim)) {
        throw UsageError(what + ": expected " + std::to_string(size_of(dim)) + " values for this model, got " +
                         std::to_string(v.size()));
    }
    return PoseVector(dim, v);
}

std::vector<Eigen::VectorXd> parse_rho(const std::string& text, const ManipulatorModel& model) {
    Eigen::VectorXd flat = parse_list(text, "--rho");
    if (flat.size() != model.actuator_count()) {
        throw UsageError("--rho: expected " + std::to_string(model.actuator_count()) + " values, got " +
                         std::to_string(flat.size()));
    }
    return model.split_rho(flat);
}

std::vector<Eigen::VectorXd> kinematic_rho(const ManipulatorModel& model, const PoseVector& t) {
    std::vector<Eigen::VectorXd> rho;
    for (const auto& s : inverse_kinematics_unloaded(model, t)) rho.push_back(s.rho);
    return rho;
}

std::string vec_text(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_num(v[i]);
    return s;
}

std::string matrix_text(const Eigen::MatrixXd& m, const std::string& indent) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += indent + vec_text(m.row(i).transpose()) + "\n";
    return s;
}

json mask_json(const std::vector<bool>& mask) {
    json a = json::array();
    for (bool b : mask) a.push_back(b);
    return a;
}

std::string units_line(const ManipulatorModel& m) {
    return "# units: length=" + m.units.length + " force=" + m.units.force + " angle=" + m.units.angle + "\n";
}

SolverOptions solver_options(const GlobalOptions& g) {
    SolverOptions o;
    o.pose_tol = g.tol;
    o.rng_seed = g.seed;
    return o;
}

std::string cmd_equilibrium(const Args& a, const GlobalOptions& g) {
    const ManipulatorModel model = load_model(a.model);
    const PoseVector t = parse_pose(a.pose, model.dim, "--pose");
    const auto rho = a.rho.empty() ? kinematic_rho(model, t) : parse_rho(a.rho, model);
    const WrenchResult w = total_wrench(model, t, rho, solver_options(g));

    if (g.json) {
        json chains = json::array();
        for (std::size_t i = 0; i < w.chains.size(); ++i) {
            const auto& c = w.chains[i];
            chains.push_back({{"name", model.chains[i].name},
                              {"F", vector_to_json(c.F)},
                              {"residual", c.residual},
                              {"iterations", c.iterations},
                              {"restarts", c.restarts},
                              {"active_springs", mask_json(c.active_mask())},
                              {"q_tilde", vector_to_json(c.q_tilde())},
                              {"theta_tilde", vector_to_json(c.theta_tilde())}});
        }
        json doc = {{"command", "equilibrium"},
                    {"units", {{"length", model.units.length}, {"force", model.units.force}}},
                    {"pose", vector_to_json(t.values)},
                    {"rho", vector_to_json(model.flatten_rho(rho))},
                    {"F_sigma", vector_to_json(w.F_sigma)},
                    {"chains", std::move(chains)}};
        return doc.dump(2) + "\n";
    }
    std::string s = units_line(model);
    s += "rho: " + vec_text(model.flatten_rho(rho)) + "\n";
    s += "F_sigma: " + vec_text(w.F_sigma) + "\n";
    for (std::size_t i = 0; i < w.chains.size(); ++i) {
        const auto& c = w.chains[i];
        s += "chain " + std::to_string(i) + " (" + model.chains[i].name + "): F " + vec_text(c.F) + ", residual " +
             fmt_num(c.residual) + ", iterations " + std::to_string(c.iterations) + "\n";
    }
    return s;
}

std::string cmd_stiffness(const Args& a, const GlobalOptions& g) {
    const ManipulatorModel model = load_model(a.model);
    const PoseVector t = parse_pose(a.pose, model.dim, "--pose");
    const SolverOptions opts = solver_options(g);
    std::vector<Eigen::VectorXd> rho;
    if (!a.rho.empty()) {
        rho = parse_rho(a.rho, model);
    } else if (a.compensate) {
        KinetostaticOptions ko;
        ko.equilibrium = opts;
        rho = solve_inverse_kinetostatic(model, t, 1e-12 * model.characteristic_length(), ko).rho;
    } else {
        rho = kinematic_rho(model, t);
    }
    const StiffnessResult r = manipulator_stiffness(model, t, rho, opts);

    if (g.json) {
        json kc = json::array();
        for (const auto& K : r.K_c) kc.push_back(matrix_to_json(K));
        json doc = {{"command", "stiffness"},
                    {"units", {{"length", model.units.length}, {"force", model.units.force}}},
                    {"pose", vector_to_json(t.values)},
                    {"rho", vector_to_json(model.flatten_rho(rho))},
                    {"K_sigma", matrix_to_json(r.K_sigma)},
                    {"eigenvalues", vector_to_json(r.eigenvalues)},
                    {"positive_definite", r.positive_definite},
                    {"K_c", std::move(kc)},
                    {"rank_c", r.rank_c},
                    {"F_sigma", vector_to_json(r.wrench.F_sigma)}};
        return doc.dump(2) + "\n";
    }
    std::string s = units_line(model);
    s += "rho: " + vec_text(model.flatten_rho(rho)) + "\n";
    s += "K_sigma:\n" + matrix_text(r.K_sigma, "  ");
    s += "eigenvalues: " + vec_text(r.eigenvalues) + "\n";
    s += std::string("positive_definite: ") + (r.positive_definite ? "yes" : "no") + "\n";
    for (std::size_t i = 0; i < r.K_c.size(); ++i) {
        s += "K_c[" + std::to_string(i) + "] (rank " + std::to_string(r.rank_c[i]) + "):\n" +
             matrix_text(r.K_c[i], "  ");
    }
    return s;
}

std::string cmd_sweep(const Args& a, const GlobalOptions& g) {
    const ManipulatorModel model = load_model(a.model);
    const double L = model.characteristic_length();
    const PoseVector from = parse_pose(a.from, model.dim, "--from");
    Eigen::VectorXd dir = parse_list(a.dir, "--dir");
    if (dir.size() != size_of(model.dim)) throw UsageError("--dir: wrong number of components");
    if (dir.norm() == 0.0) throw UsageError("--dir: must be non-zero");
    dir.normalize();
    const double max_delta = a.max_delta.value_or(kSweepMaxDelta * L);
    const double step = a.step.value_or(kSweepStep * L);
    if (!(step > 0.0) || !(max_delta > 0.0)) throw UsageError("--step and --max-delta must be positive");

    const SolverOptions opts = solver_options(g);
    std::vector<Eigen::VectorXd> rho;
    if (!a.rho.empty()) {
        rho = parse_rho(a.rho, model);
    } else {
        KinetostaticOptions ko;
        ko.equilibrium = opts;
        rho = solve_inverse_kinetostatic(model, from, 1e-12 * L, ko).rho;
    }
    ForceDeflectionCurve curve = force_deflection(model, from, dir, max_delta, step, rho, opts);
    curve.critical = critical_force(curve);

    if (g.json) {
        json samples = json::array();
        for (const auto& p : curve.samples) samples.push_back({p.delta, p.force_magnitude, p.force_along});
        json doc = {{"command", "sweep"},
                    {"columns", {"delta", "F_mag", "F_dir"}},
                    {"samples", std::move(samples)},
                    {"truncated", curve.truncated},
                    {"critical", curve.critical ? json{{"delta", curve.critical->delta},
                                                       {"force", curve.critical->force}}
                                                : json(nullptr)}};
        if (curve.truncated) doc["truncation_reason"] = curve.truncation_reason;
        return doc.dump(2) + "\n";
    }
    std::string s = "delta,F_mag,F_dir\n";
    for (const auto& p : curve.samples) s += csv_row({p.delta, p.force_magnitude, p.force_along}) + "\n";
    if (curve.truncated) s += "# truncated," + curve.truncation_reason + "\n";
    if (curve.critical) {
        s += "# critical," + csv_row({curve.critical->delta, curve.critical->force}) + "\n";
    } else {
        s += "# critical,none\n";
    }
    return s;
}

std::string cmd_map(const Args& a, const GlobalOptions& g) {
    const ManipulatorModel model = load_model(a.model);
    if (a.grid < 2) throw UsageError("--grid must be at least 2");
    const double hw = a.half_width.value_or(0.45 * model.characteristic_length());
    if (!(hw > 0.0)) throw UsageError("--half-width must be positive");
    const ComplianceMap map = compliance_map(model, hw, a.grid, g.threads, solver_options(g));

    if (g.json) {
        json cells = json::array();
        for (const auto& c : map.cells) {
            json cell = {{"x", c.x}, {"y", c.y}, {"solvable", c.solvable}};
            if (c.solvable) {
                cell["c_max"] = c.c_max;
                cell["c_min"] = c.c_min;
            } else {
                cell["error"] = c.error;
            }
            cells.push_back(std::move(cell));
        }
        return json{{"command", "map"}, {"grid", map.grid_n}, {"half_width", hw}, {"cells", std::move(cells)}}
                   .dump(2) +
               "\n";
    }
    std::string s = "x,y,c_max,c_min,flag\n";
    for (const auto& c : map.cells) {
        if (c.solvable) {
            s += csv_row({c.x, c.y, c.c_max, c.c_min}) + ",0\n";
        } else {
            s += csv_row({c.x, c.y}) + ",nan,nan,1\n";
        }
    }
    return s;
}

std::string cmd_invkin(const Args& a, const GlobalOptions& g) {
    const ManipulatorModel model = load_model(a.model);
    if (a.pose.empty() == a.poses_file.empty()) throw UsageError("invkin needs exactly one of --pose or --poses");
    if (!(a.eps_f > 0.0)) throw UsageError("--eps-f must be positive");
    KinetostaticOptions ko;
    ko.equilibrium = solver_options(g);

    std::vector<PoseVector> poses;
    if (!a.pose.empty()) {
        poses.push_back(parse_pose(a.pose, model.dim, "--pose"));
    } else {
        std::ifstream in(a.poses_file);
        if (!in) throw UsageError("cannot open poses file '" + a.poses_file + "'");
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            poses.push_back(parse_pose(line, model.dim, a.poses_file + ":" + std::to_string(n)));
        }
    }

    json results = json::array();
    std::string s;
    if (!g.json) {
        for (int i = 0; i < size_of(model.dim); ++i) s += (i ? ",pose" : "pose") + std::to_string(i);
        for (int i = 0; i < model.actuator_count(); ++i) s += ",rho" + std::to_string(i);
        s += ",iterations,residual\n";
    }
    for (const auto& t : poses) {
        const KinetostaticSolution sol = solve_inverse_kinetostatic(model, t, a.eps_f, ko);
        const Eigen::VectorXd rho = model.flatten_rho(sol.rho);
        if (g.json) {
            results.push_back({{"pose", vector_to_json(t.values)},
                               {"rho", vector_to_json(rho)},
                               {"rho_kinematic", vector_to_json(model.flatten_rho(sol.rho_kinematic))},
                               {"iterations", sol.outer_iterations},
                               {"residual", sol.residual_wrench},
                               {"rank_deficient", sol.rank_deficient}});
        } else {
            std::vector<double> row(t.values.data(), t.values.data() + t.values.size());
            row.insert(row.end(), rho.data(), rho.data() + rho.size());
            s += csv_row(row) + "," + std::to_string(sol.outer_iterations) + "," + fmt_num(sol.residual_wrench) +
                 "\n";
        }
    }
    if (g.json) return json{{"command", "invkin"}, {"results", std::move(results)}}.dump(2) + "\n";
    return s;
}

json cell_json(const Table1Cell& c) {
    json j = {{"point", "Q" + std::to_string(c.point)}, {"k_vartheta", c.k_vartheta}, {"ok", c.ok}};
    if (!c.ok) {
        j["error"] = c.error;
        return j;
    }
    j["rho"] = c.rho;
    j["rho_kinematic"] = c.rho_kinematic;
    j["stiffness"] = c.stiffness;
    j["outer_iterations"] = c.outer_iterations;
    j["residual_wrench"] = c.residual_wrench;
    j["reference_rho"] = c.reference_rho;
    j["reference_stiffness"] = c.reference_stiffness;
    j["rho_deviation"] = c.rho / c.reference_rho - 1.0;
    j["stiffness_deviation"] = c.stiffness / c.reference_stiffness - 1.0;
    return j;
}

std::string cmd_bench(const Args& a, const GlobalOptions& g) {
    if (a.bench_name != "orthoglide") throw UsageError("unknown benchmark '" + a.bench_name + "'");
    OrthoglideSpec spec;
    spec.p_factor = a.p_factor;
    try {
        spec.validate();
    } catch (const ModelError& e) {
        throw UsageError(std::string("--p-factor: ") + e.what());
    }
    const Table1Report r = reproduce_table1(spec, g.threads, solver_options(g));
    if (!g.json) return format_table1(r);

    json cells = json::array();
    for (const auto& row : r.cells)
        for (const auto& c : row) cells.push_back(cell_json(c));
    json crit = json::array();
    for (const auto& c : r.critical) {
        json j = {{"k_vartheta", c.k_vartheta}, {"ok", c.ok}, {"truncated", c.truncated}};
        if (!c.ok) j["error"] = c.error;
        j["critical"] = c.critical ? json{{"delta", c.critical->delta}, {"force", c.critical->force}} : json(nullptr);
        j["reference"] = c.reference ? json(*c.reference) : json(nullptr);
        crit.push_back(std::move(j));
    }
    return json{{"command", "bench"},
                {"benchmark", "orthoglide"},
                {"p_factor", r.p_factor},
                {"units", {{"length", "L"}, {"stiffness", "K_theta"}, {"force", "K_theta*L"}}},
                {"cells", std::move(cells)},
                {"critical_force", std::move(crit)}}
               .dump(2) +
           "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kinetostatic and stiffness analysis of preloaded parallel manipulators", "kinetostat"};
    app.fallthrough();
    app.require_subcommand(1);
    GlobalOptions g;
    Args a;
    app.add_option("--seed", g.seed, "Seed for the equilibrium restart perturbations");
    app.add_option("--tol", g.tol, "Pose tolerance relative to the characteristic length")
        ->check(CLI::PositiveNumber);
    app.add_flag("--json", g.json, "Emit a JSON document instead of text/CSV");
    app.add_option("--threads", g.threads, "Worker threads for map and bench")->check(CLI::Range(1, 1024));
    app.add_option("--out", g.out, "Write the result to this file instead of stdout");

    auto* eq = app.add_subcommand("equilibrium", "Total wrench needed to hold the platform at a pose");
    eq->add_option("--model", a.model, "Model document")->required();
    eq->add_option("--pose", a.pose, "Platform pose, comma-separated")->required();
    eq->add_option("--rho", a.rho, "Actuator coordinates, comma-separated (default: rigid inverse kinematics)");

    auto* st = app.add_subcommand("stiffness", "Cartesian stiffness matrix at a pose");
    st->add_option("--model", a.model, "Model document")->required();
    st->add_option("--pose", a.pose, "Platform pose, comma-separated")->required();
    auto* st_rho = st->add_option("--rho", a.rho, "Actuator coordinates (default: rigid inverse kinematics)");
    st->add_flag("--compensate", a.compensate, "Use actuator coordinates that leave the platform unloaded")
        ->excludes(st_rho);

    auto* sw = app.add_subcommand("sweep", "Force-deflection curve along a direction");
    sw->add_option("--model", a.model, "Model document")->required();
    sw->add_option("--from", a.from, "Start pose, comma-separated")->required();
    sw->add_option("--dir", a.dir, "Displacement direction, comma-separated")->required();
    sw->add_option("--max-delta", a.max_delta, "Largest displacement (default 0.3 L)");
    sw->add_option("--step", a.step, "Displacement increment (default 0.001 L)");
    sw->add_option("--rho", a.rho, "Actuator coordinates (default: compensated at --from)");

    auto* mp = app.add_subcommand("map", "Compliance map over a square workspace");
    mp->add_option("--model", a.model, "Model document")->required();
    mp->add_option("--grid", a.grid, "Points per side")->capture_default_str();
    mp->add_option("--half-width", a.half_width, "Half side of the square (default 0.45 L)");

    auto* ik = app.add_subcommand("invkin", "Actuator coordinates compensating the preload");
    ik->add_option("--model", a.model, "Model document")->required();
    ik->add_option("--pose", a.pose, "Platform pose, comma-separated");
    ik->add_option("--poses", a.poses_file, "File with one comma-separated pose per line");
    ik->add_option("--eps-f", a.eps_f, "Residual wrench tolerance")->capture_default_str();

    auto* bn = app.add_subcommand("bench", "Built-in benchmarks");
    bn->add_option("name", a.bench_name, "Benchmark name (orthoglide)")->required();
    bn->add_option("--p-factor", a.p_factor, "Workspace half-diagonal in units of L")->capture_default_str();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        std::string result;
        if (eq->parsed()) {
            result = cmd_equilibrium(a, g);
        } else if (st->parsed()) {
            result = cmd_stiffness(a, g);
        } else if (sw->parsed()) {
            result = cmd_sweep(a, g);
        } else if (mp->parsed()) {
            result = cmd_map(a, g);
        } else if (ik->parsed()) {
            result = cmd_invkin(a, g);
        } else {
            result = cmd_bench(a, g);
        }
        if (g.out.empty()) {
            out << result;
        } else {
            std::ofstream f(g.out, std::ios::binary);
            f << result;
            if (!f) {
                err << "error: cannot write '" << g.out << "'\n";
                return kExitUsage;
            }
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
        return kExitModel;
    } catch (const OutOfWorkspaceError& e) {
        err << "out of workspace: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const NonConvergenceError& e) {
        err << "no convergence: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const SingularityError& e) {
        err << "singular: " << e.what() << "\n";
        return kExitSingularity;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitNonConvergence;
    }
}

}  // namespace kinetostat
