#include "hystereact/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hystereact/csv.hpp"
#include "hystereact/slowfast.hpp"
#include "hystereact/transverse.hpp"

namespace hystereact {

namespace {

using nlohmann::json;

const double kPi = 3.14159265358979323846;

// ---- config helpers --------------------------------------------------

json need(const json& j, const char* key, const char* where) {
    if (!j.contains(key))
        throw ConfigError(std::string(where) + ": missing field '" + key + "'");
    return j.at(key);
}

double need_num(const json& j, const char* key, const char* where) {
    auto v = need(j, key, where);
    if (!v.is_number())
        throw ConfigError(std::string(where) + ": field '" + key + "' must be a number");
    return v.get<double>();
}

double opt_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<double>();
}

BranchPair parse_branches(const json& problem) {
    auto b = need(problem, "branches", "problem");
    std::string type = need(b, "type", "problem.branches").get<std::string>();
    if (type == "cubic") return cubic_branches();
    if (type == "affine")
        return affine_branches(need_num(b, "alpha", "branches"), need_num(b, "beta", "branches"),
                               need_num(b, "s1", "branches"), need_num(b, "c1", "branches"),
                               need_num(b, "s2", "branches"), need_num(b, "c2", "branches"));
    if (type == "constant")
        return constant_branches(need_num(b, "alpha", "branches"), need_num(b, "beta", "branches"),
                                 need_num(b, "v1", "branches"), need_num(b, "v2", "branches"));
    throw ConfigError("problem.branches.type: unknown type '" + type + "'");
}

std::function<double(double)> parse_phi(const json& problem, const BranchPair& bp) {
    auto p = need(problem, "phi", "problem");
    std::string type = need(p, "type", "problem.phi").get<std::string>();
    if (type == "affine") {
        double slope = need_num(p, "slope", "phi");
        double intercept = need_num(p, "intercept", "phi");
        // Convenience: intercept may be given relative to alpha.
        bool rel = p.value("relative_to_alpha", false);
        double base = rel ? bp.alpha + intercept : intercept;
        return [slope, base](double x) { return base + slope * x; };
    }
    if (type == "cosine") {
        double amp = need_num(p, "amplitude", "phi");
        double mean = need_num(p, "mean", "phi");
        return [amp, mean](double x) { return mean + amp * std::cos(kPi * x); };
    }
    if (type == "table") {
        auto xs = need(p, "x", "phi").get<std::vector<double>>();
        auto ys = need(p, "y", "phi").get<std::vector<double>>();
        if (xs.size() != ys.size() || xs.size() < 2)
            throw ConfigError("problem.phi: table needs matching x/y arrays of length >= 2");
        return [xs, ys](double x) {
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            std::size_t i = it == xs.begin() ? 1 : std::size_t(it - xs.begin());
            if (i >= xs.size()) i = xs.size() - 1;
            double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + t * (ys[i] - ys[i - 1]);
        };
    }
    throw ConfigError("problem.phi.type: unknown type '" + type + "'");
}

SolverParams parse_solver(const json& root) {
    auto s = need(root, "solver", "config");
    int n = int(need_num(s, "n_cells", "solver"));
    if (n < 1) throw ConfigError("solver.n_cells: must be positive");
    SolverParams p;
    p.grid = Grid(n);
    p.dt = need_num(s, "dt", "solver");
    if (!(p.dt > 0.0)) throw ConfigError("solver.dt: must be positive");
    p.t_end = need_num(s, "t_end", "solver");
    if (!(p.t_end >= 0.0)) throw ConfigError("solver.t_end: must be nonnegative");
    p.theta = opt_num(s, "theta", 0.5);
    p.save_stride = int(opt_num(s, "save_stride", 1));
    std::string policy = s.value("overshoot_policy", "halt");
    if (policy == "halt") {
        p.overshoot_policy = OvershootPolicy::Halt;
    } else if (policy == "subdivide") {
        p.overshoot_policy = OvershootPolicy::Subdivide;
    } else {
        throw ConfigError("solver.overshoot_policy: expected 'halt' or 'subdivide'");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    return p;
}

std::vector<double> sample_phi(const std::function<double(double)>& phi, const Grid& g) {
    std::vector<double> out(std::size_t(g.n_nodes()));
    for (int i = 0; i < g.n_nodes(); ++i) out[std::size_t(i)] = phi(g.x(i));
    return out;
}

SpatialConfig parse_xi0(const json& problem, const Grid& grid) {
    if (!problem.contains("xi0")) {
        if (problem.contains("abar"))
            return step_config(grid, problem.at("abar").get<double>());
        throw ConfigError("problem: needs 'xi0' or 'abar'");
    }
    auto x = problem.at("xi0");
    std::string type = need(x, "type", "problem.xi0").get<std::string>();
    if (type == "step") return step_config(grid, need_num(x, "abar", "xi0"));
    if (type == "uniform") {
        int v = int(need_num(x, "value", "xi0"));
        if (v != 1 && v != 2) throw ConfigError("problem.xi0.value: must be 1 or 2");
        return SpatialConfig(std::size_t(grid.n_nodes()), v);
    }
    throw ConfigError("problem.xi0.type: unknown type '" + type + "'");
}

// ---- output ----------------------------------------------------------

struct OutputWriter {
    std::filesystem::path dir;
    std::vector<std::pair<std::string, std::uint64_t>> files;

    explicit OutputWriter(const std::string& d) : dir(d) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ConfigError("output: cannot create directory '" + d + "'");
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("output: cannot open '" + name + "' for writing");
        f << content;
        files.emplace_back(name, fnv1a(content));
    }

    void manifest(const std::string& config_text, const std::string& status) {
        std::ostringstream m;
        m << "version " << kVersion << "\n";
        m << "status " << status << "\n";
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(config_text)));
        m << "config_hash " << buf << "\n";
        for (const auto& [name, hash] : files) {
            std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
            m << "file " << name << " " << buf << "\n";
        }
        std::ofstream f(dir / "manifest.txt", std::ios::binary);
        f << m.str();
    }
};

std::string traj_csv(const Trajectory& traj, const Grid& grid) {
    std::string out = "t,x,u,v,config\n";
    for (const auto& s : traj.snapshots)
        for (std::size_t i = 0; i < s.n_nodes(); ++i) {
            out += fmt(s.t);
            out += ',';
            out += fmt(grid.nodes[i]);
            out += ',';
            out += fmt(s.u[i]);
            out += ',';
            out += fmt(s.v[i]);
            out += ',';
            out += fmt(s.relays[i].config);
            out += '\n';
        }
    return out;
}

std::string slowfast_csv(const SlowFastTrajectory& traj, const Grid& grid) {
    std::string out = "t,x,u,v\n";
    for (const auto& s : traj.snapshots)
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            out += fmt(s.t);
            out += ',';
            out += fmt(grid.nodes[i]);
            out += ',';
            out += fmt(s.u[i]);
            out += ',';
            out += fmt(s.v[i]);
            out += '\n';
        }
    return out;
}

int status_exit(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return 0;
        case RunStatus::TransversalityLost: return 2;
        case RunStatus::DomainViolationHalt: return 3;
    }
    return 1;
}

// ---- per-kind drivers ------------------------------------------------

int run_simulate(const json& cfg, const std::string& config_text, OutputWriter& out) {
    auto problem = need(cfg, "problem", "config");
    auto bp = parse_branches(problem);
    auto params = parse_solver(cfg);
    auto phi = sample_phi(parse_phi(problem, bp), params.grid);

    Trajectory traj;
    if (problem.contains("abar") && !problem.contains("xi0")) {
        double abar = need_num(problem, "abar", "problem");
        try {
            traj = solve_prototype(phi, abar, bp, params);
        } catch (const InconsistentInitialData& e) {
            throw ConfigError(std::string("problem: ") + e.what());
        }
    } else {
        auto xi0 = parse_xi0(problem, params.grid);
        try {
            traj = solve(phi, xi0, bp, params);
        } catch (const InconsistentInitialData& e) {
            throw ConfigError(std::string("problem: ") + e.what());
        }
    }

    out.write("traj.csv", traj_csv(traj, params.grid));
    if (traj.track) out.write("track.csv", traj.track->csv());
    out.manifest(config_text, to_string(traj.status));
    return status_exit(traj.status);
}

NullclineModel parse_nullcline(const json& problem) {
    auto n = need(problem, "nullcline", "problem");
    std::string type = need(n, "type", "problem.nullcline").get<std::string>();
    if (type != "cubic") throw ConfigError("problem.nullcline.type: unknown type '" + type + "'");
    auto m = cubic_nullcline();
    detect_folds(m, -2.0, 2.0, 400);
    return m;
}

Fn2 parse_reaction(const json& cfg) {
    std::string f = cfg.contains("slowfast") ? cfg.at("slowfast").value("f", "v") : "v";
    if (f == "v") return [](double, double v) { return v; };
    if (f == "one") return [](double, double) { return 1.0; };
    throw ConfigError("slowfast.f: expected 'v' or 'one'");
}

int run_slowfast(const json& cfg, const std::string& config_text, OutputWriter& out) {
    auto problem = need(cfg, "problem", "config");
    auto model = parse_nullcline(problem);
    auto bp = extract_branches(model, model.folds.alpha - 1.5, model.folds.beta + 1.5, 240);
    auto params = parse_solver(cfg);
    auto phi = sample_phi(parse_phi(problem, bp), params.grid);
    auto xi0 = parse_xi0(problem, params.grid);

    double epsilon = need_num(need(cfg, "slowfast", "config"), "epsilon", "slowfast");
    std::vector<double> v0(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        v0[i] = (xi0[i] == 1) ? bp.eval1(phi[i], kOvershootTol) : bp.eval2(phi[i], kOvershootTol);

    auto traj = solve_slowfast(phi, v0, model, parse_reaction(cfg), epsilon, params);
    out.write("traj.csv", slowfast_csv(traj, params.grid));
    out.manifest(config_text, to_string(traj.status));
    return status_exit(traj.status);
}

int run_verify_branch(const json& cfg, const std::string& config_text, OutputWriter& out) {
    auto problem = need(cfg, "problem", "config");
    auto bp = parse_branches(problem);
    auto v = need(cfg, "verify_branch", "config");
    std::string which = need(v, "branch", "verify_branch").get<std::string>();
    double sigma = need_num(v, "sigma", "verify_branch");
    double U = need_num(v, "U", "verify_branch");
    int samples = int(opt_num(v, "samples", 32));

    BranchConditionReport rep;
    if (which == "h1") {
        rep = verify_branch_condition(bp.h1, bp.beta, CutoffSide::UpperBeta, sigma, U, samples);
    } else if (which == "h2") {
        rep = verify_branch_condition(bp.h2, bp.alpha, CutoffSide::LowerAlpha, sigma, U, samples);
    } else {
        throw ConfigError("verify_branch.branch: expected 'h1' or 'h2'");
    }

    std::string report = "branch " + which + "\nsigma " + fmt(sigma) + "\nM_estimate " +
                         fmt(rep.m_estimate) + "\nviolated " + (rep.violated ? "true" : "false") +
                         "\n";
    for (double m : rep.m_per_level) report += "level_sup " + fmt(m) + "\n";
    out.write("report.txt", report);
    out.manifest(config_text, "completed");
    return 0;
}

int run_kernel_check(const json& cfg, const std::string& config_text, OutputWriter& out) {
    auto params = parse_solver(cfg);
    auto k = need(cfg, "kernel_check", "config");
    int source = int(opt_num(k, "source_node", params.grid.n_nodes() / 2));
    auto times = need(k, "times", "kernel_check").get<std::vector<double>>();
    if (times.empty()) throw ConfigError("kernel_check.times: must be nonempty");

    auto rep = heat_kernel_bound_check(params, source, times);
    std::string csv = "t,sup,sup_scaled\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        csv += fmt(rep.times[i]);
        csv += ',';
        csv += fmt(rep.sup_values[i]);
        csv += ',';
        csv += fmt(rep.scaled_values[i]);
        csv += '\n';
    }
    out.write("kernel.csv", csv);
    out.write("report.txt", "bound_constant " + fmt(rep.bound_constant) + "\nbounded " +
                                (rep.bounded ? "true" : "false") + "\n");
    out.manifest(config_text, "completed");
    return 0;
}

int run_compare(const json& cfg, const std::string& config_text, OutputWriter& out) {
    auto problem = need(cfg, "problem", "config");
    auto model = parse_nullcline(problem);
    auto bp = cubic_branches();
    auto params = parse_solver(cfg);
    auto phi = sample_phi(parse_phi(problem, bp), params.grid);
    double abar = need_num(problem, "abar", "problem");
    double epsilon = need_num(need(cfg, "slowfast", "config"), "epsilon", "slowfast");

    auto hyst = solve_prototype(phi, abar, bp, params);
    auto xi0 = step_config(params.grid, abar);
    std::vector<double> v0(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        v0[i] = (xi0[i] == 1) ? bp.eval1(phi[i], kOvershootTol) : bp.eval2(phi[i], kOvershootTol);
    auto slow = solve_slowfast(phi, v0, model, [](double, double v) { return v; }, epsilon, params);

    auto cmp = compare_to_hysteresis(slow, hyst, model, 0.0, 4.0 * params.grid.h);
    std::string report = "epsilon " + fmt(epsilon) + "\nsup_dev_u " + fmt(cmp.sup_dev_u) +
                         "\nsup_dev_v " + fmt(cmp.sup_dev_v) + "\nmax_switch_offset " +
                         fmt(cmp.max_switch_offset) + "\nswitched_both " +
                         fmt(cmp.switched_both) + "\nswitched_mismatch " +
                         fmt(cmp.switched_mismatch) + "\n";
    out.write("report.txt", report);
    out.manifest(config_text, to_string(hyst.status));
    return status_exit(hyst.status);
}

// ---- sweep -----------------------------------------------------------

struct SweepRow {
    double axis_value = 0.0;
    std::string status = "completed";
    std::map<std::string, double> cols;
};

void run_pool(int jobs, int n_tasks, const std::function<void(int)>& task) {
    if (jobs < 1) jobs = 1;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(jobs, n_tasks); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

int run_sweep(const json& cfg, const std::string& config_text, OutputWriter& out, int jobs) {
    auto sw = need(cfg, "sweep", "config");
    std::string axis = need(sw, "axis", "sweep").get<std::string>();
    auto values = need(sw, "values", "sweep").get<std::vector<double>>();
    if (values.empty()) throw ConfigError("sweep.values: must be nonempty");

    auto problem = need(cfg, "problem", "config");
    auto bp = parse_branches(problem);
    auto params = parse_solver(cfg);
    double abar = need_num(problem, "abar", "problem");
    auto phi_fn = parse_phi(problem, bp);

    std::vector<SweepRow> rows(values.size());
    std::vector<std::string> header;

    if (axis == "perturbation") {
        header = {"lemma_lhs", "lemma_rhs", "lemma_holds", "b_end"};
        auto base = solve_prototype(sample_phi(phi_fn, params.grid), abar, bp, params);
        if (base.status != RunStatus::Completed)
            throw ConfigError("sweep: unperturbed run did not complete");
        run_pool(jobs, int(values.size()), [&](int i) {
            SweepRow& row = rows[std::size_t(i)];
            row.axis_value = values[std::size_t(i)];
            try {
                std::vector<double> phi(std::size_t(params.grid.n_nodes()));
                for (int k = 0; k < params.grid.n_nodes(); ++k)
                    phi[std::size_t(k)] = phi_fn(params.grid.x(k)) +
                                          row.axis_value * std::cos(kPi * params.grid.x(k));
                auto pert = solve_prototype(phi, abar, bp, params);
                row.status = to_string(pert.status);
                auto rep = check_lemma_b_estimate(base, pert);
                row.cols["lemma_lhs"] = rep.lhs;
                row.cols["lemma_rhs"] = rep.rhs;
                row.cols["lemma_holds"] = rep.holds ? 1.0 : 0.0;
                row.cols["b_end"] = pert.track->b_values.back();
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        });
    } else if (axis == "grid") {
        header = {"b_end"};
        run_pool(jobs, int(values.size()), [&](int i) {
            SweepRow& row = rows[std::size_t(i)];
            row.axis_value = values[std::size_t(i)];
            try {
                SolverParams p = params;
                p.grid = Grid(int(row.axis_value));
                auto traj = solve_prototype(sample_phi(phi_fn, p.grid), abar, bp, p);
                row.status = to_string(traj.status);
                row.cols["b_end"] = traj.track->b_values.back();
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        });
    } else if (axis == "epsilon") {
        header = {"sup_dev_u", "sup_dev_v", "max_switch_offset"};
        auto model = parse_nullcline(problem);
        auto phi = sample_phi(phi_fn, params.grid);
        auto hyst = solve_prototype(phi, abar, bp, params);
        if (hyst.status != RunStatus::Completed)
            throw ConfigError("sweep: hysteresis reference run did not complete");
        auto xi0 = step_config(params.grid, abar);
        std::vector<double> v0(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i)
            v0[i] = (xi0[i] == 1) ? bp.eval1(phi[i], kOvershootTol)
                                  : bp.eval2(phi[i], kOvershootTol);
        run_pool(jobs, int(values.size()), [&](int i) {
            SweepRow& row = rows[std::size_t(i)];
            row.axis_value = values[std::size_t(i)];
            try {
                auto slow = solve_slowfast(phi, v0, model, [](double, double v) { return v; },
                                           row.axis_value, params);
                auto cmp = compare_to_hysteresis(slow, hyst, model, 0.0, 4.0 * params.grid.h);
                row.cols["sup_dev_u"] = cmp.sup_dev_u;
                row.cols["sup_dev_v"] = cmp.sup_dev_v;
                row.cols["max_switch_offset"] = cmp.max_switch_offset;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        });
    } else {
        throw ConfigError("sweep.axis: expected 'perturbation', 'epsilon', or 'grid'");
    }

    std::string csv = "axis,status";
    for (const auto& h : header) csv += "," + h;
    csv += '\n';
    for (const auto& row : rows) {
        csv += fmt(row.axis_value);
        csv += ',';
        csv += row.status;
        for (const auto& h : header) {
            csv += ',';
            auto it = row.cols.find(h);
            csv += it == row.cols.end() ? std::string("nan") : fmt(it->second);
        }
        csv += '\n';
    }
    out.write("sweep.csv", csv);
    out.manifest(config_text, "completed");
    return 0;
}

} // namespace

int run_experiment(const std::string& config_text, const std::string& kind,
                   const std::string& out_dir, int jobs) {
    try {
        json cfg;
        try {
            cfg = json::parse(config_text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        std::string k = kind.empty() ? cfg.value("kind", "") : kind;
        if (k.empty()) throw ConfigError("config: missing 'kind' (and none given on the command line)");
        if (!kind.empty() && cfg.contains("kind") && cfg.at("kind").get<std::string>() != kind)
            throw ConfigError("config: 'kind' disagrees with the command line");

        std::string dir = out_dir;
        if (dir.empty() && cfg.contains("output"))
            dir = cfg.at("output").value("directory", "");
        if (dir.empty()) dir = "out";
        OutputWriter out(dir);

        if (jobs <= 0) {
            if (const char* env = std::getenv("HYSTEREACT_JOBS")) jobs = std::atoi(env);
            if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
            if (jobs <= 0) jobs = 1;
        }

        if (k == "simulate") return run_simulate(cfg, config_text, out);
        if (k == "slowfast") return run_slowfast(cfg, config_text, out);
        if (k == "verify-branch") return run_verify_branch(cfg, config_text, out);
        if (k == "sweep") return run_sweep(cfg, config_text, out, jobs);
        if (k == "compare") return run_compare(cfg, config_text, out);
        if (k == "kernel-check") return run_kernel_check(cfg, config_text, out);
        throw ConfigError("kind: unknown experiment '" + k + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DomainViolation& e) {
        std::cerr << "domain violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(const CliOptions& opts) {
    std::ifstream f(opts.config_path, std::ios::binary);
    if (!f) {
        std::cerr << "config error: cannot read '" << opts.config_path << "'\n";
        return 1;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return run_experiment(ss.str(), opts.kind, opts.out_dir, opts.jobs);
}

} // namespace hystereact
