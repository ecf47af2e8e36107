#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hjlab/config.hpp"
#include "hjlab/estimates.hpp"
#include "hjlab/experiments.hpp"
#include "hjlab/pathwise.hpp"

using namespace hjlab;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, failure = 1, bad_config = 2, refused = 3, report_failed = 4 };

struct Run {
    ExperimentConfig cfg;
    bool quiet = false;
};

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

json manifest(const ExperimentConfig& cfg, const char* command) {
    json m;
    m["command"] = command;
    m["config"] = json::parse(resolved_json(cfg));
    return m;
}

std::string path_info(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = cfg.path.kind;
    if (cfg.path.kind == "brownian") {
        j["seed"] = cfg.path.seed;
        j["dt"] = cfg.path.dt;
        j["pipeline"] = cfg.path.pipeline;
    }
    return j.dump();
}

Trajectory solve(const ExperimentConfig& cfg, const GridFn& u0, const Hamiltonian& H, const Path& p) {
    if (cfg.path.kind == "brownian" && cfg.path.pipeline == "skeleton")
        return solve_skeleton_trajectory(u0, H, p, record_times(cfg), solve_options(cfg));
    return solve_pathwise(u0, H, p, record_times(cfg), solve_options(cfg));
}

// the trajectory directory manifest gains the resolved config
void write_solution(const fs::path& dir, const ExperimentConfig& cfg, const Trajectory& traj, const char* command) {
    write_trajectory(dir.string(), traj, path_info(cfg));
    std::ifstream is(dir / "manifest.json");
    json m = json::parse(is);
    is.close();
    m["command"] = command;
    m["config"] = json::parse(resolved_json(cfg));
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_solve(const Run& run) {
    const auto& cfg = run.cfg;
    const GridFn u0 = make_datum(cfg);
    const Hamiltonian H = make_hamiltonian(cfg, u0);
    const Trajectory traj = solve(cfg, u0, H, make_path(cfg));
    write_solution(cfg.output, cfg, traj, "solve");
    if (!run.quiet)
        std::cout << "solve: " << traj.snapshots.size() << " snapshots, " << traj.operator_calls
                  << " operator calls -> " << cfg.output << "\n";
    return ok;
}

// sign of a monotone path, 0 otherwise
int monotone_sign(const Path& p) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p.values()[i] < p.values()[i - 1]) up = false;
        if (p.values()[i] > p.values()[i - 1]) down = false;
    }
    if (up && down) return 0;
    return up ? 1 : down ? -1 : 0;
}

int cmd_verify(const Run& run) {
    const auto& cfg = run.cfg;
    const GridFn u0 = make_datum(cfg);
    const Hamiltonian H = make_hamiltonian(cfg, u0);
    const Path p = make_path(cfg);
    Trajectory traj = solve(cfg, u0, H, p);
    if (cfg.verify.perturb != 0)
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
            if (traj.snapshot_times[k] == 0) continue;
            std::vector<double> v = traj.snapshots[k].values();
            for (double& x : v) x *= 1 + cfg.verify.perturb;
            traj.snapshots[k] = GridFn(traj.snapshots[k].grid(), std::move(v));
        }

    const int sign = monotone_sign(p);
    std::vector<std::string> checks = cfg.verify.checks;
    if (std::find(checks.begin(), checks.end(), "auto") != checks.end()) {
        checks.clear();
        if (sign != 0) checks = {"regularizing", "propagation"};
        checks.push_back("intermittent");
        checks.push_back("lipschitz");
    }
    const FlowDirection dir = sign < 0 ? FlowDirection::minus : FlowDirection::plus;
    if (sign == 0)
        for (const auto& c : checks)
            if (c == "regularizing" || c == "propagation")
                throw ConfigError("verify: " + c + " needs a monotone nonconstant path");

    std::vector<EstimateReport> reports;
    auto append = [&](std::vector<EstimateReport> rs) { reports.insert(reports.end(), rs.begin(), rs.end()); };
    for (const auto& c : checks) {
        if (c == "regularizing") {
            const auto C = cfg.verify.C ? CurvatureConstant::finite(*cfg.verify.C) : CurvatureConstant::infinite();
            append(check_regularizing(traj, H, C, dir));
        } else if (c == "propagation") {
            const double C0 = H.degenerate() ? 0.0 : propagation_constant(u0, H, dir);
            append(check_propagation(traj, H, C0, dir));
        } else if (c == "intermittent") {
            append(check_intermittent(traj, H, p));
        } else if (c == "lipschitz") {
            append(check_lipschitz_decay(traj, H, p));
        }
    }

    const fs::path out = cfg.output;
    write_solution(out / "trajectory", cfg, traj, "verify");
    {
        std::ofstream os(out / "reports.csv");
        if (!os) throw std::runtime_error("cannot write reports in " + out.string());
        write_reports_csv(os, reports);
    }
    write_text(out / "summary.json", reports_summary_json(reports) + "\n");
    write_text(out / "manifest.json", manifest(cfg, "verify").dump(2) + "\n");

    const ReportSummary s = summarize(reports);
    if (!s.ok()) {
        std::cerr << "verify: " << s.failed << " of " << s.total << " reports failed\n";
        write_reports_csv(std::cerr, [&] {
            std::vector<EstimateReport> bad;
            for (const auto& r : reports)
                if (!r.skipped && !r.pass) bad.push_back(r);
            return bad;
        }());
        return report_failed;
    }
    if (!run.quiet)
        std::cout << "verify: " << s.passed << " passed, " << s.skipped << " skipped of " << s.total << " -> "
                  << cfg.output << "\n";
    return ok;
}

int cmd_montecarlo(const Run& run) {
    const auto& cfg = run.cfg;
    const fs::path out = cfg.output;
    fs::create_directories(out);
    json summary;
    bool pass = true;
    if (cfg.path.kind == "brownian") {
        MonteCarloOptions o;
        o.n_paths = cfg.montecarlo.n_paths;
        o.seed0 = cfg.path.seed;
        o.T = cfg.path.T;
        o.dt = cfg.path.dt;
        o.grid_n = cfg.grid.n;
        o.eps_conv = cfg.montecarlo.eps_conv;
        o.record_dt = cfg.montecarlo.record_dt;
        o.threads = cfg.montecarlo.threads;
        const LimitEnsemble e = random_limit_montecarlo(o);
        const EnsembleVerdict v = judge(e, cfg.montecarlo.thresholds);
        std::ofstream os(out / "ensemble.csv");
        if (!os) throw std::runtime_error("cannot write ensemble in " + out.string());
        write_ensemble_csv(os, e);
        int converged = 0;
        for (const auto& c : e.converged_at) converged += c.has_value();
        summary["n_paths"] = e.limits.size();
        summary["mean"] = e.mean;
        summary["variance"] = e.variance;
        summary["ks"] = e.symmetry_stat;
        summary["converged"] = converged;
        summary["variance_ok"] = v.variance_ok;
        summary["mean_ok"] = v.mean_ok;
        summary["symmetry_ok"] = v.symmetry_ok;
        pass = v.ok();
    } else {
        // a deterministic path gives one limit whatever the ensemble size
        const Path p = make_path(cfg);
        const GridFn u = solve_skeleton(tent_datum(cfg.grid.n), Hamiltonian::abs(1.25), p, p.T());
        const double limit = 0.5 * (u.max() + u.min());
        std::ofstream os(out / "ensemble.csv");
        if (!os) throw std::runtime_error("cannot write ensemble in " + out.string());
        os << "seed,limit,final_oscillation,converged_at\n";
        os << "," << fmt17(limit) << "," << fmt17(oscillation(u)) << ",";
        if (oscillation(u) <= cfg.montecarlo.eps_conv) os << fmt17(p.T());
        os << "\n";
        summary["n_paths"] = 1;
        summary["mean"] = limit;
        summary["variance"] = 0.0;
        summary["final_oscillation"] = oscillation(u);
    }
    summary["pass"] = pass;
    write_text(out / "summary.json", summary.dump(2) + "\n");
    write_text(out / "manifest.json", manifest(cfg, "montecarlo").dump(2) + "\n");
    if (!run.quiet)
        std::cout << "montecarlo: mean " << summary["mean"].get<double>() << ", variance "
                  << summary["variance"].get<double>() << (pass ? "" : " (thresholds not met)") << " -> "
                  << cfg.output << "\n";
    return pass ? ok : report_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathwise Hamilton-Jacobi laboratory"};
    std::string config_file, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> n;
    bool quiet = false;
    app.add_option("--config", config_file, "JSON experiment config");
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--seed", seed, "path seed (overrides the config)");
    app.add_option("--n", n, "grid size (overrides the config)");
    app.add_flag("--quiet", quiet, "no progress output");
    app.fallthrough();
    auto* solve_cmd = app.add_subcommand("solve", "solve and write the trajectory");
    auto* verify_cmd = app.add_subcommand("verify", "solve and check the regularity estimates");
    auto* mc_cmd = app.add_subcommand("montecarlo", "random limit ensemble for the tent datum");
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bad_config;
    }

    try {
        Run run;
        if (!config_file.empty()) run.cfg = load_config(config_file);
        if (!out.empty()) run.cfg.output = out;
        if (seed) run.cfg.path.seed = *seed;
        if (n) run.cfg.grid.n = *n;
        run.quiet = quiet;
        validate(run.cfg);
        if (solve_cmd->parsed()) return cmd_solve(run);
        if (verify_cmd->parsed()) return cmd_verify(run);
        if (mc_cmd->parsed()) return cmd_montecarlo(run);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bad_config;
    } catch (const SolverRefusal& e) {
        std::cerr << "solver refused: " << e.what() << "\n";
        return refused;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bad_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}
