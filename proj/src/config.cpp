#include "hjlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hjlab {

using json = nlohmann::ordered_json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw ConfigError("unknown key " + where + "." + it.key());
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    T v{};
    read(j, key, v, where);
    out = v;
}

void need(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool finite_pos(double x) { return std::isfinite(x) && x > 0; }

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j, "config",
              {"grid", "hamiltonian", "path", "datum", "times", "tolerances", "verify", "montecarlo", "output"});
    ExperimentConfig c;
    if (j.contains("grid")) {
        const json& g = j["grid"];
        only_keys(g, "grid", {"n", "period"});
        read(g, "n", c.grid.n, "grid");
        read(g, "period", c.grid.period, "grid");
    }
    if (j.contains("hamiltonian")) {
        const json& h = j["hamiltonian"];
        only_keys(h, "hamiltonian", {"name", "a", "b", "P", "m"});
        read(h, "name", c.hamiltonian.name, "hamiltonian");
        read(h, "a", c.hamiltonian.a, "hamiltonian");
        read(h, "b", c.hamiltonian.b, "hamiltonian");
        read_opt(h, "P", c.hamiltonian.P, "hamiltonian");
        read(h, "m", c.hamiltonian.m, "hamiltonian");
    }
    if (j.contains("path")) {
        const json& p = j["path"];
        only_keys(p, "path", {"kind", "slope", "T", "points", "seed", "dt", "pipeline"});
        read(p, "kind", c.path.kind, "path");
        read(p, "slope", c.path.slope, "path");
        read(p, "T", c.path.T, "path");
        read(p, "points", c.path.points, "path");
        read(p, "seed", c.path.seed, "path");
        read(p, "dt", c.path.dt, "path");
        read(p, "pipeline", c.path.pipeline, "path");
    }
    if (j.contains("datum")) {
        const json& d = j["datum"];
        only_keys(d, "datum", {"name", "amplitude", "k", "file"});
        read(d, "name", c.datum.name, "datum");
        read(d, "amplitude", c.datum.amplitude, "datum");
        read(d, "k", c.datum.k, "datum");
        read(d, "file", c.datum.file, "datum");
    }
    read(j, "times", c.times, "config");
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        only_keys(t, "tolerances", {"maximization", "merge_tol", "strict"});
        read(t, "maximization", c.tolerances.maximization, "tolerances");
        read(t, "merge_tol", c.tolerances.merge_tol, "tolerances");
        read(t, "strict", c.tolerances.strict, "tolerances");
    }
    if (j.contains("verify")) {
        const json& v = j["verify"];
        only_keys(v, "verify", {"checks", "C", "perturb"});
        read(v, "checks", c.verify.checks, "verify");
        read_opt(v, "C", c.verify.C, "verify");
        read(v, "perturb", c.verify.perturb, "verify");
    }
    if (j.contains("montecarlo")) {
        const json& m = j["montecarlo"];
        only_keys(m, "montecarlo", {"n_paths", "eps_conv", "record_dt", "threads", "thresholds"});
        read(m, "n_paths", c.montecarlo.n_paths, "montecarlo");
        read(m, "eps_conv", c.montecarlo.eps_conv, "montecarlo");
        read(m, "record_dt", c.montecarlo.record_dt, "montecarlo");
        read(m, "threads", c.montecarlo.threads, "montecarlo");
        if (m.contains("thresholds")) {
            const json& t = m["thresholds"];
            only_keys(t, "montecarlo.thresholds", {"min_variance", "max_mean_offset", "max_ks"});
            auto& th = c.montecarlo.thresholds;
            read(t, "min_variance", th.min_variance, "montecarlo.thresholds");
            read(t, "max_mean_offset", th.max_mean_offset, "montecarlo.thresholds");
            read(t, "max_ks", th.max_ks, "montecarlo.thresholds");
        }
    }
    read(j, "output", c.output, "config");
    return c;
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot read config " + file);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

static double path_horizon(const PathSpec& p) {
    if (p.kind == "zigzag") return p.points.empty() ? 0.0 : p.points.back().first;
    return p.T;
}

void validate(const ExperimentConfig& c) {
    need(c.grid.n >= 8, "grid: n must be >= 8, got " + std::to_string(c.grid.n));
    need(finite_pos(c.grid.period), "grid: period must be positive");

    const auto& h = c.hamiltonian;
    need(h.name == "quadratic" || h.name == "quartic" || h.name == "abs",
         "hamiltonian: name must be quadratic, quartic or abs, got " + h.name);
    need(finite_pos(h.a), "hamiltonian: a must be positive");
    need(std::isfinite(h.b) && h.b >= 0, "hamiltonian: b must be >= 0");
    need(!h.P || finite_pos(*h.P), "hamiltonian: P must be positive");
    need(h.m >= 16, "hamiltonian: m must be >= 16");

    const auto& p = c.path;
    if (p.kind == "ramp") {
        need(std::isfinite(p.slope), "path: slope must be finite");
        need(finite_pos(p.T), "path: T must be positive");
    } else if (p.kind == "zigzag") {
        need(p.points.size() >= 2, "path: zigzag needs at least two points");
        need(p.points.front().first == 0 && p.points.front().second == 0, "path: zigzag must start at (0, 0)");
        for (std::size_t i = 1; i < p.points.size(); ++i)
            need(p.points[i].first > p.points[i - 1].first && std::isfinite(p.points[i].second),
                 "path: zigzag times must increase strictly");
    } else if (p.kind == "brownian") {
        need(finite_pos(p.T), "path: T must be positive");
        need(finite_pos(p.dt) && p.dt <= p.T, "path: dt must lie in (0, T]");
        need(p.pipeline == "skeleton" || p.pipeline == "full", "path: pipeline must be skeleton or full");
    } else {
        throw ConfigError("path: kind must be ramp, zigzag or brownian, got " + p.kind);
    }

    const auto& d = c.datum;
    need(d.name == "cos" || d.name == "sawtooth" || d.name == "tent" || d.name == "csv",
         "datum: name must be cos, sawtooth, tent or csv, got " + d.name);
    need(std::isfinite(d.amplitude), "datum: amplitude must be finite");
    need(d.k >= 1, "datum: k must be >= 1");
    need(d.name != "csv" || !d.file.empty(), "datum: csv needs a file");

    const double T = path_horizon(p);
    for (double t : c.times) need(t >= 0 && t <= T, "times: " + fmt17(t) + " outside [0, T]");

    try {
        parse_maximization(c.tolerances.maximization);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("tolerances: ") + e.what());
    }
    for (const auto& name : c.verify.checks)
        need(name == "auto" || name == "regularizing" || name == "propagation" || name == "intermittent" ||
                 name == "lipschitz",
             "verify: unknown check " + name);
    need(!c.verify.C || (std::isfinite(*c.verify.C) && *c.verify.C >= 0), "verify: C must be >= 0");
    need(std::isfinite(c.verify.perturb), "verify: perturb must be finite");

    const auto& m = c.montecarlo;
    need(m.n_paths >= 1, "montecarlo: n_paths must be >= 1, got " + std::to_string(m.n_paths));
    need(p.kind != "brownian" || m.n_paths >= 100,
         "montecarlo: Brownian ensembles need n_paths >= 100, got " + std::to_string(m.n_paths));
    need(finite_pos(m.eps_conv), "montecarlo: eps_conv must be positive");
    need(finite_pos(m.record_dt), "montecarlo: record_dt must be positive");
    need(m.threads >= 0, "montecarlo: threads must be >= 0");
    need(!c.output.empty(), "output: must not be empty");
}

std::string resolved_json(const ExperimentConfig& c) {
    json j;
    j["grid"] = {{"n", c.grid.n}, {"period", c.grid.period}};
    const auto& h = c.hamiltonian;
    j["hamiltonian"] = {{"name", h.name}, {"a", h.a}, {"b", h.b}, {"P", nullptr}, {"m", h.m}};
    if (h.P) j["hamiltonian"]["P"] = *h.P;
    const auto& p = c.path;
    j["path"] = {{"kind", p.kind}};
    if (p.kind == "ramp") {
        j["path"]["slope"] = p.slope;
        j["path"]["T"] = p.T;
    } else if (p.kind == "zigzag") {
        j["path"]["points"] = p.points;
    } else {
        j["path"]["seed"] = p.seed;
        j["path"]["T"] = p.T;
        j["path"]["dt"] = p.dt;
        j["path"]["pipeline"] = p.pipeline;
    }
    const auto& d = c.datum;
    j["datum"] = {{"name", d.name}, {"amplitude", d.amplitude}, {"k", d.k}, {"file", d.file}};
    j["times"] = record_times(c);
    j["tolerances"] = {{"maximization", c.tolerances.maximization},
                       {"merge_tol", c.tolerances.merge_tol},
                       {"strict", c.tolerances.strict}};
    j["verify"] = {{"checks", c.verify.checks}, {"C", nullptr}, {"perturb", c.verify.perturb}};
    if (c.verify.C) j["verify"]["C"] = *c.verify.C;
    const auto& m = c.montecarlo;
    j["montecarlo"] = {{"n_paths", m.n_paths},
                       {"eps_conv", m.eps_conv},
                       {"record_dt", m.record_dt},
                       {"threads", m.threads},
                       {"thresholds",
                        {{"min_variance", m.thresholds.min_variance},
                         {"max_mean_offset", m.thresholds.max_mean_offset},
                         {"max_ks", m.thresholds.max_ks}}}};
    j["output"] = c.output;
    return j.dump(2);
}

GridFn make_datum(const ExperimentConfig& c) {
    const auto& d = c.datum;
    if (d.name == "csv") {
        GridFn u = read_csv(d.file, c.grid.period);
        if (u.size() != c.grid.n)
            throw ConfigError("datum: " + d.file + " has " + std::to_string(u.size()) + " nodes, grid.n is " +
                              std::to_string(c.grid.n));
        return u;
    }
    const PeriodicGrid1D g(c.grid.n, c.grid.period);
    const double L = c.grid.period, a = d.amplitude;
    const double two_pi = 2 * std::acos(-1.0);
    if (d.name == "cos") return sample([&](double x) { return a * std::cos(two_pi * d.k * x / L); }, g);
    if (d.name == "sawtooth") return sample([&](double x) { return a * std::min(x, L - x); }, g);
    return sample([&](double x) { return a * (1 - std::abs(x - L / 2)); }, g);
}

Hamiltonian make_hamiltonian(const ExperimentConfig& c, const GridFn& u0) {
    const auto& h = c.hamiltonian;
    const double P = h.P ? *h.P : std::max(1.0, 1.25 * lipschitz_constant(u0));
    if (h.name == "abs") return Hamiltonian::abs(P);
    if (h.name == "quartic") return Hamiltonian::quartic(h.a, h.b, P, h.m);
    return Hamiltonian::quadratic(h.a, P, h.m);
}

Path make_path(const ExperimentConfig& c) {
    const auto& p = c.path;
    if (p.kind == "ramp") return piecewise_linear({{0.0, 0.0}, {p.T, p.slope * p.T}});
    if (p.kind == "zigzag") return piecewise_linear(p.points);
    return sample_brownian(p.seed, p.T, p.dt);
}

std::vector<double> record_times(const ExperimentConfig& c) {
    if (!c.times.empty()) return c.times;
    return {path_horizon(c.path)};
}

SolveOptions solve_options(const ExperimentConfig& c) {
    SolveOptions o;
    o.hopf_lax.maximization = parse_maximization(c.tolerances.maximization);
    o.merge_tol = c.tolerances.merge_tol;
    o.strict = c.tolerances.strict;
    return o;
}

}  // namespace hjlab
