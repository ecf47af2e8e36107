#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hjlab/experiments.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/paths.hpp"
#include "hjlab/pathwise.hpp"

namespace hjlab {

// invalid experiment configuration; the CLI maps it to exit code 2
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    int n = 512;
    double period = 1.0;
};

struct HamiltonianSpec {
    std::string name = "quadratic";  // quadratic | quartic | abs
    double a = 1.0, b = 0.0;
    std::optional<double> P;  // default 1.25 Lip(u0), at least 1
    int m = 65536;
};

struct PathSpec {
    std::string kind = "ramp";  // ramp | zigzag | brownian
    double slope = 1.0;         // ramp
    double T = 1.0;             // ramp, brownian
    std::vector<std::pair<double, double>> points;  // zigzag
    std::uint64_t seed = 42;
    double dt = 1e-3;
    std::string pipeline = "skeleton";  // brownian: skeleton | full
};

struct DatumSpec {
    std::string name = "cos";  // cos | sawtooth | tent | csv
    double amplitude = 1.0;
    int k = 1;                 // cos frequency
    std::string file;          // csv
};

struct ToleranceSpec {
    std::string maximization = "eno";
    double merge_tol = -1;
    bool strict = false;
};

struct VerifySpec {
    std::vector<std::string> checks{"auto"};  // auto | regularizing | propagation | intermittent | lipschitz
    std::optional<double> C;                   // curvature constant for regularizing, infinite if unset
    double perturb = 0.0;                      // scale snapshots at t > 0 by 1 + perturb
};

// seeds path.seed .. path.seed + n_paths - 1 with path.T, path.dt and grid.n; the datum and
// Hamiltonian are fixed to the tent and |p|
struct MonteCarloSpec {
    int n_paths = 500;
    double eps_conv = 1e-2;
    double record_dt = 0.05;
    int threads = 0;
    EnsembleThresholds thresholds;
};

struct ExperimentConfig {
    GridSpec grid;
    HamiltonianSpec hamiltonian;
    PathSpec path;
    DatumSpec datum;
    std::vector<double> times;  // empty: {T}
    ToleranceSpec tolerances;
    VerifySpec verify;
    MonteCarloSpec montecarlo;
    std::string output = "out";
};

// unknown keys, wrong types and violated invariants raise ConfigError
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& file);
// throws ConfigError naming the first violated invariant
void validate(const ExperimentConfig& cfg);
// full resolved config including defaults
std::string resolved_json(const ExperimentConfig& cfg);

GridFn make_datum(const ExperimentConfig& cfg);
Hamiltonian make_hamiltonian(const ExperimentConfig& cfg, const GridFn& u0);
Path make_path(const ExperimentConfig& cfg);
std::vector<double> record_times(const ExperimentConfig& cfg);
SolveOptions solve_options(const ExperimentConfig& cfg);

}  // namespace hjlab
