#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/pathwise.hpp"

namespace hjlab {

struct SeriesPoint {
    double t, value;
};

struct LongTimeRun {
    std::vector<SeriesPoint> oscillation_series, max_series, min_series;
    std::optional<double> converged_at;  // first record time with oscillation <= eps_conv
    double limit_estimate;               // midpoint of the final max and min
    double final_oscillation;
};

// H must vanish at 0 and be nonnegative; throws std::logic_error if the recorded max/min
// series break monotonicity
LongTimeRun longtime_run(const GridFn& u0, const Hamiltonian& H, const Path& p, std::vector<double> record_times,
                         double eps_conv, const SolveOptions& opt = {});

// 1 - |x - 1| on the period-2 grid
GridFn tent_datum(int grid_n);

// limit estimate of du = |u_x| dzeta from the tent datum, solved along the skeleton up to T
double tent_limit(const Path& p, double T, int grid_n);

struct MonteCarloOptions {
    int n_paths = 500;
    std::uint64_t seed0 = 1;
    double T = 4.0;
    double dt = 1e-3;
    int grid_n = 256;
    double eps_conv = 1e-2;
    double record_dt = 0.05;  // spacing of the times scanned for converged_at
    int threads = 0;          // 0: hardware concurrency
};

struct LimitEnsemble {
    std::vector<std::uint64_t> seeds;
    std::vector<double> limits;
    std::vector<double> final_oscillation;
    std::vector<std::optional<double>> converged_at;
    double mean, variance;  // sample variance
    double symmetry_stat;   // Kolmogorov-Smirnov distance between {c} and {1 - c}
};

// two-sample Kolmogorov-Smirnov statistic
double ks_distance(std::vector<double> a, std::vector<double> b);

LimitEnsemble random_limit_montecarlo(const MonteCarloOptions& opt);

struct EnsembleThresholds {
    double min_variance = 0.01;
    double max_mean_offset = 0.05;
    double max_ks = 0.15;
};

struct EnsembleVerdict {
    bool variance_ok, mean_ok, symmetry_ok;
    bool ok() const { return variance_ok && mean_ok && symmetry_ok; }
};
EnsembleVerdict judge(const LimitEnsemble& e, const EnsembleThresholds& th = {});

// seed,limit,final_oscillation,converged_at
void write_ensemble_csv(std::ostream& os, const LimitEnsemble& e);

// piecewise-linear path within eps/2 of sign * t on [0, T]
Path event_surrogate(int sign, double eps, double T);

struct ConditionedReport {
    double eps;
    double plus_min;     // min of u(., T) along the surrogate near +t
    double minus_max;    // max of u(., T) along the surrogate near -t
    double ramp_up;      // limit along zeta = t
    double ramp_down;    // limit along zeta = -t
    bool plus_ok, minus_ok, ramps_ok;
    bool ok() const { return plus_ok && minus_ok && ramps_ok; }
};

// eps = 1/(4 Lip) for the tent datum, T = 2
ConditionedReport conditioned_events_check(double eps = 0.25, double T = 2.0, int grid_n = 256);

// first Brownian path (seeds seed0, seed0 + 1, ...) staying within eps of sign * t on [0, T]
std::optional<Path> rejection_sample_event(std::uint64_t seed0, int sign, double eps, double T, double dt,
                                           int max_tries);

}  // namespace hjlab
