#pragma once

#include <string>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/hopflax.hpp"
#include "hjlab/paths.hpp"

namespace hjlab {

struct SolveOptions {
    HopfLaxOptions hopf_lax;
    double merge_tol = -1;  // negative: default_merge_tol(path)
    bool strict = false;    // refuse instead of flagging approximate snapshots
};

struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<GridFn> snapshots;
    std::vector<char> approximate;  // snapshot reused the last computed state
    Path path;
    std::string hamiltonian_id;
    int operator_calls = 0;
    int merged_increments = 0;  // opposite-sign increments below t_min absorbed forward
};

// composes S+ / S- over the monotone segments of p
Trajectory solve_pathwise(const GridFn& u0, const Hamiltonian& H, const Path& p, std::vector<double> record_times,
                          const SolveOptions& opt = {});

// solve along skeleton(p, T).reduced and return u(., T)
GridFn solve_skeleton(const GridFn& u0, const Hamiltonian& H, const Path& p, double T, const SolveOptions& opt = {});

// one skeleton solve per record time; the default pipeline for sampled Brownian paths
Trajectory solve_skeleton_trajectory(const GridFn& u0, const Hamiltonian& H, const Path& p,
                                     std::vector<double> record_times, const SolveOptions& opt = {});

enum class OracleFlux {
    godunov,         // exact Riemann flux, least diffusive monotone choice
    lax_friedrichs,  // global viscosity max|H'| over the slope range
};

OracleFlux parse_oracle_flux(const std::string& s);
std::string to_string(OracleFlux f);

// explicit monotone scheme for u_t = H(u_x) zeta'(t), each linear piece stepped exactly
GridFn solve_monotone_scheme(const GridFn& u0, const Hamiltonian& H, const Path& p, double cfl,
                             OracleFlux flux = OracleFlux::godunov);

// directory with manifest.json and one CSV per snapshot; path_info is a JSON text object
void write_trajectory(const std::string& dir, const Trajectory& traj, const std::string& path_info_json = "{}");

}  // namespace hjlab
