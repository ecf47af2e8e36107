#include "hjlab/pathwise.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace hjlab {

namespace {

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// u_cur = S_{run_sign}(run_inc) u_base; same-sign increments are recomputed from
// u_base so a run costs one operator application however it is chopped up
struct FlowState {
    const Hamiltonian& H;
    const SolveOptions& opt;
    double tmin;
    GridFn base, cur;
    int run_sign = 0;
    double run_inc = 0;
    double pending = 0;
    int calls = 0;
    int merged = 0;
    bool nonneg;
    GridFn last;  // most recent state handed out, and the flow direction that produced it
    int last_sign = 0;

    FlowState(const GridFn& u0, const Hamiltonian& H_, const SolveOptions& o)
        : H(H_), opt(o), tmin(t_min(H_, u0.grid())), base(u0), cur(u0),
          nonneg(H_(0.0) == 0 && H_(H_.argmin()) >= 0), last(u0) {}

    // for H >= 0 the flow is monotone in time (up for S+, down for S-); states recomputed
    // from base can break that by an ulp, so take the envelope with the previous one
    GridFn emit(GridFn u, int s) {
        if (nonneg && s == last_sign) {
            std::vector<double> r(u.values());
            for (int i = 0; i < u.size(); ++i) r[i] = s > 0 ? std::max(r[i], last[i]) : std::min(r[i], last[i]);
            u = GridFn(u.grid(), std::move(r));
        }
        last = u;
        last_sign = s;
        return u;
    }

    GridFn apply(const GridFn& u, double t, int s) {
        ++calls;
        return hopf_lax(u, H, t, s, opt.hopf_lax);
    }

    void commit_pending() {
        const int s = sign_of(pending);
        if (s == 0) return;
        const double a = std::abs(pending);
        if (s == run_sign) {
            run_inc += a;
            cur = emit(apply(base, run_inc, run_sign), run_sign);
        } else if (a >= tmin) {
            base = cur;
            run_sign = s;
            run_inc = a;
            cur = emit(apply(base, run_inc, run_sign), run_sign);
        } else {
            return;  // too small to reverse the run, keep accumulating
        }
        pending = 0;
    }

    // state after an extra signed increment on top of everything committed
    GridFn peek(double extra, bool& approximate) {
        const double net = pending + extra;
        const int s = sign_of(net);
        approximate = false;
        if (s == 0) return cur;
        if (s == run_sign) return emit(apply(base, run_inc + std::abs(net), run_sign), run_sign);
        if (std::abs(net) >= tmin) return emit(apply(cur, std::abs(net), s), s);
        approximate = true;
        return cur;
    }
};

void refuse_small(double net, double tmin, double t) {
    throw SolverRefusal("increment too small for grid at t=" + fmt17(t) + ": net increment " + fmt17(net) +
                        " below t_min=" + fmt17(tmin) + "; coarsen record_times or refine the grid");
}

}  // namespace

Trajectory solve_pathwise(const GridFn& u0, const Hamiltonian& H, const Path& p, std::vector<double> record_times,
                          const SolveOptions& opt) {
    std::sort(record_times.begin(), record_times.end());
    record_times.erase(std::unique(record_times.begin(), record_times.end()), record_times.end());
    const double T = p.T();
    for (double r : record_times)
        if (!(r >= 0) || r > T * (1 + 1e-12))
            throw std::invalid_argument("record time " + fmt17(r) + " outside [0, " + fmt17(T) + "]");

    const double tol = opt.merge_tol < 0 ? default_merge_tol(p) : opt.merge_tol;
    const auto segs = monotone_segments(p, tol);

    Trajectory traj{{}, {}, {}, p, H.id()};
    FlowState st(u0, H, opt);
    std::size_t next = 0;
    auto record = [&](double t, GridFn u, bool approx) {
        if (approx && opt.strict) refuse_small(st.pending, st.tmin, t);
        traj.snapshot_times.push_back(t);
        traj.snapshots.push_back(std::move(u));
        traj.approximate.push_back(approx ? 1 : 0);
    };

    // record times before the first move (or on a constant path) see u0
    const double first_move = segs.empty() ? T : segs.front().t_start;
    while (next < record_times.size() && (record_times[next] <= first_move || segs.empty())) {
        record(record_times[next], u0, false);
        ++next;
    }

    for (const auto& seg : segs) {
        while (next < record_times.size() && record_times[next] <= seg.t_end) {
            const double r = record_times[next];
            const double partial = r <= seg.t_start ? 0.0 : p(r) - seg.zeta_start;
            bool approx = false;
            GridFn u = st.peek(partial, approx);
            record(r, std::move(u), approx);
            ++next;
        }
        st.pending += seg.sign() * seg.increment;
        const double before = st.pending;
        st.commit_pending();
        if (st.pending != 0 && before != 0) {
            ++st.merged;
            if (opt.strict) refuse_small(st.pending, st.tmin, seg.t_end);
        }
    }
    while (next < record_times.size()) {
        record(record_times[next], st.cur, st.pending != 0);
        ++next;
    }
    traj.operator_calls = st.calls;
    traj.merged_increments = st.merged;
    return traj;
}

GridFn solve_skeleton(const GridFn& u0, const Hamiltonian& H, const Path& p, double T, const SolveOptions& opt) {
    const auto sk = skeleton(p, T);
    auto traj = solve_pathwise(u0, H, sk.reduced, {sk.reduced.T()}, opt);
    return traj.snapshots.back();
}

Trajectory solve_skeleton_trajectory(const GridFn& u0, const Hamiltonian& H, const Path& p,
                                     std::vector<double> record_times, const SolveOptions& opt) {
    std::sort(record_times.begin(), record_times.end());
    record_times.erase(std::unique(record_times.begin(), record_times.end()), record_times.end());
    Trajectory traj{{}, {}, {}, p, H.id()};
    for (double r : record_times) {
        if (!(r >= 0) || r > p.T() * (1 + 1e-12))
            throw std::invalid_argument("record time " + fmt17(r) + " outside [0, " + fmt17(p.T()) + "]");
        if (r == 0) {
            traj.snapshot_times.push_back(0);
            traj.snapshots.push_back(u0);
            traj.approximate.push_back(0);
            continue;
        }
        const auto sk = skeleton(p, std::min(r, p.T()));
        auto sub = solve_pathwise(u0, H, sk.reduced, {sk.reduced.T()}, opt);
        traj.snapshot_times.push_back(r);
        traj.snapshots.push_back(std::move(sub.snapshots.back()));
        traj.approximate.push_back(sub.approximate.back());
        traj.operator_calls += sub.operator_calls;
        traj.merged_increments += sub.merged_increments;
    }
    return traj;
}

OracleFlux parse_oracle_flux(const std::string& s) {
    if (s == "godunov") return OracleFlux::godunov;
    if (s == "lax_friedrichs") return OracleFlux::lax_friedrichs;
    throw std::invalid_argument("unknown oracle flux '" + s + "' (expected godunov or lax_friedrichs)");
}

std::string to_string(OracleFlux f) { return f == OracleFlux::godunov ? "godunov" : "lax_friedrichs"; }

GridFn solve_monotone_scheme(const GridFn& u0, const Hamiltonian& H, const Path& p, double cfl, OracleFlux flux) {
    if (!(cfl > 0) || cfl > 0.5) throw std::invalid_argument("monotone scheme: cfl must lie in (0, 0.5]");
    const int n = u0.size();
    const double h = u0.grid().h();
    const double vmax = H.vmax();
    // critical point of H, so interval extrema of G = rate * H are exact
    const double pstar = H.argmin();
    std::vector<double> u = u0.values(), nu(n);
    const auto& ts = p.times();
    const auto& zs = p.values();
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double dur = ts[k] - ts[k - 1];
        const double rate = (zs[k] - zs[k - 1]) / dur;
        if (rate == 0) continue;
        const double alpha = std::abs(rate) * vmax;
        const auto steps = static_cast<long long>(std::ceil(dur * alpha / (cfl * h) - 1e-12));
        const double dt = dur / static_cast<double>(std::max(1LL, steps));
        for (long long s = 0; s < std::max(1LL, steps); ++s) {
            for (int i = 0; i < n; ++i) {
                const double up = u[i + 1 == n ? 0 : i + 1], um = u[i == 0 ? n - 1 : i - 1];
                const double pp = (up - u[i]) / h, pm = (u[i] - um) / h;
                double g;
                if (flux == OracleFlux::lax_friedrichs) {
                    g = rate * H(0.5 * (pp + pm)) + 0.5 * alpha * (pp - pm);
                } else {
                    // max of G over [pm, pp] when pm <= pp, min over [pp, pm] otherwise
                    const double lo = std::min(pm, pp), hi = std::max(pm, pp);
                    double gmax = std::max(rate * H(lo), rate * H(hi)), gmin = std::min(rate * H(lo), rate * H(hi));
                    if (pstar > lo && pstar < hi) {
                        gmax = std::max(gmax, rate * H(pstar));
                        gmin = std::min(gmin, rate * H(pstar));
                    }
                    g = pm <= pp ? gmax : gmin;
                }
                nu[i] = u[i] + dt * g;
            }
            u.swap(nu);
        }
    }
    return GridFn(u0.grid(), std::move(u));
}

void write_trajectory(const std::string& dir, const Trajectory& traj, const std::string& path_info_json) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::ordered_json m;
    const auto& g = traj.snapshots.empty() ? PeriodicGrid1D(8, 1.0) : traj.snapshots.front().grid();
    m["grid"] = {{"n", g.n()}, {"period", g.period()}};
    m["hamiltonian"] = traj.hamiltonian_id;
    m["path"] = nlohmann::ordered_json::parse(path_info_json);
    m["path"]["T"] = traj.path.T();
    m["path"]["samples"] = traj.path.size();
    m["operator_calls"] = traj.operator_calls;
    m["merged_increments"] = traj.merged_increments;
    auto snaps = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
        write_csv((fs::path(dir) / name).string(), traj.snapshots[k]);
        snaps.push_back({{"t", traj.snapshot_times[k]}, {"file", name}, {"approximate", traj.approximate[k] != 0}});
    }
    m["snapshots"] = snaps;
    write_csv((fs::path(dir) / "path.csv").string(), traj.path);
    std::ofstream os(fs::path(dir) / "manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + dir);
    os << m.dump(2) << '\n';
}

}  // namespace hjlab
